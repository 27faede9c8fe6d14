"""Gaussian covariance-matrix transport under the chain dynamics.

Zero-mean Gaussian states are fully described by their covariance matrix
sigma in the quadrature ordering (X1, P1, ..., XN, PN), with the vacuum
normalized to the identity.  Linear dynamics d/dt beta = K beta transports
covariances as sigma(t) = S sigma S^T with the symplectic propagator
S = exp(K t).  The exponential is always taken from t = 0 rather than by
step chaining, so results stay exact at exceptional points (where S is
polynomial times exponential in t) and no error accumulates in regimes of
exponential growth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .chain import RealGenerator, symplectic_form
from .errors import (
    AsymmetricInput,
    ConfigError,
    EpchainError,
    NegativeOccupancy,
    OverflowRisk,
    UnsortedTimes,
)

__all__ = [
    "GaussianState",
    "SymplecticPropagator",
    "initial_state",
    "propagator",
    "evolve",
    "evolve_trajectory",
    "GROWTH_CAP",
]

# ||K t|| above this would push exp(K t) toward the double-precision ceiling
GROWTH_CAP = 300.0

_SYMMETRY_RTOL = 1e-12
_BONA_FIDE_ATOL = 1e-9
_BONA_FIDE_RTOL = 1e-8
_SYMPLECTIC_RTOL = 1e-10


@dataclass(frozen=True)
class GaussianState:
    """Covariance matrix of a zero-mean N-mode Gaussian state.

    The matrix must be symmetric (to 1e-12 relative) and bona fide, meaning
    sigma + i Omega is positive semidefinite up to numerical slack.  Both are
    checked at construction; the stored matrix is exactly symmetrized.
    """

    n_modes: int
    cm: np.ndarray

    def __post_init__(self):
        cm = np.asarray(self.cm, dtype=float)
        n = self.n_modes
        if cm.shape != (2 * n, 2 * n):
            raise ConfigError(f"covariance matrix must be {2*n}x{2*n}, got {cm.shape}")
        norm = float(np.abs(cm).max())
        asym = float(np.abs(cm - cm.T).max())
        if asym > _SYMMETRY_RTOL * max(norm, 1.0):
            raise AsymmetricInput(
                f"covariance matrix asymmetry {asym:.3e} exceeds tolerance"
            )
        cm = 0.5 * (cm + cm.T)
        lowest = float(
            np.linalg.eigvalsh(cm + 1j * symplectic_form(n)).min()
        )
        if lowest < -max(_BONA_FIDE_ATOL, _BONA_FIDE_RTOL * norm):
            raise ConfigError(
                f"not a bona fide covariance matrix: min eig(sigma + i Omega) = {lowest:.3e}"
            )
        cm.setflags(write=False)
        object.__setattr__(self, "cm", cm)

    @property
    def purity_determinant(self) -> float:
        """det(sigma); equals 1 for pure states in this normalization."""
        return float(np.linalg.det(self.cm))


def initial_state(n_modes: int, thermal_occupancies: Sequence[float] | float | None = None) -> GaussianState:
    """Product thermal state with covariance diag(2 n_j + 1) per quadrature.

    ``thermal_occupancies`` may be a scalar (broadcast), a length-N sequence,
    or None for vacuum.  Vacuum gives the identity matrix.
    """
    if n_modes < 1:
        raise ConfigError(f"n_modes must be positive, got {n_modes}")
    if thermal_occupancies is None:
        occ = np.zeros(n_modes)
    else:
        occ = np.atleast_1d(np.asarray(thermal_occupancies, dtype=float))
        if occ.size == 1:
            occ = np.full(n_modes, occ[0])
        if occ.shape != (n_modes,):
            raise ConfigError(
                f"thermal_occupancies must have length {n_modes}, got shape {occ.shape}"
            )
    if np.any(occ < 0) or not np.all(np.isfinite(occ)):
        raise NegativeOccupancy(f"occupancies must be finite and nonnegative, got {occ}")
    diag = np.repeat(2.0 * occ + 1.0, 2)
    return GaussianState(n_modes=n_modes, cm=np.diag(diag))


@dataclass(frozen=True)
class SymplecticPropagator:
    """Propagator S(t) = exp(K t) with S Omega S^T = Omega."""

    s: np.ndarray
    t: float

    @property
    def n_modes(self) -> int:
        return self.s.shape[0] // 2


def propagator(k: RealGenerator, t: float) -> SymplecticPropagator:
    """Matrix exponential S(t) = exp(K t) by scaling and squaring.

    Valid at exceptional points, where K is non-diagonalizable and the
    entries of S are polynomials in t times exponentials.  The symplectic
    identity S Omega S^T = Omega is verified to 1e-10 relative before the
    propagator is returned.

    Raises
    ------
    OverflowRisk
        If ||K|| * |t| exceeds the growth cap of 300, in which case exp(K t)
        could exceed the range of double precision; the offending growth
        exponent is attached to the error.
    """
    if not np.isfinite(t):
        raise ConfigError(f"time must be finite, got {t}")
    exponent = float(np.linalg.norm(k.data, 2)) * abs(t)
    if exponent > GROWTH_CAP:
        raise OverflowRisk(
            f"propagation to t={t} has growth exponent {exponent:.1f} "
            f"(cap {GROWTH_CAP:.0f}); entries would overflow double precision",
            exponent=exponent,
        )
    s = expm(k.data * t)
    omega = symplectic_form(k.n_modes)
    residual = float(np.abs(s @ omega @ s.T - omega).max())
    scale = 1.0 + float(np.linalg.norm(s, 2)) ** 2
    if residual > _SYMPLECTIC_RTOL * scale:
        raise EpchainError(
            f"propagator lost symplecticity: residual {residual:.3e} at t={t}"
        )
    return SymplecticPropagator(s=s, t=float(t))


def evolve(state: GaussianState, k: RealGenerator, t: float) -> GaussianState:
    """Transport a covariance matrix: sigma(t) = S sigma S^T with S = exp(K t)."""
    if k.n_modes != state.n_modes:
        raise ConfigError(
            f"generator is for {k.n_modes} modes but the state has {state.n_modes}"
        )
    s = propagator(k, t).s
    cm = s @ state.cm @ s.T
    cm = 0.5 * (cm + cm.T)  # suppress round-off asymmetry of the transport
    return GaussianState(n_modes=state.n_modes, cm=cm)


def evolve_trajectory(
    state: GaussianState, k: RealGenerator, times: Sequence[float]
) -> list[GaussianState]:
    """Evolve the state to each sample time, each directly from t = 0."""
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ConfigError("times must be a nonempty 1-d sequence")
    if np.any(np.diff(ts) < 0):
        raise UnsortedTimes(f"times must be sorted ascending, got {ts}")
    return [evolve(state, k, float(t)) for t in ts]
