"""Chain specifications and their linear-dynamics generators.

An N-mode bosonic chain couples neighbouring modes through beam-splitter
(hopping) and two-mode-squeezing (pairing) interactions, with optional
single-mode squeezing on each site:

    H = sum_j eta_j/2 * a_j^2 + sum_j (g_j a_j+ a_{j+1} + J_j a_j+ a_{j+1}+)
        + h.c.

The Heisenberg equations of motion close on the vector Phi = [a, a+], giving
i d/dt Phi = M Phi with a 2N x 2N block matrix M = [[A, B], [-B*, -A*]].
This module validates parameter records, builds M, and converts it to the
real generator K of the quadrature dynamics d/dt beta = K beta in the
interleaved ordering beta = (X1, P1, ..., XN, PN).
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    ConfigError,
    ImaginaryResidual,
    LengthMismatch,
    NonFiniteParameter,
    NonPositiveN,
)

__all__ = [
    "ChainSpec",
    "BdgMatrix",
    "RealGenerator",
    "symplectic_form",
    "build_chain_spec",
    "build_bdg_matrix",
    "quadrature_generator",
    "chain_spec_to_config",
    "chain_spec_to_json",
    "chain_spec_from_json",
    "particle_hole_residual",
]

_CHAIN_KEYS = ("n", "g", "phi", "J", "eta")


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the 2N x 2N symplectic form, a direct sum of [[0, 1], [-1, 0]]."""
    omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), omega)


def _is_scalar(value) -> bool:
    return np.isscalar(value) or (isinstance(value, np.ndarray) and value.ndim == 0)


def _as_tuple(value, length: int, name: str, dtype) -> tuple:
    """Coerce a scalar (broadcast) or exact-length sequence to a tuple."""
    if isinstance(value, (list, tuple, np.ndarray)) and not _is_scalar(value) and len(value) == 0:
        value = 0  # empty sequence means "all zeros"
    try:
        if _is_scalar(value):
            arr = np.full(length, value, dtype=dtype)
        else:
            arr = np.asarray(value, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} is not convertible to {dtype.__name__}: {exc}") from exc
    if arr.shape != (length,):
        raise LengthMismatch(f"{name} must have length {length}, got shape {arr.shape}")
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise NonFiniteParameter(f"{name} contains NaN or infinite entries")
    return tuple(arr.tolist())


@dataclass(frozen=True)
class ChainSpec:
    """Validated parameter record for an open N-mode chain.

    Attributes
    ----------
    n_modes:
        Number of modes N (at least 1).
    hopping:
        N-1 complex beam-splitter rates, one per bond; the phase of each
        entry is the hopping phase on that bond.
    pairing:
        N-1 nonnegative two-mode-squeezing rates, one per bond.
    sms:
        N single-mode-squeezing rates, one per site.  Real in all bundled
        experiments; complex values are accepted and conjugated where the
        equations of motion require.
    """

    n_modes: int
    hopping: tuple[complex, ...] = field(default=())
    pairing: tuple[float, ...] = field(default=())
    sms: tuple[complex, ...] = field(default=())

    def __post_init__(self):
        if isinstance(self.n_modes, bool) or not isinstance(self.n_modes, (int, np.integer)):
            raise NonPositiveN(f"n_modes must be a positive integer, got {self.n_modes!r}")
        if self.n_modes < 1:
            raise NonPositiveN(f"n_modes must be a positive integer, got {self.n_modes}")
        n = int(self.n_modes)
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "hopping", _as_tuple(self.hopping, n - 1, "hopping", complex))
        object.__setattr__(self, "pairing", _as_tuple(self.pairing, n - 1, "pairing", float))
        object.__setattr__(self, "sms", _as_tuple(self.sms, n, "sms", complex))
        if any(j < 0 for j in self.pairing):
            raise ConfigError("pairing rates must be nonnegative")

    @classmethod
    def uniform(cls, n_modes: int, g: float = 0.0, j: float = 0.0,
                eta: float = 0.0, phi: float = 0.0) -> "ChainSpec":
        """Build a chain with identical rates on every bond and site."""
        return cls(
            n_modes=n_modes,
            hopping=complex(g) * cmath.exp(1j * phi),
            pairing=float(j),
            sms=complex(eta),
        )


def build_chain_spec(config: Mapping) -> ChainSpec:
    """Validate a parameter record and expand scalars to full sequences.

    The record uses the keys ``n`` (required), ``g``, ``phi``, ``J`` and
    ``eta``; each of the last four may be a scalar (broadcast) or a sequence
    of the required length (N-1 for bond quantities, N for ``eta``).  The
    hopping rates are assembled as g * exp(i phi) per bond.
    """
    if not isinstance(config, Mapping):
        raise ConfigError(f"chain config must be a mapping, got {type(config).__name__}")
    unknown = set(config) - set(_CHAIN_KEYS)
    if unknown:
        raise ConfigError(f"unknown chain config keys: {sorted(unknown)}")
    if "n" not in config:
        raise ConfigError("chain config is missing the mode count 'n'")
    n = config["n"]
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise NonPositiveN(f"'n' must be an integer, got {n!r}")
    if n < 1:
        raise NonPositiveN(f"'n' must be positive, got {n}")
    n = int(n)
    bonds = n - 1
    g = _as_tuple(config.get("g", 0.0), bonds, "g", float)
    phi = _as_tuple(config.get("phi", 0.0), bonds, "phi", float)
    pairing = _as_tuple(config.get("J", 0.0), bonds, "J", float)
    sms = _as_tuple(config.get("eta", 0.0), n, "eta", complex)
    hopping = tuple(gv * cmath.exp(1j * pv) for gv, pv in zip(g, phi))
    return ChainSpec(n_modes=n, hopping=hopping, pairing=pairing, sms=sms)


def chain_spec_to_config(spec: ChainSpec) -> dict:
    """Serialize a spec back to the plain-number parameter record."""
    if any(e.imag != 0 for e in spec.sms):
        eta = [[e.real, e.imag] for e in spec.sms]
    else:
        eta = [e.real for e in spec.sms]
    return {
        "n": spec.n_modes,
        "g": [abs(h) for h in spec.hopping],
        "phi": [cmath.phase(h) if h != 0 else 0.0 for h in spec.hopping],
        "J": list(spec.pairing),
        "eta": eta,
    }


def chain_spec_to_json(spec: ChainSpec) -> str:
    return json.dumps(chain_spec_to_config(spec))


def chain_spec_from_json(text: str) -> ChainSpec:
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON chain description: {exc}") from exc
    if isinstance(config, Mapping) and isinstance(config.get("eta"), list):
        eta = config["eta"]
        if any(isinstance(e, list) for e in eta):
            try:
                eta = [complex(*e) if isinstance(e, list) else complex(e) for e in eta]
            except TypeError as exc:
                raise ConfigError(f"bad complex eta encoding: {exc}") from exc
            config = dict(config)
            config["eta"] = eta
    return build_chain_spec(config)


@dataclass(frozen=True)
class BdgMatrix:
    """The 2N x 2N dynamical matrix M = [[A, B], [-B*, -A*]].

    ``block_a`` (Hermitian) collects the hopping couplings and ``block_b``
    (symmetric) the squeezing couplings; see :func:`build_bdg_matrix`.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % 2:
            raise ConfigError(f"dynamical matrix must be square and even-sized, got {data.shape}")
        if not (np.all(np.isfinite(data.real)) and np.all(np.isfinite(data.imag))):
            raise NonFiniteParameter("dynamical matrix contains NaN or infinite entries")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def n_modes(self) -> int:
        return self.size // 2

    @property
    def block_a(self) -> np.ndarray:
        n = self.n_modes
        return self.data[:n, :n]

    @property
    def block_b(self) -> np.ndarray:
        n = self.n_modes
        return self.data[:n, n:]


def build_bdg_matrix(spec: ChainSpec) -> BdgMatrix:
    """Assemble the dynamical matrix of the chain's Heisenberg equations.

    Collecting the coefficient of each operator in i d a_j/dt = [a_j, H]
    row by row gives

        A[j, j+1] = g_j,      A[j+1, j] = conj(g_j),
        B[j, j]   = conj(eta_j),
        B[j, j+1] = B[j+1, j] = J_j,

    and the adjoint equations fix the lower half to [-B*, -A*].  A is
    Hermitian and B symmetric exactly, entry by entry.
    """
    n = spec.n_modes
    a = np.zeros((n, n), dtype=complex)
    b = np.zeros((n, n), dtype=complex)
    if n > 1:
        hop = np.asarray(spec.hopping, dtype=complex)
        pair = np.asarray(spec.pairing, dtype=float)
        a += np.diag(hop, 1) + np.diag(hop.conj(), -1)
        b += np.diag(pair, 1) + np.diag(pair, -1)
    b += np.diag(np.asarray(spec.sms, dtype=complex).conj())
    m = np.block([[a, b], [-b.conj(), -a.conj()]])
    return BdgMatrix(data=m)


@dataclass(frozen=True)
class RealGenerator:
    """Real matrix K generating d/dt beta = K beta in quadrature ordering."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % 2:
            raise ConfigError(f"generator must be square and even-sized, got {data.shape}")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def n_modes(self) -> int:
        return self.size // 2


def _interleave_permutation(n_modes: int) -> np.ndarray:
    # maps block ordering (X1..XN, P1..PN) to interleaved (X1, P1, ...)
    perm = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        perm[2 * j, j] = 1.0
        perm[2 * j + 1, n_modes + j] = 1.0
    return perm


def quadrature_generator(m: BdgMatrix) -> RealGenerator:
    """Convert the mode-operator dynamics to the real quadrature generator.

    With X = (a + a+)/sqrt(2) and P = -i(a - a+)/sqrt(2), the basis change
    U Phi = (X1..XN, P1..PN) turns i d/dt Phi = M Phi into d/dt beta = K beta
    with K = -i U M U^-1, which is real whenever M has the block structure
    produced by :func:`build_bdg_matrix`.  The spectrum of K is -i times the
    spectrum of M.

    Raises
    ------
    ImaginaryResidual
        If the transformed generator has an entry with imaginary part above
        1e-12 relative to its magnitude scale, indicating that the input was
        not a valid dynamical matrix.
    """
    n = m.n_modes
    ident = np.eye(n)
    u = np.block([[ident, ident], [-1j * ident, 1j * ident]]) / np.sqrt(2.0)
    u_inv = np.block([[ident, 1j * ident], [ident, -1j * ident]]) / np.sqrt(2.0)
    k_block = -1j * (u @ m.data @ u_inv)
    scale = max(1.0, float(np.abs(k_block).max()))
    residual = float(np.abs(k_block.imag).max())
    if residual > 1e-12 * scale:
        raise ImaginaryResidual(
            f"quadrature generator has imaginary residual {residual:.3e} "
            f"(scale {scale:.3e}); the input is not a valid dynamical matrix"
        )
    perm = _interleave_permutation(n)
    return RealGenerator(data=perm @ k_block.real @ perm.T)


def particle_hole_residual(m: BdgMatrix) -> float:
    """Max-entry residual of the particle-hole symmetry Sx M Sx + M* = 0."""
    n = m.n_modes
    swap = np.zeros((2 * n, 2 * n))
    swap[:n, n:] = np.eye(n)
    swap[n:, :n] = np.eye(n)
    return float(np.abs(swap @ m.data @ swap + m.data.conj()).max())
