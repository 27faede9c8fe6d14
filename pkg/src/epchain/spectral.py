"""Non-Hermitian spectrum classification and exceptional-point detection.

The dynamical matrix of a chain with squeezing interactions is non-Hermitian
even though the underlying Hamiltonian is Hermitian.  Its 2N eigenvalues are
closed under lambda -> -conj(lambda) and fall into three regimes: purely
imaginary, purely real, or mixed.  Where eigenvalues and eigenvectors
coalesce the matrix acquires nontrivial Jordan blocks; this module computes
those block structures numerically (rank staircase of matrix powers with
singular-value thresholding), groups eigenvalues into exceptional-point
clusters, locates spectral transitions along 1-d parameter families, and
scans the exceptional surface of three-mode chains.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .chain import BdgMatrix, ChainSpec, build_bdg_matrix
from .errors import EigensolverFailure, NoTransition, RankAmbiguity

__all__ = [
    "Region",
    "SpectrumReport",
    "EpCluster",
    "EsPoint",
    "eigenspectrum",
    "classify_region",
    "spectrum_report",
    "jordan_structure",
    "detect_eps",
    "locate_ep_1d",
    "scan_exceptional_surface",
]

DEFAULT_REGION_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-8
DEFAULT_CLUSTER_TOL = 1e-7


class Region(enum.Enum):
    """Spectral regime of a dynamical matrix."""

    PURELY_IMAGINARY = "purely_imaginary"
    PURELY_REAL = "purely_real"
    MIXED = "mixed"


@dataclass(frozen=True)
class SpectrumReport:
    """Sorted eigenvalues with their regime label.

    ``boundary`` is set when the label is not stable under halving or
    doubling the classification tolerance, which flags points sitting on a
    spectral transition.
    """

    eigenvalues: tuple[complex, ...]
    region: Region
    tolerance: float
    boundary: bool = False


@dataclass(frozen=True)
class EpCluster:
    """A coalescing eigenvalue cluster with its Jordan block structure.

    ``jordan_blocks`` lists block sizes in decreasing order; ``order`` is the
    largest block.  Clusters of order 1 are ordinary degeneracies and are
    never reported as exceptional points.
    """

    center: complex
    algebraic_multiplicity: int
    jordan_blocks: tuple[int, ...]

    @property
    def order(self) -> int:
        return max(self.jordan_blocks)

    @property
    def geometric_multiplicity(self) -> int:
        return len(self.jordan_blocks)


def eigenspectrum(m: BdgMatrix) -> np.ndarray:
    """Eigenvalues of the dynamical matrix, sorted by (real, imaginary) part."""
    try:
        values = np.linalg.eigvals(m.data)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(f"dense eigensolver failed: {exc}") from exc
    order = np.lexsort((values.imag, values.real))
    return values[order]


def _region_threshold(eigenvalues: np.ndarray, tol: float) -> float:
    scale = float(np.abs(eigenvalues).max()) if len(eigenvalues) else 0.0
    return max(tol * scale, 1e-12)


def _label(eigenvalues: np.ndarray, threshold: float) -> Region:
    # Zero eigenvalues satisfy both conditions, so they never force MIXED;
    # an all-zero spectrum is labelled purely imaginary.
    if np.all(np.abs(eigenvalues.real) <= threshold):
        return Region.PURELY_IMAGINARY
    if np.all(np.abs(eigenvalues.imag) <= threshold):
        return Region.PURELY_REAL
    return Region.MIXED


def classify_region(eigenvalues: Sequence[complex], tol: float = DEFAULT_REGION_TOL) -> Region:
    """Classify a spectrum as purely imaginary, purely real, or mixed.

    The threshold is ``tol`` relative to the largest eigenvalue magnitude,
    with an absolute floor of 1e-12.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    values = np.asarray(eigenvalues, dtype=complex)
    return _label(values, _region_threshold(values, tol))


def spectrum_report(m: BdgMatrix, tol: float = DEFAULT_REGION_TOL) -> SpectrumReport:
    """Eigensolve plus region classification, with a boundary-stability flag."""
    values = eigenspectrum(m)
    region = _label(values, _region_threshold(values, tol))
    boundary = (
        _label(values, _region_threshold(values, tol / 2)) != region
        or _label(values, _region_threshold(values, tol * 2)) != region
    )
    return SpectrumReport(
        eigenvalues=tuple(values.tolist()),
        region=region,
        tolerance=tol,
        boundary=boundary,
    )


def jordan_structure(m: BdgMatrix, center: complex, tol: float = DEFAULT_RANK_TOL) -> tuple[int, ...]:
    """Jordan block sizes of the eigenvalue cluster at ``center``.

    Uses the rank staircase r_k = rank((M - center)^k): the number of blocks
    of size at least k equals r_{k-1} - r_k.  Ranks come from singular-value
    thresholding at ``tol * s1**k`` where s1 is the largest singular value of
    M - center; referencing the k-th power to s1**k keeps the threshold
    meaningful when the power itself collapses to rounding debris, as it does
    for nilpotent matrices.

    Returns block sizes sorted decreasing.  Sizes of eigenvalues far from
    ``center`` never enter the staircase, so the sizes sum to the algebraic
    multiplicity of the cluster.

    Raises
    ------
    RankAmbiguity
        If any singular value falls within a factor of 10 of the threshold,
        in which case the rank (and hence the block structure) cannot be
        trusted at this tolerance.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    size = m.size
    shifted = m.data - complex(center) * np.eye(size)
    s1 = float(np.linalg.norm(shifted, 2))
    ranks = [size]
    power = np.eye(size, dtype=complex)
    for k in range(1, size + 1):
        power = power @ shifted
        try:
            singular = np.linalg.svd(power, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise EigensolverFailure(f"SVD failed on power {k}: {exc}") from exc
        threshold = tol * s1**k
        if threshold > 0:
            ambiguous = (singular > threshold / 10) & (singular < threshold * 10)
            if np.any(ambiguous):
                raise RankAmbiguity(
                    f"singular value {singular[ambiguous][0]:.3e} within a factor 10 "
                    f"of the rank threshold {threshold:.3e} at power {k}; "
                    "adjust the tolerance"
                )
        rank = int(np.sum(singular > threshold))
        if rank == ranks[-1]:
            break
        ranks.append(rank)
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    blocks: list[int] = []
    for k, count_ge in enumerate(at_least, start=1):
        exactly = count_ge - (at_least[k] if k < len(at_least) else 0)
        blocks.extend([k] * exactly)
    return tuple(sorted(blocks, reverse=True))


def _cluster_eigenvalues(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage clustering of complex values at the given radius."""
    order = np.lexsort((values.imag, values.real))
    parent = list(range(len(values)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[order[i]] - values[order[j]]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(order[i])
    return [values[idx] for idx in groups.values()]


def detect_eps(
    m: BdgMatrix,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[EpCluster, ...]:
    """Find exceptional points: eigenvalue clusters with Jordan order >= 2.

    Eigenvalues are grouped by single-linkage at radius
    ``max(cluster_tol, (2N eps)^(1/2N)) * max(1, ||M||)``.  The second term
    accounts for finite-precision scatter: a Jordan block of size k responds
    to perturbations of size eps by spreading its eigenvalue over a disk of
    radius eps^(1/k), so high-order coalescences always appear as clusters
    far wider than machine precision.  Over-grouping is harmless because the
    rank staircase is the arbiter: a group whose block sizes do not add up to
    its multiplicity is re-split at the bare ``cluster_tol`` radius, and
    groups that end up diagonalizable are dropped.
    """
    values = eigenspectrum(m)
    size = m.size
    scale = max(1.0, float(np.linalg.norm(m.data, 2)))
    debris = float(size * np.finfo(float).eps) ** (1.0 / size)
    wide = max(cluster_tol, debris) * scale
    tight = cluster_tol * scale

    clusters: list[EpCluster] = []
    pending = _cluster_eigenvalues(values, wide)
    while pending:
        group = pending.pop()
        if len(group) < 2:
            continue
        center = complex(np.mean(group))
        blocks = jordan_structure(m, center, rank_tol)
        if sum(blocks) != len(group):
            # grouped too widely: genuinely distinct eigenvalues were merged
            if len(group) > 1 and wide > tight:
                sub = _cluster_eigenvalues(np.asarray(group), tight)
                if len(sub) > 1:
                    pending.extend(sub)
            continue
        if blocks and blocks[0] >= 2:
            clusters.append(
                EpCluster(
                    center=center,
                    algebraic_multiplicity=len(group),
                    jordan_blocks=blocks,
                )
            )
    clusters.sort(key=lambda c: (c.center.real, c.center.imag))
    return tuple(clusters)


def _signature(spec: ChainSpec, tol: float) -> tuple[Region, int, int]:
    """Region label plus counts of real-axis and imaginary-axis eigenvalues.

    The counts change whenever an eigenvalue pair collides and leaves one of
    the axes, so they see transitions interior to the mixed region that the
    three-way label alone cannot.
    """
    values = eigenspectrum(build_bdg_matrix(spec))
    threshold = _region_threshold(values, tol)
    on_real = np.abs(values.imag) <= threshold
    on_imag = np.abs(values.real) <= threshold
    n_real = int(np.sum(on_real & ~on_imag))
    n_imag = int(np.sum(on_imag & ~on_real))
    return _label(values, threshold), n_real, n_imag


def locate_ep_1d(
    family: Callable[[float], ChainSpec],
    lo: float,
    hi: float,
    tol: float = 1e-6,
    grid_points: int = 129,
    region_tol: float = DEFAULT_REGION_TOL,
) -> tuple[float, ...]:
    """Locate spectral transition points of a one-parameter chain family.

    Scans ``grid_points`` values of the parameter on [lo, hi], computing for
    each the spectral signature (region label, number of real-axis
    eigenvalues, number of imaginary-axis eigenvalues), then bisects every
    signature change down to an interval of width ``tol`` and returns the
    sorted midpoints.  Results closer than twice ``tol`` are merged: a grid
    point landing exactly on a transition produces a zero-width signature
    plateau whose two edges are the same physical point.

    Raises
    ------
    NoTransition
        If the signature is uniform across the whole scan.
    """
    if not np.isfinite(lo) or not np.isfinite(hi) or hi <= lo:
        raise ValueError(f"bad interval [{lo}, {hi}]")
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    grid = np.linspace(lo, hi, grid_points)
    signatures = [_signature(family(float(x)), region_tol) for x in grid]
    found: list[float] = []
    for a, b, sig_a, sig_b in zip(grid, grid[1:], signatures, signatures[1:]):
        if sig_a == sig_b:
            continue
        left, right = float(a), float(b)
        left_sig = sig_a
        while right - left > tol:
            mid = 0.5 * (left + right)
            mid_sig = _signature(family(mid), region_tol)
            if mid_sig == left_sig:
                left = mid
            else:
                right = mid
        found.append(0.5 * (left + right))
    if not found:
        raise NoTransition(f"no spectral transition of the family on [{lo}, {hi}]")
    found.sort()
    merged: list[list[float]] = []
    for x in found:
        if merged and x - merged[-1][-1] <= 2 * tol:
            merged[-1].append(x)
        else:
            merged.append([x])
    return tuple(float(np.mean(group)) for group in merged)


@dataclass(frozen=True)
class EsPoint:
    """One grid point of an exceptional-surface scan of a three-mode chain."""

    g1: float
    g2: float
    j1: float
    j2: float
    residual: float
    on_surface: bool
    ep_order: int
    block_sizes: tuple[int, ...]
    kind: str  # "ep3_surface", "ep2_arc", or ""


def scan_exceptional_surface(
    g1_values: Iterable[float],
    g2_values: Iterable[float],
    j1_values: Iterable[float],
    j2_values: Iterable[float],
    tol: float = 1e-9,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    detect_everywhere: bool = False,
) -> list[EsPoint]:
    """Scan three-mode chains for the coalescence surface g1^2+g2^2 = J1^2+J2^2.

    For every grid combination the analytic condition residual
    ``|g1^2 + g2^2 - J1^2 - J2^2|`` is evaluated; where it is at most ``tol``
    (or always, with ``detect_everywhere``) the exceptional points of the
    chain are detected and classified: order-3 coalescences are surface
    points, order-2 coalescences on the line g1 = J1, g2 = J2 are arc points.
    """
    points: list[EsPoint] = []
    for g1 in g1_values:
        for g2 in g2_values:
            for j1 in j1_values:
                for j2 in j2_values:
                    residual = abs(g1**2 + g2**2 - j1**2 - j2**2)
                    on_surface = residual <= tol
                    order = 0
                    blocks: tuple[int, ...] = ()
                    kind = ""
                    if on_surface or detect_everywhere:
                        spec = ChainSpec(
                            n_modes=3, hopping=(complex(g1), complex(g2)),
                            pairing=(float(j1), float(j2)), sms=0,
                        )
                        eps = detect_eps(build_bdg_matrix(spec), cluster_tol, rank_tol)
                        if eps:
                            best = max(eps, key=lambda c: c.order)
                            order = best.order
                            blocks = best.jordan_blocks
                    if order >= 3:
                        kind = "ep3_surface"
                    elif order == 2 and abs(g1 - j1) <= tol and abs(g2 - j2) <= tol:
                        kind = "ep2_arc"
                    points.append(
                        EsPoint(
                            g1=float(g1), g2=float(g2), j1=float(j1), j2=float(j2),
                            residual=float(residual), on_surface=bool(on_surface),
                            ep_order=order, block_sizes=blocks, kind=kind,
                        )
                    )
    return points
