"""Single-excitation spectrum, mid-gap state detection and envelope fits."""

from __future__ import annotations

import enum
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .couplings import CouplingMatrix
from .errors import InsufficientSupportError, NumericalFailureError

# share of an in-gap state that must sit in the outer quarters of the chain
BOUNDARY_WEIGHT_MIN = 0.8


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns of ``modes``)."""

    energies: np.ndarray
    modes: np.ndarray = field(repr=False)

    @property
    def n_sites(self) -> int:
        return len(self.energies)


class EdgeSide(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    HYBRIDIZED = "hybridized"


@dataclass(frozen=True)
class EdgeStateReport:
    """Outcome of the mid-gap search.

    ``edge_side`` is ``None`` when no gap or no in-gap level was found; the
    chain is then reported as not topological instead of raising.
    """

    midgap_energies: tuple = ()
    midgap_indices: tuple = ()
    gap: tuple | None = None
    edge_side: EdgeSide | None = None
    sublattice_purity: float | None = None
    xi_loc: float | None = None
    fit_rms: float | None = None
    profile: np.ndarray | None = field(default=None, repr=False)

    @property
    def topological(self) -> bool:
        return len(self.midgap_energies) > 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("profile")
        d["edge_side"] = None if self.edge_side is None else self.edge_side.value
        d["midgap_energies"] = [float(e) for e in self.midgap_energies]
        d["midgap_indices"] = [int(i) for i in self.midgap_indices]
        d["gap"] = None if self.gap is None else [float(g) for g in self.gap]
        d["topological"] = self.topological
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def profile_csv(self) -> str:
        if self.profile is None:
            raise ValueError("report carries no edge profile")
        buf = io.StringIO()
        buf.write("site,amplitude\n")
        for j, a in enumerate(self.profile, start=1):
            buf.write(f"{j},{a:.17g}\n")
        return buf.getvalue()


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, CouplingMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=float)


def diagonalize(matrix) -> SpectralDecomposition:
    """Dense symmetric eigendecomposition of a coupling matrix.

    Raises:
        NumericalFailureError: if LAPACK fails or the result violates the
            residual/orthonormality checks. The message carries a hash of the
            matrix so the failing input can be identified.
    """
    h = _as_array(matrix)
    digest = hashlib.sha256(np.ascontiguousarray(h).tobytes()).hexdigest()[:16]
    if not np.all(np.isfinite(h)):
        raise NumericalFailureError(f"non-finite matrix entries (sha256 {digest})")
    try:
        energies, modes = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed on matrix sha256 {digest}") from exc
    scale = max(np.abs(h).max(), 1e-300)
    residual = np.abs(h @ modes - modes * energies).max()
    ortho = np.abs(modes.T @ modes - np.eye(len(energies))).max()
    if residual > 1e-10 * scale or ortho > 1e-10:
        raise NumericalFailureError(
            f"eigen-residual {residual:.2e}, orthonormality {ortho:.2e} (sha256 {digest})"
        )
    return SpectralDecomposition(energies=energies, modes=modes)


def _central_window(n: int) -> tuple[int, int]:
    width = max(int(round(0.2 * n)), min(n, 8))
    lo = max(0, n // 2 - width // 2)
    hi = min(n, lo + width)
    return lo, hi


def locate_gap(energies: np.ndarray, gap_fraction: float = 0.1):
    """Find the bulk gap among the central levels.

    Candidate gaps are spans ``E[i+k+1] - E[i]`` enclosing ``k <= 2`` levels,
    with at least two levels below and above. Enclosed levels count as in-gap
    only when both of their separations from the gap edges exceed
    ``gap_fraction`` of the span and twice the median level spacing of the
    whole spectrum. The widest valid span wins. A span below four median
    spacings is not a gap.

    Returns:
        ``(lower_index, upper_index)`` of the gap edges, or ``None``.
    """
    e = np.asarray(energies)
    n = len(e)
    if n < 3:
        return None
    lo, hi = _central_window(n)
    spacings = np.diff(e[lo:hi])
    if len(spacings) == 0:
        return None
    typical = float(np.median(np.diff(e)))
    best = None
    best_span = -1.0
    for k in (0, 1, 2):
        # keep at least two levels on either side of the gap
        for i in range(max(lo, 1), min(hi, n - 1) - k - 1):
            top = i + k + 1
            span = e[top] - e[i]
            if k:
                inner_lo = e[i + 1] - e[i]
                inner_hi = e[top] - e[i + k]
                floor = max(gap_fraction * span, 2 * typical)
                if min(inner_lo, inner_hi) <= floor:
                    continue
            if span > best_span * (1 + 1e-12):
                best, best_span = (i, top), span
    if best is None or best_span < 4 * typical:
        return None
    return best


def _edge_weights(vec: np.ndarray) -> tuple[float, float]:
    n = len(vec)
    m = max(1, n // 10)
    p = vec**2
    return float(p[:m].sum()), float(p[-m:].sum())


def _classify(vec: np.ndarray) -> EdgeSide:
    first, last = _edge_weights(vec)
    if first >= 10 * last:
        return EdgeSide.LEFT
    if last >= 10 * first:
        return EdgeSide.RIGHT
    return EdgeSide.HYBRIDIZED


def _rotate_to_left(block: np.ndarray) -> np.ndarray:
    # maximise weight on the left half within the span of the in-gap states
    n = block.shape[0]
    left = block[: n // 2]
    w, v = np.linalg.eigh(left.T @ left)
    vec = block @ v[:, -1]
    # deterministic sign: largest component positive
    k = np.argmax(np.abs(vec))
    return vec if vec[k] >= 0 else -vec


def find_edge_states(spec: SpectralDecomposition, gap_fraction: float = 0.1) -> EdgeStateReport:
    """Detect in-gap states and return the edge-localised combination.

    A pair of in-gap states (finite-size hybridised even/odd superpositions)
    is rotated into the combination with maximal left-half weight. In-gap
    levels of short chains whose weight is not concentrated in the outer
    quarters are bulk levels in a coarse spectrum and are not reported.
    """
    gap = locate_gap(spec.energies, gap_fraction)
    if gap is None:
        return EdgeStateReport()
    lo, hi = gap
    inner = tuple(range(lo + 1, hi))
    gap_edges = (float(spec.energies[lo]), float(spec.energies[hi]))
    if not inner:
        return EdgeStateReport(gap=gap_edges)
    block = spec.modes[:, list(inner)]
    if len(inner) > 1:
        vec = _rotate_to_left(block)
    else:
        vec = block[:, 0].copy()
        k = np.argmax(np.abs(vec))
        vec = vec if vec[k] >= 0 else -vec
    q = -(-len(vec) // 4)
    if np.sum(vec[:q] ** 2) + np.sum(vec[-q:] ** 2) < BOUNDARY_WEIGHT_MIN * np.sum(vec**2):
        return EdgeStateReport(gap=gap_edges)
    purity = float(np.sum(vec[0::2] ** 2) / np.sum(vec**2))
    return EdgeStateReport(
        midgap_energies=tuple(float(spec.energies[i]) for i in inner),
        midgap_indices=inner,
        gap=gap_edges,
        edge_side=_classify(vec),
        sublattice_purity=purity,
        profile=vec,
    )


def localization_fit(
    spec: SpectralDecomposition,
    report: EdgeStateReport,
    amplitude_floor: float = 1e-8,
    relative_floor: float = 1e-4,
) -> tuple[float, float]:
    """Least-squares fit of ln|psi_j| against j for the edge profile.

    Only the majority sublattice of the near-edge half chain enters, and only
    amplitudes above both ``amplitude_floor`` and ``relative_floor`` times the
    peak (far from the edge the 1/d^3 couplings leave a power-law tail).

    Returns:
        ``(xi_loc, rms)`` with ``rms`` the residual in log amplitude.
    """
    if report.edge_side not in (EdgeSide.LEFT, EdgeSide.RIGHT) or report.profile is None:
        raise InsufficientSupportError("no left/right localised edge state to fit")
    vec = np.asarray(report.profile)
    n = len(vec)
    sites = np.arange(1, n + 1)
    if report.edge_side is EdgeSide.LEFT:
        half = slice(0, n // 2)
    else:
        half = slice(n - n // 2, n)
    x, a = sites[half], np.abs(vec[half])
    odd = (x % 2) == 1
    major = odd if np.sum(a[odd] ** 2) >= np.sum(a[~odd] ** 2) else ~odd
    x, a = x[major], a[major]
    keep = a > max(amplitude_floor, relative_floor * a.max())
    if keep.sum() < 4:
        raise InsufficientSupportError(f"only {int(keep.sum())} usable sites for the envelope fit")
    x, y = x[keep].astype(float), np.log(a[keep])
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    if report.edge_side is EdgeSide.LEFT:
        if slope >= 0:
            raise InsufficientSupportError("left edge envelope does not decay")
        return -1.0 / slope, rms
    if slope <= 0:
        raise InsufficientSupportError("right edge envelope does not decay")
    return 1.0 / slope, rms


def fit_localization_length(spec: SpectralDecomposition, report: EdgeStateReport) -> float:
    return localization_fit(spec, report)[0]


def analyze_edge_states(spec: SpectralDecomposition, gap_fraction: float = 0.1) -> EdgeStateReport:
    """:func:`find_edge_states` followed by the envelope fit when possible."""
    report = find_edge_states(spec, gap_fraction)
    if report.edge_side in (EdgeSide.LEFT, EdgeSide.RIGHT):
        try:
            xi, rms = localization_fit(spec, report)
        except InsufficientSupportError:
            return report
        report = replace(report, xi_loc=xi, fit_rms=rms)
    return report
