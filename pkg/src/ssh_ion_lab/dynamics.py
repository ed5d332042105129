"""Edge-state detection protocol: quench from site 1 and survival probability.

The amplitudes follow ``i dc/dt = 2 h c``, hence the phases ``exp(-2 i eps_n t)``
with ``eps_n`` the eigenvalues of ``h``. The measured quantity is
``P(t) = <n_1>(t)^2 = |c_1(t)|^4``.
"""

from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, FitDomainError, NumericalFailureError
from .lattice import EdgeStateReport, SpectralDecomposition

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class QuenchResult:
    times: np.ndarray = field(repr=False)
    survival: np.ndarray = field(repr=False)
    occupation: np.ndarray = field(repr=False)
    long_time_average: float
    xi_loc_used: float | None = None
    norm_drift: float = 0.0
    # |c_j(t)|^2 for every site, shape (N, len(times)); diagnostics only
    profiles: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SurvivalFit:
    beta: float
    c1: float
    c2: float
    fit_window: tuple
    n_sites: int
    n_points: int

    def to_json(self) -> str:
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        return json.dumps(d, indent=2, sort_keys=True)


def evolve_single_excitation(
    spec: SpectralDecomposition, times, xi_loc: float | None = None, site: int = 1
) -> QuenchResult:
    """Evolve an excitation prepared on ``site`` (1-based) by spectral sum."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise DomainError("times must be a non-negative ascending 1-d array")
    m = spec.modes
    weights = m[site - 1]
    phases = np.exp(-2j * np.outer(spec.energies, t))
    amps = m @ (weights[:, None] * phases)
    norm = np.sum(np.abs(amps) ** 2, axis=0)
    drift = float(np.abs(norm - 1).max()) if len(t) else 0.0
    if drift > 1e-10:
        raise NumericalFailureError(f"norm drift {drift:.2e} in spectral evolution")
    occ = np.abs(amps[site - 1]) ** 2
    return QuenchResult(
        times=t,
        survival=occ**2,
        occupation=occ,
        long_time_average=float(np.mean(occ)) ** 2 if len(t) else float("nan"),
        xi_loc_used=xi_loc,
        norm_drift=drift,
        profiles=np.abs(amps) ** 2,
    )


def degenerate_groups(
    energies: np.ndarray, tol: float = DEGENERACY_TOL, t_window: float | None = None
) -> list[np.ndarray]:
    """Split ascending energies into runs of degenerate levels.

    Without ``t_window`` only numerical degeneracies (relative ``tol``) merge.
    With it, neighbours whose phase drift ``2 dE t_window`` stays below one
    radian also merge: they cannot dephase within the observation time.
    """
    e = np.asarray(energies)
    scale = max(np.abs(e).max(), 1e-300)
    resolution = tol * scale
    if t_window is not None:
        if t_window <= 0:
            raise DomainError("t_window must be positive")
        resolution = max(resolution, 0.5 / t_window)
    breaks = np.nonzero(np.diff(e) > resolution)[0] + 1
    return np.split(np.arange(len(e)), breaks)


def _site_weight_sums(spec, site, tol, t_window):
    w = spec.modes[site - 1] ** 2
    return [(g, float(w[g].sum())) for g in degenerate_groups(spec.energies, tol, t_window)]


def long_time_survival(
    spec: SpectralDecomposition,
    site: int = 1,
    tol: float = DEGENERACY_TOL,
    t_window: float | None = None,
) -> float:
    """Infinite-time survival ``(sum_n M_1n^4)^2``.

    Degenerate levels are merged first (the eigensolver may return any
    rotation inside a degenerate subspace), so the sum runs over projector
    weights. Pass ``t_window`` to get the value seen over a finite window,
    where an exponentially split edge pair acts as one left-localised mode.
    """
    s = sum(weight**2 for _, weight in _site_weight_sums(spec, site, tol, t_window))
    return s**2


def survival_components(
    spec: SpectralDecomposition,
    report: EdgeStateReport,
    site: int = 1,
    tol: float = DEGENERACY_TOL,
    t_window: float | None = None,
) -> tuple[float, float]:
    """Split ``sum_n M_1n^4`` into mid-gap and bulk contributions."""
    edge_set = set(report.midgap_indices)
    edge = bulk = 0.0
    for group, weight in _site_weight_sums(spec, site, tol, t_window):
        if edge_set.intersection(group.tolist()):
            edge += weight**2
        else:
            bulk += weight**2
    return edge, bulk


def dephasing_window(delta0: float, points: int = 200) -> np.ndarray:
    """Sample times in [10, 100] / |Delta0|."""
    if delta0 == 0:
        raise DomainError("dephasing window needs a nonzero gap")
    return np.linspace(10.0, 100.0, points) / abs(delta0)


def survival_model(inv_xi, c1: float, c2: float, n_sites: int):
    """``(c1 / xi^2 + c2 / N)^2`` as a function of 1/xi."""
    inv_xi = np.asarray(inv_xi, dtype=float)
    return (c1 * inv_xi**2 + c2 / n_sites) ** 2


def fit_survival_power_law(points, n_sites: int, window: tuple | None = None) -> SurvivalFit:
    """Fit P against xi_loc.

    ``beta`` comes from a log-log least-squares line, ``c1, c2`` from a
    non-linear fit of the finite-size form in log space. ``window`` optionally
    restricts the points to a range of 1/xi.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("points must be an array of (xi_loc, P) pairs")
    xi, p = pts[:, 0], pts[:, 1]
    inv = 1 / xi
    if window is not None:
        keep = (inv >= window[0]) & (inv <= window[1])
        xi, p, inv = xi[keep], p[keep], inv[keep]
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(p))):
        raise FitDomainError("non-finite xi_loc or P in fit input")
    if len(xi) < 5:
        raise FitDomainError(f"need at least 5 points, got {len(xi)}")
    if np.any(xi <= 0) or np.any(p <= 0):
        raise FitDomainError("xi_loc and P must be positive")
    if xi.max() / xi.min() < 3:
        raise FitDomainError("xi_loc spread below a factor of 3")
    slope, _ = np.polyfit(np.log(xi), np.log(p), 1)

    def resid(c):
        model = survival_model(inv, c[0], c[1], n_sites)
        return np.log(np.maximum(model, 1e-300)) - np.log(p)

    c1_0 = np.sqrt(p.max()) * xi.min() ** 2
    c2_0 = np.sqrt(p.min()) * n_sites / 2
    sol = least_squares(
        resid, x0=[c1_0, c2_0], bounds=([0, 0], [np.inf, np.inf]), x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    return SurvivalFit(
        beta=float(-slope),
        c1=float(sol.x[0]),
        c2=float(sol.x[1]),
        fit_window=(float(inv.min()), float(inv.max())),
        n_sites=n_sites,
        n_points=len(xi),
    )


def survival_csv(points) -> str:
    buf = io.StringIO()
    buf.write("inv_xi_loc,P\n")
    for xi, p in points:
        buf.write(f"{1 / xi:.17g},{p:.17g}\n")
    return buf.getvalue()
