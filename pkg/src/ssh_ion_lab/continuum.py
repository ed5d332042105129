"""Low-energy effective theory around k_F = pi/2.

With the one-excitation Hamiltonian written in plane waves,

    eps'(k)   = 4 sum_d J_d Jp_d cos(k d)
    Delta'(k) = 2 sum_d J_d Jm_d exp(i k d)

where ``Jp_d, Jm_d`` are the half sum/difference of the dressings on bonds of
length ``d`` starting on even and odd sites. The Fermi velocity is the slope
of eps' at k_F and the gap is ``2 Im Delta'(k_F)``; their ratio estimates the
edge-state localization length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .couplings import (
    CouplingForm,
    CouplingModel,
    coupling_at_distance,
    dipolar_amplitude,
    dressing_factor,
    exponential_amplitude,
    interaction_range,
)
from .errors import DomainError, GaplessSpectrumError, TruncationError

K_FERMI = math.pi / 2
D_MAX_CAP = 10_000
TAIL_TOL = 1e-10
CUT_TOL = 1e-11


@dataclass(frozen=True)
class ContinuumParams:
    v_f: float
    delta0: float
    xi_pred: float
    d_max: int
    tail_bound: float


def symmetric_dressings(model: CouplingModel, d):
    """(Jp_d, Jm_d) for bond length(s) ``d >= 1``."""
    d = np.asarray(d)
    if np.any(d < 1):
        raise DomainError("bond length must be >= 1")
    even = dressing_factor(model, 2, 2 + d)
    odd = dressing_factor(model, 1, 1 + d)
    return 0.5 * (even + odd), 0.5 * (even - odd)


def _has_dipolar_tail(model: CouplingModel) -> bool:
    return model.coupling_form in (CouplingForm.ANALYTIC, CouplingForm.DIPOLAR_ONLY)


def _has_exponential_tail(model: CouplingModel) -> bool:
    return model.coupling_form in (CouplingForm.ANALYTIC, CouplingForm.EXPONENTIAL_ONLY)


def _series_terms(model: CouplingModel, d_max: int | None = None):
    """Coefficients J_d Jp_d and J_d Jm_d for d = 1..cut.

    Without ``d_max`` the cut is the first distance where the exponential
    part of the velocity term, ``4 |J_exp| exp(-d/xi_int) d``, drops below
    ``CUT_TOL`` of the largest term; anything left beyond it is either zero
    or the pure dipolar tail, which the callers resum or bound separately.
    Returns ``(d, plus, minus, tail)`` with ``tail`` the first omitted
    exponential term.
    """
    if model.coupling_form is CouplingForm.NEAREST_NEIGHBOR:
        d = np.array([1])
        jp, jm = symmetric_dressings(model, d)
        jd = coupling_at_distance(model, d)
        if jd[0] * jp[0] == 0:
            raise GaplessSpectrumError("all couplings vanish")
        return d, jd * jp, jd * jm, 0.0
    d = np.arange(1, D_MAX_CAP + 2)
    jd = coupling_at_distance(model, d)
    jp, jm = symmetric_dressings(model, d)
    plus = jd * jp
    minus = jd * jm
    scale = np.abs(plus * d).max()
    if scale == 0:
        raise GaplessSpectrumError("all couplings vanish")
    if _has_exponential_tail(model):
        expo = 4 * exponential_amplitude(model) * np.exp(-d / interaction_range(model)) * d
    else:
        expo = np.zeros(len(d))
    if d_max is None:
        below = np.nonzero(expo < CUT_TOL * scale)[0]
        if len(below) == 0 or below[0] >= D_MAX_CAP:
            raise TruncationError(f"series tail above {CUT_TOL:g} of the leading term at d_max = {D_MAX_CAP}")
        # keep a few dipolar periods so the resummed tail starts well clear of d = 0
        cut = max(int(below[0]), 64)
    else:
        cut = d_max
    return d[:cut], plus[:cut], minus[:cut], float(expo[cut])


def _dipolar_tail_at_kf(model: CouplingModel, start: int):
    """Exact sums over d >= start of the dipolar velocity and gap terms at k_F.

    Beyond ``start`` the coupling is ``J_dip / d^3`` and the dressings and
    ``sin(pi d / 2)`` repeat with period 8 in ``d``, so each residue class is
    a Hurwitz zeta function.
    """
    if not _has_dipolar_tail(model):
        return 0.0, 0.0
    j_dip = dipolar_amplitude(model)
    first = start + np.arange(8)
    jp, jm = symmetric_dressings(model, first)
    s = np.sin(K_FERMI * first)
    v_tail = -4 * j_dip * np.sum(jp * s * zeta(2, first / 8)) / 8**2
    g_tail = 4 * j_dip * np.sum(jm * s * zeta(3, first / 8)) / 8**3
    return float(v_tail), float(g_tail)


def _direct_terms(model: CouplingModel):
    """Terms for a generic k: summed to the cap when a dipolar tail exists."""
    if _has_dipolar_tail(model):
        d, plus, minus, _ = _series_terms(model, d_max=D_MAX_CAP)
        return d, plus, minus
    d, plus, minus, _ = _series_terms(model)
    return d, plus, minus


def dispersion(model: CouplingModel, k) -> float:
    _check_k(k)
    d, plus, _ = _direct_terms(model)
    return float(4 * np.sum(plus * np.cos(k * d)))


def dispersion_slope(model: CouplingModel, k) -> float:
    """Analytic derivative d eps'/dk."""
    _check_k(k)
    if k == K_FERMI:
        return effective_params(model).v_f
    d, plus, _ = _direct_terms(model)
    return float(-4 * np.sum(plus * d * np.sin(k * d)))


def scattering(model: CouplingModel, k) -> complex:
    _check_k(k)
    d, _, minus = _direct_terms(model)
    return complex(2 * np.sum(minus * np.exp(1j * k * d)))


def _check_k(k):
    if not -math.pi <= k <= math.pi:
        raise DomainError(f"k = {k} outside [-pi, pi]")


def effective_params(model: CouplingModel) -> ContinuumParams:
    d, plus, minus, tail = _series_terms(model)
    sin_kd = np.sin(K_FERMI * d)
    v_tail, g_tail = _dipolar_tail_at_kf(model, int(d[-1]) + 1)
    v_f = float(-4 * np.sum(plus * d * sin_kd) + v_tail)
    delta0 = float(4 * np.sum(minus * sin_kd) + g_tail)
    if abs(delta0) < 1e-14 * max(abs(v_f), 1e-300):
        raise GaplessSpectrumError("effective gap vanishes; no localization length")
    if tail >= TAIL_TOL * abs(v_f):
        raise TruncationError(f"tail bound {tail:.2e} not below {TAIL_TOL:g} |v_F|")
    return ContinuumParams(
        v_f=v_f,
        delta0=delta0,
        xi_pred=abs(v_f / delta0),
        d_max=int(d[-1]),
        tail_bound=tail,
    )


def ring_hamiltonian(model: CouplingModel, n_sites: int) -> np.ndarray:
    """One-excitation Hamiltonian (the matrix 2h) on a periodic ring.

    Bonds longer than half the ring are dropped; ``n_sites`` must be a
    multiple of 4 so the dressing pattern closes on itself.
    """
    if n_sites % 4:
        raise DomainError("ring length must be a multiple of 4")
    j = np.arange(1, n_sites + 1)
    h = np.zeros((n_sites, n_sites))
    for d in range(1, n_sites // 2):
        val = coupling_at_distance(model, d) * dressing_factor(model, j, j + d)
        h[j - 1, (j - 1 + d) % n_sites] += val
    h = h + h.T
    return 2 * h
