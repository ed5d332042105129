"""Two-band Bloch picture of the dimerised chain and its Zak phase.

Unit cell ``n`` holds sites ``A = 2n - 1`` (odd) and ``B = 2n`` (even). Blocks
are assembled from the coupling matrix elements ``h_jl`` of the infinite chain,
so ``h_mu = d0 * 1 + d . sigma`` at ``k_mu = 2 pi mu / M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .couplings import (
    CouplingForm,
    CouplingModel,
    _require_periodic,
    coupling_at_distance,
    dipolar_amplitude,
    dressing_factor,
    exponential_amplitude,
    interaction_range,
)
from .errors import DomainError, GaplessSpectrumError

RANGE_CUTOFF = 1e-12
MAX_CELLS_RANGE = 200_000


@dataclass(frozen=True)
class BlochHamiltonian:
    m_cells: int
    d0_mu: np.ndarray = field(repr=False)
    d_vec_mu: np.ndarray = field(repr=False)
    model: CouplingModel | None = None

    @property
    def momenta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.m_cells) / self.m_cells

    @property
    def gaps(self) -> np.ndarray:
        return 2 * np.linalg.norm(self.d_vec_mu, axis=1)

    def block(self, mu: int) -> np.ndarray:
        dx, dy, dz = self.d_vec_mu[mu]
        d0 = self.d0_mu[mu]
        return np.array([[d0 + dz, dx - 1j * dy], [dx + 1j * dy, d0 - dz]])


@dataclass(frozen=True)
class ZakResult:
    nu: float
    quantized: bool
    gap_min: float


def _cell_range(model: CouplingModel) -> int:
    """Cells to sum so that every omitted |J(d)| < RANGE_CUTOFF * |J(1)|."""
    j1 = abs(coupling_at_distance(model, 1))
    if j1 == 0:
        raise DomainError("nearest-neighbour coupling vanishes")
    if model.coupling_form is CouplingForm.NEAREST_NEIGHBOR:
        return 1
    je = exponential_amplitude(model) if model.coupling_form is not CouplingForm.DIPOLAR_ONLY else 0.0
    jd = dipolar_amplitude(model) if model.coupling_form is not CouplingForm.EXPONENTIAL_ONLY else 0.0
    xi = interaction_range(model)

    def bound(d):
        # monotone envelope of |J(d)|
        return je * math.exp(-d / xi) + jd / d**3

    target = RANGE_CUTOFF * j1
    lo, hi = 1, 2
    while bound(hi) >= target:
        lo, hi = hi, 2 * hi
        if hi >= 2 * MAX_CELLS_RANGE:
            return MAX_CELLS_RANGE
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) >= target:
            lo = mid
        else:
            hi = mid
    return hi // 2 + 1


def _hop(model: CouplingModel, j: np.ndarray, l: np.ndarray) -> np.ndarray:
    d = np.abs(j - l)
    out = np.zeros(len(d))
    nz = d > 0
    out[nz] = coupling_at_distance(model, d[nz]) * dressing_factor(model, j[nz], l[nz])
    return out


def build_bloch(model: CouplingModel, m_cells: int) -> BlochHamiltonian:
    """Assemble the 2x2 blocks on a mesh of ``m_cells`` momenta.

    Cell-to-cell hoppings are summed over all separations ``d`` (both signs)
    until the bare coupling falls below 1e-12 of the nearest-neighbour value.
    """
    _require_periodic(model)
    if m_cells < 16:
        raise DomainError("m_cells must be >= 16")
    reach = _cell_range(model)
    d = np.arange(-reach, reach + 1)
    a0, b0 = 1, 2
    h_aa = _hop(model, np.full(d.shape, a0), a0 + 2 * d)
    h_bb = _hop(model, np.full(d.shape, b0), b0 + 2 * d)
    h_ab = _hop(model, np.full(d.shape, a0), b0 + 2 * d)
    k = 2 * np.pi * np.arange(m_cells) / m_cells
    phase = np.exp(1j * np.outer(k, d))
    aa = (phase @ h_aa).real
    bb = (phase @ h_bb).real
    ab = phase @ h_ab
    d_vec = np.column_stack([ab.real, -ab.imag, 0.5 * (aa - bb)])
    return BlochHamiltonian(m_cells=m_cells, d0_mu=0.5 * (aa + bb), d_vec_mu=d_vec, model=model)


def ground_band_states(bloch: BlochHamiltonian) -> np.ndarray:
    """Closed-form lower-band eigenvectors, shape (M, 2).

    Phase convention: first non-negligible component real and positive.
    """
    dx, dy, dz = bloch.d_vec_mu.T
    r = np.sqrt(dx**2 + dy**2 + dz**2)
    # (d.sigma) u = -r u. Two equivalent forms; pick the better conditioned one
    # per momentum.
    # form 1: u ~ (dx - i dy, -(r + dz))    valid unless r + dz ~ 0
    # form 2: u ~ (r - dz, -(dx + i dy))    valid unless r - dz ~ 0
    use1 = dz >= 0
    u = np.empty((bloch.m_cells, 2), dtype=complex)
    u[use1, 0] = dx[use1] - 1j * dy[use1]
    u[use1, 1] = -(r[use1] + dz[use1])
    u[~use1, 0] = r[~use1] - dz[~use1]
    u[~use1, 1] = -(dx[~use1] + 1j * dy[~use1])
    norm = np.linalg.norm(u, axis=1)
    norm[norm == 0] = 1.0
    u /= norm[:, None]
    lead = np.where(np.abs(u[:, 0]) > 1e-12, 0, 1)
    ph = u[np.arange(len(u)), lead]
    u *= (np.abs(ph) / np.where(ph == 0, 1, ph))[:, None]
    return u


def berry_product_phase(states: np.ndarray) -> float:
    """-Im log prod_mu <u_{mu+1}|u_mu> over a closed loop of states."""
    nxt = np.roll(states, -1, axis=0)
    overlaps = np.einsum("ki,ki->k", nxt.conj(), states)
    prod = np.prod(overlaps / np.abs(overlaps))
    return -float(np.angle(prod))


def fold_phase(nu: float) -> float:
    """Fold an angle into (-pi, pi]."""
    nu = math.remainder(nu, 2 * math.pi)
    if nu <= -math.pi:
        nu += 2 * math.pi
    return nu


def zak_phase(bloch: BlochHamiltonian, gap_tol: float = 1e-8, quant_tol: float = 1e-6) -> ZakResult:
    """Discretised gauge-independent Zak phase of the lower band."""
    gap_min = float(bloch.gaps.min())
    if gap_min <= gap_tol:
        raise GaplessSpectrumError(f"band gap closes (min 2|d| = {gap_min:.3e})")
    nu = fold_phase(berry_product_phase(ground_band_states(bloch)))
    quantized = abs(nu) < quant_tol or abs(abs(nu) - math.pi) < quant_tol
    return ZakResult(nu=nu, quantized=quantized, gap_min=gap_min)


def chirality_defect(bloch: BlochHamiltonian) -> float:
    """max |d_z| / max |d|; zero exactly when sigma_z is a chiral symmetry."""
    norm = np.linalg.norm(bloch.d_vec_mu, axis=1).max()
    if norm == 0:
        return 0.0
    return float(np.abs(bloch.d_vec_mu[:, 2]).max() / norm)
