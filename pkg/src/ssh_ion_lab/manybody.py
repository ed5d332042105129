"""Ground-state physics of the full spin chain.

The spin Hamiltonian is ``H = sum_{j<l} 2 h_jl (s+_j s-_l + s-_j s+_l)`` with
``h`` the coupling matrix, so its one-excitation block is ``2h``. It conserves
the number of up spins; exact results come from diagonalising every sector.

Bit ``j - 1`` of a pattern is 1 when site ``j`` is excited, and
``sigma^z_j = 1 - 2 n_j``.

The Jordan-Wigner truncated model keeps bonds of length 1 and 2,

    H_trunc = H_0 + H_int,   H_int = -2 sum_j J2_j (c+_j n_{j+1} c_{j+2} + h.c.)

and Hartree-Fock replaces ``H_int`` by the one-body potential ``-2 V``
evaluated on the ground state of ``H_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .couplings import CouplingMatrix, CouplingModel, build_coupling_matrix
from .errors import DegeneratePerturbationError, DomainError, NumericalFailureError, ResourceLimitError
from .lattice import diagonalize, find_edge_states

MAX_SECTOR_SITES = 20
MAX_ED_SITES = 16
DENSE_LIMIT = 600
ZERO_MODE_TOL = 1e-10
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SectorBasis:
    """Bit patterns with ``n_excitations`` set bits, ascending."""

    n_sites: int
    n_excitations: int
    states: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n_sites: int, n_excitations: int) -> "SectorBasis":
        if not 1 <= n_sites <= MAX_SECTOR_SITES:
            raise ResourceLimitError(f"sector bases limited to N <= {MAX_SECTOR_SITES}")
        if not 0 <= n_excitations <= n_sites:
            raise DomainError(f"excitation number {n_excitations} outside 0..{n_sites}")
        all_states = np.arange(1 << n_sites, dtype=np.int64)
        counts = np.zeros_like(all_states)
        for b in range(n_sites):
            counts += (all_states >> b) & 1
        states = all_states[counts == n_excitations]
        return cls(n_sites=n_sites, n_excitations=n_excitations, states=states)

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, pattern: int) -> int:
        i = int(np.searchsorted(self.states, pattern))
        if i >= self.size or self.states[i] != pattern:
            raise KeyError(pattern)
        return i

    def occupations(self) -> np.ndarray:
        """0/1 array of shape (size, n_sites)."""
        bits = np.arange(self.n_sites)
        return ((self.states[:, None] >> bits[None, :]) & 1).astype(float)


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: np.ndarray = field(repr=False)
    sector: SectorBasis = field(repr=False)
    degenerate: bool = False

    @property
    def n_excitations(self) -> int:
        return self.sector.n_excitations


def _entries(matrix) -> np.ndarray:
    if isinstance(matrix, CouplingMatrix):
        return matrix.entries
    h = np.asarray(matrix, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("coupling matrix must be square")
    return h


def sector_hamiltonian(matrix, basis: SectorBasis) -> sp.csr_matrix:
    """Sparse spin Hamiltonian restricted to one excitation sector."""
    h = _entries(matrix)
    n = basis.n_sites
    if h.shape != (n, n):
        raise DomainError("matrix size does not match the basis")
    states = basis.states
    rows, cols, vals = [], [], []
    for j in range(n):
        for l in range(j + 1, n):
            amp = 2 * h[j, l]
            if amp == 0:
                continue
            bj = (states >> j) & 1
            bl = (states >> l) & 1
            hit = np.nonzero(bj != bl)[0]
            if len(hit) == 0:
                continue
            target = states[hit] ^ ((1 << j) | (1 << l))
            rows.append(np.searchsorted(states, target))
            cols.append(hit)
            vals.append(np.full(len(hit), amp))
    size = basis.size
    if not rows:
        return sp.csr_matrix((size, size))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )


def _lowest(ham: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Two lowest eigenpairs (one for 1x1 sectors)."""
    size = ham.shape[0]
    if size <= DENSE_LIMIT:
        e, v = np.linalg.eigh(ham.toarray())
        return e[:2], v[:, :2]
    v0 = np.ones(size) / math.sqrt(size)
    e, v = eigsh(ham, k=2, which="SA", tol=1e-12, v0=v0)
    order = np.argsort(e)
    return e[order], v[:, order]


def exact_ground_state(matrix, n_sites: int | None = None) -> GroundState:
    """Global ground state of the spin model over all excitation sectors.

    Ties (within 1e-10 of the energy scale) resolve to the lowest sector and
    set ``degenerate``, as does a degenerate minimum inside one sector.
    """
    h = _entries(matrix)
    n = h.shape[0] if n_sites is None else n_sites
    if n != h.shape[0]:
        raise DomainError("n_sites does not match the matrix")
    if n > MAX_ED_SITES:
        raise ResourceLimitError(f"exact diagonalization limited to N <= {MAX_ED_SITES}, got {n}")
    scale = max(2 * np.abs(h).sum(), 1.0)
    tol = DEGENERACY_TOL * scale
    best = None
    degenerate = False
    for m in range(n + 1):
        basis = SectorBasis.build(n, m)
        e, v = _lowest(sector_hamiltonian(h, basis))
        inner_tie = len(e) > 1 and e[1] - e[0] < tol
        if best is None or e[0] < best[0] - tol:
            best = (float(e[0]), v[:, 0], basis)
            degenerate = inner_tie
        elif abs(e[0] - best[0]) <= tol:
            degenerate = True
    energy, state, basis = best
    state = state / np.linalg.norm(state)
    k = np.argmax(np.abs(state))
    state = state if state[k] >= 0 else -state
    return GroundState(energy=energy, state=state, sector=basis, degenerate=degenerate)


def correlator_zz(state: np.ndarray, sector: SectorBasis, i: int = 1, j: int | None = None) -> float:
    """<sigma^z_i sigma^z_j> (1-based sites, default the two chain ends)."""
    j = sector.n_sites if j is None else j
    s = sector.states
    zi = 1 - 2 * ((s >> (i - 1)) & 1)
    zj = 1 - 2 * ((s >> (j - 1)) & 1)
    prob = np.abs(state) ** 2
    norm = prob.sum()
    if abs(norm - 1) > 1e-8:
        raise DomainError(f"state not normalised (norm^2 = {norm})")
    return float(np.sum(prob * zi * zj))


def truncate_range(matrix, max_range: int = 2) -> np.ndarray:
    """Coupling matrix with bonds longer than ``max_range`` removed.

    Applied to the spin model this is exactly H_trunc mapped back to spins.
    """
    h = np.array(_entries(matrix), dtype=float)
    idx = np.arange(h.shape[0])
    h[np.abs(idx[:, None] - idx[None, :]) > max_range] = 0.0
    return h


def build_truncated_fermion_model(model: CouplingModel) -> tuple[np.ndarray, np.ndarray]:
    """Hoppings J1_j = 2 h_{j,j+1} (N-1 values) and J2_j = 2 h_{j,j+2} (N-2 values)."""
    h = build_coupling_matrix(model).entries
    return 2 * np.diagonal(h, 1).copy(), 2 * np.diagonal(h, 2).copy()


def one_body_matrix(j1: np.ndarray, j2: np.ndarray) -> np.ndarray:
    """Site-basis matrix of H_0."""
    n = len(j1) + 1
    if len(j2) != max(n - 2, 0):
        raise DomainError("J2 must have one entry fewer than J1")
    t = np.diag(j1, 1) + np.diag(j2, 2) if n > 2 else np.diag(j1, 1)
    return t + t.T


def correlation_matrix(modes: np.ndarray, occupied) -> np.ndarray:
    """rho_jl = <c+_j c_l> for a Slater determinant of real orbitals."""
    occ = modes[:, list(occupied)]
    return occ @ occ.T


def wick_zz(rho: np.ndarray, i: int = 1, j: int | None = None) -> float:
    """<sigma^z_i sigma^z_j> of a number-conserving Slater determinant."""
    n = rho.shape[0]
    a, b = i - 1, (n if j is None else j) - 1
    return float(
        1 - 2 * rho[a, a] - 2 * rho[b, b] + 4 * (rho[a, a] * rho[b, b] - rho[a, b] * rho[b, a])
    )


def free_fermion_ground_state(one_body: np.ndarray) -> tuple[float, float]:
    """Energy and end-to-end zz of free fermions filling the negative modes."""
    e, m = np.linalg.eigh(one_body)
    occ = np.nonzero(e < 0)[0]
    return float(e[occ].sum()), wick_zz(correlation_matrix(m, occ))


def mean_field_potential(rho: np.ndarray, j2: np.ndarray) -> np.ndarray:
    """Site-basis matrix W with H_int -> -2 c+ W c after all four pairings.

    In the H_0 eigenbasis ``V = M^T W M`` reproduces the contraction of the
    U tensor over occupied orbitals.
    """
    n = rho.shape[0]
    w = np.zeros((n, n))
    for j, g in enumerate(j2):
        a, b, c = j, j + 1, j + 2
        # Hartree: density on the middle site dresses the second-neighbour hop
        w[a, c] += g * rho[b, b]
        w[c, a] += g * rho[b, b]
        # Hartree: second-neighbour coherence shifts the middle site
        w[b, b] += g * (rho[a, c] + rho[c, a])
        # Fock exchange terms
        w[b, c] -= g * rho[a, b]
        w[b, a] -= g * rho[c, b]
        w[a, b] -= g * rho[b, c]
        w[c, b] -= g * rho[b, a]
    return w


@dataclass(frozen=True)
class HartreeFockResult:
    h0_energies: np.ndarray = field(repr=False)
    h0_modes: np.ndarray = field(repr=False)
    orbital_energies: np.ndarray = field(repr=False)
    orbitals: np.ndarray = field(repr=False)
    v_matrix: np.ndarray = field(repr=False)
    correlator_zz: float
    occupation: tuple
    ambiguous_filling: bool = False
    correlator_alt: float | None = None
    edge_indices: tuple = ()
    z_weight: float | None = None
    iterations: int = 0


def _fill(energies: np.ndarray, n_particles: int | None = None) -> tuple[tuple, bool, tuple]:
    if n_particles is not None:
        occ = tuple(range(n_particles))
        return occ, False, occ
    neg = tuple(int(i) for i in np.nonzero(energies < -ZERO_MODE_TOL)[0])
    zero = tuple(int(i) for i in np.nonzero(np.abs(energies) <= ZERO_MODE_TOL)[0])
    return neg, bool(zero), tuple(sorted(neg + zero))


def hartree_fock(
    model: CouplingModel,
    n_sites: int | None = None,
    self_consistent: bool = False,
    interaction_scale: float = 1.0,
    n_particles: int | None = None,
    max_iter: int = 500,
    tol: float = 1e-10,
) -> HartreeFockResult:
    """Single-shot (default) or self-consistent Hartree-Fock of H_trunc.

    ``interaction_scale`` multiplies H_int only and exists for convergence
    studies. ``n_particles`` fixes the filling to the lowest orbitals instead
    of filling by sign. Orbitals with energy within 1e-10 of zero make the filling
    ambiguous; the correlator of the filling that includes them is then
    returned as ``correlator_alt``.
    """
    if n_sites is not None and n_sites != model.n_sites:
        model = CouplingModel(**{**model.__dict__, "n_sites": n_sites})
    j1, j2 = build_truncated_fermion_model(model)
    if n_particles is not None and not 0 <= n_particles <= model.n_sites:
        raise DomainError(f"n_particles must lie in 0..{model.n_sites}")
    t = one_body_matrix(j1, j2)
    spec0 = diagonalize(t)
    eps, m = spec0.energies, spec0.modes
    occ0, _, _ = _fill(eps, n_particles)
    rho = correlation_matrix(m, occ0)
    g = interaction_scale * j2

    iterations = 0
    w = mean_field_potential(rho, g)
    if self_consistent:
        for iterations in range(1, max_iter + 1):
            e_hf, orb = np.linalg.eigh(t - 2 * w)
            new_rho = correlation_matrix(orb, _fill(e_hf, n_particles)[0])
            if np.abs(new_rho - rho).max() < tol:
                rho = new_rho
                break
            rho = 0.5 * (rho + new_rho)
            w = mean_field_potential(rho, g)
        else:
            raise NumericalFailureError(f"self-consistent HF not converged in {max_iter} steps")
        w = mean_field_potential(rho, g)

    v = m.T @ w @ m
    v = 0.5 * (v + v.T)
    e_hf, orb = np.linalg.eigh(t - 2 * w)
    occ, ambiguous, occ_alt = _fill(e_hf, n_particles)
    zz = wick_zz(correlation_matrix(orb, occ))
    zz_alt = wick_zz(correlation_matrix(orb, occ_alt)) if ambiguous else None

    report = find_edge_states(spec0)
    edge = tuple(report.midgap_indices)
    result = HartreeFockResult(
        h0_energies=eps,
        h0_modes=m,
        orbital_energies=e_hf,
        orbitals=orb,
        v_matrix=v,
        correlator_zz=zz,
        occupation=occ,
        ambiguous_filling=ambiguous,
        correlator_alt=zz_alt,
        edge_indices=edge,
        iterations=iterations,
    )
    if edge:
        try:
            z = quasiparticle_weight(result, _left_edge_orbital(m, edge))
        except DegeneratePerturbationError:
            z = None
        result = HartreeFockResult(**{**result.__dict__, "z_weight": z})
    return result


def _left_edge_orbital(modes: np.ndarray, edge: tuple) -> int:
    # the in-gap orbital with most weight on the left half
    n = modes.shape[0]
    weights = [np.sum(modes[: n // 2, i] ** 2) for i in edge]
    return int(edge[int(np.argmax(weights))])


def quasiparticle_weight(hf: HartreeFockResult, edge_index: int, tol: float = 1e-12) -> float:
    """Perturbative overlap Z = 1 - sum_mu 4 V^2 / (eps_ES - eps_mu)^2."""
    n = len(hf.h0_energies)
    if not 0 <= edge_index < n:
        raise DomainError(f"orbital index {edge_index} outside 0..{n - 1}")
    v = hf.v_matrix[edge_index]
    de = hf.h0_energies[edge_index] - hf.h0_energies
    others = np.arange(n) != edge_index
    vscale = max(np.abs(hf.v_matrix).max(), 1e-300)
    clash = others & (np.abs(de) < tol) & (np.abs(v) > tol * vscale)
    if np.any(clash):
        raise DegeneratePerturbationError(
            f"orbitals {np.nonzero(clash)[0].tolist()} degenerate with the edge orbital"
        )
    mask = others & (np.abs(de) >= tol)
    return float(1 - np.sum(4 * v[mask] ** 2 / de[mask] ** 2))
