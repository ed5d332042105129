"""Direct check of the effective SSH Hamiltonian against the driven chain.

The lab-frame model is

    H = sum_{j != l} J_jl sx_j sx_l + (Omega/2) sum_j sz_j
        + (eta omega_d / 2) cos(omega_d t) sum_j cos(pi j / 2 + phi) sz_j

and ``U = exp(i sum_j Delta_j(t) sz_j)`` with

    Delta_j(t) = Omega t / 2 + (eta / 2) cos(pi j / 2 + phi) sin(omega_d t)

removes every sz term. Since ``U s+_j U^dag = exp(2 i Delta_j) s+_j``, each
pair contributes

    2 J_jl [exp(2i(Delta_j - Delta_l)) s+_j s-_l + exp(2i(Delta_j + Delta_l)) s+_j s+_l + h.c.]

whose period average keeps only the Bessel-dressed exchange term.
"""

from __future__ import annotations

import json
import math
import time as _time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .couplings import CouplingModel, build_coupling_matrix, coupling_at_distance, _require_periodic
from .errors import DomainError, ResourceLimitError, StepSizeError

MAX_FLOQUET_SITES = 10
STEPS_PER_PERIOD = 40
NORM_FAIL = 1e-6


@dataclass(frozen=True)
class DrivenModel:
    """Driven Ising chain; ``base.omega_rabi`` and ``base.omega_drive`` set Omega and omega_d.

    ``integrator_step`` is the largest step the integrator may take; it
    defaults to a fortieth of the drive period.
    """

    base: CouplingModel
    include_anomalous: bool = True
    integrator_step: float | None = None
    t_final: float = 0.0
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self):
        _require_periodic(self.base)
        if self.base.n_sites > MAX_FLOQUET_SITES:
            raise ResourceLimitError(f"full-space evolution limited to N <= {MAX_FLOQUET_SITES}")
        if self.base.omega_rabi < 0 or self.base.omega_drive < 0:
            raise DomainError("drive frequencies must be non-negative")
        if self.t_final < 0:
            raise DomainError("t_final must be non-negative")
        step = self.integrator_step
        if step is not None:
            if step <= 0:
                raise DomainError("integrator_step must be positive")
            if self.base.omega_drive > 0 and step > self.drive_period / STEPS_PER_PERIOD:
                raise DomainError(f"integrator_step must resolve the drive (<= period/{STEPS_PER_PERIOD})")

    @classmethod
    def from_ratios(
        cls,
        base: CouplingModel,
        rabi_ratio: float = 50.0,
        drive_ratio: float = 25.0,
        time_units: float = 3.0,
        **kwargs,
    ) -> "DrivenModel":
        """Set Omega, omega_d and t_final in units of max|J| of the bare couplings."""
        jmax = max_bare_coupling(base)
        fields = {**base.__dict__, "omega_rabi": rabi_ratio * jmax, "omega_drive": drive_ratio * jmax}
        return cls(base=CouplingModel(**fields), t_final=time_units / jmax, **kwargs)

    @property
    def n_sites(self) -> int:
        return self.base.n_sites

    @property
    def drive_period(self) -> float:
        w = self.base.omega_drive
        return 2 * math.pi / w if w > 0 else math.inf

    @property
    def max_step(self) -> float:
        if self.integrator_step is not None:
            return self.integrator_step
        return self.drive_period / STEPS_PER_PERIOD

    def scale_separation(self) -> dict:
        jmax = max_bare_coupling(self.base)
        sep = {}
        for key, w in (("jmax_over_omega_drive", self.base.omega_drive), ("jmax_over_omega_rabi", self.base.omega_rabi)):
            sep[key] = jmax / w if w > 0 else math.inf
        return sep


def bare_coupling_matrix(model: CouplingModel) -> np.ndarray:
    """J_jl without the Floquet dressing, zero diagonal."""
    n = model.n_sites
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :])
    out = np.zeros((n, n))
    off = d > 0
    out[off] = coupling_at_distance(model, d[off])
    return out


def max_bare_coupling(model: CouplingModel) -> float:
    jmax = float(np.abs(bare_coupling_matrix(model)).max())
    if jmax == 0:
        raise DomainError("all bare couplings vanish")
    return jmax


def frame_angles(model: CouplingModel, t: float) -> np.ndarray:
    """Delta_j(t) for j = 1..N."""
    j = np.arange(1, model.n_sites + 1)
    w = model.omega_drive
    return model.omega_rabi * t / 2 + 0.5 * model.eta * np.cos(np.pi * j / 2 + model.phi) * math.sin(w * t)


def exchange_phase(model: CouplingModel, j: int, l: int, t) -> np.ndarray:
    """exp(2i(Delta_j - Delta_l)) at times ``t`` (1-based sites)."""
    t = np.asarray(t, dtype=float)
    cj = math.cos(math.pi * j / 2 + model.phi)
    cl = math.cos(math.pi * l / 2 + model.phi)
    return np.exp(1j * model.eta * (cj - cl) * np.sin(model.omega_drive * t))


def period_averaged_dressing(model: CouplingModel, j: int, l: int, samples: int = 4096) -> float:
    """Numerical average of the exchange phase over one drive period."""
    if model.omega_drive <= 0:
        raise DomainError("needs a positive drive frequency")
    t = np.arange(samples) * (2 * math.pi / model.omega_drive) / samples
    return float(np.mean(exchange_phase(model, j, l, t)).real)


def _pair_operators(n: int):
    """Stacked s+_j s-_l and s+_j s+_l on the 2^n space for all pairs j < l."""
    dim = 1 << n
    states = np.arange(dim)
    pairs = [(j, l) for j in range(n) for l in range(j + 1, n)]
    hop = np.zeros((len(pairs), dim, dim))
    pump = np.zeros((len(pairs), dim, dim))
    for p, (j, l) in enumerate(pairs):
        bj = (states >> j) & 1
        bl = (states >> l) & 1
        flip = (1 << j) | (1 << l)
        src = states[(bj == 0) & (bl == 1)]
        hop[p, src ^ flip, src] = 1.0
        src = states[(bj == 0) & (bl == 0)]
        pump[p, src ^ flip, src] = 1.0
    return pairs, hop, pump


class _FrameOperator:
    def __init__(self, model: DrivenModel):
        base = model.base
        self.base = base
        self.pairs, self.hop, self.pump = _pair_operators(base.n_sites)
        jb = bare_coupling_matrix(base)
        self.amp = np.array([2 * jb[j, l] for j, l in self.pairs])
        self.anomalous = model.include_anomalous
        self.ij = np.array([p[0] for p in self.pairs])
        self.il = np.array([p[1] for p in self.pairs])

    def coefficients(self, t: float):
        delta = frame_angles(self.base, t)
        c_hop = self.amp * np.exp(2j * (delta[self.ij] - delta[self.il]))
        c_pump = self.amp * np.exp(2j * (delta[self.ij] + delta[self.il])) if self.anomalous else None
        return c_hop, c_pump

    def matrix(self, t: float) -> np.ndarray:
        c_hop, c_pump = self.coefficients(t)
        h = np.einsum("p,pab->ab", c_hop, self.hop)
        if c_pump is not None:
            h = h + np.einsum("p,pab->ab", c_pump, self.pump)
        return h + h.conj().T

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        c_hop, c_pump = self.coefficients(t)
        fwd = self.hop @ psi
        bwd = np.transpose(self.hop, (0, 2, 1)) @ psi
        out = c_hop @ fwd + c_hop.conj() @ bwd
        if c_pump is not None:
            out = out + c_pump @ (self.pump @ psi) + c_pump.conj() @ (np.transpose(self.pump, (0, 2, 1)) @ psi)
        return out


def rotating_frame_hamiltonian(model: DrivenModel, t: float) -> np.ndarray:
    """Dense H'(t) on the 2^N space (bit j-1 set = site j excited)."""
    return _FrameOperator(model).matrix(t)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    norm_drift: float
    n_evaluations: int


def integrate_schrodinger(model: DrivenModel, initial, t_eval=None, hamiltonian=None) -> Trajectory:
    """Adaptive RK4(5) integration of i dpsi/dt = H'(t) psi over [0, t_final].

    ``hamiltonian`` may replace the driven operator by any callable
    ``(t, psi) -> H psi`` (used to test the integrator on closed forms).
    """
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (1 << model.n_sites,):
        raise DomainError(f"initial state must have length 2^{model.n_sites}")
    if abs(np.vdot(psi0, psi0).real - 1) > 1e-10:
        raise DomainError("initial state must be normalised")
    t_end = model.t_final
    if t_eval is None:
        t_eval = np.array([0.0, t_end])
    t_eval = np.asarray(t_eval, dtype=float)
    if t_end == 0:
        states = np.repeat(psi0[None, :], len(t_eval), axis=0)
        return Trajectory(times=t_eval, states=states, norm_drift=0.0, n_evaluations=0)
    apply = hamiltonian if hamiltonian is not None else _FrameOperator(model).apply
    sol = solve_ivp(
        lambda t, y: -1j * apply(t, y),
        (0.0, t_end),
        psi0,
        method="RK45",
        t_eval=t_eval,
        rtol=model.rtol,
        atol=model.atol,
        max_step=model.max_step,
    )
    if not sol.success:
        raise StepSizeError(f"integration failed: {sol.message}")
    states = sol.y.T
    drift = float(np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1).max())
    if drift > NORM_FAIL:
        raise StepSizeError(f"norm drift {drift:.2e} exceeds {NORM_FAIL:g}; reduce the step")
    return Trajectory(
        times=sol.t,
        states=states,
        norm_drift=drift,
        n_evaluations=int(sol.nfev),
    )


def effective_hamiltonian(model: CouplingModel) -> np.ndarray:
    """sum_{j<l} 2 h_jl (s+_j s-_l + h.c.) on the full 2^N space."""
    h = build_coupling_matrix(model).entries
    pairs, hop, _ = _pair_operators(model.n_sites)
    amp = np.array([2 * h[j, l] for j, l in pairs])
    mat = np.einsum("p,pab->ab", amp, hop)
    return mat + mat.T


def evolve_effective(model: CouplingModel, initial, t: float) -> np.ndarray:
    psi0 = np.asarray(initial, dtype=complex)
    if t == 0:
        return psi0.copy()
    e, v = np.linalg.eigh(effective_hamiltonian(model))
    return v @ (np.exp(-1j * e * t) * (v.T @ psi0))


def basis_state(n_sites: int, excited_sites) -> np.ndarray:
    """Product state with the given 1-based sites excited."""
    psi = np.zeros(1 << n_sites, dtype=complex)
    idx = 0
    for j in excited_sites:
        if not 1 <= j <= n_sites:
            raise DomainError(f"site {j} outside 1..{n_sites}")
        idx |= 1 << (j - 1)
    psi[idx] = 1.0
    return psi


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    norm_drift: float
    n_evaluations: int
    t_final: float
    omega_rabi: float
    omega_drive: float
    n_sites: int
    eta: float
    phi: float
    jmax_over_omega_rabi: float
    jmax_over_omega_drive: float
    wall_time: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def effective_model_fidelity(model: DrivenModel, initial, t_final: float | None = None) -> FidelityReport:
    """|<psi_driven(t)|psi_eff(t)>|^2, both in the rotating frame."""
    if t_final is not None and t_final != model.t_final:
        model = DrivenModel(**{**model.__dict__, "t_final": t_final})
    sep = model.scale_separation()
    if max(sep.values()) > 0.2:
        warnings.warn(f"weak scale separation: {sep}", RuntimeWarning, stacklevel=2)
    start = _time.perf_counter()
    traj = integrate_schrodinger(model, initial)
    psi_drive = traj.states[-1]
    psi_eff = evolve_effective(model.base, initial, model.t_final)
    fid = float(abs(np.vdot(psi_drive, psi_eff)) ** 2)
    return FidelityReport(
        fidelity=min(fid, 1.0),
        norm_drift=traj.norm_drift,
        n_evaluations=traj.n_evaluations,
        t_final=model.t_final,
        omega_rabi=model.base.omega_rabi,
        omega_drive=model.base.omega_drive,
        n_sites=model.n_sites,
        eta=model.base.eta,
        phi=model.base.phi,
        jmax_over_omega_rabi=sep["jmax_over_omega_rabi"],
        jmax_over_omega_drive=sep["jmax_over_omega_drive"],
        wall_time=_time.perf_counter() - start,
    )
