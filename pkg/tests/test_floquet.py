import math
import warnings
from functools import reduce

import numpy as np
import pytest

from ssh_ion_lab.bessel import bessel_j0
from ssh_ion_lab.couplings import PHI_TOPOLOGICAL, CouplingModel, bessel_dressing
from ssh_ion_lab.errors import DomainError, ResourceLimitError
from ssh_ion_lab.floquet import (
    DrivenModel,
    bare_coupling_matrix,
    basis_state,
    effective_hamiltonian,
    effective_model_fidelity,
    evolve_effective,
    exchange_phase,
    integrate_schrodinger,
    max_bare_coupling,
    period_averaged_dressing,
    rotating_frame_hamiltonian,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def site_op(op, j, n):
    # bit j-1 of the basis index is site j, so site 1 is the last kron factor
    mats = [np.eye(2)] * n
    mats[n - j] = op
    return reduce(np.kron, mats)


def ising(model):
    n = model.n_sites
    jb = bare_coupling_matrix(model)
    h = np.zeros((1 << n, 1 << n))
    for j in range(1, n + 1):
        for l in range(j + 1, n + 1):
            h += 2 * jb[j - 1, l - 1] * site_op(SX, j, n) @ site_op(SX, l, n)
    return h


def base(n=6, eta=0.62, **kw):
    return CouplingModel(n_sites=n, delta_band=4.0, eta=eta, phi=PHI_TOPOLOGICAL, **kw)


def test_trivial_frame_is_ising():
    dm = DrivenModel(base(n=4, eta=0.0))
    for t in (0.0, 3.7):
        assert np.abs(rotating_frame_hamiltonian(dm, t) - ising(dm.base)).max() < 1e-15


def test_initial_time_has_bare_structure():
    m = base(n=4, omega_rabi=2.0, omega_drive=1.0)
    assert np.abs(rotating_frame_hamiltonian(DrivenModel(m), 0.0) - ising(m)).max() < 1e-15


def test_frame_hamiltonian_hermitian():
    h = rotating_frame_hamiltonian(DrivenModel(base(n=5, omega_rabi=1.3, omega_drive=0.4)), 2.2)
    assert np.allclose(h, h.conj().T)


def test_without_anomalous_terms_number_is_conserved():
    n = 5
    h = rotating_frame_hamiltonian(DrivenModel(base(n=n, omega_rabi=1.0, omega_drive=0.5), include_anomalous=False), 1.7)
    counts = np.array([bin(s).count("1") for s in range(1 << n)])
    rows, cols = np.nonzero(np.abs(h) > 0)
    assert np.all(counts[rows] == counts[cols])


def test_period_average_is_bessel_dressing():
    m = base(omega_drive=0.3)
    for j, l in ((1, 2), (2, 3), (1, 4), (2, 5), (3, 6)):
        assert period_averaged_dressing(m, j, l) == pytest.approx(bessel_dressing(m, j, l), abs=1e-12)


def test_exchange_phase_at_zero():
    assert exchange_phase(base(omega_drive=1.0), 1, 2, 0.0) == 1.0


def test_effective_hamiltonian_matches_dressed_exchange():
    m = base(n=4)
    h = effective_hamiltonian(m)
    jb = bare_coupling_matrix(m)
    sp = np.array([[0.0, 0.0], [1.0, 0.0]])
    want = np.zeros((16, 16))
    for j in range(1, 5):
        for l in range(j + 1, 5):
            hop = site_op(sp, j, 4) @ site_op(sp.T, l, 4)
            want += 2 * jb[j - 1, l - 1] * bessel_dressing(m, j, l) * (hop + hop.T)
    assert np.abs(h - want).max() < 1e-15


def test_constant_diagonal_phases():
    # the error is controlled by the requested tolerance; ask for 1e-12
    dm = DrivenModel(base(n=2), t_final=5.0, integrator_step=0.05, rtol=1e-12, atol=1e-14)
    diag = np.array([0.3, -1.1, 0.7, 2.0])
    psi0 = np.full(4, 0.5, dtype=complex)
    traj = integrate_schrodinger(dm, psi0, t_eval=np.linspace(0, 5, 11), hamiltonian=lambda t, y: diag * y)
    want = np.exp(-1j * np.outer(traj.times, diag)) * 0.5
    assert np.abs(traj.states - want).max() < 1e-10


def test_zero_hamiltonian_is_identity():
    dm = DrivenModel(base(n=3), t_final=2.0, integrator_step=0.1)
    psi0 = basis_state(3, [2])
    traj = integrate_schrodinger(dm, psi0, hamiltonian=lambda t, y: np.zeros_like(y))
    assert np.array_equal(traj.states[-1], psi0)


def test_two_site_exchange_oscillation():
    m = base(n=2, eta=0.0)
    jb = bare_coupling_matrix(m)[0, 1]
    t_end = 2.0 / abs(jb)
    dm = DrivenModel(m, include_anomalous=False, t_final=t_end, integrator_step=t_end / 400)
    times = np.linspace(0, t_end, 21)
    traj = integrate_schrodinger(dm, basis_state(2, [1]), t_eval=times)
    p_site1 = np.abs(traj.states[:, 1]) ** 2
    assert np.abs(p_site1 - np.cos(2 * jb * times) ** 2).max() < 1e-8
    assert traj.norm_drift < 1e-8


def test_evolve_effective_unitary():
    m = base(n=4)
    psi = evolve_effective(m, basis_state(4, [1, 3]), 17.0)
    assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-13)


def test_validation():
    with pytest.raises(ResourceLimitError):
        DrivenModel(base(n=11))
    dm_base = base(omega_drive=1.0)
    with pytest.raises(DomainError):
        DrivenModel(dm_base, integrator_step=2 * math.pi / 39)
    with pytest.raises(DomainError):
        integrate_schrodinger(DrivenModel(base(n=2)), np.ones(4))
    with pytest.raises(DomainError):
        basis_state(3, [4])


def test_from_ratios():
    dm = DrivenModel.from_ratios(base(), 50, 25, 3)
    jmax = max_bare_coupling(dm.base)
    assert dm.base.omega_rabi == pytest.approx(50 * jmax)
    assert dm.base.omega_drive == pytest.approx(25 * jmax)
    assert dm.t_final == pytest.approx(3 / jmax)
    assert dm.scale_separation()["jmax_over_omega_drive"] == pytest.approx(1 / 25)


def test_zero_time_fidelity():
    dm = DrivenModel.from_ratios(base(), 50, 25, 0.0)
    assert effective_model_fidelity(dm, basis_state(6, [1])).fidelity == 1.0


def test_weak_separation_warns():
    dm = DrivenModel.from_ratios(base(n=4), 2, 25, 0.5)
    with pytest.warns(RuntimeWarning):
        effective_model_fidelity(dm, basis_state(4, [1]))


def _fidelity(rabi, drive=25, time=3.0, n=6, sites=(1,), **kw):
    dm = DrivenModel.from_ratios(base(n=n), rabi, drive, time, **kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return effective_model_fidelity(dm, basis_state(n, list(sites)))


def test_fidelity_improves_with_rabi_frequency():
    fids = [_fidelity(r).fidelity for r in (5, 20, 50, 100)]
    assert all(a < b for a, b in zip(fids, fids[1:]))


def test_fidelity_step_convergence():
    dm = DrivenModel.from_ratios(base(n=4), 50, 25, 3.0)
    fine = DrivenModel(**{**dm.__dict__, "integrator_step": dm.max_step / 2})
    psi = basis_state(4, [1])
    a = effective_model_fidelity(dm, psi)
    b = effective_model_fidelity(fine, psi)
    assert abs(a.fidelity - b.fidelity) < 1e-6
    assert a.norm_drift < 1e-8


def test_anomalous_terms_carry_the_residual_error():
    with_anom = _fidelity(50, n=4).fidelity
    without = _fidelity(50, n=4, include_anomalous=False).fidelity
    assert without > with_anom
    assert without > 0.99


def test_two_excitations():
    rep = _fidelity(50, n=4, sites=(1, 3))
    assert 0 <= rep.fidelity <= 1
    assert '"fidelity"' in rep.to_json()
