import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssh_ion_lab.continuum import effective_params
from ssh_ion_lab.couplings import PHI_TOPOLOGICAL, CouplingModel, build_coupling_matrix
from ssh_ion_lab.dynamics import (
    degenerate_groups,
    dephasing_window,
    evolve_single_excitation,
    fit_survival_power_law,
    long_time_survival,
    survival_components,
    survival_csv,
    survival_model,
)
from ssh_ion_lab.errors import DomainError, FitDomainError
from ssh_ion_lab.lattice import analyze_edge_states, diagonalize


def chain(bonds):
    bonds = np.asarray(bonds, dtype=float)
    return np.diag(bonds, 1) + np.diag(bonds, -1)


def test_initial_survival_is_one():
    spec = diagonalize(chain(np.linspace(0.1, 1, 11)))
    res = evolve_single_excitation(spec, [0.0, 0.5])
    assert res.survival[0] == pytest.approx(1.0, abs=1e-14)
    assert np.all((res.survival >= 0) & (res.survival <= 1 + 1e-12))


def test_two_site_closed_form():
    h = 0.37
    spec = diagonalize(chain([h]))
    t = np.linspace(0, 10, 101)
    res = evolve_single_excitation(spec, t)
    assert np.allclose(res.survival, np.cos(2 * h * t) ** 4, atol=1e-13)


def test_decoupled_end_site_survives():
    bonds = [0.0 if b % 2 == 0 else 2.0 for b in range(19)]
    spec = diagonalize(chain(bonds))
    res = evolve_single_excitation(spec, np.linspace(0, 50, 31))
    assert np.allclose(res.survival, 1.0, atol=1e-14)
    assert long_time_survival(spec) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_unitarity(seed, n):
    a = np.random.default_rng(seed).normal(size=(n, n))
    spec = diagonalize(a + a.T)
    res = evolve_single_excitation(spec, np.linspace(0, 20, 17), site=n)
    assert res.norm_drift < 1e-10
    assert np.allclose(res.profiles.sum(axis=0), 1.0, atol=1e-10)


def test_time_validation():
    spec = diagonalize(chain([1.0]))
    with pytest.raises(DomainError):
        evolve_single_excitation(spec, [1.0, 0.5])
    with pytest.raises(DomainError):
        evolve_single_excitation(spec, [-1.0])


def test_uniform_chain_closed_form():
    # open chain: M_1n = sqrt(2/(N+1)) sin(pi n/(N+1)) so sum_n M_1n^4 = 3/(2(N+1))
    n = 100
    spec = diagonalize(chain(np.ones(n - 1)))
    assert long_time_survival(spec) == pytest.approx((1.5 / (n + 1)) ** 2, rel=1e-12)
    m = CouplingModel(n_sites=n, delta_band=4.0)
    p = long_time_survival(diagonalize(build_coupling_matrix(m)))
    assert 1e-4 < p < 1e-3


def test_degenerate_levels_are_merged():
    # two identical decoupled chains give exactly degenerate pairs; any basis
    # rotation inside a pair must not change the answer
    block = chain([0.3, 0.7, 0.2, 0.9])
    h = np.zeros((10, 10))
    h[:5, :5] = block
    h[5:, 5:] = block
    spec = diagonalize(h)
    single = long_time_survival(diagonalize(block))
    assert long_time_survival(spec) == pytest.approx(single, rel=1e-12)


def test_degenerate_groups():
    e = np.array([-1.0, -1.0 + 1e-13, 0.0, 0.3, 0.3 + 1e-3])
    assert [g.tolist() for g in degenerate_groups(e)] == [[0, 1], [2], [3], [4]]
    assert [g.tolist() for g in degenerate_groups(e, t_window=10.0)] == [[0, 1], [2], [3, 4]]
    with pytest.raises(DomainError):
        degenerate_groups(e, t_window=0.0)


def test_spectral_formula_matches_time_average(eta_01):
    m = CouplingModel(n_sites=1000, delta_band=4.0, eta=eta_01, phi=PHI_TOPOLOGICAL)
    spec = diagonalize(build_coupling_matrix(m))
    delta0 = effective_params(m).delta0
    times = dephasing_window(delta0)
    res = evolve_single_excitation(spec, times)
    p = long_time_survival(spec, t_window=times[-1])
    assert res.long_time_average == pytest.approx(p, rel=0.05)
    # c1 / xi^2 dominates the c2 / N floor
    report = analyze_edge_states(spec)
    edge, bulk = survival_components(spec, report, t_window=times[-1])
    assert edge > 10 * bulk
    assert edge**2 + 2 * edge * bulk + bulk**2 == pytest.approx(p, rel=1e-12)


def test_dephasing_window():
    t = dephasing_window(-0.5)
    assert len(t) == 200 and t[0] == 20 and t[-1] == 200
    with pytest.raises(DomainError):
        dephasing_window(0.0)


def test_exact_power_law_gives_four():
    xi = np.geomspace(2, 40, 9)
    p = survival_model(1 / xi, 3.0, 0.0, 1000)
    fit = fit_survival_power_law(np.column_stack([xi, p]), 1000)
    assert fit.beta == pytest.approx(4.0, abs=1e-6)
    assert fit.c1 == pytest.approx(3.0, rel=1e-6)
    assert fit.c2 == pytest.approx(0.0, abs=1e-6)
    assert fit.n_points == 9


def test_finite_size_floor_lowers_beta():
    xi = np.geomspace(2, 40, 9)
    p = survival_model(1 / xi, 3.0, 5.0, 1000)
    fit = fit_survival_power_law(np.column_stack([xi, p]), 1000)
    assert fit.beta < 4
    assert fit.c1 == pytest.approx(3.0, rel=1e-6)
    assert fit.c2 == pytest.approx(5.0, rel=1e-6)


def test_fit_window():
    xi = np.geomspace(2, 40, 12)
    p = survival_model(1 / xi, 1.0, 0.0, 100)
    fit = fit_survival_power_law(np.column_stack([xi, p]), 100, window=(0.03, 0.3))
    assert fit.fit_window[0] >= 0.03 and fit.fit_window[1] <= 0.3
    assert fit.n_points < 12


@pytest.mark.parametrize(
    "xi, p",
    [
        ([2, 3, 4, 5], [1, 1, 1, 1]),
        ([2, 2.5, 3, 3.5, 4], [1, 1, 1, 1, 1]),
        ([2, 4, 8, 16, float("nan")], [1, 1, 1, 1, 1]),
        ([2, 4, 8, 16, 32], [1, 1, 1, 1, 0]),
    ],
)
def test_fit_domain_errors(xi, p):
    with pytest.raises(FitDomainError):
        fit_survival_power_law(np.column_stack([xi, p]), 100)


def test_fit_json_and_csv():
    xi = np.geomspace(2, 40, 6)
    pts = np.column_stack([xi, survival_model(1 / xi, 1.0, 0.0, 100)])
    fit = fit_survival_power_law(pts, 100)
    assert '"beta"' in fit.to_json()
    lines = survival_csv(pts).splitlines()
    assert lines[0] == "inv_xi_loc,P" and len(lines) == 7
    assert float(lines[1].split(",")[0]) == pytest.approx(0.5)
