import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssh_ion_lab.bessel import bessel_j0
from ssh_ion_lab.couplings import (
    PHI_TOPOLOGICAL,
    PHI_TRIVIAL,
    CouplingForm,
    CouplingMatrix,
    CouplingModel,
    bare_coupling,
    bessel_dressing,
    build_coupling_matrix,
    dimerization,
    dipolar_amplitude,
    eta_for_dimerization,
    exponential_amplitude,
    interaction_range,
    standing_wave_tilt,
)
from ssh_ion_lab.errors import (
    DegenerateConfigurationError,
    DomainError,
    InfeasibleGeometryError,
    UnsupportedConfigurationError,
)

# high-precision evaluations of the closed forms at g = t_c = 1, delta_band = 4
XI_INT = 0.29435250562886867
J_EXP = 0.42466090014400952
J_DIP = 0.013421403567295681
J_OF_D = [0.027632225286747121, 0.001202125533326297, 0.0005130027889706664, 0.00020917689355630751]
ETA_01 = 0.61761058959796057


def model(**kw):
    base = dict(n_sites=10, delta_band=4.0)
    base.update(kw)
    return CouplingModel(**base)


def test_constants():
    m = model()
    assert interaction_range(m) == pytest.approx(XI_INT, rel=1e-14)
    assert interaction_range(m) == pytest.approx(0.2943, abs=1e-4)
    assert exponential_amplitude(m) == pytest.approx(J_EXP, rel=1e-14)
    assert dipolar_amplitude(m) == pytest.approx(J_DIP, rel=1e-14)


def test_bare_coupling_values():
    m = model()
    for d, want in enumerate(J_OF_D, start=1):
        assert bare_coupling(m, 1, 1 + d) == pytest.approx(want, rel=1e-13)
        assert bare_coupling(m, 1 + d, 1) == bare_coupling(m, 1, 1 + d)


def test_self_coupling_rejected():
    with pytest.raises(DomainError):
        bare_coupling(model(), 3, 3)
    with pytest.raises(DomainError):
        bare_coupling(model(), 0, 3)


def test_coupling_forms():
    nn = model(coupling_form="nearest_neighbor")
    assert bare_coupling(nn, 1, 3) == 0
    assert bare_coupling(nn, 1, 2) == pytest.approx(J_OF_D[0], rel=1e-13)
    dip = model(coupling_form=CouplingForm.DIPOLAR_ONLY)
    vals = [abs(bare_coupling(dip, 1, 1 + d)) for d in range(1, 9)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    expo = model(coupling_form=CouplingForm.EXPONENTIAL_ONLY)
    signs = [np.sign(bare_coupling(expo, 1, 1 + d)) for d in range(1, 7)]
    # Yukawa factor -(-1)^d alternates with the parity of the distance
    assert signs == [1, -1, 1, -1, 1, -1]


def test_dressing_examples():
    assert bessel_dressing(model(eta=0.0), 1, 5) == 1.0
    m = model(eta=0.62, phi=PHI_TOPOLOGICAL)
    assert bessel_dressing(m, 2, 3) == 1.0
    assert bessel_dressing(m, 1, 2) == pytest.approx(0.81684033798444855, abs=1e-14)
    assert bessel_dressing(m, 1, 3) == pytest.approx(0.8168403379844486, abs=1e-14)
    assert bessel_dressing(m, 1, 4) == pytest.approx(1.0, abs=1e-15)
    assert round(bessel_dressing(model(eta=ETA_01), 1, 2), 3) == 0.818


def test_dressing_requires_periodic_kd():
    with pytest.raises(UnsupportedConfigurationError):
        bessel_dressing(model(kd=1.0), 1, 2)


@settings(max_examples=60, deadline=None)
@given(
    eta=st.floats(0, 3),
    phi=st.floats(0, math.pi),
    j=st.integers(1, 6),
    d=st.integers(1, 4),
)
def test_dressing_period_and_range(eta, phi, j, d):
    m = model(eta=eta, phi=phi)
    a = bessel_dressing(m, j, j + d)
    assert abs(a - bessel_dressing(m, j + 2, j + 2 + d)) <= 1e-15
    assert -0.4028 <= a <= 1.0


@pytest.mark.parametrize("phi", [PHI_TRIVIAL, PHI_TOPOLOGICAL])
@pytest.mark.parametrize("eta", [0.1, 0.62, 1.7])
def test_chiral_limit_sublattice_dressings_agree(phi, eta):
    m = model(eta=eta, phi=phi)
    for d in range(2, 12, 2):
        assert bessel_dressing(m, 1, 1 + d) == pytest.approx(bessel_dressing(m, 2, 2 + d), abs=1e-14)


def test_two_site_matrix():
    m = model(n_sites=2, eta=0.62)
    h = build_coupling_matrix(m).entries
    want = J_OF_D[0] * bessel_j0(math.sqrt(2) * 0.62 * math.sin(3 * math.pi / 4 + m.phi))
    assert h[0, 1] == pytest.approx(want, rel=1e-13)
    assert h[0, 0] == h[1, 1] == 0


def test_matrix_equals_bare_at_zero_drive():
    m = model(n_sites=7)
    h = build_coupling_matrix(m).entries
    for j in range(1, 8):
        for l in range(1, 8):
            if j != l:
                assert h[j - 1, l - 1] == bare_coupling(m, j, l)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 30),
    eta=st.floats(0, 2),
    phi=st.floats(0, math.pi),
    band=st.floats(0.05, 20),
)
def test_matrix_symmetric_zero_diagonal(n, eta, phi, band):
    cm = build_coupling_matrix(CouplingModel(n_sites=n, eta=eta, phi=phi, delta_band=band))
    assert np.array_equal(cm.entries, cm.entries.T)
    assert np.all(np.diag(cm.entries) == 0)


def test_matrix_csv_roundtrip():
    cm = build_coupling_matrix(model(n_sites=5, eta=0.62))
    text = cm.to_csv()
    assert text.splitlines()[0].startswith("# N=5 phi=")
    back = CouplingMatrix.from_csv(text)
    assert np.array_equal(back.entries, cm.entries)


def test_dimerization_examples():
    assert dimerization(model(eta=0.0)) == 0.0
    assert dimerization(model(eta=ETA_01)) == pytest.approx(0.1, abs=1e-13)
    assert dimerization(model(eta=ETA_01, phi=PHI_TRIVIAL)) == pytest.approx(-0.1, abs=1e-13)
    assert dimerization(model(eta=0.62)) == pytest.approx(0.1, abs=2e-3)


def test_dimerization_continuous_in_eta():
    etas = np.linspace(0, 1.5, 301)
    vals = np.array([dimerization(model(eta=e)) for e in etas])
    assert np.abs(np.diff(vals)).max() < 0.01
    assert np.all(np.diff(vals) > 0)


def test_eta_root():
    eta = eta_for_dimerization(0.1)
    assert eta == pytest.approx(ETA_01, abs=1e-12)
    assert abs(eta - 0.62) < 0.01
    assert eta_for_dimerization(0.0) == 0.0
    with pytest.raises(DomainError):
        eta_for_dimerization(1.0)


def test_degenerate_dimerization():
    # at phi = pi/2 both dressings equal B0(eta); their sum vanishes at the first zero of J0
    m = model(phi=math.pi / 2, eta=2.404825557695773)
    with pytest.raises(DegenerateConfigurationError):
        dimerization(m)


def test_tilt():
    assert standing_wave_tilt(320e-9, 10e-6) == pytest.approx(0.4584, abs=1e-4)
    assert round(standing_wave_tilt(320e-9, 10e-6), 2) == 0.46
    assert standing_wave_tilt(4.0, 1.0) == pytest.approx(90.0)
    assert standing_wave_tilt(0.0, 1.0) == 0.0
    with pytest.raises(InfeasibleGeometryError):
        standing_wave_tilt(5.0, 1.0)


def test_model_validation():
    with pytest.raises(DomainError):
        CouplingModel(n_sites=1)
    with pytest.raises(DomainError):
        CouplingModel(n_sites=4, delta_band=0.0)
    with pytest.raises(DomainError):
        CouplingModel(n_sites=4, phi=-0.1)
    with pytest.raises(DomainError):
        CouplingModel(n_sites=4, eta=-1)
