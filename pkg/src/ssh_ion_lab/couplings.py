"""Phonon-mediated ion couplings and their Floquet (Bessel) dressing.

Sites are labelled 1..N throughout the public API. The bare coupling between
ions ``j`` and ``l`` is

    J(d) = -(-1)^d J_exp exp(-d / xi_int) + J_dip / d^3,   d = |j - l|

and the drive with ``kd = pi/2`` multiplies it by

    B0( 2 eta sin(pi (j + l)/4 + phi) sin(pi (j - l)/4) ).

The one-excitation Hamiltonian is ``sum_{j,l} h_jl (|j><l| + |l><j|)`` with
``h_jl = J(|j-l|) * dressing(j, l)``; :func:`build_coupling_matrix` returns
``h`` itself (the matrix whose eigenpairs the rest of the package works with).
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bessel import bessel_j0
from .errors import (
    DegenerateConfigurationError,
    DomainError,
    InfeasibleGeometryError,
    UnsupportedConfigurationError,
)

ZETA3 = 1.2020569031595943
KD_PERIODIC = math.pi / 2
PHI_TOPOLOGICAL = 3 * math.pi / 4
PHI_TRIVIAL = math.pi / 4
# sin(pi q / 4) for q = 0..7 with the zeros exact
_SIN_QUARTER = np.array([0.0, math.sqrt(0.5), 1.0, math.sqrt(0.5), 0.0, -math.sqrt(0.5), -1.0, -math.sqrt(0.5)])


class CouplingForm(str, enum.Enum):
    ANALYTIC = "analytic"
    EXPONENTIAL_ONLY = "exponential_only"
    DIPOLAR_ONLY = "dipolar_only"
    NEAREST_NEIGHBOR = "nearest_neighbor"


@dataclass(frozen=True)
class CouplingModel:
    """Physical and driving parameters of the chain.

    Energies share one arbitrary unit; ``g**2 / t_c`` is the natural scale.
    """

    n_sites: int
    g: float = 1.0
    t_c: float = 1.0
    delta_band: float = 4.0
    eta: float = 0.0
    phi: float = PHI_TOPOLOGICAL
    kd: float = KD_PERIODIC
    omega_rabi: float = 0.0
    omega_drive: float = 0.0
    coupling_form: CouplingForm = CouplingForm.ANALYTIC

    def __post_init__(self):
        object.__setattr__(self, "coupling_form", CouplingForm(self.coupling_form))
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise DomainError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("g", "t_c", "delta_band"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if self.eta < 0:
            raise DomainError(f"eta must be non-negative, got {self.eta}")
        if not 0.0 <= self.phi <= math.pi:
            raise DomainError(f"phi must lie in [0, pi], got {self.phi}")

    @property
    def energy_unit(self) -> float:
        """The natural energy scale g^2 / t_C."""
        return self.g**2 / self.t_c


def interaction_range(model: CouplingModel) -> float:
    """Decay length xi_int of the Yukawa part, in lattice sites."""
    return math.sqrt(math.log(2) / 2) * math.sqrt(model.t_c / model.delta_band)


def exponential_amplitude(model: CouplingModel) -> float:
    return interaction_range(model) * model.g**2 / (model.t_c * math.log(2))


def dipolar_amplitude(model: CouplingModel) -> float:
    shift = model.delta_band + 7 * ZETA3 * model.t_c / 4
    return model.g**2 * model.t_c / (2 * shift**2)


def short_range_estimate(g: float, t_c: float, delta_band: float) -> float:
    """Nearest-neighbour coupling g^2 t_C / (2 delta^2) of the dipolar limit."""
    return g**2 * t_c / (2 * delta_band**2)


def coupling_at_distance(model: CouplingModel, d):
    """Bare coupling J(d) for integer distances ``d >= 1`` (array friendly)."""
    d = np.asarray(d)
    if np.any(d < 1):
        raise DomainError("no self-coupling: distance must be >= 1")
    df = d.astype(float)
    parity = np.where(d % 2 == 0, 1.0, -1.0)
    yukawa = -parity * exponential_amplitude(model) * np.exp(-df / interaction_range(model))
    dipolar = dipolar_amplitude(model) / df**3
    form = model.coupling_form
    if form is CouplingForm.EXPONENTIAL_ONLY:
        out = yukawa
    elif form is CouplingForm.DIPOLAR_ONLY:
        out = dipolar
    elif form is CouplingForm.NEAREST_NEIGHBOR:
        out = np.where(d == 1, yukawa + dipolar, 0.0)
    else:
        out = yukawa + dipolar
    return float(out) if out.ndim == 0 else out


def bare_coupling(model: CouplingModel, j: int, l: int) -> float:
    """Bare ion-ion coupling between sites ``j`` and ``l`` (1-based)."""
    _check_site(model, j)
    _check_site(model, l)
    if j == l:
        raise DomainError("no self-coupling: j == l")
    return coupling_at_distance(model, abs(j - l))


def _require_periodic(model: CouplingModel):
    if not math.isclose(model.kd, KD_PERIODIC, rel_tol=0, abs_tol=1e-12):
        raise UnsupportedConfigurationError(
            f"Bessel dressing is only defined for kd = pi/2, got kd = {model.kd}"
        )


def dressing_factor(model: CouplingModel, j, l):
    """Vectorised dressing B0(...) for arrays of 1-based indices."""
    _require_periodic(model)
    j = np.asarray(j, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    # reduce the phases mod 2 pi on the integers so that the pattern is exactly
    # periodic; shifting j + l by 4 only flips the sign of the argument
    r = np.mod(j + l, 8)
    flip = np.where(r >= 4, -1.0, 1.0)
    outer = flip * np.sin(np.pi * np.mod(r, 4) / 4 + model.phi)
    inner = _SIN_QUARTER[np.mod(j - l, 8)]
    return bessel_j0(2 * model.eta * outer * inner)


def bessel_dressing(model: CouplingModel, j: int, l: int) -> float:
    """Floquet renormalisation of the (j, l) coupling; lies in [-0.4028, 1]."""
    return float(dressing_factor(model, j, l))


def _check_site(model, j):
    if not 1 <= j <= model.n_sites:
        raise DomainError(f"site {j} outside 1..{model.n_sites}")


@dataclass(frozen=True)
class CouplingMatrix:
    """Dense symmetric coupling matrix h_jl with zero diagonal."""

    n_sites: int
    entries: np.ndarray = field(repr=False)
    model: CouplingModel | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.n_sites, self.n_sites):
            raise DomainError(f"entries must be {self.n_sites}x{self.n_sites}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def header(self) -> str:
        if self.model is None:
            return f"# N={self.n_sites}"
        return f"# N={self.n_sites} phi={self.model.phi!r} eta={self.model.eta!r}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        for row in self.entries:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CouplingMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise DomainError("missing '# N=...' header line")
        meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        n = int(meta["N"])
        return cls(n_sites=n, entries=rows.reshape(n, n))


def distance_matrix(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :])


def build_coupling_matrix(model: CouplingModel) -> CouplingMatrix:
    n = model.n_sites
    sites = np.arange(1, n + 1)
    jj, ll = np.meshgrid(sites, sites, indexing="ij")
    d = np.abs(jj - ll)
    h = np.zeros((n, n))
    off = d > 0
    h[off] = coupling_at_distance(model, d[off]) * dressing_factor(model, jj[off], ll[off])
    # exact symmetry; both factors are symmetric analytically
    h = 0.5 * (h + h.T)
    return CouplingMatrix(n_sites=n, entries=h, model=model)


def dimerization(model: CouplingModel, tol: float = 1e-12) -> float:
    """Relative difference of the (2,3) and (1,2) dressings.

    The bare couplings cancel since they depend only on |j - l|.
    """
    # the dressing is period-2 in the bond index, independent of chain length
    even = float(dressing_factor(model, 2, 3))
    odd = float(dressing_factor(model, 1, 2))
    denom = even + odd
    if abs(denom) < tol:
        raise DegenerateConfigurationError("dressings J_23 + J_12 vanish")
    return (even - odd) / denom


def _dimerization_at(eta: float, phi: float) -> float:
    model = CouplingModel(n_sites=2, eta=eta, phi=phi)
    return dimerization(model)


def eta_for_dimerization(target: float, phi: float = PHI_TOPOLOGICAL, eta_max: float = 5.0) -> float:
    """Smallest driving strength whose dimerization equals ``target``.

    Scans eta upward from zero and refines the first sign change by Brent's
    method.
    """
    if not -1 < target < 1:
        raise DomainError("target dimerization must lie in (-1, 1)")
    if target == 0:
        return 0.0
    grid = np.linspace(0.0, eta_max, 2001)
    prev_eta, prev_val = grid[0], -target
    for eta in grid[1:]:
        try:
            val = _dimerization_at(eta, phi) - target
        except DegenerateConfigurationError:
            prev_eta, prev_val = eta, math.nan
            continue
        if math.isfinite(prev_val) and prev_val * val <= 0:
            return brentq(lambda e: _dimerization_at(e, phi) - target, prev_eta, eta, xtol=1e-14)
        prev_eta, prev_val = eta, val
    raise DomainError(f"dimerization {target} not reached for eta <= {eta_max} at phi={phi}")


def standing_wave_tilt(wavelength: float, spacing: float) -> float:
    """Tilt angle (degrees) giving |dk_z| d0 = pi/2 for a standing wave."""
    ratio = wavelength / (4 * spacing)
    if ratio > 1 or ratio < 0:
        raise InfeasibleGeometryError(f"lambda/(4 d0) = {ratio} outside [0, 1]")
    return math.degrees(math.asin(ratio))
