"""Flat YAML run configuration with strict key checking."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
import yaml

from .couplings import CouplingForm, CouplingModel, KD_PERIODIC, PHI_TOPOLOGICAL, eta_for_dimerization
from .errors import ConfigError, SSHLabError


class Experiment(str, enum.Enum):
    COUPLINGS = "couplings"
    SPECTRUM = "spectrum"
    EDGE = "edge"
    ZAK = "zak"
    LOCSWEEP = "locsweep"
    SURVIVAL = "survival"
    GROUNDSTATE = "groundstate"
    HARTREEFOCK = "hartreefock"
    FLOQUET_VERIFY = "floquet-verify"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


SWEEP_PARAMS = ("eta", "delta_band", "phi", "dimerization")
SWEEP_REQUIRED = (Experiment.LOCSWEEP, Experiment.SURVIVAL)
SWEEP_ALLOWED = (
    Experiment.ZAK,
    Experiment.LOCSWEEP,
    Experiment.SURVIVAL,
    Experiment.GROUNDSTATE,
    Experiment.HARTREEFOCK,
)


@dataclass(frozen=True)
class RunConfig:
    experiment: Experiment
    n_sites: int = 100
    g: float = 1.0
    t_c: float = 1.0
    delta_band: float = 4.0
    eta: float = 0.0
    phi: float = PHI_TOPOLOGICAL
    kd: float = KD_PERIODIC
    omega_rabi: float = 0.0
    omega_drive: float = 0.0
    coupling_form: CouplingForm = CouplingForm.ANALYTIC
    # solves for eta when set; overrides eta
    target_dimerization: float | None = None
    sweep_param: str | None = None
    sweep_start: float | None = None
    sweep_stop: float | None = None
    sweep_points: int | None = None
    sweep_scale: str = "linear"
    m_cells: int = 256
    self_consistent: bool = False
    rabi_ratio: float = 50.0
    drive_ratio: float = 25.0
    time_units: float = 3.0
    include_anomalous: bool = True
    excited_sites: tuple = (1,)
    output_dir: str = "out"
    seed: int = 0
    format: OutputFormat = OutputFormat.CSV

    @property
    def has_sweep(self) -> bool:
        return self.sweep_param is not None

    def sweep_values(self) -> np.ndarray:
        if not self.has_sweep:
            return np.array([])
        if self.sweep_scale == "log":
            return np.geomspace(self.sweep_start, self.sweep_stop, self.sweep_points)
        return np.linspace(self.sweep_start, self.sweep_stop, self.sweep_points)

    def model(self, **overrides) -> CouplingModel:
        """CouplingModel for this config with optional field overrides.

        ``dimerization`` in ``overrides`` (or ``target_dimerization``) is
        converted to eta at the configured phase.
        """
        base = {f.name: getattr(self, f.name) for f in fields(CouplingModel)}
        default_target = None if "eta" in overrides else self.target_dimerization
        target = overrides.pop("dimerization", default_target)
        base.update(overrides)
        if target is not None:
            base["eta"] = eta_for_dimerization(target, base["phi"])
        return CouplingModel(**base)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, enum.Enum):
                d[k] = v.value
            elif isinstance(v, tuple):
                d[k] = list(v)
        return d

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


_FIELDS = {f.name: f for f in fields(RunConfig)}
_FLOATS = {"g", "t_c", "delta_band", "eta", "phi", "kd", "omega_rabi", "omega_drive", "target_dimerization",
           "sweep_start", "sweep_stop", "rabi_ratio", "drive_ratio", "time_units"}
_INTS = {"n_sites", "sweep_points", "m_cells", "seed"}
_BOOLS = {"self_consistent", "include_anomalous"}
_STRS = {"sweep_param", "sweep_scale", "output_dir"}


def _where(lines: dict, key: str) -> str:
    line = lines.get(key)
    return f"line {line}, key '{key}'" if line is not None else f"key '{key}'"


def _coerce(key: str, value, where: str):
    if value is None:
        if _FIELDS[key].default is None:
            return None
        raise ConfigError(f"{where}: value required")
    if key in _FLOATS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{where}: must be finite")
        return value
    if key in _INTS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if key in _BOOLS:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if key in _STRS:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if key == "experiment":
        try:
            return Experiment(str(value))
        except ValueError:
            choices = ", ".join(e.value for e in Experiment)
            raise ConfigError(f"{where}: unknown experiment {value!r} (choose from {choices})") from None
    if key == "coupling_form":
        try:
            return CouplingForm(str(value))
        except ValueError:
            choices = ", ".join(e.value for e in CouplingForm)
            raise ConfigError(f"{where}: unknown coupling form {value!r} (choose from {choices})") from None
    if key == "format":
        try:
            return OutputFormat(str(value))
        except ValueError:
            raise ConfigError(f"{where}: format must be csv or json") from None
    if key == "excited_sites":
        items = value if isinstance(value, list) else [value]
        if not items or not all(isinstance(i, int) and not isinstance(i, bool) for i in items):
            raise ConfigError(f"{where}: expected a site or a list of sites")
        return tuple(items)
    raise ConfigError(f"{where}: unsupported key")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat YAML document."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed document: {exc}") from None
    if root is None or data is None:
        raise ConfigError("empty configuration")
    if not isinstance(root, yaml.MappingNode) or not isinstance(data, dict):
        raise ConfigError("configuration must be a key: value mapping")
    lines = {k.value: k.start_mark.line + 1 for k, _ in root.value}

    values = {}
    for key, raw in data.items():
        if key not in _FIELDS:
            raise ConfigError(f"{_where(lines, str(key))}: unknown key")
        values[key] = _coerce(key, raw, _where(lines, key))
    if "experiment" not in values:
        raise ConfigError("missing required key 'experiment'")

    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    _validate(cfg, lines)
    return cfg


def _validate(cfg: RunConfig, lines: dict):
    if not 0.0 <= cfg.phi <= math.pi:
        raise ConfigError(f"{_where(lines, 'phi')}: phi = {cfg.phi} outside [0, pi]")
    if cfg.target_dimerization is not None and not -1 < cfg.target_dimerization < 1:
        raise ConfigError(f"{_where(lines, 'target_dimerization')}: must lie in (-1, 1)")
    if cfg.m_cells < 16:
        raise ConfigError(f"{_where(lines, 'm_cells')}: must be >= 16")

    sweep_keys = ("sweep_param", "sweep_start", "sweep_stop", "sweep_points")
    given = [k for k in sweep_keys if getattr(cfg, k) is not None]
    if given and len(given) != len(sweep_keys):
        missing = [k for k in sweep_keys if k not in given]
        raise ConfigError(f"incomplete sweep: missing {', '.join(missing)}")
    if cfg.has_sweep:
        if cfg.experiment not in SWEEP_ALLOWED:
            raise ConfigError(f"{_where(lines, 'sweep_param')}: experiment {cfg.experiment.value} takes no sweep")
        if cfg.sweep_param not in SWEEP_PARAMS:
            raise ConfigError(
                f"{_where(lines, 'sweep_param')}: cannot sweep {cfg.sweep_param!r} (choose from {', '.join(SWEEP_PARAMS)})"
            )
        if cfg.sweep_points < 2:
            raise ConfigError(f"{_where(lines, 'sweep_points')}: a sweep needs at least 2 points")
        if cfg.sweep_scale not in ("linear", "log"):
            raise ConfigError(f"{_where(lines, 'sweep_scale')}: must be linear or log")
        if cfg.sweep_scale == "log" and min(cfg.sweep_start, cfg.sweep_stop) <= 0:
            raise ConfigError(f"{_where(lines, 'sweep_start')}: log sweeps need positive bounds")
    elif cfg.experiment in SWEEP_REQUIRED:
        raise ConfigError(f"experiment {cfg.experiment.value} requires a sweep")

    # build the base model once so range errors surface as configuration errors
    try:
        cfg.model()
    except SSHLabError as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from None


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
