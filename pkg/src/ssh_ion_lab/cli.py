"""Command-line front end: ``ssh-ion-lab --config run.yaml``.

Each experiment evaluates its sweep points (in a process pool when
``--jobs > 1``), collects the rows in order and writes data files plus a
``manifest.json`` with content hashes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import Experiment, OutputFormat, RunConfig, load_config
from .continuum import effective_params
from .couplings import build_coupling_matrix, dimerization
from .dynamics import fit_survival_power_law, long_time_survival
from .errors import ConfigError, GaplessSpectrumError, NumericalFailureError, SSHLabError
from .floquet import DrivenModel, basis_state, effective_model_fidelity, max_bare_coupling
from .lattice import analyze_edge_states, diagonalize
from .manybody import correlator_zz, exact_ground_state, hartree_fock, truncate_range
from .topology import build_bloch, zak_phase

log = logging.getLogger("ssh_ion_lab")

THREADS_ENV = "SSH_ION_LAB_THREADS"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "nan"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def table_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dump_json(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n"


class Output:
    """Collects files in memory; written together with the manifest."""

    def __init__(self, fmt: OutputFormat):
        self.fmt = fmt
        self.files: dict[str, str] = {}

    def table(self, stem: str, columns, rows):
        if self.fmt is OutputFormat.JSON:
            self.files[f"{stem}.json"] = dump_json([{c: r[c] for c in columns} for r in rows])
        else:
            self.files[f"{stem}.csv"] = table_csv(columns, rows)

    def document(self, name: str, obj):
        self.files[name] = dump_json(obj)


# --- per-point work; module level so the process pool can pickle it ---


def _point_model(cfg: RunConfig, value):
    if value is None:
        return cfg.model()
    return cfg.model(**{cfg.sweep_param: float(value)})


def _zak_point(cfg, value):
    model = _point_model(cfg, value)
    bloch = build_bloch(model, cfg.m_cells)
    try:
        res = zak_phase(bloch)
        return {"nu": res.nu, "abs_nu": abs(res.nu), "quantized": res.quantized, "gap_min": res.gap_min, "status": "ok"}
    except GaplessSpectrumError:
        return {"nu": None, "abs_nu": None, "quantized": False, "gap_min": float(bloch.gaps.min()), "status": "gapless"}


def _locsweep_point(cfg, value):
    model = _point_model(cfg, value)
    report = analyze_edge_states(diagonalize(build_coupling_matrix(model)))
    try:
        xi_pred = effective_params(model).xi_pred
    except NumericalFailureError:
        xi_pred = None
    return {
        "dimerization": dimerization(model),
        "xi_lattice": report.xi_loc,
        "fit_rms": report.fit_rms,
        "xi_pred": xi_pred,
        "n_midgap": len(report.midgap_energies),
    }


def _survival_point(cfg, value):
    model = _point_model(cfg, value)
    spec = diagonalize(build_coupling_matrix(model))
    report = analyze_edge_states(spec)
    return {"eta": model.eta, "xi_loc": report.xi_loc, "P": long_time_survival(spec)}


def _groundstate_point(cfg, value):
    model = _point_model(cfg, value)
    h = build_coupling_matrix(model)
    exact = exact_ground_state(h)
    trunc = exact_ground_state(truncate_range(h))
    hf = hartree_fock(model, self_consistent=cfg.self_consistent)
    return {
        "delta": dimerization(model),
        "delta_band_over_tc": model.delta_band / model.t_c,
        "zz_exact": correlator_zz(exact.state, exact.sector),
        "zz_trunc": correlator_zz(trunc.state, trunc.sector),
        "zz_hf": hf.correlator_zz,
        "sector": exact.n_excitations,
        "degenerate": exact.degenerate,
    }


def _hartreefock_point(cfg, value):
    model = _point_model(cfg, value)
    hf = hartree_fock(model, self_consistent=cfg.self_consistent)
    return {
        "delta": dimerization(model),
        "delta_band_over_tc": model.delta_band / model.t_c,
        "z_weight": hf.z_weight,
        "zz_hf": hf.correlator_zz,
        "ambiguous_filling": hf.ambiguous_filling,
    }


_POINT_FUNCS = {
    Experiment.ZAK: _zak_point,
    Experiment.LOCSWEEP: _locsweep_point,
    Experiment.SURVIVAL: _survival_point,
    Experiment.GROUNDSTATE: _groundstate_point,
    Experiment.HARTREEFOCK: _hartreefock_point,
}


def _call_point(args):
    experiment, cfg, value = args
    return _POINT_FUNCS[experiment](cfg, value)


def _evaluate(cfg: RunConfig, jobs: int) -> tuple[list, list]:
    values = list(cfg.sweep_values()) if cfg.has_sweep else [None]
    tasks = [(cfg.experiment, cfg, v) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_call_point, tasks))
    else:
        results = [_call_point(t) for t in tasks]
    return values, results


def _with_param(cfg, values, results):
    rows = []
    for v, r in zip(values, results):
        row = dict(r)
        if cfg.has_sweep:
            row[cfg.sweep_param] = float(v)
        rows.append(row)
    return rows


def _lead(cfg) -> list:
    return [cfg.sweep_param] if cfg.has_sweep else []


# --- experiments ---


def _run_couplings(cfg, out, jobs):
    matrix = build_coupling_matrix(cfg.model())
    if out.fmt is OutputFormat.JSON:
        out.document("couplings.json", {"n_sites": matrix.n_sites, "entries": matrix.entries.tolist()})
    else:
        out.files["couplings.csv"] = matrix.to_csv()


def _run_spectrum(cfg, out, jobs):
    spec = diagonalize(build_coupling_matrix(cfg.model()))
    rows = [{"index": i, "energy": e} for i, e in enumerate(spec.energies)]
    out.table("spectrum", ["index", "energy"], rows)


def _run_edge(cfg, out, jobs):
    report = analyze_edge_states(diagonalize(build_coupling_matrix(cfg.model())))
    out.document("edge_report.json", report.to_dict())
    if report.profile is None:
        log.warning("no mid-gap state found; edge profile not written")
        return
    if out.fmt is OutputFormat.JSON:
        rows = [{"site": j, "amplitude": a} for j, a in enumerate(report.profile, start=1)]
        out.table("edge_profile", ["site", "amplitude"], rows)
    else:
        out.files["edge_profile.csv"] = report.profile_csv()


def _run_zak(cfg, out, jobs):
    values, results = _evaluate(cfg, jobs)
    rows = _with_param(cfg, values, results)
    out.table("zak", _lead(cfg) + ["nu", "abs_nu", "quantized", "gap_min", "status"], rows)


def _run_locsweep(cfg, out, jobs):
    values, results = _evaluate(cfg, jobs)
    rows = _with_param(cfg, values, results)
    cols = _lead(cfg) + ["dimerization", "xi_lattice", "fit_rms", "xi_pred", "n_midgap"]
    out.table("locsweep", cols, rows)


def _run_survival(cfg, out, jobs):
    values, results = _evaluate(cfg, jobs)
    usable = [r for r in results if r["xi_loc"] is not None]
    skipped = [r["eta"] for r in results if r["xi_loc"] is None]
    if skipped:
        log.warning("no resolvable edge state at eta = %s; points skipped", ", ".join(f"{e:.6g}" for e in skipped))
    rows = [{"inv_xi_loc": 1 / r["xi_loc"], "P": r["P"], "eta": r["eta"]} for r in usable]
    out.table("survival", ["inv_xi_loc", "P"], rows)
    fit = fit_survival_power_law([(r["xi_loc"], r["P"]) for r in usable], cfg.n_sites)
    out.document(
        "fit.json",
        {
            "beta": fit.beta,
            "c1": fit.c1,
            "c2": fit.c2,
            "fit_window": list(fit.fit_window),
            "n_points": fit.n_points,
            "n_sites": fit.n_sites,
            "skipped_eta": skipped,
        },
    )


def _run_groundstate(cfg, out, jobs):
    values, results = _evaluate(cfg, jobs)
    rows = _with_param(cfg, values, results)
    cols = ["delta", "delta_band_over_tc", "zz_exact", "zz_trunc", "zz_hf", "sector", "degenerate"]
    out.table("correlators", cols, rows)


def _run_hartreefock(cfg, out, jobs):
    values, results = _evaluate(cfg, jobs)
    rows = _with_param(cfg, values, results)
    cols = ["delta", "delta_band_over_tc", "z_weight", "zz_hf", "ambiguous_filling"]
    out.table("zweight", cols, rows)


def _run_floquet(cfg, out, jobs):
    base = cfg.model()
    if cfg.omega_rabi > 0 and cfg.omega_drive > 0:
        model = DrivenModel(base=base, include_anomalous=cfg.include_anomalous,
                            t_final=cfg.time_units / max_bare_coupling(base))
    else:
        model = DrivenModel.from_ratios(
            base, cfg.rabi_ratio, cfg.drive_ratio, cfg.time_units, include_anomalous=cfg.include_anomalous
        )
    report = effective_model_fidelity(model, basis_state(base.n_sites, cfg.excited_sites))
    doc = dict(report.__dict__)
    doc.pop("wall_time")
    doc["excited_sites"] = list(cfg.excited_sites)
    doc["include_anomalous"] = cfg.include_anomalous
    out.document("floquet_report.json", doc)


_RUNNERS = {
    Experiment.COUPLINGS: _run_couplings,
    Experiment.SPECTRUM: _run_spectrum,
    Experiment.EDGE: _run_edge,
    Experiment.ZAK: _run_zak,
    Experiment.LOCSWEEP: _run_locsweep,
    Experiment.SURVIVAL: _run_survival,
    Experiment.GROUNDSTATE: _run_groundstate,
    Experiment.HARTREEFOCK: _run_hartreefock,
    Experiment.FLOQUET_VERIFY: _run_floquet,
}


def run_experiment(cfg: RunConfig, jobs: int = 1) -> dict:
    """Run one experiment and write its files; returns the manifest."""
    start = time.perf_counter()
    out = Output(cfg.format)
    _RUNNERS[cfg.experiment](cfg, out, jobs)
    outdir = Path(cfg.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {outdir}: {exc}") from None
    hashes = {}
    for name, text in sorted(out.files.items()):
        data = text.encode("utf-8")
        (outdir / name).write_bytes(data)
        hashes[name] = hashlib.sha256(data).hexdigest()
    manifest = {
        "experiment": cfg.experiment.value,
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "versions": {
            "ssh_ion_lab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": time.perf_counter() - start,
        "files": hashes,
    }
    (outdir / "manifest.json").write_text(dump_json(manifest), encoding="utf-8")
    return manifest


def _jobs(flag: int | None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    else:
        n = flag if flag is not None else 1
    if n < 1:
        raise ConfigError("number of jobs must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssh-ion-lab", description="Long-range SSH chain experiments")
    p.add_argument("--config", required=True, help="flat YAML run configuration")
    p.add_argument("--jobs", type=int, default=None, help=f"worker processes (overridden by {THREADS_ENV})")
    p.add_argument("--output", default=None, help="output directory (overrides output_dir)")
    p.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    p.add_argument("--quiet", action="store_true", help="only print warnings and errors")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    experiment = "?"
    try:
        cfg = load_config(args.config)
        experiment = cfg.experiment.value
        if args.output is not None:
            cfg = replace(cfg, output_dir=args.output)
        if args.format is not None:
            cfg = replace(cfg, format=OutputFormat(args.format))
        jobs = _jobs(args.jobs)
        log.info("running %s with %d job(s)", experiment, jobs)
        manifest = run_experiment(cfg, jobs)
        log.info("wrote %s to %s", ", ".join(manifest["files"]), cfg.output_dir)
        return 0
    except SSHLabError as exc:
        log.error("%s: %s", experiment, exc)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        log.error("%s: linear algebra failure: %s", experiment, exc)
        return NumericalFailureError.exit_code


if __name__ == "__main__":
    sys.exit(main())
