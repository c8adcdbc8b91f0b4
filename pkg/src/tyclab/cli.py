"""Command-line front end.

Subcommands: simulate, pde, classify, threshold, regionmap, stability,
compare. Experiments are described by a JSON config file; repeated
``--set key.path=value`` flags override config keys (last wins). Outputs
are deterministic: identical configs produce byte-identical files.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .analysis import (
    Boundary,
    BracketInvalid,
    IndeterminateOutcome,
    NonMonotoneScan,
    Region,
    classify,
    compare_thresholds,
    find_threshold,
    region_map,
)
from .models import (
    DimensionalParams,
    DimensionlessParams,
    ModelKind,
    ModelSpec,
    stability_check,
)
from .ode import IntegratorConfig, Status, integrate
from .pde import (
    BoundaryCondition,
    SpatialGrid,
    boundary_values,
    constant_profile,
    integrate_pde,
    parabola_profile,
    supermale_parabola_profile,
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

_INTEGRATOR_KEYS = {
    "abs_tol", "rel_tol", "h_init", "h_min", "h_max", "t_end",
    "blowup_cutoff", "neg_eps", "sample_dt", "max_steps",
}
_PARAM_KEYS = {"r", "gamma", "allee", "diffusion", "beta", "delta", "K", "mu"}
_ANALYSIS_KEYS = {
    "axis", "boundary", "bracket", "tol", "f0m0", "f0m0_range",
    "resolution", "s0", "bracket_r12", "bracket_r23", "models", "prescan",
}
_PROFILE_KEYS = {"profile", "value", "amplitude", "s_max"}

_SCHEMA: dict[str, Any] = {
    "model": {"kind", "spatial", "params"},
    "initial": {"f", "m", "s", "r4"},
    "grid": {"n", "bc"},
    "integrator": _INTEGRATOR_KEYS,
    "analysis": _ANALYSIS_KEYS,
    "output": {"dir", "prefix", "snapshot_times"},
}


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for key, sub in cfg.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(sub, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        for k, v in sub.items():
            if k not in _SCHEMA[key]:
                raise ConfigError(f"unknown key {key}.{k}")
            if key == "model" and k == "params":
                if not isinstance(v, dict):
                    raise ConfigError("model.params must be an object")
                for pk in v:
                    if pk not in _PARAM_KEYS:
                        raise ConfigError(f"unknown key model.params.{pk}")
            if key == "initial" and isinstance(v, dict):
                for pk in v:
                    if pk not in _PROFILE_KEYS:
                        raise ConfigError(f"unknown key initial.{k}.{pk}")
    return cfg


def load_config(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    return validate_config(cfg)


def write_config(cfg: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")


def apply_overrides(cfg: dict, sets: Sequence[str]) -> dict:
    """Apply --set key.path=value overrides (values parsed as JSON when
    possible, else kept as strings); later flags win."""
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key.path=value, got {item!r}")
        path, raw = item.split("=", 1)
        keys = path.strip().split(".")
        if not all(keys):
            raise ConfigError(f"bad --set path {path!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {path!r} crosses a non-object key")
        node[keys[-1]] = value
    return validate_config(cfg)


def build_model(cfg: dict) -> ModelSpec:
    mc = cfg.get("model")
    if not mc or "kind" not in mc:
        raise ConfigError("config needs model.kind")
    try:
        kind = ModelKind(mc["kind"])
    except ValueError:
        raise ConfigError(
            f"unknown model.kind {mc['kind']!r}; expected one of "
            f"{[k.value for k in ModelKind]}"
        ) from None
    pc = dict(mc.get("params", {}))
    dimensional = any(k in pc for k in ("beta", "delta", "K", "mu"))
    try:
        if dimensional:
            params: DimensionlessParams | DimensionalParams = DimensionalParams(**pc)
        else:
            params = DimensionlessParams(**pc)
        return ModelSpec(kind, params, spatial=bool(mc.get("spatial", False)))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad model parameters: {e}") from e


def build_integrator(cfg: dict) -> IntegratorConfig:
    try:
        return IntegratorConfig(**cfg.get("integrator", {}))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad integrator settings: {e}") from e


def build_grid(cfg: dict) -> SpatialGrid:
    gc = cfg.get("grid", {})
    try:
        bc = BoundaryCondition(gc.get("bc", "neumann"))
        return SpatialGrid(int(gc.get("n", 199)), bc)
    except ValueError as e:
        raise ConfigError(f"bad grid settings: {e}") from e


def build_initial_state(cfg: dict, model: ModelSpec) -> np.ndarray:
    ic = cfg.get("initial", {})
    vals = []
    for name in model.species:
        v = ic.get(name, 0.0)
        if isinstance(v, dict):
            raise ConfigError(f"initial.{name}: spatial profiles need the pde command")
        vals.append(float(v))
    return np.array(vals)


def _profile_field(name: str, spec: Any, grid: SpatialGrid) -> tuple[np.ndarray, float]:
    """Build one species field from a profile spec; returns (values,
    boundary value at x=0 and x=1 implied by the profile)."""
    if not isinstance(spec, dict):
        v = float(spec)
        return constant_profile(grid, v), v
    profile = spec.get("profile")
    if profile == "constant":
        if "value" not in spec:
            raise ConfigError(f"initial.{name}: constant profile needs 'value'")
        v = float(spec["value"])
        return constant_profile(grid, v), v
    if profile == "parabola":
        return parabola_profile(grid, float(spec.get("amplitude", 1.0))), 0.0
    if profile == "supermale_parabola":
        if "s_max" not in spec:
            raise ConfigError(f"initial.{name}: supermale_parabola needs 's_max'")
        return supermale_parabola_profile(grid, float(spec["s_max"])), 0.0
    raise ConfigError(
        f"initial.{name}: unknown profile {profile!r}; expected constant, "
        "parabola, or supermale_parabola"
    )


def build_initial_fields(cfg: dict, model: ModelSpec, grid: SpatialGrid) -> np.ndarray:
    ic = cfg.get("initial", {})
    fields = []
    for name in model.species:
        values, bval = _profile_field(name, ic.get(name, 0.0), grid)
        if grid.bc is BoundaryCondition.DIRICHLET and bval != 0.0:
            raise ConfigError(
                f"initial.{name}: profile has nonzero boundary value {bval} "
                "but the grid is Dirichlet"
            )
        fields.append(values)
    return np.stack(fields)


# ---------------------------------------------------------------- output

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _out_path(cfg: dict, out_flag: Optional[str], default_prefix: str, suffix: str) -> Path:
    oc = cfg.get("output", {})
    out_dir = Path(out_flag or oc.get("dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = oc.get("prefix", default_prefix)
    return out_dir / f"{prefix}_{suffix}"


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def _intervals_str(intervals: Sequence[tuple[float, float]]) -> str:
    return ";".join(f"{_fmt(a)}:{_fmt(b)}" for a, b in intervals)


def _event_summary(log, region: Optional[Region], status: Status) -> list[str]:
    lines = [f"status={status.value}"]
    if region is not None:
        lines.append(f"region={region.value}")
    for name, ivals in log.negativity_intervals.items():
        lines.append(f"negativity_{name}={_intervals_str(ivals)}")
    if log.blowup is not None:
        b = log.blowup
        lines += [
            f"blowup_component={b.component}",
            f"blowup_sign={'+' if b.sign >= 0 else '-'}",
            f"blowup_t={_fmt(b.t_estimate)}",
            f"blowup_method={b.method}",
            f"blowup_t_fit={_fmt(b.t_fit) if b.t_fit is not None else 'none'}",
            f"blowup_cutoff={_fmt(b.cutoff)}",
        ]
    return lines


def _region_of(log, status: Status) -> Region:
    if log.blowup is not None:
        return Region.BLOWUP
    if log.has_negativity():
        return Region.NEGATIVE_NO_BLOWUP
    if status is Status.STEP_COLLAPSE:
        raise IndeterminateOutcome("step size collapsed without divergence")
    return Region.POSITIVE


# ---------------------------------------------------------------- commands

def cmd_simulate(cfg: dict, out_flag: Optional[str]) -> int:
    model = build_model(cfg)
    icfg = build_integrator(cfg)
    x0 = build_initial_state(cfg, model)
    traj, log = integrate(model, x0, icfg)

    csv_path = _out_path(cfg, out_flag, "simulate", "trajectory.csv")
    header = "t," + ",".join(traj.components)
    rows = [header]
    for t, row in zip(traj.times, traj.states):
        rows.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    _write_lines(csv_path, rows)

    try:
        region = _region_of(log, traj.status)
    except IndeterminateOutcome:
        region = None
    summary = _event_summary(log, region, traj.status)
    sum_path = _out_path(cfg, out_flag, "simulate", "summary.txt")
    _write_lines(sum_path, summary)
    print(f"wrote {csv_path} and {sum_path}")
    for line in summary:
        print(line)
    return 2 if region is None else 0


def cmd_classify(cfg: dict, out_flag: Optional[str]) -> int:
    model = build_model(cfg)
    icfg = build_integrator(cfg)
    x0 = build_initial_state(cfg, model)
    outcome = classify(model, x0, icfg)
    summary = _event_summary(outcome, outcome.region, outcome.status)
    sum_path = _out_path(cfg, out_flag, "classify", "summary.txt")
    _write_lines(sum_path, summary)
    for line in summary:
        print(line)
    return 0


def cmd_pde(cfg: dict, out_flag: Optional[str]) -> int:
    model = build_model(cfg)
    if not model.spatial:
        model = ModelSpec(model.kind, model.params, spatial=True)
    icfg = build_integrator(cfg)
    grid = build_grid(cfg)
    fields0 = build_initial_fields(cfg, model, grid)
    snap_times = [float(t) for t in cfg.get("output", {}).get("snapshot_times", [])]
    traj, log = integrate_pde(model, fields0, grid, icfg, snapshot_times=snap_times)

    names = model.species
    snap_path = _out_path(cfg, out_flag, "pde", "snapshots.csv")
    rows = ["t,x," + ",".join(names)]
    for t_snap, fields in traj.snapshots:
        bvals = boundary_values(fields, grid)
        rows.append(",".join([_fmt(t_snap), _fmt(0.0)] + [_fmt(v) for v in bvals[:, 0]]))
        for j, x in enumerate(grid.x):
            rows.append(",".join([_fmt(t_snap), _fmt(x)] + [_fmt(fields[i, j]) for i in range(len(names))]))
        rows.append(",".join([_fmt(t_snap), _fmt(1.0)] + [_fmt(v) for v in bvals[:, 1]]))
    _write_lines(snap_path, rows)

    norm_path = _out_path(cfg, out_flag, "pde", "norms.csv")
    header = ["t", "min_m"]
    header += [f"max_{n}" for n in names] + [f"l1_{n}" for n in names]
    rows = [",".join(header)]
    m_idx = names.index("m")
    for i, t in enumerate(traj.times):
        vals = [t, traj.species_min[i, m_idx]]
        vals += list(traj.max_norm[i]) + list(traj.l1_norm[i])
        rows.append(",".join(_fmt(v) for v in vals))
    _write_lines(norm_path, rows)

    try:
        region = _region_of(log, traj.status)
    except IndeterminateOutcome:
        region = None
    summary = _event_summary(log, region, traj.status)
    sum_path = _out_path(cfg, out_flag, "pde", "summary.txt")
    _write_lines(sum_path, summary)
    print(f"wrote {snap_path}, {norm_path}, {sum_path}")
    for line in summary:
        print(line)
    return 2 if region is None else 0


def _analysis_section(cfg: dict) -> dict:
    return cfg.get("analysis", {})


def cmd_threshold(cfg: dict, out_flag: Optional[str]) -> int:
    model = build_model(cfg)
    icfg = build_integrator(cfg) if cfg.get("integrator") else None
    ac = _analysis_section(cfg)
    axis = ac.get("axis", "s0")
    boundary = Boundary(ac.get("boundary", "R1/2"))
    f0m0 = float(ac.get("f0m0", 0.3))
    bracket = tuple(ac.get("bracket", (0.0, 2.0)))
    tol = float(ac.get("tol", 1e-4))
    s0 = float(ac.get("s0", 0.0))
    res = find_threshold(model, f0m0, axis, boundary, bracket, tol, icfg, s0)

    path = _out_path(cfg, out_flag, "threshold", "thresholds.csv")
    rows = ["f0m0,critical,boundary,status"]
    rows.append(f"{_fmt(f0m0)},{_fmt(res.value)},{boundary.value},ok")
    _write_lines(path, rows)
    print(f"wrote {path}")
    print(f"critical={_fmt(res.value)} below={res.below_outcome.value} "
          f"above={res.above_outcome.value}")
    return 0


def _curve_rows(curve) -> list[str]:
    rows = []
    for x, v, st in zip(curve.f0m0, curve.values, curve.status):
        val = _fmt(v) if v is not None else "nan"
        status = st if st in ("ok", "absent") else "failed"
        rows.append(f"{_fmt(x)},{val},{curve.boundary.value},{status}")
    return rows


def cmd_regionmap(cfg: dict, out_flag: Optional[str]) -> int:
    model = build_model(cfg)
    icfg = build_integrator(cfg) if cfg.get("integrator") else None
    ac = _analysis_section(cfg)
    rmap = region_map(
        model,
        f0m0_range=tuple(ac.get("f0m0_range", (0.1, 0.5))),
        axis=ac.get("axis", "s0"),
        resolution=int(ac.get("resolution", 9)),
        bracket_r12=tuple(ac.get("bracket_r12", (0.0, 2.0))),
        bracket_r23=tuple(ac.get("bracket_r23", (0.0, 10.0))),
        tol=float(ac.get("tol", 1e-4)),
        cfg=icfg,
        s0=float(ac.get("s0", 0.0)),
    )
    path = _out_path(cfg, out_flag, "regionmap", "thresholds.csv")
    rows = ["f0m0,critical,boundary,status"]
    rows += _curve_rows(rmap.r12)
    rows += _curve_rows(rmap.r23)
    _write_lines(path, rows)
    print(f"wrote {path}")
    if rmap.r23.absent:
        print("R2/3 absent: no blow-up within the search bracket")
    n_ok = sum(s == "ok" for s in rmap.r12.status + rmap.r23.status)
    n_failed = sum(s.startswith("failed") for s in rmap.r12.status + rmap.r23.status)
    print(f"points ok={n_ok} failed={n_failed}")
    return 0 if n_ok > 0 else 2


def cmd_compare(cfg: dict, out_flag: Optional[str]) -> int:
    base = build_model(cfg)
    icfg = build_integrator(cfg) if cfg.get("integrator") else None
    ac = _analysis_section(cfg)
    kinds = ac.get("models")
    if not kinds:
        raise ConfigError("compare needs analysis.models (a list of model kinds)")
    specs = []
    for k in kinds:
        try:
            kind = ModelKind(k)
        except ValueError:
            raise ConfigError(f"unknown model kind {k!r} in analysis.models") from None
        specs.append(ModelSpec(kind, base.params, spatial=False))
    comp = compare_thresholds(
        specs,
        axis=ac.get("axis", "s0"),
        f0m0_range=tuple(ac.get("f0m0_range", (0.1, 0.5))),
        resolution=int(ac.get("resolution", 9)),
        bracket_r12=tuple(ac.get("bracket_r12", (0.0, 2.0))),
        bracket_r23=tuple(ac.get("bracket_r23", (0.0, 10.0))),
        tol=float(ac.get("tol", 1e-4)),
        cfg=icfg,
        s0=float(ac.get("s0", 0.0)),
    )
    path = _out_path(cfg, out_flag, "compare", "compare.csv")
    rows = ["f0m0,model,boundary,critical,status"]
    for label, rmap in comp.maps.items():
        for curve in (rmap.r12, rmap.r23):
            for x, v, st in zip(curve.f0m0, curve.values, curve.status):
                val = _fmt(v) if v is not None else "nan"
                status = st if st in ("ok", "absent") else "failed"
                rows.append(f"{_fmt(x)},{label},{curve.boundary.value},{val},{status}")
    _write_lines(path, rows)
    print(f"wrote {path}")
    for label, rmap in comp.maps.items():
        kinks = rmap.r12.non_smooth_points()
        if kinks:
            pts = ";".join(_fmt(x) for x in kinks)
            print(f"non-smooth R1/2 curve: model={label} at f0m0={pts}")
    return 0


def cmd_stability(cfg: dict, out_flag: Optional[str]) -> int:
    model_cfg = cfg.get("model", {})
    pc = model_cfg.get("params", {})
    missing = [k for k in ("beta", "delta", "K") if k not in pc]
    if missing:
        raise ConfigError(f"stability needs dimensional parameters; missing {missing}")
    try:
        p = DimensionalParams(**pc)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad parameters: {e}") from e
    rep = stability_check(p)
    eig_str = ";".join(
        f"{_fmt(ev.real)}{'+' if ev.imag >= 0 else '-'}{_fmt(abs(ev.imag))}j"
        for ev in rep.eigenvalues
    )
    lines = [
        f"applicable={str(rep.applicable).lower()}",
        f"criterion_value={_fmt(rep.criterion_value)}",
        f"criterion_stable={str(rep.criterion_stable).lower()}",
        f"extinction_stable={str(rep.extinction_stable).lower()}",
        f"eigenvalues={eig_str}",
        f"eigen_stable={str(rep.eigen_stable).lower()}",
        f"agrees={str(rep.agrees).lower()}",
    ]
    path = _out_path(cfg, out_flag, "stability", "stability.txt")
    _write_lines(path, lines)
    for line in lines:
        print(line)
    return 0


# ---------------------------------------------------------------- driver

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tyclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "integrate an ODE model and write trajectory + events"),
        ("pde", "integrate a reaction-diffusion model and write snapshots + norms"),
        ("classify", "classify an initial condition into the three regions"),
        ("threshold", "bisect one critical value"),
        ("regionmap", "sweep both region boundaries over f0=m0"),
        ("stability", "evaluate the trojan-equilibrium stability criterion"),
        ("compare", "region-map several model variants on one grid"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--set", action="append", default=[], metavar="KEY.PATH=VALUE",
                       help="override a config key (repeatable, last wins)")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "pde": cmd_pde,
    "classify": cmd_classify,
    "threshold": cmd_threshold,
    "regionmap": cmd_regionmap,
    "stability": cmd_stability,
    "compare": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.set)
        return _COMMANDS[args.command](cfg, args.out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except BracketInvalid as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (IndeterminateOutcome, NonMonotoneScan) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
