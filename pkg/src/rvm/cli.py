"""Command-line surface: configuration parsing, runs, scale ladders,
averaging verification, and post-hoc checks.

Configs are flat ``key = value`` files (dotted keys for grouping, ``#``
comments).  Parsing is strict: unknown keys and malformed values are
rejected by name, every run writes the fully resolved configuration next to
its outputs, and re-parsing that echo reproduces the resolved state
byte for byte.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import diagnostics as diag
from . import regularized as reg
from .averaging import (ForcedRecipe, FreeStreamingRecipe, MomentumBump,
                        RandomTripleRecipe, make_triple_from_run, verify_lemma)
from .phase_space import PhaseGrid
from .snapshot import write_distribution, write_xfield


class ConfigError(ValueError):
    pass


def _parse_bool(raw, key):
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise ConfigError("key '%s': expected a boolean, got %r" % (key, raw))


def _parse_int_triple(raw, key):
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise ConfigError("key '%s': expected three comma-separated integers" % key)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError("key '%s': expected integers, got %r" % (key, raw))


def _parse_float_triple(raw, key):
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise ConfigError("key '%s': expected three comma-separated reals" % key)
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError("key '%s': expected reals, got %r" % (key, raw))


def _parse_int_list(raw, key):
    try:
        return tuple(int(p) for p in raw.split(",") if p.strip())
    except ValueError:
        raise ConfigError("key '%s': expected a comma-separated integer list" % key)


def _fmt_float(v):
    return repr(float(v))


def _fmt_triple(v):
    return ",".join(repr(float(x)) if isinstance(x, float) else str(int(x))
                    for x in v)


# key -> (parser, formatter, default or None for preset-dependent)
_SCHEMA = {
    "preset": (str, str, "maxwellian-bump"),
    "amplitude": (float, _fmt_float, None),
    "alpha": (float, _fmt_float, None),
    "beta": (float, _fmt_float, None),
    "drift": (float, _fmt_float, None),
    "k_mode": (int, str, 1),
    "grid.nx": (_parse_int_triple, _fmt_triple, (64, 1, 1)),
    "grid.lx": (_parse_float_triple, _fmt_triple,
                (2 * math.pi, 2 * math.pi, 2 * math.pi)),
    "grid.np": (_parse_int_triple, _fmt_triple, None),
    "grid.pmax": (float, _fmt_float, None),
    "mollifier.n": (int, str, 4),
    "dt": (float, _fmt_float, 0.02),
    "t_final": (float, _fmt_float, 1.0),
    "save_every": (int, str, 5),
    "save_snapshots": (_parse_bool, lambda b: "true" if b else "false", True),
    "seed": (int, str, 0),
    "output_dir": (str, str, "out"),
    "sequence.n_list": (_parse_int_list, lambda v: ",".join(str(i) for i in v),
                        (2, 4, 8, 16)),
    "averaging.random_triples": (int, str, 20),
    "averaging.nt": (int, str, 65),
    "averaging.window": (float, _fmt_float, 4.0),
    "averaging.psi_radius": (float, _fmt_float, 0.0),
    "averaging.refine": (int, str, 2),
}

# RunConfig fields that fall back to the preset's canonical parameters
_PRESET_KEYS = {"amplitude": "amplitude", "alpha": "alpha", "beta": "beta",
                "drift": "drift", "grid.np": "np_", "grid.pmax": "pmax"}

_FALLBACK = {"amplitude": 250.0, "alpha": 0.1, "beta": 10.0,
             "drift": 32.0 / 65.0, "grid.np": (65, 65, 1), "grid.pmax": 4.0}


def _read_pairs(path):
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError("%s:%d: expected 'key = value'" % (path, lineno))
            key, raw = body.split("=", 1)
            pairs.append((key.strip(), raw.strip()))
    return pairs


def parse_config(path=None, overrides=()):
    """Parse a config file plus key=value overrides into a resolved dict.

    Resolution order: schema defaults, then the preset's canonical
    parameters, then file keys, then overrides.  Unknown keys, bad types,
    and constraint violations raise ConfigError naming the key.
    """
    pairs = list(_read_pairs(path)) if path else []
    for item in overrides:
        if "=" not in item:
            raise ConfigError("override %r is not of the form key=value" % item)
        key, raw = item.split("=", 1)
        pairs.append((key.strip(), raw.strip()))

    explicit = {}
    for key, raw in pairs:
        if key not in _SCHEMA:
            raise ConfigError("unknown key '%s'" % key)
        parser = _SCHEMA[key][0]
        try:
            explicit[key] = parser(raw, key) if parser in (
                _parse_bool, _parse_int_triple, _parse_float_triple,
                _parse_int_list) else parser(raw)
        except ConfigError:
            raise
        except (TypeError, ValueError):
            raise ConfigError("key '%s': cannot parse %r" % (key, raw))

    resolved = {}
    preset = explicit.get("preset", _SCHEMA["preset"][2])
    if preset not in reg.PRESETS:
        raise ConfigError("key 'preset': unknown preset %r (choose from %s)"
                          % (preset, ", ".join(reg.PRESETS)))
    preset_defaults = reg.PRESET_DEFAULTS[preset]
    for key, (_, _, default) in _SCHEMA.items():
        if key in explicit:
            resolved[key] = explicit[key]
        elif key in _PRESET_KEYS and _PRESET_KEYS[key] in preset_defaults:
            resolved[key] = preset_defaults[_PRESET_KEYS[key]]
        elif default is not None:
            resolved[key] = default
        else:
            resolved[key] = _FALLBACK[key]

    _validate(resolved)
    return resolved


def _validate(resolved):
    def bad(key, why):
        raise ConfigError("key '%s': %s" % (key, why))

    if resolved["dt"] <= 0:
        bad("dt", "must be positive (negative t_final runs backward)")
    if resolved["save_every"] < 1:
        bad("save_every", "must be >= 1")
    if resolved["mollifier.n"] < 1:
        bad("mollifier.n", "must be >= 1")
    if any(n < 1 for n in resolved["grid.nx"] + resolved["grid.np"]):
        bad("grid.nx" if any(n < 1 for n in resolved["grid.nx"]) else "grid.np",
            "cell counts must be >= 1")
    if any(l <= 0 for l in resolved["grid.lx"]):
        bad("grid.lx", "lengths must be positive")
    if resolved["grid.pmax"] <= 0:
        bad("grid.pmax", "must be positive")
    if not 0 <= resolved["alpha"] < 1:
        bad("alpha", "must lie in [0, 1)")
    if resolved["amplitude"] < 0:
        bad("amplitude", "must be nonnegative")
    if resolved["beta"] <= 0:
        bad("beta", "must be positive")
    if resolved["averaging.random_triples"] < 0:
        bad("averaging.random_triples", "must be >= 0")
    if resolved["averaging.nt"] < 8:
        bad("averaging.nt", "needs at least 8 time samples")
    if resolved["averaging.window"] <= 0:
        bad("averaging.window", "must be positive")
    if resolved["averaging.refine"] < 1:
        bad("averaging.refine", "must be >= 1")
    if list(resolved["sequence.n_list"]) != sorted(set(resolved["sequence.n_list"])):
        bad("sequence.n_list", "must be strictly increasing")


def format_config(resolved):
    """Canonical echo of a resolved config; reparses to the same dict."""
    lines = []
    for key in sorted(resolved):
        lines.append("%s = %s" % (key, _SCHEMA[key][1](resolved[key])))
    return "\n".join(lines) + "\n"


def to_run_config(resolved):
    return reg.RunConfig(
        nx=resolved["grid.nx"], lx=resolved["grid.lx"],
        np_=resolved["grid.np"], pmax=resolved["grid.pmax"],
        n=resolved["mollifier.n"], dt=resolved["dt"],
        t_final=resolved["t_final"], save_every=resolved["save_every"],
        preset=resolved["preset"], amplitude=resolved["amplitude"],
        alpha=resolved["alpha"], beta=resolved["beta"],
        k_mode=resolved["k_mode"], drift=resolved["drift"],
        seed=resolved["seed"], output_dir=resolved["output_dir"],
        save_snapshots=resolved["save_snapshots"])


def _write_summary(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line.format() + "\n")


def _echo_config(outdir, resolved):
    with open(os.path.join(outdir, "resolved.cfg"), "w", encoding="utf-8") as fh:
        fh.write(format_config(resolved))


def cmd_run(resolved, outdir):
    config = to_run_config(resolved)
    csv_path = os.path.join(outdir, "diagnostics.csv")
    csv_file = open(csv_path, "w", encoding="utf-8", newline="\n")
    csv_file.write(",".join(reg.DIAGNOSTIC_COLUMNS) + "\n")

    def writer(snap, row):
        csv_file.write(",".join("%d" % v if isinstance(v, int) else "%.17g" % v
                                for v in row) + "\n")
        csv_file.flush()
        if config.save_snapshots:
            tag = "%06d" % snap.step
            write_distribution(os.path.join(outdir, "f_%s.rvmf" % tag), snap.f)
            grid = snap.f.grid
            write_xfield(os.path.join(outdir, "E_tilde_%s.rvmf" % tag),
                         snap.fields.E_tilde, grid, snap.time)
            write_xfield(os.path.join(outdir, "B_tilde_%s.rvmf" % tag),
                         snap.fields.B_tilde, grid, snap.time)
            write_xfield(os.path.join(outdir, "E_%s.rvmf" % tag),
                         snap.fields.E, grid, snap.time)
            write_xfield(os.path.join(outdir, "B_%s.rvmf" % tag),
                         snap.fields.B, grid, snap.time)

    try:
        result = reg.run(config, writer=writer)
    except Exception as exc:
        csv_file.close()
        with open(os.path.join(outdir, "summary.txt"), "w") as fh:
            fh.write("%-24s %14s %14s FAIL\n" % ("run_aborted", type(exc).__name__, ""))
        print("run aborted: %s" % exc, file=sys.stderr)
        return 1
    csv_file.close()
    lines = diag.run_checks(result)
    _write_summary(os.path.join(outdir, "summary.txt"), lines)
    for line in lines:
        print(line.format())
    return 0 if all(l.ok for l in lines) else 1


def cmd_sequence(resolved, outdir):
    config = to_run_config(resolved)
    report = reg.run_sequence(config, resolved["sequence.n_list"])
    rows = ["n,snapshot,time," + ",".join(reg.PROP_QUANTITIES)]
    for n in report.n_list:
        res = report.results[n]
        for k, t in enumerate(res.times):
            vals = [report.quantities[n][q][k] for q in reg.PROP_QUANTITIES]
            rows.append(("%d,%d,%.17g," % (n, k, t))
                        + ",".join("%.17g" % v for v in vals))
    with open(os.path.join(outdir, "sequence.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")
    lines = [
        diag.CheckLine("uniform_bounds", 1.0 if report.uniform else 0.0, 0.5,
                       report.uniform),
        diag.CheckLine("distances_decreasing",
                       1.0 if report.distances_decreasing else 0.0, 0.5,
                       report.distances_decreasing),
    ]
    _write_summary(os.path.join(outdir, "summary.txt"), lines)
    for line in lines:
        print(line.format())
    print("field distances between successive scales:",
          " ".join("%.6e" % d for d in report.field_distances))
    return 0 if all(l.ok for l in lines) else 1


def _averaging_grid(resolved, level):
    s = 2 ** level
    nx = tuple(n * s if n > 1 else 1 for n in (16, 1, 1))
    npc = tuple(17 * s - (s - 1) if n > 1 else 1 for n in (17, 17, 1))
    # odd counts at every level keep the momentum grid centered
    return PhaseGrid(nx, resolved["grid.lx"], npc, resolved["grid.pmax"])


def cmd_verify_averaging(resolved, outdir):
    seed = resolved["seed"]
    window = resolved["averaging.window"]
    psi_radius = resolved["averaging.psi_radius"] or 0.55 * resolved["grid.pmax"]
    psi = MomentumBump(radius=psi_radius)
    levels = range(resolved["averaging.refine"])
    all_rows = []
    max_ratio = {}
    worst_split = 0.0
    worst_i1 = 0.0
    majorant_ok = True
    for level in levels:
        grid = _averaging_grid(resolved, level)
        nt = resolved["averaging.nt"] * 2 ** level
        if nt % 2 == 0:
            nt += 1
        triples = []
        ids = []
        for k in range(resolved["averaging.random_triples"]):
            triples.append(RandomTripleRecipe(seed=seed + k).sample(nt, window, grid))
            ids.append("random%02d" % k)
        triples.append(FreeStreamingRecipe().sample(nt, window, grid))
        ids.append("freestream")
        triples.append(ForcedRecipe().sample(nt, window, grid))
        ids.append("forced")
        run_cfg = reg.preset_config(
            "maxwellian-bump",
            nx=grid.spatial_cells, lx=grid.spatial_lengths,
            np_=grid.momentum_cells, pmax=grid.momentum_halfwidth,
            dt=window / nt, t_final=window, save_every=1,
            n=resolved["mollifier.n"], amplitude=2000.0, beta=14.0)
        triples.append(make_triple_from_run(reg.run(run_cfg)))
        ids.append("run-derived")
        ver = verify_lemma(triples, psi, level=level, ids=ids)
        all_rows.extend(ver.rows)
        max_ratio[level] = ver.max_ratio
        worst_split = max(worst_split, ver.max_split_defect)
        worst_i1 = max(worst_i1, ver.max_i1_violation)
        majorant_ok = majorant_ok and all(
            row["h14"] <= row["majorant"] * (1 + 1e-12) for row in ver.rows)

    header = ("triple_id,grid_level,h_norm,g0_norm,g1_norm,h14,ratio,"
              "a1,a2,a3,a4,a5,i1_violation")
    with open(os.path.join(outdir, "averaging.csv"), "w") as fh:
        fh.write(header + "\n")
        for row in all_rows:
            fh.write(",".join([row["id"], "%d" % row["level"]]
                              + ["%.17g" % row[k] for k in
                                 ("h_norm", "g0_norm", "g1_norm", "h14",
                                  "ratio", "a1", "a2", "a3", "a4", "a5",
                                  "i1_violation")]) + "\n")
    ratios = [max_ratio[l] for l in levels]
    stable = all(b <= 2.0 * a and a <= 2.0 * b
                 for a, b in zip(ratios, ratios[1:])) if len(ratios) > 1 else True
    lines = [
        diag.CheckLine("split_identity", worst_split, 1e-12, worst_split <= 1e-12),
        diag.CheckLine("i1_support", worst_i1, 0.0, worst_i1 <= 0.0),
        diag.CheckLine("h14_le_majorant", 0.0 if majorant_ok else 1.0, 0.5,
                       majorant_ok),
        diag.CheckLine("ratio_stability", max(ratios) / max(min(ratios), 1e-300),
                       2.0, stable),
    ]
    _write_summary(os.path.join(outdir, "summary.txt"), lines)
    for line in lines:
        print(line.format())
    return 0 if all(l.ok for l in lines) else 1


def cmd_check(outdir):
    csv_path = os.path.join(outdir, "diagnostics.csv")
    if not os.path.exists(csv_path):
        print("no diagnostics.csv in %s" % outdir, file=sys.stderr)
        return 1
    with open(csv_path) as fh:
        header = fh.readline().strip().split(",")
        data = [list(map(float, line.split(","))) for line in fh if line.strip()]
    if header != list(reg.DIAGNOSTIC_COLUMNS) or not data:
        print("diagnostics.csv has an unexpected schema", file=sys.stderr)
        return 1
    cols = {name: np.array([row[i] for row in data])
            for i, name in enumerate(header)}
    charge = cols["charge"]
    scale = abs(charge[0]) or 1.0
    drift = float(np.max(np.abs(charge - charge[0]))) / scale
    linf = cols["linf"]
    mono = bool(np.all(linf[1:] <= linf[:-1]))
    dom = float(np.min(cols["mod_energy"] - cols["phys_energy"]))
    dom_scale = max(float(np.max(np.abs(cols["mod_energy"]))), 1e-300)
    lines = [
        diag.CheckLine("charge_drift", drift, 1e-10, drift <= 1e-10),
        diag.CheckLine("clip_tally", float(cols["clip_tally"][-1]) / scale,
                       1e-10, cols["clip_tally"][-1] <= 1e-10 * scale),
        diag.CheckLine("linf_monotone", 0.0 if mono else 1.0, 0.5, mono),
        diag.CheckLine("divb_residual", float(np.max(cols["divb_res"])), 1e-12,
                       float(np.max(cols["divb_res"])) <= 1e-12),
        diag.CheckLine("energy_domination", dom / dom_scale, -1e-12,
                       dom >= -1e-12 * dom_scale),
        diag.CheckLine("support_margin", float(np.min(cols["support_margin"])),
                       0.0, float(np.min(cols["support_margin"])) >= 0.0),
    ]
    _write_summary(os.path.join(outdir, "summary.txt"), lines)
    failed = [l for l in lines if not l.ok]
    for line in lines:
        print(line.format())
    if failed:
        print("FAILED: %s" % ", ".join(l.name for l in failed), file=sys.stderr)
        return 1
    return 0


def cmd_presets():
    for name in reg.PRESETS:
        print(name)
        for key, val in sorted(reg.PRESET_DEFAULTS[name].items()):
            print("    %s = %s" % (key, val))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rvm",
        description="Regularized relativistic Vlasov-Maxwell desk-scale "
                    "solver and verification harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sequence", "verify-averaging", "check"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="config file path")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
    sub.add_parser("presets")

    args = parser.parse_args(argv)
    if args.command == "presets":
        return cmd_presets()

    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append("seed=%d" % args.seed)
    if args.out is not None:
        overrides.append("output_dir=%s" % args.out)
    try:
        resolved = parse_config(args.config, overrides)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    outdir = resolved["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    if args.command == "check":
        return cmd_check(outdir)
    _echo_config(outdir, resolved)
    if args.command == "run":
        return cmd_run(resolved, outdir)
    if args.command == "sequence":
        return cmd_sequence(resolved, outdir)
    return cmd_verify_averaging(resolved, outdir)


if __name__ == "__main__":
    sys.exit(main())
