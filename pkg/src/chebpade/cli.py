"""Batch front-end: subcommands wrapping the pipeline 1:1, driven by JSON configs.

Config files are plain JSON; numeric fields may be written as decimal strings
to preserve precision.  Every run writes its artifacts plus a manifest listing
the config hash and a content hash per file.  All artifact files are
byte-reproducible for identical configs; the manifest additionally records
wall-clock time and is the one file that differs between reruns.

Exit codes: 0 pass, 1 assertion failure (verify) or internal error,
2 usage or scope error.
"""

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from . import chebseries as cs
from . import cpade
from . import equilibrium as eq
from . import harness, scompact
from .numio import canonical_json_bytes, dump_json


class UsageError(ValueError):
    pass


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")


def _num(x):
    return float(x) if isinstance(x, str) else x


def _parse_function(cfg):
    if "function" not in cfg:
        raise UsageError("config needs a 'function' entry")
    f = dict(cfg["function"])
    for key in ("c", "d", "a", "b_re", "b_im"):
        if key in f:
            f[key] = _num(f[key])
    try:
        return cs.spec_from_json(f)
    except (KeyError, ValueError, cs.InvalidFunctionError) as exc:
        raise UsageError(f"bad function spec: {exc}")


def _parse_n_list(cfg, key="n_list"):
    v = cfg.get(key)
    if v is None:
        return None
    if isinstance(v, dict):
        return list(range(int(v["start"]), int(v["stop"]) + 1, int(v.get("step", 1))))
    return [int(n) for n in v]


def _precision(cfg, args, default=256):
    return int(args.precision or cfg.get("precision_bits", default))


def _schemes(cfg):
    s = cfg.get("scheme", "frobenius")
    return [s] if isinstance(s, str) else list(s)


def _write(outdir, name, data_bytes, files):
    path = os.path.join(outdir, name)
    with open(path, "wb") as fh:
        fh.write(data_bytes)
    files[name] = hashlib.sha256(data_bytes).hexdigest()


def _write_csv_rows(outdir, name, rows, files):
    text = "\n".join(",".join(str(c) for c in row) for row in rows) + "\n"
    _write(outdir, name, text.encode(), files)


def _finish(outdir, command, cfg_bytes, files, t0):
    manifest = {
        "tool": "chebpade",
        "version": __version__,
        "command": command,
        "config_sha256": hashlib.sha256(cfg_bytes).hexdigest(),
        "wall_clock_s": round(time.time() - t0, 3),
        "files": files,
    }
    dump_json(manifest, os.path.join(outdir, "manifest.json"))


def cmd_coeffs(cfg, args, outdir, files):
    spec = _parse_function(cfg)
    degree = int(cfg.get("degree", 40))
    prec = _precision(cfg, args)
    series = cs.cheb_coeffs(spec, degree, prec)
    _write(outdir, "coeffs.json", canonical_json_bytes(cs.series_to_json(series)), files)


def _series_for(cfg, args, spec, need):
    prec = _precision(cfg, args)
    degree = int(cfg.get("degree", need))
    return cs.cheb_coeffs(spec, max(degree, need), prec)


def cmd_approx(cfg, args, outdir, files):
    spec = _parse_function(cfg)
    if "L" in cfg and "M" in cfg:
        pairs = [(int(cfg["L"]), int(cfg["M"]))]
    else:
        ns = _parse_n_list(cfg)
        if not ns:
            raise UsageError("approx needs either L/M or n_list")
        pairs = [(n - 1, n) for n in ns]
    need = max(L + 2 * M for L, M in pairs)
    series = _series_for(cfg, args, spec, need)
    for scheme in _schemes(cfg):
        for L, M in pairs:
            name = f"approx_{scheme}_{L}_{M}.json"
            if scheme == "frobenius":
                r = cpade.frobenius(series, L, M)
            elif scheme == "baker":
                r = cpade.baker(series, spec, L, M)
            else:
                raise UsageError(f"unknown scheme {scheme!r}")
            if isinstance(r, cpade.BakerNonexistence):
                payload = {
                    "scheme": "baker", "L": L, "M": M, "nonexistent": True,
                    "attempts": [[s, reason] for s, reason in r.attempts],
                }
            else:
                payload = cpade.approximant_to_json(r)
            _write(outdir, name, canonical_json_bytes(payload), files)


def _parse_compact(cfg):
    if "compact" not in cfg:
        raise UsageError("config needs a 'compact' entry")
    c = {k: _num(v) for k, v in cfg["compact"].items() if k != "kind"}
    c["kind"] = cfg["compact"]["kind"]
    try:
        return eq.compact_from_json(c)
    except (KeyError, ValueError, eq.AdmissibilityError) as exc:
        raise UsageError(f"bad compact: {exc}")


def cmd_equilibrium(cfg, args, outdir, files):
    K = _parse_compact(cfg)
    thetas = cfg.get("theta", 1.0)
    thetas = [thetas] if not isinstance(thetas, list) else thetas
    panels = int(cfg.get("panels", 256))
    for theta in thetas:
        res = eq.solve_equilibrium(K, _num(theta), n_panels=panels)
        tag = f"theta{_num(theta):g}"
        _write(outdir, f"equilibrium_{tag}.json",
               canonical_json_bytes(eq.equilibrium_to_json(res)), files)
        tmp = os.path.join(outdir, f"measure_{tag}.csv")
        eq.measure_to_csv(res.measure, tmp)
        files[f"measure_{tag}.csv"] = hashlib.sha256(open(tmp, "rb").read()).hexdigest()


def cmd_scompact(cfg, args, outdir, files):
    spec = _parse_function(cfg)
    thetas = cfg.get("theta", [1, 3])
    thetas = [thetas] if not isinstance(thetas, list) else thetas
    search = cfg.get("search", {})
    sc = scompact.SearchConfig(
        grid_points=int(search.get("grid_points", 33)),
        refine_tol=_num(search.get("refine_tol", 1e-6)),
        n_panels=int(search.get("panels", cfg.get("panels", 256))),
        jobs=args.jobs or 1,
    )
    for theta in thetas:
        rep = scompact.find_stationary_compact(spec, _num(theta), sc)
        tag = f"theta{_num(theta):g}"
        _write(outdir, f"scompact_{tag}.json",
               canonical_json_bytes(scompact.report_to_json(rep)), files)
        _write_csv_rows(outdir, f"scan_{tag}.csv", scompact.scan_to_csv_rows(rep), files)


def cmd_poles(cfg, args, outdir, files):
    spec = _parse_function(cfg)
    ns = _parse_n_list(cfg) or [int(cfg.get("n", 10))]
    need = max(3 * n - 1 for n in ns)
    series = _series_for(cfg, args, spec, need)
    for scheme in _schemes(cfg):
        payload = {}
        for n in ns:
            if scheme == "frobenius":
                r = cpade.frobenius(series, n - 1, n)
            else:
                r = cpade.baker(series, spec, n - 1, n)
            if isinstance(r, cpade.BakerNonexistence):
                payload[str(n)] = "nonexistent"
            else:
                payload[str(n)] = [[z.real, z.imag, m] for z, m in cpade.poles(r)]
        _write(outdir, f"poles_{scheme}.json", canonical_json_bytes(payload), files)


def cmd_verify(cfg, args, outdir, files):
    fn = cfg.get("function", {"kind": "markov_uniform", "c": 2, "d": 3})
    if fn.get("kind") != "markov_uniform":
        raise UsageError("verify runs the Markov reference pipeline; function must be markov_uniform")
    c, d = _num(fn["c"]), _num(fn["d"])
    n_max = int(cfg.get("n_max", 40))
    prec = _precision(cfg, args, default=512)
    panels = int(cfg.get("panels", 256))
    checks_cfg = cfg.get("checks", {})
    rate_tol = _num(checks_cfg.get("rate_tolerance", 0.05))
    ks_max = _num(checks_cfg.get("ks_max", 0.1))
    near_frac_min = _num(checks_cfg.get("near_pole_fraction", 0.9))
    exist_min = _num(checks_cfg.get("baker_existence_fraction", 0.6))
    suite = harness.markov_theoremA_suite(
        c, d, n_max, n_list=_parse_n_list(cfg), precision_bits=prec, n_panels=panels
    )
    checks = []

    def check(name, ok, detail):
        checks.append({"name": name, "pass": bool(ok), "detail": detail})
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    for scheme in ("frobenius", "baker"):
        rr = suite.rate_reports[scheme]
        devs = list(rr.summary.values())
        worst = max(devs) if devs else float("inf")
        check(
            f"rate_{scheme}",
            devs and worst <= rate_tol,
            f"max per-point |observed/predicted - 1| = {worst:.4f} at n = {rr.n_last}",
        )
        check(
            f"filter_{scheme}",
            suite.filter_fraction[scheme] <= 0.2,
            f"capacity filter removed {suite.filter_fraction[scheme]:.1%}",
        )
    rr = suite.rate_reports["baker"]
    frac_exist = 1 - len(rr.skipped_n) / len(rr.n_list)
    check("baker_existence", frac_exist >= exist_min, f"{frac_exist:.0%} of orders exist")
    pr = suite.pole_reports["frobenius"]
    ns = sorted(pr.distances)
    ds = [pr.distances[n] for n in ns]
    rho = harness.spearman(ns, ds)
    check("pole_distance_trend", rho < 0, f"Spearman(n, KS) = {rho:.3f}")
    check("pole_distance_final", ds[-1] <= ks_max, f"KS at n = {ns[-1]}: {ds[-1]:.4f}")
    npoles = len(pr.poles[ns[-1]])
    near = npoles - pr.spurious[ns[-1]]
    check(
        "pole_near_fraction",
        near / ns[-1] >= near_frac_min,
        f"{near}/{ns[-1]} poles within {pr.far_threshold} of [{c:g},{d:g}]",
    )
    for scheme in ("frobenius", "baker"):
        _write(outdir, f"rates_{scheme}.json",
               canonical_json_bytes(harness.rate_report_to_json(suite.rate_reports[scheme])), files)
        _write_csv_rows(outdir, f"rates_{scheme}.csv",
                        harness.rate_report_csv_rows(suite.rate_reports[scheme]), files)
        _write(outdir, f"poles_{scheme}.json",
               canonical_json_bytes(harness.pole_report_to_json(suite.pole_reports[scheme])), files)
    _write(outdir, "checks.json", canonical_json_bytes({"checks": checks}), files)
    return 0 if all(ch["pass"] for ch in checks) else 1


_COMMANDS = {
    "coeffs": cmd_coeffs,
    "approx": cmd_approx,
    "equilibrium": cmd_equilibrium,
    "scompact": cmd_scompact,
    "verify": cmd_verify,
    "poles": cmd_poles,
}

_SCOPE_ERRORS = (
    UsageError,
    scompact.UnsupportedFamilyError,
    cs.TruncationError,
    cs.InvalidFunctionError,
    eq.AdmissibilityError,
)


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="chebpade",
        description="Chebyshev-Pade approximants, equilibrium problems, stationary compacts",
    )
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--output", default=".", help="output directory (created if missing)")
    ap.add_argument("--jobs", type=int, default=os.cpu_count(), help="parallel workers")
    ap.add_argument("--precision", type=int, default=None, help="override precision_bits")
    args = ap.parse_args(argv)
    t0 = time.time()
    try:
        cfg = _load_config(args.config)
        os.makedirs(args.output, exist_ok=True)
        files = {}
        rc = _COMMANDS[args.command](cfg, args, args.output, files)
        cfg_bytes = canonical_json_bytes(cfg)
        _finish(args.output, args.command, cfg_bytes, files, t0)
        return int(rc or 0)
    except _SCOPE_ERRORS as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error [{args.command}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
