"""Command-line experiments: spectrum, mix, threshold, lr-check, partition.

Every command reads an optional JSON config (``--config``), lets a few flags
override it, writes CSV/JSON files into ``--out-dir`` stamped with the config
hash and seed, and exits with status 0 only if all of its checks pass.
"""

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import certificates as cert
from . import dynamics as dyn
from . import generator as gen
from . import partition as part
from . import spin_model as sm
from . import superop as so
from .filters import LAMBDA

PROFILES = {
    "strict": {"fixed_point": 1e-8, "kms": 1e-6, "lr_slack": 1e-10, "depolarizing": 1e-8,
               "generator_slack": 1e-10, "telescoping": 1e-10},
    "default": {"fixed_point": 1e-7, "kms": 1e-5, "lr_slack": 1e-9, "depolarizing": 1e-7,
                "generator_slack": 1e-9, "telescoping": 1e-9},
}

FAMILIES = {"ising": sm.ising_chain, "heisenberg": sm.heisenberg_chain}


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class Output:
    """Writes stamped files into one directory."""

    def __init__(self, out_dir, cfg):
        self.dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.hash = config_hash(cfg)
        self.seed = cfg.get("seed")
        self.files = []

    def csv(self, name, header, rows):
        path = os.path.join(self.dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(f"# config_hash={self.hash} seed={self.seed}\n")
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(path)

    def json(self, name, payload):
        path = os.path.join(self.dir, name)
        body = {"config_hash": self.hash, "seed": self.seed}
        body.update(payload)
        with open(path, "w") as fh:
            json.dump(_jsonable(body), fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.files.append(path)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    return x


def load_model_spec(spec, base_dir="."):
    """Model from a file path, an inline model dict, or ``{"family": ..., "n": ...}``."""
    if spec is None:
        raise ValueError("no model given (use --model or a 'model' config entry)")
    if isinstance(spec, str):
        path = spec if os.path.isabs(spec) else os.path.join(base_dir, spec)
        return sm.load_model(path)
    if "family" in spec:
        kw = {k: v for k, v in spec.items() if k not in ("family", "n")}
        return FAMILIES[spec["family"]](int(spec["n"]), **kw)
    return sm.model_from_dict(spec)


def certified_beta_star(H):
    if H.J == 0:
        return np.inf
    return cert.beta_star_search("local", D=H.lattice.dimension, J=H.J).beta_star


def _resolve_beta(cfg, H):
    if "beta" in cfg:
        return float(cfg["beta"])
    frac = float(cfg.get("beta_fraction", 0.5))
    return frac * certified_beta_star(H)


# ---------------------------------------------------------------- spectrum
def cmd_spectrum(cfg, out, tol):
    H = load_model_spec(cfg.get("model"))
    betas = cfg.get("betas", [0.0, 0.5, 1.0, 2.0])
    out.csv("eigenvalues.csv", ["index", "energy"], enumerate(H.eigenvalues))
    rows, diag, ok = [], [], True
    for b in betas:
        rho = sm.gibbs_state(H, b)
        tr_err = abs(np.trace(rho).real - 1)
        mn = float(np.linalg.eigvalsh(rho).min())
        comm = so.operator_norm(H.matrix @ rho - rho @ H.matrix)
        good = tr_err <= 1e-12 and mn >= -1e-12 and comm <= 1e-10
        ok &= good
        rows.append([b, sm.partition_value(H, b), sm.log_partition(H, b)])
        diag.append({"beta": b, "trace_error": tr_err, "min_eigenvalue": mn, "commutator_norm": comm, "ok": good})
    out.csv("partition.csv", ["beta", "Z", "log_Z"], rows)
    out.json("spectrum.json", {"n_sites": H.n, "locality": H.locality_stats, "norm": H.norm,
                               "gibbs_diagnostics": diag, "passed": ok})
    return ok


# ---------------------------------------------------------------- mix
def depolarizing_reference(rho, t, n):
    """Exact ``exp(t L)`` of the global depolarizing generator applied to ``rho``."""
    q = np.exp(-LAMBDA * t)
    for a in range(n):
        rho = q * rho + (1 - q) * so.replace_site_by_identity(rho, a, n)
    return rho


def fit_log_scaling(ns, ts):
    """Least squares ``t = a + b log n``; returns ``(a, b, max relative residual)``."""
    x = np.log(np.asarray(ns, dtype=float))
    t = np.asarray(ts, dtype=float)
    b, a = np.polyfit(x, t, 1)
    resid = np.max(np.abs(t - (a + b * x)) / t)
    return float(a), float(b), float(resid)


def _mix_one(H, beta, eps, times, seed, tol, kms_samples, haar):
    L = gen.full_generator(H, beta)
    sigma = sm.gibbs_state(H, beta)
    fp = dyn.fixed_point(L)
    fp_dist = so.trace_norm(fp - sigma)
    gap = dyn.spectral_gap(L)
    init = dyn.default_initial_set(H.n, seed, haar=haar)
    t_mix = dyn.mixing_time(L, eps, init, sigma=sigma, seed=seed)
    kms = dyn.kms_residual(L, sigma, samples=kms_samples, seed=seed) if beta > 0 else 0.0
    traj, depol_err = [], 0.0
    for k, rho in enumerate(init):
        res = dyn.evolve_state(L, rho, times, reference=sigma)
        for t, d, m, e in zip(res.times, res.trace_distances, res.min_eigenvalues, res.trace_errors):
            traj.append([k, t, d, m, e])
        if beta == 0:
            for t, s in zip(res.times, res.states):
                depol_err = max(depol_err, so.trace_norm(s - depolarizing_reference(rho, t, H.n)))
    checks = {
        "fixed_point": fp_dist <= tol["fixed_point"],
        "kms": kms <= tol["kms"],
        "depolarizing": depol_err <= tol["depolarizing"],
    }
    summary = {"n": H.n, "beta": beta, "J": H.J, "gap": gap, "mixing_time": t_mix, "eps": eps,
               "fixed_point_distance": fp_dist, "kms_residual": kms,
               "depolarizing_max_error": depol_err if beta == 0 else None, "checks": checks}
    return summary, traj


def cmd_mix(cfg, out, tol):
    eps = float(cfg.get("eps", 0.01))
    times = cfg.get("times", [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    seed = int(cfg.get("seed", 0))
    kms_samples = int(cfg.get("kms_samples", 50))
    haar = int(cfg.get("haar_states", 20))
    ok = True
    if "sweep" in cfg:
        sw = cfg["sweep"]
        rows, summaries = [], []
        for n in sw["sizes"]:
            H = load_model_spec({"family": sw.get("family", "ising"), "n": n})
            beta = _resolve_beta(sw, H)
            if beta > certified_beta_star(H):
                print(f"warning: beta = {beta} above certified beta*", file=sys.stderr)
            s, _ = _mix_one(H, beta, eps, [0.0], seed, tol, kms_samples, haar)
            ok &= all(s["checks"].values())
            summaries.append(s)
            rows.append([n, beta, s["mixing_time"], s["gap"]])
        out.csv("mixing_sweep.csv", ["n", "beta", "t_mix", "gap"], rows)
        a, b, resid = fit_log_scaling([r[0] for r in rows], [r[2] for r in rows])
        out.json("mixing_sweep.json", {"runs": summaries, "fit": {"a": a, "b": b, "max_relative_residual": resid},
                                       "passed": ok})
        return ok
    H = load_model_spec(cfg.get("model"))
    beta = _resolve_beta(cfg, H)
    if beta > certified_beta_star(H):
        print(f"warning: beta = {beta} above certified beta*", file=sys.stderr)
    s, traj = _mix_one(H, beta, eps, times, seed, tol, kms_samples, haar)
    ok = all(s["checks"].values())
    out.csv("trajectories.csv", ["initial_state", "t", "trace_distance", "min_eigenvalue", "trace_error"], traj)
    s["passed"] = ok
    out.json("mix.json", s)
    return ok


# ---------------------------------------------------------------- threshold
def cmd_threshold(cfg, out, tol):
    regime = cfg.get("regime", "local")
    D = int(cfg.get("D", 1))
    r0 = int(cfg.get("r0", 4))
    r0_range = range(int(cfg.get("r0_min", 1)), int(cfg.get("r0_max", 20)) + 1)
    ok = True
    rows = []
    if regime == "local":
        J = float(cfg.get("J", 1.0))
        beta_J = float(cfg.get("beta_J", 1 / 615**D))
        ledger = cert.kappa_local(D, J, beta_J / J, r0)
        star = cert.beta_star_search("local", D=D, J=J, r0_range=r0_range)
        sweep = cfg.get("beta_J_sweep", list(np.linspace(1e-5, 1 / 200, 25)))
        for x in sweep:
            l = cert.kappa_local(D, J, x / J, r0, zeta_radii=())
            rows.append([x / J, r0, l.kappa, l.margin])
        ok &= ledger.series_truncation_error < 1e-12 * ledger.kappa
    elif regime == "long-range":
        nu, g, K = float(cfg["nu"]), float(cfg.get("g", 1.0)), float(cfg.get("K", 1.0))
        beta = float(cfg.get("beta", 1e-3 / g))
        ledger = cert.kappa_long_range(D, nu, g, K, beta, r0, g0=cfg.get("g0"))
        if ledger.divergent:
            star = cert.BetaStarResult(0.0, None, -np.inf, np.inf, {})
        else:
            star = cert.beta_star_search("long-range", D=D, nu=nu, g=g, K=K, r0_range=r0_range)
            for x in cfg.get("beta_g_sweep", list(np.linspace(1e-5, 0.01, 25))):
                l = cert.kappa_long_range(D, nu, g, K, x / g, r0)
                rows.append([x / g, r0, l.kappa, l.margin])
            ok &= ledger.series_truncation_error < 1e-12 * ledger.kappa
    else:
        raise ValueError(f"unknown regime {regime!r}")
    kappas = [r[2] for r in rows]
    monotone = all(b >= a for a, b in zip(kappas, kappas[1:]))
    ok &= monotone
    out.json("ledger.json", {"ledger": ledger.to_dict(), "beta_star": star.to_dict(),
                             "kappa_monotone_in_beta": monotone, "passed": ok})
    out.csv("sweep.csv", ["beta", "r0", "kappa", "margin"], rows)
    return ok


# ---------------------------------------------------------------- lr-check
def cmd_lrcheck(cfg, out, tol):
    H = load_model_spec(cfg.get("model"))
    a = int(cfg.get("site", H.n // 2))
    alphas = cfg.get("alphas", [1, 2, 3])
    radii = cfg.get("radii", [1, 2, 3, 4])
    times = cfg.get("times", [0.0, 0.25, 0.5, 1.0])
    seed = int(cfg.get("seed", 0))
    samples = int(cfg.get("samples", 200))
    ok = True
    rows = []
    for alpha in alphas:
        for r in radii:
            for t in times:
                d, b = cert.lr_defect(H, a, alpha, r, t)
                good = d <= b + tol["lr_slack"]
                ok &= good
                rows.append([alpha, r, t, d, b, good])
    out.csv("lieb_robinson.csv", ["alpha", "r", "t", "defect", "bound", "pass"], rows)
    beta = float(cfg.get("beta", 1 / (200 * H.J) if H.J else 0.0))
    gen_rows = []
    if beta > 0:
        prev = gen.truncated_local_generator(H, a, 0, beta)
        for r in range(1, H.lattice.diameter + 2):
            cur = gen.truncated_local_generator(H, a, r, beta)
            lb = cert.generator_distance_lower_bound(cur.adjoint(), prev.adjoint(), samples=samples, seed=seed)
            three, simple = cert.zeta_bound(r, beta * H.J)
            good = lb <= three + tol["generator_slack"]
            ok &= good
            gen_rows.append([r, beta, lb, three, simple, good])
            prev = cur
        full = gen.local_generator(H, a, beta)
        eta = cert.generator_distance_lower_bound(full.adjoint(), gen.depolarizing_generator(H.n, a).adjoint(),
                                                  samples=samples, seed=seed)
        ok &= eta <= beta * H.J + tol["generator_slack"]
    else:
        eta = 0.0
    out.csv("truncation.csv", ["r", "beta", "lower_bound", "zeta_three_term", "zeta_simplified", "pass"], gen_rows)
    out.json("lr_check.json", {"site": a, "J": H.J, "beta": beta, "eta_lower_bound": eta, "eta_bound": beta * H.J,
                               "passed": ok})
    return ok


# ---------------------------------------------------------------- partition
def cmd_partition(cfg, out, tol):
    H = load_model_spec(cfg.get("model"))
    eps = float(cfg.get("epsilon", 0.1))
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    beta_max = float(cfg["beta_max"]) if "beta_max" in cfg else _resolve_beta(cfg, H)
    c = float(cfg.get("c", 0.25))
    block_error = float(cfg.get("block_error", 0.0))
    trials = int(cfg.get("trials", 200))
    seed = int(cfg.get("seed", 0))
    rep = part.success_probability_harness(H, beta_max, c, eps, block_error, trials, seed)
    sched = part.build_uniform_schedule(H, 0.0, beta_max, c)
    tele = float(np.prod(sched.step_ratios)) if sched.step_ratios else 1.0
    E0 = H.eigenvalues.min()
    z_tele = sm.partition_value(H, 0.0) * np.exp(-beta_max * E0) * tele
    z_exact = sm.partition_value(H, beta_max)
    tele_err = abs(z_tele - z_exact) / z_exact
    bmul = 2 if block_error > 0 else 1
    moments_ok = all(m <= bmul * rep.ratio_bound * (1 + 0.05) for m in rep.second_moment_ratios)
    ok = rep.passed and tele_err <= tol["telescoping"] and moments_ok
    summary = rep.summary()
    summary.update({"beta_max": beta_max, "c": c, "betas": list(sched.betas),
                    "samples_per_step": part.samples_per_step(sched, eps, block_error),
                    "telescoping_relative_error": tele_err, "second_moments_ok": moments_ok, "passed": ok})
    out.json("partition.json", summary)
    rep.to_csv(os.path.join(out.dir, "trials.csv"))
    with open(os.path.join(out.dir, "trials.csv")) as fh:
        body = fh.read()
    with open(os.path.join(out.dir, "trials.csv"), "w") as fh:
        fh.write(f"# config_hash={out.hash} seed={out.seed}\n" + body)
    return ok


COMMANDS = {"spectrum": cmd_spectrum, "mix": cmd_mix, "threshold": cmd_threshold,
            "lr-check": cmd_lrcheck, "partition": cmd_partition}


def build_parser():
    p = argparse.ArgumentParser(prog="qgibbs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--model", help="JSON model file (overrides config)")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--out-dir", default=None)
        s.add_argument("--tolerance-profile", choices=sorted(PROFILES), default="strict")
        s.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                       help="override a config entry, value parsed as JSON")
    return p


def resolve_config(args):
    cfg, base = {}, "."
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        base = os.path.dirname(os.path.abspath(args.config))
    for item in args.set:
        key, _, val = item.partition("=")
        try:
            cfg[key] = json.loads(val)
        except json.JSONDecodeError:
            cfg[key] = val
    if args.model:
        cfg["model"] = os.path.abspath(args.model)
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    cfg["command"] = args.command
    cfg["tolerance_profile"] = args.tolerance_profile
    if isinstance(cfg.get("model"), str) and not os.path.isabs(cfg["model"]):
        cfg["model"] = os.path.normpath(os.path.join(base, cfg["model"]))
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Output(args.out_dir or os.path.join("runs", args.command), cfg)
        ok = COMMANDS[args.command](cfg, out, PROFILES[args.tolerance_profile])
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(("PASS" if ok else "FAIL") + f" {args.command} -> {out.dir} (config {out.hash})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
