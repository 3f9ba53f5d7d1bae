"""Command-line surface: simulations, layer tables, matching suite, portraits.

Subcommands write plot-ready CSV tables and JSON metadata under the output
directory.  A key=value config file supplies defaults; explicit flags win.
Exit codes: 0 success, 1 numeric failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .equilibria import T_STAR, frozen_energy, frozen_portrait, equilibrium_branches
from .errors import ReslabError
from .numkernel import ToleranceSpec


@dataclass
class RunConfig:
    eps: tuple = (1e-3,)
    C: float = 0.5
    seed_order: int = 2
    tol_rel: float = 1e-10
    tol_abs: float = 1e-12
    out: str = "reslab-out"
    phi0: float = 0.0
    phi1: float = 0.0
    T_period: float = 1.0
    portrait_T: float = T_STAR
    levels: tuple = ()
    K: int = 5
    full: bool = False

    def canonical(self) -> str:
        """Canonical key=value text (sorted keys, repr values)."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kwargs = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            ftypes = {f.name: f for f in fields(cls)}
            if key not in ftypes:
                raise ValueError(f"unknown config key {key!r}")
            default = getattr(cls(), key)
            if isinstance(default, tuple):
                kwargs[key] = tuple(float(x) for x in val.split(",") if x)
            elif isinstance(default, bool):
                kwargs[key] = val.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                kwargs[key] = int(val)
            elif isinstance(default, float):
                kwargs[key] = float(val)
            else:
                kwargs[key] = val
        return cls(**kwargs)

    def tolerances(self) -> ToleranceSpec:
        return ToleranceSpec(self.tol_rel, self.tol_abs)


def _parse_eps(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=float)
        fh.write("\n")


def _run_meta(cfg: RunConfig, extra=None) -> dict:
    meta = {"version": __version__, "numpy": np.__version__}
    import scipy
    meta["scipy"] = scipy.__version__
    meta["config"] = {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in asdict(cfg).items()}
    if extra:
        meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(cfg: RunConfig) -> int:
    from .simulator import simulate
    out = Path(cfg.out)
    for eps in cfg.eps:
        run = simulate(eps, C=cfg.C, seed_order=cfg.seed_order,
                       tol=cfg.tolerances())
        d = out / f"eps_{eps:g}"
        ts = run.trajectory.ts
        us = run.trajectory.ys[0]
        _write_csv(d / "trajectory.csv",
                   ["t (model time)", "re_u (amplitude)", "im_u (amplitude)"],
                   zip(ts, us.real, us.imag))
        _write_json(d / "spikes.json", {
            "eps": eps,
            "spikes": [{"t_peak": t, "amplitude": a} for t, a in run.spikes],
            "periods": run.periods,
        })
        _write_json(d / "run_meta.json",
                    _run_meta(cfg, {"eps": eps, "nfev": run.trajectory.meta["nfev"],
                                    "n_spikes": len(run.spikes)}))
        print(f"eps={eps:g}: {len(run.spikes)} spikes, "
              f"{len(run.periods)} measured periods -> {d}")
    return 0


def cmd_layers(cfg: RunConfig) -> int:
    from . import averaged as av
    from . import painleve as p1
    from . import wp_cascade as wc
    from .outer import outer_eval, outer_validity
    out = Path(cfg.out)
    eps = cfg.eps[0]

    traj = p1.pi_solve_special(tol=cfg.tolerances())
    fit = p1.pi_locate_pole(traj)
    _write_json(out / "polefit.json",
                {"tau0": fit.tau0, "a4": fit.a4, "fit_residual": fit.fit_residual,
                 "coefficients": {str(k): v for k, v in fit.coefficients.items()}})

    lo, _ = outer_validity(eps, safety=5.0)
    ts = np.linspace(lo, T_STAR + cfg.C, 400)
    vals = [outer_eval(t, eps, 2) for t in ts]
    _write_csv(out / "outer.csv",
               ["t (model time)", "re_u (amplitude)", "im_u (amplitude)"],
               [(t, v.real, v.imag) for t, v in zip(ts, vals)])

    taus = np.linspace(fit.tau0 + 0.5, 25.0, 400)
    l1 = [p1.layer1_eval(T_STAR + eps ** 0.8 * tau, eps, traj, fit) for tau in taus]
    _write_csv(out / "painleve_layer.csv",
               ["t (model time)", "re_u (amplitude)", "im_u (amplitude)"],
               [(T_STAR + eps ** 0.8 * tau, v.real, v.imag)
                for tau, v in zip(taus, l1)])

    sched = wc.spike_schedule(eps, fit, cfg.K, enforce_validity=False)
    _write_csv(out / "cascade.csv",
               ["k (burst index)", "g3 (invariant)", "Omega (period)",
                "lambda (forcing level)", "t_spike (model time)"],
               [(s.k, s.g3_k, s.Omega_k, s.lambda_k, s.t_spike) for s in sched])

    table = av.build_modulation_table(t_min=T_STAR - cfg.C,
                                      T_period=cfg.T_period)
    phi = av.phase_phi(table.t, cfg.phi0, cfg.phi1, table)
    _write_csv(out / "modulation.csv",
               ["t (model time)", "E (orbit energy)", "S (slow phase)",
                "phi (phase shift)", "sigma (action)", "K_abs (period integral)",
                "S_prime (phase speed)"],
               [(t, E, S, p, table.sigma, K, Sp) for t, E, S, p, K, Sp in
                zip(table.t, table.E, table.S, phi, table.K_abs, table.S_prime)])
    print(f"layer tables -> {out}")
    return 0


def cmd_match(cfg: RunConfig) -> int:
    from .acceptance import FAST_CRITERIA, AcceptanceContext, run_acceptance
    out = Path(cfg.out)
    ctx = AcceptanceContext(quick=not cfg.full)
    ids = None if cfg.full else sorted(FAST_CRITERIA)
    results = run_acceptance(ctx, ids=ids)
    _write_json(out / "acceptance.json", {
        "criteria": [{"id": r.cid, "title": r.title, "passed": r.passed,
                      "informational": r.informational, "lines": r.lines}
                     for r in results],
        "meta": _run_meta(cfg),
    })
    gating = [r for r in results if not r.informational]
    n_fail = sum(not r.passed for r in gating)
    print(f"{len(gating) - n_fail}/{len(gating)} gating criteria passed -> {out}")
    return 0 if n_fail == 0 else 1


def cmd_portrait(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    T = cfg.portrait_T
    levels = list(cfg.levels)
    if not levels:
        # default: the energy levels of the equilibria (separatrix included)
        levels = sorted({float(frozen_energy(b.value + 0j, T))
                         for b in equilibrium_branches(T)})
    curves = frozen_portrait(T, levels)
    rows = []
    for i, c in enumerate(curves):
        for p in c["points"]:
            rows.append((i, c["level"], p.real, p.imag))
    _write_csv(out / f"portrait_T{T:g}.csv",
               ["curve_id", "level (frozen energy)", "re_v (state)", "im_v (state)"],
               rows)
    print(f"{len(curves)} curves at T={T:g} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="reslab",
        description="Numerical laboratory for slow passage through nonlinear "
                    "resonance: direct runs, asymptotic layers, matching suite.")
    ap.add_argument("--config", type=Path, help="key=value config file")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, need_eps=False):
        p.add_argument("--eps", type=_parse_eps, required=need_eps,
                       help="small parameter (comma-separated list allowed)")
        p.add_argument("--C", type=float, help="window half-width")
        p.add_argument("--seed-order", type=int, dest="seed_order")
        p.add_argument("--tol-rel", type=float, dest="tol_rel")
        p.add_argument("--tol-abs", type=float, dest="tol_abs")
        p.add_argument("--out", type=str)
        p.add_argument("--phi0", type=float)
        p.add_argument("--phi1", type=float)
        p.add_argument("--T-period", type=float, dest="T_period")

    p_sim = sub.add_parser("simulate", help="direct run(s) of the amplitude equation")
    common(p_sim, need_eps=True)
    p_lay = sub.add_parser("layers", help="layer samples, cascade and modulation tables")
    common(p_lay, need_eps=True)
    p_lay.add_argument("--K", type=int, help="number of cascade intervals")
    p_mat = sub.add_parser("match", help="matching suite and acceptance summary")
    common(p_mat)
    p_mat.add_argument("--full", action="store_true",
                       help="run the slow criteria too (simulation sweep)")
    p_por = sub.add_parser("portrait", help="frozen-system phase-portrait data")
    common(p_por)
    p_por.add_argument("--portrait-T", type=float, dest="portrait_T",
                       help="frozen coefficient value")
    p_por.add_argument("--levels", type=_parse_eps,
                       help="energy levels (comma separated)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg = RunConfig()
    if args.config:
        cfg = RunConfig.from_text(Path(args.config).read_text())
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    handlers = {"simulate": cmd_simulate, "layers": cmd_layers,
                "match": cmd_match, "portrait": cmd_portrait}
    try:
        return handlers[args.command](cfg)
    except ReslabError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
