"""Command line entry point: ``sublattice <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import io as rio
from .experiment import (
    PRESETS,
    SN_EXACT,
    SN_UPPER,
    ExperimentConfig,
    cached_cbc,
    load_config,
    parse_weights,
    preset,
    rates_from_rows,
    read_csv,
    run_experiment,
)
from .freqsets import enumerate_set, residues
from .korobov import KorobovSpace
from .lattice import (
    Lattice,
    classical_radius,
    is_reconstructing,
    reconstructing_radius,
    s_n_kernel,
    s_n_upper_estimate,
    skorobov_bounds,
)
from .sampling import SubsamplePlan, draw
from .transforms import LatticeOperator, diagnostics


def _space_args(p):
    p.add_argument("--d", type=int, default=2, help="dimension")
    p.add_argument("--alpha", type=float, default=1, help="smoothness")
    p.add_argument("--weights", default="product:0.5",
                   help="weights, e.g. product:0.5, pod:factorial/pow:6")


def _space(args) -> KorobovSpace:
    return KorobovSpace(args.d, args.alpha, parse_weights(args.weights, args.d, args.alpha))


def _lattice(args, space) -> Lattice:
    if getattr(args, "lattice", None):
        return rio.load_lattice(_path(args.lattice))
    return cached_cbc(space, args.n, getattr(args, "cache_dir", None))


def _path(p):
    from pathlib import Path

    return Path(p)


def _emit(text: str, out):
    if out:
        _path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_cbc(args):
    space = _space(args)
    lat = _lattice(args, space)
    _emit(rio.dump_lattice(lat), args.out)


def cmd_sn(args):
    space = _space(args)
    lat = _lattice(args, space)
    if args.sn_mode == "upper":
        value = s_n_upper_estimate(space, lat.n)
    else:
        value = s_n_kernel(space, lat)
    b = skorobov_bounds(space, lat.n, args.lam)
    print(f"n {lat.n}")
    print("z " + " ".join(str(c) for c in lat.z))
    print(f"s_n {value:.17g}")
    print(f"lower {b.lower:.17g}")
    print(f"upper {b.upper:.17g}")
    print(f"lambda {b.lam:.17g}")


def cmd_freqset(args):
    space = _space(args)
    if args.M is not None:
        B = enumerate_set(space, args.M)
    else:
        lat = _lattice(args, space)
        s = s_n_kernel(space, lat)
        M = classical_radius(s) if args.classical else reconstructing_radius(s)
        B = residues(enumerate_set(space, M), lat)
        ok, witness = is_reconstructing(lat, B)
        print(f"# reconstructing {ok} {witness or ''}", file=sys.stderr)
    _emit(rio.dump_frequency_set(B), args.out)


def cmd_diag(args):
    space = _space(args)
    lat = _lattice(args, space)
    s = s_n_kernel(space, lat)
    B = enumerate_set(space, reconstructing_radius(s))
    plan = SubsamplePlan(args.mode, args.t, args.seed)
    J = draw(plan, lat.n, len(B))
    rep = diagnostics(LatticeOperator(lat, B, None if args.mode == "full" else J), space,
                      args.radius, s)
    for k, v in rep.__dict__.items():
        print(f"{k} {v:.17g}" if isinstance(v, float) else f"{k} {v}")


def cmd_run(args):
    over = dict(base_seed=args.seed, out=args.out, threads=args.threads,
                cache_dir=args.cache_dir, eval_delay_ms=args.eval_delay_ms)
    if args.sn_mode:
        over["sn_mode"] = SN_UPPER if args.sn_mode == "upper" else SN_EXACT
    over = {k: v for k, v in over.items() if v is not None}
    if args.config:
        cfg = load_config(args.config, **over)
    elif args.preset:
        cfg = preset(args.preset, full=args.full, **over)
    else:
        cfg = ExperimentConfig(**over)

    def show(row):
        print(f"{row.method:12s} n={row.n:<9d} |J|={row.J_size:<7d} "
              f"err={row.l2_error:.3e} it={row.iterations if row.iterations is not None else '-'}"
              + (f" ERROR {row.error}" if row.error else ""), file=sys.stderr)

    rows = run_experiment(cfg, sink=show)
    for key, rate in sorted(rates_from_rows(rows).items()):
        print(f"rate {key} {rate:.4f}")


def cmd_rate(args):
    rows = read_csv(args.csv)
    for key, rate in sorted(rates_from_rows(rows, args.last).items()):
        print(f"{key} {rate:.4f}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sublattice", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cbc", help="construct a lattice generating vector")
    _space_args(c)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--out")
    c.add_argument("--cache-dir")
    c.set_defaults(func=cmd_cbc)

    s = sub.add_parser("sn", help="print S_n and its bounds")
    _space_args(s)
    s.add_argument("--n", type=int)
    s.add_argument("--lattice", help="lattice file instead of a CBC construction")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--sn-mode", choices=["exact", "upper"], default="exact")
    s.add_argument("--cache-dir")
    s.set_defaults(func=cmd_sn)

    f = sub.add_parser("freqset", help="enumerate a frequency index set")
    _space_args(f)
    f.add_argument("--M", type=float, help="radius; default 1/(2 sqrt(S_n)) of the lattice")
    f.add_argument("--n", type=int)
    f.add_argument("--lattice")
    f.add_argument("--classical", action="store_true", help="use 1/sqrt(S_n) instead")
    f.add_argument("--out")
    f.add_argument("--cache-dir")
    f.set_defaults(func=cmd_freqset)

    g = sub.add_parser("diag", help="spectral diagnostics of one instance")
    _space_args(g)
    g.add_argument("--n", type=int)
    g.add_argument("--lattice")
    g.add_argument("--mode", choices=["full", "theory", "practice", "practice-sqrt"],
                   default="theory")
    g.add_argument("--t", type=float, default=4.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--radius", type=int, default=64, help="truncation radius for Phi")
    g.add_argument("--cache-dir")
    g.set_defaults(func=cmd_diag)

    r = sub.add_parser("run", help="run a convergence experiment")
    r.add_argument("--config")
    r.add_argument("--preset", choices=sorted(PRESETS))
    r.add_argument("--full", action="store_true", help="use the long n ladder of the preset")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--threads", type=int)
    r.add_argument("--sn-mode", choices=["exact", "upper"])
    r.add_argument("--eval-delay-ms", type=float,
                   help="modeled cost per function evaluation, reported only")
    r.add_argument("--cache-dir")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("rate", help="fit decay rates from a result CSV")
    t.add_argument("csv")
    t.add_argument("--last", type=int, default=10)
    t.set_defaults(func=cmd_rate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command in ("sn", "freqset", "diag") and not (
            getattr(args, "lattice", None) or getattr(args, "n", None) or getattr(args, "M", None)):
        print("error: give --n or --lattice", file=sys.stderr)
        return 2
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
