"""Command-line front end: ``pacwb profile | enumerate | simulate | analyze``."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, TextIO

from . import __version__
from .analysis import (
    CosetQuery,
    classify_case,
    coset_weight,
    enumerate_bruteforce,
    enumerate_list,
    lemma1_check,
    spectrum_row,
    union_bound_fer,
    write_spectrum_csv,
)
from .construction import (
    DEFAULT_DESIGN_SNR_DB,
    CodeSpec,
    ProfileMethod,
    build_profile,
    corollary2_holds,
    explicit_profile,
    segments,
)
from .gf2 import kron_row
from .precoder import DualRegister, Precoder, SinglePoly, auto_subset, parse_poly, protection_profile
from .sim import SimConfig, manifest_line, run_fer, write_fer_csv


class UsageError(Exception):
    """Bad argument value discovered after parsing (exit code 2)."""


def _checked(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"SNR grid {text!r} must be start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("SNR step must be positive")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + k * step, 10) for k in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _set_str(values) -> str:
    return "{" + ",".join(str(v) for v in sorted(values)) + "}"


def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-n", type=int, help="log2 of the block length")
    p.add_argument("-k", "-K", dest="k", type=int, help="number of information bits")
    p.add_argument("--method", default="rm-polar", choices=[m.value for m in ProfileMethod])
    p.add_argument("--design-snr", type=float, default=None, help="design Eb/N0 in dB for reliability ranking")
    p.add_argument("--info-set", help="explicit comma-separated information set A")
    p.add_argument("--config", type=Path, help="code spec file (n=, K=, method=, design_snr_db=, A=)")


def _add_poly_args(p: argparse.ArgumentParser, default: str | None = "1,0,1,1,0,1,1") -> None:
    p.add_argument("--poly", default=default, help="convolution taps, e.g. 1,0,1,1,0,1,1 (1 = polar)")
    p.add_argument("--dual", action="store_true", help="use the dual shift-register precoder")
    p.add_argument("--poly-a", help="main register taps of the dual scheme")
    p.add_argument("--poly-b", help="secondary register taps of the dual scheme (first tap 0)")
    p.add_argument("--subset", default="auto", help="auto or comma-separated indices feeding the secondary register")


def _add_out_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="write CSV here instead of standard output")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def resolve_code(args) -> CodeSpec:
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        return CodeSpec.from_config(text)
    if args.n is None:
        raise UsageError("-n is required (or --config)")
    snr = DEFAULT_DESIGN_SNR_DB if args.design_snr is None else args.design_snr
    if args.info_set or args.method == ProfileMethod.EXPLICIT.value:
        if not args.info_set:
            raise UsageError("--method explicit needs --info-set")
        return explicit_profile(args.n, [int(t) for t in args.info_set.split(",")], snr)
    k = (1 << args.n) if args.k is None else args.k
    return build_profile(args.n, k, args.method, snr)


def resolve_precoder(args, code: CodeSpec) -> Precoder | None:
    if args.dual:
        if not (args.poly_a and args.poly_b):
            raise UsageError("--dual needs --poly-a and --poly-b")
        if args.subset == "auto":
            S = auto_subset(code)
        else:
            S = frozenset(int(t) for t in args.subset.split(",") if t.strip())
        return DualRegister(parse_poly(args.poly_a), parse_poly(args.poly_b), S)
    if args.poly is None:
        return None
    return SinglePoly(parse_poly(args.poly))


def _manifest(argv: list[str], seed: int | None) -> dict:
    canonical = " ".join(argv)
    return {
        "command": canonical,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest()[:16],
        "version": __version__,
        "seed": seed,
    }


def _manifest_header(man: dict) -> str:
    return f"pacwb {man['version']} cmd=[{man['command']}] hash={man['config_hash']} seed={man['seed']}"


@contextmanager
def _output(path: Path | None, man: dict) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh
    sidecar = path.with_name(path.name + ".manifest.json")
    sidecar.write_text(json.dumps({**man, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")}, indent=2) + "\n")


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def cmd_profile(args, argv) -> int:
    code = _checked(resolve_code, args)
    sets = code.index_sets
    out = sys.stdout
    print(f"code=({code.N},{code.K},{sets.d_min}) method={code.method.value} design_snr_db={code.design_snr_db}", file=out)
    print(f"A={_set_str(code.A)}", file=out)
    print(f"M={_set_str(sets.M)}", file=out)
    print(f"N={_set_str(sets.Ncrit)}", file=out)
    print(f"d_min={sets.d_min}", file=out)
    print(f"corollary2={'true' if corollary2_holds(code) else 'false'}", file=out)
    pre = _checked(resolve_precoder, args, code)
    m = args.memory
    if m is None and pre is not None:
        m = pre.memory
    if m is not None and m <= code.n:
        segs = segments(code, m)
        print("segments=" + ",".join(f"[{r.start},{r.stop})" for r in segs), file=out)
    if pre is not None:
        prof = protection_profile(pre, code)
        print(f"poly={pre.describe()} unprotected={_set_str(prof.unprotected)}", file=out)
    if args.out is not None:
        args.out.write_text(code.to_config())
    return 0


def cmd_enumerate(args, argv) -> int:
    code = _checked(resolve_code, args)
    pre = _checked(resolve_precoder, args, code) or SinglePoly((1,))
    if args.exact:
        est = _checked(enumerate_bruteforce, code, pre, threads=max(1, args.threads))
    else:
        if args.L is None:
            raise UsageError("give -L or --exact")
        est = _checked(enumerate_list, code, pre, args.L, probe=args.probe)
    man = _manifest(argv, None)
    with _output(args.out, man) as fh:
        write_spectrum_csv([spectrum_row(code, pre, est)], fh, _manifest_header(man))
    return 0


def cmd_simulate(args, argv) -> int:
    code = _checked(resolve_code, args)
    pre = _checked(resolve_precoder, args, code) or SinglePoly((1,))
    cfg = _checked(
        SimConfig,
        code=code, pre=pre, list_size=args.L, ebn0_grid_db=_checked(parse_grid, args.snr),
        max_trials=args.max_trials, max_errors=args.max_errors, rng_seed=args.seed,
        batch_size=args.batch, metric=args.metric, all_zero=args.all_zero,
    )
    points = run_fer(cfg, workers=max(1, args.threads), progress=None if args.quiet else _progress)
    man = _manifest(argv, args.seed)
    with _output(args.out, man) as fh:
        write_fer_csv(points, fh, _manifest_header(man) + " " + manifest_line(cfg))
    return 0


def cmd_analyze(args, argv) -> int:
    if args.what == "coset":
        q = _checked(CosetQuery, args.i, frozenset(args.frozen), frozenset(args.info))
        if not 0 <= args.i or max(q.rows()) >= (1 << args.n):
            raise UsageError(f"row index out of range for n={args.n}")
        w = coset_weight(args.n, q)
        base = coset_weight(args.n, CosetQuery(args.i, frozenset(), q.extra))
        case = classify_case(args.n, args.i, q.J)
        rows = "+".join(f"g{r}" for r in q.rows())
        print(f"rows={rows} weight={w}")
        print(f"w(g{args.i})={kron_row(args.n, args.i).weight()} base_weight={base} case={case.value}")
        if q.J:
            trend = "decreased" if w < base else "increased" if w > base else "unchanged"
            print(f"frozen rows {_set_str(q.J)} change the weight {base} -> {w} ({trend})")
        return 0
    if args.what == "lemma1":
        ok = _checked(lemma1_check, args.n, args.i, args.trials, args.seed)
        print(f"lemma1 n={args.n} i={'random' if args.i is None else args.i} trials={args.trials} holds={str(ok).lower()}")
        return 0 if ok else 1
    if args.what == "bound":
        rate = args.rate
        for snr in _checked(parse_grid, args.snr):
            print(f"{snr:g},{_checked(union_bound_fer, (args.d, args.A), rate, snr):.6e}")
        return 0
    raise UsageError(f"unknown analysis {args.what!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pacwb", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pacwb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="rate profile, index sets, segments, multiplicity-preservation verdict")
    _add_code_args(p)
    _add_poly_args(p, default=None)
    p.add_argument("--memory", type=int, help="register memory m used for the segment split")
    p.add_argument("--out", type=Path, help="export the code spec config here")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("enumerate", help="min-weight codeword census (CSV)")
    _add_code_args(p)
    _add_poly_args(p)
    p.add_argument("-L", type=int, help="list size for list enumeration")
    p.add_argument("--exact", action="store_true", help="brute force over all 2^K messages")
    p.add_argument("--no-probe", dest="probe", action="store_false", help="skip the L/2 convergence probe")
    _add_out_args(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("simulate", help="BPSK/AWGN frame error rate (CSV)")
    _add_code_args(p)
    _add_poly_args(p)
    p.add_argument("-L", type=int, default=32)
    p.add_argument("--snr", required=True, help="Eb/N0 grid, start:step:stop or a,b,c (dB)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-errors", type=int, default=100)
    p.add_argument("--max-trials", type=int, default=100_000)
    p.add_argument("--batch", type=int, default=1000)
    p.add_argument("--metric", choices=["approx", "exact"], default="approx")
    p.add_argument("--all-zero", action="store_true", help="transmit the all-zero codeword")
    p.add_argument("--quiet", action="store_true")
    _add_out_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="coset weights, coset weight bound checks, union bound")
    asub = p.add_subparsers(dest="what", required=True)
    c = asub.add_parser("coset")
    c.add_argument("-n", type=int, required=True)
    c.add_argument("-i", type=int, required=True)
    c.add_argument("--frozen", type=lambda s: [int(t) for t in s.split(",") if t], default=[])
    c.add_argument("--info", type=lambda s: [int(t) for t in s.split(",") if t], default=[])
    c = asub.add_parser("lemma1")
    c.add_argument("-n", type=int, required=True)
    c.add_argument("-i", type=int, default=None)
    c.add_argument("--trials", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c = asub.add_parser("bound")
    c.add_argument("-d", type=int, required=True, help="minimum distance")
    c.add_argument("-A", type=int, required=True, help="min-weight multiplicity")
    c.add_argument("--rate", type=float, required=True)
    c.add_argument("--snr", required=True)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        parser.error(str(exc))
    except Exception as exc:  # computational failure
        print(f"pacwb: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
