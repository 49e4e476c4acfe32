"""Batch command-line front end: dmt | verify | outage | codesim.

All output is CSV on stdout (or --out); exit codes: 0 success, 1 verification
discrepancy, 2 invalid arguments, 3 too few usable points for a slope fit.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import analytic, codes, oracle, outage
from .curves import uniform_grid
from .protocols import ProtocolSpec

DEFAULT_SEED = 20250810
DMT_PROTOCOLS = ("oaf", "oaf-bound", "naf", "nsdf-fixed", "nsdf-variable",
                 "osdf-fixed", "osdf-variable", "miso")
OUTAGE_PROTOCOLS = ("oaf", "nsdf", "osdf", "naf", "miso")
VERIFY_PROTOCOLS = ("oaf", "nsdf", "osdf")
VERIFY_TOL = 1e-6


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _add_common(p: _Parser):
    p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    p.add_argument("--workers", type=int, default=None, help="worker processes for Monte Carlo")
    p.add_argument("--config", type=str, default=None, help="key = value config file")
    p.add_argument("--out", type=str, default=None, help="write CSV here instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="relaydmt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_dmt = sub.add_parser("dmt", help="emit analytic tradeoff curves as CSV")
    _add_common(p_dmt)
    p_dmt.add_argument("--protocol", type=str, default=None, choices=DMT_PROTOCOLS)
    p_dmt.add_argument("--n", type=int, default=None)
    p_dmt.add_argument("--p", type=int, default=None)
    p_dmt.add_argument("--q", type=int, default=None)
    p_dmt.add_argument("--r-start", type=str, default=None)
    p_dmt.add_argument("--r-stop", type=str, default=None)
    p_dmt.add_argument("--r-step", type=str, default=None)
    p_dmt.add_argument("--all", action="store_true", default=None,
                       help="one column per protocol for overlay plotting")

    p_ver = sub.add_parser("verify", help="analytic vs optimization-oracle agreement")
    _add_common(p_ver)
    p_ver.add_argument("--protocol", type=str, default=None,
                       choices=VERIFY_PROTOCOLS + ("nsdf-fixed", "osdf-fixed"))
    p_ver.add_argument("--n", type=int, default=None)
    p_ver.add_argument("--p", type=int, default=None)
    p_ver.add_argument("--q", type=int, default=None)
    p_ver.add_argument("--n-list", type=str, default=None, help="e.g. 2,3,4")
    p_ver.add_argument("--pq-list", type=str, default=None,
                       help="e.g. 1:1,2:1,3:1,3:2,5:3,auto (auto = n:n-1)")
    p_ver.add_argument("--perturb", action="store_true", default=None,
                       help="inject a fault into the analytic curve (negative control)")

    p_out = sub.add_parser("outage", help="Monte Carlo outage sweep")
    _add_common(p_out)
    p_out.add_argument("--protocol", type=str, default=None, choices=OUTAGE_PROTOCOLS)
    p_out.add_argument("--n", type=int, default=None)
    p_out.add_argument("--p", type=int, default=None)
    p_out.add_argument("--q", type=int, default=None)
    p_out.add_argument("--r", type=float, default=None)
    p_out.add_argument("--snr-start", type=float, default=None)
    p_out.add_argument("--snr-stop", type=float, default=None)
    p_out.add_argument("--snr-step", type=float, default=None)
    p_out.add_argument("--snr-list", type=str, default=None, help="e.g. 15,20,25,30,35")
    p_out.add_argument("--trials", type=int, default=None)

    p_code = sub.add_parser("codesim", help="word-error sweep of a shipped code")
    _add_common(p_code)
    p_code.add_argument("--code", type=str, default=None, choices=("oaf-diag", "naf"))
    p_code.add_argument("--protocol", type=str, default=None)
    p_code.add_argument("--n", type=int, default=None)
    p_code.add_argument("--M", type=int, default=None)
    p_code.add_argument("--snr-start", type=float, default=None)
    p_code.add_argument("--snr-stop", type=float, default=None)
    p_code.add_argument("--snr-step", type=float, default=None)
    p_code.add_argument("--snr-list", type=str, default=None)
    p_code.add_argument("--trials", type=int, default=None)

    return parser


_CONVERTERS = {
    "seed": int, "workers": int, "n": int, "p": int, "q": int,
    "trials": int, "M": int, "r": float,
    "snr_start": float, "snr_stop": float, "snr_step": float,
    "all": lambda v: v.lower() in ("1", "true", "yes"),
    "perturb": lambda v: v.lower() in ("1", "true", "yes"),
}


def _load_config(path: str, known_keys) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (s.strip() for s in line.split("=", 1))
                key = key.replace("-", "_")
                if key not in known_keys:
                    raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
                conv = _CONVERTERS.get(key, str)
                try:
                    values[key] = conv(value)
                except ValueError:
                    raise CliError(f"{path}:{lineno}: bad value for {key!r}: {value!r}")
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}")
    return values


def _merge_config(args: argparse.Namespace):
    if args.config is None:
        return
    known = {k for k in vars(args) if k not in ("command", "config")}
    for key, value in _load_config(args.config, known).items():
        if getattr(args, key) is None:  # flags override the file
            setattr(args, key, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise CliError(f"--{name.replace('_', '-')} is required")


def _decimals_of(step: Fraction) -> int:
    s = str(float(step))
    return max(2, len(s.split(".")[1]) if "." in s else 0)


def _fmt_value(d: float) -> str:
    rounded = round(d, 2)
    if abs(d - rounded) < 1e-12:
        return f"{rounded:.2f}"
    return f"{d:.6f}"


def _r_grid(args):
    start = Fraction(args.r_start) if args.r_start is not None else Fraction(0)
    stop = Fraction(args.r_stop) if args.r_stop is not None else Fraction(1)
    step = Fraction(args.r_step) if args.r_step is not None else Fraction(1, 100)
    if step <= 0 or start < 0 or stop > 1 or start > stop:
        raise CliError("r grid must satisfy 0 <= start <= stop <= 1 with step > 0")
    rs = []
    k = 0
    while True:
        r = start + k * step
        if r > stop:
            break
        rs.append(float(r))
        k += 1
    return rs, _decimals_of(step)


def _cmd_dmt(args) -> tuple:
    rs, dec = _r_grid(args)
    if args.all:
        _require(args, "n")
        cols = ["miso", "oaf", "naf", "nsdf-variable", "osdf-variable"]
        curves = [analytic.protocol_dmt(c, args.n) for c in cols]
        lines = ["r," + ",".join(cols)]
        for r in rs:
            lines.append(f"{r:.{dec}f}," + ",".join(_fmt_value(c.value(r)) for c in curves))
        return "\n".join(lines) + "\n", 0
    _require(args, "protocol", "n")
    curve = analytic.protocol_dmt(args.protocol, args.n, args.p, args.q)
    lines = ["r,d"]
    for r in rs:
        lines.append(f"{r:.{dec}f},{_fmt_value(curve.value(r))}")
    return "\n".join(lines) + "\n", 0


def _parse_pq_list(text: str, n: int):
    out = []
    for item in text.split(","):
        item = item.strip()
        if item == "auto":
            out.append((n, n - 1))
            continue
        p, q = item.split(":")
        out.append((int(p), int(q)))
    return out


def _verify_instances(args):
    n_list = [int(s) for s in (args.n_list or "2,3,4").split(",")]
    pq_text = args.pq_list or "1:1,2:1,3:1,3:2,5:3,auto"
    for n in n_list:
        for p, q in _parse_pq_list(pq_text, n):
            for proto in VERIFY_PROTOCOLS:
                yield proto, n, p, q


def _verify_one(proto: str, n: int, p: int, q: int, perturb: bool) -> float:
    proto = proto.replace("-fixed", "")
    if proto == "oaf":
        ana = analytic.oaf_upper_bound(n, p, q)
    elif proto == "nsdf":
        ana = analytic.nsdf_fixed_dmt(n, p, q)
    else:
        ana = analytic.osdf_fixed_dmt(n, p, q)
    orc = oracle.oracle_curve(proto, n, p, q)
    bump = 1e-4 if perturb else 0.0
    return max(abs(ana.value(r) + bump - orc.value(r)) for r in uniform_grid(100))


def _cmd_verify(args) -> tuple:
    perturb = bool(args.perturb)
    lines = []
    if args.protocol is not None:
        _require(args, "n", "p", "q")
        proto = args.protocol.replace("-fixed", "")
        n, p, q = args.n, args.p, args.q
        worst = _verify_one(proto, n, p, q, perturb)
        lines.append(f"{proto} n={n} p={p} q={q}: max|analytic-oracle|={worst:.3e}")
        m = p + q
        if proto == "nsdf" and (n - 1) * p * p - p * q - (n - 1) * q * q > 0:
            rx = Fraction(n * p - m, (n - 2) * m + p)
            dx = Fraction(m, p) * (1 - rx)
            lines.append(f"route intersection r={float(rx):.6g} d={float(dx):.6g}")
        ok = worst < VERIFY_TOL
        lines.append("OK" if ok else "FAIL")
        return "\n".join(lines) + "\n", 0 if ok else 1
    worst, worst_case = -1.0, None
    for proto, n, p, q in _verify_instances(args):
        err = _verify_one(proto, n, p, q, perturb)
        if err > worst:
            worst, worst_case = err, (proto, n, p, q)
    proto, n, p, q = worst_case
    ok = worst < VERIFY_TOL
    lines.append(f"worst case: {proto} n={n} p={p} q={q} max|analytic-oracle|={worst:.3e}")
    lines.append("OK" if ok else "FAIL")
    return "\n".join(lines) + "\n", 0 if ok else 1


def _snr_points(args):
    if args.snr_list is not None:
        pts = [float(s) for s in args.snr_list.split(",")]
    else:
        _require(args, "snr_start", "snr_stop")
        step = args.snr_step if args.snr_step is not None else 5.0
        if step <= 0:
            raise CliError("--snr-step must be positive")
        pts, s = [], args.snr_start
        while s <= args.snr_stop + 1e-9:
            pts.append(round(s, 9))
            s += step
    if not pts or any(b <= a for a, b in zip(pts, pts[1:])):
        raise CliError("SNR points must be nonempty and strictly increasing")
    return pts


def _outage_spec(args) -> ProtocolSpec:
    kind = {"nsdf": "nsdf-fixed", "osdf": "osdf-fixed"}.get(args.protocol, args.protocol)
    try:
        if kind in ("nsdf-fixed", "osdf-fixed"):
            _require(args, "p", "q")
            return ProtocolSpec(kind=kind, n=args.n, p=args.p, q=args.q)
        return ProtocolSpec(kind=kind, n=args.n)
    except ValueError as exc:
        raise CliError(str(exc))


def _cmd_outage(args) -> tuple:
    _require(args, "protocol", "n", "r", "trials")
    if args.trials < 1:
        raise CliError("--trials must be >= 1")
    if not 0.0 <= args.r <= 1.0:
        raise CliError("--r must lie in [0, 1]")
    spec = _outage_spec(args)
    snrs = _snr_points(args)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    workers = args.workers if args.workers is not None else 1
    series = outage.sweep(spec, args.r, snrs, args.trials, seed, workers=workers)
    zero = sum(1 for p in series.points if p.outage_count == 0)
    if zero > 0.3 * len(series.points):
        print(f"warning: {zero}/{len(series.points)} SNR points have zero outage counts",
              file=sys.stderr)
    code = 0 if series.fitted_exponent is not None else 3
    text = series.to_csv()
    if code == 3:
        text += "# slope unavailable: fewer than 3 SNR points with nonzero counts\n"
    return text, code


def _cmd_codesim(args) -> tuple:
    _require(args, "code", "n", "M", "trials")
    proto_for_code = {"oaf-diag": "oaf", "naf": "naf"}[args.code]
    if args.protocol is not None and args.protocol != proto_for_code:
        raise CliError(f"code {args.code!r} runs over protocol {proto_for_code!r}")
    snrs = _snr_points(args)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    workers = args.workers if args.workers is not None else 1
    try:
        spec = ProtocolSpec(kind=proto_for_code, n=args.n)
        rho0 = 10.0 ** (snrs[0] / 10.0)
        if args.code == "oaf-diag":
            book = codes.oaf_diagonal_codebook(args.n, args.M, rho0)
        else:
            book = codes.naf_codebook(args.n, args.M, rho0)
        series = codes.simulate_wer(spec, book, snrs, args.trials, seed, workers=workers)
    except ValueError as exc:
        raise CliError(str(exc))
    code = 0 if series.fitted_exponent is not None else 3
    text = series.to_csv()
    if code == 3:
        text += "# slope unavailable: fewer than 3 SNR points with nonzero counts\n"
    return text, code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args)
        handler = {"dmt": _cmd_dmt, "verify": _cmd_verify,
                   "outage": _cmd_outage, "codesim": _cmd_codesim}[args.command]
        text, code = handler(args)
    except (CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
