"""Command-line interface: ``zetaflow {eval,scan,count,track,nullspace}``.

Exit codes: 0 success, 2 usage / invalid input, 3 numerical failure.
The environment variable ZETAFLOW_TOL overrides the default evaluation
tolerance.  All numbers are written with 15 significant digits, so repeated
runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import families as fam
from .analytic import hurwitz_function
from .errors import LostZero, NewtonDiverged, ZetaflowError
from .families import CombinationSpec
from .tracker import (
    StepControl,
    Trajectory,
    events_to_json,
    track_family_zero,
    track_hurwitz_zero,
    trajectories_to_csv,
)
from .zeros import (
    Rectangle,
    compare_counts,
    count_formula,
    counting_window,
    find_zeros,
    winding_number,
    zeros_to_csv,
)
from .zeta import ALPHA_MIN, DEFAULT_TOL, hurwitz_jet, hurwitz_zeta_alpha_derivative, primes_between

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^(?P<re>[+-]?{_NUM})(?:(?P<im>[+-]{_NUM}|[+-])i)?$")
_IMAG_RE = re.compile(rf"^(?P<im>[+-]?{_NUM})i$")

# options whose values may start with '-' (negative numbers, ranges)
_VALUE_OPTIONS = ("--s", "--rect", "--window", "--from", "--to", "--X", "--phi", "--theta")


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    s = f"{x:.15g}"
    return "0" if s == "-0" else s


def parse_complex(text: str) -> complex:
    """Parse "a+bi", "a-bi", "a" or "bi" (no spaces)."""
    m = _COMPLEX_RE.match(text)
    if m:
        im = m.group("im")
        if im in ("+", "-"):
            im += "1"
        return complex(float(m.group("re")), float(im) if im else 0.0)
    m = _IMAG_RE.match(text)
    if m:
        return complex(0.0, float(m.group("im")))
    raise UsageError(f"cannot parse complex number {text!r} (expected a+bi without spaces)")


def parse_floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("numbers must be finite")
    return vals


def parse_selection(text: str) -> list[int]:
    """'30..43', '5', or '1,4,7' (1-based ranks among zeros with t > 0)."""
    out: list[int] = []
    for part in text.split(","):
        m = re.fullmatch(r"(\d+)\.\.(\d+)", part)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            if a < 1 or b < a:
                raise UsageError(f"bad zero range {part!r}")
            out.extend(range(a, b + 1))
        elif re.fullmatch(r"\d+", part) and int(part) >= 1:
            out.append(int(part))
        else:
            raise UsageError(f"bad zero selection {part!r}")
    return sorted(set(out))


def default_tol() -> float:
    env = os.environ.get("ZETAFLOW_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        tol = float(env)
    except ValueError:
        raise UsageError(f"ZETAFLOW_TOL={env!r} is not a number") from None
    if not (0 < tol < 1):
        raise UsageError("ZETAFLOW_TOL must lie in (0, 1)")
    return tol


def load_spec(path: str) -> CombinationSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return fam.spec_from_json(text)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid family spec {path}: {exc}") from None


def check_alpha(alpha: float) -> float:
    if not (ALPHA_MIN <= alpha <= 1):
        raise UsageError(f"alpha must lie in [{ALPHA_MIN:g}, 1]")
    return alpha


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    s = parse_complex(args.s)
    tol = default_tol()
    if args.family_spec:
        spec = load_spec(args.family_spec)
        if args.deriv == "alpha":
            raise UsageError("--deriv alpha needs --alpha")
        if args.deriv == "param":
            v = fam.combination_param_derivative(spec, s, tol)
            err = 0.0
        else:
            order = 1 if args.deriv == "s" else 0
            jets, errs = fam.combination_jet(spec, np.array([s]), order, tol)
            v, err = complex(jets[order, 0]), float(errs[order, 0])
    else:
        if args.alpha is None:
            raise UsageError("either --alpha or --family-spec is required")
        alpha = check_alpha(args.alpha)
        if args.deriv == "param":
            raise UsageError("--deriv param needs --family-spec")
        if args.deriv == "alpha":
            r = hurwitz_zeta_alpha_derivative(s, alpha, tol)
            v, err = r.value, r.est_abs_error
        else:
            order = 1 if args.deriv == "s" else 0
            jets, errs = hurwitz_jet(s, alpha, order, tol)
            v, err = complex(jets[order]), float(errs[order])
    print(f"{fmt(v.real)} {fmt(v.imag)} {fmt(err)}")
    return EXIT_OK


def _function_from_args(args, tol):
    if args.family_spec:
        spec = load_spec(args.family_spec)
        return fam.combination_function(spec, tol), spec
    if args.alpha is None:
        raise UsageError("either --alpha or --family-spec is required")
    alpha = check_alpha(args.alpha)
    return hurwitz_function(alpha, tol), fam.hurwitz_spec(alpha)


def cmd_scan(args) -> int:
    a, b, c, d = parse_floats(args.rect, 4)
    if not (a < b and c < d):
        raise UsageError("rectangle needs sigma_min < sigma_max and t_min < t_max")
    rect = Rectangle(a, b, c, d)
    f, _ = _function_from_args(args, default_tol())
    try:
        zeros, info = find_zeros(f, rect, details=True)
    except NewtonDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        for cell in exc.unresolved:
            print(f"unresolved cell sigma=[{fmt(cell.sigma_min)},{fmt(cell.sigma_max)}] "
                  f"t=[{fmt(cell.t_min)},{fmt(cell.t_max)}]", file=sys.stderr)
        return EXIT_NUMERIC
    text = zeros_to_csv(zeros)
    summary = f"{len(zeros)} {info.winding}"
    if args.out:
        write_text(args.out, text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_count(args) -> int:
    T = args.tmax
    if not (0 < T <= 500):
        raise UsageError("--tmax must lie in (0, 500]")
    if args.family_spec:
        target = load_spec(args.family_spec)
    elif args.alpha is not None:
        target = check_alpha(args.alpha)
    else:
        raise UsageError("either --alpha or --family-spec is required")
    cmp = compare_counts(target, T)
    print(f"T={fmt(cmp.T)} alpha={fmt(cmp.alpha)} predicted={fmt(cmp.predicted)} "
          f"actual={cmp.actual} deviation={fmt(cmp.deviation)}")
    if args.sweep:
        lines = ["T,predicted,actual,deviation"]
        Ts = list(np.arange(10.0, T, 10.0)) + [T]
        for t in Ts:
            actual = sum(z.multiplicity for z in cmp.zeros if z.t <= t)
            pred = count_formula(float(t), cmp.alpha)
            lines.append(f"{fmt(t)},{fmt(pred)},{actual},{fmt(pred - actual)}")
        write_text(args.sweep, "\n".join(lines) + "\n")
    return EXIT_OK


def _first_zeros(f, alpha: float, n: int, sigma_window: tuple[float, float] | None = None):
    """Zeros with t > 0 sorted by t, at least the first n."""
    T = 10.0
    while count_formula(T, alpha) < n + 3:
        T *= 1.25
    for _ in range(8):
        rect = counting_window(alpha, T)
        if sigma_window:
            rect = Rectangle(sigma_window[0], sigma_window[1], rect.t_min, rect.t_max)
        zeros = [z for z in find_zeros(f, rect) if z.t > 0]
        if len(zeros) >= n:
            return zeros
        T *= 1.25
    raise ZetaflowError(f"could not locate {n} zeros")


def _read_seeds(path: str) -> list[complex]:
    import csv

    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return [complex(float(r["sigma"]), float(r["t"])) for r in rows]
    except (KeyError, ValueError):
        raise UsageError(f"{path} is not a zero CSV (columns sigma,t)") from None


def _family_spec_for_track(args) -> tuple[CombinationSpec, float, float]:
    name = args.family
    if name == "hurwitz":
        p0 = 1.0 if args.from_ is None else check_alpha(float(args.from_))
        p1 = 0.01 if args.to is None else check_alpha(float(args.to))
        return fam.hurwitz_spec(p0), p0, p1
    if name == "psi5o":
        start = fam.angle_of_beta_5odd(1j)
        p0 = start if args.from_ is None else float(args.from_)
        p1 = p0 + 2 * math.pi * args.turns if args.to is None else float(args.to)
        return fam.build_psi5_odd(angle=p0), p0, p1
    eps = args.epsilon if args.epsilon is not None else 0.01
    if eps < 0:
        raise UsageError("--epsilon must be non-negative")
    p0 = 0.0 if args.from_ is None else float(args.from_)
    p1 = p0 + 2 * math.pi * args.turns if args.to is None else float(args.to)
    if name == "psie5":
        spec = fam.build_psi_even5(eps, p0)
    else:
        if args.p is None:
            raise UsageError("--family psip needs --p")
        sm = fam.symmetry_matrix(args.p)
        if args.X:
            X = np.array(parse_floats(args.X))
        elif sm.nullity == 1:
            X = sm.null_basis[0]
        else:
            raise UsageError(f"--X required: the null space for p={args.p} has dimension {sm.nullity}")
        spec = fam.build_psi_prime(args.p, eps, p0, X)
    return spec, p0, p1


def _svg(trajs: list[Trajectory], use_scaled: bool) -> str:
    pts = []
    for tr in trajs:
        line = []
        for s in tr.samples:
            y = s.scaled_t if use_scaled else s.z.imag
            if y is not None:
                line.append((s.param, y))
        pts.append(line)
    xs = [x for line in pts for x, _ in line] or [0.0, 1.0]
    ys = [y for line in pts for _, y in line] or [0.0, 1.0]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    W, H, m = 800, 600, 50

    def X(x):
        return m + (x - x0) / (x1 - x0) * (W - 2 * m)

    def Y(y):
        return H - m - (y - y0) / (y1 - y0) * (H - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>',
           f'<text x="{m}" y="{H - m + 20}" font-size="12">{x0:.6g}</text>',
           f'<text x="{W - m}" y="{H - m + 20}" font-size="12" text-anchor="end">{x1:.6g}</text>',
           f'<text x="{m - 5}" y="{H - m}" font-size="12" text-anchor="end">{y0:.6g}</text>',
           f'<text x="{m - 5}" y="{m + 10}" font-size="12" text-anchor="end">{y1:.6g}</text>']
    for line in pts:
        if len(line) < 2:
            continue
        coords = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in line)
        out.append(f'<polyline fill="none" stroke="black" stroke-width="1" points="{coords}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_track(args) -> int:
    tol = default_tol()
    spec, p0, p1 = _family_spec_for_track(args)
    if args.turns <= 0:
        raise UsageError("--turns must be positive")
    f = hurwitz_function(p0, tol) if spec.family == "Hurwitz" else fam.combination_function(spec, tol)
    alpha = p0 if spec.family == "Hurwitz" else 1.0 / spec.modulus

    if args.seeds:
        from .zeros import newton_refine

        starts = [newton_refine(f, z).location for z in _read_seeds(args.seeds)]
    elif args.zeros:
        sel = parse_selection(args.zeros)
        zeros = _first_zeros(f, alpha, sel[-1],
                             None if spec.family == "Hurwitz" else (-3.0, 4.0))
        starts = [zeros[k - 1].location for k in sel]
    else:
        lo, hi = parse_floats(args.window, 2) if args.window else (0.0, 40.0)
        if not lo < hi:
            raise UsageError("--window needs t_min < t_max")
        sig = counting_window(alpha, 1.0)
        rect = Rectangle(min(sig.sigma_min, -3.0), 4.0, lo, hi)
        starts = [z.location for z in find_zeros(f, rect) if abs(z.t) > 1e-9]

    ctrl = StepControl(n_samples=args.samples, offset=args.offset, tol=tol)
    trajs: list[Trajectory] = []
    lost = 0
    for z in starts:
        try:
            if spec.family == "Hurwitz":
                trajs.append(track_hurwitz_zero(z, p0, p1, ctrl))
            else:
                trajs.append(track_family_zero(spec, z, p0, p1, ctrl))
        except LostZero as exc:
            lost += 1
            print(f"lost zero starting at {fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}i: "
                  f"{exc}", file=sys.stderr)
    csv_text = trajectories_to_csv(trajs, with_id=True)
    if args.out:
        write_text(args.out, csv_text)
        write_text(str(Path(args.out).with_suffix(".events.json")), events_to_json(trajs) + "\n")
    else:
        sys.stdout.write(csv_text)
    if args.svg:
        write_text(args.svg, _svg(trajs, spec.family == "Hurwitz"))
    n_events = sum(len(t.events) for t in trajs)
    print(f"{len(trajs)} trajectories, {n_events} events, {lost} lost", file=sys.stderr)
    return EXIT_NUMERIC if lost else EXIT_OK


def cmd_nullspace(args) -> int:
    if args.p is not None:
        primes = [args.p]
    elif args.primes_up_to is not None:
        primes = primes_between(5, args.primes_up_to)
    else:
        raise UsageError("either --p or --primes-up-to is required")
    mats = [fam.symmetry_matrix(p) for p in primes]
    print("p order rank nullity p-4r")
    for p, sm in zip(primes, mats):
        print(f"{p} {sm.order} {sm.rank} {sm.nullity} {p - 4 * sm.rank}")
        if args.basis:
            for X in sm.null_basis:
                print("  " + " ".join(fmt(float(x)) for x in X))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zetaflow", description="Hurwitz zeta zeros and their flows")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate zeta(s, alpha) or a combination")
    p.add_argument("--s", required=True, help='complex argument "a+bi"')
    p.add_argument("--alpha", type=float)
    p.add_argument("--family-spec", help="combination spec JSON file")
    p.add_argument("--deriv", choices=["s", "alpha", "param"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="locate all zeros in a rectangle")
    p.add_argument("--rect", required=True, help="sigma_min,sigma_max,t_min,t_max")
    p.add_argument("--alpha", type=float)
    p.add_argument("--family-spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("count", help="compare the zero count with the counting formula")
    p.add_argument("--alpha", type=float)
    p.add_argument("--family-spec")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--sweep", nargs="?", const="-", help="CSV of counts every 10 units of T")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("track", help="follow zeros along a family parameter")
    p.add_argument("--family", required=True, choices=["hurwitz", "psi5o", "psie5", "psip"])
    p.add_argument("--from", dest="from_", type=float)
    p.add_argument("--to", type=float)
    p.add_argument("--turns", type=float, default=1.0)
    p.add_argument("--zeros", help="1-based ranks of zeros with t > 0, e.g. 30..43")
    p.add_argument("--window", help="t_min,t_max: track every zero with t in this range")
    p.add_argument("--seeds", help="zero CSV (as written by scan) with start points")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--X", help="comma-separated null vector")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--offset", type=float, default=1e-6, help="regularization offset")
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("nullspace", help="symmetry matrices of the even prime families")
    p.add_argument("--p", type=int)
    p.add_argument("--primes-up-to", type=int)
    p.add_argument("--basis", action="store_true")
    p.set_defaults(func=cmd_nullspace)
    return parser


def _join_values(argv: list[str]) -> list[str]:
    """Turn ``--rect -1,2,0,30`` into ``--rect=-1,2,0,30`` so values may start with '-'."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_OPTIONS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(argv))
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "samples", 1) < 1:
        print("error: --samples must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ZetaflowError as exc:
        if isinstance(exc, ValueError):
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
