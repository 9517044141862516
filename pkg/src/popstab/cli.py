"""Command-line front end.

    popstab spectrum --model builtin:ex1_1 --n 5
    popstab converge --model builtin:ex2_1 --n-min 8 --n-max 48 --n-step 8
    popstab examples

Models are either ``builtin:<name>`` or a path to a model file (see the
model module for the format).  Exit codes: 0 success, 2 configuration or
parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import spectra
from .expr import ExprSyntaxError
from .grid import DuplicateNodes, InvalidInterval
from .linalg import NoConvergence, SingularMatrix
from .model import (
    BUILTIN_NAMES,
    ConfigSyntax,
    MissingKey,
    NonpositiveVelocity,
    UnknownExample,
    VariableMismatch,
    builtin,
    load_model,
)
from .quad import ShapeMismatch

CONFIG_ERRORS = (
    ConfigSyntax,
    MissingKey,
    VariableMismatch,
    UnknownExample,
    ExprSyntaxError,
    InvalidInterval,
    DuplicateNodes,
    spectra.MissingReference,
    OSError,
)
NUMERICAL_ERRORS = (
    SingularMatrix,
    NoConvergence,
    NonpositiveVelocity,
    ShapeMismatch,
)


def _load(source: str):
    if source.startswith("builtin:"):
        return builtin(source[len("builtin:"):])[0]
    with open(source, "r", encoding="utf-8") as handle:
        return load_model(handle.read())


def _fmt(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return f"{value:.17g}"


def _write_csv(path: str, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(row + "\n")


def cmd_spectrum(args) -> int:
    model = _load(args.model)
    if model.dimension == 2:
        generator = spectra.assemble_2d(model, args.n, args.m or args.n, args.oversample)
    else:
        generator = spectra.assemble_1d(model, args.n, args.oversample)
    k = min(args.k, generator.dim)
    report = spectra.compute_spectrum(generator, k)
    verdict = spectra.stability_verdict(report.abscissa, args.tol)
    print(f"model: {args.model}  (n = {args.n}, m = {args.m or args.n})"
          if model.dimension == 2 else
          f"model: {args.model}  (n = {args.n})")
    print(f"{k} rightmost eigenvalues (re, im):")
    for i in range(k):
        lam = report.eigenvalues[i]
        print(f"  {i:3d}  {_fmt(lam.real)}  {_fmt(lam.imag)}")
    print(f"spectral abscissa: {_fmt(report.abscissa)}")
    print(f"verdict: {verdict}")
    if args.out:
        rows = [
            f"{i},{_fmt(report.eigenvalues[i].real)},{_fmt(report.eigenvalues[i].imag)}"
            for i in range(k)
        ]
        _write_csv(args.out, "index,re,im", rows)
    return 0


def _record_row(record: spectra.ConvergenceRecord) -> str:
    m_text = "" if record.m is None else str(record.m)
    if record.lam is None:
        lam_re = lam_im = float("nan")
    else:
        lam_re, lam_im = record.lam.real, record.lam.imag
    return ",".join(
        [
            str(record.n),
            m_text,
            _fmt(record.eps_lambda),
            _fmt(record.eps_phi),
            _fmt(lam_re),
            _fmt(lam_im),
            _fmt(record.abscissa),
        ]
    )


def cmd_converge(args) -> int:
    model = _load(args.model)
    if model.reference is None:
        raise spectra.MissingReference(
            "the model has no reference eigenpair (builtin or ref_lambda/ref_phi)"
        )
    degrees = list(range(args.n_min, args.n_max + 1, args.n_step))
    records = spectra.convergence_sweep(model, None, degrees, args.oversample)
    rows = [_record_row(r) for r in records]
    header = "n,m,eps_lambda,eps_phi,lambda_re,lambda_im,abscissa"
    print(header)
    for row in rows:
        print(row)
    slopes = {}
    for fieldname in ("eps_lambda", "eps_phi"):
        try:
            slopes[fieldname] = spectra.fit_order(records, fieldname)
            print(f"fitted order of {fieldname}: {slopes[fieldname]:.3f}")
        except spectra.InsufficientData:
            slopes[fieldname] = None
            print(f"fitted order of {fieldname}: n/a (too few points above the plateau)")
    if args.out:
        _write_csv(args.out, header, rows)
    if args.svg:
        write_convergence_svg(args.svg, args.model, records, slopes, args.guide_slope)
    return 0


def cmd_examples(args) -> int:
    print(f"{'name':<12} {'dim':<4} {'domain':<34} {'lambda':<22} note")
    for name in BUILTIN_NAMES:
        mdl, ref = builtin(name)
        if mdl.dimension == 2:
            dom = mdl.domain
            domain = (f"[{dom.x0:.6g}, {dom.x_bar:.6g}] x "
                      f"[{dom.y0:.6g}, {dom.y_bar:.6g}]")
        else:
            domain = f"[{mdl.x0:.6g}, {mdl.x_bar:.6g}]"
        print(f"{name:<12} {mdl.dimension:<4} {domain:<34} {_fmt(ref.lam):<22} {ref.note}")
    return 0


# ---------------------------------------------------------------------------
# SVG convergence plot (self-contained, no plotting dependency)

_SVG_W, _SVG_H = 640, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 36, 50
_SERIES = (("eps_lambda", "#1f77b4", "circle"), ("eps_phi", "#d62728", "square"))


def _svg_points(records, fieldname):
    points = []
    for record in records:
        err = getattr(record, fieldname)
        if record.error is None and np.isfinite(err) and err > 0:
            points.append((record.n, err))
    return points


def write_convergence_svg(path, title, records, slopes, guide_slopes=None) -> None:
    """Self-contained log-log error plot of a convergence sweep."""
    all_points = {f: _svg_points(records, f) for f, _, _ in _SERIES}
    flat = [p for pts in all_points.values() for p in pts]
    if flat:
        x_lo = math.log10(min(p[0] for p in flat))
        x_hi = math.log10(max(p[0] for p in flat))
        y_lo = math.floor(math.log10(min(p[1] for p in flat)))
        y_hi = math.ceil(math.log10(max(p[1] for p in flat)))
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, -1, 1
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1
    plot_w = _SVG_W - _MARGIN_L - _MARGIN_R
    plot_h = _SVG_H - _MARGIN_T - _MARGIN_B

    def sx(n):
        return _MARGIN_L + (math.log10(n) - x_lo) / (x_hi - x_lo) * plot_w

    def sy(err):
        return _MARGIN_T + (y_hi - math.log10(err)) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]
    for decade in range(y_lo, y_hi + 1):
        y = sy(10.0 ** decade)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.1f}" x2="{_MARGIN_L + plot_w}" y2="{y:.1f}" '
            'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 6}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">1e{decade}</text>'
        )
    for n in sorted({r.n for r in records}):
        x = sx(n)
        parts.append(
            f'<line x1="{x:.1f}" y1="{_MARGIN_T + plot_h}" x2="{x:.1f}" '
            f'y2="{_MARGIN_T + plot_h + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_MARGIN_T + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{n}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_SVG_H - 10}" text-anchor="middle" '
        'font-family="sans-serif" font-size="12">n (log scale)</text>'
    )
    for slope in guide_slopes or ():
        anchors = all_points["eps_lambda"] or flat
        if not anchors:
            continue
        n_ref, e_ref = anchors[len(anchors) // 2]
        n0, n1 = 10.0 ** x_lo, 10.0 ** x_hi
        e0 = e_ref * (n0 / n_ref) ** slope
        e1 = e_ref * (n1 / n_ref) ** slope
        lo, hi = 10.0 ** y_lo, 10.0 ** y_hi
        e0 = min(max(e0, lo), hi)
        e1 = min(max(e1, lo), hi)
        parts.append(
            f'<line x1="{sx(n0):.1f}" y1="{sy(e0):.1f}" x2="{sx(n1):.1f}" '
            f'y2="{sy(e1):.1f}" stroke="#999999" stroke-dasharray="6,4"/>'
        )
        parts.append(
            f'<text x="{sx(n1) - 4:.1f}" y="{sy(e1) - 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="#777777">slope {slope:g}</text>'
        )
    legend_y = _MARGIN_T + 16
    for fieldname, color, marker in _SERIES:
        points = all_points[fieldname]
        if points:
            coords = " ".join(f"{sx(n):.1f},{sy(e):.1f}" for n, e in points)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
            for n, e in points:
                if marker == "circle":
                    parts.append(
                        f'<circle cx="{sx(n):.1f}" cy="{sy(e):.1f}" r="3.5" fill="{color}"/>'
                    )
                else:
                    parts.append(
                        f'<rect x="{sx(n) - 3:.1f}" y="{sy(e) - 3:.1f}" width="6" height="6" '
                        f'fill="{color}"/>'
                    )
        slope = slopes.get(fieldname)
        label = fieldname if slope is None else f"{fieldname} (order {slope:.2f})"
        parts.append(
            f'<text x="{_MARGIN_L + plot_w - 8}" y="{legend_y}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="{color}">{label}</text>'
        )
        legend_y += 16
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popstab",
        description="Stability of structured population models by "
        "pseudospectral discretization of the integrated-state generator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    spectrum = sub.add_parser("spectrum", help="compute the rightmost spectrum of a model")
    spectrum.add_argument("--model", required=True, help="builtin:<name> or model file path")
    spectrum.add_argument("--n", type=int, required=True)
    spectrum.add_argument("--m", type=int, default=None, help="default: same as --n")
    spectrum.add_argument("--k", type=int, default=10, help="eigenvalues to report")
    spectrum.add_argument("--oversample", type=int, default=2)
    spectrum.add_argument("--tol", type=float, default=1e-8, help="verdict tolerance")
    spectrum.add_argument("--out", default=None, help="CSV output path")
    spectrum.set_defaults(func=cmd_spectrum)

    converge = sub.add_parser("converge", help="error sweep against the reference eigenpair")
    converge.add_argument("--model", required=True)
    converge.add_argument("--n-min", type=int, required=True)
    converge.add_argument("--n-max", type=int, required=True)
    converge.add_argument("--n-step", type=int, default=1)
    converge.add_argument("--oversample", type=int, default=2)
    converge.add_argument("--out", default=None, help="CSV output path")
    converge.add_argument("--svg", default=None, help="log-log plot output path")
    converge.add_argument(
        "--guide-slope", type=float, action="append", default=None,
        help="draw a dashed reference line of this slope (repeatable)",
    )
    converge.set_defaults(func=cmd_converge)

    examples = sub.add_parser("examples", help="list builtin models")
    examples.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"popstab: configuration error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"popstab: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
