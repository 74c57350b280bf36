"""Command-line interface.

Subcommands: contact, inner, verdict, ultrametric, scatter, lemma-check.
Exit codes: 0 success, 2 inconclusive (truncation- or fit-limited), 1 error.
Defaults come from the file named by ARCMETRIC_CONFIG when set.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .arcs import Arc, FitError, outer_contact_order, outer_point_to_arc_order, \
    reparametrize_by_distance
from .config import ConfigError, RunConfig
from .criterion import (
    scatter_csv,
    scatter_to_json,
    tangency_scatter,
    ultrametric_check,
    verdict,
    verdict_json_text,
)
from .germs import GermError, GermModel, builtin, sample_arcs
from .germspec import (
    GermSpecError,
    parse_arc,
    parse_arc_text,
    parse_germ_spec,
    serialize_arc,
)
from .inner import inner_contact_order, inner_point_to_arc_order
from .mesh import MeshError
from .puiseux import ContactOrder

_FIXTURE_TRIPLE = ("(t, 0)", "(t, t^2)", "(t, t^3)")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for
    # "inconclusive" here, so usage errors are remapped to 1.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_germ(spec: str) -> GermModel:
    if spec.startswith("builtin:"):
        parts = spec.split(":")[1:]
        if not parts or not parts[0]:
            raise GermError("builtin germ needs a family name")
        try:
            params = [Fraction(p) for p in parts[1:]]
        except (ValueError, ZeroDivisionError) as exc:
            raise GermError(f"bad builtin parameter in {spec!r}: {exc}") from exc
        return builtin(parts[0], *params)
    path = Path(spec)
    return parse_germ_spec(path.read_text())


def _load_arc(text: str, truncation: Fraction, label: str) -> Arc:
    s = text.strip()
    if s.startswith("("):
        return parse_arc_text(s, truncation, label=label)
    path = Path(s[1:] if s.startswith("@") else s)
    arc = parse_arc(json.loads(path.read_text()))
    if arc.label is None:
        arc = Arc(arc.components, arc.distance_parametrized, label, arc.sheet)
    return arc


def _parse_scales_flag(text: str) -> tuple[int, int]:
    try:
        k_min, k_max = (int(p) for p in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"--scales expects k_min:k_max, got {text!r}") from exc
    if k_min >= k_max:
        raise ConfigError("--scales needs k_min < k_max")
    return k_min, k_max


def _parse_truncation_flag(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"--truncation expects p/q, got {text!r}") from exc
    if value <= 0:
        raise ConfigError("--truncation must be positive")
    return value


def _effective_config(args) -> RunConfig:
    cfg = RunConfig.load()
    overrides: dict = {}
    if getattr(args, "truncation", None) is not None:
        overrides["truncation"] = _parse_truncation_flag(args.truncation)
    if getattr(args, "scales", None) is not None:
        k_min, k_max = _parse_scales_flag(args.scales)
        overrides["scale_k_min"] = k_min
        overrides["scale_k_max"] = k_max
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return cfg.with_overrides(**overrides)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _check_on_germ(germ: GermModel, arc: Arc, name: str) -> None:
    probe_t = 1.0 / 256.0
    if not germ.on_germ(arc.evaluate(probe_t), tol=1e-6):
        raise GermError(
            f"{name} does not lie on germ {germ.name} "
            f"(checked at t={probe_t})"
        )


def _order_exit(order: ContactOrder) -> int:
    return 0 if order.is_finite else 2


# -- subcommands -------------------------------------------------------------


def _cmd_contact(args) -> int:
    cfg = _effective_config(args)
    a = _load_arc(args.arc1, cfg.truncation, "arc1")
    b = _load_arc(args.arc2, cfg.truncation, "arc2")
    if args.germ is not None:
        germ = _load_germ(args.germ)
        _check_on_germ(germ, reparametrize_by_distance(a), "arc1")
        _check_on_germ(germ, reparametrize_by_distance(b), "arc2")
    order = outer_contact_order(a, b)
    if args.format == "json":
        _emit(json.dumps({
            "kind": "contact",
            "outer_order": str(order),
            "finite": order.is_finite,
            "value": [order.value.numerator, order.value.denominator],
            "arcs": [serialize_arc(reparametrize_by_distance(a)),
                     serialize_arc(reparametrize_by_distance(b))],
        }, sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit(f"{order}\n", args.out)
    return _order_exit(order)


def _cmd_inner(args) -> int:
    cfg = _effective_config(args)
    germ = _load_germ(args.germ)
    a = reparametrize_by_distance(_load_arc(args.arc1, cfg.truncation, "arc1"))
    b = reparametrize_by_distance(_load_arc(args.arc2, cfg.truncation, "arc2"))
    est = inner_contact_order(
        germ, a, b, cfg.scales(),
        resolution_divisor=cfg.resolution_divisor,
        snap_denominator=cfg.snap_denominator,
        snap_tolerance=cfg.snap_tolerance,
    )
    if args.format == "csv":
        lines = ["t,d_outer,d_inner,ratio"]
        for t, d_inn in est.samples:
            d_out = float(np.linalg.norm(a.evaluate(t) - b.evaluate(t)))
            ratio = d_inn / d_out if d_out > 1e-13 else math.nan
            lines.append(f"{t!r},{d_out!r},{d_inn!r},{ratio!r}")
        _emit("\n".join(lines) + "\n", args.out)
    elif args.format == "json":
        _emit(json.dumps({
            "kind": "inner",
            "slope": None if math.isnan(est.slope) else est.slope,
            "snapped": None if est.snapped is None
            else [est.snapped.numerator, est.snapped.denominator],
            "r_squared": est.r_squared,
            "degenerate": est.degenerate,
            "samples": [[t, d] for t, d in est.samples],
        }, sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit(f"{est}\n", args.out)
    return 0 if est.snapped is not None else 2


def _cmd_verdict(args) -> int:
    cfg = _effective_config(args)
    germ = _load_germ(args.germ)
    v = verdict(germ, args.budget, cfg.seed, cfg.scales())
    _emit(verdict_json_text(v), args.out)
    all_inconclusive = (
        v.pairs_tested > 0 and len(v.inconclusive_pairs) == v.pairs_tested
    )
    if v.outcome == "NoWitnessFound" and (v.notes or all_inconclusive):
        return 2
    return 0


def _cmd_ultrametric(args) -> int:
    cfg = _effective_config(args)
    texts = [args.arc1, args.arc2, args.arc3]
    if all(t is None for t in texts):
        texts = list(_FIXTURE_TRIPLE)
    if any(t is None for t in texts):
        raise ConfigError("ultrametric needs all of --arc1/--arc2/--arc3, or none")
    arcs = [
        _load_arc(t, cfg.truncation, f"arc{i + 1}")
        for i, t in enumerate(texts)
    ]
    report = ultrametric_check(*arcs)
    shown = ", ".join(str(o) for o in report.orders)
    if args.format == "json":
        _emit(json.dumps({
            "kind": "ultrametric",
            "holds": report.holds,
            "orders": [str(o) for o in report.orders],
            "note": report.note,
        }, sort_keys=True, indent=2) + "\n", args.out)
    elif report.holds is None:
        _emit(f"inconclusive ({shown}): {report.note}\n", args.out)
    else:
        _emit(f"{'true' if report.holds else 'false'} ({shown})\n", args.out)
    return 2 if report.holds is None else 0


_GNUPLOT_STUB = """\
# Render with: gnuplot -p {name}
set datafile separator ","
set logscale xy
set xlabel "t"
set ylabel "distance"
plot "{csv}" every ::1 using 1:2 title "outer" with points, \\
     "{csv}" every ::1 using 1:3 title "inner" with points
"""


def _cmd_scatter(args) -> int:
    cfg = _effective_config(args)
    germ = _load_germ(args.germ)
    report = tangency_scatter(
        germ, cfg.scales(), pairs_per_scale=args.pairs, seed=cfg.seed,
    )
    if args.format == "json":
        _emit(json.dumps(scatter_to_json(report), sort_keys=True, indent=2)
              + "\n", args.out)
    else:
        _emit(scatter_csv(report), args.out)
        if args.out is not None:
            stub = Path(args.out).with_suffix(".gp")
            stub.write_text(_GNUPLOT_STUB.format(name=stub.name, csv=args.out))
    slope = report.ratio_slope
    summary = (
        f"ratio slope {slope:.4f}, tangent: {str(report.tangent).lower()}\n"
        if not math.isnan(slope)
        else "ratio slope undefined (too few usable scales)\n"
    )
    sys.stderr.write(summary)
    return 0


def _cmd_lemma_check(args) -> int:
    cfg = _effective_config(args)
    germ = _load_germ(args.germ)
    arcs = sample_arcs(germ, max(args.pairs + 1, 4), cfg.seed)
    pairs = [
        (i, j)
        for i in range(len(arcs))
        for j in range(len(arcs))
        if i != j
    ]
    if not pairs:
        raise GermError(f"only one distinct arc exists on {germ.name}")
    pairs = pairs[: args.pairs]
    scales = cfg.scales()
    ok = inconclusive = mismatched = 0
    for i, j in pairs:
        a, b = arcs[i], arcs[j]
        point_est = inner_point_to_arc_order(germ, a, b, scales)
        pair_est = inner_contact_order(germ, a, b, scales)
        exact = outer_contact_order(a, b)
        try:
            outer_pt = outer_point_to_arc_order(a, b)
        except FitError:
            outer_pt = None
        inner_ok = (
            point_est.snapped is not None
            and pair_est.snapped is not None
            and point_est.snapped == pair_est.snapped
        )
        outer_ok = (
            outer_pt is not None
            and outer_pt.is_finite
            and exact.is_finite
            and outer_pt.value == exact.value
        )
        inner_note = (
            f"inner point-to-arc {point_est.snapped} vs pairwise "
            f"{pair_est.snapped}"
        )
        outer_note = (
            f"outer point-to-arc {outer_pt} vs exact {exact}"
        )
        if inner_ok and outer_ok:
            ok += 1
            status = "ok"
        elif (point_est.snapped is None or pair_est.snapped is None
              or outer_pt is None or not exact.is_finite):
            inconclusive += 1
            status = "inconclusive"
        else:
            mismatched += 1
            status = "MISMATCH"
        sys.stdout.write(
            f"pair ({a.label}, {b.label}): {inner_note}; {outer_note} "
            f"[{status}]\n"
        )
    sys.stdout.write(
        f"lemma-check: {ok} ok, {inconclusive} inconclusive, "
        f"{mismatched} mismatched of {len(pairs)} pairs\n"
    )
    if mismatched:
        return 1
    return 2 if inconclusive else 0


# -- wiring ------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="arcmetric",
        description="Decide normal embedding of semialgebraic germs via "
        "arc contact orders.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, germ_required: bool,
               arcs: int = 0, arcs_required: bool = False,
               budget: bool = False, pairs: int | None = None):
        if germ_required:
            p.add_argument("--germ", required=True,
                           help="builtin:<family>[:params] or a spec file path")
        else:
            p.add_argument("--germ", default=None,
                           help="builtin:<family>[:params] or a spec file path")
        for i in range(1, arcs + 1):
            p.add_argument(
                f"--arc{i}",
                required=arcs_required,
                default=None,
                help="inline arc like '(t, t^(3/2))' or a JSON file path",
            )
        if budget:
            p.add_argument("--budget", type=int, default=8,
                           help="number of arcs to sample")
        if pairs is not None:
            p.add_argument("--pairs", type=int, default=pairs,
                           help="pairs per scale / pairs to test")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--scales", default=None, metavar="K_MIN:K_MAX")
        p.add_argument("--truncation", default=None, metavar="P/Q")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("text", "json", "csv"),
                       default="text")

    p = sub.add_parser("contact", help="exact outer contact order of two arcs")
    common(p, germ_required=False, arcs=2, arcs_required=True)
    p.set_defaults(func=_cmd_contact)

    p = sub.add_parser("inner", help="inner contact order estimate")
    common(p, germ_required=True, arcs=2, arcs_required=True)
    p.set_defaults(func=_cmd_inner)

    p = sub.add_parser("verdict", help="search for a normal-embedding witness")
    common(p, germ_required=True, budget=True)
    p.set_defaults(func=_cmd_verdict)

    p = sub.add_parser("ultrametric",
                       help="two smallest pairwise orders of a triple agree")
    common(p, germ_required=False, arcs=3)
    p.set_defaults(func=_cmd_ultrametric)

    p = sub.add_parser("scatter",
                       help="outer vs inner distances on random point pairs")
    common(p, germ_required=True, pairs=16)
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("lemma-check",
                       help="point-to-arc orders match point-to-point orders")
    common(p, germ_required=True, pairs=20)
    p.set_defaults(func=_cmd_lemma_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # scatter defaults to CSV output
    if args.command == "scatter" and args.format == "text":
        args.format = "csv"
    if args.command == "verdict" and args.format == "csv":
        sys.stderr.write("error: verdict reports are JSON only\n")
        return 1
    try:
        return args.func(args)
    except FitError as exc:
        sys.stderr.write(f"inconclusive: {exc}\n")
        return 2
    except (ValueError, ArithmeticError, MeshError, RuntimeError,
            OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
