"""Command-line front end.

    wigwitness witness STATE [loss:EPS] [MAP | disp:auto | sq:auto]
    wigwitness sweep TAG | custom --family F --r|--alpha|--m A:B:STEP [--criterion N] [--eps A:B:STEP]
    wigwitness oracle hull --samples N --seed S | closed-forms
    wigwitness state dump STATE [loss:EPS] [MAP]

States are ``fock:m``, ``pac:alpha``, ``pss:r`` or ``json:PATH`` (either a
density matrix ``{dim, mat}`` or a Gaussian mixture ``{weights, alphas, xis}``).
``witness`` exits 0 for a quantum-non-Gaussian verdict, 1 when inconclusive
and 2 on errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import __version__
from ._parallel import parallel_map
from .channels import GaussianMapSpec, apply_gaussian_map, apply_loss, lossy_parity, parse_map
from .errors import SpecError, WitnessError
from .exemplar_states import FAMILIES, family_state
from .fock_core import DEFAULT_TOL, FockOperator, Tolerances, photon_distribution
from .gaussian_states import GaussianMixture, to_fock
from .oracle import cross_validate_closed_forms, run_hull_campaign
from .witness import (
    CSV_COLUMNS,
    DECISION_TOL,
    EPS_GRID,
    EPS_TOL,
    QNG,
    LossyIndicator,
    WitnessReport,
    _DisplacedDelta,
    delta1,
    delta2,
    eps_max,
    optimal_squeezing,
    optimize_displacement,
    pac_search_box,
    pss_squeezed_mean_photon,
)

EXIT_QNG, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2


@dataclass
class ParsedState:
    rho: FockOperator
    family: Optional[str] = None
    param: Optional[float] = None


def parse_state(text: str, dim: Optional[int] = None, tol: Tolerances = DEFAULT_TOL) -> ParsedState:
    kind, sep, value = text.partition(":")
    if not sep or not value:
        raise SpecError(f"state must look like fock:m, pac:alpha, pss:r or json:PATH, got {text!r}")
    if kind == "json":
        with open(value, encoding="utf-8") as fh:
            data = json.load(fh)
        if "mat" in data:
            rho = FockOperator.from_json_dict(data, tol)
            return ParsedState(rho.resized(dim) if dim and dim > rho.dim else rho)
        if "weights" in data:
            return ParsedState(to_fock(GaussianMixture.from_json_dict(data), dim, tol))
        raise SpecError(f"{value}: expected keys 'mat' or 'weights'")
    if kind not in FAMILIES:
        raise SpecError(f"unknown state kind {kind!r}")
    try:
        param = float(value)
    except ValueError:
        raise SpecError(f"bad parameter in {text!r}") from None
    return ParsedState(family_state(kind, param, dim, tol), kind, param)


def _split_tokens(tokens: Sequence[str]) -> tuple[Optional[float], Optional[str]]:
    """``[loss:EPS] [MAP]`` -> (eps, map text)."""
    tokens = list(tokens)
    if len(tokens) > 2:
        raise SpecError(f"expected at most a loss and a map after the state, got {tokens}")
    eps = None
    if tokens and tokens[0].startswith("loss:"):
        eps = parse_map(tokens[0]).eps
        tokens = tokens[1:]
    if len(tokens) > 1:
        raise SpecError(f"unexpected extra argument {tokens[1]!r}")
    return eps, (tokens[0] if tokens else None)


def _tolerances(args) -> Tolerances:
    return Tolerances(
        norm_tol=args.tol_norm,
        herm_tol=args.tol_herm,
        trace_tol=args.tol_trace,
        psd_tol=args.tol_psd,
        truncation_tol=args.tol_truncation,
    )


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_witness(args) -> int:
    tol = _tolerances(args)
    state = parse_state(args.state, args.dim, tol)
    eps, map_text = _split_tokens(args.tokens)
    rho = state.rho if eps is None else apply_loss(state.rho, eps)
    if map_text is None:
        report = delta1(rho)
    elif map_text == "disp:auto":
        box = pac_search_box(state.param) if state.family == "pac" else None
        _, report = optimize_displacement(rho, box, real_axis=state.family == "pac")
    elif map_text == "sq:auto":
        report = delta2(rho, GaussianMapSpec.squeezing(optimal_squeezing(rho)))
    else:
        g = parse_map(map_text)
        if g.kind == "displacement":
            report = _DisplacedDelta(rho).report(g.beta)
        else:
            report = delta2(rho, g, args.dim)
    report = dataclasses.replace(report, decision_tol=args.tol_decision)
    payload = {"state": args.state, "loss": eps, **report.to_dict()}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_QNG if report.verdict == QNG else EXIT_INCONCLUSIVE


# sweeps ----------------------------------------------------------------------

def parse_range(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` (up to round-off)."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise SpecError(f"range must be start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise SpecError(f"empty or ill-formed range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 10) for i in range(n + 1)]


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class SweepResult:
    figure_tag: str
    rows: list = field(default_factory=list)
    description: str = ""

    def to_csv(self, command: str, tol: Tolerances, decision_tol: float) -> str:
        buf = io.StringIO()
        buf.write(f"# command: {command}\n")
        buf.write(f"# wigwitness version: {__version__}\n")
        buf.write(f"# figure: {self.figure_tag}\n")
        if self.description:
            buf.write(f"# {self.description}\n")
        buf.write(
            "# tolerances: "
            + " ".join(f"{k}={v!r}" for k, v in dataclasses.asdict(tol).items())
            + f" decision_tol={decision_tol!r} eps_grid={EPS_GRID!r} eps_tol={EPS_TOL!r}\n"
        )
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(self.rows)
        return buf.getvalue()


EPS_SWEEP = parse_range("0:1:0.005")


def _delta_vs_eps(family: str, params: Sequence[float], criterion: int, name: str,
                  eps_values: Sequence[float] = EPS_SWEEP, dim: Optional[int] = None) -> list:
    rows = []
    for p in params:
        ind = LossyIndicator(family, p, criterion, dim=dim)
        reports = parallel_map(ind.report, eps_values)
        rows += [rep.csv_row(f"{name}={_fmt(p)}", e) for e, rep in zip(eps_values, reports)]
    return rows


def _eps_max_rows(family: str, params: Sequence[float], criteria: Sequence[int], name: str,
                  dim: Optional[int] = None) -> list:
    jobs = [(p, c) for p in params for c in criteria]
    results = parallel_map(lambda job: eps_max(family, job[0], job[1], dim=dim), jobs)
    rows = []
    for (p, c), res in zip(jobs, results):
        label = f"{name}={_fmt(p)}" if len(criteria) == 1 else f"{name}={_fmt(p)};criterion={c}"
        if res.report is None:
            rows.append([label, "none", "", "", "", "", "inconclusive"])
        else:
            rows.append(res.report.csv_row(label, res.eps_max))
    return rows


def _pac_beta_rows(alphas, eps: float, betas) -> list:
    rows = []
    for a in alphas:
        f = _DisplacedDelta(apply_loss(family_state("pac", a), eps))
        rows += [f.report(b).csv_row(f"alpha={_fmt(a)};beta={_fmt(b)}", eps) for b in betas]
    return rows


def _pss_s_rows(rs, eps: float, ss) -> list:
    rows = []
    for r in rs:
        w0 = (2.0 / math.pi) * lossy_parity(photon_distribution(family_state("pss", r)), eps)
        for s in ss:
            rep = WitnessReport.from_values(w0, pss_squeezed_mean_photon(r, eps, s), GaussianMapSpec.squeezing(s))
            rows.append(rep.csv_row(f"r={_fmt(r)};s={_fmt(s)}", eps))
    return rows


FIGURES: dict[str, tuple[str, Callable[[], list]]] = {
    "fig2-left": ("first-criterion delta vs eps for Fock m=1,2,3",
                  lambda: _delta_vs_eps("fock", [1, 2, 3], 1, "m")),
    "fig2-right": ("eps_max (criterion 1) vs Fock number m",
                   lambda: _eps_max_rows("fock", list(range(1, 11)), [1], "m")),
    "fig3-left": ("first-criterion delta vs eps for PAC alpha=0.2,0.4,0.6",
                  lambda: _delta_vs_eps("pac", [0.2, 0.4, 0.6], 1, "alpha")),
    "fig3-right": ("eps_max (criterion 1) vs PAC alpha",
                   lambda: _eps_max_rows("pac", parse_range("0.1:3:0.1"), [1], "alpha")),
    "fig4-left": ("first-criterion delta vs eps for PSS r=0.1,0.3,0.5",
                  lambda: _delta_vs_eps("pss", [0.1, 0.3, 0.5], 1, "r")),
    "fig4-right": ("eps_max (criterion 1) vs PSS r",
                   lambda: _eps_max_rows("pss", parse_range("0.05:1.5:0.05"), [1], "r")),
    "fig7-left": ("displaced-PAC delta vs beta at eps=0.8",
                  lambda: _pac_beta_rows([0.2, 0.4, 0.6], 0.8, parse_range("-2:2:0.01"))),
    "fig7-right": ("displaced-PAC delta at the numerically optimal beta vs eps",
                   lambda: _delta_vs_eps("pac", [0.2, 0.4, 0.6], 2, "alpha")),
    "fig8-left": ("squeezed-PSS delta vs s at eps=0.7",
                  lambda: _pss_s_rows([0.1, 0.3, 0.5], 0.7, parse_range("-1:1:0.01"))),
    "fig8-right": ("squeezed-PSS delta at the optimal s vs eps",
                   lambda: _delta_vs_eps("pss", [0.1, 0.3, 0.5], 2, "r")),
    "fig9": ("eps_max for criteria 1 and 2 vs PSS r",
             lambda: _eps_max_rows("pss", parse_range("0.05:1.5:0.05"), [1, 2], "r")),
}


def run_sweep(tag: str, args=None) -> SweepResult:
    if tag in FIGURES:
        desc, fn = FIGURES[tag]
        return SweepResult(tag, fn(), desc)
    if tag != "custom":
        raise SpecError(f"unknown sweep {tag!r}; choose from {sorted(FIGURES)} or custom")
    family = args.family
    values = {"fock": args.m, "pac": args.alpha, "pss": args.r}[family]
    if values is None:
        flag = {"fock": "--m", "pac": "--alpha", "pss": "--r"}[family]
        raise SpecError(f"custom sweep for {family} needs {flag} start:stop:step")
    name = {"fock": "m", "pac": "alpha", "pss": "r"}[family]
    params = parse_range(values)
    if args.eps:
        rows = _delta_vs_eps(family, params, args.criterion, name, parse_range(args.eps), args.dim)
        desc = f"criterion-{args.criterion} delta vs eps"
    else:
        rows = _eps_max_rows(family, params, [args.criterion], name, args.dim)
        desc = f"eps_max (criterion {args.criterion})"
    return SweepResult("custom", rows, desc)


def cmd_sweep(args, argv: Sequence[str]) -> int:
    result = run_sweep(args.tag, args)
    command = "wigwitness " + " ".join(a for a in argv if a)
    _emit(result.to_csv(command, _tolerances(args), args.tol_decision), args.out)
    return 0


def cmd_oracle(args) -> int:
    if args.campaign == "hull":
        report = run_hull_campaign(args.samples, args.max_energy, args.maps, args.seed,
                                   tol=args.tol_decision, route=args.route)
    else:
        report = cross_validate_closed_forms(tol=args.tol)
    _emit(report.to_json() + "\n", args.out)
    return 0 if report.ok else 1


def cmd_state(args) -> int:
    state = parse_state(args.state, args.dim, _tolerances(args))
    eps, map_text = _split_tokens(args.tokens)
    rho = state.rho if eps is None else apply_loss(state.rho, eps)
    if map_text is not None:
        rho = apply_gaussian_map(rho, parse_map(map_text), args.dim)
    _emit(json.dumps(rho.to_json_dict()) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=None, help="Fock truncation dimension")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    for name in ("norm", "herm", "trace", "psd", "truncation"):
        common.add_argument(f"--tol-{name}", type=float, default=getattr(DEFAULT_TOL, f"{name}_tol"))
    common.add_argument("--tol-decision", type=float, default=DECISION_TOL)

    parser = argparse.ArgumentParser(prog="wigwitness", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("witness", parents=[common], help="evaluate the indicator for one state")
    p.add_argument("state")
    p.add_argument("tokens", nargs="*", metavar="loss:EPS|MAP")

    p = sub.add_parser("sweep", parents=[common], help="write a CSV sweep")
    p.add_argument("tag", help="figure tag or 'custom'")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--r")
    p.add_argument("--alpha")
    p.add_argument("--m")
    p.add_argument("--eps", help="sweep delta over eps instead of computing eps_max")
    p.add_argument("--criterion", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("oracle", parents=[common], help="run a cross-check campaign")
    p.add_argument("campaign", choices=("hull", "closed-forms"))
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--max-energy", type=float, default=4.0)
    p.add_argument("--maps", type=int, default=10)
    p.add_argument("--route", choices=("moments", "fock"), default="moments")
    p.add_argument("--tol", type=float, default=1e-7, help="closed-form tolerance")

    p = sub.add_parser("state", help="state utilities")
    ssub = p.add_subparsers(dest="action", required=True)
    d = ssub.add_parser("dump", parents=[common], help="print a density matrix as JSON")
    d.add_argument("state")
    d.add_argument("tokens", nargs="*", metavar="loss:EPS|MAP")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "witness":
            return cmd_witness(args)
        if args.command == "sweep":
            return cmd_sweep(args, argv)
        if args.command == "oracle":
            return cmd_oracle(args)
        return cmd_state(args)
    except (WitnessError, ValueError, OSError, KeyError) as exc:
        print(f"wigwitness: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
