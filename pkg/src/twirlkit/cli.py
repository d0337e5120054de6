"""Command-line front end: ``twirlkit classify|attractors|simulate|optimize|reproduce``.

Exit status: 0 success, 1 input error, 2 classifier/oracle disagreement.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, TextIO

from . import io
from .attractors import attractor_space_eig, check_convergence_to_twirl, is_collective
from .channels import ChannelError, UnitaryEnsemble, build_superoperator
from .convergence import (
    distance_series,
    optimize_construction,
    optimize_probabilities,
    random_baseline,
    trace_convergence,
)
from .linalg import LinalgError, subspace_distance
from .qubit import classify_multi, fig1_m_set, fig1_n_set
from .qudit import ConstructionError, ConstructionSpec, Variant, build_ensemble

log = logging.getLogger("twirlkit")

EXIT_OK, EXIT_INPUT, EXIT_DISAGREE = 0, 1, 2
COMMANDS = ("classify", "attractors", "simulate", "optimize", "reproduce")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: Path | None = None
    d: int | None = None
    n_max: int = 100
    seed: int = 0
    output_path: Path | None = None
    format: str = "csv"
    restarts: int = 10
    verbose: bool = False
    figure: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise io.InputError(f"unknown command {self.command!r}")
        if self.n_max < 1:
            raise io.InputError("--n-max must be at least 1")
        if self.restarts < 1:
            raise io.InputError("--restarts must be at least 1")
        if self.input_path is not None and not self.input_path.exists():
            raise io.InputError(f"no such file: {self.input_path}")


@contextlib.contextmanager
def _output(cfg: RunConfig) -> Iterator[TextIO]:
    if cfg.output_path is None:
        yield sys.stdout
    else:
        with open(cfg.output_path, "w", newline="") as fh:
            yield fh


def _write_json(cfg: RunConfig, obj) -> None:
    with _output(cfg) as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def _write_rows(cfg: RunConfig, header: list[str], rows) -> None:
    with _output(cfg) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _ensemble(cfg: RunConfig) -> UnitaryEnsemble:
    """Ensemble from --input, or the default three-member construction for --d."""
    if cfg.input_path is not None:
        return io.load_any(cfg.input_path)
    if cfg.d is not None:
        return build_ensemble(ConstructionSpec(cfg.d))
    raise io.InputError("need --input or --d")


def cmd_classify(cfg: RunConfig) -> int:
    if cfg.input_path is None:
        raise io.InputError("classify needs --input")
    data = io.load_json(cfg.input_path)
    probs, blocks = io.single_blocks(data)
    if blocks[0].shape != (2, 2):
        raise io.InputError("classify needs 2x2 qubit blocks or factorable 4x4 u (x) u members")
    try:
        e = UnitaryEnsemble.collective(blocks, probs)
    except ChannelError as exc:
        raise io.InputError(str(exc)) from None
    verdict = classify_multi(blocks)
    report = check_convergence_to_twirl(e)
    agree = verdict.converges == report.converges_to_twirl
    out = {
        "verdict": verdict.to_json(),
        "oracle": {
            "converges": report.converges_to_twirl,
            "fixed_point_dim": report.fixed_point_dim,
            "stationary": report.stationary,
            "subdominant_modulus": report.subdominant_modulus,
        },
        "agree": agree,
    }
    _write_json(cfg, out)
    if not agree:
        log.error("classifier and spectral oracle disagree")
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_attractors(cfg: RunConfig) -> int:
    e = _ensemble(cfg)
    try:
        report = check_convergence_to_twirl(e)
    except ChannelError:
        # not a bipartite collective ensemble: spectral data only
        report = attractor_space_eig(build_superoperator(e))
    if cfg.format == "json":
        out = report.to_json()
        out["collective"] = is_collective(e) if e.dim >= 4 else False
        out["twirl_subspace_distance"] = report.twirl_subspace_distance
        _write_json(cfg, out)
    else:
        rows = [(lam.real, lam.imag, len(report.attractor_bases[lam])) for lam in report.asymptotic_spectrum]
        _write_rows(cfg, ["lambda_re", "lambda_im", "multiplicity"], rows)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    e = _ensemble(cfg)
    trace = trace_convergence(e, cfg.n_max)
    if cfg.format == "json":
        _write_json(cfg, {
            "n": trace.n_values,
            "distance": trace.distances,
            "fitted_rate": trace.fitted_rate,
            "fit_r2": trace.fit_r2,
            "fit_window": list(trace.fit_window),
            "subdominant_modulus": trace.subdominant_modulus,
        })
    else:
        _write_rows(cfg, ["n", "distance"], [(n, repr(x)) for n, x in trace.rows()])
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    """Probabilities for an ensemble file; probabilities and A for a construction."""
    spec = None
    if cfg.input_path is not None:
        data = io.load_json(cfg.input_path)
        if io.is_construction(data):
            spec = io.spec_from_json(data)
    elif cfg.d is not None:
        spec = ConstructionSpec(cfg.d)
    else:
        raise io.InputError("need --input or --d")
    if spec is not None:
        res = optimize_construction(spec, restarts=cfg.restarts, seed=cfg.seed)
    else:
        res = optimize_probabilities(io.ensemble_from_json(data), restarts=cfg.restarts, seed=cfg.seed)
    if cfg.format == "json":
        _write_json(cfg, res.to_json(verbose=cfg.verbose))
    else:
        rows = [("best_objective", res.best_objective)]
        rows += [(f"p{i + 1}", p) for i, p in enumerate(res.best_probs)]
        if res.best_A is not None:
            rows += [("phi", res.best_A.phi), ("alpha_re", res.best_A.alpha.real),
                     ("alpha_im", res.best_A.alpha.imag), ("beta_re", res.best_A.beta.real),
                     ("beta_im", res.best_A.beta.imag)]
        _write_rows(cfg, ["name", "value"], rows)
    return EXIT_OK


def fig1_series(restarts: int = 10, seed: int = 0) -> dict[str, UnitaryEnsemble]:
    """The four two-qubit ensembles of the convergence comparison."""
    m1, m2, m3 = fig1_m_set()
    pair = UnitaryEnsemble.collective([m1, m2], (0.75, 0.25))
    p2 = optimize_probabilities(pair, restarts=restarts, seed=seed).best_probs
    triple = UnitaryEnsemble.collective([m1, m2, m3])
    p3 = optimize_probabilities(triple, restarts=restarts, seed=seed).best_probs
    return {
        "M1M2@0.75": pair,
        "M1M2@optimized": pair.with_probs(p2),
        "M1M2M3@optimized": triple.with_probs(p3),
        "N-set": UnitaryEnsemble.collective(fig1_n_set()),
    }


def fig2_series(d: int = 4, restarts: int = 10, seed: int = 0) -> dict[str, UnitaryEnsemble]:
    """Random pair against the two group-coincident constructions, each with tuned probabilities."""
    spec = ConstructionSpec(d, variant=Variant.TWO_OP_ODD_D)
    ens = {
        "random": random_baseline(d, 2, seed),
        "h,uv": build_ensemble(spec),
        "uvhuv,uv": build_ensemble(spec.with_(variant=Variant.CUSTOM, words=("uvhuv", "uv"))),
    }
    out = {}
    for name, e in ens.items():
        probs = optimize_probabilities(e, restarts=restarts, seed=seed).best_probs
        out[name] = e.with_probs(probs)
    return out


def shared_fixed_space_distance(a: UnitaryEnsemble, b: UnitaryEnsemble) -> float:
    ra, rb = check_convergence_to_twirl(a), check_convergence_to_twirl(b)
    return subspace_distance(ra.fixed_space(), rb.fixed_space())


def cmd_reproduce(cfg: RunConfig) -> int:
    if cfg.figure == "fig1":
        series = fig1_series(cfg.restarts, cfg.seed)
        meta = {}
    elif cfg.figure == "fig2":
        d = cfg.d if cfg.d is not None else 4
        series = fig2_series(d, cfg.restarts, cfg.seed)
        meta = {"d": d, "fixed_space_distance": shared_fixed_space_distance(series["h,uv"], series["uvhuv,uv"])}
    else:
        raise io.InputError("reproduce needs fig1 or fig2")
    curves = {name: distance_series(build_superoperator(e), cfg.n_max) for name, e in series.items()}
    for name, e in series.items():
        log.info("%s: probabilities %s", name, ", ".join(f"{p:.4f}" for p in e.probs))
    if cfg.format == "json":
        meta["probs"] = {name: list(e.probs) for name, e in series.items()}
        _write_json(cfg, {"figure": cfg.figure, "series": curves, **meta})
    else:
        rows = [(name, n, repr(x)) for name, dist in curves.items() for n, x in enumerate(dist)]
        _write_rows(cfg, ["series", "n", "distance"], rows)
    return EXIT_OK


HANDLERS = {
    "classify": cmd_classify,
    "attractors": cmd_attractors,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, help="ensemble JSON or construction spec JSON")
    common.add_argument("--d", type=int, help="qudit dimension (default construction)")
    common.add_argument("--n-max", type=int, default=100, help="iterations (default 100)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--restarts", type=int, default=10)
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="twirlkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="algebraic verdict plus spectral oracle")
    sub.add_parser("attractors", parents=[common], help="asymptotic spectrum and attractor space")
    sub.add_parser("simulate", parents=[common], help="distance to the twirl per iteration")
    sub.add_parser("optimize", parents=[common], help="minimise the asymptotic rate")
    rep = sub.add_parser("reproduce", parents=[common], help="figure data as multi-series CSV")
    rep.add_argument("figure", choices=("fig1", "fig2"))
    return parser


def _default_format(command: str) -> str:
    return "json" if command in ("classify", "attractors", "optimize") else "csv"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig(
            command=args.command,
            input_path=args.input,
            d=args.d,
            n_max=args.n_max,
            seed=args.seed,
            output_path=args.out,
            format=args.format or _default_format(args.command),
            restarts=args.restarts,
            verbose=args.verbose,
            figure=getattr(args, "figure", None),
        )
        return HANDLERS[cfg.command](cfg)
    except (io.InputError, ChannelError, ConstructionError, LinalgError) as exc:
        print(f"twirlkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
