"""Command-line entry point: ``python -m conegauge <command> ...``.

Artifacts go to stdout (or --output); logs and errors go to stderr.
"""
import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel

from . import config
from .cones import ConeSpec
from .decomposition import decompose
from .duality import build_form
from .errors import ConeGaugeError, InvalidPayloadError
from .gauges import gauge, gauge_oracle, gauge_witness, metric_function, METRICS
from .horofunctions import detour_empirical, detour_formula, evaluate, is_singleton
from .maps import ConeMap, classify, evaluate as apply_map, vinberg_star
from .plotting import render_section
from .schemas import dump_json, load_json, parse_cone, parse_horofunction, parse_map, to_plain
from .suite import print_summary, run_suite, suite_csv

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    command: Literal["dist", "gauge", "star", "verify-map", "build-form", "horo-eval", "detour",
                     "singleton-check", "decompose", "suite", "plot"]
    cone: Optional[str] = None
    cone_prime: Optional[str] = None
    map: Optional[str] = None
    payload: Optional[str] = None
    eta: Optional[str] = None
    seed: int = config.DEFAULT_SEED
    samples: int = config.DEFAULT_SAMPLES
    tol: Optional[float] = None
    output: Optional[str] = None
    format: Literal["json", "csv", "svg"] = "json"
    options: Dict[str, Any] = {}


# ---------------------------------------------------------------------------
# Argument parsing

def parse_vector(text: str) -> np.ndarray:
    """A vector written as a JSON list or as comma-separated numbers."""
    text = text.strip()
    try:
        values = json.loads(text) if text.startswith("[") else [float(v) for v in text.split(",")]
    except ValueError as e:
        raise InvalidPayloadError(f"cannot read vector '{text}': {e}") from None
    return np.asarray(values, dtype=float)


def parse_vectors(text: str) -> List[np.ndarray]:
    """Semicolon-separated vectors."""
    return [parse_vector(part) for part in text.split(";") if part.strip()]


def _document(text: str) -> Any:
    """Inline JSON or a path to a JSON file."""
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidPayloadError(f"inline JSON is invalid: {e}") from None
    return load_json(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED,
                        help=f"Seed for every sampler (default: {config.DEFAULT_SEED}, env CONEGAUGE_SEED).")
    common.add_argument("--samples", type=int, default=config.DEFAULT_SAMPLES,
                        help=f"Sample count (default: {config.DEFAULT_SAMPLES}).")
    common.add_argument("--tol", type=float, default=None, help="Tolerance override for checks.")
    common.add_argument("--output", "-o", default=None, help="Write the artifact here instead of stdout.")
    common.add_argument("--format", choices=["json", "csv", "svg"], default="json", help="Artifact format.")

    parser = argparse.ArgumentParser(prog="conegauge",
                                     description="Gauges, metrics, maps and horofunctions on convex cones.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, cone: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        if cone:
            p.add_argument("--cone", required=True, help="Cone spec: JSON file or inline JSON.")
        return p

    p = command("dist", "Distance between two interior points.")
    p.add_argument("--metric", choices=sorted(METRICS), default="hilbert")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)

    p = command("gauge", "Gauge M(x/y), optionally with its witness and the bisection oracle.")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--oracle", action="store_true")

    p = command("star", "Image of x under the closed-form star map.")
    p.add_argument("--x", required=True)

    p = command("verify-map", "Classify a map from the map DSL.", cone=False)
    p.add_argument("--map", required=True)
    p.add_argument("--cone", default=None, help="Source cone if the map document has none.")

    p = command("build-form", "Bilinear form certificate of a gauge-reversing involution.")
    p.add_argument("--map", default=None, help="Defaults to the star map of the cone.")

    p = command("horo-eval", "Evaluate a horofunction payload at an interior point.")
    p.add_argument("--payload", required=True)
    p.add_argument("--y", required=True)

    p = command("detour", "Detour cost and metric between two horofunctions.")
    p.add_argument("--xi", dest="payload", required=True)
    p.add_argument("--eta", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--formula", dest="empirical", action="store_false")
    mode.add_argument("--empirical", dest="empirical", action="store_true")
    p.add_argument("--grid", type=int, default=10_000, help="Empirical grid size.")
    p.set_defaults(empirical=False)

    p = command("singleton-check", "Whether a Busemann point forms its own part.")
    p.add_argument("--payload", required=True)

    p = command("decompose", "Split a Thompson isometry into homogeneous and anti-homogeneous factors.")
    p.add_argument("--cone-prime", default=None, help="Target cone (defaults to --cone).")
    p.add_argument("--map", required=True)

    p = command("suite", "Run the acceptance battery.", cone=False)
    speed = p.add_mutually_exclusive_group()
    speed.add_argument("--quick", dest="quick", action="store_true", default=True)
    speed.add_argument("--full", dest="quick", action="store_false")
    p.add_argument("--only", default=None, help="Comma-separated criterion numbers.")

    p = command("plot", "SVG of a cross-section with Hilbert balls and geodesics.")
    p.add_argument("--centers", default="", help="Semicolon-separated centers.")
    p.add_argument("--radii", default="", help="Comma-separated radii.")
    p.add_argument("--geodesic", action="append", default=[], help="Pair 'x;y'; may repeat.")
    p.add_argument("--resolution", type=int, default=180)
    p.add_argument("--title", default="")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = set(RunConfig.model_fields) - {"options"}
    values = vars(args)
    return RunConfig(
        **{k: v for k, v in values.items() if k in fields and v is not None},
        options={k: v for k, v in values.items() if k not in fields},
    )


# ---------------------------------------------------------------------------
# Commands

def _cone(cfg: RunConfig, which: str = "cone") -> ConeSpec:
    text = getattr(cfg, which)
    if text is None:
        raise InvalidPayloadError(f"--{which.replace('_', '-')} is required")
    return parse_cone(_document(text))


def _map(cfg: RunConfig, source: Optional[ConeSpec] = None) -> ConeMap:
    return parse_map(_document(cfg.map), source)


# gauges each metric is built from: M(x/y) forward, M(y/x) backward
WITNESSES = {
    "funk": ("forward",),
    "rfunk": ("backward",),
    "hilbert": ("forward", "backward"),
    "thompson": ("forward", "backward"),
}


def cmd_dist(cfg: RunConfig) -> Dict[str, Any]:
    cone = _cone(cfg)
    x, y = parse_vector(cfg.options["x"]), parse_vector(cfg.options["y"])
    metric = cfg.options["metric"]
    value = metric_function(metric)(cone, x, y)
    result: Dict[str, Any] = {"metric": metric, "value": value}
    if np.isfinite(value):
        pairs = {"forward": (x, y), "backward": (y, x)}
        result["witness"] = {side: gauge_witness(cone, *pairs[side]) for side in WITNESSES[metric]}
    return result


def cmd_gauge(cfg: RunConfig) -> Dict[str, Any]:
    cone = _cone(cfg)
    x, y = parse_vector(cfg.options["x"]), parse_vector(cfg.options["y"])
    result: Dict[str, Any] = {"gauge": gauge(cone, x, y)}
    if cfg.options.get("witness"):
        result["witness"] = gauge_witness(cone, x, y)
    if cfg.options.get("oracle"):
        result["oracle"] = gauge_oracle(cone, x, y)
    return result


def cmd_star(cfg: RunConfig) -> Dict[str, Any]:
    cone = _cone(cfg)
    x = parse_vector(cfg.options["x"])
    return {"x": x, "star": apply_map(vinberg_star(cone), x)}


def cmd_verify_map(cfg: RunConfig) -> BaseModel:
    source = _cone(cfg) if cfg.cone else None
    return classify(_map(cfg, source), samples=cfg.samples, seed=cfg.seed, tol=cfg.tol or config.CLASSIFY_TOL)


def cmd_build_form(cfg: RunConfig) -> BaseModel:
    cone = _cone(cfg)
    phi = _map(cfg, cone) if cfg.map else vinberg_star(cone)
    return build_form(cone, phi, samples=cfg.samples, seed=cfg.seed, gate_tol=cfg.tol or 1e-6)


def cmd_horo_eval(cfg: RunConfig) -> Dict[str, Any]:
    cone = _cone(cfg)
    h = parse_horofunction(_document(cfg.payload), cone)
    y = parse_vector(cfg.options["y"])
    return {"tag": h.tag, "metric": h.metric, "value": evaluate(h, y)}


def cmd_detour(cfg: RunConfig) -> Dict[str, Any]:
    cone = _cone(cfg)
    xi = parse_horofunction(_document(cfg.payload), cone)
    eta = parse_horofunction(_document(cfg.eta), cone)
    if cfg.options.get("empirical"):
        forward = detour_empirical(cone, xi, eta, count=cfg.options["grid"], seed=cfg.seed)
        backward = detour_empirical(cone, eta, xi, count=cfg.options["grid"], seed=cfg.seed)
        return {"mode": "empirical", "H": forward, "H_reverse": backward, "delta_lower_bound": forward + backward}
    value = detour_formula(xi, eta)
    return {"mode": "formula", "H": value.H, "delta": value.delta}


def cmd_singleton_check(cfg: RunConfig) -> Dict[str, Any]:
    cone = _cone(cfg)
    h = parse_horofunction(_document(cfg.payload), cone)
    return {"tag": h.tag, "singleton": is_singleton(h)}


def cmd_decompose(cfg: RunConfig) -> BaseModel:
    cone = _cone(cfg)
    cone_prime = _cone(cfg, "cone_prime") if cfg.cone_prime else cone
    phi = parse_map(_document(cfg.map), cone)
    return decompose(cone, cone_prime, phi, samples=cfg.samples, seed=cfg.seed)


def cmd_suite(cfg: RunConfig) -> BaseModel:
    only = cfg.options.get("only")
    numbers = [int(n) for n in only.split(",")] if only else None
    report = run_suite(quick=cfg.options.get("quick", True), seed=cfg.seed, only=numbers)
    print_summary(report)
    return report


def cmd_plot(cfg: RunConfig) -> str:
    cone = _cone(cfg)
    radii = [float(r) for r in cfg.options["radii"].split(",") if r.strip()]
    geodesics = []
    for pair in cfg.options["geodesic"]:
        points = parse_vectors(pair)
        if len(points) != 2:
            raise InvalidPayloadError(f"geodesic '{pair}' needs exactly two points")
        geodesics.append(tuple(points))
    return render_section(cone, centers=parse_vectors(cfg.options["centers"]), radii=radii,
                          geodesics=geodesics, resolution=cfg.options["resolution"],
                          title=cfg.options["title"])


HANDLERS = {
    "dist": cmd_dist,
    "gauge": cmd_gauge,
    "star": cmd_star,
    "verify-map": cmd_verify_map,
    "build-form": cmd_build_form,
    "horo-eval": cmd_horo_eval,
    "detour": cmd_detour,
    "singleton-check": cmd_singleton_check,
    "decompose": cmd_decompose,
    "suite": cmd_suite,
    "plot": cmd_plot,
}


# ---------------------------------------------------------------------------
# Output

def flatten(payload: Any, prefix: str = "") -> List[List[str]]:
    """key,value rows for the scalar leaves of a report."""
    rows = []
    if isinstance(payload, dict):
        for key in sorted(payload):
            rows.extend(flatten(payload[key], f"{prefix}{key}."))
    elif not isinstance(payload, list):
        rows.append([prefix.rstrip("."), json.dumps(payload) if isinstance(payload, str) else str(payload)])
    return rows


def render(cfg: RunConfig, result: Any) -> str:
    if isinstance(result, str):
        # plot: SVG regardless of --format json
        if cfg.format == "csv":
            raise InvalidPayloadError(f"{cfg.command} only produces SVG")
        return result
    if cfg.format == "svg":
        raise InvalidPayloadError(f"{cfg.command} does not produce SVG")
    if cfg.format == "json":
        return dump_json(result)
    if cfg.command == "suite":
        return suite_csv(result)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["key", "value"])
    writer.writerows(flatten(to_plain(result)))
    return buffer.getvalue()


def exit_status(cfg: RunConfig, result: Any) -> int:
    if cfg.command == "suite" and not result.passed:
        return 2
    if cfg.command == "decompose" and not result.ok:
        return 2
    return 0


def run(cfg: RunConfig) -> int:
    """Dispatch one command, write its artifact and return the exit status."""
    logger.info("running %s (seed %d, samples %d)", cfg.command, cfg.seed, cfg.samples)
    result = HANDLERS[cfg.command](cfg)
    text = render(cfg, result)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
        logger.info("wrote %s", cfg.output)
    else:
        sys.stdout.write(text)
    return exit_status(cfg, result)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return run(config_from_args(args))
    except ConeGaugeError as e:
        logger.debug("command failed", exc_info=True)
        sys.stderr.write(json.dumps(to_plain(e.to_dict()), sort_keys=True) + "\n")
        return e.status


if __name__ == "__main__":
    sys.exit(main())
