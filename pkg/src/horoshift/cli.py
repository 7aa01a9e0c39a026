"""Command-line entry point: ``horoshift <subcommand> [flags]``.

Every run writes its artifacts into ``--out`` together with a
``manifest.json`` listing each output file and its sha256.  Exit codes:
0 ok, 2 config, 3 precondition, 4 resource cap, 5 invariant breach (the last
also writes ``diagnostic.json``).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import random
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .cayley_ball import build_ball
from .errors import ConfigError, HoroshiftError, InvariantBreach
from .gradient import (fellow_travel_profile, gradient_ray, is_gradient_arc,
                       path_from_ray)
from .group_model import GroupSpec, RayWalk, load_group, load_ray
from .horoworld import (convergence_witness, horosphere, ray_vertices)
from .morse_metrics import contraction_profile, gauge_estimate
from .rays_fields import (busemann, check_distance_like, check_lipschitz,
                          field_from_function, load_field_csv, translate)
from .symbolic import (derivative, forbidden_scan, integrate, load_derivative_csv,
                       load_forbidden_json, loop_check, shift_act)

SUBCOMMANDS = ("ball", "busemann", "gradient", "morse-test", "contraction-test",
               "derivative", "integrate", "shift-check", "horosphere", "figures")
FORMATS = ("json", "csv", "dot")


@dataclass
class RunConfig:
    group: str = "z2"
    rays: list = field(default_factory=list)
    radius: int = 4
    margin: int = 2
    budget_geodesic: int = 10_000
    budget_quasi: int = 4
    budget_vertices: int = 5_000_000
    budget_samples: int = 50
    gauges: list = field(default_factory=lambda: [[3, 0]])
    seed: int | None = None
    policy: str = "first"
    out: str = "horoshift-out"
    format: str | None = None
    field_path: str | None = None
    derivative_path: str | None = None
    forbidden_path: str | None = None
    base: str = "1"
    base_value: int = 0
    horizon: int | None = None
    timing: bool = False

    def validate(self) -> "RunConfig":
        for name in ("budget_geodesic", "budget_quasi", "budget_vertices", "budget_samples"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.radius < 0:
            raise ConfigError("radius must be nonnegative")
        if self.margin < 0:
            raise ConfigError("margin must be nonnegative")
        if not self.gauges:
            raise ConfigError("the (lambda, epsilon) list is empty")
        for pair in self.gauges:
            if len(pair) != 2:
                raise ConfigError(f"gauge {pair!r} is not a (lambda, epsilon) pair")
        if self.policy not in ("first", "random", "all"):
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.policy == "random" and self.seed is None:
            raise ConfigError("policy 'random' needs --seed")
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        return self

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def budgets(self) -> dict:
        return {"geodesic_cap": self.budget_geodesic, "quasi_geodesic": self.budget_quasi,
                "vertex_cap": self.budget_vertices, "samples": self.budget_samples,
                "gauges": [[str(lam), eps] for lam, eps in self.gauges]}


def parse_gauges(text: str) -> list:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            lam, eps = chunk.split(",")
            out.append([str(Fraction(lam.strip())), int(eps)])
        except ValueError as exc:
            raise ConfigError(f"bad gauge {chunk!r}, expected 'lam,eps'") from exc
    return out


# --------------------------------------------------------------------------
# input resolution: a path, or the name of a shipped fixture

def resolve_group(spec: str) -> GroupSpec:
    if Path(spec).exists():
        return load_group(spec)
    if spec in fixtures.GROUPS:
        return fixtures.group(spec)
    raise ConfigError(f"no group file or fixture named {spec!r}")


def resolve_ray(group: GroupSpec, spec: str) -> RayWalk:
    if Path(spec).exists():
        return load_ray(group, spec)
    if spec in fixtures.RAYS:
        return fixtures.ray(spec, group)
    raise ConfigError(f"no ray file or fixture named {spec!r}")


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _input_record(spec: str) -> dict:
    p = Path(spec)
    if p.exists():
        return {"path": str(p), "sha256": _sha(p.read_bytes())}
    return {"fixture": spec}


class Outputs:
    """Collects artifact files under one directory for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: dict[str, str] = {}

    def write(self, rel: str, text: str):
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        path.write_bytes(data)
        self.files[rel] = _sha(data)

    def json(self, rel: str, obj):
        self.write(rel, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _wants(cfg: RunConfig, fmt: str) -> bool:
    return cfg.format is None or cfg.format == fmt


def _rays(cfg: RunConfig, group: GroupSpec, need: int = 1) -> list[RayWalk]:
    if len(cfg.rays) < need:
        raise ConfigError(f"this subcommand needs {need} --ray argument(s)")
    return [resolve_ray(group, r) for r in cfg.rays]


def _field(cfg, ball, group):
    if cfg.field_path:
        try:
            text = Path(cfg.field_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read field {cfg.field_path}: {exc}") from exc
        return load_field_csv(ball, text)
    return busemann(ball, _rays(cfg, group)[0])


# --------------------------------------------------------------------------
# subcommands

def cmd_ball(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    if _wants(cfg, "dot"):
        out.write("ball.dot", ball.to_dot())
    if _wants(cfg, "csv"):
        out.write("ball.csv", ball.distance_csv())
    if _wants(cfg, "json"):
        out.json("ball.json", {"group": group.to_dict(), "radius": cfg.radius,
                               "vertices": len(ball), "edges": len(ball.edges) // 2})


def cmd_busemann(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    h = _field(cfg, ball, group)
    if _wants(cfg, "csv"):
        out.write("field.csv", h.to_csv())
    if _wants(cfg, "json"):
        lip = check_lipschitz(h)
        rep = {"lipschitz": lip.to_dict()}
        if cfg.radius > cfg.margin:
            rep["distance_like"] = check_distance_like(h, cfg.margin).to_dict()
        if h.t_stab is not None:
            rep["max_stabilization_time"] = int(h.t_stab.max())
        out.json("report.json", rep)


def cmd_gradient(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    rays = _rays(cfg, group)
    h = busemann(ball, rays[0])
    center = ball.index[ball.center]
    res = gradient_ray(h, center, cfg.policy, cfg.seed, margin=cfg.margin, cap=cfg.budget_geodesic)
    paths = res.paths if cfg.policy == "all" else [res]
    if _wants(cfg, "dot"):
        hl = {v: "gradient" for p in paths for v in p.vertices}
        out.write("successors.dot", ball.to_dot(hl))
    report = {"policy": cfg.policy, "paths": [[ball.label(v) for v in p.vertices] for p in paths],
              "truncated": bool(getattr(res, "truncated", False))}
    if len(rays) >= 2:
        length = ball.radius - cfg.margin
        alpha, beta = (path_from_ray(ball, c, length) for c in rays[:2])
        report["rays_are_gradient_arcs"] = [is_gradient_arc(h, alpha.vertices),
                                            is_gradient_arc(h, beta.vertices)]
        prof = fellow_travel_profile(alpha, beta, ball, h)
        if _wants(cfg, "csv"):
            out.write("profile.csv", prof.to_csv())
    if _wants(cfg, "json"):
        out.json("gradient.json", report)


def _segment(cfg, group):
    c = _rays(cfg, group)[0]
    return c.points(cfg.radius)


def cmd_morse_test(cfg, out):
    group = resolve_group(cfg.group)
    gamma = _segment(cfg, group)
    est = gauge_estimate(group, gamma, [(Fraction(lam), int(eps)) for lam, eps in cfg.gauges],
                         cfg.budget_quasi)
    out.json("morse.json", {"quantity": "quasi-geodesic excursion N_hat",
                            "segment": [group.format(x) for x in gamma],
                            "budget": cfg.budget_quasi, **est.to_dict()})


def cmd_contraction_test(cfg, out):
    group = resolve_group(cfg.group)
    gamma = _segment(cfg, group)
    radii = range(1, max(cfg.margin, 1) + 1)
    prof = contraction_profile(group, gamma, radii)
    if _wants(cfg, "csv"):
        out.write("contraction.csv", prof.to_csv())
    if _wants(cfg, "json"):
        out.json("contraction.json", {"quantity": "projection diameter", "d_hat": prof.d_hat,
                                      "verdict": prof.verdict, "witnesses": prof.samples,
                                      "scope": f"radii 1..{max(cfg.margin, 1)}",
                                      "budget": {"segment_length": cfg.radius}})


def cmd_derivative(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    sigma = derivative(_field(cfg, ball, group))
    out.write("derivative.csv", sigma.to_csv())
    out.json("loop_check.json", loop_check(sigma).to_dict())


def cmd_integrate(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    if not cfg.derivative_path:
        raise ConfigError("integrate needs --derivative")
    try:
        text = Path(cfg.derivative_path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {cfg.derivative_path}: {exc}") from exc
    sigma = load_derivative_csv(ball, text)
    h = integrate(sigma, ball.vertex(cfg.base), cfg.base_value)
    out.write("field.csv", h.to_csv())


def cmd_shift_check(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    h = _field(cfg, ball, group)
    sigma = derivative(h)
    rng = random.Random(cfg.seed if cfg.seed is not None else 0)
    inner = [v for v in range(len(ball)) if ball.dist_from_center[v] <= max(ball.radius // 2, 0)]
    rows = []
    for _ in range(cfg.budget_samples):
        g = ball.vertices[rng.choice(inner)]
        lhs = derivative(translate(h, g))
        rhs = shift_act(g, sigma)
        rows.append({"g": group.format(g), "equal_on_overlap": lhs.equal_on_overlap(rhs)})
    report = {"samples": rows, "pass": all(r["equal_on_overlap"] for r in rows)}
    if cfg.forbidden_path:
        try:
            forb = load_forbidden_json(group, Path(cfg.forbidden_path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {cfg.forbidden_path}: {exc}") from exc
        scan = forbidden_scan(sigma, forb)
        report["forbidden_scan"] = {"positions_tested": scan.positions_tested,
                                    "matches": [[ball.label(p), k] for p, k in scan.matches]}
    out.json("shift_check.json", report)


def _horosphere_dot(h, c, horizon):
    ball = h.ball
    hl = {}
    for n in range(1, horizon + 1):
        for v in horosphere(h, n).members:
            hl[v] = "horosphere"
    for v in ray_vertices(ball, c, min(ball.radius, c.max_t or ball.radius)):
        hl[v] = "ray"
    return ball.to_dot(hl)


def cmd_horosphere(cfg, out):
    group = resolve_group(cfg.group)
    ball = build_ball(group, radius=cfg.radius, cap=cfg.budget_vertices)
    c = _rays(cfg, group)[0]
    h = busemann(ball, c)
    horizon = cfg.horizon if cfg.horizon is not None else cfg.radius
    rep = convergence_witness(h, c, horizon)
    if _wants(cfg, "csv"):
        out.write("horospheres.csv", rep.to_csv())
    if _wants(cfg, "dot"):
        out.write("horospheres.dot", _horosphere_dot(h, c, horizon))
    if _wants(cfg, "json"):
        out.json("witness.json", rep.to_dict())


# --------------------------------------------------------------------------
# figures

def figure2(out):
    z2 = fixtures.group("z2")
    ball = build_ball(z2, radius=6)
    h = field_from_function(ball, lambda x: -dict(x).get(0, (0, 0))[0])
    sigma = derivative(h)
    expected = {"a": -1, "a'": 1, "b": 0, "b'": 0}
    names = z2.letter_names
    letters = {sigma.letter(v) for v in range(len(ball)) if ball.is_interior(v)}
    match = letters == {tuple(expected[n] for n in names)}
    out.write("fig2/derivative.csv", sigma.to_csv())
    out.json("fig2/verdict.json", {"expected_letter": expected, "constant_on_interior": match})
    return match


def figure4(out):
    z2 = fixtures.group("z2")
    red, blue = fixtures.ray("z2_staircase_red", z2), fixtures.ray("z2_staircase_blue", z2)
    ball = build_ball(z2, radius=10)
    h = busemann(ball, red)
    ref = field_from_function(ball, lambda x: -sum(dict(x).get(0, (0, 0))))
    alpha, beta = path_from_ray(ball, red, 10), path_from_ray(ball, blue, 10)
    prof = fellow_travel_profile(alpha, beta, ball, h)
    verdict = {"field_equals_minus_x_minus_y": h.equal_on_overlap(ref),
               "red_is_gradient": is_gradient_arc(h, alpha.vertices),
               "blue_is_gradient": is_gradient_arc(h, beta.vertices),
               "profile_at_8": prof[8], "nondecreasing_8_to_10": prof.nondecreasing_between(8, 10)}
    out.write("fig4/profile.csv", prof.to_csv())
    out.json("fig4/verdict.json", verdict)
    return all(v for k, v in verdict.items() if k != "profile_at_8") and prof[8] == 8


def figure7(out):
    z2 = fixtures.group("z2")
    c = fixtures.ray("z2_x_axis", z2)
    ball = build_ball(z2, radius=10)
    h = busemann(ball, c)
    rep = convergence_witness(h, c, 6)
    out.write("fig7/horospheres.csv", rep.to_csv())
    out.write("fig7/horospheres.dot", _horosphere_dot(h, c, 6))
    out.json("fig7/witness.json", rep.to_dict())
    return rep.verdict == "divergence-witness"


def figure8(out):
    f2 = fixtures.group("f2")
    c = fixtures.ray("f2_a", f2)
    ball = build_ball(f2, radius=6)
    h = busemann(ball, c)
    rep = convergence_witness(h, c, 6)
    out.write("fig8/horospheres.csv", rep.to_csv())
    out.write("fig8/horospheres.dot", _horosphere_dot(h, c, 6))
    out.json("fig8/witness.json", rep.to_dict())
    ok = rep.verdict == "convergent-evidence" and all(2 * m >= n for n, _, m, _ in rep.rows)
    return ok


def cmd_figures(cfg, out):
    results = {"fig2": figure2(out), "fig4": figure4(out), "fig7": figure7(out),
               "fig8": figure8(out)}
    out.json("figures.json", results)


COMMANDS = {
    "ball": cmd_ball, "busemann": cmd_busemann, "gradient": cmd_gradient,
    "morse-test": cmd_morse_test, "contraction-test": cmd_contraction_test,
    "derivative": cmd_derivative, "integrate": cmd_integrate,
    "shift-check": cmd_shift_check, "horosphere": cmd_horosphere, "figures": cmd_figures,
}


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="horoshift", description="Horofunction and Morse-boundary experiments on Cayley balls.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="RunConfig JSON; flags override its values")
    p.add_argument("--group")
    p.add_argument("--ray", action="append", dest="rays")
    p.add_argument("--radius", type=int)
    p.add_argument("--margin", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--budget-geodesic", type=int)
    p.add_argument("--budget-quasi", type=int)
    p.add_argument("--budget-vertices", type=int)
    p.add_argument("--budget-samples", type=int)
    p.add_argument("--gauge", help="semicolon-separated 'lam,eps' pairs, e.g. '3,0;2,1'")
    p.add_argument("--seed", type=int)
    p.add_argument("--policy", choices=("first", "random", "all"))
    p.add_argument("--field", dest="field_path")
    p.add_argument("--derivative", dest="derivative_path")
    p.add_argument("--forbidden", dest="forbidden_path")
    p.add_argument("--base")
    p.add_argument("--base-value", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--timing", action="store_true", default=None,
                   help="record wall time in the manifest (breaks byte determinism)")
    return p


def make_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    for f in fields(RunConfig):
        if f.name == "gauges":
            continue
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    if args.gauge is not None:
        cfg.gauges = parse_gauges(args.gauge)
    return cfg.validate()


def _manifest(subcommand, cfg, out, elapsed):
    inputs = {"group": _input_record(cfg.group), "rays": [_input_record(r) for r in cfg.rays]}
    for key in ("field_path", "derivative_path", "forbidden_path", "config"):
        val = getattr(cfg, key, None)
        if val:
            inputs[key] = _input_record(val)
    config = asdict(cfg)
    config.pop("out")  # the output location is not part of the experiment
    man = {"subcommand": subcommand, "config": config, "inputs": inputs,
           "budgets": cfg.budgets(),
           "versions": {"horoshift": __version__, "numpy": np.__version__,
                        "python": platform.python_version()},
           "outputs": [{"path": k, "sha256": v} for k, v in sorted(out.files.items())]}
    if cfg.timing:
        man["wall_time_s"] = round(elapsed, 3)
    return man


def run(subcommand: str, cfg: RunConfig) -> int:
    root = Path(cfg.out)
    root.mkdir(parents=True, exist_ok=True)
    out = Outputs(root)
    t0 = time.perf_counter()
    try:
        COMMANDS[subcommand](cfg, out)
    except InvariantBreach as exc:
        dump = {"subcommand": subcommand, "config": asdict(cfg), "error": str(exc),
                "traceback": traceback.format_exc()}
        (root / "diagnostic.json").write_text(json.dumps(dump, indent=2, default=str) + "\n")
        print(f"invariant breach: {exc}", file=sys.stderr)
        return exc.exit_code
    except HoroshiftError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    man = _manifest(subcommand, cfg, out, time.perf_counter() - t0)
    (root / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True, default=str) + "\n")
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
