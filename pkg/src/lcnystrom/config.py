"""Flat ``key = value`` config files and the objects they describe."""

from __future__ import annotations

from .errors import ConfigError
from .geometry import make_surface
from .kernels import make_kernels
from .oracle import make_problem

DEFAULTS = {
    "surface.kind": "sphere",
    "surface.semi_axes": (1.0, 1.0, 1.0),
    "surface.eps": 0.1,
    "surface.lyapunov_radius": None,
    "mesh.level": 2,
    "mesh.max_level": 7,
    "quad.q": 2,
    "pou.theta": 0.99,
    "pou.kappa_scale": 1.5,
    "pou.ramp": "quadratic",
    "kernel.type": "laplace_dl",
    "kernel.completion": "ones",
    "equation.c": 1.0,
    "correction.p": 0,
    "moments.accuracy": 1e-9,
    "moments.analytic_dl": True,
    "solver.path": "general",
    "problem.solution": "y1",
    "seed": 0,
    "levels": (1, 2, 3),
}


def _coerce(text):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", ""):
        return None
    if ".." in text:
        a, b = text.split("..", 1)
        return tuple(range(int(a), int(b) + 1))
    if "," in text:
        return tuple(float(part) for part in text.split(","))
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config(text):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = _coerce(value)
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_surface(cfg):
    return make_surface(cfg["surface.kind"], cfg["surface.semi_axes"],
                        cfg["surface.eps"], cfg["surface.lyapunov_radius"])


def config_kernels(cfg):
    return make_kernels(cfg["kernel.type"], cfg["kernel.completion"],
                        cfg["equation.c"])


def config_problem(cfg, surface=None, kernels=None):
    surface = surface if surface is not None else config_surface(cfg)
    kernels = kernels if kernels is not None else config_kernels(cfg)
    return make_problem(surface, kernels, cfg["problem.solution"])


def levels_from(cfg, override=None):
    levels = override if override is not None else cfg["levels"]
    if isinstance(levels, (int, float)):
        levels = (int(levels),)
    return [int(v) for v in levels]
