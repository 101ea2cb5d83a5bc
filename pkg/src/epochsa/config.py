"""Experiment configuration files.

Flat sectioned key-value text: ``[section]`` headers and ``key = value``
lines, ``#`` comments, nothing else. The format is diffable and trivially
parseable, and unknown keys are hard errors so typos cannot silently change
an experiment. Parsing is not fail-fast: every problem found is reported in
one :class:`ConfigError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .problems import Problem, make_least_squares, make_logistic
from .solvers import SOLVER_REGISTRY, BaseSolver


class ConfigError(ValueError):
    """Carries every validation message found in one pass."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ConfigFile:
    problem: dict
    solver: dict
    experiment: dict
    output: dict = field(default_factory=dict)


# (type, required) per key; kind- and algorithm-conditional keys are checked
# separately after conversion.
_SCHEMA = {
    "problem": {
        "kind": ("choice:least_squares,logistic", True),
        "d": ("int", True),
        "B": ("float", True),
        "seed": ("int", True),
        "D": ("float_list", False),
        "a": ("float", False),
        "mu": ("float", False),
        "L": ("float", False),
        "lambda": ("float", False),
        "G": ("float", False),
    },
    "solver": {
        "algorithm": ("choice:epoch_gd,fasa,epoch_gd_f,fixed_sgd", True),
        "eta1": ("float", False),
        "t1": ("int", False),
        "alpha": ("float", False),
        "beta": ("float", False),
        "gamma": ("float", False),
        "constrained": ("bool", False),
        "start": ("choice:center,boundary", False),
    },
    "experiment": {
        "budget_grid": ("int_list", True),
        "trials": ("int", True),
        "base_seed": ("int", True),
    },
    "output": {
        "csv": ("str", False),
        "svg": ("str", False),
        "epochs_csv": ("str", False),
        "verbosity": ("int", False),
    },
}

_ALGO_KEYS = {
    "epoch_gd": {"eta1", "t1"},
    "fasa": {"alpha"},
    "epoch_gd_f": {"beta"},
    "fixed_sgd": {"gamma", "constrained"},
}


def _convert(kind: str, raw: str):
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        if raw.lower() in ("true", "false"):
            return raw.lower() == "true"
        raise ValueError("expected true or false")
    if kind == "str":
        return raw
    if kind == "int_list":
        return [int(part.strip()) for part in raw.split(",") if part.strip()]
    if kind == "float_list":
        return [float(part.strip()) for part in raw.split(",") if part.strip()]
    if kind.startswith("choice:"):
        choices = kind.split(":", 1)[1].split(",")
        if raw not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return raw
    raise AssertionError(kind)


def _tokenize(text: str, errors: list):
    sections: dict[str, dict] = {}
    current_name = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            if name not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section [{name}]")
                current_name = None
            else:
                current_name = name
                sections.setdefault(name, {})
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        if current_name is None:
            errors.append(f"line {lineno}: key outside any section")
            continue
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA[current_name]:
            errors.append(f"line {lineno}: unknown key {key!r} in section [{current_name}]")
            continue
        if key in sections[current_name]:
            errors.append(f"line {lineno}: duplicate key {key!r} in section [{current_name}]")
            continue
        sections[current_name][key] = (lineno, raw)
    return sections


def _validate_problem(p: dict, errors: list):
    kind = p.get("kind")
    if "d" in p and p["d"] < 1:
        errors.append("[problem] d must be >= 1")
    if "B" in p and p["B"] <= 0:
        errors.append("[problem] B must be positive")
    if kind == "least_squares":
        if "mu" in p:
            errors.append("[problem] mu applies only to logistic problems")
        if "D" in p and any(v <= 0 for v in p["D"]):
            errors.append("[problem] D entries must all be positive")
        if "D" in p and "d" in p and len(p["D"]) not in (1, p["d"]):
            errors.append(f"[problem] D must have 1 or {p['d']} entries, got {len(p['D'])}")
        if "a" in p and p["a"] < 0:
            errors.append("[problem] a must be nonnegative")
    elif kind == "logistic":
        for key in ("D", "a"):
            if key in p:
                errors.append(f"[problem] {key!r} applies only to least_squares problems")
        if "mu" not in p:
            errors.append("[problem] missing required key 'mu' for logistic problems")
        elif p["mu"] <= 0:
            errors.append("[problem] mu must be positive")
    for key in ("L", "lambda", "G"):
        if key in p and p[key] <= 0:
            errors.append(f"[problem] {key} override must be positive")


def _validate_solver(s: dict, errors: list):
    algo = s.get("algorithm")
    if algo:
        foreign = set()
        for other, keys in _ALGO_KEYS.items():
            if other != algo:
                foreign |= keys
        foreign -= _ALGO_KEYS[algo]
        for key in sorted(foreign & set(s)):
            errors.append(f"[solver] key {key!r} does not apply to algorithm {algo!r}")
    if "alpha" in s and not s["alpha"] > 1:
        errors.append("[solver] alpha must be greater than 1")
    if "beta" in s and not s["beta"] > 1:
        errors.append("[solver] beta must be greater than 1")
    if "gamma" in s and s["gamma"] <= 0:
        errors.append("[solver] gamma must be positive")
    if "eta1" in s and s["eta1"] <= 0:
        errors.append("[solver] eta1 must be positive")
    if "t1" in s and s["t1"] < 1:
        errors.append("[solver] t1 must be >= 1")


def _validate_experiment(e: dict, errors: list):
    grid = e.get("budget_grid")
    if grid is not None:
        if not grid:
            errors.append("[experiment] budget_grid must be non-empty")
        elif any(T < 1 for T in grid):
            errors.append("[experiment] budget_grid entries must be positive")
        elif any(cur >= nxt for cur, nxt in zip(grid, grid[1:])):
            errors.append("[experiment] budget_grid must be strictly increasing")
    if "trials" in e and e["trials"] < 1:
        errors.append("[experiment] trials must be >= 1")


def parse_config(text: str) -> ConfigFile:
    """Parse and fully validate; raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    sections = _tokenize(text, errors)

    converted: dict[str, dict] = {}
    for name, schema in _SCHEMA.items():
        if name not in sections:
            if name != "output":
                errors.append(f"missing required section [{name}]")
            converted[name] = {}
            continue
        raw_section = sections[name]
        out: dict = {}
        for key, (kind, required) in schema.items():
            if key in raw_section:
                lineno, raw = raw_section[key]
                try:
                    out[key] = _convert(kind, raw)
                except ValueError as exc:
                    errors.append(f"line {lineno}: invalid value for {key!r}: {exc}")
            elif required:
                errors.append(f"[{name}] missing required key {key!r}")
        converted[name] = out

    _validate_problem(converted["problem"], errors)
    _validate_solver(converted["solver"], errors)
    _validate_experiment(converted["experiment"], errors)
    if "verbosity" in converted["output"] and converted["output"]["verbosity"] < 0:
        errors.append("[output] verbosity must be >= 0")

    if errors:
        raise ConfigError(errors)
    return ConfigFile(
        problem=converted["problem"],
        solver=converted["solver"],
        experiment=converted["experiment"],
        output=converted["output"],
    )


def load_config(path) -> ConfigFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_problem(p: dict) -> Problem:
    """Instantiate the configured problem, applying any diagnostic overrides."""
    if p["kind"] == "least_squares":
        diag = p.get("D", [1.0])
        if len(diag) == 1:
            diag = diag * p["d"]
        problem = make_least_squares(p["d"], diag, p["B"], p.get("a", 0.0), p["seed"])
    else:
        problem = make_logistic(p["d"], p["B"], p["mu"], p["seed"])
    overrides = {}
    if "L" in p:
        overrides["L"] = p["L"]
    if "lambda" in p:
        overrides["lam"] = p["lambda"]
    if "G" in p:
        overrides["G"] = p["G"]
    if overrides:
        cert = problem.constants
        new_L = overrides.get("L", cert.L)
        new_lam = overrides.get("lam", cert.lam)
        problem.constants = replace(
            cert, kappa=new_L / new_lam, **overrides
        )
    return problem


def build_solver(s: dict, budget: int = 1) -> BaseSolver:
    """Instantiate the configured solver prototype at a placeholder budget."""
    cls = SOLVER_REGISTRY[s["algorithm"]]
    kwargs = {"budget": budget, "start": s.get("start", "center")}
    for key in _ALGO_KEYS[s["algorithm"]]:
        if key in s:
            kwargs[key] = s[key]
    return cls(**kwargs)
