"""
Experiment configuration files

INI grammar read with ``configparser``::

    [problem]
    kind = lasso            ; lasso | deblur | rpca | completion
    m = 30
    ...

    [solver:fista]          ; one section per solver, name unique
    method = fista          ; defaults to the section name
    mu = auto
    max_iter = 500

    [report]
    checkpoints = 10, 50, 100
    output_dir = out/lasso

Validation collects every problem with its location instead of stopping at
the first one.
"""

import configparser
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple, Union

from altlin.errors import ConfigError
from altlin.smoothing import DEFAULT_SIGMA
from altlin.solvers import NEEDS_SMOOTH_G, SOLVERS
from altlin.solvers.config import SKIP_POLICIES, ContinuationConfig, SolverConfig

OUT_DIR_ENV = "ALTLIN_OUT_DIR"
SOLVER_PREFIX = "solver:"
PAIR_FORM_METHODS = ("alm", "falm")


class _Field(NamedTuple):
    parse: Callable[[str], Any]
    default: Any = None


def _int(raw: str) -> int:
    return int(raw)


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise ValueError(f"must be a positive integer, got {value}")
    return value


def _real(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError(f"must be finite, got {raw}")
    return value


def _positive(raw: str) -> float:
    value = _real(raw)
    if value <= 0:
        raise ValueError(f"must be positive, got {raw}")
    return value


def _non_negative(raw: str) -> float:
    value = _real(raw)
    if value < 0:
        raise ValueError(f"must be non-negative, got {raw}")
    return value


def _fraction(raw: str) -> float:
    value = _real(raw)
    if not 0 <= value <= 1:
        raise ValueError(f"must lie in [0, 1], got {raw}")
    return value


def _positive_or_auto(raw: str) -> Union[float, str]:
    return "auto" if raw.strip().lower() == "auto" else _positive(raw)


def _bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"must be a boolean, got {raw!r}")


def _path(raw: str) -> str:
    if not raw.strip():
        raise ValueError("must be a file path")
    return raw.strip()


PROBLEM_FIELDS: Dict[str, Dict[str, _Field]] = {
    "lasso": {
        "m": _Field(_positive_int, 30),
        "n": _Field(_positive_int, 50),
        "rho": _Field(_positive, 0.1),
        "seed": _Field(_int, 0),
        "sigma": _Field(_positive, DEFAULT_SIGMA),
        "a": _Field(_path),
        "b": _Field(_path),
    },
    "deblur": {
        "size": _Field(_positive_int, 32),
        "kernel_size": _Field(_positive_int, 3),
        "levels": _Field(_positive_int, 3),
        "rho": _Field(_positive, 1e-3),
        "noise": _Field(_non_negative, 1e-3),
        "seed": _Field(_int, 0),
        "sigma": _Field(_positive, DEFAULT_SIGMA),
        "b": _Field(_path),
    },
    "rpca": {
        "m": _Field(_positive_int, 40),
        "n": _Field(_positive_int, 40),
        "rank": _Field(_positive_int, 2),
        "spr": _Field(_fraction, 0.05),
        "seed": _Field(_int, 0),
        "rho": _Field(_positive),
        "sigma": _Field(_positive, DEFAULT_SIGMA),
        "m_file": _Field(_path),
        "mask_file": _Field(_path),
    },
    "completion": {
        "n": _Field(_positive_int, 100),
        "r": _Field(_positive_int, 5),
        "spr": _Field(_fraction, 0.05),
        "sr": _Field(_fraction, 0.9),
        "seed": _Field(_int, 0),
        "rho": _Field(_positive),
        "sigma": _Field(_positive, DEFAULT_SIGMA),
    },
}

SOLVER_FIELDS: Dict[str, _Field] = {
    "method": _Field(str),
    "mu": _Field(_positive_or_auto, "auto"),
    "max_iter": _Field(_positive_int, 1000),
    "infeas_tol": _Field(_non_negative, 0.0),
    "obj_target": _Field(_real),
    "mu0": _Field(_positive_or_auto),
    "mu_bar": _Field(_positive),
    "eta": _Field(_real),
    "skip_policy": _Field(str, "test"),
    "smooth_g": _Field(_bool),
}

REPORT_FIELDS: Dict[str, _Field] = {
    "checkpoints": _Field(str, ""),
    "output_dir": _Field(str),
    "check_bounds": _Field(_bool, False),
    "workers": _Field(_positive_int, 1),
}


@dataclass
class ProblemSpec:
    kind: str
    params: Dict[str, Any]
    base_dir: Path = Path(".")

    def resolve(self, key: str) -> Optional[Path]:
        raw = self.params.get(key)
        if raw is None:
            return None
        path = Path(raw)
        return path if path.is_absolute() else self.base_dir / path


@dataclass
class SolverSpec:
    name: str
    method: str
    settings: Dict[str, Any]
    smooth_g: bool = False

    @property
    def uses_continuation(self) -> bool:
        return self.settings.get("mu0") is not None

    def solver_config(self, mu0_auto: Optional[float] = None, record_iterates: bool = False) -> SolverConfig:
        """Build the solver parameters; ``mu0_auto`` resolves ``mu0 = auto``"""
        continuation = None
        if self.uses_continuation:
            mu0 = self.settings["mu0"]
            if mu0 == "auto":
                if mu0_auto is None:
                    raise ConfigError([(f"[{SOLVER_PREFIX}{self.name}] mu0", "'auto' is only defined for rpca and completion problems")])
                mu0 = mu0_auto
            continuation = ContinuationConfig(
                mu0=mu0, mu_bar=min(self.settings["mu_bar"], mu0), eta=self.settings["eta"]
            )
        return SolverConfig(
            mu=self.settings["mu"],
            max_iter=self.settings["max_iter"],
            infeas_tol=self.settings["infeas_tol"],
            obj_target=self.settings.get("obj_target"),
            continuation=continuation,
            skip_policy=self.settings["skip_policy"],
            record_iterates=record_iterates,
        )


@dataclass
class ExperimentConfig:
    source: Path
    problem: ProblemSpec
    solvers: List[SolverSpec]
    checkpoints: List[int] = field(default_factory=list)
    output_dir: Path = Path("out")
    check_bounds: bool = False
    workers: int = 1
    sections: Dict[str, Dict[str, str]] = field(default_factory=dict)


def _read_fields(section, schema: Dict[str, _Field], location: str, problems: List[Tuple[str, str]]) -> Dict[str, Any]:
    values = {}
    for key in section:
        if key not in schema:
            problems.append((f"{location} {key}", "unknown key"))
    for key, spec in schema.items():
        if key not in section:
            values[key] = spec.default
            continue
        raw = section[key]
        try:
            values[key] = spec.parse(raw)
        except ValueError as exc:
            problems.append((f"{location} {key}", str(exc)))
    return values


def _parse_checkpoints(raw: str, problems: List[Tuple[str, str]]) -> List[int]:
    if not raw.strip():
        return []
    checkpoints = []
    for token in raw.replace(",", " ").split():
        try:
            value = int(token)
        except ValueError:
            problems.append(("[report] checkpoints", f"not an integer: {token!r}"))
            continue
        if value < 1:
            problems.append(("[report] checkpoints", f"checkpoint must be >= 1, got {value}"))
        checkpoints.append(value)
    if checkpoints != sorted(set(checkpoints)):
        problems.append(("[report] checkpoints", "must be strictly increasing"))
    return checkpoints


def _check_solver(name: str, kind: Optional[str], values: Dict[str, Any], problems: List[Tuple[str, str]]) -> Optional[SolverSpec]:
    location = f"[{SOLVER_PREFIX}{name}]"
    method = values.get("method") or name
    if method not in SOLVERS:
        problems.append((f"{location} method", f"unknown solver {method!r}, expected one of {sorted(SOLVERS)}"))
        return None
    if kind in ("rpca", "completion") and method not in PAIR_FORM_METHODS:
        problems.append((f"{location} method", f"{kind} problems support {PAIR_FORM_METHODS}, got {method!r}"))
    if values.get("skip_policy") not in SKIP_POLICIES:
        problems.append((f"{location} skip_policy", f"must be one of {SKIP_POLICIES}"))

    continuation_keys = [key for key in ("mu0", "mu_bar", "eta") if values.get(key) is not None]
    if continuation_keys and len(continuation_keys) < 3:
        missing = sorted({"mu0", "mu_bar", "eta"} - set(continuation_keys))
        problems.append((location, f"continuation needs mu0, mu_bar and eta; missing {', '.join(missing)}"))
    eta = values.get("eta")
    if eta is not None and not 0 < eta < 1:
        problems.append((f"{location} eta", f"must lie in (0, 1), got {eta}"))
    mu0, mu_bar = values.get("mu0"), values.get("mu_bar")
    if isinstance(mu0, float) and mu_bar is not None and mu_bar > mu0:
        problems.append((f"{location} mu_bar", f"exceeds mu0 ({mu_bar} > {mu0})"))

    smooth_g = values.get("smooth_g")
    if smooth_g is None:
        smooth_g = method in NEEDS_SMOOTH_G
    elif method in NEEDS_SMOOTH_G and not smooth_g and kind in ("lasso", "deblur"):
        problems.append((f"{location} smooth_g", f"{method} linearizes g and needs smooth_g = true"))
    values = {key: value for key, value in values.items() if key not in ("method", "smooth_g")}
    return SolverSpec(name=name, method=method, settings=values, smooth_g=bool(smooth_g))


def _parse(path: Path, require_solvers: bool = True) -> Tuple[Optional[ExperimentConfig], List[Tuple[str, str]]]:
    problems: List[Tuple[str, str]] = []
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        with open(path) as f:
            parser.read_file(f)
    except FileNotFoundError:
        return None, [(str(path), "file not found")]
    except configparser.Error as exc:
        return None, [(str(path), f"parse error: {exc}")]

    known = {"problem", "report"}
    for section in parser.sections():
        if section not in known and not section.startswith(SOLVER_PREFIX):
            problems.append((f"[{section}]", "unknown section"))

    kind = None
    problem_params: Dict[str, Any] = {}
    if not parser.has_section("problem"):
        problems.append(("[problem]", "missing section"))
    else:
        kind = parser["problem"].get("kind")
        if kind not in PROBLEM_FIELDS:
            problems.append(("[problem] kind", f"expected one of {sorted(PROBLEM_FIELDS)}, got {kind!r}"))
            kind = None
        else:
            section = {k: v for k, v in parser["problem"].items() if k != "kind"}
            problem_params = _read_fields(section, PROBLEM_FIELDS[kind], "[problem]", problems)
            if kind == "lasso" and (problem_params.get("a") is None) != (problem_params.get("b") is None):
                problems.append(("[problem]", "lasso files need both a and b"))
            if kind == "rpca" and problem_params.get("m_file") is None and problem_params.get("rank", 1) >= min(problem_params.get("m", 2), problem_params.get("n", 2)):
                problems.append(("[problem] rank", "must be smaller than min(m, n)"))
            if kind == "completion" and problem_params.get("r", 1) >= problem_params.get("n", 2):
                problems.append(("[problem] r", "must be smaller than n"))
            if kind == "completion" and problem_params.get("sr") == 0:
                problems.append(("[problem] sr", "must be positive"))

    solvers = []
    for section in parser.sections():
        if not section.startswith(SOLVER_PREFIX):
            continue
        name = section[len(SOLVER_PREFIX):].strip()
        if not name:
            problems.append((f"[{section}]", "empty solver name"))
            continue
        values = _read_fields(parser[section], SOLVER_FIELDS, f"[{section}]", problems)
        spec = _check_solver(name, kind, values, problems)
        if spec is not None:
            solvers.append(spec)
    if require_solvers and not any(s.startswith(SOLVER_PREFIX) for s in parser.sections()):
        problems.append(("[solver:*]", "at least one solver section is required"))

    report = _read_fields(parser["report"] if parser.has_section("report") else {}, REPORT_FIELDS, "[report]", problems)
    checkpoints = _parse_checkpoints(report.get("checkpoints") or "", problems)

    if problems:
        return None, problems

    output_dir = report.get("output_dir") or str(Path("out") / path.stem)
    config = ExperimentConfig(
        source=path,
        problem=ProblemSpec(kind=kind, params=problem_params, base_dir=path.parent),
        solvers=solvers,
        checkpoints=checkpoints,
        output_dir=Path(output_dir),
        check_bounds=bool(report.get("check_bounds")),
        workers=int(report.get("workers") or 1),
        sections={name: dict(parser[name]) for name in parser.sections()},
    )
    return config, []


def validate_config(path: Union[str, Path]) -> List[str]:
    """Every problem in the file as ``"<location>: <message>"``; empty when valid"""
    _, problems = _parse(Path(path))
    return [f"{loc}: {msg}" for loc, msg in problems]


def load_experiment(path: Union[str, Path], out_dir: Optional[str] = None, require_solvers: bool = True) -> ExperimentConfig:
    """
    Parse and validate an experiment file.

    The output directory comes from ``out_dir`` if given, else
    ``$ALTLIN_OUT_DIR``, else the ``[report] output_dir`` key.

    Raises:
        ConfigError: listing every problem found
    """
    path = Path(path)
    config, problems = _parse(path, require_solvers)
    if problems:
        raise ConfigError(problems, str(path))
    override = out_dir or os.getenv(OUT_DIR_ENV)
    if override:
        config.output_dir = Path(override)
    return config
