"""
Job configuration.

A job is a JSON document validated into ``JobConfig`` before anything is
computed. Environment variables (read through python-dotenv) supply the
defaults that CLI flags can override.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .arith import as_rational
from .errors import ConfigError, ValidationError
from .localpoly import HeckeSpec
from .qforms import GL2Matrix

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"


class Mode(Enum):
    DECIDE = "decide"
    TABLE = "table"
    ZAGIER = "zagier"
    MAASS_CHECK = "maass-check"


class OutputFormat(Enum):
    TEXT = "text"
    CSV = "csv"
    STRUCTURED = "structured"


@dataclass
class Settings:
    """Process-wide defaults from the environment."""
    log_level: str = "INFO"
    threads: int = 1
    max_denominator: int = 2000
    output_format: OutputFormat = OutputFormat.TEXT
    data_dir: Path = DATA_DIR

    @classmethod
    def from_env(cls) -> "Settings":
        load_dotenv()
        try:
            return cls(
                log_level=os.getenv("LVANISH_LOG_LEVEL", "INFO").upper(),
                threads=int(os.getenv("LVANISH_THREADS", "1")),
                max_denominator=int(os.getenv("LVANISH_MAX_DENOMINATOR", "2000")),
                output_format=OutputFormat(os.getenv("LVANISH_OUTPUT_FORMAT", "text")),
                data_dir=Path(os.getenv("LVANISH_DATA_DIR", str(DATA_DIR))),
            )
        except ValueError as e:
            raise ConfigError(f"Bad LVANISH_* environment value: {e}") from e


@dataclass
class MaassSettings:
    a_bound: int = 0
    b_window: int = 24
    quadrature_tol: float = 1e-10
    points: List[complex] = field(default_factory=list)
    generators_checked: int = 3
    hecke_prime: Optional[int] = None
    exceptional_ws: List[float] = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])


@dataclass
class JobConfig:
    k: int
    N: int
    d0_choices: List[int]
    candidates: List[int]
    mode: Mode = Mode.DECIDE
    hecke: HeckeSpec = field(default_factory=HeckeSpec)
    base_point: Fraction = Fraction(0)
    points: Optional[List[Fraction]] = None
    generators: Optional[List[GL2Matrix]] = None
    output_format: OutputFormat = OutputFormat.TEXT
    extended_cusp_check: bool = False
    atkin_lehner: Optional[Dict[str, Any]] = None
    deltas: Optional[List[int]] = None
    maass: MaassSettings = field(default_factory=MaassSettings)
    source: Optional[Path] = None

    @classmethod
    def from_file(cls, path) -> "JobConfig":
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        return cls.from_dict(raw, base_dir=path.parent, source=path)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], base_dir: Optional[Path] = None,
                  source: Optional[Path] = None) -> "JobConfig":
        """Validate the whole document, collecting every problem before raising."""
        problems: List[str] = []
        if not isinstance(raw, dict):
            raise ConfigError("Config must be a JSON object")

        known = {
            "k", "N", "D0", "D", "D_range", "hecke", "hecke_file", "mode", "base_point", "points",
            "generators", "format", "extended_cusp_check", "atkin_lehner", "delta", "maass", "description",
        }
        for key in raw:
            if key not in known:
                problems.append(f"unknown key '{key}'")

        k = _int(raw, "k", problems, minimum=2)
        N = _int(raw, "N", problems, minimum=1)

        d0 = raw.get("D0", [])
        if isinstance(d0, int) and not isinstance(d0, bool):
            d0_choices = [d0]
        elif isinstance(d0, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in d0):
            d0_choices = list(d0)
        else:
            d0_choices = []
            problems.append("D0 must be an integer or a list of integers")

        candidates = _candidates(raw, problems)

        mode = Mode.DECIDE
        try:
            mode = Mode(raw.get("mode", "decide"))
        except ValueError:
            problems.append(f"mode must be one of {[m.value for m in Mode]}, got {raw.get('mode')!r}")
        if not d0_choices and mode is not Mode.ZAGIER:
            problems.append("D0 is required")

        fmt = OutputFormat.TEXT
        try:
            fmt = OutputFormat(raw.get("format", "text"))
        except ValueError:
            problems.append(f"format must be one of {[f.value for f in OutputFormat]}")

        hecke = _hecke(raw, base_dir, problems)

        base_point = Fraction(0)
        points = None
        try:
            base_point = as_rational(raw.get("base_point", "0"))
            if "points" in raw:
                points = [as_rational(p) for p in raw["points"]]
        except (ValidationError, TypeError) as e:
            problems.append(str(e))

        generators = None
        if "generators" in raw:
            try:
                generators = [GL2Matrix.from_rows(g) for g in raw["generators"]]
                for g in generators:
                    if g.determinant != 1:
                        problems.append(f"generator {g} has determinant {g.determinant}")
            except (ValidationError, TypeError) as e:
                problems.append(str(e))

        deltas = None
        if "delta" in raw:
            value = raw["delta"]
            deltas = value if isinstance(value, list) else [value]
            if not all(isinstance(d, int) and d > 0 for d in deltas):
                problems.append("delta must be a positive integer or a list of them")

        maass = _maass(raw.get("maass", {}), problems)
        if mode is Mode.MAASS_CHECK and N and (maass.a_bound <= 0 or maass.a_bound % N):
            problems.append(f"maass.a_bound must be a positive multiple of N={N}")

        atkin = raw.get("atkin_lehner")
        if atkin is not None and not isinstance(atkin, dict):
            problems.append("atkin_lehner must be an object")

        if problems:
            raise ConfigError(problems)

        return cls(
            k=k, N=N, d0_choices=d0_choices, candidates=candidates, mode=mode, hecke=hecke,
            base_point=base_point, points=points, generators=generators, output_format=fmt,
            extended_cusp_check=bool(raw.get("extended_cusp_check", False)), atkin_lehner=atkin,
            deltas=deltas, maass=maass, source=source,
        )


def _int(raw: Dict[str, Any], key: str, problems: List[str], minimum: int) -> int:
    value = raw.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        problems.append(f"{key} must be an integer >= {minimum}, got {value!r}")
        return 0
    return value


def _candidates(raw: Dict[str, Any], problems: List[str]) -> List[int]:
    if "D" in raw and "D_range" in raw:
        problems.append("give either D or D_range, not both")
        return []
    if "D_range" in raw:
        rng = raw["D_range"]
        if not isinstance(rng, dict) or not all(isinstance(rng.get(k), int) for k in ("start", "stop")):
            problems.append("D_range needs integer 'start' and 'stop'")
            return []
        step = 1 if rng["stop"] >= rng["start"] else -1
        return list(range(rng["start"], rng["stop"] + step, step))
    values = raw.get("D", [])
    if not isinstance(values, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        problems.append("D must be a list of integers")
        return []
    return list(values)


def _hecke(raw: Dict[str, Any], base_dir: Optional[Path], problems: List[str]) -> HeckeSpec:
    if "hecke" in raw and "hecke_file" in raw:
        problems.append("give either hecke or hecke_file, not both")
        return HeckeSpec()
    entries = raw.get("hecke", [])
    if "hecke_file" in raw:
        path = Path(raw["hecke_file"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            with open(path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
            entries = loaded["shifts"] if isinstance(loaded, dict) else loaded
        except (OSError, json.JSONDecodeError, KeyError) as e:
            problems.append(f"cannot read hecke_file {path}: {e}")
            return HeckeSpec()
    if not isinstance(entries, list):
        problems.append("hecke must be a list of {p, shift}")
        return HeckeSpec()
    for item in entries:
        if not isinstance(item, dict) or not isinstance(item.get("p"), int) or not isinstance(item.get("shift"), int):
            problems.append(f"hecke entry {item!r} needs integer 'p' and 'shift'")
            return HeckeSpec()
    return HeckeSpec.of(entries)


def _maass(raw: Dict[str, Any], problems: List[str]) -> MaassSettings:
    if not isinstance(raw, dict):
        problems.append("maass must be an object")
        return MaassSettings()
    settings = MaassSettings()
    try:
        settings.a_bound = int(raw.get("a_bound", 0))
        settings.b_window = int(raw.get("b_window", settings.b_window))
        settings.quadrature_tol = float(raw.get("quadrature_tol", settings.quadrature_tol))
        settings.points = [complex(re, im) for re, im in raw.get("points", [])]
        settings.generators_checked = int(raw.get("generators_checked", settings.generators_checked))
        if raw.get("hecke_prime") is not None:
            settings.hecke_prime = int(raw["hecke_prime"])
        if "exceptional_ws" in raw:
            settings.exceptional_ws = [float(w) for w in raw["exceptional_ws"]]
    except (TypeError, ValueError) as e:
        problems.append(f"maass settings: {e}")
    for z in settings.points:
        if z.imag <= 0:
            problems.append(f"maass point {z} is not in the upper half plane")
    return settings


def load_fixture(name: str, data_dir: Optional[Path] = None) -> Dict[str, Any]:
    path = Path(data_dir or DATA_DIR) / name
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
