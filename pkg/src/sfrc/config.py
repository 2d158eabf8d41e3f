"""Run configuration: TOML file, defaults, and command-line overrides."""
from dataclasses import asdict, dataclass, field, fields
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import fem, sweeps
from .errors import ConfigError
from .experiments import SCENARIOS
from .materials import GLASS, PBT, PLANE_STRAIN, PLANE_STRESS, IsotropicMaterial

STATE_NAMES = {"plane-stress": PLANE_STRESS, "plane-strain": PLANE_STRAIN,
               PLANE_STRESS: PLANE_STRESS, PLANE_STRAIN: PLANE_STRAIN}
MODEL_NAMES = {"tandon-weng": "tandon_weng", "halpin-tsai": "halpin_tsai",
               "tandon_weng": "tandon_weng", "halpin_tsai": "halpin_tsai"}
OUT_ENV = "SFRC_OUT"


def _phase(d, default):
    return {"young_modulus": d.get("young_modulus", default.young_modulus),
            "poisson_ratio": d.get("poisson_ratio", default.poisson_ratio),
            "density": d.get("density", default.density)}


@dataclass
class ExperimentConfig:
    seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    out: str = "sfrc-out"
    state: str = PLANE_STRESS
    realizations: int = 500
    windows: list = field(default_factory=lambda: [250, 500, 750])
    bc_kinds: list = field(default_factory=lambda: list(fem.BC_KINDS))
    quick: bool = False
    phases: dict = field(default_factory=lambda: {"matrix": _phase({}, PBT),
                                                  "fiber": _phase({}, GLASS)})
    generation: dict = field(default_factory=lambda: {
        "domain_um": 2500, "target_fraction": 0.1822, "max_rejections": 50_000})
    mesh: dict = field(default_factory=lambda: {"h_um": 10.0})
    analytic: dict = field(default_factory=lambda: {
        "models": ["tandon_weng", "halpin_tsai"],
        "vary": ["length", "diameter", "orientation"],
        "samples": 100_000, "fraction_grid": [0.10, 0.30, 21]})
    microgen: dict = field(default_factory=lambda: {
        "count": 1, "length_um": None, "diameter_um": None, "orientation_deg": None})
    elementsize: dict = field(default_factory=lambda: {"h_um": [10.0, 5.0, 2.5],
                                                       "window_um": 250})
    influence: dict = field(default_factory=lambda: {"scenarios": list(SCENARIOS)})
    corr: dict = field(default_factory=lambda: {"windows": [250]})

    def matrix_material(self):
        return IsotropicMaterial(**self.phases["matrix"], name="matrix")

    def fiber_material(self):
        return IsotropicMaterial(**self.phases["fiber"], name="fiber")

    @property
    def phase_pair(self):
        return (self.matrix_material(), self.fiber_material())

    def snapshot(self):
        return asdict(self)


_SECTIONS = {"phases", "generation", "mesh", "analytic", "microgen", "elementsize",
             "influence", "corr"}


def _merge_section(name, base, given):
    if not isinstance(given, dict):
        raise ConfigError(f"[{name}] must be a table")
    if name == "phases":
        out = dict(base)
        for key, val in given.items():
            if key not in ("matrix", "fiber") or not isinstance(val, dict):
                raise ConfigError(f"[phases] accepts matrix and fiber tables, got {key!r}")
            unknown = set(val) - {"young_modulus", "poisson_ratio", "density"}
            if unknown:
                raise ConfigError(f"[phases.{key}] unknown keys {sorted(unknown)}")
            out[key] = {**base[key], **val}
        return out
    unknown = set(given) - set(base)
    if unknown:
        raise ConfigError(f"[{name}] unknown keys {sorted(unknown)}")
    return {**base, **given}


def load_config(path=None, overrides=None):
    """Defaults, then the TOML file at ``path``, then non-None ``overrides``."""
    cfg = ExperimentConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not data:
            raise ConfigError(f"{path} is empty")
        top = {f.name for f in fields(ExperimentConfig)}
        for key, val in data.items():
            if key not in top:
                raise ConfigError(f"unknown config key {key!r}")
            if key in _SECTIONS:
                setattr(cfg, key, _merge_section(key, getattr(cfg, key), val))
            else:
                setattr(cfg, key, val)
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    env_out = os.environ.get(OUT_ENV)
    if env_out:
        cfg.out = env_out
    validate(cfg)
    return cfg


def _positive_int(name, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{name} must be a positive integer, got {v!r}")


def validate(cfg):
    if cfg.state not in STATE_NAMES:
        raise ConfigError(f"state must be plane-stress or plane-strain, got {cfg.state!r}")
    cfg.state = STATE_NAMES[cfg.state]
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    _positive_int("workers", cfg.workers)
    _positive_int("realizations", cfg.realizations)
    if not cfg.windows:
        raise ConfigError("windows must not be empty")
    for w in cfg.windows:
        _positive_int("window size", w)
    if not cfg.bc_kinds or any(k not in fem.BC_KINDS for k in cfg.bc_kinds):
        raise ConfigError(f"bc_kinds must be a subset of {fem.BC_KINDS}")
    try:
        cfg.phase_pair
    except ValueError as exc:
        raise ConfigError(f"phases: {exc}") from None
    g = cfg.generation
    _positive_int("generation.domain_um", g["domain_um"])
    _positive_int("generation.max_rejections", g["max_rejections"])
    if not 0 < g["target_fraction"] <= 0.35:
        raise ConfigError("generation.target_fraction must lie in (0, 0.35]")
    if not cfg.mesh["h_um"] > 0:
        raise ConfigError("mesh.h_um must be positive")
    a = cfg.analytic
    models = [MODEL_NAMES.get(m) for m in a["models"]]
    if not models or None in models:
        raise ConfigError(f"analytic.models must be taken from {sorted(MODEL_NAMES)}")
    a["models"] = models
    if not a["vary"] or any(v not in sweeps.VARIABLES for v in a["vary"]):
        raise ConfigError(f"analytic.vary must be taken from {sweeps.VARIABLES}")
    _positive_int("analytic.samples", a["samples"])
    lo, hi, n = a["fraction_grid"]
    if not (0 < lo < hi < 1) or int(n) < 2:
        raise ConfigError("analytic.fraction_grid must be [lo, hi, n] with 0 < lo < hi < 1")
    _positive_int("microgen.count", cfg.microgen["count"])
    if not cfg.elementsize["h_um"] or any(h <= 0 for h in cfg.elementsize["h_um"]):
        raise ConfigError("elementsize.h_um must be positive sizes")
    bad = [s for s in cfg.influence["scenarios"] if s not in SCENARIOS]
    if bad or not cfg.influence["scenarios"]:
        raise ConfigError(f"influence.scenarios must be taken from {SCENARIOS}")
    for w in cfg.corr["windows"]:
        _positive_int("corr window", w)
    return cfg
