"""Run configuration: an INI file with ``section.key=value`` overrides."""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .events import DetectionParams
from .features.channels import FeatureParams
from .learn.protocol import C_GRID, CVProtocol

DEFAULTS = {
    "run": {"seed": "0", "jobs": "1"},
    "paths": {"data_dir": "data", "output_dir": "out", "features_dir": "", "scenario": ""},
    "events": {"dispersion_px": "40", "min_duration_ms": "100", "max_gap_ms": "75"},
    "features": {"kernel_sigma_fraction": "0.02", "histogram_range_mode": "global",
                 "histogram_normalize": "false"},
    "protocol": {"n_folds": "10", "repetitions": "20", "balance": "true",
                 "c_grid": ",".join(repr(c) for c in C_GRID), "tol": "1e-4", "max_iter": "10000"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int
    jobs: int
    data_dir: Path
    output_dir: Path
    features_dir: Path | None
    scenario: str | None
    detection: DetectionParams
    features: FeatureParams
    protocol: CVProtocol
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def config_hash(self) -> str:
        """Short digest of every resolved setting (paths included)."""
        text = "\n".join(f"{s}.{k}={v}" for s in sorted(self.raw) for k, v in sorted(self.raw[s].items()))
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def validate(self, need_data=True) -> None:
        missing = []
        if need_data and not self.data_dir.is_dir():
            missing.append(str(self.data_dir))
        if self.features_dir is not None and not self.features_dir.is_dir():
            missing.append(str(self.features_dir))
        if missing:
            raise ConfigError("configured paths do not exist: " + ", ".join(missing))


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_dict(DEFAULTS)
    return cp


def apply_override(cp: configparser.ConfigParser, assignment: str) -> None:
    """Apply one ``section.key=value`` override."""
    key, sep, value = assignment.partition("=")
    section, dot, name = key.strip().partition(".")
    if not sep or not dot or not name:
        raise ConfigError(f"override {assignment!r} is not of the form section.key=value")
    if section not in DEFAULTS or name not in DEFAULTS[section]:
        raise ConfigError(f"unknown setting {key.strip()!r}")
    cp.set(section, name, value.strip())


def load_config(path=None, overrides=(), base_dir=None) -> RunConfig:
    """Resolve defaults, the optional config file and overrides, in that order.

    Relative paths are taken relative to the config file's directory, or
    ``base_dir`` (the working directory by default) without a file.
    """
    cp = _parser()
    root = Path(base_dir or ".")
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        cp.read(path, encoding="utf-8")
        root = path.parent
        for section in cp.sections():
            unknown = set(cp[section]) - set(DEFAULTS.get(section, {}))
            if section not in DEFAULTS or unknown:
                raise ConfigError(f"{path}: unknown setting(s) in [{section}]: {sorted(unknown) or '*'}")
    for ov in overrides:
        apply_override(cp, ov)

    def p(value):
        q = Path(value)
        return q if q.is_absolute() else root / q

    try:
        pr = cp["protocol"]
        protocol = CVProtocol(
            n_folds=pr.getint("n_folds"), repetitions=pr.getint("repetitions"),
            seed=cp["run"].getint("seed"), balance=pr.getboolean("balance"),
            c_grid=tuple(float(c) for c in pr["c_grid"].split(",") if c.strip()),
            tol=pr.getfloat("tol"), max_iter=pr.getint("max_iter"),
        )
        ev = cp["events"]
        detection = DetectionParams(ev.getfloat("dispersion_px"), ev.getfloat("min_duration_ms"),
                                    ev.getfloat("max_gap_ms"))
        fe = cp["features"]
        mode = fe["histogram_range_mode"]
        if mode not in ("global", "dataset"):
            raise ConfigError(f"features.histogram_range_mode must be global or dataset, got {mode!r}")
        features = FeatureParams(fe.getfloat("kernel_sigma_fraction"), mode,
                                 fe.getboolean("histogram_normalize"))
        jobs = cp["run"].getint("jobs")
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None
    paths = cp["paths"]
    raw = {s: dict(cp[s]) for s in DEFAULTS}
    return RunConfig(
        seed=protocol.seed, jobs=max(1, jobs),
        data_dir=p(paths["data_dir"]), output_dir=p(paths["output_dir"]),
        features_dir=p(paths["features_dir"]) if paths["features_dir"] else None,
        scenario=paths["scenario"] or None,
        detection=detection, features=features, protocol=protocol, raw=raw,
    )
