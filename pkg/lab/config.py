"""Run configurations: TOML files validated through RunConfigForm."""

from __future__ import annotations

import hashlib
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from django.conf import settings

from domains.catalog import DomainSpec
from kernels.scans import NamedPair, NamedPoint
from spectral.chi import ChiProfile
from spectral.projector import RotationGenerator

from .forms import RunConfigForm, Suite

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 0.01
DEFAULT_RANDOM_INDICES = 50
DEFAULT_MAX_DEGREE = 4
DEFAULT_HS_SIZE = 50
DEFAULT_GALERKIN_DEGREE = 8


class ConfigError(Exception):
    def __init__(self, message: str, *, path: Path | None = None, errors: dict | None = None):
        super().__init__(message)
        self.path = path
        self.errors = errors or {}


@dataclass(frozen=True)
class ConfigPoint:
    id: str
    z: tuple[complex, ...]
    role: str = "boundary"

    @property
    def named(self) -> NamedPoint:
        return NamedPoint(self.id, self.z)


@dataclass(frozen=True)
class RunConfig:
    name: str
    config_hash: str
    domain: DomainSpec
    generator: RotationGenerator
    chi: ChiProfile
    k_ladder: tuple[float, ...]
    points: tuple[ConfigPoint, ...]
    pairs: tuple[NamedPair, ...]
    suites: tuple[str, ...]
    output_dir: Path
    seed: int
    max_indices: int
    max_quadrature_nodes: int
    depth: float = DEFAULT_DEPTH
    boundary_trace: bool = True
    mc_samples: int = 200_000
    random_indices: int = DEFAULT_RANDOM_INDICES
    max_degree: int = DEFAULT_MAX_DEGREE
    hs_size: int = DEFAULT_HS_SIZE
    galerkin_degree: int = DEFAULT_GALERKIN_DEGREE

    @property
    def boundary_points(self) -> list[ConfigPoint]:
        return [p for p in self.points if p.role == "boundary"]

    @property
    def interior_points(self) -> list[ConfigPoint]:
        return [p for p in self.points if p.role == "interior"]

    def provenance(self) -> dict[str, Any]:
        return {
            "config": self.name,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "budgets": {"max_indices": self.max_indices, "max_quadrature_nodes": self.max_quadrature_nodes},
        }


def resolve_config_path(name_or_path: str | Path) -> Path:
    """A path as given, or ``<LAB_CONFIG_DIR>/<name>.toml`` for a bare name."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    if path.suffix == "" and len(path.parts) == 1:
        candidate = Path(settings.LAB_CONFIG_DIR) / f"{path.name}.toml"
        if candidate.is_file():
            return candidate
    raise ConfigError(f"config {name_or_path} not found", path=path)


def _flatten(raw: dict[str, Any]) -> dict[str, Any]:
    domain = raw.get("domain", {})
    generator = raw.get("generator", {})
    chi = raw.get("chi", {})
    ladder = raw.get("ladder", {})
    suites = raw.get("suites", {})
    interior = raw.get("interior", {})
    boundary = raw.get("boundary", {})
    oracles = raw.get("oracles", {})
    budgets = raw.get("budgets", {})
    output = raw.get("output", {})
    return {
        "domain_kind": domain.get("kind"),
        "n": domain.get("n"),
        "a": domain.get("a"),
        "weights": generator.get("weights"),
        "chi_center": chi.get("center"),
        "chi_radius": chi.get("radius"),
        "chi_amplitude": chi.get("amplitude"),
        "chi_kind": chi.get("kind"),
        "chi_allow_signed": chi.get("allow_signed", False),
        "k_ladder": ladder.get("k"),
        "points": raw.get("points"),
        "pairs": raw.get("pairs"),
        "suites": [name for name, enabled in suites.items() if enabled],
        "depth": interior.get("depth", DEFAULT_DEPTH),
        "boundary_trace": boundary.get("trace", True),
        "mc_samples": oracles.get("mc_samples", settings.LAB_MC_SAMPLES),
        "random_indices": oracles.get("random_indices", DEFAULT_RANDOM_INDICES),
        "max_degree": oracles.get("max_degree", DEFAULT_MAX_DEGREE),
        "hs_size": oracles.get("hs_size", DEFAULT_HS_SIZE),
        "galerkin_degree": oracles.get("galerkin_degree", DEFAULT_GALERKIN_DEGREE),
        "max_indices": budgets.get("max_indices", settings.LAB_MAX_INDICES),
        "max_quadrature_nodes": budgets.get("max_quadrature_nodes", settings.LAB_MAX_QUADRATURE_NODES),
        "seed": output.get("seed", settings.LAB_SEED),
        "output_dir": output.get("dir", ""),
    }


def _error_message(form: RunConfigForm) -> str:
    parts = []
    for field, errors in sorted(form.errors.items()):
        label = "config" if field == "__all__" else field
        parts.extend(f"{label}: {error}" for error in errors)
    return "; ".join(parts)


def parse_config(
    text: str,
    *,
    name: str = "inline",
    seed: int | None = None,
    output_dir: Path | str | None = None,
    max_indices: int | None = None,
    max_quadrature_nodes: int | None = None,
) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{name}: {err}") from err

    data = _flatten(raw)
    overrides = {"seed": seed, "max_indices": max_indices, "max_quadrature_nodes": max_quadrature_nodes}
    data.update({key: value for key, value in overrides.items() if value is not None})
    form = RunConfigForm(data=data)
    if not form.is_valid():
        raise ConfigError(f"{name}: {_error_message(form)}", errors=form.errors.get_json_data())
    cleaned = form.cleaned_data

    out = output_dir or cleaned["output_dir"] or Path(settings.LAB_OUTPUT_DIR) / name
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    config = RunConfig(
        name=name,
        config_hash=digest,
        domain=cleaned["domain"],
        generator=cleaned["generator"],
        chi=cleaned["chi"],
        k_ladder=tuple(cleaned["k_ladder"]),
        points=tuple(ConfigPoint(p["id"], p["z"], p["role"]) for p in cleaned["points"]),
        pairs=tuple(NamedPair(p["id"], p["z"], p["w"]) for p in cleaned["pairs"]),
        suites=tuple(s for s in Suite.values if s in cleaned["suites"]),
        output_dir=Path(out),
        seed=cleaned["seed"],
        max_indices=cleaned["max_indices"],
        max_quadrature_nodes=cleaned["max_quadrature_nodes"],
        depth=DEFAULT_DEPTH if cleaned["depth"] is None else cleaned["depth"],
        boundary_trace=cleaned["boundary_trace"],
        mc_samples=cleaned["mc_samples"],
        random_indices=cleaned["random_indices"],
        max_degree=cleaned["max_degree"],
        hs_size=cleaned["hs_size"],
        galerkin_degree=cleaned["galerkin_degree"],
    )
    logger.debug("Loaded config %s (%s)", name, digest[:12])
    return config


def load_config(name_or_path: str | Path, **overrides) -> RunConfig:
    path = resolve_config_path(name_or_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}", path=path) from err
    return parse_config(text, name=path.stem, **overrides)
