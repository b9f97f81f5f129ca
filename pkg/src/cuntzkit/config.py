"""Experiment configuration files.

Configs are TOML with an explicit ``spec_version = 1``::

    spec_version = 1
    name = "shift2"
    seed = 0

    [system]
    kind = "FullShift"
    N = 2

    [pipeline]
    stages = ["decompose", "build-sections", "verify-all"]

    [truncation]
    sizes = [3, 4]          # cylinder depth, or Fourier cutoff K
    nodes = 4096            # quadrature nodes on circle kinds

    [tolerances]            # optional per-path overrides
    exact = 0.0
    closed_form = 1e-8
    quadrature = 1e-6

    [output]
    dir = "reports"
    formats = ["json", "txt"]

Validation errors name the offending field and, when it can be located, the
line of the file it came from.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import dynamics as dyn
from .dynamics import InvalidSystemError, SystemDescriptor, SystemKind

SPEC_VERSION = 1

STAGES = (
    "decompose",
    "build-sections",
    "build-polar",
    "build-transfer",
    "verify-all",
    "pairing-study",
    "symbolic-suite",
)

DEPENDENCIES = {
    "decompose": (),
    "build-sections": ("decompose",),
    "build-polar": ("decompose",),
    "build-transfer": ("build-polar",),
    "verify-all": ("build-sections",),
    "pairing-study": ("build-sections",),
    "symbolic-suite": (),
}

PATHS = ("exact", "closed_form", "quadrature")
DEFAULT_TOLERANCES = {"exact": 0.0, "closed_form": 1e-8, "quadrature": 1e-6}
FORMATS = ("json", "txt", "bin", "csv")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is dotted, ``line`` 1-based or None."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None, source: str | None = None):
        self.message, self.field, self.line, self.source = message, field, line, source
        where = []
        if source:
            where.append(str(source))
        if line:
            where.append(f"line {line}")
        prefix = ":".join(where)
        fld = f"[{field}] " if field else ""
        super().__init__(f"{prefix + ': ' if prefix else ''}{fld}{message}")


@dataclass(frozen=True)
class Checks:
    """Knobs of individual checks."""

    generation_depths: tuple = (1, 2, 3, 4, 5, 6, 7, 8)
    trials: int = 3
    commutant_depth: int = 3
    fixed_space_depth: int | None = None
    samples: int = 100


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemDescriptor
    stages: tuple
    sizes: tuple
    name: str = "experiment"
    seed: int = 0
    nodes: int = 4096
    codomain: int | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "reports"
    formats: tuple = ("json", "txt")
    checks: Checks = field(default_factory=Checks)
    source: str | None = None

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def _line_of(text: str, section: str | None, key: str) -> int | None:
    """Best-effort line of ``key`` inside ``[section]`` (top level when None)."""
    current = None
    head = re.compile(r"^\s*\[([^\[\]]+)\]\s*(#.*)?$")
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for lineno, line in enumerate(text.splitlines(), 1):
        m = head.match(line)
        if m:
            current = m.group(1).strip()
            if section is not None and key == "" and current == section:
                return lineno
            continue
        if current == section and pat.match(line):
            return lineno
    return None


class _Reader:
    def __init__(self, text: str, source: str | None):
        self.text, self.source = text, source

    def error(self, msg: str, section: str | None, key: str):
        fieldname = f"{section}.{key}" if section and key else (section or key)
        raise ConfigError(msg, fieldname, _line_of(self.text, section, key), self.source)

    def get(self, table: dict, section: str | None, key: str, types, default=..., required: bool = False):
        if key not in table:
            if required or default is ...:
                self.error("missing required field", section, key)
            return default
        v = table[key]
        if isinstance(v, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
            self.error(f"expected {_type_names(types)}, got a boolean", section, key)
        if not isinstance(v, types):
            self.error(f"expected {_type_names(types)}, got {type(v).__name__}", section, key)
        return v


def _type_names(types) -> str:
    types = types if isinstance(types, tuple) else (types,)
    return " or ".join(t.__name__ for t in types)


def _complex(v, r: _Reader, key: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    r.error("zeros are numbers or [re, im] pairs", "system", key)


# which key an InvalidSystemError message is about
_BLAME = (("N", "branch_count"), ("zeros", "zero"), ("density", "density"), ("tau", "rotation angle"))


def _system(sysd: dict, r: _Reader) -> SystemDescriptor:
    kinds = {k.value: k for k in SystemKind}
    kind_s = r.get(sysd, "system", "kind", str, required=True)
    if kind_s not in kinds:
        r.error(f"unknown kind {kind_s!r}; expected one of {', '.join(kinds)}", "system", "kind")
    kind = kinds[kind_s]
    known = {"kind", "N", "zeros", "density", "tau"}
    for k in sysd:
        if k not in known:
            r.error("unknown field", "system", k)
    try:
        if kind is SystemKind.BLASCHKE_COVER:
            zs = r.get(sysd, "system", "zeros", list, required=True)
            zeros = [_complex(z, r, "zeros") for z in zs]
            if "N" in sysd and r.get(sysd, "system", "N", int) != len(zeros):
                r.error("N must equal the number of zeros", "system", "N")
            return dyn.blaschke_cover(zeros)
        N = r.get(sysd, "system", "N", int, required=True)
        if kind is SystemKind.FULL_SHIFT:
            return dyn.full_shift(N)
        if kind is SystemKind.CIRCLE_MONOMIAL:
            return dyn.circle_monomial(N)
        if kind is SystemKind.WEIGHTED_CIRCLE_MONOMIAL:
            dens = r.get(sysd, "system", "density", dict, required=True)
            bad = set(dens) - {"cos", "sin"}
            if bad:
                r.error(f"density takes cos and sin coefficient lists, not {sorted(bad)}", "system", "density")
            return dyn.weighted_circle_monomial(N, dyn.TrigDensity(cos=dens.get("cos", []), sin=dens.get("sin", [])))
        tau = r.get(sysd, "system", "tau", (int, float), required=True)
        return dyn.product_shift_rotation(N, tau)
    except InvalidSystemError as exc:
        msg = str(exc)
        key = next((k for k, w in _BLAME if w in msg and k in sysd), "kind")
        r.error(msg, "system", key)


def validate_stages(stages, system: SystemDescriptor | None = None) -> None:
    """Raise ``ValueError`` unless every stage follows its dependencies."""
    seen = set()
    for s in stages:
        if s not in DEPENDENCIES:
            raise ValueError(f"unknown stage {s!r}; expected one of {', '.join(STAGES)}")
        if s in seen:
            raise ValueError(f"stage {s!r} listed twice")
        missing = [d for d in DEPENDENCIES[s] if d not in seen]
        if missing:
            raise ValueError(f"stage {s!r} needs {', '.join(missing)} earlier in the pipeline")
        seen.add(s)
    if system is not None and system.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        for s in ("build-polar", "build-transfer"):
            if s in seen:
                raise ValueError(f"stage {s!r} is not available for ProductShiftRotation")


def validate_sizes(sizes) -> None:
    if not sizes:
        raise ValueError("truncation schedule is empty")
    if any(not isinstance(s, int) or isinstance(s, bool) or s < 1 for s in sizes):
        raise ValueError("truncation sizes must be positive integers")
    if any(b <= a for a, b in zip(sizes[:-1], sizes[1:])):
        raise ValueError("truncation sizes strictly increasing")


def loads(text: str, source: str | None = None) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"not valid TOML: {exc}", None, int(m.group(1)) if m else None, source) from exc
    r = _Reader(text, source)
    known = {"spec_version", "name", "seed", "system", "pipeline", "truncation", "tolerances", "output", "checks"}
    for k in data:
        if k not in known:
            r.error("unknown field", None, k)
    version = r.get(data, None, "spec_version", int, required=True)
    if version != SPEC_VERSION:
        r.error(f"unsupported spec_version {version}; this reader understands {SPEC_VERSION}", None, "spec_version")
    name = r.get(data, None, "name", str, default=Path(source).stem if source else "experiment")
    seed = r.get(data, None, "seed", int, default=0)
    system = _system(r.get(data, None, "system", dict, required=True), r)

    pipe = r.get(data, None, "pipeline", dict, required=True)
    stages = r.get(pipe, "pipeline", "stages", list, required=True)
    if not all(isinstance(s, str) for s in stages):
        r.error("stages must be strings", "pipeline", "stages")
    try:
        validate_stages(stages, system)
    except ValueError as exc:
        r.error(str(exc), "pipeline", "stages")

    trunc = r.get(data, None, "truncation", dict, required=True)
    sizes = r.get(trunc, "truncation", "sizes", list, required=True)
    try:
        validate_sizes(sizes)
    except ValueError as exc:
        r.error(str(exc), "truncation", "sizes")
    nodes = r.get(trunc, "truncation", "nodes", int, default=4096)
    if nodes < 64:
        r.error("nodes must be >= 64", "truncation", "nodes")
    codomain = r.get(trunc, "truncation", "codomain", int, default=None)
    if codomain is not None and codomain < 1:
        r.error("codomain must be positive", "truncation", "codomain")

    tol_in = r.get(data, None, "tolerances", dict, default={})
    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in tol_in.items():
        if k not in PATHS:
            r.error(f"unknown path; expected one of {', '.join(PATHS)}", "tolerances", k)
        v = r.get(tol_in, "tolerances", k, (int, float))
        if v < 0:
            r.error("tolerances must be nonnegative", "tolerances", k)
        tolerances[k] = float(v)

    out = r.get(data, None, "output", dict, default={})
    out_dir = r.get(out, "output", "dir", str, default="reports")
    formats = r.get(out, "output", "formats", list, default=["json", "txt"])
    for f in formats:
        if f not in FORMATS:
            r.error(f"unknown format {f!r}; expected a subset of {', '.join(FORMATS)}", "output", "formats")

    chk = r.get(data, None, "checks", dict, default={})
    defaults = Checks()
    depths = r.get(chk, "checks", "generation_depths", list, default=list(defaults.generation_depths))
    if not depths or any(not isinstance(d, int) or d < 1 for d in depths):
        r.error("generation depths are positive integers", "checks", "generation_depths")
    checks = Checks(
        generation_depths=tuple(depths),
        trials=r.get(chk, "checks", "trials", int, default=defaults.trials),
        commutant_depth=r.get(chk, "checks", "commutant_depth", int, default=defaults.commutant_depth),
        fixed_space_depth=r.get(chk, "checks", "fixed_space_depth", int, default=None),
        samples=r.get(chk, "checks", "samples", int, default=defaults.samples),
    )
    return ExperimentConfig(
        system=system,
        stages=tuple(stages),
        sizes=tuple(sizes),
        name=name,
        seed=seed,
        nodes=nodes,
        codomain=codomain,
        tolerances=tolerances,
        output_dir=out_dir,
        formats=tuple(formats),
        checks=checks,
        source=source,
    )


def load(path) -> ExperimentConfig:
    path = Path(path)
    return loads(path.read_text(), str(path))


def shipped_configs() -> dict:
    """Name to path of the example configs installed with the package."""
    from importlib import resources

    root = resources.files(__package__) / "configs"
    return {p.name: Path(str(p)) for p in root.iterdir() if p.name.endswith(".cfg")}
