"""Experiment configuration: JSON schema parsing and validation.

A configuration file is a single JSON object; the same keys can be
overridden by CLI flags of the same name.  Fields (see README for the
full table):

  wavenumber        positive float
  incident_angle    float, radians from the x-axis
  seed              int, seeds any pseudo-random mode
  jobs              int or null (worker pool size; not part of the hash)
  output_dir        directory for CSV/PGM/PNG outputs
  scatterers        list of shape objects (kind + parameters)
  densities         list of density kind names
  orders            list of N_h values
  methods           subset of ["collocation", "least_squares"]
  samples           {"rule": "practical"} |
                    {"rule": "theorem", "r": .., "n_max": ..} |
                    {"rule": "explicit", "values": [..]}
  kgrid             {"quadrature_factor": >=20, "evaluation_factor": >=4}
  eval_points       minimum boundary-error quadrature size per scatterer
  kcurve            {"eccentricities": [..]} optional ellipse sweep
  field             lattice spec + rendering options for field maps
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigurationError
from .geometry import (
    BoothOval,
    Circle,
    Ellipse,
    Square,
    density_kinds,
    make_density,
)


def _require(cond, where, msg):
    if not cond:
        raise ConfigurationError(f"{where}: {msg}")


def _get_number(obj, where, key, default=None, minimum=None):
    if key not in obj:
        if default is None:
            raise ConfigurationError(f"{where}: missing required field {key!r}")
        return default
    v = obj[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"{where}.{key}", "must be a number")
    if minimum is not None:
        _require(v >= minimum, f"{where}.{key}", f"must be >= {minimum}")
    return float(v)


def parse_scatterer(obj, where="scatterers"):
    """Build a Scatterer from its JSON object."""
    _require(isinstance(obj, dict), where, "must be an object")
    kind = obj.get("kind")
    center = obj.get("center", [0.0, 0.0])
    _require(isinstance(center, (list, tuple)) and len(center) == 2,
             f"{where}.center", "must be a pair [x, y]")
    try:
        if kind == "circle":
            return Circle(_get_number(obj, where, "radius"), center)
        if kind == "ellipse":
            if "eccentricity" in obj:
                e = _get_number(obj, where, "eccentricity")
                a = _get_number(obj, where, "a", default=1.0)
                return Ellipse.from_eccentricity(e, a, center)
            return Ellipse(_get_number(obj, where, "a"),
                           _get_number(obj, where, "b"), center)
        if kind == "square":
            return Square(_get_number(obj, where, "half_side"), center)
        if kind == "booth_oval":
            return BoothOval(_get_number(obj, where, "a"), center,
                             rotation=_get_number(obj, where, "rotation", default=0.0))
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from exc
    raise ConfigurationError(f"{where}.kind: unknown shape {kind!r}")


@dataclass(frozen=True)
class SamplesRule:
    rule: str
    r: float = 1.0
    n_max: int = 10**6
    values: tuple = ()


@dataclass(frozen=True)
class FieldSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int
    quantity: str = "total"
    clip: Optional[float] = None
    method: str = "least_squares"
    samples: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    wavenumber: float
    incident_angle: float
    seed: int
    jobs: Optional[int]
    output_dir: str
    scatterers: tuple
    densities: tuple
    orders: tuple
    methods: tuple
    samples: SamplesRule
    quadrature_factor: int
    evaluation_factor: int
    eval_points: int
    eccentricities: tuple
    field: Optional[FieldSpec]
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def sha256(self):
        """Hash of the effective configuration (jobs/output_dir excluded)."""
        eff = {k: v for k, v in self.raw.items() if k not in ("jobs", "output_dir")}
        blob = json.dumps(eff, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(data, overrides=None):
    """Validate a JSON config object into an ExperimentConfig.

    ``overrides`` (from CLI flags) replace same-named top-level keys
    before validation so the hash reflects the effective run.
    """
    _require(isinstance(data, dict), "config", "top level must be a JSON object")
    data = dict(data)
    for key, val in (overrides or {}).items():
        if val is not None:
            data[key] = val

    wavenumber = _get_number(data, "config", "wavenumber", minimum=1e-12)
    incident_angle = _get_number(data, "config", "incident_angle", default=0.0)
    seed = int(_get_number(data, "config", "seed", default=0.0))
    jobs = data.get("jobs")
    if jobs is not None:
        _require(isinstance(jobs, int) and jobs >= 1, "config.jobs",
                 "must be a positive integer or null")
    output_dir = data.get("output_dir", "out")
    _require(isinstance(output_dir, str) and output_dir, "config.output_dir",
             "must be a non-empty string")

    raw_scats = data.get("scatterers", [])
    _require(isinstance(raw_scats, list), "config.scatterers", "must be a list")
    scatterers = tuple(
        parse_scatterer(o, f"scatterers[{i}]") for i, o in enumerate(raw_scats)
    )

    densities = data.get("densities", [])
    _require(isinstance(densities, list) and densities,
             "config.densities", "must be a non-empty list")
    known = set(density_kinds()) | {"km", "uniform", "chebyshev"}
    for d in densities:
        _require(d in known, "config.densities", f"unknown density kind {d!r}")

    orders = data.get("orders", [])
    _require(isinstance(orders, list) and orders, "config.orders",
             "must be a non-empty list of N_h values")
    for o in orders:
        _require(isinstance(o, int) and o >= 0, "config.orders",
                 "entries must be nonnegative integers")

    methods = tuple(data.get("methods", ["collocation", "least_squares"]))
    for mth in methods:
        _require(mth in ("collocation", "least_squares"), "config.methods",
                 f"unknown method {mth!r}")

    sobj = data.get("samples", {"rule": "practical"})
    _require(isinstance(sobj, dict) and "rule" in sobj, "config.samples",
             'must be an object with a "rule"')
    rule = sobj["rule"]
    if rule == "practical":
        samples = SamplesRule(rule="practical")
    elif rule == "theorem":
        samples = SamplesRule(
            rule="theorem",
            r=_get_number(sobj, "config.samples", "r", default=1.0, minimum=1e-12),
            n_max=int(_get_number(sobj, "config.samples", "n_max",
                                  default=10.0**6, minimum=3)),
        )
    elif rule == "explicit":
        vals = sobj.get("values")
        _require(isinstance(vals, list) and vals and
                 all(isinstance(v, int) and v >= 1 for v in vals),
                 "config.samples.values", "must be a non-empty list of counts")
        samples = SamplesRule(rule="explicit", values=tuple(vals))
    else:
        raise ConfigurationError(f"config.samples.rule: unknown rule {rule!r}")

    kgrid = data.get("kgrid", {})
    qf = int(_get_number(kgrid, "config.kgrid", "quadrature_factor",
                         default=20.0, minimum=20))
    ef = int(_get_number(kgrid, "config.kgrid", "evaluation_factor",
                         default=4.0, minimum=4))
    eval_points = int(_get_number(data, "config", "eval_points",
                                  default=2000.0, minimum=64))

    ecc = tuple(data.get("kcurve", {}).get("eccentricities", ()))
    for e in ecc:
        _require(isinstance(e, (int, float)) and 0 <= e < 1,
                 "config.kcurve.eccentricities", "entries must lie in [0, 1)")
    if ecc:
        _require(len(scatterers) == 1 and isinstance(scatterers[0], Ellipse),
                 "config.kcurve", "an eccentricity sweep needs exactly one ellipse")

    fobj = data.get("field")
    fspec = None
    if fobj is not None:
        _require(isinstance(fobj, dict), "config.field", "must be an object")
        quantity = fobj.get("quantity", "total")
        _require(quantity in ("total", "scattered"), "config.field.quantity",
                 'must be "total" or "scattered"')
        method = fobj.get("method", "least_squares")
        _require(method in ("collocation", "least_squares"), "config.field.method",
                 "unknown method")
        clip = fobj.get("clip")
        if clip is not None:
            _require(isinstance(clip, (int, float)) and clip > 0,
                     "config.field.clip", "must be positive")
        fsamples = tuple(fobj.get("samples", ()))
        fspec = FieldSpec(
            xmin=_get_number(fobj, "config.field", "xmin"),
            xmax=_get_number(fobj, "config.field", "xmax"),
            ymin=_get_number(fobj, "config.field", "ymin"),
            ymax=_get_number(fobj, "config.field", "ymax"),
            nx=int(_get_number(fobj, "config.field", "nx", minimum=2)),
            ny=int(_get_number(fobj, "config.field", "ny", minimum=2)),
            quantity=quantity,
            clip=None if clip is None else float(clip),
            method=method,
            samples=fsamples,
        )

    cfg = ExperimentConfig(
        wavenumber=wavenumber,
        incident_angle=incident_angle,
        seed=seed,
        jobs=jobs,
        output_dir=output_dir,
        scatterers=scatterers,
        densities=tuple(densities),
        orders=tuple(orders),
        methods=methods,
        samples=samples,
        quadrature_factor=qf,
        evaluation_factor=ef,
        eval_points=eval_points,
        eccentricities=ecc,
        field=fspec,
        raw=data,
    )
    _validate_density_pairing(cfg)
    return cfg


def _validate_density_pairing(cfg):
    """Every referenced density kind must be valid for its scatterers."""
    if cfg.eccentricities:
        probes = [Ellipse.from_eccentricity(max(cfg.eccentricities))]
    else:
        probes = list(cfg.scatterers)
    for kind in cfg.densities:
        for s in probes:
            make_density(kind, s)  # raises ConfigurationError on mismatch


def load_config(path, overrides=None):
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"config file {path!r} line {exc.lineno}: {exc.msg}"
        ) from exc
    return parse_config(data, overrides)
