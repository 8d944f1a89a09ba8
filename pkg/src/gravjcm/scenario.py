"""Declarative experiment descriptions.

A Scenario bundles the physical parameters, the gravity values to scan, the
time sweep, the backend choice, and the requested outputs, decoupled from the
numerics.  The user-facing time unit is the scaled time lam*t everywhere (the
figures' horizontal axis); conversion to seconds happens exactly once, in
``times_seconds``.

The text format is flat ``key = value`` lines, UTF-8, with ``#`` comments.
Unknown keys are hard errors.  Keys left out take the canonical defaults of
the reference experiment; each default fill is echoed in the provenance log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import PhysicalParams, paper_defaults

VALID_BACKENDS = ("ode", "analytic", "both")
VALID_OUTPUTS = ("inversion", "entropy", "qgrid", "cat_report")

PAPER_QG_LIST = (0.0, 0.5e7, 1.5e7)
HALF_REVIVAL_LAMT = 7.0 * math.pi / 2.0


class ScenarioError(ValueError):
    """Malformed or invalid scenario document."""


@dataclass(frozen=True)
class TimeSpec:
    """Sweep of the scaled time lam*t; a single instant is t_start == t_end."""

    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self):
        if self.t_start < 0:
            raise ScenarioError("t_start must be >= 0")
        if self.t_end == self.t_start:
            if self.n_samples != 1:
                raise ScenarioError("a single-instant sweep needs n_samples = 1")
        elif self.t_end < self.t_start:
            raise ScenarioError("t_end must exceed t_start")
        elif self.n_samples < 2:
            raise ScenarioError("a time sweep needs n_samples >= 2")


@dataclass(frozen=True)
class Scenario:
    """Immutable run description; shared freely once built."""

    name: str
    params: PhysicalParams
    qg_list: tuple
    time_spec: TimeSpec
    backend: str
    outputs: tuple
    qgrid_extent: float
    qgrid_n: int
    n_nodes: int
    nmax: int           # 0 means: choose adaptively from alpha
    ode_tol: float
    quad_tol: float
    literal_paper_mode: bool
    provenance: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.backend not in VALID_BACKENDS:
            raise ScenarioError(
                f"backend must be one of {VALID_BACKENDS}, got {self.backend!r}"
            )
        if not self.qg_list:
            raise ScenarioError("qg_list must be non-empty")
        if any(v < 0 for v in self.qg_list):
            raise ScenarioError("qg values must be >= 0")
        bad = [o for o in self.outputs if o not in VALID_OUTPUTS]
        if bad:
            raise ScenarioError(f"unknown outputs {bad}; valid: {VALID_OUTPUTS}")
        if not self.outputs:
            raise ScenarioError("outputs must be non-empty")
        if self.qgrid_extent <= 0 or self.qgrid_n < 3:
            raise ScenarioError("qgrid needs positive extent and n >= 3")
        if self.n_nodes < 1:
            raise ScenarioError("n_nodes must be >= 1")
        if self.nmax < 0:
            raise ScenarioError("nmax must be >= 0 (0 selects adaptively)")

    def times_scaled(self) -> np.ndarray:
        ts = self.time_spec
        if ts.n_samples == 1:
            return np.array([ts.t_start])
        return np.linspace(ts.t_start, ts.t_end, ts.n_samples)

    def times_seconds(self) -> np.ndarray:
        """The single lam*t -> seconds conversion point."""
        return self.times_scaled() / self.params.lam

    def params_for(self, qg: float) -> PhysicalParams:
        return replace(self.params, qg=qg)


_DEFAULTS = {
    "name": "custom",
    "q": 1e7,
    "omega_rec": 0.5e6,
    "lam": 1e6,
    "delta0": 8.5e7,
    "sigma0": 1.0,
    "alpha": 5.0,
    "qg": "0, 0.5e7, 1.5e7",
    "t_start": 0.0,
    "t_end": 25.0,
    "n_samples": 2000,
    "backend": "ode",
    "outputs": "inversion, entropy",
    "qgrid.extent": 9.0,
    "qgrid.n": 201,
    "n_nodes": 32,
    "nmax": 0,
    "ode_tol": 1e-10,
    "quad_tol": 1e-12,
    "literal_paper_mode": False,
}

_FLOAT_KEYS = ("q", "omega_rec", "lam", "delta0", "sigma0",
               "t_start", "t_end", "qgrid.extent", "ode_tol", "quad_tol")
_INT_KEYS = ("n_samples", "qgrid.n", "n_nodes", "nmax")
_BOOL_KEYS = ("literal_paper_mode",)


def _parse_bool(raw: str, key: str, line_no: int) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ScenarioError(f"line {line_no}: {key} expects a boolean, got {raw!r}")


def _build(kv: dict, filled_defaults: list) -> Scenario:
    qg_list = tuple(
        float(tok) for tok in str(kv["qg"]).split(",") if tok.strip()
    )
    outputs = tuple(
        dict.fromkeys(tok.strip() for tok in str(kv["outputs"]).split(",") if tok.strip())
    )
    alpha = complex(kv["alpha"]) if isinstance(kv["alpha"], str) else complex(kv["alpha"])
    try:
        params = paper_defaults(
            qg=qg_list[0] if qg_list else 0.0,
            q=float(kv["q"]),
            omega_rec=float(kv["omega_rec"]),
            lam=float(kv["lam"]),
            delta0=float(kv["delta0"]),
            sigma0=float(kv["sigma0"]),
            alpha=alpha,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(
        name=str(kv["name"]),
        params=params,
        qg_list=qg_list,
        time_spec=TimeSpec(
            t_start=float(kv["t_start"]),
            t_end=float(kv["t_end"]),
            n_samples=int(kv["n_samples"]),
        ),
        backend=str(kv["backend"]),
        outputs=outputs,
        qgrid_extent=float(kv["qgrid.extent"]),
        qgrid_n=int(kv["qgrid.n"]),
        n_nodes=int(kv["n_nodes"]),
        nmax=int(kv["nmax"]),
        ode_tol=float(kv["ode_tol"]),
        quad_tol=float(kv["quad_tol"]),
        literal_paper_mode=_parse_bool(str(kv["literal_paper_mode"]), "literal_paper_mode", 0)
        if isinstance(kv["literal_paper_mode"], str) else bool(kv["literal_paper_mode"]),
        provenance=tuple(sorted(filled_defaults)),
    )


def parse_scenario(text: str) -> Scenario:
    """Parse a flat key = value document into a validated Scenario.

    Unspecified keys take the reference-experiment defaults; every
    default-filled key lands in Scenario.provenance.  Unknown keys raise.
    """
    kv = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(
                f"line {line_no}: expected 'key = value', got {raw!r}"
            )
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _DEFAULTS:
            raise ScenarioError(
                f"line {line_no}: unknown key {key!r} "
                f"(valid keys: {', '.join(sorted(_DEFAULTS))})"
            )
        if key in kv:
            raise ScenarioError(f"line {line_no}: duplicate key {key!r}")
        if not val:
            raise ScenarioError(f"line {line_no}: empty value for {key!r}")
        kv[key] = val
    filled = [k for k in _DEFAULTS if k not in kv]
    merged = dict(_DEFAULTS)
    merged.update(kv)
    for key in _FLOAT_KEYS:
        try:
            merged[key] = float(merged[key])
        except ValueError as exc:
            raise ScenarioError(f"key {key!r}: not a number ({merged[key]!r})") from exc
    for key in _INT_KEYS:
        try:
            merged[key] = int(float(merged[key]))
        except ValueError as exc:
            raise ScenarioError(f"key {key!r}: not an integer ({merged[key]!r})") from exc
    if isinstance(merged["alpha"], str):
        try:
            merged["alpha"] = complex(merged["alpha"].replace("i", "j"))
        except ValueError as exc:
            raise ScenarioError(f"key 'alpha': not a number ({merged['alpha']!r})") from exc
    if isinstance(merged["literal_paper_mode"], str):
        merged["literal_paper_mode"] = _parse_bool(
            merged["literal_paper_mode"], "literal_paper_mode", 0
        )
    return _build(merged, filled)


def serialize_scenario(sc: Scenario) -> str:
    """Canonical text form; parse(serialize(sc)) reproduces sc exactly."""
    alpha = sc.params.alpha
    alpha_txt = repr(alpha.real) if alpha.imag == 0 else repr(alpha).strip("()")
    lines = [
        f"name = {sc.name}",
        f"q = {sc.params.q!r}",
        f"omega_rec = {sc.params.omega_rec!r}",
        f"lam = {sc.params.lam!r}",
        f"delta0 = {sc.params.delta0!r}",
        f"sigma0 = {sc.params.sigma0!r}",
        f"alpha = {alpha_txt}",
        "qg = " + ", ".join(repr(v) for v in sc.qg_list),
        f"t_start = {sc.time_spec.t_start!r}",
        f"t_end = {sc.time_spec.t_end!r}",
        f"n_samples = {sc.time_spec.n_samples}",
        f"backend = {sc.backend}",
        "outputs = " + ", ".join(sc.outputs),
        f"qgrid.extent = {sc.qgrid_extent!r}",
        f"qgrid.n = {sc.qgrid_n}",
        f"n_nodes = {sc.n_nodes}",
        f"nmax = {sc.nmax}",
        f"ode_tol = {sc.ode_tol!r}",
        f"quad_tol = {sc.quad_tol!r}",
        f"literal_paper_mode = {str(sc.literal_paper_mode).lower()}",
    ]
    return "\n".join(lines) + "\n"


def builtin_scenario(name: str) -> Scenario:
    """Canonical figure scenarios of the reference experiment.

    fig1: inversion sweep, lam*t in [0, 25], 2000 samples, all three qg.
    fig2: same sweep, entropy output.
    fig3: single instant lam*t = 7 pi / 2 (half revival), Q grid and cat
    report, all three qg.
    """
    base = {
        "fig1": {"name": "fig1", "outputs": "inversion"},
        "fig2": {"name": "fig2", "outputs": "entropy"},
        "fig3": {
            "name": "fig3",
            "outputs": "qgrid, cat_report",
            "t_start": HALF_REVIVAL_LAMT,
            "t_end": HALF_REVIVAL_LAMT,
            "n_samples": 1,
        },
    }
    if name not in base:
        raise ScenarioError(
            f"unknown builtin {name!r}; valid names: {', '.join(sorted(base))}"
        )
    merged = dict(_DEFAULTS)
    merged.update(base[name])
    filled = [k for k in _DEFAULTS if k not in base[name]]
    return _build(merged, filled)
