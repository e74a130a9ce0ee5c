"""Case configuration files: sectioned key-value text with declared units.

A case file looks like::

    [units]
    modulus = Pa
    length = m

    [halfplane1]
    E = 55.917e9
    ...

Sections [halfplane1], [halfplane2], [patch], [glue], [load] are required;
[numerics], [kernel] and [reference] are optional. Unknown sections or keys
are rejected with the offending line number.
"""

import configparser
import hashlib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .elastic_params import RawMaterial, characteristic_roots, validate_material
from .errors import ParseError, ValidationError

MODULUS_UNITS = {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9}
LENGTH_UNITS = {"m": 1.0}

NUMERICS_DEFAULTS = {
    "tau_max": 20.0,
    "symbol_form": "printed",
    "grid": 400,
    "refined_grid": 800,
    "node_step": 0.01,
    "collocation_n": 800,
    "grading": 1.08,
    "x_min": 1e-6,
}
_INT_KEYS = {"grid", "refined_grid", "collocation_n"}
_STR_KEYS = {"symbol_form"}

_MATERIAL_KEYS = ("E", "E_star", "G", "nu")
_SCHEMA = {
    "units": {"modulus": False, "length": False},
    "halfplane1": {k: True for k in _MATERIAL_KEYS},
    "halfplane2": {k: True for k in _MATERIAL_KEYS},
    "patch": {"h": True},
    "glue": {"h0": True, "mu0": True, "lambda0": False},
    "load": {"P": True},
    "numerics": {k: False for k in NUMERICS_DEFAULTS},
    "kernel": {"lambda": False},
    "reference": None,   # free keys, numbers only
}
_REQUIRED_SECTIONS = ("halfplane1", "halfplane2", "patch", "glue", "load")


@dataclass(frozen=True)
class CaseConfig:
    halfplane1: RawMaterial
    halfplane2: RawMaterial
    h: float
    h0: float
    mu0: float
    P: float
    lambda0: float = None
    numerics: dict = field(default_factory=lambda: dict(NUMERICS_DEFAULTS))
    units: dict = field(default_factory=lambda: {"modulus": "Pa", "length": "m"})
    lambda_override: tuple = None
    reference: dict = field(default_factory=dict)
    name: str = ""

    @property
    def k0(self):
        return self.h0 / self.mu0

    @property
    def m0(self):
        if self.lambda0 is None:
            return None
        return self.h0 / (self.lambda0 + 2 * self.mu0)

    def with_n(self, n):
        """Glue thickness h0 = 5 * 10**(-n), as in the built-in case tables."""
        return replace(self, h0=5.0 * 10.0 ** (-n), name=f"{self.name} n={n}".strip())

    def with_numerics(self, **kw):
        num = dict(self.numerics)
        num.update({k: v for k, v in kw.items() if v is not None})
        cfg = replace(self, numerics=num)
        validate_config(cfg)
        return cfg


def _line_of(text, section, key=None):
    """1-based line of [section] (or of key inside it) in text, or None."""
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            if key is None and cur == section:
                return i
        elif cur == section and key is not None:
            k = s.split("=", 1)[0].split(":", 1)[0].strip()
            if k == key and "=" in s:
                return i
    return None


def _number(text, section, key, value):
    try:
        v = float(value)
    except ValueError:
        raise ParseError(f"[{section}] {key} = {value!r} is not a number",
                         _line_of(text, section, key)) from None
    return v


def parse_config(text, name=""):
    if not text.strip():
        raise ParseError("empty configuration", 1)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ParseError("key outside any [section]", e.lineno) from None
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ParseError("malformed line", line) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        raise ParseError(str(e).split(":")[-1].strip(), e.lineno) from None

    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ParseError(f"unknown section [{sec}]", _line_of(text, sec))
        allowed = _SCHEMA[sec]
        for key in cp[sec]:
            if allowed is not None and key not in allowed:
                raise ParseError(f"unknown key {key!r} in [{sec}]", _line_of(text, sec, key))
    missing = [f"missing section [{s}]" for s in _REQUIRED_SECTIONS if s not in cp]
    for sec in _REQUIRED_SECTIONS:
        if sec in cp:
            missing += [f"missing key {k!r} in [{sec}]" for k, req in _SCHEMA[sec].items()
                        if req and k not in cp[sec]]
    if missing:
        raise ValidationError(missing)

    units = {"modulus": "Pa", "length": "m"}
    if "units" in cp:
        units.update(dict(cp["units"]))

    def num(sec, key):
        return _number(text, sec, key, cp[sec][key])

    mats = [RawMaterial(*(num(s, k) for k in _MATERIAL_KEYS)) for s in ("halfplane1", "halfplane2")]
    numerics = dict(NUMERICS_DEFAULTS)
    if "numerics" in cp:
        for key, value in cp["numerics"].items():
            if key in _STR_KEYS:
                numerics[key] = value.strip()
            else:
                v = num("numerics", key)
                numerics[key] = int(v) if key in _INT_KEYS else v
    lam = None
    if "kernel" in cp and "lambda" in cp["kernel"]:
        parts = [p for p in cp["kernel"]["lambda"].replace(",", " ").split()]
        lam = tuple(_number(text, "kernel", "lambda", p) for p in parts)
    reference = {k: num("reference", k) for k in cp["reference"]} if "reference" in cp else {}
    cfg = CaseConfig(
        halfplane1=mats[0], halfplane2=mats[1],
        h=num("patch", "h"), h0=num("glue", "h0"), mu0=num("glue", "mu0"),
        lambda0=num("glue", "lambda0") if "lambda0" in cp["glue"] else None,
        P=num("load", "P"), numerics=numerics, units=units,
        lambda_override=lam, reference=reference, name=name)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    bad = []
    if cfg.units.get("modulus") not in MODULUS_UNITS:
        bad.append(f"modulus unit must be one of {sorted(MODULUS_UNITS)}, got {cfg.units.get('modulus')!r}")
    if cfg.units.get("length") not in LENGTH_UNITS:
        bad.append(f"length unit must be one of {sorted(LENGTH_UNITS)}, got {cfg.units.get('length')!r}")
    for label, m in (("halfplane1", cfg.halfplane1), ("halfplane2", cfg.halfplane2)):
        v = validate_material(m)
        if not v:
            try:
                characteristic_roots(m)
            except ValidationError as e:
                v = e.violations
        bad += [f"[{label}] {msg}" for msg in v]
    for key in ("h", "h0", "mu0"):
        v = getattr(cfg, key)
        if not (np.isfinite(v) and v > 0):
            bad.append(f"{key} must be positive and finite, got {v!r}")
    if cfg.lambda0 is not None and not cfg.lambda0 + 2 * cfg.mu0 > 0:
        bad.append("lambda0 + 2 mu0 must be positive")
    if not np.isfinite(cfg.P):
        bad.append(f"P must be finite, got {cfg.P!r}")
    num = cfg.numerics
    if not num["tau_max"] >= 2:
        bad.append("tau_max must be at least 2")
    if num["symbol_form"] not in ("printed", "kernel"):
        bad.append(f"symbol_form must be 'printed' or 'kernel', got {num['symbol_form']!r}")
    for key in ("grid", "refined_grid", "collocation_n"):
        if not num[key] >= 16:
            bad.append(f"{key} must be at least 16")
    if not 0 < num["node_step"] <= 0.1:
        bad.append("node_step must lie in (0, 0.1]")
    if not num["grading"] >= 1:
        bad.append("grading must be at least 1")
    if not 0 < num["x_min"] < 1e-2:
        bad.append("x_min must lie in (0, 1e-2)")
    if cfg.lambda_override is not None and (
            len(cfg.lambda_override) != 4 or not all(np.isfinite(cfg.lambda_override))):
        bad.append("[kernel] lambda must hold four finite numbers")
    if bad:
        raise ValidationError(bad)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    return parse_config(text, name=path.stem)


def _fmt(v):
    return repr(float(v))


def dump_config(cfg):
    """Canonical text form; parse_config(dump_config(c)) reproduces c."""
    out = ["# patchcontact case file", "",
           "[units]", f"modulus = {cfg.units['modulus']}", f"length = {cfg.units['length']}", ""]
    for label, m in (("halfplane1", cfg.halfplane1), ("halfplane2", cfg.halfplane2)):
        out.append(f"[{label}]")
        out += [f"{k} = {_fmt(getattr(m, k))}" for k in _MATERIAL_KEYS]
        out.append("")
    out += ["[patch]", f"h = {_fmt(cfg.h)}", "",
            "[glue]", f"h0 = {_fmt(cfg.h0)}", f"mu0 = {_fmt(cfg.mu0)}"]
    if cfg.lambda0 is not None:
        out.append(f"lambda0 = {_fmt(cfg.lambda0)}")
    out += ["", "[load]", f"P = {_fmt(cfg.P)}", "", "[numerics]"]
    for k in NUMERICS_DEFAULTS:
        v = cfg.numerics[k]
        out.append(f"{k} = {v}" if k in _STR_KEYS or k in _INT_KEYS else f"{k} = {_fmt(v)}")
    if cfg.lambda_override is not None:
        out += ["", "[kernel]", "lambda = " + ", ".join(_fmt(v) for v in cfg.lambda_override)]
    if cfg.reference:
        out += ["", "[reference]"] + [f"{k} = {_fmt(v)}" for k, v in cfg.reference.items()]
    return "\n".join(out) + "\n"


def config_hash(cfg):
    """SHA-256 of the canonical text (the case name is not part of it)."""
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()


def builtin_case_path(case_id):
    return resources.files("patchcontact").joinpath("cases").joinpath(f"case{int(case_id)}.cfg")


def builtin_case(case_id, n=4):
    if int(case_id) not in (1, 2, 3):
        raise ValidationError(f"built-in cases are 1, 2, 3; got {case_id!r}")
    if int(n) not in (2, 3, 4):
        raise ValidationError(f"n must be 2, 3 or 4; got {n!r}")
    path = builtin_case_path(case_id)
    cfg = parse_config(path.read_text(), name=f"case{int(case_id)}")
    return cfg if int(n) == 4 else cfg.with_n(int(n))
