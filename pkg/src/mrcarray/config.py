"""Array configuration files and CSV result tables.

Configs are YAML (JSON is accepted too) in engineering units::

    coils:
      - {L_uH: 10, C_pF: 150, R_ohm: 10}
    coupling:
      chain: {k_nn: 0.14, decay: inf}   # or  matrix: [[...]]  or  close_packed: {k: 0.14}
    drive: 1                            # 1-based
    sweep: {start_MHz: 3, stop_MHz: 5.5, points: 2000, spacing: linear}
    damping: {R_ohm: [0.1, 1, 10]}      # optional

Values are converted to SI on load; the element index becomes 0-based.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from mrcarray.model import (
    ArrayModel,
    CoilCircuit,
    FrequencyGrid,
    ValidatedArray,
    build_close_packed,
    build_linear_chain,
    validate_array,
)

SIG_DIGITS = 12
PRESETS = ("fig4_linear", "fig4_closepacked", "fig3_damping", "fig5_5coil", "table1_experimental")

_TOP_KEYS = {"coils", "coupling", "drive", "sweep", "damping"}
_COIL_UNITS = {
    "L_H": ("inductance", 1.0),
    "L_uH": ("inductance", 1e-6),
    "C_F": ("capacitance", 1.0),
    "C_nF": ("capacitance", 1e-9),
    "C_pF": ("capacitance", 1e-12),
    "R_ohm": ("resistance", 1.0),
}
_SWEEP_KEYS = {"start_MHz", "stop_MHz", "points", "spacing"}


class ConfigError(ValueError):
    """Unreadable config or a schema violation (names the offending key)."""


@dataclass(frozen=True, eq=False)
class ArrayConfig:
    model: ValidatedArray
    drive: int  # 0-based
    grid: FrequencyGrid | None
    layout: str  # "chain", "close_packed" or "matrix"
    decay_exponent: float
    r_list: tuple[float, ...] | None
    source: Path | None


def _number(value, key):
    if isinstance(value, str) and value.strip().lower() in ("inf", ".inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def _finite(value, key):
    v = _number(value, key)
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite, got {value!r}")
    return v


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def _parse_coil(entry, i):
    where = f"coils[{i}]"
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _unknown(entry, _COIL_UNITS, where)
    values = {}
    for key, raw in entry.items():
        name, scale = _COIL_UNITS[key]
        if name in values:
            raise ConfigError(f"{where}: {name} given twice")
        values[name] = _finite(raw, f"{where}.{key}") * scale
    for name in ("inductance", "capacitance"):
        if name not in values:
            raise ConfigError(f"{where}: missing {name}")
    return CoilCircuit(values["inductance"], values["capacitance"], values.get("resistance", 0.0))


def _parse_coupling(block, coils):
    if not isinstance(block, dict) or len(block) != 1:
        raise ConfigError("coupling: exactly one of 'matrix', 'chain', 'close_packed' is required")
    (form, body), = block.items()
    if form == "matrix":
        try:
            k = np.array(body, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("coupling.matrix: expected a numeric N x N list") from None
        if k.ndim != 2 or not np.all(np.isfinite(k)):
            raise ConfigError("coupling.matrix: expected a finite N x N list")
        return validate_array(ArrayModel(coils, k)), "matrix", math.inf
    if form == "chain":
        if not isinstance(body, dict):
            raise ConfigError("coupling.chain: expected a mapping")
        _unknown(body, {"k_nn", "decay"}, "coupling.chain")
        if "k_nn" not in body:
            raise ConfigError("coupling.chain: missing k_nn")
        k_nn = _finite(body["k_nn"], "coupling.chain.k_nn")
        decay = body.get("decay", math.inf)
        decay = math.inf if decay is None else _number(decay, "coupling.chain.decay")
        return build_linear_chain(coils, k_nn, decay), "chain", decay
    if form == "close_packed":
        if not isinstance(body, dict):
            raise ConfigError("coupling.close_packed: expected a mapping")
        _unknown(body, {"k"}, "coupling.close_packed")
        if "k" not in body:
            raise ConfigError("coupling.close_packed: missing k")
        return build_close_packed(coils, _finite(body["k"], "coupling.close_packed.k")), "close_packed", math.inf
    raise ConfigError(f"coupling: unknown form {form!r}")


def _parse_sweep(block):
    if not isinstance(block, dict):
        raise ConfigError("sweep: expected a mapping")
    _unknown(block, _SWEEP_KEYS, "sweep")
    for key in ("start_MHz", "stop_MHz"):
        if key not in block:
            raise ConfigError(f"sweep: missing {key}")
    points = block.get("points", 2000)
    if isinstance(points, bool) or not isinstance(points, int):
        raise ConfigError(f"sweep.points: expected an integer, got {points!r}")
    try:
        return FrequencyGrid(
            _finite(block["start_MHz"], "sweep.start_MHz") * 1e6,
            _finite(block["stop_MHz"], "sweep.stop_MHz") * 1e6,
            points,
            block.get("spacing", "linear"),
        )
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from None


def parse_config(doc, source: Path | None = None) -> ArrayConfig:
    """Build an :class:`ArrayConfig` from an already-parsed document.

    Schema problems raise :class:`ConfigError`; physically invalid arrays raise
    the validation errors from :mod:`mrcarray.model`.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    _unknown(doc, _TOP_KEYS, "config")
    coils_raw = doc.get("coils")
    if not isinstance(coils_raw, list) or not coils_raw:
        raise ConfigError("coils: expected a non-empty list")
    coils = tuple(_parse_coil(c, i) for i, c in enumerate(coils_raw))
    if "coupling" not in doc:
        raise ConfigError("coupling: missing")
    model, layout, decay = _parse_coupling(doc["coupling"], coils)

    drive = doc.get("drive", 1)
    if isinstance(drive, bool) or not isinstance(drive, int):
        raise ConfigError(f"drive: expected an integer element index, got {drive!r}")
    if not (1 <= drive <= len(coils)):
        raise ConfigError(f"drive: element {drive} out of range 1..{len(coils)}")

    grid = _parse_sweep(doc["sweep"]) if "sweep" in doc else None

    r_list = None
    if "damping" in doc:
        block = doc["damping"]
        if not isinstance(block, dict) or not isinstance(block.get("R_ohm"), list):
            raise ConfigError("damping: expected {R_ohm: [list of ohms]}")
        _unknown(block, {"R_ohm"}, "damping")
        r_list = tuple(_finite(r, "damping.R_ohm") for r in block["R_ohm"])

    return ArrayConfig(model, drive - 1, grid, layout, decay, r_list, source)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("mrcarray").joinpath("presets").joinpath(f"{name}.yaml").read_text()


def load_config(path_or_preset) -> ArrayConfig:
    """Load a config file, or a bundled preset by name."""
    path = Path(path_or_preset)
    if path.is_file():
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        source = path
    elif str(path_or_preset) in PRESETS:
        text, source = preset_text(str(path_or_preset)), None
    else:
        raise ConfigError(f"no such config file or preset: {path_or_preset}")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path_or_preset}: {exc}") from None
    return parse_config(doc, source)


def fmt(value) -> str:
    if isinstance(value, (str, bytes)):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{SIG_DIGITS}g}"


def write_table(fh, header, rows, comments=()):
    """Write a CSV table: header, rows, then ``# `` prefixed comment lines."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    for line in comments:
        fh.write(f"# {line}\n")


def table_text(header, rows, comments=()) -> str:
    buf = io.StringIO()
    write_table(buf, header, rows, comments)
    return buf.getvalue()


def read_table(source):
    """Parse a table written by :func:`write_table`.

    Returns ``(header, rows, comments)``; cells that parse as floats are floats.
    """
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    lines = text.splitlines()
    comments = [ln[2:] if ln.startswith("# ") else ln[1:] for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    reader = csv.reader(body)
    header = next(reader)

    def conv(cell):
        try:
            return float(cell)
        except ValueError:
            return cell

    rows = [[conv(c) for c in row] for row in reader]
    return header, rows, comments
