"""Parameter-sweep grids, CSV emission, and raster heatmaps.

CSV files carry a `# key=value` comment header followed by a strict body, so
emitted grids diff cleanly and parse back into equal in-memory values.  Cell
values are written with shortest-roundtrip float formatting; re-running a
sweep with the same inputs reproduces the file byte for byte (no timestamps
are embedded unless the caller sets one explicitly).
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _version
from .core import ParameterError
from .welfare import poa_costly, poa_frictionless, poa_informed, worst_case_gini

POA_REGIMES = ("frictionless", "costly", "informed")
DEFAULT_INFORMED_N = 200


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ParameterError(f"axis {self.name}: step must be positive; got {self.step}")
        if self.stop < self.start:
            raise ParameterError(f"axis {self.name}: stop < start")

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.start, self.stop + self.step / 2, self.step)

    def spec(self) -> str:
        return f"{self.name}={_fmt(self.start)}:{_fmt(self.stop)}:{_fmt(self.step)}"


@dataclass
class SweepGrid:
    """Rectangular grid of scalar results plus per-cell degree annotations."""

    axes: tuple
    values: np.ndarray
    degrees: list  # row-major list of str ("", "2", "1:3", ...)
    metadata: dict = field(default_factory=dict)
    timestamp: str | None = None

    def __post_init__(self):
        expected = 1
        for ax in self.axes:
            expected *= ax.values.size
        if self.values.size != expected:
            raise ParameterError(f"grid has {self.values.size} cells; axes imply {expected}")

    def cells(self):
        """(axis value tuple, value, degree annotation) in row-major order."""
        shape = tuple(ax.values.size for ax in self.axes)
        axvals = [ax.values for ax in self.axes]
        flat = self.values.reshape(-1)
        for idx in range(flat.size):
            coord = np.unravel_index(idx, shape)
            yield tuple(float(axvals[k][c]) for k, c in enumerate(coord)), float(flat[idx]), self.degrees[idx]


def _fmt(v: float) -> str:
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def parse_axis(spec: str) -> Axis:
    """Parse "name=start:stop:step"."""
    try:
        name, rng = spec.split("=", 1)
        start, stop, step = (float(x) for x in rng.split(":"))
    except ValueError as exc:
        raise ParameterError(f"bad axis spec {spec!r}; expected name=start:stop:step") from exc
    return Axis(name.strip(), start, stop, step)


def parse_grid(spec: str) -> tuple[Axis, ...]:
    """Parse "a=0:1:0.1,b=0:2:0.5" into axes."""
    return tuple(parse_axis(part) for part in spec.split(","))


# --------------------------------------------------------------------------
# cell evaluation
# --------------------------------------------------------------------------


def _poa_cell(task):
    regime, q, p, gamma, n = task
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            if regime == "frictionless":
                return poa_frictionless(q, p), ""
            if regime == "costly":
                b = poa_costly(q, p, gamma)
                return b.lower, str(b.d_used)
            b = poa_informed(q, p, gamma, n)
            return b.lower, str(b.d_used)
    except (ParameterError, ValueError, ZeroDivisionError):
        return math.nan, ""


def _gini_cell(task):
    _, q, p, gamma, _ = task
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            r = worst_case_gini(q, p, gamma)
            return r.value, f"{r.d_min}:{r.d_max}"
    except (ParameterError, ValueError):
        return math.nan, ""


def _run_cells(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=256))


def _grid_tasks(regime: str, axes, gamma: float | None, n: int):
    """Tasks in row-major cell order; axis names decide the parameterization.

    (q, p) axes sweep the probability simplex; (p, gamma) axes fix q = 1 - p.
    """
    names = tuple(ax.name for ax in axes)
    vals = [ax.values for ax in axes]
    tasks = []
    if names == ("q", "p"):
        for q in vals[0]:
            for p in vals[1]:
                tasks.append((regime, float(q), float(p), float(gamma or 0.0), n))
    elif names == ("p", "gamma"):
        for p in vals[0]:
            for g in vals[1]:
                tasks.append((regime, 1.0 - float(p), float(p), float(g), n))
    else:
        raise ParameterError(f"unsupported sweep axes {names}; expected (q, p) or (p, gamma)")
    return tasks


def run_poa_sweep(regime: str, axes, gamma: float | None = None, n: int = DEFAULT_INFORMED_N, jobs: int = 1) -> SweepGrid:
    """Price-of-anarchy sweep; costly/informed-costly cells report the lower
    bound of the bracket (the worst-case regular-equilibrium denominator)."""
    if regime not in POA_REGIMES:
        raise ParameterError(f"unknown regime {regime!r}; expected one of {POA_REGIMES}")
    tasks = _grid_tasks(regime, axes, gamma, n)
    out = _run_cells(_poa_cell, tasks, jobs)
    values = np.array([v for v, _ in out]).reshape(tuple(ax.values.size for ax in axes))
    meta = {"sweep": "poa", "regime": regime, "tool": f"netopp {_version}"}
    if gamma is not None:
        meta["gamma"] = _fmt(gamma)
    if regime == "informed":
        meta["n"] = str(n)
    return SweepGrid(tuple(axes), values, [d for _, d in out], meta)


def run_gini_sweep(axes, jobs: int = 1) -> SweepGrid:
    """Worst-case equilibrium Gini over a (p, gamma) grid with q = 1 - p."""
    tasks = _grid_tasks("gini", axes, None, 0)
    out = _run_cells(_gini_cell, tasks, jobs)
    values = np.array([v for v, _ in out]).reshape(tuple(ax.values.size for ax in axes))
    meta = {"sweep": "gini", "regime": "gini", "tool": f"netopp {_version}"}
    return SweepGrid(tuple(axes), values, [d for _, d in out], meta)


# --------------------------------------------------------------------------
# CSV round trip
# --------------------------------------------------------------------------


def grid_to_csv(grid: SweepGrid) -> str:
    lines = [f"# {k}={v}" for k, v in sorted(grid.metadata.items())]
    if grid.timestamp is not None:
        lines.append(f"# timestamp={grid.timestamp}")
    for pos, ax in enumerate(grid.axes):
        lines.append(f"# axis{pos}={ax.spec()}")
    lines.append("q,p,gamma,value,d")
    fixed_gamma = float(grid.metadata.get("gamma", 0.0))
    names = tuple(ax.name for ax in grid.axes)
    for coords, value, dstr in grid.cells():
        if names == ("q", "p"):
            q, p, g = coords[0], coords[1], fixed_gamma
        else:
            p, g = coords
            q = 1.0 - p
        lines.append(f"{_fmt(q)},{_fmt(p)},{_fmt(g)},{repr(value)},{dstr}")
    return "\n".join(lines) + "\n"


def write_grid_csv(grid: SweepGrid, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(grid_to_csv(grid))


def read_grid_csv(path: str) -> SweepGrid:
    meta: dict = {}
    axes = []
    values = []
    degrees = []
    timestamp = None
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, val = line[2:].split("=", 1)
                if key.startswith("axis"):
                    axes.append(parse_axis(val))
                elif key == "timestamp":
                    timestamp = val
                else:
                    meta[key] = val
            elif line and not line.startswith("q,"):
                parts = line.split(",")
                values.append(float(parts[3]))
                degrees.append(parts[4])
    shape = tuple(ax.values.size for ax in axes)
    return SweepGrid(tuple(axes), np.array(values).reshape(shape), degrees, meta, timestamp)


def grids_equal(a: SweepGrid, b: SweepGrid) -> bool:
    if tuple(ax.spec() for ax in a.axes) != tuple(ax.spec() for ax in b.axes):
        return False
    if a.metadata != b.metadata or a.degrees != b.degrees:
        return False
    return np.array_equal(a.values, b.values, equal_nan=True)


# --------------------------------------------------------------------------
# heatmap raster
# --------------------------------------------------------------------------

_COLOR_ANCHORS = np.array(
    [(13, 8, 135), (126, 3, 168), (204, 71, 120), (248, 149, 64), (240, 249, 33)],
    dtype=float,
)
_NO_DATA = (128, 128, 128)


def _colorize(norm: np.ndarray) -> np.ndarray:
    pos = np.clip(norm, 0.0, 1.0) * (len(_COLOR_ANCHORS) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_COLOR_ANCHORS) - 1)
    frac = (pos - lo)[..., None]
    return ((1 - frac) * _COLOR_ANCHORS[lo] + frac * _COLOR_ANCHORS[hi]).astype(np.uint8)


def emit_heatmap(grid: SweepGrid, path: str, scale: int = 4) -> dict:
    """Write a row-major raster PNG with a linear colour map plus a sidecar
    JSON recording the displayed value range and axes.

    Price-of-anarchy grids are displayed as 100*(value - 1); cells without a
    value (outside the valid parameter region) use a neutral no-data colour.
    """
    from PIL import Image

    if len(grid.axes) != 2:
        raise ParameterError(f"heatmap needs a 2-axis grid; got {len(grid.axes)} axes")
    vals = grid.values.astype(float)
    is_poa = grid.metadata.get("sweep") == "poa"
    disp = 100.0 * (vals - 1.0) if is_poa else vals
    finite = np.isfinite(disp)
    if finite.any():
        vmin = float(disp[finite].min())
        vmax = float(disp[finite].max())
    else:
        vmin = vmax = 0.0
    span = vmax - vmin if vmax > vmin else 1.0
    rgb = np.empty(disp.shape + (3,), dtype=np.uint8)
    rgb[...] = _NO_DATA
    rgb[finite] = _colorize((disp[finite] - vmin) / span)
    if scale > 1:
        rgb = np.kron(rgb, np.ones((scale, scale, 1), dtype=np.uint8))
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
    sidecar = {
        "value_min": vmin,
        "value_max": vmax,
        "normalization": "100*(value-1)" if is_poa else "raw",
        "axes": [{"name": ax.name, "start": ax.start, "stop": ax.stop, "step": ax.step} for ax in grid.axes],
        "scale": scale,
    }
    with open(path + ".json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")
    return sidecar


__all__ = [
    "Axis",
    "SweepGrid",
    "POA_REGIMES",
    "parse_axis",
    "parse_grid",
    "run_poa_sweep",
    "run_gini_sweep",
    "grid_to_csv",
    "write_grid_csv",
    "read_grid_csv",
    "grids_equal",
    "emit_heatmap",
]
