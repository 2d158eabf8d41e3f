"""Random fiber microstructures on a 1 um raster.

Fibers are placed one at a time (random sequential adsorption): a midpoint
cell and the fiber properties are drawn, and the candidate is kept only if
none of the cells it covers is already fiber.  A cell belongs to a fiber when
its center satisfies ``-l/2 <= u < l/2`` and ``-d/2 <= v < d/2`` in the
fiber's local axes, measured from the center of the midpoint cell.

The raster is indexed ``grid[iy, ix]`` with x to the right and y up.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import io
import logging
import math
import struct
from typing import List, Optional

import numpy as np

from . import stochastic
from .errors import DomainError, JammingError

log = logging.getLogger(__name__)

MAX_TARGET_FRACTION = 0.35
MAGIC = b"SFRC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIIQI")
_FIBER = struct.Struct("<iiddd")
STOP_RULES = ("reach", "nearest")


@dataclass(frozen=True)
class Fiber:
    x: int  # midpoint cell, um
    y: int
    length: float
    diameter: float
    orientation: float  # degrees in [-90, 90)

    def __post_init__(self):
        if not (self.length > 0 and self.diameter > 0):
            raise DomainError("fiber length and diameter must be positive")
        if not -90.0 <= self.orientation < 90.0:
            raise DomainError("orientation must lie in [-90, 90)")

    @property
    def area(self):
        return self.length * self.diameter


@dataclass
class Microstructure:
    width: int
    height: int
    grid: np.ndarray
    fibers: List[Fiber] = field(default_factory=list)
    seed: int = 0

    @property
    def achieved_volume_fraction(self):
        return float(np.count_nonzero(self.grid)) / self.grid.size

    def __eq__(self, other):
        if not isinstance(other, Microstructure):
            return NotImplemented
        return (
            (self.width, self.height, self.seed, self.fibers)
            == (other.width, other.height, other.seed, other.fibers)
            and np.array_equal(self.grid, other.grid)
        )


@dataclass(frozen=True)
class GenerationConfig:
    """Parameters of one microstructure realization.

    ``length``, ``diameter`` and ``orientation`` are fixed values, or ``None``
    to draw each fiber's property from its distribution.  With ``clip`` the
    midpoint may be anywhere in the domain and the part of a fiber outside
    it is cut off; otherwise fibers lie entirely inside.
    """

    width: int = 2500
    height: int = 2500
    target_fraction: float = 0.1822
    length: Optional[float] = None
    diameter: Optional[float] = None
    orientation: Optional[float] = None
    max_rejections: int = 50_000
    seed: int = 0
    clip: bool = False
    stop_rule: str = "reach"
    length_params: stochastic.WeibullParams = stochastic.FIBER_LENGTH
    diameter_params: stochastic.NormalParams = stochastic.FIBER_DIAMETER
    orientation_params: stochastic.EllipticOrientationParams = stochastic.FIBER_ORIENTATION

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DomainError("domain size must be positive")
        if not 0 <= self.target_fraction <= MAX_TARGET_FRACTION:
            raise DomainError(f"target fraction must lie in [0, {MAX_TARGET_FRACTION}]")
        if self.max_rejections < 1:
            raise DomainError("max_rejections must be >= 1")
        if self.stop_rule not in STOP_RULES:
            raise DomainError(f"stop_rule must be one of {STOP_RULES}")


def _row_bounds(dy, c, s, half_l, half_d):
    """Generous per-row dx interval containing every covered cell."""
    lo = np.full(dy.shape, -np.inf)
    hi = np.full(dy.shape, np.inf)
    # u = dx c + dy s in [-l/2, l/2),  v = -dx s + dy c in [-d/2, d/2)
    for coef, off, half in ((c, dy * s, half_l), (-s, dy * c, half_d)):
        if abs(coef) < 1e-12:
            bad = (off < -half - 1e-9) | (off >= half + 1e-9)
            lo[bad], hi[bad] = np.inf, -np.inf
            continue
        a, b = (-half - off) / coef, (half - off) / coef
        lo = np.maximum(lo, np.minimum(a, b))
        hi = np.minimum(hi, np.maximum(a, b))
    return np.floor(lo) - 1, np.ceil(hi) + 1


@lru_cache(maxsize=256)
def fiber_footprint(length, diameter, orientation):
    """Cell offsets ``(dy, dx)`` covered by a fiber centered on cell (0, 0)."""
    t = math.radians(orientation)
    c, s = math.cos(t), math.sin(t)
    ey = 0.5 * (length * abs(s) + diameter * abs(c))
    ry = int(math.ceil(ey)) + 1
    rows = np.arange(-ry, ry + 1, dtype=float)
    lo, hi = _row_bounds(rows, c, s, 0.5 * length, 0.5 * diameter)
    n = np.maximum(hi - lo + 1, 0).astype(np.int64)
    dy = np.repeat(rows, n)
    dx = np.repeat(lo, n) + (np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n))
    # rounding makes the half-open tie rule exact at multiples of 90 degrees
    u = np.round(dx * c + dy * s, 9)
    v = np.round(-dx * s + dy * c, 9)
    inside = (u >= -0.5 * length) & (u < 0.5 * length) & (v >= -0.5 * diameter) & (v < 0.5 * diameter)
    dy, dx = dy[inside].astype(np.int64), dx[inside].astype(np.int64)
    dy.setflags(write=False)
    dx.setflags(write=False)
    return dy, dx


def _cells(f, shape, clip):
    dy, dx = fiber_footprint(f.length, f.diameter, f.orientation)
    iy, ix = dy + f.y, dx + f.x
    h, w = shape
    ok = (iy >= 0) & (iy < h) & (ix >= 0) & (ix < w)
    if not ok.all():
        if not clip:
            raise DomainError("fiber leaves the domain")
        iy, ix = iy[ok], ix[ok]
    return iy, ix


def rasterize_fiber(f, grid, clip=False):
    """Mark the fiber's cells in ``grid`` (in place) and return the number of new cells.

    Raises DomainError when the fiber leaves the domain (unless ``clip``) or
    overlaps existing fiber cells; the grid is left unchanged in that case.
    """
    iy, ix = _cells(f, grid.shape, clip)
    if grid[iy, ix].any():
        raise DomainError("fiber overlaps an existing fiber")
    grid[iy, ix] = True
    return iy.size


def _draw_properties(cfg, rng):
    length = cfg.length if cfg.length is not None else float(
        stochastic.sample_fiber_length(rng, p=cfg.length_params))
    diameter = cfg.diameter if cfg.diameter is not None else float(
        stochastic.sample_fiber_diameter(rng, p=cfg.diameter_params))
    orientation = cfg.orientation if cfg.orientation is not None else float(
        stochastic.sample_fiber_orientation(rng, p=cfg.orientation_params))
    return length, diameter, orientation


def generate_microstructure(cfg, rng=None):
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    W, H = cfg.width, cfg.height
    grid = np.zeros((H, W), dtype=bool)
    target_cells = cfg.target_fraction * W * H
    filled = 0
    fibers = []
    rejections = 0
    while filled < target_cells:
        if rejections >= cfg.max_rejections:
            achieved = filled / grid.size
            if achieved < 0.9 * cfg.target_fraction:
                raise JammingError(
                    f"{rejections} consecutive rejections at fraction {achieved:.4f} "
                    f"(target {cfg.target_fraction})"
                )
            log.warning("placement stalled at fraction %.4f (target %.4f)", achieved,
                        cfg.target_fraction)
            break
        length, diameter, orientation = _draw_properties(cfg, rng)
        dy, dx = fiber_footprint(length, diameter, orientation)
        if cfg.clip:
            x, y = int(rng.integers(0, W)), int(rng.integers(0, H))
        else:
            x_lo, x_hi = -int(dx.min()), W - 1 - int(dx.max())
            y_lo, y_hi = -int(dy.min()), H - 1 - int(dy.max())
            if x_lo > x_hi or y_lo > y_hi:
                rejections += 1
                continue
            x, y = int(rng.integers(x_lo, x_hi + 1)), int(rng.integers(y_lo, y_hi + 1))
        f = Fiber(x, y, length, diameter, orientation)
        try:
            iy, ix = _cells(f, grid.shape, cfg.clip)
        except DomainError:
            rejections += 1
            continue
        if grid[iy, ix].any():
            rejections += 1
            continue
        after = filled + iy.size
        if (cfg.stop_rule == "nearest" and after >= target_cells
                and after - target_cells > target_cells - filled):
            break
        grid[iy, ix] = True
        filled = after
        fibers.append(f)
        rejections = 0
    return Microstructure(W, H, grid, fibers, cfg.seed)


def _check_region(shape, x0, y0, w, h):
    H, W = shape
    if w <= 0 or h <= 0 or x0 < 0 or y0 < 0 or x0 + w > W or y0 + h > H:
        raise DomainError("region lies outside the grid")


def area_fraction(grid, region=None):
    """Fiber-cell fraction of ``grid`` or of ``region = (x0, y0, width, height)``."""
    if region is not None:
        x0, y0, w, h = map(int, region)
        _check_region(grid.shape, x0, y0, w, h)
        grid = grid[y0 : y0 + h, x0 : x0 + w]
    return float(np.count_nonzero(grid)) / grid.size


def window_origin(center, size):
    """Integer lower-left cell of a ``size`` window centered at ``center``."""
    return tuple(int(math.floor(c - size / 2.0 + 0.5)) for c in center)


def extract_window(m, center, size):
    """Read-only square sub-view of the raster centered at ``center`` (um)."""
    size = int(size)
    x0, y0 = window_origin(center, size)
    _check_region(m.grid.shape, x0, y0, size, size)
    view = m.grid[y0 : y0 + size, x0 : x0 + size]
    view.flags.writeable = False
    return view


# -- serialization -----------------------------------------------------------

def to_bytes(m):
    out = io.BytesIO()
    out.write(_HEADER.pack(MAGIC, FORMAT_VERSION, m.width, m.height, m.seed, len(m.fibers)))
    for f in m.fibers:
        out.write(_FIBER.pack(f.x, f.y, f.length, f.diameter, f.orientation))
    out.write(np.packbits(m.grid.ravel(), bitorder="little").tobytes())
    return out.getvalue()


def from_bytes(data):
    magic, version, width, height, seed, n = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DomainError("not an SFRC microstructure file")
    if version != FORMAT_VERSION:
        raise DomainError(f"unsupported format version {version}")
    off = _HEADER.size
    fibers = []
    for _ in range(n):
        fibers.append(Fiber(*_FIBER.unpack_from(data, off)))
        off += _FIBER.size
    bits = np.frombuffer(data, dtype=np.uint8, offset=off)
    grid = np.unpackbits(bits, count=width * height, bitorder="little").astype(bool)
    return Microstructure(width, height, grid.reshape(height, width), fibers, seed)


def save(m, path):
    with open(path, "wb") as fh:
        fh.write(to_bytes(m))


def load(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())


def to_text(m):
    """Self-describing text form; floats use repr so the round trip is exact."""
    lines = [
        f"SFRC-TEXT {FORMAT_VERSION}",
        f"width {m.width}",
        f"height {m.height}",
        f"seed {m.seed}",
        f"fibers {len(m.fibers)}",
        "# x y length diameter orientation",
    ]
    lines += [f"{f.x} {f.y} {f.length!r} {f.diameter!r} {f.orientation!r}" for f in m.fibers]
    lines.append("raster rows=height, row 0 is y=0, 1=fiber")
    lines += ["".join("1" if c else "0" for c in row) for row in m.grid]
    return "\n".join(lines) + "\n"


def from_text(text):
    lines = text.splitlines()
    if not lines or not lines[0].startswith("SFRC-TEXT"):
        raise DomainError("not an SFRC text export")
    head = {}
    for line in lines[1:5]:
        key, value = line.split()
        head[key] = int(value)
    n = head["fibers"]
    fibers = []
    for line in lines[6 : 6 + n]:
        x, y, length, diameter, theta = line.split()
        fibers.append(Fiber(int(x), int(y), float(length), float(diameter), float(theta)))
    rows = lines[7 + n : 7 + n + head["height"]]
    grid = np.array([[ch == "1" for ch in row] for row in rows], dtype=bool)
    grid = grid.reshape(head["height"], head["width"])
    return Microstructure(head["width"], head["height"], grid, fibers, head["seed"])
