"""Moving-window ensembles and correlation curves of apparent coefficients.

A realization is one generated microstructure.  Windows are cut at a fixed
set of placements around the domain center and homogenized under each
boundary-condition kind.  Correlations are always taken across realizations:
coefficient ``a`` of the center window against coefficient ``b`` of the
window at a given placement.
"""
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
import csv
import logging
import math
import os

import numpy as np

from . import fem, homogenize, microgen, stochastic
from .errors import DomainError, JammingError, SingularMatrixError, SolverError
from .homogenize import COEFFICIENT_LABELS
from .materials import GLASS, PBT, PLANE_STRESS, STATES

log = logging.getLogger(__name__)

CENTER, AXIAL, DIAGONAL = "center", "axial", "diagonal"
STEPS = 4
_AXIAL_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_DIAGONAL_DIRS = ((1, 1), (-1, -1), (1, -1), (-1, 1))
_LABEL_INDEX = {lab: ("126".index(lab[0]), "126".index(lab[1])) for lab in COEFFICIENT_LABELS}

TI_PAIRS = (("11", "12"), ("11", "22"), ("11", "66"), ("12", "22"), ("12", "66"), ("22", "66"))
ANISOTROPY_PAIRS = (("16", "26"),)
_VOIGT_TWIN = {"21": "12", "61": "16", "62": "26"}


def direction_class(dx, dy):
    if dx == 0 and dy == 0:
        return CENTER
    return AXIAL if dx == 0 or dy == 0 else DIAGONAL


@dataclass(frozen=True)
class WindowLayout:
    domain: float
    window: int
    offsets: tuple  # ((dx, dy), ...) from the domain center, um

    @property
    def center(self):
        return (self.domain / 2.0, self.domain / 2.0)

    @property
    def centers(self):
        c = np.array(self.center)
        return c + np.array(self.offsets, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.offsets)

    @property
    def classes(self):
        return tuple(direction_class(dx, dy) for dx, dy in self.offsets)

    @property
    def distances(self):
        return np.hypot(*np.array(self.offsets, dtype=float).reshape(-1, 2).T)


def window_centers(domain, window):
    """The 33 moving-window placements.

    Order: center, then the axial directions +x, -x, +y, -y and the diagonal
    directions (+,+), (-,-), (+,-), (-,+), each with steps k = 1..4 of a
    quarter window per axis.
    """
    if window <= 0 or window > domain / 3.0:
        raise DomainError(f"window {window} um does not fit three times into {domain} um")
    q = window / 4.0
    offsets = [(0.0, 0.0)]
    for dirs in (_AXIAL_DIRS, _DIAGONAL_DIRS):
        for sx, sy in dirs:
            offsets += [(sx * k * q, sy * k * q) for k in range(1, STEPS + 1)]
    return WindowLayout(float(domain), int(window), tuple(offsets))


def center_layout(domain, window):
    if window <= 0 or window > domain:
        raise DomainError("window larger than the domain")
    return WindowLayout(float(domain), int(window), ((0.0, 0.0),))


@dataclass(frozen=True)
class EnsembleConfig:
    generation: microgen.GenerationConfig = microgen.GenerationConfig()
    window: int = 250
    placements: str = "moving"  # or "center"
    bc_kinds: tuple = fem.BC_KINDS
    state: str = PLANE_STRESS
    solver: homogenize.SolverConfig = homogenize.SolverConfig()
    realizations: int = 100
    master_seed: int = 0
    max_attempts: int = 10
    phases: tuple = (PBT, GLASS)

    def __post_init__(self):
        if self.generation.width != self.generation.height:
            raise DomainError("ensembles need a square domain")
        if self.placements not in ("moving", "center"):
            raise DomainError("placements must be 'moving' or 'center'")
        if self.state not in STATES:
            raise DomainError(f"unknown state {self.state!r}")
        if self.realizations < 1 or self.max_attempts < 1:
            raise DomainError("realizations and max_attempts must be positive")
        self.layout()

    def layout(self):
        build = window_centers if self.placements == "moving" else center_layout
        return build(self.generation.width, self.window)


@dataclass
class RealizationResult:
    index: int
    seed: int
    attempts: int
    coefficients: np.ndarray  # (P, K, 3, 3)
    hill: np.ndarray  # (P, K, 3)
    fraction: np.ndarray  # (P,)


_RETRYABLE = (JammingError, SolverError, SingularMatrixError)


def run_realization(cfg, index):
    """Generate, cut and homogenize realization ``index``; retried with fresh seeds on failure."""
    layout = cfg.layout()
    P, K = len(layout), len(cfg.bc_kinds)
    last = None
    for attempt in range(cfg.max_attempts):
        seed = stochastic.derive_seed(cfg.master_seed, index, attempt)
        try:
            m = microgen.generate_microstructure(replace(cfg.generation, seed=seed))
            coeffs = np.empty((P, K, 3, 3))
            hill = np.empty((P, K, 3))
            frac = np.empty(P)
            for p, center in enumerate(layout.centers):
                grid = microgen.extract_window(m, center, cfg.window)
                frac[p] = grid.mean()
                ts = homogenize.apparent_tensors(grid, cfg.bc_kinds, cfg.state, cfg.solver,
                                                 cfg.phases)
                for k, kind in enumerate(cfg.bc_kinds):
                    coeffs[p, k] = ts[kind].matrix
                    hill[p, k] = ts[kind].hill_residuals
            return RealizationResult(index, seed, attempt + 1, coeffs, hill, frac)
        except _RETRYABLE as exc:
            log.warning("realization %d attempt %d failed: %s", index, attempt, exc)
            last = exc
    raise type(last)(f"realization {index}: {cfg.max_attempts} attempts failed; last: {last}")


# -- coefficient table -------------------------------------------------------

TABLE_COLUMNS = (
    ["realization", "placement_index", "xi_x_um", "xi_y_um", "bc_kind", "state", "window_um"]
    + [f"C{lab}_GPa" for lab in COEFFICIENT_LABELS]
    + ["fiber_fraction", "hill_residual_max", "seed"]
)


def _result_rows(r, layout, bc_kinds, state):
    rows = []
    for p, (dx, dy) in enumerate(layout.offsets):
        for k, kind in enumerate(bc_kinds):
            C = r.coefficients[p, k]
            rows.append(
                [str(r.index), str(p), repr(float(dx)), repr(float(dy)), kind, state,
                 str(layout.window)]
                + [repr(float(C[_LABEL_INDEX[lab]])) for lab in COEFFICIENT_LABELS]
                + [repr(float(r.fraction[p])), repr(float(r.hill[p, k].max())), str(r.seed)]
            )
    return rows


@dataclass
class CoefficientTable:
    layout: WindowLayout
    bc_kinds: tuple
    state: str
    values: np.ndarray  # (R, P, K, 3, 3) GPa
    seeds: np.ndarray  # (R,)
    hill: np.ndarray  # (R, P, K) max Hill residual over the load cases
    fraction: np.ndarray  # (R, P)
    meta: dict = field(default_factory=dict)

    @property
    def n_realizations(self):
        return self.values.shape[0]

    def coefficient(self, label, bc_kind, placement=None):
        """Samples across realizations, shape (R,) for one placement or (R, P)."""
        i, j = _LABEL_INDEX[label]
        z = self.values[:, :, self.bc_kinds.index(bc_kind), i, j]
        return z if placement is None else z[:, placement]

    def mean_matrix(self, bc_kind, placement=None):
        v = self.values[:, :, self.bc_kinds.index(bc_kind)]
        v = v.reshape(-1, 3, 3) if placement is None else v[:, placement]
        return v.mean(axis=0)

    def rows(self):
        out = []
        for r in range(self.n_realizations):
            res = RealizationResult(r, int(self.seeds[r]), 1, self.values[r],
                                    self.hill[r][..., None], self.fraction[r])
            out += _result_rows(res, self.layout, self.bc_kinds, self.state)
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TABLE_COLUMNS)
            w.writerows(self.rows())

    @classmethod
    def from_csv(cls, path, domain=float("nan")):
        rows = _read_rows(path)
        if not rows:
            raise DomainError(f"{path} holds no rows")
        return _table_from_rows(rows, domain)


def _read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        if header != TABLE_COLUMNS:
            raise DomainError(f"{path}: unexpected column layout")
        return [row for row in reader if len(row) == len(TABLE_COLUMNS)]


def _table_from_rows(rows, domain, expected=None):
    kinds, offsets = [], {}
    for row in rows:
        if row[4] not in kinds:
            kinds.append(row[4])
        offsets[int(row[1])] = (float(row[2]), float(row[3]))
    if expected is not None:
        kinds = list(expected)
    P, K = len(offsets), len(kinds)
    if sorted(offsets) != list(range(P)):
        raise DomainError("placement indices are not contiguous")
    R = max(int(row[0]) for row in rows) + 1
    values = np.full((R, P, K, 3, 3), np.nan)
    hill = np.full((R, P, K), np.nan)
    frac = np.full((R, P), np.nan)
    seeds = np.zeros(R, dtype=np.int64)
    for row in rows:
        r, p, k = int(row[0]), int(row[1]), kinds.index(row[4])
        for lab, v in zip(COEFFICIENT_LABELS, row[7:16]):
            values[(r, p, k) + _LABEL_INDEX[lab]] = float(v)
        frac[r, p] = float(row[16])
        hill[r, p, k] = float(row[17])
        seeds[r] = int(row[18])
    if np.isnan(values).any():
        raise DomainError("coefficient table is incomplete")
    layout = WindowLayout(domain, int(rows[0][6]), tuple(offsets[p] for p in range(P)))
    return CoefficientTable(layout, tuple(kinds), rows[0][5], values, seeds, hill, frac)


def _assemble(cfg, results):
    layout = cfg.layout()
    order = [results[i] for i in range(cfg.realizations)]
    return CoefficientTable(
        layout, tuple(cfg.bc_kinds), cfg.state,
        np.stack([r.coefficients for r in order]),
        np.array([r.seed for r in order], dtype=np.int64),
        np.stack([r.hill.max(axis=-1) for r in order]),
        np.stack([r.fraction for r in order]),
        {"attempts": [r.attempts for r in order], "master_seed": cfg.master_seed},
    )


def _load_checkpoint(path, cfg):
    """Completed realizations from an interrupted run, keyed by index."""
    if not path or not os.path.exists(path):
        return {}
    layout = cfg.layout()
    P, K = len(layout), len(cfg.bc_kinds)
    by_r = {}
    for row in _read_rows(path):
        by_r.setdefault(int(row[0]), []).append(row)
    done = {}
    for r, rows in by_r.items():
        if r >= cfg.realizations or len(rows) != P * K:
            continue
        rows = [[str(0)] + row[1:] for row in rows]
        t = _table_from_rows(rows, layout.domain, cfg.bc_kinds)
        done[r] = RealizationResult(r, int(t.seeds[0]), 1, t.values[0], t.hill[0][..., None],
                                    t.fraction[0])
    return done


def ensemble_run(cfg, workers=1, checkpoint=None, progress=None):
    """Run ``cfg.realizations`` realizations; the result does not depend on ``workers``.

    With ``checkpoint`` every finished realization is appended to that CSV and
    a rerun resumes from the complete realizations found there.
    """
    results = _load_checkpoint(checkpoint, cfg)
    todo = [i for i in range(cfg.realizations) if i not in results]
    if results:
        log.info("resuming: %d of %d realizations already done", len(results), cfg.realizations)
    layout = cfg.layout()
    fh = writer = None
    if checkpoint:
        fresh = not os.path.exists(checkpoint) or os.path.getsize(checkpoint) == 0
        fh = open(checkpoint, "a", newline="")
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(TABLE_COLUMNS)

    def record(res):
        results[res.index] = res
        if writer is not None:
            writer.writerows(_result_rows(res, layout, cfg.bc_kinds, cfg.state))
            fh.flush()
        if progress is not None:
            progress(len(results), cfg.realizations)

    try:
        if workers <= 1 or len(todo) <= 1:
            for i in todo:
                record(run_realization(cfg, i))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_realization, cfg, i) for i in todo]
                for fut in as_completed(futures):
                    record(fut.result())
    finally:
        if fh is not None:
            fh.close()
    return _assemble(cfg, results)


# -- correlation -------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationCurve:
    reference: str  # coefficient at the center window
    moving: str  # coefficient at the displaced window
    direction_class: str
    bc_kind: str
    xi: np.ndarray  # um, starting at 0
    rho: np.ndarray
    n_samples: np.ndarray

    @property
    def pair(self):
        return (self.reference, self.moving)

    @property
    def defined(self):
        return bool(np.all(np.isfinite(self.rho)))


def _rho(z1, z2):
    try:
        return stochastic.correlation_coefficient(z1, z2)
    except stochastic.UndefinedCorrelationError:
        return float("nan")


def placement_correlations(table, bc_kind):
    """rho[a, b, p] between label a at the center and label b at placement p (nan if undefined)."""
    labels = COEFFICIENT_LABELS
    P = len(table.layout)
    out = np.full((len(labels), len(labels), P), np.nan)
    for ia, a in enumerate(labels):
        ref = table.coefficient(a, bc_kind, 0)
        for ib, b in enumerate(labels):
            mov = table.coefficient(b, bc_kind)
            for p in range(P):
                out[ia, ib, p] = _rho(ref, mov[:, p])
    return out


def _step_groups(layout, cls):
    """Placement indices of one direction class grouped by step, with |xi|."""
    groups = {}
    for p, (c, d) in enumerate(zip(layout.classes, layout.distances)):
        if c == cls:
            groups.setdefault(round(float(d), 9), []).append(p)
    return sorted(groups.items())


def correlation_curves(table, bc_kinds=None, pairs=None):
    """Curves rho_a^b(|xi|) per direction class and BC kind.

    The placements of one class at equal distance (one per direction) are
    pooled into a single estimate; the |xi| = 0 point is the center window
    and is shared by both classes.
    """
    if table.n_realizations < 2:
        raise DomainError("need at least two realizations")
    bc_kinds = table.bc_kinds if bc_kinds is None else bc_kinds
    pairs = [(a, b) for a in COEFFICIENT_LABELS for b in COEFFICIENT_LABELS] if pairs is None \
        else pairs
    classes = [c for c in (AXIAL, DIAGONAL) if c in table.layout.classes] or [CENTER]
    curves = {}
    for kind in bc_kinds:
        for a, b in pairs:
            ref = table.coefficient(a, kind, 0)
            mov = table.coefficient(b, kind)
            r0 = _rho(ref, mov[:, 0])
            if a == b and np.isfinite(r0):
                r0 = 1.0
            for cls in classes:
                xi, rho, n = [0.0], [r0], [ref.size]
                for dist, ps in (_step_groups(table.layout, cls) if cls != CENTER else []):
                    z1 = np.tile(ref, len(ps))
                    z2 = mov[:, ps].T.ravel()
                    xi.append(dist)
                    rho.append(_rho(z1, z2))
                    n.append(z1.size)
                curves[(a, b, cls, kind)] = CorrelationCurve(
                    a, b, cls, kind, np.array(xi), np.array(rho), np.array(n))
    return curves


CURVE_COLUMNS = ("pair", "direction_class", "bc_kind", "xi_um", "rho", "n_samples")


def curves_to_csv(curves, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for key in sorted(curves):
            c = curves[key]
            for xi, rho, n in zip(c.xi, c.rho, c.n_samples):
                w.writerow([f"{c.reference}-{c.moving}", c.direction_class, c.bc_kind,
                            repr(float(xi)), repr(float(rho)), str(int(n))])


def _max_dev(c1, c2):
    d = np.abs(c1.rho - c2.rho)
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else float("nan")


@dataclass
class ReductionReport:
    reduced: dict  # (a, b, class, bc) -> CorrelationCurve
    swap_deviation: dict  # "a-b": max |rho_a^b - rho_b^a|
    twin_deviation: dict  # e.g. "16-16~16-61": max |rho_16^16 - rho_16^61|

    @property
    def max_swap_deviation(self):
        v = [x for x in self.swap_deviation.values() if np.isfinite(x)]
        return max(v) if v else float("nan")

    @property
    def max_twin_deviation(self):
        v = [x for x in self.twin_deviation.values() if np.isfinite(x)]
        return max(v) if v else float("nan")


def independent_pair_reduction(curves):
    """Check the symmetry equivalences and keep the independent curves.

    Kept: the six transversely-isotropic cross pairs, the (16, 26) anisotropy
    pair and the auto-correlations of 11, 12, 22, 66, 16 and 26.
    """
    keys = {(a, b) for a, b, _, _ in curves}
    contexts = sorted({(cls, kind) for _, _, cls, kind in curves})
    swap, twin = {}, {}
    for a, b in sorted(keys):
        if a < b and (b, a) in keys:
            swap[f"{a}-{b}"] = max(
                (_max_dev(curves[(a, b) + ctx], curves[(b, a) + ctx]) for ctx in contexts),
                key=lambda x: -1 if math.isnan(x) else x)
        for lab_from, lab_to in _VOIGT_TWIN.items():
            if b == lab_from and (a, lab_to) in keys:
                twin[f"{a}-{lab_to}~{a}-{b}"] = max(
                    (_max_dev(curves[(a, lab_to) + ctx], curves[(a, b) + ctx]) for ctx in contexts),
                    key=lambda x: -1 if math.isnan(x) else x)
    autos = tuple((x, x) for x in ("11", "12", "22", "66", "16", "26"))
    keep = set(TI_PAIRS + ANISOTROPY_PAIRS + autos)
    reduced = {k: c for k, c in curves.items() if (k[0], k[1]) in keep}
    return ReductionReport(reduced, swap, twin)
