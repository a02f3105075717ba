"""Level surfaces of the Bell-diagonal measures and parameter sweeps over the state families."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import channel_measure_bell, channel_measure_werner, evolved_bell_params
from .correlations import MeasureKind, OptimizerOptions, bell_measure, bell_value, measure_numeric, werner_measure
from .measurements import PROJECTIVE, strength
from .states import PHYSICAL_TOL, BellDiagonalParams, bell_diagonal, bell_eigenvalues

MAX_BISECTIONS = 60


@dataclass(frozen=True)
class SurfaceRequest:
    kind: MeasureKind
    target: float
    x: float = PROJECTIVE
    resolution: int = 64
    tolerance: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "kind", MeasureKind.parse(self.kind))
        if not self.target > 1e-4:
            raise ValueError(f"target must exceed 1e-4 bits, got {self.target}")
        if not 16 <= self.resolution <= 512:
            raise ValueError(f"resolution must be in [16, 512], got {self.resolution}")
        object.__setattr__(self, "x", strength(self.x) if self.kind.is_weak else PROJECTIVE)


@dataclass
class SurfacePointCloud:
    points: np.ndarray
    residuals: np.ndarray
    # grid edge of each point: (i, j, k, axis) of the lower node and the edge direction
    edges: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def to_csv(self, with_edges: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["c1", "c2", "c3", "residual"] + (["i", "j", "k", "axis"] if with_edges else [])
        w.writerow(header)
        for n, (pt, r) in enumerate(zip(self.points, self.residuals)):
            row = [_fmt(v) for v in pt] + [_fmt(r)]
            if with_edges:
                row += [str(int(v)) for v in self.edges[n]]
            w.writerow(row)
        return buf.getvalue()

    def to_json(self, with_edges: bool = False) -> str:
        d = {
            "points": self.points.tolist(),
            "residuals": self.residuals.tolist(),
            "diagnostics": self.diagnostics,
        }
        if with_edges:
            d["edges"] = self.edges.tolist()
        return json.dumps(d)


def _fmt(v) -> str:
    s = f"{float(v):.12g}"
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _physical(c):
    return bell_eigenvalues(c).min(axis=-1) >= -PHYSICAL_TOL


def _field(kind, x):
    return lambda c: bell_value(kind, c, x)


def level_surface(req: SurfaceRequest, spot_check_fraction: float = 0.0, seed: int = 0) -> SurfacePointCloud:
    """Points where the Bell-diagonal measure equals ``req.target``.

    Scans the grid on [-1, 1]^3; every grid edge whose two endpoints are physical
    and straddle the target gets one crossing, seeded by linear interpolation and
    refined by bisection until the residual is within ``req.tolerance``.
    """
    f = _field(req.kind, req.x)
    n = req.resolution
    axis = np.linspace(-1.0, 1.0, n + 1)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    phys = _physical(grid)
    vals = np.full(phys.shape, np.nan)
    vals[phys] = f(grid[phys])
    vals -= req.target

    lows, highs, ids = [], [], []
    for ax in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[ax] = slice(0, n)
        hi[ax] = slice(1, n + 1)
        v0, v1 = vals[tuple(lo)], vals[tuple(hi)]
        ok = np.isfinite(v0) & np.isfinite(v1) & ((v0 >= 0) != (v1 >= 0))
        idx = np.argwhere(ok)
        if len(idx) == 0:
            continue
        lows.append(grid[tuple(lo)][ok])
        highs.append(grid[tuple(hi)][ok])
        ids.append(np.column_stack([idx, np.full(len(idx), ax)]))
    if not lows:
        return SurfacePointCloud(np.zeros((0, 3)), np.zeros(0), np.zeros((0, 4), int), {"dropped": 0, "edges_crossed": 0})

    # edges are emitted axis by axis, each in C order: a deterministic ordering
    a, b = np.concatenate(lows), np.concatenate(highs)
    edge_ids = np.concatenate(ids)
    fa, fb = f(a) - req.target, f(b) - req.target
    # orient every edge so that the measure increases from a to b
    swap = fa > fb
    a[swap], b[swap] = b[swap].copy(), a[swap].copy()
    fa, fb = np.minimum(fa, fb), np.maximum(fa, fb)

    w = np.clip(-fa / np.where(fb - fa > 0, fb - fa, 1.0), 0.0, 1.0)
    lo_t, hi_t = np.zeros(len(a)), np.ones(len(a))
    t = w
    for _ in range(MAX_BISECTIONS):
        pt = a + t[:, None] * (b - a)
        r = f(pt) - req.target
        done = np.abs(r) <= req.tolerance
        if done.all():
            break
        below = r < 0
        lo_t = np.where(below & ~done, t, lo_t)
        hi_t = np.where(~below & ~done, t, hi_t)
        t = np.where(done, t, 0.5 * (lo_t + hi_t))
    pt = a + t[:, None] * (b - a)
    res = np.abs(f(pt) - req.target)
    keep = (res <= req.tolerance) & _physical(pt)
    cloud = SurfacePointCloud(
        pt[keep],
        res[keep],
        edge_ids[keep],
        {"dropped": int((~keep).sum()), "edges_crossed": int(len(a))},
    )
    if spot_check_fraction > 0 and len(cloud):
        cloud.diagnostics["oracle_max_deviation"] = _spot_check(cloud, req, spot_check_fraction, seed)
    return cloud


def _spot_check(cloud, req, fraction, seed):
    rng = np.random.default_rng(seed)
    m = max(1, int(round(fraction * len(cloud))))
    picks = rng.choice(len(cloud), size=m, replace=False)
    opts = OptimizerOptions(coarse_grid=(16, 8))
    dev = 0.0
    for i in sorted(picks):
        num = measure_numeric(req.kind, bell_diagonal(*cloud.points[i]), req.x, opts).value
        dev = max(dev, abs(num - req.target))
    return dev


def tetrahedron_exit_radius(u) -> float:
    """Largest r with r*u inside the physical tetrahedron (u a unit direction)."""
    signs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    proj = signs @ np.asarray(u, dtype=float)
    proj = proj[proj > 0]
    return float((1.0 / proj).min())


def ray_crossing(kind, u, target: float, x=PROJECTIVE, samples: int = 512, tol: float = 1e-12):
    """Radius of the first crossing of ``target`` along the ray r*u from the origin.

    Returns None if the measure stays below the target up to the tetrahedron boundary.
    """
    kind = MeasureKind.parse(kind)
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    rmax = tetrahedron_exit_radius(u)
    f = _field(kind, x if kind.is_weak else PROJECTIVE)
    rs = np.linspace(0.0, rmax, samples + 1)
    vals = f(rs[:, None] * u) - target
    hit = np.nonzero(vals >= 0)[0]
    if len(hit) == 0:
        return None
    j = int(hit[0])
    if j == 0:
        return 0.0
    lo, hi = rs[j - 1], rs[j]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid * u) - target >= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return float(0.5 * (lo + hi))


# ---- sweeps ----------------------------------------------------------------


@dataclass
class Table:
    columns: list
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"columns": self.columns, "rows": [list(r) for r in self.rows]})

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def _num(v):
    return "inf" if v == PROJECTIVE else v


def _werner_row(kinds, z, x, p):
    vals = []
    for k in kinds:
        xx = x if k.is_weak else None
        if p is None:
            vals.append(werner_measure(k, z, xx).value)
        else:
            vals.append(channel_measure_werner(k, z, xx, p).value)
    return vals


def _bell_row(kinds, c, x, p):
    vals = []
    for k in kinds:
        xx = x if k.is_weak else None
        if p is None:
            vals.append(bell_measure(k, c, xx).value)
            continue
        a = np.abs(c.c)
        if k in (MeasureKind.DISCORD, MeasureKind.SUPER_DISCORD) and a[0] < a[1] < a[2]:
            vals.append(channel_measure_bell(k, c, xx, p).value)
        else:
            vals.append(bell_measure(k, evolved_bell_params(c, p), xx).value)
    return vals


def sweep(kinds, family: str, *, z=None, c=None, x=(PROJECTIVE,), p=None, threads: int = 1) -> Table:
    """Row-major table over (z or fixed c) x x x p, one column per requested measure.

    ``p=None`` means no decoherence and drops the p column.
    """
    kinds = [MeasureKind.parse(k) for k in kinds]
    xs = [strength(v) for v in x]
    ps = None if p is None else [float(v) for v in p]
    if family == "werner":
        if z is None:
            raise ValueError("werner sweep needs z values")
        outer = [float(v) for v in z]
        lead = ["z"]
    elif family == "bell_diagonal":
        if c is None:
            raise ValueError("bell_diagonal sweep needs fixed coefficients c")
        params = c if isinstance(c, BellDiagonalParams) else BellDiagonalParams(*map(float, c))
        params.check()
        outer = [params]
        lead = ["c1", "c2", "c3"]
    else:
        raise ValueError(f"unknown family {family!r}")
    columns = lead + ["x"] + ([] if ps is None else ["p"]) + [k.value for k in kinds]
    points = list(itertools.product(outer, xs, ps if ps is not None else [None]))

    def row(point):
        o, xv, pv = point
        if family == "werner":
            vals = _werner_row(kinds, o, xv, pv)
            head = [o]
        else:
            vals = _bell_row(kinds, o, xv, pv)
            head = list(map(float, o.c))
        return head + [_num(xv)] + ([] if pv is None else [pv]) + vals

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(row, points))
    else:
        rows = [row(pt) for pt in points]
    return Table(columns, rows)


def parse_range(spec: str):
    """'a:b:step' (inclusive of b up to rounding) or comma list; 'inf' allowed in lists."""
    spec = spec.strip()
    if not spec:
        return []
    if ":" in spec:
        start, stop, step = (float(v) for v in spec.split(":"))
        if step <= 0:
            raise ValueError(f"range step must be positive: {spec!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [math.inf if v.strip().lower() == "inf" else float(v) for v in spec.split(",")]
