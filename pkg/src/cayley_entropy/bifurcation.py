"""Partition and sweep of the (a, z) plane for fixed child couplings.

In the sheared coordinates ``s = a - 1 + z`` and ``t = a - 1 - z`` the
partition lines are axis parallel: the plus-set only changes when ``-s``
crosses a coupling sum ``alpha.v`` and the minus-set only when ``t`` does.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ctnn import (
    BasicSet,
    ChildCouplings,
    RegionCode,
    Template,
    admissible_patterns,
    critical_a,
    ctnn_entropy,
    vertices,
)
from .errors import BoundaryParameter, ParseError


@dataclass(frozen=True)
class PlaneCell:
    code: RegionCode
    representative: tuple[float, float]
    s_bounds: tuple[float, float]
    t_bounds: tuple[float, float]


@dataclass
class PlanePartition:
    cc: ChildCouplings
    thresholds: list[float]
    cells: list[PlaneCell]

    @property
    def degenerate(self) -> bool:
        return self.cc.degenerate


def _intervals(points: Sequence[float]) -> list[tuple[float, float, float]]:
    """Open intervals cut by sorted ``points`` with an interior representative each."""
    bounds = [-math.inf, *points, math.inf]
    out = []
    for lo, hi in zip(bounds, bounds[1:]):
        if math.isinf(lo) and math.isinf(hi):
            rep = 0.0
        elif math.isinf(lo):
            rep = hi - 1.0
        elif math.isinf(hi):
            rep = lo + 1.0
        else:
            rep = 0.5 * (lo + hi)
        out.append((lo, hi, rep))
    return out


def partition_plane(cc: ChildCouplings) -> PlanePartition:
    """Cells of the (a, z) plane on which the basic set is constant."""
    sums = cc.distinct_sums()
    all_sums = list(cc.C)
    # plus-set changes where s = -c, minus-set where t = c
    s_cuts = sorted(-c for c in sums)
    t_cuts = sorted(sums)
    cells = []
    for s_lo, s_hi, s in _intervals(s_cuts):
        p = sum(1 for c in all_sums if c > -s)
        for t_lo, t_hi, t in _intervals(t_cuts):
            q = sum(1 for c in all_sums if c < t)
            rep = (1.0 + 0.5 * (s + t), 0.5 * (s - t))
            cells.append(PlaneCell(RegionCode(p, q), rep, (s_lo, s_hi), (t_lo, t_hi)))
    return PlanePartition(cc, sums, cells)


def cell_basic_sets(partition: PlanePartition) -> list[BasicSet]:
    return [
        admissible_patterns(Template(cell.representative[0], partition.cc.alpha, cell.representative[1]))
        for cell in partition.cells
    ]


# -- sweep ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    a: float
    z: float
    p: int
    q: int
    entropy: float
    critical: bool
    boundary: bool


@dataclass
class SweepGrid:
    alpha: tuple[float, ...]
    a_values: list[float]
    z_values: list[float]
    tol: float
    points: list[SweepPoint] = field(default_factory=list)

    def at(self, i_a: int, i_z: int) -> SweepPoint:
        """Point with the i_a-th a value and the i_z-th z value (z outer)."""
        return self.points[i_z * len(self.a_values) + i_a]


def _axis(bounds, n) -> list[float]:
    lo, hi = map(float, bounds)
    if not hi > lo:
        raise ValueError(f"empty range {bounds}")
    if n < 2:
        raise ValueError(f"resolution must be >= 2, got {n}")
    return np.linspace(lo, hi, n).tolist()


def _sweep_row(args) -> list[SweepPoint]:
    alpha, a_values, z, tol = args
    row = []
    for a in a_values:
        T = Template(a, alpha, z)
        crit = abs(a - critical_a(T.couplings(), z)) <= tol
        try:
            res = ctnn_entropy(T)
        except BoundaryParameter:
            row.append(SweepPoint(a, z, -1, -1, math.nan, crit, True))
            continue
        row.append(SweepPoint(a, z, res.code.p, res.code.q, res.entropy, crit, False))
    return row


def sweep(
    cc: ChildCouplings,
    a_range: Sequence[float],
    z_range: Sequence[float],
    resolution,
    tol: Optional[float] = None,
    workers: int = 1,
) -> SweepGrid:
    """Evaluate entropy, region code and criticality on a rectangular grid.

    ``resolution`` is a point count per axis (an int, or an ``(n_a, n_z)``
    pair).  ``tol`` for the critical flag defaults to the a-axis step.
    Rows (fixed z) are farmed out to ``workers`` processes and reassembled in
    grid order, so the result does not depend on the worker count.
    """
    n_a, n_z = (resolution, resolution) if isinstance(resolution, int) else resolution
    a_values = _axis(a_range, n_a)
    z_values = _axis(z_range, n_z)
    if tol is None:
        tol = a_values[1] - a_values[0]
    jobs = [(cc.alpha, a_values, z, tol) for z in z_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(job) for job in jobs]
    points = [pt for row in rows for pt in row]
    return SweepGrid(cc.alpha, a_values, z_values, tol, points)


# -- distinct basic sets ----------------------------------------------------------


@dataclass
class BasicSetCatalog:
    count: int
    per_alpha: dict[tuple[float, ...], int]
    catalog: dict[BasicSet, list[tuple[tuple[float, ...], RegionCode]]]


def default_orderings(d: int) -> list[tuple[float, ...]]:
    """One coupling vector per sign pattern and magnitude ordering (2**d * d! of them)."""
    mags = [(i + 1) / (d + 1) for i in range(d)]
    out = []
    for perm in itertools.permutations(mags):
        for signs in itertools.product((1, -1), repeat=d):
            out.append(tuple(s * m for s, m in zip(signs, perm)))
    return out


def distinct_basic_sets(
    d: int = 2,
    alpha_samples: Optional[Sequence[Sequence[float]]] = None,
    az_grid: Optional[Sequence[tuple[float, float]]] = None,
) -> BasicSetCatalog:
    """Catalogue the basic sets reachable from each coupling vector's cells.

    Extra ``(a, z)`` points in ``az_grid`` are classified as well; points on
    a partition line are ignored.
    """
    alphas = [tuple(map(float, a)) for a in alpha_samples] if alpha_samples is not None else default_orderings(d)
    catalog: dict[BasicSet, list] = {}
    per_alpha = {}
    for alpha in alphas:
        if len(alpha) != d:
            raise ValueError(f"coupling vector {alpha} does not have {d} entries")
        part = partition_plane(ChildCouplings.from_alpha(alpha))
        seen = set()
        for cell, B in zip(part.cells, cell_basic_sets(part)):
            seen.add(B)
            catalog.setdefault(B, []).append((alpha, cell.code))
        for a, z in az_grid or ():
            try:
                B = admissible_patterns(Template(a, alpha, z))
            except BoundaryParameter:
                continue
            if B not in seen:
                seen.add(B)
                catalog.setdefault(B, []).append((alpha, B.code))
        per_alpha[alpha] = len(seen)
    return BasicSetCatalog(len(catalog), per_alpha, catalog)


# -- output ---------------------------------------------------------------------

CSV_HEADER = "a,z,p,q,entropy,critical,boundary"


def _fmt(x: float) -> str:
    return "%.12g" % x


def grid_to_csv(grid: SweepGrid) -> str:
    lines = [CSV_HEADER]
    for pt in grid.points:
        lines.append(
            ",".join(
                [_fmt(pt.a), _fmt(pt.z), str(pt.p), str(pt.q), _fmt(pt.entropy), str(int(pt.critical)), str(int(pt.boundary))]
            )
        )
    return "\n".join(lines) + "\n"


def grid_to_svg(grid: SweepGrid, cell_px: int = 4) -> str:
    """Cells coloured by entropy class with the critical curve on top.

    The a axis runs upward and the z axis to the right, as in the usual
    bifurcation picture.
    """
    n_a, n_z = len(grid.a_values), len(grid.z_values)
    width, height = n_z * cell_px, n_a * cell_px
    a_lo, a_hi = grid.a_values[0], grid.a_values[-1]
    z_lo, z_hi = grid.z_values[0], grid.z_values[-1]
    ln_d = math.log(len(grid.alpha))

    def to_x(z):
        return (z - z_lo) / (z_hi - z_lo) * (width - cell_px) + cell_px / 2

    def to_y(a):
        return height - ((a - a_lo) / (a_hi - a_lo) * (height - cell_px) + cell_px / 2)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    for i_z in range(n_z):
        for i_a in range(n_a):
            pt = grid.at(i_a, i_z)
            if pt.boundary:
                color = "#bbbbbb"
            elif abs(pt.entropy - ln_d) <= 1e-9 and ln_d > 0:
                color = "#f2c14e"
            else:
                color = "#2e4057"
            x = i_z * cell_px
            y = height - (i_a + 1) * cell_px
            out.append(f'<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" fill="{color}"/>')
    cc = ChildCouplings.from_alpha(grid.alpha)
    zs = np.linspace(z_lo, z_hi, max(2 * n_z, 50))
    pts = " ".join(f"{to_x(z):.3f},{to_y(critical_a(cc, z)):.3f}" for z in zs)
    out.append(f'<polyline id="critical-curve" points="{pts}" fill="none" stroke="#d7263d" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_diagram(grid: SweepGrid, fmt: str, path) -> Path:
    if not grid.points:
        raise ValueError("grid has no points")
    if fmt == "csv":
        text = grid_to_csv(grid)
    elif fmt == "svg":
        text = grid_to_svg(grid)
    else:
        raise ValueError(f"unknown diagram format {fmt!r}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


@dataclass
class RunConfig:
    d: int
    alpha: tuple[float, ...]
    a_range: tuple[float, float]
    z_range: tuple[float, float]
    resolution: object
    tol: Optional[float] = None


def load_run_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        alpha = tuple(float(x) for x in doc["alpha"])
        res = doc["resolution"]
        res = int(res) if isinstance(res, (int, float)) else tuple(int(r) for r in res)
        cfg = RunConfig(
            int(doc.get("d", len(alpha))),
            alpha,
            tuple(map(float, doc["a_range"])),
            tuple(map(float, doc["z_range"])),
            res,
            None if doc.get("tol") is None else float(doc["tol"]),
        )
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad run config: {exc}") from None
    if cfg.d != len(cfg.alpha):
        raise ParseError(f"'d' is {cfg.d} but alpha has {len(cfg.alpha)} entries")
    return cfg
