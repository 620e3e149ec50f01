"""Box geometry: covers of binding input boxes and the derived relaxation boxes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .model import LipschitzMinlp, NormSpec, evaluate


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("box bounds differ in dimension")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def volume(self, dims=None) -> float:
        w = self.width if dims is None else self.width[dims]
        return float(np.prod(w))


def center(box: Box) -> np.ndarray:
    return 0.5 * (box.lower + box.upper)


def shrink(box: Box, lam: float) -> Box:
    """``[(1-lam) lo + lam hi, lam lo + (1-lam) hi]`` for ``lam`` in (0, 1/2]."""
    if not 0.0 < lam <= 0.5:
        raise ValueError("lambda must lie in (0, 1/2]")
    lo = (1.0 - lam) * box.lower + lam * box.upper
    hi = lam * box.lower + (1.0 - lam) * box.upper
    if lam == 0.5:
        hi = lo
    return Box(np.minimum(lo, hi), np.maximum(lo, hi))


def split(box: Box, x) -> list | None:
    """Children of ``box`` cut through ``x`` along every coordinate where ``x`` is interior.

    Returns None when no coordinate qualifies.
    """
    x = np.asarray(x, dtype=float)
    cut = np.flatnonzero((box.lower < x) & (x < box.upper))
    if cut.size == 0:
        return None
    children = []
    for sides in itertools.product((0, 1), repeat=cut.size):
        lo = box.lower.copy()
        hi = box.upper.copy()
        for ell, side in zip(cut, sides):
            if side == 0:
                hi[ell] = x[ell]
            else:
                lo[ell] = x[ell]
        children.append(Box(lo, hi))
    return children


@dataclass
class OmegaBox:
    """Input box plus output bounds ``f(m) -+ (L/2) ||width||``."""

    base: Box
    y_lower: float
    y_upper: float
    center_value: float
    radius: float
    norm: NormSpec

    def contains(self, x_in, y, tol: float = 1e-9) -> bool:
        return self.base.contains(x_in, tol) and self.y_lower - tol <= y <= self.y_upper + tol


def box_norm(problem: LipschitzMinlp, i: int, box: Box) -> NormSpec:
    b = problem.nonlinearities[i]
    if b.local_lipschitz_hook is not None:
        return b.local_lipschitz_hook(box)
    return b.norm


def omega_of(box: Box, problem: LipschitzMinlp, i: int) -> OmegaBox:
    """Relaxation box over ``box`` for binding ``i`` (one oracle call at the center)."""
    b = problem.nonlinearities[i]
    norm = box_norm(problem, i, box)
    fm = evaluate(problem, i, center(box))
    radius = 0.5 * b.lipschitz * norm(box.width)
    if not np.isfinite(radius):
        raise ValueError(f"binding {b.name!r}: non-finite radius")
    return OmegaBox(box, fm - radius, fm + radius, fm, radius, norm)


@dataclass
class BoxPartition:
    """Flat indexed cover of a binding's input box.

    Boxes rejected by the binding's filter stay in the list (so the cover is
    complete) with ``active`` False and no relaxation box.
    """

    binding: int
    initial: Box
    boxes: list = field(default_factory=list)
    omegas: list = field(default_factory=list)
    active: list = field(default_factory=list)
    generation: list = field(default_factory=list)

    @classmethod
    def create(cls, problem: LipschitzMinlp, i: int) -> "BoxPartition":
        lo, hi = problem.input_bounds(i)
        init = Box(lo, hi)
        part = cls(i, init)
        part._append(problem, init, 0)
        return part

    def _make(self, problem, box):
        b = problem.nonlinearities[self.binding]
        if b.box_filter is not None and not b.box_filter(box):
            return None, False
        return omega_of(box, problem, self.binding), True

    def _append(self, problem, box, gen):
        om, keep = self._make(problem, box)
        self.boxes.append(box)
        self.omegas.append(om)
        self.active.append(keep)
        self.generation.append(gen)

    def refine(self, problem: LipschitzMinlp, j: int, point) -> list | None:
        """Replace box ``j`` by its split through ``point``; returns the new indices."""
        children = split(self.boxes[j], point)
        if children is None:
            return None
        gen = self.generation[j] + 1
        om, keep = self._make(problem, children[0])
        self.boxes[j], self.omegas[j], self.active[j], self.generation[j] = children[0], om, keep, gen
        idx = [j]
        for child in children[1:]:
            idx.append(len(self.boxes))
            self._append(problem, child, gen)
        return idx

    def __len__(self) -> int:
        return len(self.boxes)

    @property
    def n_active(self) -> int:
        return int(sum(self.active))

    def active_indices(self) -> list:
        return [j for j, a in enumerate(self.active) if a]


def locate(partition: BoxPartition, point, tol: float = 0.0, active_only: bool = False) -> int:
    """Lowest index of a box whose closure contains ``point`` (-1 if none)."""
    x = np.asarray(point, dtype=float)
    for j, box in enumerate(partition.boxes):
        if active_only and not partition.active[j]:
            continue
        if box.contains(x, tol):
            return j
    return -1


@dataclass
class CoverReport:
    volume_error: float
    max_overlap: float
    outside: int

    @property
    def ok(self) -> bool:
        return self.volume_error <= 1e-12 and self.max_overlap <= 1e-12 and self.outside == 0


def verify_cover(partition: BoxPartition) -> CoverReport:
    """Check volume identity and pairwise interior disjointness (relative to the initial box)."""
    init = partition.initial
    dims = np.flatnonzero(init.width > 0)
    total = init.volume(dims)
    lo = np.array([b.lower for b in partition.boxes]).reshape(len(partition), -1)
    hi = np.array([b.upper for b in partition.boxes]).reshape(len(partition), -1)
    outside = int(np.sum(np.any((lo < init.lower) | (hi > init.upper), axis=1)))
    if dims.size == 0:
        return CoverReport(0.0, 0.0, outside)
    lo, hi = lo[:, dims], hi[:, dims]
    vols = np.prod(hi - lo, axis=1)
    vol_err = abs(float(vols.sum()) - total) / total
    overlap = 0.0
    for a in range(len(partition) - 1):
        inter = np.minimum(hi[a], hi[a + 1:]) - np.maximum(lo[a], lo[a + 1:])
        ov = np.prod(np.clip(inter, 0.0, None), axis=1)
        if ov.size:
            overlap = max(overlap, float(ov.max()) / total)
    return CoverReport(vol_err, overlap, outside)
