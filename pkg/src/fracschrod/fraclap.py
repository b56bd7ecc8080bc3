"""Discrete integral fractional Laplacian on the truncated lattice.

The operator acts on a nodal field u by the singular-integral definition

    L u(x) = C(n, s) P.V. integral of (u(x) - u(y)) / |x - y|^(n + 2s) dy,

with the normalization C(n, s) = Gamma(n/2 + s) 4^s / (|Gamma(-s)| pi^(n/2)).

Quadrature scheme, per evaluation node x:

* every lattice cell inside the truncation ball carries the midpoint weight
  h^n / |x - y_j|^(n + 2s) against the difference u(x) - u(y_j);
* the cell centered at x itself is integrated through the symmetric
  second-difference form, whose numerator vanishes to second order and
  cancels the kernel singularity; its mass lands on the nearest axis
  neighbors and the balancing diagonal;
* cells centered on excluded boundary-lattice points take the value of the
  adjacent exterior node in the outward direction (admissible exterior data
  vanishes near the boundary, so the attribution is exact for it, and the
  assembled block stays symmetric with the M-matrix sign pattern);
* everything beyond the truncation ball is integrated in closed form and
  multiplies u(x) minus the assumed far-field value.

Assembly is row-independent over immutable grid data; the assembled
operator is immutable and apply() is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.integrate import quad

from .errors import (
    GridMismatch,
    NonPositiveRadius,
    OrderOutOfRange,
    SingularOverlap,
)
from .grid import Field, Grid, Region

__all__ = [
    "FracParams",
    "NonlocalOperator",
    "cns",
    "frac_params",
    "tail_mass",
    "assemble",
    "apply_operator",
    "evaluate_at",
    "operator_to_json",
]


def cns(n: int, s: float) -> float:
    """Normalization constant Gamma(n/2+s) 4^s / (|Gamma(-s)| pi^(n/2))."""
    if not 0.0 < s < 1.0:
        raise OrderOutOfRange(f"s = {s} must lie in (0, 1)")
    if n < 1:
        raise ValueError(f"dimension n = {n} must be >= 1")
    return gamma(n / 2 + s) * 4.0**s / (abs(gamma(-s)) * pi ** (n / 2))


@dataclass(frozen=True)
class FracParams:
    """Dimension, fractional order, and the kernel normalization constant."""

    n: int
    s: float
    cns: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"only n in {{1, 2}} supported, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise OrderOutOfRange(f"s = {self.s} must lie in (0, 1)")


def frac_params(n: int, s: float) -> FracParams:
    return FracParams(n=n, s=s, cns=cns(n, s))


def tail_mass(params: FracParams, r_eff: float) -> float:
    """Closed-form kernel mass beyond radius r_eff around the evaluation node.

    1D: both half-lines, 2 r^(-2s) / (2s); 2D: 2 pi r^(-2s) / (2s); scaled
    by the normalization constant.
    """
    if not r_eff > 0:
        raise NonPositiveRadius(f"r_eff = {r_eff}")
    if params.n == 1:
        return params.cns * 2.0 * r_eff ** (-2 * params.s) / (2 * params.s)
    return params.cns * 2.0 * pi * r_eff ** (-2 * params.s) / (2 * params.s)


@lru_cache(maxsize=None)
def _square_cell_mass(s: float) -> float:
    """Integral of |z|^(-2s) over the unit square [-1/2, 1/2]^2."""
    wedge, _ = quad(lambda t: (2.0 * np.cos(t)) ** (2 * s - 2), 0.0, pi / 4)
    return 8.0 / (2.0 - 2.0 * s) * 0.5 ** (2.0 - 2.0 * s) * wedge


def _singular_weight(params: FracParams, h: float) -> float:
    """Per-axis second-difference weight for the cell containing the node."""
    s = params.s
    if params.n == 1:
        return params.cns * (h / 2.0) ** (2 - 2 * s) / ((2 - 2 * s) * h * h)
    cell = h ** (2 - 2 * s) * _square_cell_mass(s)
    return params.cns * cell / (4.0 * h * h)


class _Quadrature:
    """Shared per-grid machinery for building operator rows.

    Holds the integer-lattice lookup, the per-axis singular-cell weight, and
    the outward attribution targets for every excluded boundary point; all
    of it immutable once built, so rows can be produced independently.
    """

    def __init__(self, grid: Grid, params: FracParams):
        self.grid = grid
        self.params = params
        self.h = grid.h
        self.center = grid.domain.center
        self.w_sing = _singular_weight(params, grid.h)
        self.table = {self._key(p): g for g, p in enumerate(grid.nodes)}
        self.bd_points = grid.boundary_points
        self.bd_cols = [self._outward_columns(b) for b in self.bd_points]

    def _key(self, p) -> tuple:
        return tuple(int(round(v)) for v in (np.asarray(p) - self.center) / self.h)

    def lookup(self, p):
        return self.table.get(self._key(p))

    def _outward_columns(self, b) -> list[int]:
        half = self.grid.domain.half_widths
        tol = 1e-9 * self.h
        cols = []
        for ax in range(self.grid.dim):
            if abs(abs(b[ax] - self.center[ax]) - half[ax]) <= tol:
                step = np.zeros(self.grid.dim)
                step[ax] = self.h if b[ax] > self.center[ax] else -self.h
                g = self.lookup(b + step)
                if g is not None and self.grid.labels[g] == Region.EXTERIOR:
                    cols.append(g)
        return cols

    def row(self, g: int) -> tuple[np.ndarray, float]:
        """Quadrature row at node g.

        Returns (weights, tail_coeff): nonnegative weights w_j over all
        nodes with w_g = 0, so that

            L u (x_g) = sum_j w_j (u_g - u_j) + tail_coeff (u_g - farfield).
        """
        grid, params = self.grid, self.params
        h, n, s = self.h, params.n, params.s
        x = grid.nodes[g]
        d = np.linalg.norm(grid.nodes - x, axis=1)
        d[g] = 1.0
        if np.any(d < 0.5 * h - 1e-12):
            raise SingularOverlap(f"nodes closer than h/2 near {tuple(x)}")
        w = params.cns * h**n / d ** (n + 2 * s)
        w[g] = 0.0

        tail_coeff = 0.0
        if len(self.bd_points):
            wb = params.cns * h**n / np.linalg.norm(
                x - self.bd_points, axis=1) ** (n + 2 * s)
            for mass, cols in zip(wb, self.bd_cols):
                if cols:
                    for c in cols:
                        w[c] += mass / len(cols)
                else:
                    tail_coeff += mass

        for ax in range(n):
            for sign in (-1.0, 1.0):
                step = np.zeros(n)
                step[ax] = sign * h
                nb = self.lookup(x + step)
                if nb is not None:
                    w[nb] += self.w_sing
                else:
                    cols = self._outward_columns(x + step)
                    if cols:
                        for c in cols:
                            w[c] += self.w_sing / len(cols)
                    else:
                        tail_coeff += self.w_sing

        if n == 1:
            dd = float(x[0] - self.center[0])
            left = max(grid.R + dd, 0.5 * h)
            right = max(grid.R - dd, 0.5 * h)
            tail_coeff += 0.5 * (tail_mass(params, left) + tail_mass(params, right))
        else:
            r_eff = max(grid.R - float(np.linalg.norm(x - self.center)), 0.5 * h)
            tail_coeff += tail_mass(params, r_eff)
        return w, tail_coeff


@dataclass(frozen=True, eq=False)
class NonlocalOperator:
    """Assembled fractional Laplacian restricted to interior rows.

    a_ii is symmetric with positive diagonal and nonpositive off-diagonal
    entries; a_ie is nonpositive; tail holds the closed-form kernel mass
    beyond the truncation ball per interior node.  Row sums of [a_ii a_ie]
    vanish, so constants with matching far-field are annihilated exactly.
    """

    params: FracParams
    grid: Grid
    a_ii: np.ndarray
    a_ie: np.ndarray
    tail: np.ndarray

    def apply(self, u: Field, farfield: float = 0.0) -> np.ndarray:
        return apply_operator(self, u, farfield)

    @property
    def _quadrature(self) -> _Quadrature:
        q = getattr(self, "_quadrature_cache", None)
        if q is None:
            q = _Quadrature(self.grid, self.params)
            object.__setattr__(self, "_quadrature_cache", q)
        return q


def assemble(grid: Grid, s: float) -> NonlocalOperator:
    """Assemble the discrete operator for a grid and fractional order."""
    params = frac_params(grid.dim, s)
    quadrature = _Quadrature(grid, params)
    ni = grid.n_interior
    a_ii = np.zeros((ni, ni))
    a_ie = np.zeros((ni, grid.n_exterior))
    tail = np.zeros(ni)

    loc = grid.local_of_global()
    for r, g in enumerate(grid.interior_index):
        w, tail_coeff = quadrature.row(g)
        a_ii[r] = -w[grid.interior_index]
        a_ie[r] = -w[grid.exterior_index]
        tail[r] = tail_coeff
        a_ii[r, loc[g]] = np.sum(w[grid.interior_index]) + np.sum(w[grid.exterior_index])

    for arr in (a_ii, a_ie, tail):
        arr.setflags(write=False)
    op = NonlocalOperator(params=params, grid=grid, a_ii=a_ii, a_ie=a_ie, tail=tail)
    object.__setattr__(op, "_quadrature_cache", quadrature)
    return op


def apply_operator(op: NonlocalOperator, u: Field, farfield: float = 0.0) -> np.ndarray:
    """Operator value at every interior node.

    Evaluated in the difference form sum_j w_ij (u_i - u_j), so constants
    with matching far-field are annihilated exactly, not merely to roundoff.
    """
    if not u.grid.same_as(op.grid):
        raise GridMismatch("field grid differs from operator grid")
    ui = u.interior_values
    ue = u.exterior_values
    out = np.empty(op.grid.n_interior)
    for r in range(op.grid.n_interior):
        out[r] = (np.dot(-op.a_ii[r], ui[r] - ui)
                  + np.dot(-op.a_ie[r], ui[r] - ue)
                  + op.tail[r] * (ui[r] - farfield))
    return out


def evaluate_at(op: NonlocalOperator, u: Field, index: int,
                farfield: float = 0.0) -> float:
    """Pointwise operator value at an arbitrary node (typically exterior).

    Same quadrature as assembly.  For nodes near the edge of the truncation
    ball the tail distance is clamped below at h/2.
    """
    if not u.grid.same_as(op.grid):
        raise GridMismatch("field grid differs from operator grid")
    w, tail_coeff = op._quadrature.row(index)
    v = u.values[index]
    return float(np.dot(w, v - u.values) + tail_coeff * (v - farfield))


def operator_row(op: NonlocalOperator, index: int) -> tuple[np.ndarray, float]:
    """Raw quadrature row (weights over all nodes, tail coefficient) at a node."""
    return op._quadrature.row(index)


def operator_to_json(op: NonlocalOperator) -> dict:
    """Binary-free JSON dump of the assembled matrices for diffing."""
    return {
        "params": {"n": op.params.n, "s": op.params.s, "cns": op.params.cns},
        "h": op.grid.h,
        "R": op.grid.R,
        "a_ii": [[float(v) for v in row] for row in op.a_ii],
        "a_ie": [[float(v) for v in row] for row in op.a_ie],
        "tail": [float(v) for v in op.tail],
    }
