"""Haar analysis and synthesis on finite dyadic product grids.

Basis convention.  Per parameter ``s`` the orthonormal basis of step
functions on ``[0,1)**ds`` at depth ``N`` consists of the strict-signature
Haar functions ``h(cube, sig)`` for cubes of level ``< N`` together with
the constant function (the normalized indicator of the unit cube, labeled
by the all-ones signature).  The tensor basis over all parameters is the
product of these; a coefficient key is ``(DyadicRectangle, vector
signature)`` where a parameter sitting in its constant slot contributes
the unit cube with the all-ones signature.  The one key that is constant
in *every* parameter is stored separately as the expansion ``mean``.

Shift operators and the square function only look at the all-strict keys;
paraproducts additionally consume renormalized averages, which are inner
products against all-ones signatures at arbitrary levels and are computed
directly by :func:`haar_coefficient`.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .grid import (
    DyadicCube,
    DyadicRectangle,
    GridSpec,
    all_ones,
    is_strict,
    strict_signatures,
    unit_cube,
)
from .scalar import Scalar, ZERO, ONE, sqrt2_pow
from .stepfn import StepFunction

__all__ = [
    "haar_function",
    "haar_coefficient",
    "HaarExpansion",
    "analyze",
    "synthesize",
    "square_function",
    "square_function_sq",
    "lp_norm",
    "l2_norm_sq",
    "haar_basis_keys",
    "mean_key",
    "random_haar_function",
]


# -- pointwise values ---------------------------------------------------------


def _cube_haar_value(cube: DyadicCube, sig, cell_part, depth: int) -> Scalar:
    """Value of the one-parameter Haar function at a finest cell.

    The cell must lie inside the cube.  For a strict signature the sign on
    each axis flips on the lower half; the magnitude is |Q|**(-1/2).
    """
    k = cube.level
    mag = sqrt2_pow(k * cube.d)
    if not is_strict(sig):
        return mag
    shift = depth - k - 1
    sign = 1
    for eps, p in zip(sig, cell_part):
        if eps == 0 and ((p >> shift) & 1) == 0:
            sign = -sign
    return mag if sign > 0 else -mag


def _validate_key(grid: GridSpec, rect: DyadicRectangle, vecsig) -> None:
    if rect.t != grid.t or len(vecsig) != grid.t:
        raise ValueError("rectangle/signature arity does not match the grid")
    for cube, sig, d, n in zip(rect.factors, vecsig, grid.dims, grid.depth):
        if cube.d != d or len(sig) != d:
            raise ValueError("factor dimension mismatch")
        if cube.level > n:
            raise ValueError("rectangle finer than the grid depth")
        if is_strict(sig) and cube.level >= n:
            raise ValueError(
                "strict Haar function not resolvable at the finest level"
            )


def haar_cell_value(grid: GridSpec, rect: DyadicRectangle, vecsig, cell) -> Scalar:
    v = ONE
    for cube, sig, part, n in zip(rect.factors, vecsig, cell, grid.depth):
        v = v * _cube_haar_value(cube, sig, part, n)
    return v


@lru_cache(maxsize=8192)
def _haar_function_cached(grid: GridSpec, rect: DyadicRectangle, vecsig) -> StepFunction:
    _validate_key(grid, rect, vecsig)
    values = {}
    for cell in rect.cell_keys(grid.depth):
        values[cell] = haar_cell_value(grid, rect, vecsig, cell)
    return StepFunction(grid, values)


def haar_function(grid: GridSpec, rect: DyadicRectangle, vecsig) -> StepFunction:
    """The L2-normalized tensor Haar function for ``(rect, vecsig)``.

    Instances are cached per key and shared; step functions are never
    mutated in place, so sharing is safe.
    """
    return _haar_function_cached(grid, rect, tuple(vecsig))


def haar_coefficient(f: StepFunction, rect: DyadicRectangle, vecsig) -> Scalar:
    """Exact inner product of ``f`` with the tensor Haar function.

    Signatures may mix strict parts with all-ones parts at any level, so
    this also computes the renormalized averages used by paraproducts.
    """
    grid = f.grid
    _validate_key(grid, rect, vecsig)
    vol = grid.cell_volume_scalar()
    rect_cells = 1
    for cube, d, n in zip(rect.factors, grid.dims, grid.depth):
        rect_cells <<= (n - cube.level) * d
    total = ZERO
    if rect_cells <= len(f.values):
        for cell in rect.cell_keys(grid.depth):
            v = f.values.get(cell)
            if v is not None:
                total = total + v * haar_cell_value(grid, rect, vecsig, cell)
    else:
        for cell, v in f.values.items():
            if rect.contains_cell(cell, grid.depth):
                total = total + v * haar_cell_value(grid, rect, vecsig, cell)
    return total * vol


# -- expansions ---------------------------------------------------------------


def mean_key(grid: GridSpec):
    """The all-constant basis key (stored apart from ``coeffs``)."""
    rect = grid.unit_rectangle()
    return rect, tuple(all_ones(d) for d in grid.dims)


@lru_cache(maxsize=16)
def _cell_combo_table(grid: GridSpec):
    """Per cell: the non-constant basis keys it meets, with Haar values."""
    per_param_slots = []
    for s in range(grid.t):
        d, n = grid.dims[s], grid.depth[s]
        sigs = strict_signatures(d)
        mean_slot = (unit_cube(d), all_ones(d), ONE)
        table = {}
        for part in itertools.product(range(1 << n), repeat=d):
            slots = [mean_slot]
            for k in range(n):
                pos = tuple(p >> (n - k) for p in part)
                cube = DyadicCube(d, k, pos)
                mag = sqrt2_pow(k * d)
                bits = tuple((p >> (n - k - 1)) & 1 for p in part)
                for sig in sigs:
                    sign = 1
                    for eps, b in zip(sig, bits):
                        if eps == 0 and b == 0:
                            sign = -sign
                    slots.append((cube, sig, mag if sign > 0 else -mag))
            table[part] = slots
        per_param_slots.append(table)

    combos = {}
    for cell in grid.cells():
        opts = [per_param_slots[s][cell[s]] for s in range(grid.t)]
        entries = []
        for combo in itertools.product(*opts):
            if all(not is_strict(sig) for _, sig, _ in combo):
                continue  # the global mean is kept separately
            rect = DyadicRectangle(tuple(c for c, _, _ in combo))
            vecsig = tuple(sig for _, sig, _ in combo)
            val = ONE
            for _, _, v in combo:
                val = val * v
            entries.append(((rect, vecsig), val))
        combos[cell] = entries
    return combos


class HaarExpansion:
    """Exact Haar coefficients of a step function."""

    __slots__ = ("grid", "mean", "coeffs")

    def __init__(self, grid: GridSpec, mean: Scalar = ZERO, coeffs: dict | None = None):
        self.grid = grid
        self.mean = Scalar.coerce(mean)
        cleaned = {}
        if coeffs:
            for key, c in coeffs.items():
                c = Scalar.coerce(c)
                if not c.is_zero:
                    cleaned[key] = c
        self.coeffs = cleaned

    def get(self, key) -> Scalar:
        return self.coeffs.get(key, ZERO)

    def parseval_sq(self) -> Scalar:
        total = self.mean * self.mean
        for c in self.coeffs.values():
            total = total + c * c
        return total

    def strict_sq_sum(self) -> Scalar:
        """Sum of squared coefficients over all-strict keys only."""
        total = ZERO
        for (rect, vecsig), c in self.coeffs.items():
            if all(is_strict(sig) for sig in vecsig):
                total = total + c * c
        return total

    def __eq__(self, other):
        if not isinstance(other, HaarExpansion):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.mean == other.mean
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        return f"HaarExpansion(grid={self.grid!r}, nnz={len(self.coeffs)})"

    def to_json(self) -> dict:
        entries = []
        for (rect, vecsig) in sorted(self.coeffs, key=_key_sort):
            c = self.coeffs[(rect, vecsig)]
            a, b = c.to_fractions()
            entries.append(
                [
                    [[cube.level, list(cube.pos)] for cube in rect.factors],
                    [list(sig) for sig in vecsig],
                    str(a),
                    str(b),
                ]
            )
        ma, mb = self.mean.to_fractions()
        return {
            "schema_version": 1,
            "type": "haar_expansion",
            "dims": list(self.grid.dims),
            "depth": list(self.grid.depth),
            "mean": [str(ma), str(mb)],
            "coeffs": entries,
        }

    @classmethod
    def from_json(cls, data: dict) -> "HaarExpansion":
        if data.get("type") != "haar_expansion":
            raise ValueError("not a haar_expansion payload")
        from .scalar import from_fraction

        grid = GridSpec(tuple(data["dims"]), tuple(data["depth"]))
        mean = from_fraction(Fraction(data["mean"][0]), Fraction(data["mean"][1]))
        coeffs = {}
        for rect_raw, sig_raw, a, b in data["coeffs"]:
            factors = tuple(
                DyadicCube(d, level, tuple(pos))
                for (level, pos), d in zip(rect_raw, grid.dims)
            )
            key = (DyadicRectangle(factors), tuple(tuple(s) for s in sig_raw))
            coeffs[key] = from_fraction(Fraction(a), Fraction(b))
        return cls(grid, mean, coeffs)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, s: str) -> "HaarExpansion":
        return cls.from_json(json.loads(s))


def _key_sort(key):
    rect, vecsig = key
    return tuple(
        (cube.level, cube.pos, sig) for cube, sig in zip(rect.factors, vecsig)
    )


@lru_cache(maxsize=16)
def _cell_combo_index(grid: GridSpec):
    """Interned combo table: key list plus per-cell (index, value-triple) rows.

    The integer-triple form lets :func:`analyze` accumulate with plain int
    arithmetic, skipping Scalar allocation and rectangle hashing in the
    hot loop.
    """
    combos = _cell_combo_table(grid)
    keys: list = []
    key_id: dict = {}
    per_cell: dict = {}
    for cell, entries in combos.items():
        rows = []
        for key, hval in entries:
            i = key_id.get(key)
            if i is None:
                i = len(keys)
                key_id[key] = i
                keys.append(key)
            rows.append((i, hval.m, hval.n, hval.e))
        per_cell[cell] = rows
    return tuple(keys), per_cell


def analyze(f: StepFunction) -> HaarExpansion:
    """Exact Haar coefficients; inverse of :func:`synthesize`."""
    grid = f.grid
    keys, per_cell = _cell_combo_index(grid)
    vol_e = grid.cell_volume_scalar().e
    mean = ZERO
    acc: dict = {}
    for cell, v in f.values.items():
        mean = mean + v
        vm, vn, ve = v.m, v.n, v.e
        for idx, hm, hn, he in per_cell[cell]:
            pm = vm * hm + 2 * vn * hn
            pn = vm * hn + vn * hm
            pe = ve + he
            slot = acc.get(idx)
            if slot is None:
                acc[idx] = [pm, pn, pe]
            else:
                se = slot[2]
                if se == pe:
                    slot[0] += pm
                    slot[1] += pn
                elif se > pe:
                    d = se - pe
                    slot[0] += pm << d
                    slot[1] += pn << d
                else:
                    d = pe - se
                    slot[0] = (slot[0] << d) + pm
                    slot[1] = (slot[1] << d) + pn
                    slot[2] = pe
    coeffs: dict = {}
    for idx, (m, n, e) in acc.items():
        if m or n:
            coeffs[keys[idx]] = Scalar(m, n, e + vol_e)
    mean = mean * grid.cell_volume_scalar()
    return _expansion_unchecked(grid, mean, coeffs)


def _expansion_unchecked(grid, mean, coeffs) -> HaarExpansion:
    e = HaarExpansion.__new__(HaarExpansion)
    e.grid = grid
    e.mean = mean
    e.coeffs = coeffs
    return e


def synthesize(e: HaarExpansion) -> StepFunction:
    """Exact reconstruction from Haar coefficients."""
    grid = e.grid
    values: dict = {}
    if not e.mean.is_zero:
        for cell in grid.cells():
            values[cell] = e.mean
    for (rect, vecsig), c in e.coeffs.items():
        for cell in rect.cell_keys(grid.depth):
            add = c * haar_cell_value(grid, rect, vecsig, cell)
            cur = values.get(cell)
            values[cell] = add if cur is None else cur + add
    return StepFunction(grid, values)


# -- square function and norms ---------------------------------------------------


def square_function_sq(f: StepFunction) -> StepFunction:
    """Pointwise square of the multi-parameter square function, exact.

    Sums ``coeff**2 * 1_R / |R|`` over the all-strict keys; the square
    root (a float) is taken by :func:`square_function`.
    """
    grid = f.grid
    e = analyze(f)
    values: dict = {}
    for (rect, vecsig), c in e.coeffs.items():
        if not all(is_strict(sig) for sig in vecsig):
            continue
        inv_vol = Scalar(1, 0, -sum(q.level * q.d for q in rect.factors))
        add = c * c * inv_vol
        for cell in rect.cell_keys(grid.depth):
            cur = values.get(cell)
            values[cell] = add if cur is None else cur + add
    return StepFunction(grid, values)


def square_function(f: StepFunction) -> np.ndarray:
    """Float square function values in canonical cell order."""
    sq = square_function_sq(f)
    return np.sqrt(sq.to_array())


def lp_norm(f: StepFunction, p) -> float:
    return f.lp_norm(p)


def l2_norm_sq(f: StepFunction) -> Scalar:
    return f.l2_norm_sq()


# -- bases and random functions ----------------------------------------------------


@lru_cache(maxsize=16)
def haar_basis_keys(grid: GridSpec) -> tuple:
    """Ordered orthonormal basis keys: the mean key first, then all others."""
    seen = set()
    for entries in _cell_combo_table(grid).values():
        for key, _ in entries:
            seen.add(key)
    return (mean_key(grid),) + tuple(sorted(seen, key=_key_sort))


def basis_function(grid: GridSpec, key) -> StepFunction:
    rect, vecsig = key
    return haar_function(grid, rect, vecsig)


def random_haar_function(
    grid: GridSpec,
    rng,
    max_levels=None,
    include_mean: bool = False,
) -> StepFunction:
    """Seeded random function with coefficients in {-8..8}/8 on the
    all-strict Haar slots with factor levels bounded by ``max_levels``."""
    if max_levels is None:
        max_levels = tuple(n - 1 for n in grid.depth)
    elif isinstance(max_levels, int):
        max_levels = (max_levels,) * grid.t
    per_param = []
    for s in range(grid.t):
        d = grid.dims[s]
        top = min(max_levels[s], grid.depth[s] - 1)
        slots = [
            (cube, sig)
            for cube in grid.cubes(s, top)
            for sig in strict_signatures(d)
        ]
        per_param.append(slots)
    coeffs = {}
    for combo in itertools.product(*per_param):
        k = int(rng.integers(-8, 9))
        if k:
            rect = DyadicRectangle(tuple(c for c, _ in combo))
            vecsig = tuple(sig for _, sig in combo)
            coeffs[(rect, vecsig)] = Scalar(k, 0, 3)
    mean = ZERO
    if include_mean:
        mean = Scalar(int(rng.integers(-8, 9)), 0, 3)
    return synthesize(HaarExpansion(grid, mean, coeffs))
