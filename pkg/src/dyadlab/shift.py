"""Dyadic shift operators.

A shift map is a pair of rules: a cube rule sending every dyadic cube to
one of its children (so the image has measure ``2**-d`` of the source,
and the map is injective), and a signature rule sending every strict
signature to a strict signature or to ``None`` (the corresponding Haar
function is annihilated).  The induced operator moves each strict Haar
coefficient to the shifted slot and kills the constant component; it is
an exact L2 contraction.

Tensor shifts act factor-wise on product grids; ``None`` in a slot means
the identity on that parameter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError
from .grid import DyadicCube, DyadicRectangle, GridSpec, is_strict
from .haar import HaarExpansion, analyze, basis_function, haar_basis_keys, synthesize
from .scalar import ZERO
from .stepfn import StepFunction

__all__ = [
    "ShiftMap",
    "ShiftOperator",
    "TensorShift",
    "apply_shift",
    "apply_shift_counting",
    "tensor_apply",
    "tensor_apply_counting",
    "matrix_in_haar_basis",
    "matrix_to_float",
]

CUBE_PRESETS = ("first-child", "rotating")
SIG_PRESETS = ("identity", "cyclic")


@dataclass(frozen=True)
class ShiftMap:
    """Cube rule plus signature rule, both total on their domains.

    Cube rules: ``("first-child",)`` picks child 0; ``("rotating",)``
    picks child ``sum(pos) mod 2**d``; ``("child", c)`` always picks child
    ``c``; ``("table", items, default)`` maps levels to child indices.
    Signature rules: ``("identity",)``, ``("cyclic",)`` (rotate bits right
    by one) and ``("kill", sig)`` (send one signature to zero, keep the
    rest).
    """

    d: int
    cube_rule: tuple
    sig_rule: tuple

    @classmethod
    def preset(cls, d: int, cube="first-child", sig="identity") -> "ShiftMap":
        return cls(d, _normalize_cube_rule(cube), _normalize_sig_rule(sig, d))

    def sigma_cube(self, cube: DyadicCube) -> DyadicCube:
        if cube.d != self.d:
            raise ValueError("cube dimension mismatch")
        kind = self.cube_rule[0]
        if kind == "first-child":
            idx = 0
        elif kind == "rotating":
            idx = sum(cube.pos) % (1 << self.d)
        elif kind == "child":
            idx = self.cube_rule[1]
        elif kind == "table":
            table = dict(self.cube_rule[1])
            idx = table.get(cube.level, self.cube_rule[2])
        else:  # pragma: no cover - constructor validates
            raise ValueError(f"unknown cube rule {kind}")
        return cube.child(idx)

    def sigma_sig(self, sig: tuple[int, ...]):
        if len(sig) != self.d or not is_strict(sig):
            raise ValueError("signature must be strict and of matching dimension")
        kind = self.sig_rule[0]
        if kind == "identity":
            return sig
        if kind == "cyclic":
            return (sig[-1],) + sig[:-1]
        if kind == "kill":
            return None if sig == self.sig_rule[1] else sig
        raise ValueError(f"unknown signature rule {kind}")  # pragma: no cover

    # -- serialization: {level pattern -> child index, signature -> signature|null}

    def to_json(self) -> dict:
        kind = self.cube_rule[0]
        if kind in CUBE_PRESETS:
            cube = kind
        elif kind == "child":
            cube = {"child": self.cube_rule[1]}
        else:
            cube = {
                "levels": {str(k): v for k, v in self.cube_rule[1]},
                "default": self.cube_rule[2],
            }
        skind = self.sig_rule[0]
        if skind in SIG_PRESETS:
            sig = skind
        else:
            sig = {"kill": list(self.sig_rule[1])}
        return {"d": self.d, "cube_rule": cube, "sig_rule": sig}

    @classmethod
    def from_json(cls, data) -> "ShiftMap":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.preset(data["d"], data["cube_rule"], data["sig_rule"])


def _normalize_cube_rule(rule) -> tuple:
    if isinstance(rule, tuple):
        return rule
    if isinstance(rule, str):
        if rule not in CUBE_PRESETS:
            raise ValueError(f"unknown cube preset {rule!r}")
        return (rule,)
    if isinstance(rule, dict):
        if "child" in rule:
            return ("child", int(rule["child"]))
        if "levels" in rule:
            items = tuple(sorted((int(k), int(v)) for k, v in rule["levels"].items()))
            return ("table", items, int(rule.get("default", 0)))
    raise ValueError(f"cannot interpret cube rule {rule!r}")


def _normalize_sig_rule(rule, d: int) -> tuple:
    if isinstance(rule, tuple) and rule and rule[0] in ("identity", "cyclic", "kill"):
        return rule
    if isinstance(rule, str):
        if rule not in SIG_PRESETS:
            raise ValueError(f"unknown signature preset {rule!r}")
        return (rule,)
    if isinstance(rule, dict) and "kill" in rule:
        sig = tuple(int(b) for b in rule["kill"])
        if len(sig) != d or not is_strict(sig):
            raise ValueError("kill target must be a strict signature of dimension d")
        return ("kill", sig)
    raise ValueError(f"cannot interpret signature rule {rule!r}")


@dataclass(frozen=True)
class ShiftOperator:
    """Linear operator induced by a shift map on one parameter."""

    d: int
    smap: ShiftMap

    def __post_init__(self):
        if self.smap.d != self.d:
            raise ValueError("shift map dimension mismatch")

    @classmethod
    def from_map(cls, smap: ShiftMap) -> "ShiftOperator":
        return cls(smap.d, smap)


@dataclass(frozen=True)
class TensorShift:
    """Factor-wise shifts; ``None`` slots act as the identity."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @classmethod
    def single(cls, smap: ShiftMap) -> "TensorShift":
        return cls((ShiftOperator.from_map(smap),))

    @classmethod
    def of_maps(cls, maps) -> "TensorShift":
        return cls(tuple(None if m is None else ShiftOperator.from_map(m) for m in maps))

    @classmethod
    def identity(cls, t: int) -> "TensorShift":
        return cls((None,) * t)

    @property
    def t(self) -> int:
        return len(self.parts)

    def active_slots(self) -> list[int]:
        return [s for s, q in enumerate(self.parts) if q is not None]

    def apply(self, f: StepFunction) -> StepFunction:
        return tensor_apply(self, f)


def tensor_apply_counting(ts: TensorShift, f: StepFunction):
    """Apply a tensor shift; also count coefficients lost to grid depth.

    Signature kills are semantic zeros, not truncations, and are not
    counted.  The constant slot of every shifted parameter is annihilated.
    """
    grid = f.grid
    if ts.t != grid.t:
        raise ValueError("tensor shift arity does not match the grid")
    active = ts.active_slots()
    if not active:
        return f, 0
    e = analyze(f)
    out: dict = {}
    truncated = 0
    for (rect, vecsig), c in e.coeffs.items():
        cubes = list(rect.factors)
        sigs = list(vecsig)
        keep = True
        for s in active:
            sig = sigs[s]
            if not is_strict(sig):
                keep = False  # constant component of parameter s
                break
            nsig = ts.parts[s].smap.sigma_sig(sig)
            if nsig is None:
                keep = False
                break
            ncube = ts.parts[s].smap.sigma_cube(cubes[s])
            if ncube.level > grid.depth[s] - 1:
                truncated += 1
                keep = False
                break
            cubes[s] = ncube
            sigs[s] = nsig
        if not keep:
            continue
        key = (DyadicRectangle(tuple(cubes)), tuple(sigs))
        cur = out.get(key)
        out[key] = c if cur is None else cur + c
    return synthesize(HaarExpansion(grid, ZERO, out)), truncated


def tensor_apply(ts: TensorShift, f: StepFunction) -> StepFunction:
    return tensor_apply_counting(ts, f)[0]


def apply_shift_counting(q, f: StepFunction):
    """One-parameter shift application with a truncation count."""
    smap = q.smap if isinstance(q, ShiftOperator) else q
    return tensor_apply_counting(TensorShift.single(smap), f)


def apply_shift(q, f: StepFunction) -> StepFunction:
    return apply_shift_counting(q, f)[0]


def matrix_in_haar_basis(op, grid: GridSpec, cap: int = 4096):
    """Dense exact matrix of an operator in the ordered Haar basis.

    ``op`` is a :class:`TensorShift` or any callable taking and returning
    step functions on ``grid``.  Column ``j`` holds the coefficients of
    the image of the ``j``-th basis element; row/column 0 is the constant
    slot.
    """
    keys = haar_basis_keys(grid)
    size = len(keys)
    if size > cap:
        raise CapExceededError(f"basis size {size} exceeds cap {cap}")
    apply = op.apply if isinstance(op, TensorShift) else op
    cols = []
    for key in keys:
        g = apply(basis_function(grid, key))
        e = analyze(g)
        col = [e.mean] + [e.get(k) for k in keys[1:]]
        cols.append(col)
    return [[cols[j][i] for j in range(size)] for i in range(size)]


def matrix_to_float(mat) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in mat], dtype=np.float64)
