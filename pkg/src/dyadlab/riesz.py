"""Discrete Riesz transforms and randomized shift sampling on periodic lattices.

Everything here is floating point: the Fourier multipliers are irrational,
so no exactness is claimed.  Functions live on the n**d lattice of the
periodic unit domain, with inner product ``(1/n**d) * sum(u * conj(v))``.

The sampling half draws translated/dilated dyadic grids (dyadic scale
factor t in [1, 2], dyadic offset y, both lattice-aligned), builds the
induced shift operator as a dense matrix, and measures how well the span
of many sampled shift matrices approximates a Riesz multiplier in
Frobenius distance.  Scale factors other than 1 tile only part of the
circle (full intervals only); the gap is a recorded limitation of the
lattice model.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PeriodicGridFunction",
    "discrete_riesz",
    "riesz_matrix",
    "RandomGridSample",
    "draw_grid_samples",
    "sample_shift_matrix",
    "span_residual",
]


@dataclass
class PeriodicGridFunction:
    """Complex lattice function on the n**d periodic grid."""

    d: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        expected = (self.n,) * self.d
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != expected:
            raise ValueError(f"values must have shape {expected}")

    @classmethod
    def from_real(cls, values) -> "PeriodicGridFunction":
        arr = np.asarray(values, dtype=np.float64)
        return cls(arr.ndim, arr.shape[0], arr.astype(np.complex128))

    def fft(self) -> np.ndarray:
        return np.fft.fftn(self.values)

    def mean(self) -> complex:
        return complex(self.values.mean())

    def inner(self, other: "PeriodicGridFunction") -> complex:
        return complex(np.vdot(other.values, self.values) / self.n**self.d)


def _frequencies(d: int, n: int):
    """Integer frequency grids, one array per axis, broadcastable."""
    freq = np.fft.fftfreq(n, d=1.0 / n)
    grids = np.meshgrid(*([freq] * d), indexing="ij")
    return grids


def _riesz_multiplier(d: int, n: int, j: int) -> np.ndarray:
    grids = _frequencies(d, n)
    norm = np.sqrt(sum(g * g for g in grids))
    with np.errstate(divide="ignore", invalid="ignore"):
        mult = -1j * grids[j - 1] / norm
    mult[tuple([0] * d)] = 0.0
    return mult


def discrete_riesz(j: int, f: PeriodicGridFunction) -> PeriodicGridFunction:
    """Fourier multiplier ``-i xi_j / |xi|`` (zero at the zero frequency).

    ``j = 0`` is the identity by convention.
    """
    if j == 0:
        return PeriodicGridFunction(f.d, f.n, f.values.copy())
    if not 1 <= j <= f.d:
        raise ValueError("component out of range")
    mult = _riesz_multiplier(f.d, f.n, j)
    out = np.fft.ifftn(np.fft.fftn(f.values) * mult)
    return PeriodicGridFunction(f.d, f.n, out)


def riesz_matrix(d: int, n: int, j: int) -> np.ndarray:
    """Dense matrix of the j-th Riesz transform on the flattened lattice."""
    size = n**d
    if j == 0:
        return np.eye(size, dtype=np.complex128)
    mult = _riesz_multiplier(d, n, j)
    cols = np.fft.ifftn(
        np.fft.fftn(np.eye(size).reshape((n,) * d + (size,)), axes=tuple(range(d)))
        * mult[..., None],
        axes=tuple(range(d)),
    )
    return cols.reshape(size, size)


# -- sampled dyadic shift operators -----------------------------------------------


@dataclass(frozen=True)
class RandomGridSample:
    """A translated/dilated dyadic grid plus a shift-map choice.

    The scale factor is ``t = t_num / 2**t_log2den`` in [1, 2]; the offset
    per axis is ``y_s = y_num[s] / 2**(N - t_log2den)`` so that every
    scaled interval endpoint lands on the lattice.  ``child_index`` fixes
    the cube rule (constant child); ``sig_rotation`` rotates signature
    bits (a no-op for d = 1).
    """

    d: int
    n: int
    t_num: int
    t_log2den: int
    y_num: tuple
    child_index: int
    sig_rotation: int
    seed: int

    @property
    def t_value(self) -> float:
        return self.t_num / (1 << self.t_log2den)


def draw_grid_samples(d: int, n: int, count: int, seed: int) -> list[RandomGridSample]:
    """Reproducible sample list; one rng stream per master seed."""
    logn = n.bit_length() - 1
    if 1 << logn != n:
        raise ValueError("n must be a power of two")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(0, min(3, max(1, logn - 1)) + 1))
        t_num = int(rng.integers(1 << m, (1 << (m + 1)) + 1))
        y_den_log = logn - m
        y = tuple(int(rng.integers(0, 1 << y_den_log)) for _ in range(d))
        child = int(rng.integers(0, 1 << d))
        rot = int(rng.integers(0, d))
        out.append(RandomGridSample(d, n, t_num, m, y, child, rot, seed))
    return out


def _sample_cubes(sample: RandomGridSample):
    """Lattice cubes (start vector, side) of the sampled grid, by level.

    Cube sides are ``t * 2**-k * n`` lattice units; a cube participates in
    the shift when its side is divisible by 4 (the child's Haar profile
    must still halve).  Only full intervals are kept per level.
    """
    d, n = sample.d, sample.n
    logn = n.bit_length() - 1
    p, m = sample.t_num, sample.t_log2den
    cubes = []
    for k in range(0, logn - m + 1):
        side = p << (logn - m - k) if logn - m - k >= 0 else 0
        if side == 0 or side % 4 != 0 or side > n:
            continue
        per_level = n // side
        if per_level == 0:
            continue
        base = tuple((p * y) % n for y in sample.y_num)
        ranges = [range(per_level)] * d
        for idx in itertools.product(*ranges):
            start = tuple((base[a] + idx[a] * side) % n for a in range(d))
            cubes.append((start, side))
    return cubes


def _haar_vector(d: int, n: int, start, side, sig) -> np.ndarray:
    """Lattice Haar function: tensor of per-axis profiles, L2-normalized
    against the (1/n**d) counting measure."""
    prof = []
    for a in range(d):
        axis = np.zeros(n)
        half = side // 2
        idx = (np.arange(side) + start[a]) % n
        if sig[a] == 1:
            axis[idx] = 1.0
        else:
            axis[idx[:half]] = -1.0
            axis[idx[half:]] = 1.0
        prof.append(axis)
    out = prof[0]
    for axis in prof[1:]:
        out = np.multiply.outer(out, axis)
    return out / np.sqrt((side / n) ** d)


def _child(start, side, index, d):
    half = side // 2
    return tuple(start[a] + ((index >> a) & 1) * half for a in range(d)), half


def sample_shift_matrix(sample: RandomGridSample) -> np.ndarray:
    """Dense matrix of the sampled shift on the flattened lattice.

    Maps each strict Haar function of the sampled grid to the same
    signature (rotated) on the chosen child; rows/columns use the
    ``(1/n**d)`` inner product.
    """
    d, n = sample.d, sample.n
    size = n**d
    strict = [
        s for s in itertools.product((0, 1), repeat=d) if s != (1,) * d
    ]
    mat = np.zeros((size, size))
    for start, side in _sample_cubes(sample):
        cstart, cside = _child(start, side, sample.child_index, d)
        cstart = tuple(c % n for c in cstart)
        for sig in strict:
            rot = sample.sig_rotation % d
            out_sig = sig[-rot:] + sig[:-rot] if rot else sig
            h_in = _haar_vector(d, n, start, side, sig).reshape(size)
            h_out = _haar_vector(d, n, cstart, cside, out_sig).reshape(size)
            mat += np.outer(h_out, h_in)
    return mat / size


def span_residual(matrices, target: np.ndarray) -> np.ndarray:
    """Normalized Frobenius distance from ``target`` to the span of the
    first M sampled matrices, for M = 0 .. len(matrices).

    Computed by incremental orthonormalization, so the sequence is
    non-increasing by construction; entry 0 is 1.0.
    """
    t = np.asarray(target, dtype=np.complex128).ravel()
    t_norm = np.linalg.norm(t)
    if t_norm == 0:
        raise ValueError("target must be nonzero")
    basis: list[np.ndarray] = []
    res_sq = 1.0
    out = [1.0]
    cutoff = 1e-10
    for m in matrices:
        v = np.asarray(m, dtype=np.complex128).ravel()
        for q in basis:  # two-pass Gram-Schmidt for stability
            v = v - np.vdot(q, v) * q
        for q in basis:
            v = v - np.vdot(q, v) * q
        nv = np.linalg.norm(v)
        if nv > cutoff * max(1.0, np.linalg.norm(np.asarray(m).ravel())):
            q = v / nv
            basis.append(q)
            proj = np.vdot(q, t / t_norm)
            res_sq = max(res_sq - abs(proj) ** 2, 0.0)
        out.append(np.sqrt(res_sq))
    return np.array(out)
