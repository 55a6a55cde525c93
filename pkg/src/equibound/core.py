"""Joint probability grids, entropy functionals, and block symmetries.

Conventions used throughout the package:

- all logarithms are base 2, so entropies are in bits;
- 0 * log 0 = 0, and conditioning blocks with zero mass contribute 0;
- entries in [-1e-12, 0) are clamped to 0 on construction (repeated
  subtraction during simplex walks must not fail on representation noise);
- the total mass of a joint grid must be 1 within 1e-9.

A joint grid is indexed (i, j): row i ranges over the X alphabet, column j
over the Y alphabet. Storage is 0-based numpy; trace output and block
labels are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

NEG_TOL = 1e-12   # entries below -NEG_TOL are rejected; in [-NEG_TOL, 0) clamped
UPPER_TOL = 1e-9  # slack allowed above 1.0 for probabilities
MASS_TOL = 1e-9   # total-mass tolerance for joint grids

Axis = Literal["x", "y"]
Formula = Literal["difference", "mixture", "direct"]


class ValidationError(ValueError):
    """Input violates a domain precondition or a distribution invariant."""


def _as_prob(x: float, name: str) -> float:
    """Validate a scalar probability, clamping tolerated excursions into [0, 1]."""
    x = float(x)
    if not np.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {x!r}")
    if x < -NEG_TOL or x > 1.0 + UPPER_TOL:
        raise ValidationError(f"{name} must be in [0, 1], got {x}")
    return min(max(x, 0.0), 1.0)


def xlog2x(x: float) -> float:
    """x * log2(x), continuously extended so that xlog2x(0) = 0.

    The building block of every entropy here: H(v) = -sum_i xlog2x(v_i).
    Raises ValidationError outside [0, 1] beyond the clamp tolerances.
    """
    x = _as_prob(x, "x")
    if x == 0.0:
        return 0.0
    return x * math.log2(x)


def binary_entropy(eps: float) -> float:
    """Entropy of a Bernoulli(eps) variable in bits: -xlog2x(eps) - xlog2x(1-eps).

    Symmetric about 1/2; 0 at the endpoints; maximum 1 at eps = 1/2.
    """
    eps = _as_prob(eps, "eps")
    return -xlog2x(eps) - xlog2x(1.0 - eps)


def _xlog2x_arr(a: np.ndarray) -> np.ndarray:
    # non-positive entries take log2(1) = 0, so they contribute a * 0 = 0
    return a * np.log2(np.where(a > 0.0, a, 1.0))


def _field_path(name: str, index: np.ndarray) -> str:
    return name + "".join(f"[{int(k)}]" for k in index)


def _clean_vector(v, name: str) -> np.ndarray:
    a = np.array(v, dtype=np.float64)
    if not np.isfinite(a).all():
        k = np.argwhere(~np.isfinite(a))[0]
        raise ValidationError(f"{_field_path(name, k)} is not finite")
    if (a < -NEG_TOL).any():
        k = np.argwhere(a < -NEG_TOL)[0]
        raise ValidationError(f"{_field_path(name, k)} = {a[tuple(k)]} is negative beyond tolerance")
    if (a > 1.0 + UPPER_TOL).any():
        k = np.argwhere(a > 1.0 + UPPER_TOL)[0]
        raise ValidationError(f"{_field_path(name, k)} = {a[tuple(k)]} exceeds 1 beyond tolerance")
    a[a < 0.0] = 0.0
    return a


def entropy(v) -> float:
    """Shannon entropy -sum_i xlog2x(v_i) of a (possibly sub-normalized) vector, in bits.

    Entries must be in [0, 1] within tolerance; the sum is not checked, so
    sub-normalized block vectors can be fed directly.
    """
    a = _clean_vector(v, "v")
    return float(-_xlog2x_arr(a).sum())


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Immutable |X| x |Y| grid of probabilities p(i, j) with total mass 1.

    `probs` accepts any 2-d array-like; it is copied, validated (finite,
    entries >= -1e-12 with tolerated negatives clamped to 0, mass within
    1e-9 of 1) and frozen read-only.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.probs, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValidationError(f"probs must be a 2-d grid with positive dimensions, got shape {a.shape}")
        a = _clean_vector(a, "probs")
        total = float(a.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"total probability mass is {total}, must be 1 within {MASS_TOL}")
        a.flags.writeable = False
        object.__setattr__(self, "probs", a)

    @property
    def nx(self) -> int:
        return self.probs.shape[0]

    @property
    def ny(self) -> int:
        return self.probs.shape[1]

    def to_lists(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.probs]

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.array_equal(self.probs, other.probs))

    def __repr__(self) -> str:
        return f"JointDistribution(nx={self.nx}, ny={self.ny}, probs={self.to_lists()!r})"


@dataclass(frozen=True)
class DistributionPair:
    """An ordered pair (p, q) of joint distributions on a common alphabet."""

    p: JointDistribution
    q: JointDistribution

    def __post_init__(self) -> None:
        if (self.p.nx, self.p.ny) != (self.q.nx, self.q.ny):
            raise ValidationError(
                f"pair components have mismatched shapes {(self.p.nx, self.p.ny)} vs {(self.q.nx, self.q.ny)}"
            )

    @property
    def nx(self) -> int:
        return self.p.nx

    @property
    def ny(self) -> int:
        return self.p.ny


def _check_perm(perm, n: int, name: str) -> np.ndarray:
    a = np.array(perm, dtype=np.intp)
    if a.shape != (n,) or not np.array_equal(np.sort(a), np.arange(n)):
        raise ValidationError(f"{name} must be a permutation of 0..{n - 1}, got {perm!r}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SymmetryElement:
    """A permutation of Y-blocks plus an independent X-permutation inside each block.

    The group generated by these moves leaves the equivocation H(X|Y) and
    pairwise total variation distances invariant.

    Permutations are 0-based arrays mapping source index k to destination
    perm[k]; `within_perms` carries one X-permutation per destination block.
    """

    block_perm: np.ndarray
    within_perms: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        bp = np.array(self.block_perm, dtype=np.intp)
        if bp.ndim != 1 or bp.size < 1:
            raise ValidationError(f"block_perm must be a non-empty 1-d permutation, got {self.block_perm!r}")
        ny = bp.size
        bp = _check_perm(bp, ny, "block_perm")
        wps = tuple(self.within_perms)
        if len(wps) != ny:
            raise ValidationError(f"need {ny} within-block permutations, got {len(wps)}")
        nx = np.asarray(wps[0]).size
        wps = tuple(_check_perm(w, nx, f"within_perms[{j}]") for j, w in enumerate(wps))
        object.__setattr__(self, "block_perm", bp)
        object.__setattr__(self, "within_perms", wps)

    @property
    def nx(self) -> int:
        return len(self.within_perms[0])

    @property
    def ny(self) -> int:
        return len(self.block_perm)

    @classmethod
    def identity(cls, nx: int, ny: int) -> "SymmetryElement":
        return cls(np.arange(ny), tuple(np.arange(nx) for _ in range(ny)))

    @classmethod
    def random(cls, nx: int, ny: int, rng) -> "SymmetryElement":
        rng = np.random.default_rng(rng)
        return cls(rng.permutation(ny), tuple(rng.permutation(nx) for _ in range(ny)))


def marginal(J: JointDistribution, axis: Axis) -> np.ndarray:
    """Marginal vector of a joint grid: row sums for axis="x", column sums for "y"."""
    if axis == "x":
        return J.probs.sum(axis=1)
    if axis == "y":
        return J.probs.sum(axis=0)
    raise ValidationError(f'axis must be "x" or "y", got {axis!r}')


def _cond_entropy_difference(P: np.ndarray) -> float:
    # H(XY) - H(Y)
    my = P.sum(axis=0)
    return float(-_xlog2x_arr(P).sum() + _xlog2x_arr(my).sum())


def _cond_entropy_mixture(P: np.ndarray) -> float:
    # sum_j p_Y(j) * H(X | Y=j); zero-mass blocks contribute 0
    my = P.sum(axis=0)
    pos = my > 0.0
    if not pos.any():
        return 0.0
    cond = P[:, pos] / my[pos]
    block_h = -_xlog2x_arr(cond).sum(axis=0)
    return float(my[pos] @ block_h)


def _cond_entropy_direct(P: np.ndarray) -> float:
    # -sum_{i,j} p(i,j) * log2(p(i,j) / p_Y(j)); zero-probability terms contribute 0
    my = P.sum(axis=0)
    ratio = np.divide(P, my[None, :], out=np.ones_like(P), where=my[None, :] > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = P * np.log2(ratio)
    return float(-np.where(P > 0.0, t, 0.0).sum())


_COND_FORMULAS = {
    "difference": _cond_entropy_difference,
    "mixture": _cond_entropy_mixture,
    "direct": _cond_entropy_direct,
}


def conditional_entropy(J: JointDistribution, formula: Formula = "mixture") -> float:
    """Equivocation H(X|Y) of a joint grid, in bits.

    Three equivalent evaluation routes are kept as mutual cross-checks:

    - "difference": H(XY) - H(Y);
    - "mixture": sum_j p_Y(j) * H(X | Y=j), the default (the block-local
      route the simplex walk reasons with);
    - "direct": -sum_{i,j} p(i,j) * log2(p(i,j) / p_Y(j)).

    All three agree within 1e-10 on valid grids.
    """
    try:
        f = _COND_FORMULAS[formula]
    except KeyError:
        raise ValidationError(f"unknown formula {formula!r}; expected one of {sorted(_COND_FORMULAS)}") from None
    return f(J.probs)


def tv_distance(p: JointDistribution, q: JointDistribution) -> float:
    """Total variation distance (1/2) * sum_{i,j} |p(i,j) - q(i,j)| in [0, 1]."""
    if p.probs.shape != q.probs.shape:
        raise ValidationError(f"shape mismatch {p.probs.shape} vs {q.probs.shape}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def apply_symmetry(J: JointDistribution, g: SymmetryElement) -> JointDistribution:
    """Act with a block symmetry on a joint grid.

    output(i, j) = J(within_perms[j]^-1(i), block_perm^-1(j)); the result has
    the same equivocation as J, and the action preserves pairwise TV.
    """
    if (g.nx, g.ny) != (J.nx, J.ny):
        raise ValidationError(f"symmetry is {g.nx}x{g.ny} but grid is {J.nx}x{J.ny}")
    inv_block = np.argsort(g.block_perm)
    out = np.empty_like(J.probs)
    for j in range(J.ny):
        inv_within = np.argsort(g.within_perms[j])
        out[:, j] = J.probs[inv_within, inv_block[j]]
    return JointDistribution(out)
