"""Spinor basis of the truncated Hilbert space.

Kets are |j mu n s> with s = up/down. Internally every label is carried
as twice its value (j2 = 2j and so on), which keeps all the +-1/2 shifts
in integer arithmetic.

Dense ordering within a truncation: level 2j ascending, then the up
block before the down block, then mu ascending, then n ascending. In
the relabelled coordinates x = mu + j and y = n + j +- 1/2 this is
row-major (x, y), so the index of a ket is a closed-form expression.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .qnum import HalfInt

__all__ = [
    "Spin",
    "UP",
    "DOWN",
    "SpinKet",
    "XYKet",
    "TruncatedSpace",
    "SparseVector",
    "InvalidKetError",
    "enumerate_basis",
    "to_xy",
    "from_xy",
    "is_valid",
    "level_offset",
    "dimension",
]

UP = 0
DOWN = 1


class Spin(enum.IntEnum):
    up = UP
    down = DOWN


class InvalidKetError(ValueError):
    pass


def is_valid(j2, mu2, n2, spin):
    """Vectorised validity test on doubled labels."""
    j2 = np.asarray(j2)
    mu2 = np.asarray(mu2)
    n2 = np.asarray(n2)
    spin = np.asarray(spin)
    ok_mu = (np.abs(mu2) <= j2) & ((j2 - mu2) % 2 == 0)
    nmax = np.where(spin == UP, j2 + 1, j2 - 1)
    ok_n = (np.abs(n2) <= nmax) & ((nmax - n2) % 2 == 0)
    return (j2 >= np.where(spin == UP, 0, 1)) & ok_mu & ok_n


@dataclass(frozen=True)
class SpinKet:
    j: HalfInt
    mu: HalfInt
    n: HalfInt
    spin: Spin

    def __post_init__(self):
        for name in ("j", "mu", "n"):
            object.__setattr__(self, name, HalfInt.of(getattr(self, name)))
        object.__setattr__(self, "spin", Spin(self.spin))
        if not is_valid(self.j.twice, self.mu.twice, self.n.twice, int(self.spin)):
            raise InvalidKetError(f"invalid ket {self}")

    def __str__(self):
        arrow = "up" if self.spin == Spin.up else "dn"
        return f"|{self.j},{self.mu},{self.n},{arrow}>"


@dataclass(frozen=True)
class XYKet:
    j: HalfInt
    x: int
    y: int
    spin: Spin

    def __post_init__(self):
        object.__setattr__(self, "j", HalfInt.of(self.j))
        object.__setattr__(self, "spin", Spin(self.spin))
        ymax = self.j.twice + (1 if self.spin == Spin.up else -1)
        if self.j.twice < 0 or not (0 <= self.x <= self.j.twice and 0 <= self.y <= ymax):
            raise InvalidKetError(f"invalid relabelled ket {self}")


def to_xy(k: SpinKet) -> XYKet:
    x2 = k.mu.twice + k.j.twice
    y2 = k.n.twice + k.j.twice + (1 if k.spin == Spin.up else -1)
    return XYKet(k.j, x2 // 2, y2 // 2, k.spin)


def from_xy(v: XYKet) -> SpinKet:
    mu2 = 2 * v.x - v.j.twice
    n2 = 2 * v.y - v.j.twice - (1 if v.spin == Spin.up else -1)
    return SpinKet(v.j, HalfInt(mu2), HalfInt(n2), v.spin)


def level_offset(k):
    """Number of kets with 2j < k, i.e. sum_{i<k} 2(i+1)^2."""
    k = np.asarray(k, dtype=np.int64)
    return k * (k + 1) * (2 * k + 1) // 3


def dimension(max2j: int) -> int:
    return int(level_offset(max2j + 1))


@dataclass(frozen=True, eq=False)
class TruncatedSpace:
    """All valid kets with 2j <= max2j, densely indexed.

    The label arrays are read-only, so one instance can be shared freely.
    """

    max2j: int
    j2: np.ndarray = field(repr=False)
    mu2: np.ndarray = field(repr=False)
    n2: np.ndarray = field(repr=False)
    spin: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.j2)

    def level_slice(self, k: int, spin: int | None = None) -> slice:
        start = int(level_offset(k))
        up = (k + 1) * (k + 2)
        if spin == UP:
            return slice(start, start + up)
        if spin == DOWN:
            return slice(start + up, start + 2 * (k + 1) ** 2)
        return slice(start, start + 2 * (k + 1) ** 2)

    def index_of(self, j2, mu2, n2, spin):
        """Dense index of labels (vectorised); -1 where invalid or beyond max2j."""
        j2 = np.asarray(j2, dtype=np.int64)
        mu2 = np.asarray(mu2, dtype=np.int64)
        n2 = np.asarray(n2, dtype=np.int64)
        spin = np.asarray(spin, dtype=np.int64)
        ok = is_valid(j2, mu2, n2, spin) & (j2 <= self.max2j)
        x = (mu2 + j2) // 2
        up = spin == UP
        y = (n2 + j2 + np.where(up, 1, -1)) // 2
        width = np.where(up, j2 + 2, j2)
        base = level_offset(j2) + np.where(up, 0, (j2 + 1) * (j2 + 2))
        idx = base + x * width + y
        return np.where(ok, idx, -1)

    def index(self, ket: SpinKet) -> int:
        i = int(self.index_of(ket.j.twice, ket.mu.twice, ket.n.twice, int(ket.spin)))
        if i < 0:
            raise InvalidKetError(f"{ket} is outside the truncation 2j <= {self.max2j}")
        return i

    def ket(self, i: int) -> SpinKet:
        return SpinKet(
            HalfInt(int(self.j2[i])), HalfInt(int(self.mu2[i])), HalfInt(int(self.n2[i])), Spin(int(self.spin[i]))
        )

    def xy(self):
        """Relabelled coordinates (x, y) for every ket."""
        x = (self.mu2 + self.j2) // 2
        y = (self.n2 + self.j2 + np.where(self.spin == UP, 1, -1)) // 2
        return x, y


def enumerate_basis(max2j: int) -> TruncatedSpace:
    if max2j < 0:
        raise ValueError("max2j must be non-negative")
    cols = [[], [], [], []]
    for k in range(max2j + 1):
        for spin, width in ((UP, k + 2), (DOWN, k)):
            x, y = np.divmod(np.arange((k + 1) * width), width) if width else (np.zeros(0, int), np.zeros(0, int))
            cols[0].append(np.full(len(x), k))
            cols[1].append(2 * x - k)
            cols[2].append(2 * y - k - (1 if spin == UP else -1))
            cols[3].append(np.full(len(x), spin))
    arrays = []
    for c in cols:
        a = np.concatenate(c).astype(np.int64)
        a.flags.writeable = False
        arrays.append(a)
    return TruncatedSpace(max2j, *arrays)


class SparseVector(dict):
    """Finite map dense-index -> amplitude."""

    def prune(self, tol: float = 1e-15) -> "SparseVector":
        for i in [i for i, v in self.items() if abs(v) < tol]:
            del self[i]
        return self

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(v) ** 2 for v in self.values())))

    def normalized(self) -> "SparseVector":
        n = self.norm()
        return SparseVector({i: v / n for i, v in self.items()}).prune()

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim, dtype=complex)
        for i, v in self.items():
            out[i] = v
        return out
