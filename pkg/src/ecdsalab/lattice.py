"""Exact LLL reduction and the hidden-number-problem lattice.

Gram-Schmidt data is kept fraction-free: ``dets[i]`` is the Gram determinant
of the first i+1 rows and ``lam[i][j] = dets[j] * mu[i][j]`` is an integer,
so the reduction never touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .bigmod import mod_inv
from .errors import BadBound, DependentRows

__all__ = [
    "LatticeBasis",
    "HnpInstance",
    "lll_reduce",
    "build_hnp_lattice",
    "extract_candidates",
    "dump_basis",
    "parse_basis",
]


@dataclass(frozen=True)
class LatticeBasis:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        if rows and len({len(r) for r in rows}) != 1:
            raise ValueError("basis rows must all have the same length")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, rows: Iterable[Sequence[int]]) -> "LatticeBasis":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]


@dataclass(frozen=True)
class HnpInstance:
    """Relations k_i = t_i*d + u_i (mod n) with every k_i < 2^L."""

    n: int
    L: int
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_signatures(cls, sigs, n: int, L: int) -> "HnpInstance":
        pairs = []
        for sm in sigs:
            sinv = mod_inv(sm.s, n)
            pairs.append((sm.r * sinv % n, sm.h * sinv % n))
        return cls(n, L, tuple(pairs))


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis: LatticeBasis | Sequence[Sequence[int]], delta=Fraction(99, 100)) -> LatticeBasis:
    """LLL-reduce the rows of ``basis`` with Lovász parameter ``delta``.

    Integral variant of the classical algorithm (Cohen, Alg. 2.6.7) with a
    rational delta.  Raises DependentRows if the rows are linearly dependent.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    dn, dd = delta.numerator, delta.denominator

    b = [list(row) for row in basis]
    m = len(b)
    if m == 0:
        return LatticeBasis(())
    # dets[i + 1] is the Gram determinant of rows 0..i; dets[0] = 1.
    dets = [1] * (m + 1)
    lam = [[0] * m for _ in range(m)]

    def gram_schmidt_row(k):
        for j in range(k + 1):
            u = _dot(b[k], b[j])
            for i in range(j):
                u = (dets[i + 1] * u - lam[k][i] * lam[j][i]) // dets[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise DependentRows(f"row {k} is dependent on the rows before it")
                dets[k + 1] = u

    def size_reduce(k, l):
        if 2 * abs(lam[k][l]) > dets[l + 1]:
            q = (2 * lam[k][l] + dets[l + 1]) // (2 * dets[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * dets[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        B = (dets[k - 1] * dets[k + 1] + lk * lk) // dets[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (dets[k + 1] * lam[i][k - 1] - lk * t) // dets[k]
            lam[i][k - 1] = (B * t + lk * lam[i][k]) // dets[k + 1]
        dets[k] = B

    gram_schmidt_row(0)
    k, kmax = 1, 0
    while k < m:
        if k > kmax:
            kmax = k
            gram_schmidt_row(k)
        size_reduce(k, k - 1)
        # Lovász: B_k >= (delta - mu^2) B_{k-1}, scaled to integers.
        lhs = dd * dets[k + 1] * dets[k - 1]
        rhs = dn * dets[k] * dets[k] - dd * lam[k][k - 1] ** 2
        if lhs < rhs:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                size_reduce(k, l)
            k += 1
    return LatticeBasis.of(b)


def build_hnp_lattice(inst: HnpInstance) -> LatticeBasis:
    """(t+2)-dimensional embedding, scaled by n so every entry is an integer.

    Rows 0..t-1 are n^2 * e_i; row t is (n*t_1, ..., n*t_t, 2^L, 0); row t+1
    is (n*u_1, ..., n*u_t, 0, n*2^L).  The combination with coefficient d on
    row t and 1 on row t+1 is (n*k_1, ..., n*k_t, d*2^L, n*2^L).
    """
    n, L = inst.n, inst.L
    t = len(inst.pairs)
    if t < 2:
        raise ValueError("need at least two relations")
    if not 0 <= L < n.bit_length():
        raise BadBound(f"nonce bound 2^{L} carries no information for a {n.bit_length()}-bit n")
    size = t + 2
    rows = []
    for i in range(t):
        row = [0] * size
        row[i] = n * n
        rows.append(row)
    rows.append([n * ti for ti, _ in inst.pairs] + [1 << L, 0])
    rows.append([n * ui for _, ui in inst.pairs] + [0, n << L])
    return LatticeBasis.of(rows)


def extract_candidates(reduced: LatticeBasis, inst: HnpInstance) -> list[int]:
    """Candidate hidden numbers from column t of each reduced row, both signs."""
    t = len(inst.pairs)
    scale = 1 << inst.L
    seen = set()
    out = []
    for row in reduced:
        for sign in (1, -1):
            v = sign * row[t]
            if v == 0:
                continue
            q, rem = divmod(v, scale)
            if rem:
                continue
            cand = q % inst.n
            if cand not in seen:
                seen.add(cand)
                out.append(cand)
    return out


def dump_basis(basis: LatticeBasis) -> str:
    return "\n".join(" ".join(str(v) for v in row) for row in basis) + "\n"


def parse_basis(text: str) -> LatticeBasis:
    return LatticeBasis.of(
        [int(tok) for tok in line.split()] for line in text.splitlines() if line.strip()
    )
