"""Private-key recovery from misused ECDSA nonces.

Every attack checks its candidate key against the victim's public key before
returning it; a candidate that fails the check becomes an exception, never a
silent wrong answer.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Sequence

from .bigmod import mod_inv, to_hex
from .curve import CurveParams, encode_point, registry_get, scalar_mul
from .ecdsa import SignedMessage
from .errors import (
    BadBound,
    NotFound,
    NotInvertible,
    PreconditionFailed,
    SingularSystem,
    ValidationFailed,
    WrongNonce,
)
from .lattice import HnpInstance, build_hnp_lattice, extract_candidates, lll_reduce

__all__ = [
    "RecoveryResult",
    "TwoKeyRecovery",
    "RGroup",
    "recover_from_revealed_nonce",
    "detect_duplicate_r",
    "recover_from_nonce_reuse",
    "recover_two_keys_shared_nonces",
    "recover_from_fault",
    "recover_from_biased_nonces",
    "solve_mod",
    "closed_form_two_keys",
]


@dataclass(frozen=True)
class RecoveryResult:
    attack: str
    curve: str
    d: int
    k: int | None = None
    evidence: tuple = ()
    extra: dict = field(default_factory=dict, compare=False)

    def report(self, indices: Sequence[int] | None = None) -> dict:
        c = registry_get(self.curve)
        w = c.scalar_bytes
        out = {
            "attack": self.attack,
            "curve": self.curve,
            "pub": encode_point(self.evidence[0].Q, c),
            "recovered_d": to_hex(self.d, w),
        }
        if self.k is not None:
            out["recovered_k"] = to_hex(self.k, w)
        out["evidence"] = list(indices) if indices is not None else list(range(len(self.evidence)))
        return out


@dataclass(frozen=True)
class TwoKeyRecovery:
    curve: str
    x1: int
    x2: int
    k1: int
    k2: int
    evidence: tuple = ()

    def report(self, indices: Sequence[int] | None = None) -> dict:
        c = registry_get(self.curve)
        w = c.scalar_bytes
        return {
            "attack": "two-key",
            "curve": self.curve,
            "pub": [encode_point(self.evidence[0].Q, c), encode_point(self.evidence[1].Q, c)],
            "recovered_d": [to_hex(self.x1, w), to_hex(self.x2, w)],
            "recovered_k": [to_hex(self.k1, w), to_hex(self.k2, w)],
            "evidence": list(indices) if indices is not None else [0, 1, 2, 3],
        }


def _curve_of(*sigs: SignedMessage) -> CurveParams:
    ids = {sm.curve for sm in sigs}
    if len(ids) != 1:
        raise PreconditionFailed(f"signatures span several curves: {sorted(ids)}")
    return registry_get(ids.pop())


def _key_matches(d: int, sm: SignedMessage, c: CurveParams) -> bool:
    return d % c.n != 0 and scalar_mul(d, c.G, c) == sm.Q


def _nonce_matches(k: int, r: int, c: CurveParams) -> bool:
    if k % c.n == 0:
        return False
    R = scalar_mul(k, c.G, c)
    return not R.is_infinity and R.x % c.n == r


def recover_from_revealed_nonce(sm: SignedMessage, k: int) -> RecoveryResult:
    """d = r^-1 * (s*k - h) mod n."""
    c = _curve_of(sm)
    n = c.n
    if not 1 <= k < n:
        raise WrongNonce("nonce must lie in [1, n-1]")
    d = mod_inv(sm.r, n) * (sm.s * k - sm.h) % n
    if not _key_matches(d, sm, c):
        raise WrongNonce("recovered key does not match the public key; k is not this signature's nonce")
    return RecoveryResult("revealed-nonce", c.id, d, k, (sm,))


def recover_from_nonce_reuse(sm1: SignedMessage, sm2: SignedMessage) -> RecoveryResult:
    """Two signatures by one key sharing r: k = (h1-h2)/(s1-s2), then d from k.

    A second signature whose s was negated (n - s, still valid) used nonce
    -k from the attacker's point of view, so both signs of s2 are tried.
    """
    c = _curve_of(sm1, sm2)
    n = c.n
    if sm1.Q != sm2.Q:
        raise PreconditionFailed("signatures are under different public keys")
    if sm1.r != sm2.r:
        raise PreconditionFailed("r values differ; no nonce reuse")
    if sm1.h % n == sm2.h % n:
        raise PreconditionFailed("identical message digests carry no information")
    r, h1, h2, s1 = sm1.r, sm1.h, sm2.h, sm1.s
    if (s1 - sm2.s) % n == 0 or (s1 + sm2.s) % n == 0:
        raise PreconditionFailed("s1 = +/- s2; the reuse equations are degenerate")
    rinv = mod_inv(r, n)
    for s2 in (sm2.s, n - sm2.s):
        k = (h1 - h2) * mod_inv(s1 - s2, n) % n
        d = rinv * (s1 * k - h1) % n
        # direct quotient d = (s2*h1 - s1*h2) / (r*(s1 - s2)) must agree
        direct = (s2 * h1 - s1 * h2) * mod_inv(r * (s1 - s2), n) % n
        assert direct == d, "k-first and direct nonce-reuse formulas disagree"
        if _key_matches(d, sm1, c):
            if not _nonce_matches(k, r, c):
                k = n - k
            return RecoveryResult("reuse", c.id, d, k, (sm1, sm2))
    raise ValidationFailed("no key consistent with both signatures; they do not share a nonce")


# -- duplicate-r scan --------------------------------------------------------


@dataclass(frozen=True)
class RGroup:
    """Indices of corpus records sharing one r value.

    kind is "reuse" (one key, distinct digests: attackable), "duplicate"
    (the same key and digest repeated) or "cross-key" (several keys).
    """

    kind: str
    r: int
    indices: tuple[int, ...]


def detect_duplicate_r(corpus: Sequence[SignedMessage]) -> list[RGroup]:
    """Group records by (curve, r).  Output is ordered by first occurrence."""
    buckets: OrderedDict = OrderedDict()
    for i, sm in enumerate(corpus):
        c = registry_get(sm.curve)
        buckets.setdefault((sm.curve, sm.r.to_bytes(c.scalar_bytes, "big")), []).append(i)

    groups = []
    for (_, _), idx in buckets.items():
        if len(idx) < 2:
            continue
        r = corpus[idx[0]].r
        by_key: OrderedDict = OrderedDict()
        for i in idx:
            by_key.setdefault(corpus[i].Q, []).append(i)
        for key_idx in by_key.values():
            if len(key_idx) < 2:
                continue
            first_by_h: OrderedDict = OrderedDict()
            repeats = []
            for i in key_idx:
                h = corpus[i].h
                if h in first_by_h:
                    repeats.append(i)
                else:
                    first_by_h[h] = i
            if len(first_by_h) >= 2:
                groups.append(RGroup("reuse", r, tuple(first_by_h.values())))
            if repeats:
                dup = sorted({first_by_h[corpus[i].h] for i in repeats} | set(repeats))
                groups.append(RGroup("duplicate", r, tuple(dup)))
        if len(by_key) >= 2:
            groups.append(RGroup("cross-key", r, tuple(idx)))
    groups.sort(key=lambda g: (g.indices[0], g.kind))
    return groups


# -- two keys, two shared nonces --------------------------------------------


def solve_mod(A: list[list[int]], b: list[int], n: int) -> list[int]:
    """Solve A x = b over Z_n by Gauss-Jordan elimination."""
    size = len(A)
    M = [[v % n for v in row] + [bv % n] for row, bv in zip(A, b)]
    for col in range(size):
        piv = None
        for row in range(col, size):
            try:
                inv = mod_inv(M[row][col], n)
            except NotInvertible:
                continue
            piv = row
            break
        if piv is None:
            raise SingularSystem(f"no invertible pivot in column {col}")
        M[col], M[piv] = M[piv], M[col]
        M[col] = [v * inv % n for v in M[col]]
        for row in range(size):
            if row != col and M[row][col]:
                f = M[row][col]
                M[row] = [(a - f * p) % n for a, p in zip(M[row], M[col])]
    return [M[i][size] for i in range(size)]


def closed_form_two_keys(h, s, r1, r2, n):
    """The published closed forms for (x1, x2), evaluated verbatim.

    ``h`` and ``s`` are 4-tuples.  The x2 expression as published yields -x2;
    callers comparing it against the linear solve should expect that.
    """
    h1, h2, h3, h4 = h
    s1, s2, s3, s4 = s
    num1 = h1 * r2 * s2 * s3 - h2 * r2 * s1 * s3 - h3 * r1 * s1 * s4 + h4 * r1 * s1 * s3
    den1 = r1 * r2 * (s1 * s4 - s2 * s3)
    num2 = h1 * r2 * s2 * s4 - h2 * r2 * s1 * s4 - h3 * r1 * s2 * s4 + h4 * r1 * s2 * s3
    den2 = r1 * r2 * (s2 * s3 - s1 * s4)
    return num1 * mod_inv(den1, n) % n, num2 * mod_inv(den2, n) % n


def recover_two_keys_shared_nonces(
    sm1: SignedMessage, sm2: SignedMessage, sm3: SignedMessage, sm4: SignedMessage
) -> TwoKeyRecovery:
    """Keys x1 (signatures 1, 3) and x2 (signatures 2, 4); nonce k1 signs 1, 2
    and k2 signs 3, 4.

    Unknowns (k1, k2, x1, x2) satisfy s_i*k - r*x = h_i; solved mod n.
    """
    c = _curve_of(sm1, sm2, sm3, sm4)
    n = c.n
    if sm1.Q != sm3.Q or sm2.Q != sm4.Q:
        raise PreconditionFailed("expected signatures 1,3 under one key and 2,4 under another")
    if sm1.r != sm2.r or sm3.r != sm4.r:
        raise PreconditionFailed("expected r1 == r2 and r3 == r4 (shared nonces)")
    ra, rb = sm1.r, sm3.r
    A = [
        [sm1.s, 0, -ra, 0],
        [sm2.s, 0, 0, -ra],
        [0, sm3.s, -rb, 0],
        [0, sm4.s, 0, -rb],
    ]
    b = [sm1.h, sm2.h, sm3.h, sm4.h]
    k1, k2, x1, x2 = solve_mod(A, b, n)
    if not (_key_matches(x1, sm1, c) and _key_matches(x2, sm2, c)):
        raise ValidationFailed("solution does not match the public keys")
    return TwoKeyRecovery(c.id, x1, x2, k1, k2, (sm1, sm2, sm3, sm4))


# -- fault -------------------------------------------------------------------


def recover_from_fault(valid: SignedMessage, faulty: SignedMessage) -> RecoveryResult:
    """Same message, same nonce, r corrupted in the faulty signature:
    d = h*(s - s_f) / (s_f*r - s*r_f)."""
    c = _curve_of(valid, faulty)
    n = c.n
    if valid.Q != faulty.Q:
        raise PreconditionFailed("signatures are under different public keys")
    r, s, rf, sf, h = valid.r, valid.s, faulty.r, faulty.s, valid.h
    if r == rf:
        raise PreconditionFailed("r equals r_f; nothing was faulted")
    d = h * (s - sf) * mod_inv(sf * r - s * rf, n) % n
    if not _key_matches(d, valid, c):
        raise ValidationFailed("candidate key fails the public-key check; not a same-nonce fault pair")
    k = d * (r - rf) * mod_inv(s - sf, n) % n
    if s != mod_inv(k, n) * (h + r * d) % n:
        raise ValidationFailed("reconstructed nonce does not reproduce s")
    return RecoveryResult("fault", c.id, d, k, (valid, faulty))


# -- biased nonces -----------------------------------------------------------


def recover_from_biased_nonces(corpus: Sequence[SignedMessage], bits: int, delta=None) -> RecoveryResult:
    """Lattice attack on nonces whose top ``bits`` bits are zero.

    Needs roughly len(corpus) * bits > bitlen(n); bits * len(corpus) >=
    bitlen(n) + 64 is comfortable.
    """
    corpus = list(corpus)
    if len(corpus) < 2:
        raise PreconditionFailed("need at least two signatures")
    c = _curve_of(*corpus)
    if len({sm.Q for sm in corpus}) != 1:
        raise PreconditionFailed("signatures are under more than one public key")
    if bits <= 0:
        raise NotFound("no bias means no information about the key")
    L = c.n.bit_length() - bits
    inst = HnpInstance.from_signatures(corpus, c.n, L)
    try:
        basis = build_hnp_lattice(inst)
    except BadBound as exc:
        raise NotFound(str(exc)) from exc
    reduced = lll_reduce(basis) if delta is None else lll_reduce(basis, delta)
    for d in extract_candidates(reduced, inst):
        if _key_matches(d, corpus[0], c):
            return RecoveryResult("biased", c.id, d, None, tuple(corpus),
                                  extra={"basis": basis, "reduced": reduced})
    raise NotFound("no reduced lattice vector yields the key")

