"""Planted vulnerable scenarios: the harness knows every key and nonce."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .curve import CurveParams
from .ecdsa import (
    BiasedTopZero,
    FaultOnR,
    Fixed,
    KeyPair,
    ReuseTag,
    SignedMessage,
    Signer,
    Uniform,
    keygen,
)
from .errors import DegenerateSignature


def _msg(rng: random.Random) -> bytes:
    return rng.randbytes(32)


def revealed_nonce(c: CurveParams, rng: random.Random):
    """Returns (keypair, signed message carrying its leaked nonce)."""
    kp = keygen(c, rng)
    sm = Signer(c, kp, rng).sign(_msg(rng), Uniform(), leak_nonce=True)
    return kp, sm


def nonce_reuse(c: CurveParams, rng: random.Random):
    """Returns (keypair, sm1, sm2, k) with both messages signed under one nonce."""
    kp = keygen(c, rng)
    while True:
        signer = Signer(c, kp, rng)
        m1, m2 = _msg(rng), _msg(rng)
        try:
            sm1 = signer.sign(m1, ReuseTag("planted"))
            sm2 = signer.sign(m2, ReuseTag("planted"))
        except DegenerateSignature:
            continue
        n = c.n
        # tiny curves: make sure the pair is not degenerate for the attack
        if sm1.h != sm2.h and (sm1.s - sm2.s) % n and (sm1.s + sm2.s) % n:
            return kp, sm1, sm2, signer._tags["planted"]


def two_keys_shared_nonces(c: CurveParams, rng: random.Random, same_nonce: bool = False):
    """Returns (kp1, kp2, [sm1, sm2, sm3, sm4], k1, k2).

    sm1, sm3 are signed by kp1 and sm2, sm4 by kp2; k1 signs sm1 and sm2, k2
    signs sm3 and sm4.  ``same_nonce`` forces k1 == k2.
    """
    n = c.n
    while True:
        kp1, kp2 = keygen(c, rng), keygen(c, rng)
        if kp1.d == kp2.d:
            continue
        k1 = rng.randrange(1, n)
        k2 = k1 if same_nonce else rng.randrange(1, n)
        if k1 == k2 and not same_nonce:
            continue
        a, b = Signer(c, kp1, rng), Signer(c, kp2, rng)
        try:
            sigs = [
                a.sign(_msg(rng), Fixed(k1)),
                b.sign(_msg(rng), Fixed(k1)),
                a.sign(_msg(rng), Fixed(k2)),
                b.sign(_msg(rng), Fixed(k2)),
            ]
        except DegenerateSignature:
            continue
        s1, s2, s3, s4 = (sm.s for sm in sigs)
        if same_nonce or (s1 * s4 - s2 * s3) % n:
            return kp1, kp2, sigs, k1, k2


def fault(c: CurveParams, rng: random.Random):
    """Returns (keypair, valid, faulty)."""
    kp = keygen(c, rng)
    while True:
        valid, faulty = Signer(c, kp, rng).sign(_msg(rng), FaultOnR())
        n = c.n
        if (faulty.s * valid.r - valid.s * faulty.r) % n and (valid.s - faulty.s) % n:
            return kp, valid, faulty


def biased(c: CurveParams, rng: random.Random, bits: int, count: int):
    """Returns (keypair, signatures with nonces below 2^(bitlen(n) - bits))."""
    kp = keygen(c, rng)
    signer = Signer(c, kp, rng)
    return kp, [signer.sign(_msg(rng), BiasedTopZero(bits)) for _ in range(count)]


@dataclass
class PlantedCorpus:
    records: list[SignedMessage]
    keys: list[KeyPair]
    reuse_pairs: list[tuple[int, int]] = field(default_factory=list)
    quadruples: list[tuple[int, int, int, int]] = field(default_factory=list)
    planted_keys: dict = field(default_factory=dict)


def planted_corpus(
    c: CurveParams,
    rng: random.Random,
    records: int = 10_000,
    reuse_pairs: int = 0,
    quadruples: int = 0,
    keys: int = 50,
) -> PlantedCorpus:
    """Uniformly signed filler plus planted reuse pairs and two-key quadruples.

    Planted records are spliced in at random positions; the returned index
    tuples refer to positions in ``records``.
    """
    planted = 2 * reuse_pairs + 4 * quadruples
    if planted > records:
        raise ValueError("corpus too small for the requested plants")
    pool = [keygen(c, rng) for _ in range(keys)]
    signers = [Signer(c, kp, rng) for kp in pool]
    out: list = [None] * records
    slots = rng.sample(range(records), planted)
    slot_iter = iter(slots)
    truth = PlantedCorpus(out, list(pool))

    for _ in range(reuse_pairs):
        kp, sm1, sm2, _ = nonce_reuse(c, rng)
        i, j = sorted((next(slot_iter), next(slot_iter)))
        out[i], out[j] = sm1, sm2
        truth.reuse_pairs.append((i, j))
        truth.planted_keys[kp.Q] = kp.d
    for _ in range(quadruples):
        kp1, kp2, sigs, _, _ = two_keys_shared_nonces(c, rng)
        idx = tuple(sorted(next(slot_iter) for _ in range(4)))
        for i, sm in zip(idx, sigs):
            out[i] = sm
        truth.quadruples.append(idx)
        truth.planted_keys[kp1.Q] = kp1.d
        truth.planted_keys[kp2.Q] = kp2.d
    for i in range(records):
        if out[i] is None:
            out[i] = rng.choice(signers).sign(_msg(rng))
    return truth
