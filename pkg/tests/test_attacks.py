import random
import time
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from ecdsalab import scenarios
from ecdsalab.attacks import (
    closed_form_two_keys,
    detect_duplicate_r,
    recover_from_biased_nonces,
    recover_from_fault,
    recover_from_nonce_reuse,
    recover_from_revealed_nonce,
    recover_two_keys_shared_nonces,
    solve_mod,
)
from ecdsalab.bigmod import mod_inv
from ecdsalab.curve import brute_force_dlog, registry_get, scalar_mul
from ecdsalab.ecdsa import Fixed, Signature, SignedMessage, keygen, sign, verify
from ecdsalab.errors import (
    EcdsaLabError,
    NotFound,
    PreconditionFailed,
    SingularSystem,
    ValidationFailed,
    WrongNonce,
)


# -- revealed nonce ----------------------------------------------------------


def test_revealed_nonce_toy16(toy16):
    r = random.Random(1)
    kp = keygen(toy16, r)
    k = r.randrange(1, toy16.n)
    sm = sign(b"leak", kp, toy16, Fixed(k))
    res = recover_from_revealed_nonce(sm, k)
    assert res.d == kp.d == brute_force_dlog(kp.Q, toy16)
    with pytest.raises(WrongNonce):
        recover_from_revealed_nonce(sm, k % (toy16.n - 1) + 1)


def test_revealed_nonce_secp256k1(k1):
    kp, sm = scenarios.revealed_nonce(k1, random.Random(2))
    t0 = time.perf_counter()
    res = recover_from_revealed_nonce(sm, sm.k)
    assert time.perf_counter() - t0 < 0.010
    assert res.d == kp.d and res.k == sm.k
    with pytest.raises(WrongNonce):
        recover_from_revealed_nonce(sm, 0)


# -- nonce reuse -------------------------------------------------------------


@pytest.mark.parametrize("cid", ["toy16", "secp256k1"])
def test_nonce_reuse(cid):
    c = registry_get(cid)
    kp, sm1, sm2, k = scenarios.nonce_reuse(c, random.Random(cid))
    t0 = time.perf_counter()
    res = recover_from_nonce_reuse(sm1, sm2)
    if cid == "secp256k1":
        assert time.perf_counter() - t0 < 0.010
    assert (res.d, res.k) == (kp.d, k)
    assert scalar_mul(res.k, c.G, c).x % c.n == sm1.r


def test_nonce_reuse_with_negated_s(k1):
    kp, sm1, sm2, k = scenarios.nonce_reuse(k1, random.Random(3))
    flipped = replace(sm2, sig=Signature(sm2.r, k1.n - sm2.s))
    assert verify(flipped)
    res = recover_from_nonce_reuse(sm1, flipped)
    assert res.d == kp.d and res.k == k


def test_nonce_reuse_preconditions(k1):
    rng = random.Random(4)
    kp, sm1, sm2, _ = scenarios.nonce_reuse(k1, rng)
    with pytest.raises(PreconditionFailed):
        recover_from_nonce_reuse(sm1, sm1)
    other = sign(b"other", kp, k1, rng=rng)
    with pytest.raises(PreconditionFailed):
        recover_from_nonce_reuse(sm1, other)
    stranger = keygen(k1, rng)
    with pytest.raises(PreconditionFailed):
        recover_from_nonce_reuse(sm1, replace(sm2, Q=stranger.Q))


def test_nonce_reuse_forged_pair_rejected(k1):
    rng = random.Random(5)
    kp, sm1, _, _ = scenarios.nonce_reuse(k1, rng)
    # same key, same r, different h, but s not produced with the shared nonce
    fake = replace(sm1, h=sm1.h ^ 5, sig=Signature(sm1.r, rng.randrange(1, k1.n)))
    with pytest.raises(ValidationFailed):
        recover_from_nonce_reuse(sm1, fake)


# -- duplicate r -------------------------------------------------------------


def test_detect_duplicate_r_single_plant(k1):
    rng = random.Random(6)
    corpus = scenarios.planted_corpus(k1, rng, records=10_000, reuse_pairs=1)
    groups = detect_duplicate_r(corpus.records)
    assert [(g.kind, g.indices) for g in groups] == [("reuse", corpus.reuse_pairs[0])]


def test_detect_duplicate_r_clean_and_empty(k1):
    rng = random.Random(7)
    kp = keygen(k1, rng)
    assert detect_duplicate_r([]) == []
    assert detect_duplicate_r([sign(bytes([i]), kp, k1, rng=rng) for i in range(50)]) == []


def test_detect_duplicate_identical_records(k1):
    rng = random.Random(8)
    kp, sm1, sm2, _ = scenarios.nonce_reuse(k1, rng)
    groups = detect_duplicate_r([sm1, sm1])
    assert [(g.kind, g.indices) for g in groups] == [("duplicate", (0, 1))]
    groups = detect_duplicate_r([sm1, sm2, sm1])
    assert [(g.kind, g.indices) for g in groups] == [("duplicate", (0, 2)), ("reuse", (0, 1))]


def test_detect_cross_key(k1):
    kp1, kp2, sigs, _, _ = scenarios.two_keys_shared_nonces(k1, random.Random(9))
    groups = detect_duplicate_r(sigs)
    assert [(g.kind, g.indices) for g in groups] == [("cross-key", (0, 1)), ("cross-key", (2, 3))]


def test_detect_permutation_invariance(k1, corpus_5_reuse_1_quad):
    recs = corpus_5_reuse_1_quad.records
    base = {(g.kind, frozenset(recs[i] for i in g.indices)) for g in detect_duplicate_r(recs)}
    r = random.Random(10)
    for _ in range(3):
        perm = recs[:]
        r.shuffle(perm)
        groups = detect_duplicate_r(perm)
        assert [g.indices[0] for g in groups] == sorted(g.indices[0] for g in groups)
        assert {(g.kind, frozenset(perm[i] for i in g.indices)) for g in groups} == base


# -- two keys, shared nonces -------------------------------------------------


@pytest.mark.parametrize("cid", ["toy16", "secp256k1"])
def test_two_keys(cid):
    c = registry_get(cid)
    kp1, kp2, sigs, k1_, k2_ = scenarios.two_keys_shared_nonces(c, random.Random(cid))
    t0 = time.perf_counter()
    res = recover_two_keys_shared_nonces(*sigs)
    if cid == "secp256k1":
        assert time.perf_counter() - t0 < 0.010
    assert (res.x1, res.x2, res.k1, res.k2) == (kp1.d, kp2.d, k1_, k2_)
    n = c.n
    xs = [res.x1, res.x2, res.x1, res.x2]
    ks = [res.k1, res.k1, res.k2, res.k2]
    for sm, x, k in zip(sigs, xs, ks):
        assert sm.s == mod_inv(k, n) * (sm.h + sm.r * x) % n


def test_two_keys_single_shared_nonce_sweep(toy16):
    r = random.Random(11)
    solved = singular = 0
    for _ in range(30):
        kp1, kp2, sigs, _, _ = scenarios.two_keys_shared_nonces(toy16, r, same_nonce=True)
        try:
            res = recover_two_keys_shared_nonces(*sigs)
        except SingularSystem:
            singular += 1
            s1, s2, s3, s4 = (sm.s for sm in sigs)
            assert (s1 * s4 - s2 * s3) % toy16.n == 0
            continue
        assert (res.x1, res.x2) == (kp1.d, kp2.d)
        solved += 1
    assert solved + singular == 30 and solved > 0


def test_two_keys_preconditions(k1):
    _, _, sigs, _, _ = scenarios.two_keys_shared_nonces(k1, random.Random(12))
    with pytest.raises(PreconditionFailed):
        recover_two_keys_shared_nonces(sigs[0], sigs[2], sigs[1], sigs[3])
    with pytest.raises(PreconditionFailed):
        broken = replace(sigs[3], sig=Signature(sigs[3].r ^ 1, sigs[3].s))
        recover_two_keys_shared_nonces(sigs[0], sigs[1], sigs[2], broken)


def test_solve_mod():
    n = 61339
    A = [[2, 3], [5, 7]]
    x = [11, 13]
    b = [(2 * 11 + 3 * 13) % n, (5 * 11 + 7 * 13) % n]
    assert solve_mod(A, b, n) == x
    with pytest.raises(SingularSystem):
        solve_mod([[1, 2], [2, 4]], [1, 2], n)


def test_closed_forms_verdict(toy16):
    # x1 expression agrees with the linear solve; the x2 expression gives -x2
    r = random.Random(13)
    for _ in range(20):
        kp1, kp2, sigs, _, _ = scenarios.two_keys_shared_nonces(toy16, r)
        res = recover_two_keys_shared_nonces(*sigs)
        x1, x2 = closed_form_two_keys(
            [sm.h for sm in sigs], [sm.s for sm in sigs], sigs[0].r, sigs[2].r, toy16.n
        )
        assert x1 == res.x1
        assert x2 == (-res.x2) % toy16.n


# -- fault -------------------------------------------------------------------


@pytest.mark.parametrize("cid", ["toy16", "secp256k1"])
def test_fault(cid):
    c = registry_get(cid)
    kp, valid, faulty = scenarios.fault(c, random.Random(cid))
    t0 = time.perf_counter()
    res = recover_from_fault(valid, faulty)
    if cid == "secp256k1":
        assert time.perf_counter() - t0 < 0.010
    assert res.d == kp.d
    assert scalar_mul(res.k, c.G, c).x % c.n == valid.r


def test_fault_unrelated_signatures(k1):
    rng = random.Random(14)
    kp = keygen(k1, rng)
    a, b = sign(b"one", kp, k1, rng=rng), sign(b"two", kp, k1, rng=rng)
    with pytest.raises(ValidationFailed):
        recover_from_fault(a, b)
    with pytest.raises(PreconditionFailed):
        recover_from_fault(a, a)


# -- biased nonces -----------------------------------------------------------


def test_biased_secp256k1(k1):
    kp, sigs = scenarios.biased(k1, random.Random(15), 128, 4)
    assert recover_from_biased_nonces(sigs, 128).d == kp.d


def test_biased_toy32(toy32):
    kp, sigs = scenarios.biased(toy32, random.Random(16), 8, 12)
    assert recover_from_biased_nonces(sigs, 8).d == kp.d


def test_biased_without_bias(k1):
    kp, sigs = scenarios.biased(k1, random.Random(17), 0, 6)
    with pytest.raises(NotFound):
        recover_from_biased_nonces(sigs, 0)
    with pytest.raises(NotFound):
        recover_from_biased_nonces(sigs, k1.n.bit_length())


def test_biased_false_assumption(k1):
    # nonces are uniform but we claim 128 bits of bias
    rng = random.Random(18)
    kp = keygen(k1, rng)
    sigs = [sign(bytes([i]), kp, k1, rng=rng) for i in range(4)]
    with pytest.raises(NotFound):
        recover_from_biased_nonces(sigs, 128)


def test_biased_mixed_keys(k1):
    _, a = scenarios.biased(k1, random.Random(19), 128, 2)
    _, b = scenarios.biased(k1, random.Random(20), 128, 2)
    with pytest.raises(PreconditionFailed):
        recover_from_biased_nonces(a + b, 128)


# -- universal validation ----------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(["revealed", "reuse", "two-key", "fault", "biased"]))
def test_no_attack_returns_unvalidated_key(seed, attack):
    c = registry_get("toy16")
    r = random.Random(seed)
    kp = keygen(c, r)

    # mismatched inputs: random r, s, h under kp's public key
    def junk():
        return SignedMessage(c.id, kp.Q, r.randrange(c.n), Signature(r.randrange(1, c.n), r.randrange(1, c.n)))

    try:
        if attack == "revealed":
            res = [recover_from_revealed_nonce(junk(), r.randrange(1, c.n)).d]
        elif attack == "reuse":
            a = junk()
            b = replace(junk(), sig=Signature(a.r, r.randrange(1, c.n)))
            res = [recover_from_nonce_reuse(a, b).d]
        elif attack == "two-key":
            other = keygen(c, r)
            s = [junk(), replace(junk(), Q=other.Q), junk(), replace(junk(), Q=other.Q)]
            s[1] = replace(s[1], sig=Signature(s[0].r, s[1].s))
            s[3] = replace(s[3], sig=Signature(s[2].r, s[3].s))
            out = recover_two_keys_shared_nonces(*s)
            assert scalar_mul(out.x2, c.G, c) == other.Q
            res = [out.x1]
        elif attack == "fault":
            res = [recover_from_fault(junk(), junk()).d]
        else:
            res = [recover_from_biased_nonces([junk() for _ in range(6)], 8).d]
    except EcdsaLabError:
        return
    # a lucky hit is only acceptable if it is the real key
    assert all(scalar_mul(d, c.G, c) == kp.Q for d in res)
