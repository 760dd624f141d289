import random

import pytest
from hypothesis import given, strategies as st

from ecdsalab.bigmod import ModCtx, egcd, from_hex, mod_arith, mod_inv, mod_reduce, to_hex
from ecdsalab.curve import registry_get
from ecdsalab.errors import NotInvertible

N = registry_get("secp256k1").n

# -- schoolbook oracle on base-2^16 limbs, little-endian -----------------------

BASE = 1 << 16


def limbs(x):
    out = []
    while x:
        out.append(x % BASE)
        x //= BASE
    return out


def value(ls):
    v = 0
    for d in reversed(ls):
        v = v * BASE + d
    return v


def trim(ls):
    while ls and ls[-1] == 0:
        ls.pop()
    return ls


def sb_cmp(a, b):
    if len(a) != len(b):
        return (len(a) > len(b)) - (len(a) < len(b))
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return 1 if x > y else -1
    return 0


def sb_add(a, b):
    out, carry = [], 0
    for i in range(max(len(a), len(b))):
        t = (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) + carry
        out.append(t % BASE)
        carry = t // BASE
    if carry:
        out.append(carry)
    return trim(out)


def sb_sub(a, b):
    # requires a >= b
    out, borrow = [], 0
    for i in range(len(a)):
        t = a[i] - (b[i] if i < len(b) else 0) - borrow
        borrow = 1 if t < 0 else 0
        out.append(t + BASE if t < 0 else t)
    return trim(out)


def sb_mul(a, b):
    out = [0] * (len(a) + len(b) + 1)
    for i, x in enumerate(a):
        carry = 0
        for j, y in enumerate(b):
            t = out[i + j] + x * y + carry
            out[i + j] = t % BASE
            carry = t // BASE
        k = i + len(b)
        while carry:
            t = out[k] + carry
            out[k] = t % BASE
            carry = t // BASE
            k += 1
    return trim(out)


def sb_mod(a, m):
    # binary long division, bit by bit
    rem = []
    for i in range(len(a) * 16 - 1, -1, -1):
        rem = sb_add(rem, rem)
        if (a[i // 16] >> (i % 16)) & 1:
            rem = sb_add(rem, [1])
        if sb_cmp(rem, m) >= 0:
            rem = sb_sub(rem, m)
    return rem


def oracle(a, b, op, m):
    A, B, M = limbs(a), limbs(b), limbs(m)
    if op == "add":
        return value(sb_mod(sb_add(A, B), M))
    if op == "mul":
        return value(sb_mod(sb_mul(A, B), M))
    # sub: a - b mod m == (a + (m - b mod m)) mod m
    return value(sb_mod(sb_add(A, sb_sub(M, sb_mod(B, M)) or []), M))


@pytest.mark.parametrize("op", ["add", "sub", "mul"])
def test_agrees_with_schoolbook_oracle(op):
    r = random.Random(op)
    for _ in range(1000):
        m = r.getrandbits(512) | 1 | (1 << 511)
        a, b = r.randrange(m), r.randrange(m)
        assert mod_arith(a, b, op, ModCtx(m)) == oracle(a, b, op, m)


def test_oracle_self_check():
    assert value(sb_mul(limbs(123456789), limbs(987654321))) == 123456789 * 987654321
    assert value(sb_mod(limbs(10 ** 40 + 7), limbs(97))) == (10 ** 40 + 7) % 97


@pytest.mark.parametrize("x, m, want", [(7, 5, 2), (-3, 5, 2), (0, N, 0)])
def test_mod_reduce_examples(x, m, want):
    assert mod_reduce(x, ModCtx(m)) == want


def test_mod_inv_examples():
    assert mod_inv(3, ModCtx(7)) == 5
    assert mod_inv(1, ModCtx(N)) == 1
    with pytest.raises(NotInvertible):
        mod_inv(0, ModCtx(7))
    with pytest.raises(NotInvertible):
        mod_inv(6, 9)


def test_mod_arith_examples():
    assert mod_arith(4, 3, "mul", ModCtx(5)) == 2
    assert mod_arith(2, 4, "sub", ModCtx(5)) == 3
    a = 0xDEADBEEF
    assert mod_arith(a, 0, "add", ModCtx(N)) == a
    with pytest.raises(ValueError):
        mod_arith(1, 2, "div", ModCtx(5))


def test_ctx_rejects_bad_modulus():
    with pytest.raises(ValueError):
        ModCtx(1)
    with pytest.raises(ValueError):
        ModCtx(0)


@given(st.integers(min_value=1, max_value=N - 1))
def test_inverse_property(x):
    ctx = ModCtx(N)
    assert mod_arith(x, mod_inv(x, ctx), "mul", ctx) == 1


@given(st.integers(), st.integers(min_value=2, max_value=2 ** 600))
def test_reduce_idempotent(x, m):
    once = mod_reduce(x, m)
    assert 0 <= once < m
    assert mod_reduce(once, m) == once


@given(st.integers(min_value=-2 ** 600, max_value=2 ** 600), st.integers(min_value=-2 ** 600, max_value=2 ** 600))
def test_egcd_bezout(a, b):
    g, x, y = egcd(a, b)
    assert a * x + b * y == g >= 0
    if a or b:
        assert a % g == 0 and b % g == 0


@given(st.integers(min_value=0, max_value=2 ** 520))
def test_hex_round_trip(x):
    text = to_hex(x)
    assert text == text.lower() and not text.startswith("0x")
    assert from_hex(text) == x


def test_hex_fixed_width():
    assert to_hex(255, 4) == "000000ff"
    with pytest.raises(ValueError):
        to_hex(256, 1)
    for bad in ["", "0x10", "-1", "1_0", "zz"]:
        with pytest.raises(ValueError):
            from_hex(bad)
