#!/usr/bin/env python3
"""Search for small prime-order short-Weierstrass curves.

Prints Python constants for the toy curves registered in ``ecdsalab.curve``.

toy16 is found by exhaustive point counting: for every x the number of y with
y^2 = x^3 + ax + b is read off a table of squares.  toy32 is too large for
that, so its group order is pinned by baby-step/giant-step inside the Hasse
interval; since the order is a prime larger than the interval width 4*sqrt(p),
it is the unique multiple in range and therefore equals #E.

Usage: python3 scripts/gen_toy_curves.py [--seed N]
"""

import argparse
import math
import random

import numpy as np
from sympy import isprime, nextprime


def count_points_exhaustive(p, a, b):
    """#E(F_p) including the point at infinity."""
    ys = np.arange(p, dtype=np.int64)
    sq_count = np.bincount((ys * ys) % p, minlength=p)
    xs = np.arange(p, dtype=np.int64)
    rhs = ((xs * xs % p) * xs + a * xs + b) % p
    return int(sq_count[rhs].sum()) + 1


def find_point(p, a, b, rng):
    while True:
        x = rng.randrange(p)
        rhs = (x ** 3 + a * x + b) % p
        if rhs == 0:
            continue
        if pow(rhs, (p - 1) // 2, p) != 1:
            continue
        y = _sqrt_mod(rhs, p)
        return x, y


def _sqrt_mod(v, p):
    if p % 4 == 3:
        return pow(v, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(v, q, p), pow(v, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        bb = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, bb * bb % p, t * bb * bb % p, r * bb % p
    return r


def _add(P, Q, p, a):
    if P is None:
        return Q
    if Q is None:
        return P
    if P[0] == Q[0] and (P[1] + Q[1]) % p == 0:
        return None
    if P == Q:
        lam = (3 * P[0] * P[0] + a) * pow(2 * P[1], -1, p) % p
    else:
        lam = (Q[1] - P[1]) * pow(Q[0] - P[0], -1, p) % p
    x = (lam * lam - P[0] - Q[0]) % p
    return x, (lam * (P[0] - x) - P[1]) % p


def _mul(k, P, p, a):
    R = None
    while k:
        if k & 1:
            R = _add(R, P, p, a)
        P = _add(P, P, p, a)
        k >>= 1
    return R


def order_in_hasse_interval(P, p, a):
    """All m in [p+1-2sqrt(p), p+1+2sqrt(p)] with m*P = O, via BSGS."""
    lo = p + 1 - 2 * math.isqrt(p) - 2
    hi = p + 1 + 2 * math.isqrt(p) + 2
    width = hi - lo
    step = math.isqrt(width) + 1
    baby = {}
    R = None
    for j in range(step):
        baby.setdefault(R, []).append(j)
        R = _add(R, P, p, a)
    # find lo + i*step + j with (lo + i*step)P + jP = O  <=>  -(lo+i*step)P = jP
    giant = _mul(step, P, p, a)
    cur = _mul(lo, P, p, a)
    hits = []
    for i in range(step + 1):
        neg = None if cur is None else (cur[0], (-cur[1]) % p)
        for j in baby.get(neg, []):
            m = lo + i * step + j
            if lo <= m <= hi:
                hits.append(m)
        cur = _add(cur, giant, p, a)
    return sorted(set(hits))


def search_toy16(rng):
    while True:
        p = nextprime(rng.randrange(2 ** 15 + 2 ** 13, 2 ** 16 - 2 ** 10))
        if p >= 2 ** 16:
            continue
        a, b = rng.randrange(p), rng.randrange(1, p)
        if (4 * a ** 3 + 27 * b ** 2) % p == 0:
            continue
        n = count_points_exhaustive(p, a, b)
        if isprime(n) and n != p and n.bit_length() == 16:
            return p, a, b, n


def search_toy32(rng):
    while True:
        p = nextprime(rng.randrange(2 ** 31 + 2 ** 29, 2 ** 32 - 2 ** 20))
        if p >= 2 ** 32:
            continue
        a, b = rng.randrange(p), rng.randrange(1, p)
        if (4 * a ** 3 + 27 * b ** 2) % p == 0:
            continue
        G = find_point(p, a, b, rng)
        hits = order_in_hasse_interval(G, p, a)
        primes = [m for m in hits if isprime(m)]
        if len(primes) != 1:
            continue
        n = primes[0]
        if n == p or n.bit_length() != 32 or n <= 4 * math.isqrt(p) + 4:
            continue
        return p, a, b, n, G


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    p, a, b, n = search_toy16(rng)
    G = find_point(p, a, b, rng)
    assert _mul(n, G, p, a) is None
    print("TOY16 = dict(p=%d, a=%d, b=%d, gx=%d, gy=%d, n=%d)" % (p, a, b, *G, n))

    p, a, b, n, G = search_toy32(rng)
    assert _mul(n, G, p, a) is None
    print("TOY32 = dict(p=%d, a=%d, b=%d, gx=%d, gy=%d, n=%d)" % (p, a, b, *G, n))


if __name__ == "__main__":
    main()
