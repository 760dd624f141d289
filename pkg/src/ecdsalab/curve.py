"""Short-Weierstrass curves y^2 = x^3 + ax + b over prime fields.

The public group law (``point_add``, ``point_neg``) works on affine points.
``scalar_mul`` runs double-and-add in Jacobian coordinates and converts back
with a single inversion; for the base point it reads a cached fixed-window
table of affine multiples of G instead of doubling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

from .bigmod import from_hex, mod_inv, to_hex
from .errors import CurveTooLarge, NotFound, PointNotOnCurve, UnknownCurve

__all__ = [
    "Point",
    "INFINITY",
    "CurveParams",
    "registry_get",
    "curve_ids",
    "register",
    "on_curve",
    "point_neg",
    "point_add",
    "scalar_mul",
    "brute_force_dlog",
    "encode_point",
    "decode_point",
]


@dataclass(frozen=True)
class Point:
    """Affine point; ``Point(None, None)`` is the point at infinity."""

    x: int | None
    y: int | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        if self.is_infinity:
            return "Point(INFINITY)"
        return f"Point({self.x:#x}, {self.y:#x})"


INFINITY = Point(None, None)

# bits per digit of the fixed-base table
_WINDOW = 6


@dataclass(frozen=True)
class CurveParams:
    id: str
    p: int
    a: int
    b: int
    G: Point
    n: int

    @property
    def field_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_bytes(self) -> int:
        return (self.n.bit_length() + 7) // 8

    def validate(self) -> None:
        p, a, b = self.p, self.a, self.b
        if not (0 <= a < p and 0 <= b < p):
            raise ValueError(f"{self.id}: coefficients must be reduced mod p")
        if (4 * a ** 3 + 27 * b ** 2) % p == 0:
            raise ValueError(f"{self.id}: singular curve")
        if self.G.is_infinity or not on_curve(self.G, self):
            raise ValueError(f"{self.id}: base point is not on the curve")
        if not _scalar_mul_jacobian(self.n, self.G, self).is_infinity:
            raise ValueError(f"{self.id}: n*G is not the point at infinity")

    @cached_property
    def g_table(self) -> list[list[Point]]:
        """``g_table[i][j] == j * 2^(W*i) * G`` for 0 <= j < 2^W, affine."""
        table = []
        base = self.G
        for _ in range(0, self.n.bit_length(), _WINDOW):
            row = [INFINITY, base]
            for _ in range(2, 1 << _WINDOW):
                row.append(_affine_add(row[-1], base, self))
            table.append(row)
            base = _affine_add(row[-1], base, self)
        return table


# -- group law ---------------------------------------------------------------


def on_curve(P: Point, c: CurveParams) -> bool:
    if P.is_infinity:
        return True
    x, y = P.x, P.y
    if not (0 <= x < c.p and 0 <= y < c.p):
        return False
    return (y * y - (x * x * x + c.a * x + c.b)) % c.p == 0


def _check(P: Point, c: CurveParams) -> None:
    if not on_curve(P, c):
        raise PointNotOnCurve(f"{P!r} is not on {c.id}")


def point_neg(P: Point, c: CurveParams) -> Point:
    if P.is_infinity:
        return P
    return Point(P.x, (-P.y) % c.p)


def point_add(P: Point, Q: Point, c: CurveParams) -> Point:
    """Chord-and-tangent addition of two affine points."""
    _check(P, c)
    _check(Q, c)
    return _affine_add(P, Q, c)


def _affine_add(P: Point, Q: Point, c: CurveParams) -> Point:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    p = c.p
    if P.x == Q.x:
        if (P.y + Q.y) % p == 0:
            return INFINITY
        lam = (3 * P.x * P.x + c.a) * mod_inv(2 * P.y, p) % p
    else:
        lam = (Q.y - P.y) * mod_inv(Q.x - P.x, p) % p
    x3 = (lam * lam - P.x - Q.x) % p
    return Point(x3, (lam * (P.x - x3) - P.y) % p)


# Jacobian (X, Y, Z) represents the affine point (X/Z^2, Y/Z^3); Z == 0 is infinity.

def _jdouble(X, Y, Z, c):
    if Z == 0 or Y == 0:
        return 0, 1, 0
    p = c.p
    YY = Y * Y % p
    S = 4 * X * YY % p
    ZZ = Z * Z % p
    M = (3 * X * X + c.a * ZZ * ZZ) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YY * YY) % p
    Z3 = 2 * Y * Z % p
    return X3, Y3, Z3


def _jadd_affine(X1, Y1, Z1, x2, y2, c):
    """Jacobian + affine (mixed) addition."""
    if Z1 == 0:
        return x2, y2, 1
    p = c.p
    Z1Z1 = Z1 * Z1 % p
    U2 = x2 * Z1Z1 % p
    S2 = y2 * Z1 * Z1Z1 % p
    H = (U2 - X1) % p
    R = (S2 - Y1) % p
    if H == 0:
        if R == 0:
            return _jdouble(X1, Y1, Z1, c)
        return 0, 1, 0
    HH = H * H % p
    HHH = H * HH % p
    V = X1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - Y1 * HHH) % p
    Z3 = Z1 * H % p
    return X3, Y3, Z3


def _to_affine(X, Y, Z, c) -> Point:
    if Z == 0:
        return INFINITY
    p = c.p
    zi = mod_inv(Z, p)
    zi2 = zi * zi % p
    return Point(X * zi2 % p, Y * zi2 * zi % p)


def _scalar_mul_jacobian(d: int, P: Point, c: CurveParams) -> Point:
    if d == 0 or P.is_infinity:
        return INFINITY
    X, Y, Z = 0, 1, 0
    for bit in bin(d)[2:]:
        X, Y, Z = _jdouble(X, Y, Z, c)
        if bit == "1":
            X, Y, Z = _jadd_affine(X, Y, Z, P.x, P.y, c)
    return _to_affine(X, Y, Z, c)


def _scalar_mul_base(d: int, c: CurveParams) -> Point:
    mask = (1 << _WINDOW) - 1
    X, Y, Z = 0, 1, 0
    for row in c.g_table:
        if not d:
            break
        T = row[d & mask]
        if not T.is_infinity:
            X, Y, Z = _jadd_affine(X, Y, Z, T.x, T.y, c)
        d >>= _WINDOW
    return _to_affine(X, Y, Z, c)


def scalar_mul(d: int, P: Point, c: CurveParams) -> Point:
    """d*P by double-and-add.

    All registered curves have prime order (cofactor 1), so ``d`` is taken
    mod n first; negative scalars are fine.
    """
    _check(P, c)
    d %= c.n
    if P == c.G:
        return _scalar_mul_base(d, c)
    return _scalar_mul_jacobian(d, P, c)


@lru_cache(maxsize=4)
def _multiples_table(c: CurveParams) -> dict[Point, int]:
    table = {}
    R = INFINITY
    for d in range(c.n):
        table[R] = d
        R = _affine_add(R, c.G, c)
    return table


def brute_force_dlog(Q: Point, c: CurveParams) -> int:
    """Exhaustive discrete log of Q to base G; toy curves only (n < 2^20).

    The first call per curve walks all n multiples of G and keeps the table.
    """
    if c.n >= 1 << 20:
        raise CurveTooLarge(f"{c.id}: n has {c.n.bit_length()} bits, brute force limited to 20")
    _check(Q, c)
    try:
        return _multiples_table(c)[Q]
    except KeyError:
        raise NotFound(f"{Q!r} is not in the subgroup generated by G on {c.id}") from None


# -- serialization -----------------------------------------------------------


def encode_point(P: Point, c: CurveParams) -> str:
    if P.is_infinity:
        return "00"
    w = c.field_bytes
    return "04" + to_hex(P.x, w) + to_hex(P.y, w)


def decode_point(text: str, c: CurveParams) -> Point:
    text = text.strip().lower()
    if text == "00":
        return INFINITY
    w = 2 * c.field_bytes
    if len(text) != 2 + 2 * w or not text.startswith("04"):
        raise ValueError(f"malformed point encoding for {c.id}: {text[:20]!r}...")
    P = Point(from_hex(text[2 : 2 + w]), from_hex(text[2 + w :]))
    _check(P, c)
    return P


# -- registry ----------------------------------------------------------------

_REGISTRY: dict[str, CurveParams] = {}


def register(c: CurveParams) -> CurveParams:
    c.validate()
    _REGISTRY[c.id] = c
    return c


def registry_get(curve_id: str) -> CurveParams:
    try:
        return _REGISTRY[curve_id]
    except KeyError:
        raise UnknownCurve(f"unknown curve {curve_id!r}; known: {', '.join(curve_ids())}") from None


def curve_ids() -> list[str]:
    return sorted(_REGISTRY)


def _curve(id, p, a, b, gx, gy, n):
    return CurveParams(id, p, a % p, b % p, Point(gx, gy), n)


register(_curve(
    "secp256k1",
    p=2 ** 256 - 2 ** 32 - 977,
    a=0,
    b=7,
    gx=0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
))

register(_curve(
    "p256",
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=-3,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
))

# Produced by scripts/gen_toy_curves.py --seed 2024.
register(_curve("toy16", p=61813, a=53253, b=48185, gx=32656, gy=8491, n=61339))
register(_curve(
    "toy32", p=4086079103, a=2605752254, b=3351661910, gx=1013956979, gy=501412300, n=4086007943
))
