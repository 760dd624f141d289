"""Modular arithmetic over arbitrary-precision integers.

Python's ``int`` is the natural-number substrate; this module adds the
modular layer on top of it (canonical reduction, extended-Euclid inversion)
and the hex codec used by every on-disk format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import NotInvertible

__all__ = [
    "ModCtx",
    "mod_reduce",
    "mod_inv",
    "mod_arith",
    "egcd",
    "to_hex",
    "from_hex",
]


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b)``, g >= 0."""
    x0, x1 = 1, 0
    y0, y1 = 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class ModCtx:
    """Residue-class context for a fixed modulus > 1."""

    modulus: int

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus <= 1:
            raise ValueError(f"modulus must be an integer > 1, got {self.modulus!r}")

    def reduce(self, x: int) -> int:
        return x % self.modulus

    def inv(self, x: int) -> int:
        return mod_inv(x, self)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus


def _modulus(ctx: ModCtx | int) -> int:
    if isinstance(ctx, ModCtx):
        return ctx.modulus
    if ctx <= 1:
        raise ValueError(f"modulus must be > 1, got {ctx}")
    return ctx


def mod_reduce(x: int, ctx: ModCtx | int) -> int:
    """Canonical representative of ``x`` in ``[0, modulus)``; accepts negatives."""
    return x % _modulus(ctx)


def mod_inv(x: int, ctx: ModCtx | int) -> int:
    """Inverse of ``x`` modulo the context modulus, by extended Euclid.

    Raises NotInvertible when ``gcd(x, modulus) != 1`` (this includes 0).
    """
    m = _modulus(ctx)
    g, u, _ = egcd(x % m, m)
    if g != 1:
        raise NotInvertible(f"{x} has no inverse modulo {m} (gcd={g})")
    return u % m


_HEX = re.compile(r"[0-9a-fA-F]+")

_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}


def mod_arith(a: int, b: int, op: str, ctx: ModCtx | int) -> int:
    m = _modulus(ctx)
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}; expected add, sub or mul") from None
    return fn(a, b) % m


def to_hex(x: int, width: int | None = None) -> str:
    """Big-endian lowercase hex without prefix.

    ``width`` is a byte count; the output is zero-padded to ``2*width`` digits.
    """
    if x < 0:
        raise ValueError("cannot hex-encode a negative integer")
    digits = format(x, "x")
    if width is not None:
        if len(digits) > 2 * width:
            raise ValueError(f"{x:#x} does not fit in {width} bytes")
        digits = digits.rjust(2 * width, "0")
    return digits


def from_hex(text: str) -> int:
    if not _HEX.fullmatch(text):
        raise ValueError(f"malformed hex integer {text!r}")
    return int(text, 16)
