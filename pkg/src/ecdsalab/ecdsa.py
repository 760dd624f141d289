"""ECDSA key generation, signing with pluggable nonce policies, and verification.

The signer is a vulnerability testbed: nonce policies can fix, reuse, bias or
fault the per-signature secret on purpose.  Nothing here is constant-time.
"""

from __future__ import annotations

import hashlib
import json
import random
import secrets
from dataclasses import dataclass, field, replace
from typing import Union

from .bigmod import from_hex, mod_inv, to_hex
from .curve import (
    CurveParams,
    Point,
    decode_point,
    encode_point,
    on_curve,
    point_add,
    registry_get,
    scalar_mul,
)
from .errors import DegenerateSignature, EcdsaLabError

__all__ = [
    "KeyPair",
    "Signature",
    "SignedMessage",
    "Uniform",
    "Fixed",
    "ReuseTag",
    "BiasedTopZero",
    "FaultOnR",
    "NoncePolicy",
    "Signer",
    "keygen",
    "hash_to_scalar",
    "sign",
    "verify",
    "corrupt_r",
]


@dataclass(frozen=True)
class KeyPair:
    d: int
    Q: Point


@dataclass(frozen=True)
class Signature:
    r: int
    s: int


@dataclass(frozen=True)
class SignedMessage:
    """One signature record: digest, signature, signer public key and curve id.

    ``k`` is only set when the nonce was deliberately leaked.
    """

    curve: str
    Q: Point
    h: int
    sig: Signature
    msg: bytes | None = None
    k: int | None = None

    @property
    def r(self) -> int:
        return self.sig.r

    @property
    def s(self) -> int:
        return self.sig.s

    def to_json(self) -> dict:
        c = registry_get(self.curve)
        w = c.scalar_bytes
        out = {
            "curve": self.curve,
            "pub": encode_point(self.Q, c),
            "h": to_hex(self.h, w),
            "r": to_hex(self.r, w),
            "s": to_hex(self.s, w),
        }
        if self.msg is not None:
            out["msg"] = self.msg.hex()
        if self.k is not None:
            out["k"] = to_hex(self.k, w)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "SignedMessage":
        """Parse a record; raises ValueError (or UnknownCurve) on bad input."""
        if not isinstance(obj, dict):
            raise ValueError("record must be a JSON object")
        missing = {"curve", "pub", "h", "r", "s"} - obj.keys()
        if missing:
            raise ValueError(f"record missing fields: {', '.join(sorted(missing))}")
        c = registry_get(obj["curve"])
        msg = bytes.fromhex(obj["msg"]) if obj.get("msg") is not None else None
        k = from_hex(obj["k"]) if obj.get("k") is not None else None
        return cls(
            curve=c.id,
            Q=decode_point(obj["pub"], c),
            h=from_hex(obj["h"]),
            sig=Signature(from_hex(obj["r"]), from_hex(obj["s"])),
            msg=msg,
            k=k,
        )

    @classmethod
    def loads(cls, line: str) -> "SignedMessage":
        return cls.from_json(json.loads(line))


# -- nonce policies ----------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class Fixed:
    k: int


@dataclass(frozen=True)
class ReuseTag:
    """Same nonce for every signature carrying the same tag in one session."""

    tag: str


@dataclass(frozen=True)
class BiasedTopZero:
    """Nonce with its top ``bits`` bits (relative to bitlen(n)) forced to zero."""

    bits: int


@dataclass(frozen=True)
class FaultOnR:
    """Emit a valid signature plus a second one computed from a corrupted r."""


NoncePolicy = Union[Uniform, Fixed, ReuseTag, BiasedTopZero, FaultOnR]


def hash_to_scalar(message: bytes, c: CurveParams) -> int:
    """SHA-256, keep the leftmost bitlen(n) bits, reduce mod n."""
    digest = hashlib.sha256(message).digest()
    e = int.from_bytes(digest, "big")
    excess = 8 * len(digest) - c.n.bit_length()
    if excess > 0:
        e >>= excess
    return e % c.n


def corrupt_r(r: int, c: CurveParams, rng: random.Random) -> int:
    """Flip one random bit of r (reduce mod n), retrying until r_f not in {0, r}."""
    nbits = c.n.bit_length()
    while True:
        rf = (r ^ (1 << rng.randrange(nbits))) % c.n
        if rf not in (0, r):
            return rf


def keygen(c: CurveParams, rng: random.Random | None = None) -> KeyPair:
    rng = rng or secrets.SystemRandom()
    d = 0
    while d == 0:
        d = rng.randrange(c.n)
    return KeyPair(d, scalar_mul(d, c.G, c))


@dataclass
class Signer:
    """Signing session for one key.

    Holds the per-tag nonce table used by ReuseTag, so a session should only
    be driven from one thread at a time.
    """

    curve: CurveParams
    key: KeyPair
    rng: random.Random = field(default_factory=secrets.SystemRandom)
    _tags: dict = field(default_factory=dict, repr=False)

    def _draw(self, policy) -> int:
        n = self.curve.n
        if isinstance(policy, (Uniform, FaultOnR)):
            return self.rng.randrange(1, n)
        if isinstance(policy, Fixed):
            if not 1 <= policy.k < n:
                raise ValueError(f"fixed nonce must lie in [1, n-1], got {policy.k}")
            return policy.k
        if isinstance(policy, ReuseTag):
            if policy.tag not in self._tags:
                self._tags[policy.tag] = self.rng.randrange(1, n)
            return self._tags[policy.tag]
        if isinstance(policy, BiasedTopZero):
            L = n.bit_length() - policy.bits
            if policy.bits < 0 or L < 1:
                raise ValueError(f"bias of {policy.bits} bits is out of range for {self.curve.id}")
            return self.rng.randrange(1, min(1 << L, n))
        raise TypeError(f"unknown nonce policy {policy!r}")

    def _digest(self, data) -> tuple[int, bytes | None]:
        if isinstance(data, (bytes, bytearray)):
            return hash_to_scalar(bytes(data), self.curve), bytes(data)
        if isinstance(data, int):
            if not 0 <= data < self.curve.n:
                raise ValueError("precomputed hash must lie in [0, n)")
            return data, None
        raise TypeError("sign() takes message bytes or a hash scalar")

    def sign(self, data, policy=Uniform(), leak_nonce: bool = False):
        """Sign message bytes (or an int digest) under ``policy``.

        Returns a SignedMessage, or a ``(valid, faulty)`` pair for FaultOnR.
        """
        c, n, d = self.curve, self.curve.n, self.key.d
        h, msg = self._digest(data)
        resample = isinstance(policy, (Uniform, FaultOnR, BiasedTopZero))
        while True:
            k = self._draw(policy)
            R = scalar_mul(k, c.G, c)
            r = R.x % n
            kinv = mod_inv(k, n)
            s = kinv * (h + d * r) % n
            if r != 0 and s != 0:
                break
            if not resample:
                raise DegenerateSignature(f"nonce policy {policy!r} gave r={r}, s={s}")
        sm = SignedMessage(c.id, self.key.Q, h, Signature(r, s), msg, k if leak_nonce else None)
        if not isinstance(policy, FaultOnR):
            return sm
        while True:
            rf = corrupt_r(r, c, self.rng)
            sf = kinv * (h + d * rf) % n
            if sf != 0:
                break
        return sm, replace(sm, sig=Signature(rf, sf))


def sign(data, kp: KeyPair, c: CurveParams, policy=Uniform(), rng=None, leak_nonce=False):
    """One-shot signing; ReuseTag state does not outlive the call."""
    return Signer(c, kp, rng or secrets.SystemRandom()).sign(data, policy, leak_nonce)


def verify(sm: SignedMessage, c: CurveParams | None = None) -> bool:
    """True iff the signature is valid.  Never raises on bad input."""
    try:
        c = c or registry_get(sm.curve)
        n = c.n
        r, s, Q = sm.r, sm.s, sm.Q
        if not (1 <= r < n and 1 <= s < n):
            return False
        if Q.is_infinity or not on_curve(Q, c):
            return False
        if sm.msg is not None and hash_to_scalar(sm.msg, c) != sm.h:
            return False
        w = mod_inv(s, n)
        u1 = sm.h * w % n
        u2 = r * w % n
        X = point_add(scalar_mul(u1, c.G, c), scalar_mul(u2, Q, c), c)
        if X.is_infinity:
            return False
        return X.x % n == r
    except (EcdsaLabError, ValueError, TypeError, AttributeError):
        return False
