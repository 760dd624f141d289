"""ECDSA signing, verification and nonce-misuse key recovery."""

__version__ = "0.1.0"
