"""Stable seed derivation for parallel, order-independent reproducibility."""

import hashlib


def derive_seed(master: int, *keys) -> int:
    """Hash (master, *keys) into a 63-bit seed.

    Uses blake2b so derived streams are stable across platforms and Python
    versions, unlike hash().
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for k in keys:
        h.update(b"\x1f")
        h.update(str(k).encode())
    return int.from_bytes(h.digest(), "big") >> 1
