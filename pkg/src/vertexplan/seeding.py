"""Stable seed derivation so adding trials or algorithms never perturbs others."""

import hashlib


def stable_seed(*parts) -> int:
    """64-bit seed from a canonical string encoding of the parts.

    Unlike hash(), the result is stable across processes and platforms.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
