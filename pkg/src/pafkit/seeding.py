"""Deterministic per-component seed derivation.

Every randomized component receives its own seed derived from the master
seed and a stable string label, so adding or removing one component never
perturbs the random stream of another. The mixing function is SHA-256 over
the decimal master seed and the label path, truncated to 64 bits; it is
stable across platforms, Python versions and numpy versions.
"""

import hashlib


def derive_seed(master: int, *labels: str) -> int:
    """Mix a master seed and a label path into a 64-bit child seed."""
    key = "/".join([str(int(master)), *labels]).encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "big")
