"""Per-component seed derivation from one master seed."""

from __future__ import annotations

import hashlib

SEED_SCHEME = "sha256-v1"


def derive_seed(master: int, component: str) -> int:
    """Hash the component name with the master seed into a 32-bit seed."""
    digest = hashlib.sha256(f"{master}:{component}".encode("utf-8")).hexdigest()
    return int(digest[:8], 16)
