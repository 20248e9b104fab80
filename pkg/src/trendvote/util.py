"""Shared helpers: keyword normalization, stable hashing, seeded RNG streams."""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Any

import numpy as np

_WS = re.compile(r"\s+")


def normalize_keyword(name: str) -> str:
    """Case-fold, trim, and collapse internal whitespace. No stemming."""
    return _WS.sub(" ", name.strip()).casefold()


def normalize_candidate_text(text: str) -> str:
    """Normalization used for candidate identity hashing only.

    Case is preserved; whitespace is collapsed; trailing punctuation stripped.
    """
    collapsed = _WS.sub(" ", text.strip())
    return collapsed.rstrip(".!?,;:")


def stable_hash(*parts: str) -> str:
    """Hex SHA-256 over NUL-joined parts. Stable across runs and platforms."""
    h = hashlib.sha256()
    for i, part in enumerate(parts):
        if i:
            h.update(b"\x00")
        h.update(part.encode("utf-8"))
    return h.hexdigest()


def candidate_id(text: str) -> str:
    return stable_hash("candidate", normalize_candidate_text(text))[:16]


def derive_seed(root_seed: int, stream: str) -> int:
    """Derive an independent 63-bit seed for a named substream.

    All randomness in the pipeline flows from one root seed through named
    streams so individual stages can be rerun in isolation.
    """
    digest = hashlib.sha256(f"{root_seed}:{stream}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng_for(root_seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root_seed, stream))


def file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def dump_json(obj: Any, path: Path) -> None:
    """Canonical JSON write: sorted keys, no trailing whitespace jitter."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, sort_keys=True, indent=2, ensure_ascii=False)
        f.write("\n")


def load_json(path: Path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
