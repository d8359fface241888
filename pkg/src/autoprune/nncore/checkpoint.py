"""Checkpoints: a text manifest (name, rank, dims per line) next to a binary
blob of little-endian float64 values in manifest order."""

import numpy as np

from .core import Tensor


def save_checkpoint(stem: str, tensors: dict[str, Tensor]):
    lines = []
    chunks = []
    for name, value in tensors.items():
        if not name or any(ch.isspace() for ch in name):
            raise ValueError(f"bad tensor name {name!r}")
        arr = np.asarray(value, dtype=np.float64)
        lines.append(" ".join([name, str(arr.ndim)] + [str(d) for d in arr.shape]))
        chunks.append(np.ascontiguousarray(arr).astype("<f8").tobytes())
    with open(f"{stem}.manifest", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
    with open(f"{stem}.blob", "wb") as fh:
        fh.write(b"".join(chunks))


def load_checkpoint(stem: str) -> dict[str, Tensor]:
    entries = []
    with open(f"{stem}.manifest", "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            name, ndim = parts[0], int(parts[1])
            dims = tuple(int(d) for d in parts[2:])
            if len(dims) != ndim:
                raise ValueError(f"{stem}.manifest:{lineno}: rank {ndim} but {len(dims)} dims")
            entries.append((name, dims))
    raw = np.fromfile(f"{stem}.blob", dtype="<f8")
    total = sum(int(np.prod(dims, dtype=np.int64)) for _, dims in entries)
    if raw.size != total:
        raise ValueError(f"{stem}.blob holds {raw.size} values, manifest expects {total}")
    out = {}
    offset = 0
    for name, dims in entries:
        count = int(np.prod(dims, dtype=np.int64))
        out[name] = raw[offset:offset + count].reshape(dims).astype(np.float64)
        offset += count
    return out


# 128-bit unsigned integers (random-generator state) ride in checkpoints as
# four base-2^32 digits, little-endian; each digit is exact in a float64.

def u128_to_digits(value: int) -> Tensor:
    if not 0 <= value < 1 << 128:
        raise ValueError(f"value {value} outside u128 range")
    return np.array([(value >> (32 * i)) & 0xFFFFFFFF for i in range(4)], dtype=np.float64)


def digits_to_u128(digits: Tensor) -> int:
    return sum(int(d) << (32 * i) for i, d in enumerate(np.asarray(digits)))
