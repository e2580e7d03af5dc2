"""Reading and writing frames: binary PGM (P5) and grayscale PNG."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

_FRAME_RE = re.compile(r"(\d+)\.(pgm|png)$", re.IGNORECASE)


def write_pgm(path, image: np.ndarray) -> None:
    """Write an 8-bit P5 PGM. Boolean masks are stored as 0/255."""
    img = np.asarray(image)
    if img.dtype == bool:
        img = img.astype(np.uint8) * 255
    if img.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM into a ``uint8`` array."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM is not supported")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    return pixels.reshape(h, w).copy()


def read_gray(path) -> np.ndarray:
    """Read a PGM or PNG as 8-bit grayscale; colour is averaged over channels."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim == 3:
        arr = arr[..., :3].astype(float).mean(axis=2).round()
    return arr.astype(np.uint8)


def read_mask(path) -> np.ndarray:
    """Read a binary image: any non-zero pixel is foreground."""
    return read_gray(path) > 0


def list_frames(directory) -> list[Path]:
    """Numbered ``*.pgm``/``*.png`` files in a directory, in frame order."""
    found = []
    for p in Path(directory).iterdir():
        m = _FRAME_RE.search(p.name)
        if m:
            found.append((int(m.group(1)), p))
    found.sort()
    return [p for _, p in found]


def frame_name(index: int, ext: str = "pgm") -> str:
    return f"frame_{index:05d}.{ext}"
