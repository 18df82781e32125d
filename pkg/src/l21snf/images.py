"""Grayscale PGM batches: read/write, pack to a matrix, unpack back to files.

A batch of equal-sized images becomes one matrix: column ``j`` is image
``j`` flattened row-major and scaled by its maxval into [0, 1]. The meta
file records everything needed to invert the packing exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .io import read_kv_pairs

__all__ = [
    "ImageBatchMeta",
    "read_pgm",
    "write_pgm",
    "pack_images",
    "unpack_images",
    "save_meta",
    "load_meta",
]


@dataclass
class ImageBatchMeta:
    width: int
    height: int
    count: int
    maxval: int
    names: List[str]

    def validate_matrix(self, M) -> None:
        if M.shape != (self.width * self.height, self.count):
            raise ValueError(
                f"matrix shape {M.shape} does not match meta "
                f"({self.width * self.height} x {self.count})"
            )
        if len(self.names) != self.count:
            raise ValueError(
                f"meta lists {len(self.names)} names for count={self.count}"
            )


def _tokenize_header(data: bytes, want: int) -> Tuple[List[bytes], int]:
    """First ``want`` whitespace tokens of a PGM header, comments skipped.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last one.
    """
    tokens: List[bytes] = []
    i = 0
    while len(tokens) < want:
        if i >= len(data):
            raise ValueError("truncated PGM header")
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
            if len(tokens) == want:
                if i < len(data) and data[i : i + 1].isspace():
                    i += 1  # exactly one whitespace separates header from raster
    return tokens, i


def read_pgm(path) -> Tuple[np.ndarray, int]:
    """Read a P5 (binary) or P2 (ASCII) PGM; returns ``(image, maxval)``.

    The image is an ``(height, width)`` integer array. maxval up to 65535
    is supported; two-byte P5 samples are big-endian per the format.
    """
    data = Path(path).read_bytes()
    (magic,), _ = _tokenize_header(data, 1)
    if magic not in (b"P5", b"P2"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    tokens, offset = _tokenize_header(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise ValueError(f"{path}: bad PGM dimensions or maxval")
    n = width * height
    if magic == b"P2":
        values = data[offset - 1 :].split()
        if len(values) != n:
            raise ValueError(f"{path}: expected {n} samples, found {len(values)}")
        img = np.array([int(v) for v in values], dtype=np.uint16)
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raster = data[offset : offset + n * dtype.itemsize]
        if len(raster) != n * dtype.itemsize:
            raise ValueError(f"{path}: truncated PGM raster")
        img = np.frombuffer(raster, dtype=dtype).astype(np.uint16)
    if img.max(initial=0) > maxval:
        raise ValueError(f"{path}: sample exceeds maxval {maxval}")
    return img.reshape(height, width), maxval


def write_pgm(path, image, maxval, binary=True) -> None:
    """Write an ``(height, width)`` integer array as P5 (default) or P2."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval must be in [1, 65535], got {maxval}")
    if image.min(initial=0) < 0 or image.max(initial=0) > maxval:
        raise ValueError("image samples must lie in [0, maxval]")
    height, width = image.shape
    if binary:
        header = f"P5\n{width} {height}\n{maxval}\n".encode()
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        Path(path).write_bytes(header + image.astype(dtype).tobytes())
    else:
        body = "\n".join(" ".join(str(int(v)) for v in row) for row in image)
        Path(path).write_text(f"P2\n{width} {height}\n{maxval}\n{body}\n")


def pack_images(directory) -> Tuple[np.ndarray, ImageBatchMeta]:
    """Pack every ``.pgm`` in a directory (sorted by name) into one matrix.

    All images must share dimensions and maxval. Column ``j`` holds image
    ``j`` flattened row-major, scaled into [0, 1] by the common maxval.
    """
    directory = Path(directory)
    names = sorted(p.name for p in directory.iterdir() if p.suffix.lower() == ".pgm")
    if not names:
        raise ValueError(f"no .pgm files found in {directory}")
    columns = []
    width = height = maxval = None
    for name in names:
        img, mv = read_pgm(directory / name)
        h, w = img.shape
        if width is None:
            width, height, maxval = w, h, mv
        elif (w, h) != (width, height):
            raise ValueError(
                f"{name}: size {w}x{h} differs from first image {width}x{height}"
            )
        elif mv != maxval:
            raise ValueError(f"{name}: maxval {mv} differs from first image {maxval}")
        columns.append(img.reshape(-1).astype(np.float64) / maxval)
    X = np.column_stack(columns)
    meta = ImageBatchMeta(
        width=width, height=height, count=len(names), maxval=maxval, names=names
    )
    return X, meta


def unpack_images(M, meta: ImageBatchMeta, out_dir) -> List[Path]:
    """Write each matrix column back to a PGM file named per the meta.

    Values are clamped to [0, 1], rescaled to the recorded maxval, and
    rounded to the nearest level, so packing followed by unpacking is exact.
    """
    M = np.asarray(M, dtype=np.float64)
    meta.validate_matrix(M)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for j, name in enumerate(meta.names):
        col = np.clip(M[:, j], 0.0, 1.0)
        img = np.rint(col * meta.maxval).astype(np.uint16)
        img = img.reshape(meta.height, meta.width)
        path = out_dir / name
        write_pgm(path, img, meta.maxval)
        written.append(path)
    return written


def save_meta(meta: ImageBatchMeta, path) -> None:
    lines = [
        f"width={meta.width}",
        f"height={meta.height}",
        f"count={meta.count}",
        f"maxval={meta.maxval}",
    ]
    lines += [f"name={n}" for n in meta.names]
    Path(path).write_text("\n".join(lines) + "\n")


def load_meta(path) -> ImageBatchMeta:
    fields = {}
    names: List[str] = []
    for key, value in read_kv_pairs(path):
        if key == "name":
            names.append(value)
        else:
            fields[key] = value
    try:
        meta = ImageBatchMeta(
            width=int(fields["width"]),
            height=int(fields["height"]),
            count=int(fields["count"]),
            maxval=int(fields.get("maxval", 255)),
            names=names,
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing meta key {exc}") from exc
    if meta.count != len(names):
        raise ValueError(
            f"{path}: count={meta.count} but {len(names)} name= lines"
        )
    return meta
