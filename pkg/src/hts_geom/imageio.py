"""Grayscale image files: PGM (P5) hand-rolled for byte-stable output,
PNG via Pillow. Intensities map linearly between [0, 1] and 8-bit."""
from __future__ import annotations

import os
import re

import numpy as np

from .rectify import GrayImage


def write_pgm(path, image: GrayImage) -> None:
    data = image.to_uint8()
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        blob = fh.read()
    # header: magic, width, height, maxval; '#' comments allowed between tokens
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = re.match(rb"\s*(#[^\n]*\n|\S+)", blob[pos:])
        if m is None:
            raise ValueError(f"{path}: truncated PGM header")
        pos += m.end()
        tok = m.group(1)
        if not tok.startswith(b"#"):
            tokens.append(tok)
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = blob[pos:pos + width * height]
    if len(raster) < width * height:
        raise ValueError(f"{path}: truncated pixel data")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage.from_uint8(arr)


def write_png(path, image: GrayImage) -> None:
    from PIL import Image
    Image.fromarray(image.to_uint8(), mode="L").save(path, format="PNG")


def read_png(path) -> GrayImage:
    from PIL import Image
    with Image.open(path) as im:
        arr = np.array(im.convert("L"), dtype=np.uint8)
    return GrayImage.from_uint8(arr)


def write_image(path, image: GrayImage) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pgm":
        write_pgm(path, image)
    elif ext == ".png":
        write_png(path, image)
    else:
        raise ValueError(f"unsupported image extension: {ext!r} (use .pgm or .png)")


def read_image(path) -> GrayImage:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pgm":
        return read_pgm(path)
    if ext == ".png":
        return read_png(path)
    raise ValueError(f"unsupported image extension: {ext!r} (use .pgm or .png)")
