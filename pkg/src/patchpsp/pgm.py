"""Binary PGM (P5) reader and writer, bit-exact for 8-bit rasters."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .patch_grid import Image


class PgmError(ValueError):
    """Malformed or unsupported PGM data."""


def _header_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Parse `count` whitespace-separated integers, skipping '#' comments.

    Returns the values and the offset of the byte just past the single
    whitespace character that terminates the last token.
    """
    tokens: list[int] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise PgmError("truncated header")
        ch = data[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise PgmError("unterminated comment")
            pos = nl + 1
        else:
            end = pos
            while end < len(data) and data[end : end + 1] not in b" \t\r\n#":
                end += 1
            tok = data[pos:end]
            if not tok.isdigit():
                raise PgmError(f"bad header token {tok!r}")
            tokens.append(int(tok))
            pos = end
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
        raise PgmError("missing whitespace after header")
    return tokens, pos + 1


def read_pgm(path: str | Path) -> Image:
    """Read a binary (P5) PGM file with one raster byte per pixel."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise PgmError("not a binary PGM (P5) file")
    (width, height, maxval), offset = _header_tokens(data[2:], 3)
    offset += 2
    if width < 1 or height < 1:
        raise PgmError(f"bad dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise PgmError(f"unsupported maxval {maxval} (one byte per pixel required)")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise PgmError("raster shorter than width*height")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return Image(pixels.astype(np.float64))


def write_pgm(img: Image, path: str | Path) -> None:
    """Write a binary (P5) PGM file, maxval 255, no comment lines.

    Intensities are rounded to nearest and clipped to [0, 255]; integer-valued
    images in range round-trip bit-exactly through read_pgm.
    """
    raster = np.clip(np.rint(img.pixels), 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.tobytes())
