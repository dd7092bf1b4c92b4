# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""File formats written by the pipeline: JSON reports, RTTM, PGM and CSV dumps."""

import json
import os
import tempfile

import numpy as np


def atomic_write(path, payload):
    """
    Write `payload` to `path` through a temporary file and a rename.

    Parameters
    ----------
    path : str or os.PathLike
        Destination file.
    payload : bytes or str
        Contents; ``str`` is encoded as UTF-8.
    """
    path = os.fspath(path)
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(
        prefix=f".{os.path.basename(path)}.", suffix=".tmp", dir=directory
    )
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def dumps_json(obj):
    """
    Serialize `obj` deterministically.

    Returns
    -------
    str
    """
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_json(path, obj):
    """Atomically write `obj` as JSON."""
    atomic_write(path, dumps_json(obj))


def rttm_lines(file_id, segments):
    """
    Render segments as RTTM ``SPEAKER`` lines.

    Parameters
    ----------
    file_id : str
        Recording identifier, second RTTM field.
    segments : list of Segment
        Labeled segments.

    Returns
    -------
    list of str
    """
    return [
        f"SPEAKER {file_id} 1 {seg.start_s:.3f} {seg.end_s - seg.start_s:.3f} "
        f"<NA> <NA> {seg.label} <NA> <NA>"
        for seg in segments
    ]


def ssm_to_pgm(values):
    """
    Encode a similarity matrix as an 8-bit binary PGM image.

    High similarity (low BIC) renders dark: the matrix minimum maps to 0 and
    the maximum to 255. A constant matrix renders all pixels 0.

    Parameters
    ----------
    values : np.ndarray
        Square matrix.

    Returns
    -------
    bytes
    """
    values = np.asarray(values, dtype=np.float64)
    height, width = values.shape
    vmin, vmax = float(values.min()), float(values.max())
    if vmax > vmin:
        pixels = np.round(255.0 * (values - vmin) / (vmax - vmin)).astype(np.uint8)
    else:
        pixels = np.zeros(values.shape, dtype=np.uint8)
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def parse_pgm(payload):
    """
    Decode a binary ``P5`` PGM image produced by ``ssm_to_pgm``.

    Returns
    -------
    np.ndarray
        ``uint8`` pixel matrix.
    """
    magic, dims, maxval, body = payload.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit binary PGM image")
    width, height = (int(v) for v in dims.split())
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width)


def csv_text(header, rows, formats):
    """
    Render rows as CSV text.

    Parameters
    ----------
    header : list of str
        Column names.
    rows : iterable of sequence
        Row values.
    formats : list of str
        ``str.format`` specs per column, e.g. ``".6f"``.

    Returns
    -------
    str
    """
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(value, spec) for value, spec in zip(row, formats)))
    return "\n".join(lines) + "\n"
