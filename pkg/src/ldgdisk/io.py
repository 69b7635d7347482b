"""Flat binary container for gridded fields.

Layout (little-endian): magic ``LDG2``, version u32, winding i32, radius f64,
N_r u32, N_phi u32, potential coefficients 3 x f64, then the payload as
row-major f64.  Version 1 carries a plain five-component field; version 2
inserts a u32 payload tag after the coefficients to distinguish a
three-component director perturbation (tag 1) from a five-component normal
field in frame coordinates (tag 2).
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"LDG2"
VERSION_FIELD = 1
VERSION_TAGGED = 2
TAG_PSI = 1
TAG_P = 2
_TAG_COMPONENTS = {TAG_PSI: 3, TAG_P: 5}


def write_container(path, *, k: int, R: float, n_r: int, n_phi: int,
                    coeffs: tuple[float, float, float], payload: np.ndarray,
                    tag: int | None = None) -> None:
    payload = np.ascontiguousarray(payload, dtype=float)
    if tag is None:
        version = VERSION_FIELD
        expected = (n_r, n_phi, 5)
    else:
        if tag not in _TAG_COMPONENTS:
            raise ValueError(f"unknown payload tag {tag}")
        version = VERSION_TAGGED
        expected = (n_r, n_phi, _TAG_COMPONENTS[tag])
    if payload.shape != expected:
        raise ValueError(f"payload shape {payload.shape} does not match header {expected}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Ii", version, k))
        fh.write(struct.pack("<d", float(R)))
        fh.write(struct.pack("<II", n_r, n_phi))
        fh.write(struct.pack("<3d", *[float(c) for c in coeffs]))
        if tag is not None:
            fh.write(struct.pack("<I", tag))
        fh.write(payload.astype("<f8").tobytes(order="C"))


def read_container(path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        version, k = struct.unpack("<Ii", fh.read(8))
        (R,) = struct.unpack("<d", fh.read(8))
        n_r, n_phi = struct.unpack("<II", fh.read(8))
        coeffs = struct.unpack("<3d", fh.read(24))
        tag = None
        ncomp = 5
        if version == VERSION_TAGGED:
            (tag,) = struct.unpack("<I", fh.read(4))
            if tag not in _TAG_COMPONENTS:
                raise ValueError(f"unknown payload tag {tag}")
            ncomp = _TAG_COMPONENTS[tag]
        elif version != VERSION_FIELD:
            raise ValueError(f"unsupported version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n_r * n_phi * ncomp:
        raise ValueError("payload size does not match header")
    return {
        "version": version,
        "k": k,
        "R": R,
        "n_r": n_r,
        "n_phi": n_phi,
        "coeffs": coeffs,
        "tag": tag,
        "payload": data.reshape(n_r, n_phi, ncomp).copy(),
    }
