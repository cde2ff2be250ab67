"""Deterministic binary container for datasets and fitted estimators.

Layout:
    bytes 0..3    magic b"SBIC"
    bytes 4..5    format version, uint16 little-endian (currently 1)
    bytes 6..7    reserved, zero
    bytes 8..15   header length H, uint64 little-endian
    bytes 16..16+H  header: UTF-8 JSON with sorted keys
    remainder     raw array bytes, C-order little-endian, in manifest order

The header holds {"kind": str, "meta": {...}, "arrays": [{name, dtype, shape}]}.
Writing the same payload twice produces identical bytes: keys are sorted, the
manifest order is the sorted array names, and floats in meta round-trip through
repr.  That property is what makes rerun-idempotence checks byte-level.
"""

import json

import numpy as np

MAGIC = b"SBIC"
VERSION = 1

_DTYPES = {"float64": "<f8", "int64": "<i8", "int8": "|i1", "bool": "|b1"}


class ContainerError(Exception):
    pass


def save_container(path, kind, meta, arrays):
    """Write kind (str), meta (JSON-able dict), arrays (dict name -> ndarray)."""
    names = sorted(arrays)
    manifest = []
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        if arr.dtype.name not in _DTYPES:
            raise ContainerError(f"unsupported dtype {arr.dtype} for array {name!r}")
        arr = arr.astype(_DTYPES[arr.dtype.name], copy=False)
        manifest.append({"name": name, "dtype": arr.dtype.name,
                         "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = json.dumps({"arrays": manifest, "kind": kind, "meta": meta},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(VERSION.to_bytes(2, "little"))
        fh.write(b"\x00\x00")
        fh.write(len(header).to_bytes(8, "little"))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_container(path, expect_kind=None):
    """Read a container back.  Returns (kind, meta, arrays dict)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ContainerError(f"{path}: not a container (bad magic)")
    version = int.from_bytes(raw[4:6], "little")
    if version != VERSION:
        raise ContainerError(f"{path}: unsupported container version {version}")
    hlen = int.from_bytes(raw[8:16], "little")
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    kind, meta = header["kind"], header["meta"]
    if expect_kind is not None and kind != expect_kind:
        raise ContainerError(f"{path}: kind is {kind!r}, expected {expect_kind!r}")
    arrays = {}
    offset = 16 + hlen
    for entry in header["arrays"]:
        dtype = np.dtype(_DTYPES[entry["dtype"]])
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        nbytes = dtype.itemsize * count
        chunk = raw[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise ContainerError(f"{path}: truncated array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype=dtype).reshape(
            entry["shape"]).copy()
        offset += nbytes
    if offset != len(raw):
        raise ContainerError(f"{path}: trailing bytes after arrays")
    return kind, meta, arrays
