"""File formats: fvecs/ivecs vector files, index snapshots, synthetic data.

fvecs/ivecs follow the texmex corpus layout: every record is a 4-byte
little-endian signed integer d followed by d 4-byte little-endian values
(IEEE-754 single floats for fvecs, signed integers for ivecs), and every
record in a file shares the same d.

Index snapshots are a self-describing binary layout, documented at
:data:`SNAPSHOT_VERSION` below, with bit-exact round-trips.
"""

from __future__ import annotations

import json
import struct
from collections import deque

import numpy as np

from .errors import FormatError, ParameterError
from .graph import IndexParams, LayeredGraph

# ---------------------------------------------------------------------------
# fvecs / ivecs
# ---------------------------------------------------------------------------


def _load_vecs(path, element_dtype) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) == 0:
        return np.empty((0, 0), dtype=element_dtype)
    if len(raw) < 4:
        raise FormatError(f"{path}: truncated dimension header", offset=0)
    dim = struct.unpack_from("<i", raw, 0)[0]
    if dim <= 0:
        raise FormatError(f"{path}: non-positive dimension {dim}", offset=0)
    record = 4 * (dim + 1)
    if len(raw) % record != 0:
        raise FormatError(
            f"{path}: truncated record (file size {len(raw)} not a multiple "
            f"of record size {record})", offset=(len(raw) // record) * record)
    table = np.frombuffer(raw, dtype="<i4").reshape(-1, dim + 1)
    dims = table[:, 0]
    bad = np.nonzero(dims != dim)[0]
    if bad.size:
        raise FormatError(
            f"{path}: record {bad[0]} declares dimension {dims[bad[0]]}, "
            f"expected {dim}", offset=int(bad[0]) * record)
    data = np.frombuffer(raw, dtype=element_dtype).reshape(-1, dim + 1)[:, 1:]
    return np.ascontiguousarray(data)


def load_fvecs(path) -> np.ndarray:
    """Load an fvecs file as a (n, d) float32 array, in file order."""
    return _load_vecs(path, "<f4")


def load_ivecs(path) -> np.ndarray:
    """Load an ivecs file as a (n, d) int32 array, in file order."""
    return _load_vecs(path, "<i4")


def _save_vecs(path, data, element_dtype):
    arr = np.ascontiguousarray(data, dtype=element_dtype)
    if arr.ndim != 2:
        raise ParameterError(f"expected a 2-d array, got shape {arr.shape}")
    n, dim = arr.shape
    out = np.empty((n, dim + 1), dtype="<i4")
    out[:, 0] = dim
    out[:, 1:] = arr.view("<i4")
    with open(path, "wb") as f:
        f.write(out.tobytes())


def save_fvecs(path, data):
    """Write a (n, d) float array in fvecs layout."""
    _save_vecs(path, data, "<f4")


def save_ivecs(path, data):
    """Write a (n, d) integer array in ivecs layout."""
    _save_vecs(path, data, "<i4")


# ---------------------------------------------------------------------------
# Index snapshots
# ---------------------------------------------------------------------------

SNAPSHOT_MAGIC = b"HLIV"
SNAPSHOT_VERSION = 1
# Layout (all integers little-endian):
#   magic (4 bytes) | version uint32 | header_len uint64 | header JSON
#   vectors  float32 [size, dim]
#   labels   int64   [size]
#   levels   int32   [size]
#   deleted  uint8   [size]
#   per layer 0..n_layers-1: counts int32 [size], adjacency int32 [size, bound]
#   deleted_list int64 [len], oldest first
# The JSON header carries params, dim, capacity, size, entry_point,
# max_layer, n_layers, deleted_list length and the level generator state.


def save_index(g: LayeredGraph, path):
    """Serialize a graph snapshot; the round-trip is bit-exact."""
    header = {
        "params": {
            "M": g.params.M,
            "M_max0": g.params.M_max0,
            "ef_construction": g.params.ef_construction,
            "metric": g.params.metric,
            "level_lambda": g.params.level_lambda,
            "rng_seed": g.params.rng_seed,
        },
        "dim": g.dim,
        "capacity": g.capacity,
        "size": g.size,
        "entry_point": g.entry_point,
        "max_layer": g.max_layer,
        "n_layers": g.n_layers,
        "deleted_list_len": len(g.deleted_list),
        "rng_state": g._rng.bit_generator.state,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    n = g.size
    with open(path, "wb") as f:
        f.write(SNAPSHOT_MAGIC)
        f.write(struct.pack("<I", SNAPSHOT_VERSION))
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        f.write(np.ascontiguousarray(g.vectors[:n], dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(g.labels[:n], dtype="<i8").tobytes())
        f.write(np.ascontiguousarray(g.levels[:n], dtype="<i4").tobytes())
        f.write(np.ascontiguousarray(g.deleted[:n], dtype=np.uint8).tobytes())
        for layer in range(g.n_layers):
            f.write(np.ascontiguousarray(g._adj_cnt[layer][:n], dtype="<i4").tobytes())
            f.write(np.ascontiguousarray(g._adj[layer][:n], dtype="<i4").tobytes())
        f.write(np.asarray(list(g.deleted_list), dtype="<i8").tobytes())


def load_index(path) -> LayeredGraph:
    """Load a snapshot written by :func:`save_index`."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise FormatError(f"{path}: not an index snapshot (bad magic)", offset=0)
    version = struct.unpack_from("<I", raw, 4)[0]
    if version != SNAPSHOT_VERSION:
        raise FormatError(f"{path}: unsupported snapshot version {version}")
    (blob_len,) = struct.unpack_from("<Q", raw, 8)
    pos = 16
    header = json.loads(raw[pos:pos + blob_len].decode("utf-8"))
    pos += blob_len

    params = IndexParams(**header["params"])
    g = LayeredGraph(params, header["dim"], header["capacity"])
    n = header["size"]

    def take(dtype, count):
        nonlocal pos
        nbytes = np.dtype(dtype).itemsize * count
        if pos + nbytes > len(raw):
            raise FormatError(f"{path}: snapshot truncated", offset=pos)
        out = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
        pos += nbytes
        return out

    g.vectors[:n] = take("<f4", n * g.dim).reshape(n, g.dim)
    g.labels[:n] = take("<i8", n)
    g.levels[:n] = take("<i4", n)
    g.deleted[:n] = take(np.uint8, n).astype(bool)
    g.size = n
    g.entry_point = header["entry_point"]
    g.max_layer = header["max_layer"]
    g.ensure_layers(header["n_layers"] - 1)
    for layer in range(header["n_layers"]):
        bound = g.layer_bound(layer)
        g._adj_cnt[layer][:n] = take("<i4", n)
        g._adj[layer][:n] = take("<i4", n * bound).reshape(n, bound)
    g.deleted_list = deque(int(s) for s in take("<i8", header["deleted_list_len"]))
    if pos != len(raw):
        raise FormatError(f"{path}: {len(raw) - pos} trailing bytes", offset=pos)
    g.label_index = {int(g.labels[s]): s for s in range(n) if g.labels[s] >= 0}
    g._live = n - int(g.deleted[:n].sum())
    g._rng.bit_generator.state = header["rng_state"]
    return g


# ---------------------------------------------------------------------------
# Synthetic datasets (desk-scale stand-ins for the public corpora)
# ---------------------------------------------------------------------------


def synthetic_vectors(n: int, dim: int, seed: int = 0,
                      kind: str = "gaussian") -> np.ndarray:
    """Seeded synthetic dataset: (n, dim) float32, gaussian or uniform."""
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        data = rng.standard_normal((n, dim))
    elif kind == "uniform":
        data = rng.random((n, dim))
    else:
        raise ParameterError(f"unknown synthetic kind {kind!r}")
    return data.astype(np.float32)
