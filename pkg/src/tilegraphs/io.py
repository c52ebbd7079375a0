"""Deterministic file formats: tiling and graph JSON, little-endian CSR binary,
CSV tables, and digests."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import Graph
from .tangency import TangencyGraph
from .tiling import Tiling, as_gamma

CSR_MAGIC = b"TGCSR\x00\x01\x00"


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def tiling_to_json(T: Tiling) -> dict:
    gamma, power = T.provenance if T.provenance is not None else (None, None)
    return {
        "dim": T.dim,
        "gamma": list(as_gamma(gamma).entries) if gamma is not None else None,
        "power": power,
        "denominators": list(T.den),
        "tiles": np.concatenate([T.lo, T.ell], axis=1).tolist(),
    }


def tiling_from_json(data: dict) -> Tiling:
    d = int(data["dim"])
    rows = np.array(data["tiles"], dtype=object).reshape(-1, 2 * d)
    try:
        rows = rows.astype(np.int64)
    except OverflowError:
        pass
    prov = None
    if data.get("gamma") is not None:
        prov = (as_gamma(tuple(data["gamma"])), int(data["power"]))
    return Tiling(rows[:, :d], rows[:, d:], tuple(data["denominators"]), prov)


def graph_to_json(G: Graph, header: dict | None = None) -> dict:
    """Edges as [u, v, dir] with 1-based axis labels (0 when unlabelled)."""
    dirs = G.edge_dir.astype(np.int64) + 1 if isinstance(G, TangencyGraph) else np.zeros(G.num_edges, np.int64)
    out = {
        "n": G.n,
        "dim": getattr(G, "dim", None),
        "edges": np.concatenate([G.edges.astype(np.int64), dirs[:, None]], axis=1).tolist(),
    }
    out.update(header or {})
    return out


def graph_from_json(data: dict) -> Graph:
    e = np.array(data["edges"], dtype=np.int64).reshape(-1, 3)
    if data.get("dim") and np.all(e[:, 2] > 0):
        return TangencyGraph.from_labeled(int(data["n"]), int(data["dim"]), e[:, 0], e[:, 1], e[:, 2] - 1)
    return Graph.from_edges(int(data["n"]), e[:, 0], e[:, 1])


def write_csr(G: Graph, path) -> None:
    """Magic, then n and nnz as little-endian uint64, then indptr (int64) and indices (int64)."""
    with open(path, "wb") as fh:
        fh.write(CSR_MAGIC)
        fh.write(struct.pack("<QQ", G.n, len(G.indices)))
        fh.write(G.indptr.astype("<i8").tobytes())
        fh.write(G.indices.astype("<i8").tobytes())


def read_csr(path) -> tuple[np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:8] != CSR_MAGIC:
        raise ValidationError(f"{path} is not a CSR container")
    n, nnz = struct.unpack("<QQ", raw[8:24])
    indptr = np.frombuffer(raw, dtype="<i8", count=n + 1, offset=24)
    indices = np.frombuffer(raw, dtype="<i8", count=nnz, offset=24 + 8 * (n + 1))
    return indptr.astype(np.int64), indices.astype(np.int64)


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
