"""On-disk cache of trace tables.

Layout (UTF-8, LF)::

    # shafstats-ap-cache v1
    # curve a=<int> b=<int> delta=<int>
    # xmax=<int> count=<int> checksum=<16 hex digits>
    p,ap
    <p>,<ap>
    ...

The checksum is 64-bit FNV-1a over the record lines exactly as written
(each ``<p>,<ap>\\n``).
"""

from __future__ import annotations

import logging
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curve import ApTable, CurveQ, compute_traces, good_primes, trace_table
from .errors import CacheFormatError, ChecksumError, CurveMismatchError, InvalidArgument, VersionError

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1

_MAGIC = re.compile(r"^# shafstats-ap-cache v(\d+)$")
_CURVE = re.compile(r"^# curve a=(-?\d+) b=(-?\d+) delta=(-?\d+)$")
_SIZES = re.compile(r"^# xmax=(\d+) count=(\d+) checksum=([0-9a-f]{16})$")


def fnv1a64(data: bytes, h: int = _FNV_OFFSET) -> int:
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


@dataclass(frozen=True)
class CacheManifest:
    format_version: int
    curve_a: int
    curve_b: int
    delta: int
    xmax: int
    record_count: int
    checksum: int


def _payload(table: ApTable) -> bytes:
    return "".join(f"{p},{t}\n" for p, t in zip(table.primes.tolist(), table.traces.tolist())).encode()


def save(table: ApTable, path: str | os.PathLike) -> None:
    path = Path(path)
    body = _payload(table)
    c = table.curve
    header = (
        f"# shafstats-ap-cache v{FORMAT_VERSION}\n"
        f"# curve a={c.a} b={c.b} delta={c.delta}\n"
        f"# xmax={table.xmax} count={len(table)} checksum={fnv1a64(body):016x}\n"
        "p,ap\n"
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header.encode())
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _read(path) -> tuple[CacheManifest, bytes]:
    raw = Path(path).read_bytes()
    lines = raw.split(b"\n", 4)
    if len(lines) < 4:
        raise CacheFormatError(f"{path}: truncated header")
    try:
        head = [ln.decode() for ln in lines[:4]]
    except UnicodeDecodeError as exc:
        raise CacheFormatError(f"{path}: header is not UTF-8") from exc
    magic = _MAGIC.match(head[0])
    if not magic:
        raise CacheFormatError(f"{path}: not a shafstats cache")
    version = int(magic.group(1))
    if version != FORMAT_VERSION:
        raise VersionError(f"{path}: format v{version}, expected v{FORMAT_VERSION}")
    cm, sz = _CURVE.match(head[1]), _SIZES.match(head[2])
    if not cm or not sz or head[3] != "p,ap":
        raise CacheFormatError(f"{path}: malformed header")
    manifest = CacheManifest(
        version,
        int(cm.group(1)),
        int(cm.group(2)),
        int(cm.group(3)),
        int(sz.group(1)),
        int(sz.group(2)),
        int(sz.group(3), 16),
    )
    return manifest, lines[4] if len(lines) > 4 else b""


def read_manifest(path) -> CacheManifest:
    return _read(path)[0]


def load(path, expected_curve: CurveQ) -> ApTable:
    manifest, body = _read(path)
    if (manifest.curve_a, manifest.curve_b) != expected_curve.key or manifest.delta != expected_curve.delta:
        raise CurveMismatchError(
            f"{path} holds curve ({manifest.curve_a}, {manifest.curve_b}), expected {expected_curve.key}"
        )
    if fnv1a64(body) != manifest.checksum:
        raise ChecksumError(f"{path}: checksum mismatch")
    rows = body.decode().splitlines()
    if len(rows) != manifest.record_count:
        raise CacheFormatError(f"{path}: {len(rows)} records, header says {manifest.record_count}")
    try:
        pairs = np.array([row.split(",") for row in rows], dtype=np.int64).reshape(-1, 2)
    except ValueError as exc:
        raise CacheFormatError(f"{path}: bad record line") from exc
    try:
        return ApTable(expected_curve, manifest.xmax, pairs[:, 0], pairs[:, 1])
    except InvalidArgument as exc:
        raise CacheFormatError(f"{path}: {exc}") from exc


def extend(table: ApTable, new_x: int, workers: int = 1) -> ApTable:
    """Grow ``table`` to cover new_x, evaluating a_p only for primes in (xmax, new_x]."""
    if new_x < table.xmax:
        raise InvalidArgument(f"new_x={new_x} is below the table's xmax={table.xmax}")
    fresh = good_primes(table.curve, table.xmax, new_x)
    log.info("extending %s from %d to %d: %d new primes", table.curve.key, table.xmax, new_x, len(fresh))
    traces = compute_traces(table.curve, fresh, workers)
    return ApTable(
        table.curve,
        int(new_x),
        np.concatenate([table.primes, fresh]),
        np.concatenate([table.traces, traces]),
    )


def load_or_build(curve: CurveQ, x: int, path=None, workers: int = 1) -> ApTable:
    """Table covering x, reusing and growing the cache at ``path`` when given."""
    if path is None:
        return trace_table(curve, x, workers)
    path = Path(path)
    if path.exists():
        table = load(path, curve)
        if table.xmax >= x:
            return table
        table = extend(table, x, workers)
    else:
        table = trace_table(curve, x, workers)
    save(table, path)
    return table
