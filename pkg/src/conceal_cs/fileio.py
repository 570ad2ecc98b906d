"""Key and ciphertext file formats.

Key file (JSON)::

    {"version": 1, "L": 11,
     "registers": [{"kind": "linear", "degree": 19, "taps": [0, 1, 2, 5],
                    "nonlinear_terms": [], "seed": "0x5a3f1"}, ...]}

Seeds are hex with bit i = stage i.

Ciphertext file (binary)::

    b"CCSE" | uint32 LE header length | UTF-8 JSON header | float64 LE data

The header carries scheme, N, M, L, E_max, block_count and key_id; the data
is block_count * M values, block after block.  The CSV debug form puts the
same header on a leading ``#`` line.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError
from .keystream import Key, RegisterSpec

KEY_VERSION = 1
MAGIC = b"CCSE"
HEADER_FIELDS = ("scheme", "N", "M", "L", "E_max", "block_count", "key_id")


def key_to_dict(key: Key) -> dict:
    return {
        "version": KEY_VERSION,
        "L": key.L,
        "registers": [
            {
                "kind": spec.kind,
                "degree": spec.degree,
                "taps": list(spec.taps),
                "nonlinear_terms": [list(t) for t in spec.nonlinear_terms],
                "seed": hex(seed),
            }
            for spec, seed in zip(key.registers, key.seeds)
        ],
    }


def key_from_dict(data: dict) -> Key:
    try:
        if data["version"] != KEY_VERSION:
            raise FormatError(f"unsupported key version {data['version']}")
        registers, seeds = [], []
        for reg in data["registers"]:
            registers.append(
                RegisterSpec(
                    int(reg["degree"]),
                    tuple(reg["taps"]),
                    reg["kind"],
                    tuple(tuple(t) for t in reg.get("nonlinear_terms", [])),
                )
            )
            seeds.append(int(reg["seed"], 16))
        key = Key(tuple(registers), tuple(seeds))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed key: {exc}") from None
    if key.L != data["L"]:
        raise FormatError(f"key declares L={data['L']} but lists {key.L} registers")
    return key


def dumps_key(key: Key) -> str:
    return json.dumps(key_to_dict(key), indent=2) + "\n"


def save_key(key: Key, path: str | Path) -> None:
    Path(path).write_text(dumps_key(key))


def load_key(path: str | Path) -> Key:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    return key_from_dict(data)


def key_id(key: Key) -> str:
    canonical = json.dumps(key_to_dict(key), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass
class CiphertextFile:
    header: dict
    blocks: np.ndarray  # block_count x M

    def __post_init__(self):
        missing = [f for f in HEADER_FIELDS if f not in self.header]
        if missing:
            raise FormatError(f"ciphertext header missing {missing}")
        self.blocks = np.asarray(self.blocks, dtype="<f8").reshape(-1, int(self.header["M"]))
        if len(self.blocks) != self.header["block_count"]:
            raise FormatError("block_count does not match data")


def _header_bytes(header: dict) -> bytes:
    return json.dumps({k: header[k] for k in HEADER_FIELDS}, sort_keys=True).encode()


def write_ciphertext(cf: CiphertextFile, path: str | Path) -> None:
    hb = _header_bytes(cf.header)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(hb)))
        fh.write(hb)
        fh.write(np.ascontiguousarray(cf.blocks, dtype="<f8").tobytes())


def read_ciphertext(path: str | Path) -> CiphertextFile:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic, not a ciphertext file")
    if len(raw) < 8:
        raise FormatError(f"{path}: truncated header")
    (hlen,) = struct.unpack("<I", raw[4:8])
    if len(raw) < 8 + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[8 : 8 + hlen])
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: corrupt header ({exc})") from None
    data = raw[8 + hlen :]
    try:
        expected = int(header["block_count"]) * int(header["M"]) * 8
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"{path}: header lacks block_count/M") from None
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} data bytes, found {len(data)} (truncated?)")
    return CiphertextFile(header, np.frombuffer(data, dtype="<f8"))


def write_ciphertext_csv(cf: CiphertextFile, path: str | Path) -> None:
    M = cf.header["M"]
    lines = ["# " + _header_bytes(cf.header).decode()]
    lines.append(",".join(["block"] + [f"y{i + 1}" for i in range(M)]))
    for b, row in enumerate(cf.blocks):
        lines.append(",".join([str(b)] + [f"{v:.17g}" for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_ciphertext_csv(path: str | Path) -> CiphertextFile:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise FormatError(f"{path}: missing header line")
    try:
        header = json.loads(lines[0][2:])
        rows = [[float(v) for v in line.split(",")[1:]] for line in lines[2:] if line]
    except (json.JSONDecodeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    if any(len(r) != header.get("M") for r in rows):
        raise FormatError(f"{path}: row length does not match M")
    return CiphertextFile(header, np.array(rows, dtype=float))
