"""Binary tensor container used for model checkpoints and adversarial sets.

Layout (all integers little-endian):

    "CCKD"                      4 magic bytes
    version                     u32 (currently 1)
    tensor count                u32
    per tensor:
        name length             u32
        name                    UTF-8 bytes
        rank                    u32
        extents                 u32 each
        payload                 float64 little-endian, row-major
    checksum                    u64: sum of all payload bytes mod 2^64

Tensors are written in sorted name order so identical contents always produce
identical bytes. Strings (architecture names, provenance ids) are stored as
float64 codepoint tensors under ``meta/`` names, keeping everything inside
the one format.
"""

import struct

import numpy as np

from .adversarial import AdversarialSet
from .errors import (
    CheckpointChecksumError,
    CheckpointError,
    CheckpointMagicError,
    CheckpointVersionError,
    DataIOError,
)
from .nn.network import Network, build_network

MAGIC = b"CCKD"
VERSION = 1
_U64_MASK = (1 << 64) - 1


def _encode_text(s: str) -> np.ndarray:
    return np.array([float(ord(c)) for c in s], dtype=np.float64)


def _decode_text(arr: np.ndarray) -> str:
    return "".join(chr(int(v)) for v in np.asarray(arr).ravel())


def _byte_sum(payload: bytes) -> int:
    return int(np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64))


def save_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    checksum = 0
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", VERSION, len(tensors))
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
        name_bytes = name.encode("utf-8")
        blob += struct.pack("<I", len(name_bytes))
        blob += name_bytes
        blob += struct.pack("<I", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape)
        payload = arr.astype("<f8").tobytes()
        blob += payload
        checksum = (checksum + _byte_sum(payload)) & _U64_MASK
    blob += struct.pack("<Q", checksum)
    with open(path, "wb") as f:
        f.write(blob)


class _Reader:
    def __init__(self, path):
        try:
            with open(path, "rb") as f:
                self.data = f.read()
        except OSError as exc:
            raise DataIOError(f"cannot read checkpoint {path}: {exc}") from None
        self.pos = 0
        self.path = path

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(f"{self.path}: truncated container")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]


def load_tensors(path) -> dict[str, np.ndarray]:
    r = _Reader(path)
    if r.read(4) != MAGIC:
        raise CheckpointMagicError(f"{path}: bad magic bytes")
    version = r.u32()
    if version != VERSION:
        raise CheckpointVersionError(f"{path}: unsupported container version {version}")
    count = r.u32()
    tensors: dict[str, np.ndarray] = {}
    checksum = 0
    for _ in range(count):
        name = r.read(r.u32()).decode("utf-8")
        rank = r.u32()
        shape = tuple(r.u32() for _ in range(rank))
        payload = r.read(int(np.prod(shape, dtype=np.int64)) * 8)
        checksum = (checksum + _byte_sum(payload)) & _U64_MASK
        tensors[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
    stored = struct.unpack("<Q", r.read(8))[0]
    if stored != checksum:
        raise CheckpointChecksumError(f"{path}: payload checksum mismatch")
    return tensors


# -- networks -----------------------------------------------------------------


def save_network(path, net: Network, regime: str = "") -> None:
    if not net.architecture:
        raise CheckpointError("only networks built from a named architecture can be checkpointed")
    tensors: dict[str, np.ndarray] = {
        "meta/architecture": _encode_text(net.architecture),
        "meta/role": _encode_text(net.role),
        "meta/regime": _encode_text(regime),
        "meta/seed": np.array([float(net.seed)]),
    }
    for name, param in zip(net.parameter_names(), net.parameters()):
        tensors[name] = param
    save_tensors(path, tensors)


def load_network(path) -> Network:
    tensors = load_tensors(path)
    try:
        architecture = _decode_text(tensors["meta/architecture"])
        role = _decode_text(tensors["meta/role"])
        seed = int(tensors["meta/seed"][0])
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing metadata tensor {exc}") from None
    if not architecture:
        raise CheckpointError(f"{path}: checkpoint does not name an architecture")
    net = build_network(architecture, role=role, seed=seed)
    net.trained_regime = _decode_text(tensors.get("meta/regime", np.array([])))
    for name, param in zip(net.parameter_names(), net.parameters()):
        if name not in tensors:
            raise CheckpointError(f"{path}: missing parameter tensor {name!r}")
        stored = tensors[name]
        if stored.shape != param.shape:
            raise CheckpointError(
                f"{path}: tensor {name!r} has shape {stored.shape}, expected {param.shape}"
            )
        param[...] = stored
    return net


def checkpoint_architecture(path) -> str:
    return _decode_text(load_tensors(path)["meta/architecture"])


# -- adversarial sets ---------------------------------------------------------


def save_adversarial_set(path, adv: AdversarialSet) -> None:
    save_tensors(
        path,
        {
            "originals": adv.originals,
            "perturbed": adv.perturbed,
            "labels": adv.labels.astype(np.float64),
            "iterations_used": adv.iterations_used.astype(np.float64),
            "success": adv.success.astype(np.float64),
            "epsilon": np.array([adv.epsilon]),
            "meta/source_model_id": _encode_text(adv.source_model_id),
        },
    )


def load_adversarial_set(path) -> AdversarialSet:
    t = load_tensors(path)
    try:
        return AdversarialSet(
            originals=t["originals"],
            perturbed=t["perturbed"],
            labels=t["labels"].astype(np.int64),
            source_model_id=_decode_text(t["meta/source_model_id"]),
            epsilon=float(t["epsilon"][0]),
            iterations_used=t["iterations_used"].astype(np.int64),
            success=t["success"] != 0.0,
        )
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing adversarial-set tensor {exc}") from None
