"""
Versioned model files with a checksummed binary payload.
File: src/services/plda/storage.py

Layout: one JSON manifest line, a newline, then little-endian float64
matrices in row-major order: mu, F, sigma_w, sigma_b and, when present,
the LDA mean and projection.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from cryptography.hazmat.primitives import hashes

from core.exceptions import ChecksumError, InvariantError, ModelFormatError, UnsupportedVersionError
from core.logging import get_logger
from services.preprocess.lda import LdaTransform
from .models import PldaModel

logger = get_logger(__name__)

FORMAT_VERSION = 1
PAYLOAD_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def _sha256(payload: bytes) -> str:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(payload)
    return "sha256:" + digest.finalize().hex()


def _payload(arrays: List[np.ndarray]) -> bytes:
    return b"".join(np.ascontiguousarray(a, dtype=PAYLOAD_DTYPE).tobytes(order="C") for a in arrays)


def save_model(
    model: PldaModel,
    lda: Optional[LdaTransform],
    path: PathLike,
    *,
    alpha: Optional[float] = None,
    length_norm: bool = True
) -> None:
    """
    Write a model (and optional LDA transform) to a file.

    Args:
        model: Trained model
        lda: LDA transform applied before the model, or None
        path: Output file
        alpha: Balance factor used in training, recorded in the manifest
        length_norm: Whether the backend length-normalizes its inputs
    """
    arrays = [model.mu, model.F, model.sigma_w, model.sigma_b]
    if lda is not None:
        if lda.out_dim != model.d:
            raise InvariantError(
                f"LDA output dimension {lda.out_dim} does not match model dimension {model.d}"
            )
        arrays += [lda.mean, lda.projection]
    payload = _payload(arrays)

    manifest = {
        "format_version": FORMAT_VERSION,
        "d": model.d,
        "r": model.r,
        "alpha": alpha,
        "has_lda": lda is not None,
        "lda_in_dim": lda.in_dim if lda is not None else None,
        "lda_out_dim": lda.out_dim if lda is not None else None,
        "length_norm": bool(length_norm),
        "payload_bytes": len(payload),
        "checksum": _sha256(payload),
    }
    header = json.dumps(manifest, sort_keys=True).encode("utf-8") + b"\n"
    try:
        Path(path).write_bytes(header + payload)
    except OSError as e:
        logger.error(f"Error writing model file {path}: {e}")
        raise
    logger.info(f"Saved model to {path}:\nd: {model.d}, r: {model.r}, lda: {lda is not None}")


def _split(path: PathLike) -> Tuple[Dict[str, Any], bytes]:
    data = Path(path).read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise ModelFormatError(f"{path}: missing manifest line")
    try:
        manifest = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path}: unreadable manifest: {e}") from None
    if not isinstance(manifest, dict):
        raise ModelFormatError(f"{path}: manifest is not an object")
    return manifest, data[newline + 1:]


def read_manifest(path: PathLike) -> Dict[str, Any]:
    """Return the manifest of a model file without checking the payload."""
    manifest, _ = _split(path)
    return manifest


def load_model(path: PathLike) -> Tuple[PldaModel, Optional[LdaTransform]]:
    """
    Read a model file written by save_model.

    Args:
        path: Model file

    Returns:
        Tuple[PldaModel, Optional[LdaTransform]]: Model and LDA transform (or None)

    Raises:
        UnsupportedVersionError: If format_version is not 1
        ChecksumError: If the payload is truncated or altered
        ModelFormatError: If the manifest is malformed
    """
    manifest, payload = _split(path)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: unsupported model format version {version!r} (expected {FORMAT_VERSION})"
        )
    if _sha256(payload) != manifest.get("checksum") or len(payload) != manifest.get("payload_bytes"):
        logger.error(f"Checksum mismatch in model file {path}")
        raise ChecksumError(f"{path}: payload does not match the manifest checksum")

    try:
        d = int(manifest["d"])
        r = int(manifest["r"])
        has_lda = bool(manifest["has_lda"])
        shapes = [(d,), (d, r), (d, d), (d, d)]
        if has_lda:
            in_dim = int(manifest["lda_in_dim"])
            shapes += [(in_dim,), (d, in_dim)]
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"{path}: incomplete manifest: {e}") from None

    values = np.frombuffer(payload, dtype=PAYLOAD_DTYPE)
    expected = sum(int(np.prod(shape)) for shape in shapes)
    if values.size != expected:
        raise ModelFormatError(f"{path}: payload holds {values.size} values, expected {expected}")

    arrays = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(values[offset:offset + size].reshape(shape).astype(np.float64))
        offset += size

    model = PldaModel(mu=arrays[0], F=arrays[1], sigma_w=arrays[2], sigma_b=arrays[3])
    lda = LdaTransform(mean=arrays[4], projection=arrays[5]) if has_lda else None
    logger.info(f"Loaded model from {path}:\nd: {d}, r: {r}, lda: {has_lda}")
    return model, lda
