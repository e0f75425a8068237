import json
import math
from typing import Any, Iterable, Optional

import numpy as np
from Crypto.Hash import SHA256

from pymaui.exceptions import ConfigError

# bytes read per update when hashing files
HASH_BLOCK_SIZE = 1 << 20


def sha256_file(path) -> str:
    """
    Checksum of a file's contents
    :param path:
    :return: hex digest
    """
    digest = SHA256.new()

    with open(path, "rb") as handle:
        while True:
            block = handle.read(HASH_BLOCK_SIZE)
            if not block:
                break
            digest.update(block)

    return digest.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return SHA256.new(data).hexdigest()


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def make_rng(seed: Optional[int]) -> np.random.Generator:
    if seed is None:
        raise ConfigError("a seed is required for reproducible sampling")
    return np.random.default_rng(int(seed))


def unit(vector: np.ndarray) -> np.ndarray:
    return vector / np.linalg.norm(vector)


def check_keys(
    mapping: Any, allowed: Iterable[str], path: str, required=()
) -> None:
    """
    Reject config objects with unknown or missing keys.

    :param path: dotted location of ``mapping`` used in error messages
    """
    if not isinstance(mapping, dict):
        raise ConfigError("%s must be an object" % path)

    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError("unknown key %s.%s" % (path, unknown[0]))

    for key in required:
        if key not in mapping:
            raise ConfigError("missing key %s.%s" % (path, key))


def check_int(value: Any, path: str, minimum: Optional[int] = None) -> int:
    """
    JSON integer at ``path``; booleans and floats are rejected.

    :raises ConfigError:
    """
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("%s must be an integer, got %r" % (path, value))
    if minimum is not None and value < minimum:
        raise ConfigError("%s must be at least %d, got %r"
                          % (path, minimum, value))
    return value


def check_real(value: Any, path: str) -> float:
    """
    Finite JSON number at ``path``.

    :raises ConfigError:
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)) or (
        not math.isfinite(value)
    ):
        raise ConfigError("%s must be a number, got %r" % (path, value))
    return float(value)
