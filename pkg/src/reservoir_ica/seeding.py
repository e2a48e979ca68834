"""Deterministic seed derivation for independent random streams."""

import zlib

import numpy as np

from reservoir_ica.errors import ConfigurationError


def derive_seed(*keys: int | str) -> int:
    """
    Derive a 32-bit seed from a tuple of integer/string keys.

    Strings are hashed with CRC32 so the result is stable across processes and
    interpreter runs (unlike hash()).

    Raises:
        ConfigurationError: If an integer key is negative
    """
    entropy: list[int] = []
    for key in keys:
        if isinstance(key, str):
            entropy.append(zlib.crc32(key.encode("utf-8")))
        elif key < 0:
            raise ConfigurationError(f"Seeds must be non-negative, got {key}")
        else:
            entropy.append(int(key))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
