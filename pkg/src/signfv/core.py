"""Shared sign types, bit packing and seeded random streams."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from . import kernels

PLUS = 1
MINUS = -1


def sign_of(x: float) -> int:
    """Sign of a finite real; zero maps to +1."""
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"sign_of requires a finite value, got {x!r}")
    return MINUS if x < 0 else PLUS


def signs(values) -> np.ndarray:
    """Vectorised :func:`sign_of` returning an int8 array of +/-1."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("signs requires finite values")
    return np.where(values < 0, MINUS, PLUS).astype(np.int8)


def as_signs(values) -> np.ndarray:
    """Validate a sequence of +/-1 and return it as int8."""
    arr = np.asarray(values)
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise ValueError("sign sequences may only contain +1 and -1")
    return arr.astype(np.int8)


@dataclass(frozen=True)
class SignVector:
    """N signs stored one bit per coordinate (bit set means +1)."""

    length: int
    bits: bytes

    def unpack(self) -> np.ndarray:
        raw = np.frombuffer(self.bits, dtype=np.uint8)
        b = np.unpackbits(raw, count=self.length)
        return (2 * b.astype(np.int8) - 1).astype(np.int8)

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.bits, dtype=np.uint8)

    @property
    def nbits(self) -> int:
        return self.length

    def __len__(self) -> int:
        return self.length


def pack(values) -> SignVector:
    arr = as_signs(values).ravel()
    if arr.size == 0:
        raise ValueError("cannot pack an empty sign sequence")
    return SignVector(int(arr.size), np.packbits(arr > 0).tobytes())


def unpack(vec: SignVector) -> np.ndarray:
    return vec.unpack()


def sign_word(values, workers: int | None = None) -> np.ndarray:
    """A received repetition codeword: one sign per worker."""
    word = as_signs(values).ravel()
    if word.size == 0:
        raise ValueError("a sign word needs at least one worker")
    if workers is not None and word.size != workers:
        raise ValueError(f"word has {word.size} signs, expected {workers}")
    return word


def hamming_distance(a: SignVector, b: SignVector) -> int:
    """Number of coordinates where two packed sign vectors disagree."""
    if a.length != b.length:
        raise ValueError("sign vectors differ in length")
    return kernels.hamming(a.as_array(), b.as_array())


_PURPOSES: dict[str, int] = {}


def _purpose_code(purpose: str) -> int:
    code = _PURPOSES.get(purpose)
    if code is None:
        code = zlib.crc32(purpose.encode("utf-8"))
        _PURPOSES[purpose] = code
    return code


class RngStream:
    """Counter-based generator keyed by ``(seed, purpose, worker, round)``.

    Distinct keys give independent Philox streams, so adding a new consumer
    never shifts the draws of an existing one.
    """

    __slots__ = ("seed", "key", "_gen")

    def __init__(self, seed: int, purpose: str, worker: int = 0, round: int = 0):
        self.seed = int(seed)
        self.key = (purpose, int(worker), int(round))
        ss = np.random.SeedSequence(
            self.seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(_purpose_code(purpose), int(worker), int(round)),
        )
        self._gen = np.random.Generator(np.random.Philox(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)

    def permutation(self, x):
        return self._gen.permutation(x)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"
