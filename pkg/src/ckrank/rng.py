"""Counter-based random numbers with a fully documented stream definition.

Every uniform is a pure function of a 64-bit ``key`` and a counter ``i >= 0``::

    bits(key, i) = mix64(key + (i + 1) * GAMMA mod 2**64)
    u(key, i)    = (bits >> 11) * 2**-53                   # in [0, 1)

where ``GAMMA = 0x9E3779B97F4A7C15`` and ``mix64`` is the splitmix64
finalizer::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

Standard normal number ``j`` of a stream comes from the Box-Muller transform
of the uniform pair ``(u(key, 2m), u(key, 2m + 1))`` with ``m = j // 2``::

    radius = sqrt(-2 log(1 - u(key, 2m)))
    angle  = 2 pi u(key, 2m + 1)
    normal[2m] = radius cos(angle),  normal[2m + 1] = radius sin(angle)

Keys for sub-streams are derived with :func:`derive_key`::

    h = mix64(seed + GAMMA)
    for part in parts:
        h = mix64((h ^ part) + GAMMA)

All arithmetic is modulo 2**64. Because draws are addressed by counter,
any slice of any stream can be regenerated independently, which is what
makes the parallel Monte Carlo results independent of the worker count.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

_GAMMA_U = np.uint64(GAMMA)
_C1_U = np.uint64(_C1)
_C2_U = np.uint64(_C2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _C1_U
    z = (z ^ (z >> _S27)) * _C2_U
    return z ^ (z >> _S31)


def derive_key(seed: int, *parts: int) -> int:
    """Derive a stream key from a base seed and integer coordinates."""
    h = mix64((seed & MASK64) + GAMMA)
    for part in parts:
        h = mix64(((h ^ (int(part) & MASK64)) + GAMMA) & MASK64)
    return h


def uniforms(keys, start: int, count: int) -> np.ndarray:
    """Uniforms ``u(key, start) .. u(key, start + count - 1)`` for each key.

    Returns an array of shape ``(len(keys), count)``.
    """
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    counters = (np.arange(start + 1, start + count + 1, dtype=np.uint64)) * _GAMMA_U
    bits = _mix64_array(keys[:, None] + counters[None, :])
    return (bits >> _S11).astype(np.float64) * (2.0 ** -53)


def normals(keys, start: int, count: int) -> np.ndarray:
    """Standard normals ``start .. start + count - 1`` of each keyed stream."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    first_pair = start // 2
    n_pairs = (start + count + 1) // 2 - first_pair
    u = uniforms(keys, 2 * first_pair, 2 * n_pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0::2]))
    angle = (2.0 * np.pi) * u[:, 1::2]
    out = np.empty((keys.shape[0], 2 * n_pairs))
    np.multiply(radius, np.cos(angle), out=out[:, 0::2])
    np.multiply(radius, np.sin(angle), out=out[:, 1::2])
    offset = start - 2 * first_pair
    return out[:, offset:offset + count]


class RngState:
    """A single keyed stream with a read position (in normals).

    Not safe to share between concurrent callers; derive one state per
    worker or per replication instead.
    """

    def __init__(self, seed: int, *parts: int):
        self.seed = int(seed) & MASK64
        self.key = derive_key(self.seed, *parts)
        self.position = 0

    def standard_normal(self, shape) -> np.ndarray:
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        count = int(np.prod(shape)) if shape else 1
        out = normals([self.key], self.position, count)[0]
        self.position += count
        return out.reshape(shape)

    def spawn(self, *parts: int) -> RngState:
        """Independent child stream addressed by ``parts``."""
        child = RngState.__new__(RngState)
        child.seed = self.seed
        child.key = derive_key(self.key, *parts)
        child.position = 0
        return child

    def __repr__(self):
        return f"RngState(seed={self.seed}, key={self.key:#018x}, position={self.position})"
