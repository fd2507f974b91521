"""Deterministic 64-bit PRNG used for shuffling and replacement sampling.

Everything downstream that needs randomness (bag shuffles, UNK
back-substitution) draws from a splitmix64 stream so that runs are exactly
reproducible across platforms and Python versions.  numpy's generators are
deliberately not used here: their bit streams are not part of our file
contract.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """FNV-1a hash of `data`, used to fold string ids into seeds."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


class SplitMix64:
    """The splitmix64 generator (Steele, Lea & Flood's mixing constants).

    next() returns uniform integers in [0, 2**64).  State advances by a
    fixed additive constant, then the counter is mixed; equal seeds give
    equal streams.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randint(self, bound: int) -> int:
        # modulo bias is negligible for bound << 2**64
        return self.next() % bound


def derive_seed(seed: int, key: str) -> int:
    """Combine a run-level integer seed with a string key (e.g. instance id)."""
    return (fnv1a64(key.encode("utf-8")) ^ (seed & _MASK64)) & _MASK64


def shuffled_indices(n: int, stream: SplitMix64) -> list[int]:
    """Fisher-Yates permutation of range(n) driven by `stream`."""
    idx = list(range(n))
    for i in range(n - 1, 0, -1):
        j = stream.randint(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx
