"""Seedable index-sequence generators: IID, per-epoch permutation, cyclic.

Randomness contract: all index streams come from SplitMix64, a 64-bit
generator whose state advances by the golden-ratio increment and whose
output is the published two-round xor-multiply finalizer.  It is pure
integer arithmetic, so sequences are identical on every platform.
Per-context seeds are derived by folding (base_seed, stream ids) through
the same mixing function; see `derive_seed`.
"""

import enum

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    """SplitMix64 output finalizer: two xor-shift-multiply rounds."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed, *stream):
    """Fold integer or string stream ids into base_seed via mix64.

    Deterministic and order-sensitive, so distinct contexts (e.g. cell
    coordinates in a sweep) get independent-looking seeds.
    """
    z = mix64(base_seed & _MASK64)
    for part in stream:
        if isinstance(part, str):
            data = part.encode()
            z = mix64(z ^ len(data))
            for k in range(0, len(data), 8):
                z = mix64(z ^ int.from_bytes(data[k:k + 8], "little"))
        else:
            z = mix64(z ^ (int(part) & _MASK64))
    return z


class SplitMix64:
    """The 64-bit generator behind every sampler in this package."""

    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & _MASK64

    def next_uint64(self):
        self.state = (self.state + _GOLDEN) & _MASK64
        return mix64(self.state)

    def next_below(self, n):
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_uint64()
            if r < limit:
                return r % n

    def next_float(self):
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * (2.0 ** -53)

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle of a mutable sequence."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, m):
        """A uniform random permutation of range(m) as a list."""
        order = list(range(m))
        self.shuffle(order)
        return order


class SamplerKind(enum.Enum):
    IID = "iid"
    PERM = "perm"
    CYCLIC = "cyclic"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError("unknown sampler kind %r (expected iid, perm or cyclic)" % (name,))


class IndexSampler:
    """Draws example indices from [0, m) in one of three orders.

    IID draws with replacement; PERM walks a fresh uniform permutation
    each epoch; CYCLIC walks 0..m-1 repeatedly and ignores the seed.
    One `next_index` call corresponds to one stochastic gradient
    evaluation of the iteration budget.
    """

    def __init__(self, kind, m, seed):
        if m < 1:
            raise ValueError("m must be at least 1")
        self.kind = SamplerKind.parse(kind)
        self.m = m
        self.rng = SplitMix64(seed)
        self.position = 0
        self.epoch = 0
        self.count = 0
        self.order = self.rng.permutation(m) if self.kind is SamplerKind.PERM else None

    def next_index(self):
        kind = self.kind
        if kind is SamplerKind.IID:
            idx = self.rng.next_below(self.m)
        elif kind is SamplerKind.PERM:
            idx = self.order[self.position]
        else:
            idx = self.position
        self.count += 1
        self.position += 1
        if self.position == self.m:
            self.position = 0
            self.epoch += 1
            if kind is SamplerKind.PERM:
                self.order = self.rng.permutation(self.m)
        return idx

    def take(self, k):
        """The next k indices as a list (same stream as k next_index calls)."""
        return [self.next_index() for _ in range(k)]
