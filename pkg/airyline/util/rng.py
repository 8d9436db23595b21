from dataclasses import dataclass, field

import numpy

from airyline.errors import DomainError

_UINT64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream identified by ``(seed, stream)``.

    Equal identifiers give identical sample sequences; distinct stream ids
    under one seed are statistically independent (``numpy.random.SeedSequence``
    spawn keys).

    >>> rng = RngStream(42, 0)
    >>> rng.generator.standard_normal()
    """

    seed: int
    stream: int = 0
    generator: numpy.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not isinstance(value, (int, numpy.integer)) or not 0 <= value < _UINT64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")
        sequence = numpy.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        object.__setattr__(self, "generator", numpy.random.Generator(numpy.random.PCG64(sequence)))

    def child(self, index: int) -> "RngStream":
        """
        A fresh stream derived from this one, used to hand independent chains
        their own randomness in a fixed order.
        """
        return RngStream(self.seed, (self.stream * 1_000_003 + index + 1) % _UINT64)

    def fresh(self) -> "RngStream":
        """The same stream rewound to its first draw."""
        return RngStream(self.seed, self.stream)
