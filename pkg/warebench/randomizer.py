"""Seeded random functions used by schema, data, workload and refresh generation"""

from __future__ import annotations

import logging
import string
from typing import TYPE_CHECKING, TypeVar

import numpy as np

from warebench.errors import DimensionExhaustedError, EmptyTableError, InvalidRangeError
from warebench.hashing import derive_seed
from warebench.utils import clamp, round_half_up

if TYPE_CHECKING:
    from collections.abc import Collection, Sequence

    T = TypeVar("T")

LOGGER = logging.getLogger(__name__)

DEFAULT_SIGMA_RATIO = 0.2
REFERENTIAL_SIZE = 1000
STRING_LENGTH = 20
ALPHABET = string.ascii_uppercase + string.digits
UINT64_MASK = 2**64 - 1


class StringReferential:
    """Precomputed pool of distinct fixed-size strings"""

    def __init__(self, pool: Sequence[str]) -> None:
        if not pool:
            raise ValueError("String referential can't be empty")
        for entry in pool:
            if len(entry) != STRING_LENGTH:
                raise ValueError(f"Referential entry must have {STRING_LENGTH} characters: {entry!r}")
        if len(set(pool)) != len(pool):
            raise ValueError("Referential entries must be distinct")
        self._pool = tuple(pool)

    @classmethod
    def generate(cls, generator: np.random.Generator, size: int = REFERENTIAL_SIZE) -> StringReferential:
        alphabet = np.array(list(ALPHABET))
        pool: dict[str, None] = {}
        while len(pool) < size:
            draws = generator.integers(0, len(alphabet), size=(size - len(pool), STRING_LENGTH))
            for row in alphabet[draws]:
                pool["".join(row)] = None
        return cls(list(pool)[:size])

    @property
    def pool(self) -> tuple[str, ...]:
        return self._pool

    @property
    def pool_size(self) -> int:
        return len(self._pool)

    def __getitem__(self, index: int) -> str:
        return self._pool[index]

    def __len__(self) -> int:
        return len(self._pool)


class SeededRng:
    """
    Single-owner random stream.

    The same seed and the same call sequence give the same outputs.
    Independent streams for separate purposes come from `spawn`.

    :param seed: master seed, any 64-bit integer
    :param sigma_ratio: Gaussian spread of `gauss_int` draws as a fraction of the mean
    """

    def __init__(
        self,
        seed: int,
        *,
        sigma_ratio: float = DEFAULT_SIGMA_RATIO,
        referential: StringReferential = None,
        referential_size: int = REFERENTIAL_SIZE,
    ) -> None:
        if sigma_ratio < 0:
            raise InvalidRangeError(f"sigma_ratio must be non-negative, got {sigma_ratio}")
        self._seed = seed & UINT64_MASK
        self._sigma_ratio = sigma_ratio
        self._generator = np.random.Generator(np.random.PCG64(self._seed))
        self._referential = referential
        self._referential_size = referential_size

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(seed={self._seed}, sigma_ratio={self._sigma_ratio})"

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def sigma_ratio(self) -> float:
        return self._sigma_ratio

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    @property
    def referential(self) -> StringReferential:
        if self._referential is None:
            referential_generator = np.random.Generator(np.random.PCG64(derive_seed(self._seed, "referential")))
            self._referential = StringReferential.generate(referential_generator, self._referential_size)
        return self._referential

    def spawn(self, purpose: str) -> SeededRng:
        """Independent stream for `purpose`; shares this stream's string referential"""
        return SeededRng(
            derive_seed(self._seed, purpose),
            sigma_ratio=self._sigma_ratio,
            referential=self.referential,
        )

    # Uniform draws

    def uniform_float(self, low: float, high: float) -> float:
        if low > high:
            raise InvalidRangeError(f"Invalid range: [{low}, {high})")
        if low == high:
            return low
        return float(self._generator.uniform(low, high))

    def uniform_floats(self, low: float, high: float, size: int) -> np.ndarray:
        if low > high:
            raise InvalidRangeError(f"Invalid range: [{low}, {high})")
        return self._generator.uniform(low, high, size=size)

    def uniform_int(self, low: int, high: int) -> int:
        """Uniform integer in `[low, high]`, both ends included"""
        if low > high:
            raise InvalidRangeError(f"Invalid range: [{low}, {high}]")
        return int(self._generator.integers(low, high, endpoint=True))

    def bernoulli(self, probability: float) -> bool:
        return bool(self._generator.random() < probability)

    # Gaussian draws

    def gaussian(self, mean: float, stdev: float) -> float:
        if stdev <= 0:
            return float(mean)
        return float(self._generator.normal(mean, stdev))

    def gauss_real(self, avg: float, low: float, high: float = np.inf) -> float:
        """Gaussian around `avg` with `sigma_ratio` spread, clamped into `[low, high]`"""
        return clamp(self.gaussian(avg, self._sigma_ratio * avg), low, high)

    def gauss_int(self, avg: float, low: int = 1, high: float = np.inf) -> int:
        """Rounded Gaussian count around `avg`, never below `low`"""
        return int(clamp(round_half_up(self.gaussian(avg, self._sigma_ratio * avg)), low, high))

    # Skewed picks

    def random_key(self, extension_size: int) -> int:
        """Key in `[1, extension_size]`, skewed towards the middle of the key range"""
        if extension_size < 1:
            raise EmptyTableError(f"Can't draw a key from an empty table (size={extension_size})")
        value = round_half_up(self._generator.normal(extension_size / 2, extension_size / 6))
        return int(clamp(value, 1, extension_size))

    def random_keys(self, extension_size: int, size: int) -> np.ndarray:
        if extension_size < 1:
            raise EmptyTableError(f"Can't draw a key from an empty table (size={extension_size})")
        values = np.floor(self._generator.normal(extension_size / 2, extension_size / 6, size=size) + 0.5)
        return np.clip(values, 1, extension_size).astype(np.int64)

    def skewed_pick(self, items: Sequence[T]) -> T:
        if not items:
            raise EmptyTableError("Can't pick from an empty sequence")
        return items[self.random_key(len(items)) - 1]

    def random_fact_table(self, fact_tables: Sequence[T]) -> T:
        return self.skewed_pick(fact_tables)

    def random_attribute(self, attributes: Sequence[T]) -> T:
        return self.skewed_pick(attributes)

    def random_measure(self, measures: Sequence[T]) -> T:
        return self.skewed_pick(measures)

    def random_dimension(self, dimensions: Sequence[int], attached: Collection[int] = ()) -> int:
        """Dimension among `dimensions` not yet in `attached`"""
        candidates = [index for index in dimensions if index not in attached]
        if not candidates:
            raise DimensionExhaustedError(f"All {len(dimensions)} dimensions are already attached")
        return self.skewed_pick(candidates)

    # Strings

    def random_string(self, attribute: str) -> str:
        referential = self.referential
        return f"{attribute}_{referential[self.random_key(referential.pool_size) - 1]}"

    def random_strings(self, attribute: str, size: int) -> list[str]:
        referential = self.referential
        indices = self.random_keys(referential.pool_size, size) - 1
        return [f"{attribute}_{referential[index]}" for index in indices.tolist()]
