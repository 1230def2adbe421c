from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

STD_FLOOR = 1e-2


@dataclass(slots=True)
class RunningNormalizer:
    """Per-dimension running moments with clipped standardization.

    Before any data arrives the mean is 0 and the std is 1, so normalization is
    the identity up to clipping.
    """

    size: int
    clip_range: float = 5.0
    total: NDArray[np.float64] = field(init=False)
    total_sq: NDArray[np.float64] = field(init=False)
    count: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.total = np.zeros(self.size)
        self.total_sq = np.zeros(self.size)

    def update(self, values: ArrayLike) -> None:
        batch = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if batch.shape[1] != self.size:
            raise ValueError(f"expected width {self.size}, got {batch.shape[1]}")
        self.total = self.total + batch.sum(axis=0)
        self.total_sq = self.total_sq + (batch**2).sum(axis=0)
        self.count += batch.shape[0]

    @property
    def mean(self) -> NDArray[np.float64]:
        if self.count == 0:
            return np.zeros(self.size)
        return self.total / self.count

    @property
    def std(self) -> NDArray[np.float64]:
        if self.count == 0:
            return np.ones(self.size)
        variance = np.maximum(self.total_sq / self.count - self.mean**2, 0.0)
        return np.maximum(np.sqrt(variance), STD_FLOOR)

    def normalize(self, values: ArrayLike) -> NDArray[np.float64]:
        scaled = (np.asarray(values, dtype=np.float64) - self.mean) / self.std
        return np.clip(scaled, -self.clip_range, self.clip_range)

    def to_dict(self) -> dict[str, Any]:
        return {
            "size": self.size,
            "clip_range": self.clip_range,
            "count": self.count,
            "total": self.total.tolist(),
            "total_sq": self.total_sq.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> RunningNormalizer:
        normalizer = cls(size=int(payload["size"]), clip_range=float(payload["clip_range"]))
        normalizer.total = np.array(payload["total"], dtype=np.float64)
        normalizer.total_sq = np.array(payload["total_sq"], dtype=np.float64)
        normalizer.count = int(payload["count"])
        if normalizer.total.shape != (normalizer.size,):
            raise ValueError("normalizer moments do not match its size")
        return normalizer

    def copy(self) -> RunningNormalizer:
        return RunningNormalizer.from_dict(self.to_dict())


@dataclass(slots=True)
class Normalizer:
    """Separate running normalizers for observation features and goals."""

    features: RunningNormalizer
    goals: RunningNormalizer

    @classmethod
    def create(cls, feature_size: int, goal_size: int, clip_range: float = 5.0) -> Normalizer:
        return cls(
            features=RunningNormalizer(feature_size, clip_range),
            goals=RunningNormalizer(goal_size, clip_range),
        )

    def update(self, features: ArrayLike, goals: ArrayLike) -> None:
        self.features.update(features)
        self.goals.update(goals)

    def inputs(self, features: ArrayLike, goals: ArrayLike) -> NDArray[np.float64]:
        """Normalized ``features || goal`` rows (or a single row)."""

        return np.concatenate(
            [self.features.normalize(features), self.goals.normalize(goals)], axis=-1
        )

    def to_dict(self) -> dict[str, Any]:
        return {"features": self.features.to_dict(), "goals": self.goals.to_dict()}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> Normalizer:
        return cls(
            features=RunningNormalizer.from_dict(payload["features"]),
            goals=RunningNormalizer.from_dict(payload["goals"]),
        )

    def copy(self) -> Normalizer:
        return Normalizer(features=self.features.copy(), goals=self.goals.copy())


__all__ = ["Normalizer", "RunningNormalizer", "STD_FLOOR"]
