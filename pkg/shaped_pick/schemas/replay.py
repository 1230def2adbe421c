from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class RelabelStrategy(BaseModel):
    """Hindsight goal selection: which achieved goals replace the target."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["future", "final", "episode"] = "future"
    k: int = Field(4, ge=0)


__all__ = ["RelabelStrategy"]
