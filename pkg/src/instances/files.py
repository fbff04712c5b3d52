"""JSON instance files.

Format: ``{"weight_limit": number, "items": [{"id", "value", "weight"}, ...]}``
with ids strictly increasing. Floats are written with Python's shortest
round-trip repr, so reading a written file gives back the same doubles.
"""

import json
import logging
from pathlib import Path
from typing import Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core.errors import DomainError, InstanceFormatError
from ..core.model import Instance, Item
from ..utils.io import save_json

logger = logging.getLogger(__name__)


class ItemRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    value: float = Field(ge=0.0, allow_inf_nan=False)
    weight: float = Field(gt=0.0, allow_inf_nan=False)


class InstanceFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weight_limit: float = Field(gt=0.0, allow_inf_nan=False)
    items: list[ItemRecord]

    @model_validator(mode="after")
    def check_ids(self) -> "InstanceFile":
        seen: set[int] = set()
        previous: int | None = None
        for item in self.items:
            if item.id in seen:
                raise ValueError(f"duplicate item id {item.id}")
            if previous is not None and item.id < previous:
                raise ValueError(f"ids must increase, got {item.id} after {previous}")
            seen.add(item.id)
            previous = item.id
        return self

    def to_instance(self) -> Instance:
        items = tuple(Item(r.id, r.value, r.weight) for r in self.items)
        return Instance(items, self.weight_limit)

    @classmethod
    def from_instance(cls, instance: Instance) -> "InstanceFile":
        return cls(
            weight_limit=instance.weight_limit,
            items=[
                ItemRecord(id=item.id, value=item.value, weight=item.weight)
                for item in instance
            ],
        )


def _location(loc: tuple[Union[int, str], ...]) -> str:
    """``("items", 3, "weight")`` -> ``items[3].weight``."""
    text = ""
    for part in loc:
        text += f"[{part}]" if isinstance(part, int) else (f".{part}" if text else part)
    return text or "<root>"


def parse_instance(text: str, source: str = "<string>") -> Instance:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e

    try:
        record = InstanceFile.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{_location(error['loc'])}: {error['msg']}" for error in e.errors()
        )
        raise InstanceFormatError(f"{source}: {problems}") from e

    try:
        return record.to_instance()
    except DomainError as e:
        raise InstanceFormatError(f"{source}: {e}") from e


def read_instance(path: Union[str, Path]) -> Instance:
    """Load and validate an instance file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceFormatError(f"{path}: cannot read file ({e.strerror})") from e
    instance = parse_instance(text, str(path))
    logger.debug("Read %d items from %s", instance.n, path)
    return instance


def instance_to_dict(instance: Instance) -> dict[str, object]:
    return InstanceFile.from_instance(instance).model_dump()


def write_instance(instance: Instance, path: Union[str, Path]) -> Path:
    """Write an instance as canonical JSON (items sorted by id)."""
    return save_json(instance_to_dict(instance), path)
