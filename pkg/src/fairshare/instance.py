"""Instance documents: JSON in, validated :class:`Instance` out (and back)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .errors import DomainError, FairShareError, InstanceFormatError, MalformedValuationError
from .model import (
    Additive,
    Nonempty,
    Table,
    Threshold,
    TwoBlock,
    UnitDemand,
    Valuation,
    ZeroOneValuation,
    is_monotone,
    mask_of,
    members,
)
from .shares import ShareSpec


@dataclass(frozen=True)
class Instance:
    n: int
    m: int
    valuations: tuple[Valuation, ...]
    share: ShareSpec

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DomainError(f"an instance needs at least 2 agents, got {self.n}")
        if len(self.valuations) != self.n:
            raise DomainError(f"expected {self.n} valuations, got {len(self.valuations)}")
        for i, v in enumerate(self.valuations, 1):
            if v.m != self.m:
                raise DomainError(f"valuation {i} is defined on {v.m} goods, instance has {self.m}")


def subset_key(mask: int) -> str:
    return ",".join(str(g) for g in members(mask))


def parse_subset_key(key: str) -> int:
    key = key.strip()
    if not key:
        return 0
    try:
        goods = [int(tok) for tok in key.split(",")]
    except ValueError:
        raise InstanceFormatError(f"bad subset key {key!r}") from None
    if len(set(goods)) != len(goods):
        raise InstanceFormatError(f"repeated good in subset key {key!r}")
    try:
        return mask_of(goods)
    except DomainError as exc:
        raise InstanceFormatError(str(exc)) from None


def _require(doc: dict, key: str, where: str) -> Any:
    if key not in doc:
        raise InstanceFormatError(f"{where}: missing field {key!r}")
    return doc[key]


def _int_field(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"{where} must be an integer, got {value!r}")
    return value


def _goods_list(value: Any, where: str, m: int) -> int:
    if not isinstance(value, list):
        raise InstanceFormatError(f"{where} must be a list of goods")
    goods = [_int_field(g, where) for g in value]
    if any(not 1 <= g <= m for g in goods):
        raise MalformedValuationError(f"{where} mentions goods outside [1, {m}]")
    return mask_of(goods)


def valuation_from_json(doc: Any, m: int, where: str = "valuation") -> Valuation:
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{where} must be an object")
    kind = _require(doc, "kind", where)
    if kind in ("additive", "unit_demand"):
        weights = _require(doc, "weights", where)
        if not isinstance(weights, list) or not all(
            isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
        ):
            raise InstanceFormatError(f"{where}: weights must be a list of numbers")
        cls = Additive if kind == "additive" else UnitDemand
        return cls(m=m, weights=tuple(weights))
    if kind == "threshold":
        return Threshold(m=m, T=_int_field(_require(doc, "T", where), f"{where}: T"))
    if kind == "two_block":
        red = _goods_list(_require(doc, "red", where), f"{where}: red", m)
        blue = _goods_list(_require(doc, "blue", where), f"{where}: blue", m)
        return TwoBlock(m=m, red=red, blue=blue)
    if kind == "nonempty":
        return Nonempty(m=m)
    if kind == "table":
        values = _require(doc, "values", where)
        if not isinstance(values, dict):
            raise InstanceFormatError(f"{where}: values must be an object keyed by subsets")
        table = {}
        for key, x in values.items():
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise InstanceFormatError(f"{where}: value for {key!r} is not a number")
            mask = parse_subset_key(key)
            if mask in table:
                raise InstanceFormatError(f"{where}: subset {key!r} listed twice")
            table[mask] = x
        v = Table(m=m, values=table)
        if not is_monotone(v):
            raise MalformedValuationError(f"{where}: table is not monotone with v(empty) = 0")
        return v
    raise InstanceFormatError(f"{where}: unknown valuation kind {kind!r}")


def valuation_to_json(v: Valuation) -> dict:
    if isinstance(v, (Additive, UnitDemand)):
        return {"kind": v.kind, "weights": list(v.weights)}
    if isinstance(v, Threshold):
        return {"kind": "threshold", "T": v.T}
    if isinstance(v, TwoBlock):
        return {"kind": "two_block", "red": list(members(v.red)), "blue": list(members(v.blue))}
    if isinstance(v, Nonempty):
        return {"kind": "nonempty"}
    if isinstance(v, (Table, ZeroOneValuation)) or v.m <= 20:
        table = v.table()
        return {"kind": "table", "values": {subset_key(s): float(table[s]) for s in range(1 << v.m)}}
    raise MalformedValuationError(f"kind {v.kind!r} has no JSON form")


def share_from_json(doc: Any) -> ShareSpec:
    if not isinstance(doc, dict):
        raise InstanceFormatError("share must be an object")
    kind = _require(doc, "kind", "share")
    try:
        if kind == "thinned_quantile":
            return ShareSpec.thinned_quantile(_require(doc, "c", "share"), _require(doc, "q", "share"))
        if kind == "quantile":
            return ShareSpec.quantile(_require(doc, "q", "share"))
        if kind in ("proportional", "mms", "rmms"):
            return ShareSpec(kind)
    except TypeError:
        raise InstanceFormatError("share parameters must be numbers") from None
    raise InstanceFormatError(f"unknown share kind {kind!r}")


def instance_from_json(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance must be a JSON object")
    n = _int_field(_require(doc, "agents", "instance"), "agents")
    m = _int_field(_require(doc, "goods", "instance"), "goods")
    if n < 2:
        raise DomainError(f"an instance needs at least 2 agents, got {n}")
    vals = _require(doc, "valuations", "instance")
    if not isinstance(vals, list):
        raise InstanceFormatError("valuations must be a list")
    if len(vals) != n:
        raise DomainError(f"expected {n} valuations, got {len(vals)}")
    valuations = tuple(valuation_from_json(d, m, f"valuation {i}") for i, d in enumerate(vals, 1))
    return Instance(n=n, m=m, valuations=valuations, share=share_from_json(_require(doc, "share", "instance")))


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance document (see README for the format)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from None
    try:
        return instance_from_json(doc)
    except FairShareError:
        raise
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(str(exc)) from None


def instance_to_json(inst: Instance) -> dict:
    return {
        "agents": inst.n,
        "goods": inst.m,
        "valuations": [valuation_to_json(v) for v in inst.valuations],
        "share": inst.share.to_json(),
    }


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst), indent=2)
