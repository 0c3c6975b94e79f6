"""The JSON instance file format.

An instance file carries a ground set, one function section, one constraint
section, and a flags section.  Rationals are written as "p/q" strings (bare
integers are also accepted); floating literals and unknown fields are
rejected with the offending field named.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import hardness
from .constraints import (
    Matroid, b_matching_family, k_exchange_explicit_family, k_intersection_family,
)
from .core import (
    FeasibilityFamily, GroundSet, SubmodularOracle, coverage_function,
    directed_cut_function, explicit_table_function, format_rational,
    modular_function, parse_rational,
)


class InstanceFormatError(ValueError):
    """Malformed instance file; the message names the field at fault."""


@dataclass
class Instance:
    ground: GroundSet
    oracle: SubmodularOracle
    family: FeasibilityFamily
    monotone: bool
    down_closed: bool
    hardness_instance: Optional[hardness.HardnessInstance] = None


def _expect_keys(obj: dict, required: set[str], optional: set[str], where: str):
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise InstanceFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InstanceFormatError(f"{where}: missing field(s) {sorted(missing)}")


def _rational(value, where: str) -> Fraction:
    try:
        return parse_rational(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"{where}: {exc}") from exc


def _build_function(ground: GroundSet, section: dict) -> SubmodularOracle:
    _expect_keys(section, {"kind"}, {"weights", "offset", "covers", "item_weights",
                                     "arcs", "values", "monotone", "submodular",
                                     "sqrt_n"}, "function")
    kind = section["kind"]
    if kind == "modular":
        _expect_keys(section, {"kind", "weights"}, {"offset"}, "function(modular)")
        weights = {e: _rational(v, f"function.weights[{e}]")
                   for e, v in section["weights"].items()}
        unknown = set(weights) - set(ground.elements)
        if unknown:
            raise InstanceFormatError(f"function.weights: unknown elements {sorted(unknown)}")
        offset = _rational(section.get("offset", 0), "function.offset")
        return modular_function(ground, weights, offset)
    if kind == "coverage":
        _expect_keys(section, {"kind", "covers"}, {"item_weights"}, "function(coverage)")
        covers = section["covers"]
        unknown = set(covers) - set(ground.elements)
        if unknown:
            raise InstanceFormatError(f"function.covers: unknown elements {sorted(unknown)}")
        item_weights = None
        if "item_weights" in section:
            item_weights = {it: _rational(v, f"function.item_weights[{it}]")
                            for it, v in section["item_weights"].items()}
        return coverage_function(ground, {e: tuple(v) for e, v in covers.items()},
                                 item_weights)
    if kind == "directed_cut":
        _expect_keys(section, {"kind", "arcs"}, set(), "function(directed_cut)")
        arcs = []
        for k, arc in enumerate(section["arcs"]):
            if len(arc) != 3:
                raise InstanceFormatError(f"function.arcs[{k}]: expected [tail, head, weight]")
            u, v, q = arc
            arcs.append((u, v, _rational(q, f"function.arcs[{k}].weight")))
        return directed_cut_function(ground, arcs)
    if kind == "explicit_table":
        _expect_keys(section, {"kind", "values"}, {"monotone", "submodular"},
                     "function(explicit_table)")
        return explicit_table_function(
            ground, [_rational(v, "function.values") for v in section["values"]],
            declared_monotone=bool(section.get("monotone", False)),
            declared_submodular=bool(section.get("submodular", False)))
    raise InstanceFormatError(f"function.kind: unknown kind {kind!r}")


def _build_matroid(ground: GroundSet, section: dict, where: str) -> Matroid:
    _expect_keys(section, {"backend"}, {"rank", "blocks", "capacities", "edges"}, where)
    backend = section["backend"]
    if backend == "uniform_matroid":
        _expect_keys(section, {"backend", "rank"}, set(), where)
        return Matroid.uniform(ground, int(section["rank"]))
    if backend == "partition_matroid":
        _expect_keys(section, {"backend", "blocks", "capacities"}, set(), where)
        return Matroid.partition(ground, section["blocks"],
                                 [int(x) for x in section["capacities"]])
    if backend == "graphic_matroid":
        _expect_keys(section, {"backend", "edges"}, set(), where)
        endpoints = {e: tuple(uv) for e, uv in section["edges"].items()}
        return Matroid.graphic(ground, endpoints)
    raise InstanceFormatError(f"{where}.backend: {backend!r} is not a matroid backend")


def _build_constraint(ground: GroundSet, section: dict):
    _expect_keys(section, {"backend"},
                 {"rank", "blocks", "capacities", "edges", "sets", "matroids",
                  "degree_bounds", "k", "sqrt_n", "beta", "c", "d", "seed"},
                 "constraint")
    backend = section["backend"]
    if backend in ("uniform_matroid", "partition_matroid", "graphic_matroid"):
        return _build_matroid(ground, section, "constraint").family(), None
    if backend == "explicit":
        _expect_keys(section, {"backend", "sets"}, set(), "constraint(explicit)")
        masks = [ground.mask_of(s) for s in section["sets"]]
        return FeasibilityFamily.explicit(ground, masks), None
    if backend == "k_intersection":
        _expect_keys(section, {"backend", "matroids"}, set(), "constraint(k_intersection)")
        matroids = [_build_matroid(ground, m, f"constraint.matroids[{i}]")
                    for i, m in enumerate(section["matroids"])]
        return k_intersection_family(matroids), None
    if backend == "b_matching":
        _expect_keys(section, {"backend", "edges", "degree_bounds"}, set(),
                     "constraint(b_matching)")
        endpoints = {e: tuple(uv) for e, uv in section["edges"].items()}
        bounds = {v: int(b) for v, b in section["degree_bounds"].items()}
        return b_matching_family(ground, endpoints, bounds), None
    if backend == "k_exchange_explicit":
        _expect_keys(section, {"backend", "sets", "k"}, set(),
                     "constraint(k_exchange_explicit)")
        masks = [ground.mask_of(s) for s in section["sets"]]
        return k_exchange_explicit_family(ground, masks, int(section["k"])), None
    if backend == "hardness":
        _expect_keys(section, {"backend", "sqrt_n"}, {"beta", "c", "d", "seed"},
                     "constraint(hardness)")
        inst = hardness.generate_instance(
            int(section["sqrt_n"]),
            c=None if "c" not in section else int(section["c"]),
            beta=None if "beta" not in section else int(section["beta"]),
            d=None if "d" not in section else int(section["d"]),
            seed=int(section.get("seed", 0)))
        return inst.family(), inst
    raise InstanceFormatError(f"constraint.backend: unknown backend {backend!r}")


def load_instance(data) -> Instance:
    """Build an Instance from a parsed JSON object (or a JSON string)."""
    if isinstance(data, str):
        data = json.loads(data)
    _expect_keys(data, {"ground_set", "function", "constraint"}, {"flags"}, "instance")
    ground_ids = data["ground_set"]
    if not isinstance(ground_ids, list) or not all(isinstance(e, str) for e in ground_ids):
        raise InstanceFormatError("ground_set: expected a list of string ids")
    constraint_section = data["constraint"]
    if isinstance(constraint_section, dict) and constraint_section.get("backend") == "hardness":
        family, inst = _build_constraint(GroundSet.of(ground_ids or ["_"]), constraint_section)
        ground = inst.ground
        if ground_ids and tuple(ground_ids) != ground.elements:
            raise InstanceFormatError(
                "ground_set: hardness instances fix their own block-major ids; "
                "give [] or the exact generated ids")
        function_section = data["function"]
        if function_section.get("kind") == "hardness_coverage":
            _expect_keys(function_section, {"kind"}, {"sqrt_n"}, "function(hardness)")
            oracle = inst.oracle()
        else:
            oracle = _build_function(ground, function_section)
    else:
        ground = GroundSet.of(ground_ids)
        inst = None
        family, _ = _build_constraint(ground, constraint_section)
        oracle = _build_function(ground, data["function"])
    flags = data.get("flags", {})
    _expect_keys(flags, set(), {"monotone", "down_closed"}, "flags")
    monotone = bool(flags.get("monotone", oracle.declared_monotone))
    down_closed = bool(flags.get("down_closed", family.is_down_closed))
    if monotone and not oracle.declared_monotone:
        raise InstanceFormatError(
            "flags.monotone: the function section is not monotone by construction")
    if down_closed and not family.is_down_closed:
        raise InstanceFormatError(
            "flags.down_closed: the constraint backend is not down-closed")
    return Instance(ground, oracle, family, monotone, down_closed, inst)


def load_instance_file(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"{path}: invalid JSON at line {exc.lineno}, "
                                      f"column {exc.colno}: {exc.msg}") from exc
    return load_instance(data)


def dump_instance(instance_dict: dict) -> str:
    """Canonical serialization: sorted keys, two-space indent, newline at EOF."""
    return json.dumps(instance_dict, indent=2, sort_keys=True) + "\n"


def parse_point_spec(ground: GroundSet, text: str) -> dict[str, Fraction]:
    """Parse "a=1/2,b=1" into exact coordinates; omitted elements are zero."""
    coords: dict[str, Fraction] = {}
    if not text.strip():
        return coords
    for chunk in text.split(","):
        if "=" not in chunk:
            raise InstanceFormatError(f"point: expected element=value, got {chunk!r}")
        name, value = chunk.split("=", 1)
        name = name.strip()
        if name not in ground.elements:
            raise InstanceFormatError(f"point: unknown element {name!r}")
        if name in coords:
            raise InstanceFormatError(f"point: duplicate element {name!r}")
        coords[name] = _rational(value.strip(), f"point[{name}]")
    return coords
