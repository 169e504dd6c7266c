"""Experiment configuration files (TOML).

A config names one group, any number of actions on it and optional command
parameters::

    seed = 0
    group = { kind = "free", rank = 2 }
    pair = ["S1", "S2"]

    [[action]]
    name = "S1"
    kind = "word"

    [[action]]
    name = "S2"
    kind = "word"
    generators = ["a", "b", "ab"]

    [params]
    L = 4

Action kinds: ``word`` (``generators``, marking by default), ``scaled``
(``base`` names another action, ``factor``), ``combination`` (``terms`` is a
list of ``{coef, action}``), ``free_product`` (``factors`` is a list of
per-factor ``{generators}``) and ``green`` (``r``, ``N``, ``tail_tol``; the
measure comes from ``[[measure.support]]`` entries with ``element`` and
``prob``, or is simple random walk when absent).
"""

import sys
from dataclasses import dataclass, field
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import GroupInputError
from .groups import MarkedGroup
from .metrics import (CombinedMetric, FreeProductMetric, GreenMetric, RandomWalkMeasure,
                      ScaledMetric, WordMetric)


@dataclass
class ExperimentConfig:
    group: MarkedGroup
    actions: dict
    pair: tuple
    params: dict = field(default_factory=dict)
    seed: int = 0
    measure: RandomWalkMeasure = None
    raw: dict = field(default_factory=dict)

    def action(self, i=0):
        if i >= len(self.pair):
            raise GroupInputError(f"config defines {len(self.pair)} action(s), need {i + 1}")
        return self.actions[self.pair[i]]


def build_group(block):
    if not isinstance(block, dict):
        raise GroupInputError("group must be a table like { kind = \"free\", rank = 2 }")
    kind = block.get("kind", "free")
    names = block.get("names")
    if kind == "free":
        if "rank" not in block:
            raise GroupInputError("free group needs a rank")
        return MarkedGroup.free(int(block["rank"]), names)
    if kind == "free_product":
        factors = block.get("factors")
        if not factors:
            raise GroupInputError("free_product needs a factors list")
        return MarkedGroup.free_product([(f.get("kind", "free"), int(f["rank"])) for f in factors],
                                        names)
    raise GroupInputError(f"unknown group kind {kind!r}")


def build_measure(group, block):
    if block is None:
        return RandomWalkMeasure.uniform(group)
    support = block.get("support")
    if not support:
        raise GroupInputError("measure needs [[measure.support]] entries")
    items = []
    for entry in support:
        try:
            p = Fraction(str(entry["prob"])).limit_denominator(10**12)
            items.append((group.parse(entry["element"]), p))
        except KeyError as exc:
            raise GroupInputError(f"measure support entry missing {exc}") from None
    return RandomWalkMeasure(items)


def _build_action(group, spec, named, measure):
    kind = spec.get("kind", "word")
    if kind == "word":
        return WordMetric(group, spec.get("generators"))
    if kind == "scaled":
        return ScaledMetric(_ref(spec, "base", named), float(spec.get("factor", 1)))
    if kind == "combination":
        terms = spec.get("terms") or []
        return CombinedMetric([(float(t["coef"]), _ref(t, "action", named)) for t in terms])
    if kind == "free_product":
        factors = spec.get("factors")
        if factors is None:
            factors = [{} for _ in group.factors]
        metrics = [WordMetric(group.factor_group(i), f.get("generators"))
                   for i, f in enumerate(factors)]
        return FreeProductMetric(group, metrics)
    if kind == "green":
        return GreenMetric(measure, r=float(spec.get("r", 1.0)), N=int(spec.get("N", 40)),
                           tail_tol=float(spec.get("tail_tol", 1e-9)))
    raise GroupInputError(f"unknown action kind {kind!r}")


def _ref(spec, key, named):
    name = spec.get(key)
    if name not in named:
        raise GroupInputError(f"action {name!r} referenced before it is defined")
    return named[name]


def build_config(data):
    if "group" not in data:
        raise GroupInputError("config needs a group block")
    group = build_group(data["group"])
    measure = build_measure(group, data.get("measure"))
    blocks = data.get("action", [])
    if isinstance(blocks, dict):
        blocks = [blocks]
    if not blocks:
        blocks = [{"name": "marking", "kind": "word"}]
    actions = {}
    for i, spec in enumerate(blocks):
        name = spec.get("name", f"action{i + 1}")
        if name in actions:
            raise GroupInputError(f"duplicate action name {name!r}")
        actions[name] = _build_action(group, spec, actions, measure)
    pair = data.get("pair")
    if pair is None:
        pair = list(actions)[:2]
    for name in pair:
        if name not in actions:
            raise GroupInputError(f"pair refers to unknown action {name!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise GroupInputError("seed must be an integer")
    return ExperimentConfig(group, actions, tuple(pair), dict(data.get("params", {})), seed,
                            measure, data)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise GroupInputError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise GroupInputError(f"malformed config {path}: {exc}") from None
    return build_config(data)
