"""Experiment configuration: a flat key/value text format with typed values.

One assignment per line (`key = value`), `#` comments, values as Python
literals with bare words falling back to strings.  Keys are namespaced by
prefix: `param.*` collects kind-specific parameters and `tol.*` collects
the pass/fail thresholds evaluated by reports, so thresholds ship with the
experiment rather than living in code.  Parsing is strict: unknown top-level
keys, bad literals, and invalid group data are reported together with line
numbers rather than one at a time.
"""

from __future__ import annotations

import ast
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .groups import (
    DEFAULT_BUDGET,
    GeneratorSet,
    GroupSpec,
    MemoryBudget,
    generator_set,
)

KINDS = (
    "walk_diagnostics",
    "frog_tails",
    "linear_growth",
    "shape",
    "torsion_compare",
    "symmetry",
)

_TOP_KEYS = {
    "kind", "rank", "torsion", "generators", "master_seed",
    "parallelism", "output_dir", "budget_max_elements", "budget_max_box_cells",
}

_WORD_BOOLS = {"true": True, "false": False, "yes": True, "no": False}


def _parse_value(raw: str):
    word = raw.strip()
    low = word.lower()
    if low in _WORD_BOOLS:
        return _WORD_BOOLS[low]
    try:
        return ast.literal_eval(word)
    except (ValueError, SyntaxError):
        return word


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one batch experiment."""

    kind: str
    group: GroupSpec
    generators: GeneratorSet
    master_seed: int
    parallelism: int = 1
    output_dir: str = "runs"
    budget: MemoryBudget = DEFAULT_BUDGET
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def flat_items(self) -> dict:
        """Canonical flat key/value image of the config (hash and round-trip basis)."""
        out = {
            "kind": self.kind,
            "rank": self.group.rank,
            "torsion": list(self.group.torsion_orders),
            "generators": sorted(tuple(int(v) for v in row)
                                 for row in self.generators.matrix.tolist()),
            "master_seed": self.master_seed,
            "parallelism": self.parallelism,
            "output_dir": self.output_dir,
            "budget_max_elements": self.budget.max_elements,
            "budget_max_box_cells": self.budget.max_box_cells,
        }
        for k in sorted(self.params):
            out[f"param.{k}"] = self.params[k]
        for k in sorted(self.tolerances):
            out[f"tol.{k}"] = self.tolerances[k]
        return out

    def to_text(self) -> str:
        lines = [f"{k} = {v!r}" if isinstance(v, str) else f"{k} = {v}"
                 for k, v in self.flat_items().items()]
        return "\n".join(lines) + "\n"

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.flat_items(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; collect all problems before failing."""
    problems: list[tuple[str, str]] = []
    entries: dict[str, tuple[int, object]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((f"line {lineno}", f"expected 'key = value', got {line!r}"))
            continue
        key, _, rhs = line.partition("=")
        key = key.strip()
        if not key:
            problems.append((f"line {lineno}", "empty key"))
            continue
        if key in entries:
            problems.append((f"line {lineno}", f"duplicate key {key!r} "
                             f"(first set on line {entries[key][0]})"))
            continue
        entries[key] = (lineno, _parse_value(rhs))

    def take(key, default=None, required=False):
        if key in entries:
            return entries.pop(key)
        if required:
            problems.append(("config", f"missing required key {key!r}"))
        return (0, default)

    kind_line, kind = take("kind", required=True)
    if kind is not None and kind not in KINDS:
        problems.append((f"line {kind_line}", f"unknown kind {kind!r}; "
                         f"expected one of {', '.join(KINDS)}"))

    rank_line, rank = take("rank", required=True)
    tor_line, torsion = take("torsion", default=[])
    group = None
    if isinstance(rank, bool) or not isinstance(rank, int):
        problems.append((f"line {rank_line}", f"rank must be an integer, got {rank!r}"))
    elif not isinstance(torsion, (list, tuple)):
        problems.append((f"line {tor_line}", "torsion must be a list of integers"))
    else:
        try:
            group = GroupSpec(rank, tuple(int(m) for m in torsion))
        except (ValueError, TypeError) as exc:
            problems.append((f"line {tor_line or rank_line}", f"invalid group: {exc}"))

    gens_line, gens_raw = take("generators", required=True)
    gens = None
    if gens_raw is not None and group is not None:
        if not isinstance(gens_raw, (list, tuple)) or not gens_raw:
            problems.append((f"line {gens_line}", "generators must be a non-empty "
                             "list of coordinate tuples"))
        else:
            try:
                gens = generator_set(group, [tuple(int(v) for v in row)
                                             for row in gens_raw])
            except (ValueError, TypeError) as exc:
                problems.append((f"line {gens_line}", f"invalid generators: {exc}"))

    seed_line, master_seed = take("master_seed", required=True)
    if master_seed is not None and (isinstance(master_seed, bool)
                                    or not isinstance(master_seed, int)):
        problems.append((f"line {seed_line}", "master_seed must be an integer "
                         "(no wall-clock default)"))

    par_line, parallelism = take("parallelism", default=1)
    if isinstance(parallelism, bool) or not isinstance(parallelism, int) or parallelism < 1:
        problems.append((f"line {par_line}", "parallelism must be a positive integer"))

    _, output_dir = take("output_dir", default="runs")
    be_line, b_elems = take("budget_max_elements", default=DEFAULT_BUDGET.max_elements)
    bc_line, b_cells = take("budget_max_box_cells", default=DEFAULT_BUDGET.max_box_cells)
    budget = DEFAULT_BUDGET
    try:
        budget = MemoryBudget(int(b_elems), int(b_cells))
    except (ValueError, TypeError) as exc:
        problems.append((f"line {be_line or bc_line}", f"invalid budget: {exc}"))

    params, tolerances = {}, {}
    for key, (lineno, value) in entries.items():
        if key.startswith("param."):
            params[key[len("param."):]] = value
        elif key.startswith("tol."):
            tolerances[key[len("tol."):]] = value
        else:
            problems.append((f"line {lineno}", f"unknown key {key!r} (top-level keys: "
                             f"{', '.join(sorted(_TOP_KEYS))}; prefixes: param., tol.)"))

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(kind=kind, group=group, generators=gens,
                            master_seed=master_seed, parallelism=parallelism,
                            output_dir=str(output_dir), budget=budget,
                            params=params, tolerances=tolerances)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
