"""Command line front end.

Scenario configs are JSON files describing the graph, the vertex groups,
the coefficient algebra, the actions and the multipliers, plus optional
verification parameters.  Configs are validated by hand so that every
complaint carries a JSON-pointer to the offending entry; presets are
expanded before use and the expansion is echoed into verification reports.

Exit codes: 0 all requested checks passed, 1 at least one check failed,
2 invalid configuration, 3 a search budget was exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .dynamics import (
    ActionSystem,
    block_permutation_action,
    diagonal_phase_action,
    point_permutation_action,
    trivial_action,
)
from .errors import BudgetExceededError, ConfigError, GPMultError
from .graphgroup import FiniteGroup, SimplicialGraph, preset_group, validate_group
from .matalg import BlockStructure, CentralElement
from .multipliers import (
    Multiplier,
    MultiplierSystem,
    delta_multiplier,
    geometric_multiplier,
)
from .verifier import SUITES, Scenario, run_all
from .wordcraft import WordContext

GROUP_PRESETS = ("cyclic", "symmetric", "dihedral")
ACTION_PRESETS = (
    "trivial",
    "diagonal-phases",
    "block-permutation",
    "point-permutation",
)


# ----------------------------------------------------------------------
# low-level shape checks

def _want(cond, pointer, message, code=None):
    if not cond:
        raise ConfigError(pointer, message, code=code)


def _as_dict(x, pointer):
    _want(isinstance(x, dict), pointer, "expected an object")
    return x


def _as_list(x, pointer, length=None):
    _want(isinstance(x, list), pointer, "expected an array")
    if length is not None:
        _want(len(x) == length, pointer, f"expected {length} entries, got {len(x)}")
    return x


def _as_str(x, pointer):
    _want(isinstance(x, str), pointer, "expected a string")
    return x


def _as_int(x, pointer, at_least=None):
    _want(isinstance(x, int) and not isinstance(x, bool), pointer, "expected an integer")
    if at_least is not None:
        _want(x >= at_least, pointer, f"must be at least {at_least}")
    return x


def _as_num(x, pointer):
    _want(
        isinstance(x, (int, float)) and not isinstance(x, bool),
        pointer,
        "expected a number",
    )
    return float(x)


def _keys(d, pointer, allowed, required=()):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{pointer}/{k}", "unknown key", code="config_unknown_key")
    for k in required:
        _want(k in d, pointer, f"missing required key {k!r}", code="config_missing_key")
    return d


# ----------------------------------------------------------------------
# section builders

def _build_graph(cfg) -> SimplicialGraph:
    g = _as_dict(cfg.get("graph"), "/graph")
    _keys(g, "/graph", {"vertices", "edges"}, required=("vertices",))
    vs = _as_list(g["vertices"], "/graph/vertices")
    _want(len(vs) > 0, "/graph/vertices", "need at least one vertex")
    names = []
    for i, v in enumerate(vs):
        names.append(_as_str(v, f"/graph/vertices/{i}"))
    edges = []
    for i, e in enumerate(_as_list(g.get("edges", []), "/graph/edges")):
        pair = _as_list(e, f"/graph/edges/{i}", length=2)
        a = _as_str(pair[0], f"/graph/edges/{i}/0")
        b = _as_str(pair[1], f"/graph/edges/{i}/1")
        for side, name in enumerate((a, b)):
            _want(
                name in names,
                f"/graph/edges/{i}/{side}",
                f"unknown vertex {name!r}",
            )
        edges.append((a, b))
    try:
        return SimplicialGraph.build(names, edges)
    except GPMultError as err:
        raise ConfigError("/graph", str(err)) from err


def _build_group(spec, pointer) -> FiniteGroup:
    d = _as_dict(spec, pointer)
    if "table" in d:
        _keys(d, pointer, {"table", "name"})
        table = _as_list(d["table"], f"{pointer}/table")
        try:
            arr = np.asarray(table, dtype=np.int64)
            group = FiniteGroup(arr, name=str(d.get("name", "custom")))
            validate_group(group)
        except (GPMultError, ValueError) as err:
            raise ConfigError(f"{pointer}/table", str(err)) from err
        return group
    _keys(d, pointer, {"preset", "n"}, required=("preset", "n"))
    kind = _as_str(d["preset"], f"{pointer}/preset")
    _want(
        kind in GROUP_PRESETS,
        f"{pointer}/preset",
        f"unknown preset {kind!r}; choose from {', '.join(GROUP_PRESETS)}",
    )
    n = _as_int(d["n"], f"{pointer}/n", at_least=1)
    try:
        return preset_group(kind, n)
    except (GPMultError, ValueError) as err:
        raise ConfigError(f"{pointer}/n", str(err)) from err


def _build_structure(cfg) -> BlockStructure:
    a = _as_dict(cfg.get("algebra"), "/algebra")
    _keys(a, "/algebra", {"blocks"}, required=("blocks",))
    blocks = _as_list(a["blocks"], "/algebra/blocks")
    _want(len(blocks) > 0, "/algebra/blocks", "need at least one block")
    dims = [_as_int(b, f"/algebra/blocks/{i}", at_least=1) for i, b in enumerate(blocks)]
    return BlockStructure(tuple(dims))


def _build_action(spec, pointer, group, structure):
    d = _as_dict(spec, pointer)
    _keys(
        d,
        pointer,
        {"preset", "phases", "perms", "maps"},
        required=("preset",),
    )
    kind = _as_str(d["preset"], f"{pointer}/preset")
    _want(
        kind in ACTION_PRESETS,
        f"{pointer}/preset",
        f"unknown preset {kind!r}; choose from {', '.join(ACTION_PRESETS)}",
    )

    def _perm_lists(key):
        rows = _as_list(d.get(key), f"{pointer}/{key}", length=group.order)
        out = []
        for g, row in enumerate(rows):
            row = _as_list(row, f"{pointer}/{key}/{g}", length=structure.num_blocks)
            out.append([_as_int(p, f"{pointer}/{key}/{g}/{i}") for i, p in enumerate(row)])
        return out

    try:
        if kind == "trivial":
            _keys(d, pointer, {"preset"})
            return trivial_action(group, structure)
        if kind == "diagonal-phases":
            _keys(d, pointer, {"preset", "phases"}, required=("phases",))
            rows = _as_list(d["phases"], f"{pointer}/phases", length=group.order)
            phases = []
            for g, row in enumerate(rows):
                row = _as_list(
                    row, f"{pointer}/phases/{g}", length=structure.num_blocks
                )
                per_block = []
                for k, angles in enumerate(row):
                    angles = _as_list(
                        angles,
                        f"{pointer}/phases/{g}/{k}",
                        length=structure.block_dims[k],
                    )
                    per_block.append(
                        [
                            _as_num(t, f"{pointer}/phases/{g}/{k}/{i}")
                            for i, t in enumerate(angles)
                        ]
                    )
                phases.append(per_block)
            return diagonal_phase_action(group, structure, phases)
        if kind == "block-permutation":
            _keys(d, pointer, {"preset", "perms"}, required=("perms",))
            return block_permutation_action(group, structure, _perm_lists("perms"))
        # point-permutation
        _keys(d, pointer, {"preset", "maps"}, required=("maps",))
        return point_permutation_action(group, structure, _perm_lists("maps"))
    except GPMultError as err:
        raise ConfigError(pointer, str(err)) from err


def _central_value(entry, structure, pointer) -> CentralElement:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return CentralElement.constant(structure, float(entry))
    blocks = _as_list(entry, pointer, length=structure.num_blocks)
    scalars = []
    for k, item in enumerate(blocks):
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            scalars.append(complex(item))
        else:
            pair = _as_list(item, f"{pointer}/{k}", length=2)
            re = _as_num(pair[0], f"{pointer}/{k}/0")
            im = _as_num(pair[1], f"{pointer}/{k}/1")
            scalars.append(complex(re, im))
    return CentralElement(structure, np.asarray(scalars))


def _build_multiplier(spec, pointer, group, structure) -> Multiplier:
    d = _as_dict(spec, pointer)
    if "values" in d:
        _keys(d, pointer, {"values"})
        rows = _as_list(d["values"], f"{pointer}/values", length=group.order)
        vals = tuple(
            _central_value(row, structure, f"{pointer}/values/{g}")
            for g, row in enumerate(rows)
        )
        return Multiplier(group, structure, vals)
    _keys(d, pointer, {"preset", "c"}, required=("preset",))
    kind = _as_str(d["preset"], f"{pointer}/preset")
    if kind == "delta":
        _keys(d, pointer, {"preset"})
        return delta_multiplier(group, structure)
    if kind == "geometric":
        _keys(d, pointer, {"preset", "c"}, required=("c",))
        c = _as_num(d["c"], f"{pointer}/c")
        try:
            return geometric_multiplier(group, structure, c)
        except GPMultError as err:
            raise ConfigError(f"{pointer}/preset", str(err)) from err
    raise ConfigError(
        f"{pointer}/preset", f"unknown preset {kind!r}; choose delta or geometric"
    )


_VERIFY_KEYS = {
    "seed": ("seed", int),
    "ball_radius": ("ball_radius", int),
    "identity_radius": ("identity_radius", int),
    "max_set_size": ("max_set_size", int),
    "max_flat_dim": ("max_flat_dim", int),
    "num_sets": ("num_sets", int),
    "sample_size": ("sample_size", int),
    "tuple_target": ("tuple_target", int),
    "nd_trials": ("nd_trials", int),
    "budget": ("budget", int),
}


def _verify_params(cfg) -> dict:
    out: dict = {}
    v = cfg.get("verify")
    if v is None:
        return out
    v = _as_dict(v, "/verify")
    allowed = set(_VERIFY_KEYS) | {"schoenberg_t", "witness"}
    _keys(v, "/verify", allowed)
    for key, (attr, _) in _VERIFY_KEYS.items():
        if key in v:
            out[attr] = _as_int(v[key], f"/verify/{key}", at_least=0)
    if "schoenberg_t" in v:
        ts = _as_list(v["schoenberg_t"], "/verify/schoenberg_t")
        _want(len(ts) > 0, "/verify/schoenberg_t", "need at least one value")
        out["schoenberg_t"] = tuple(
            _as_num(t, f"/verify/schoenberg_t/{i}") for i, t in enumerate(ts)
        )
    if "witness" in v:
        w = _as_dict(v["witness"], "/verify/witness")
        _keys(w, "/verify/witness", {"K", "eps", "L"}, required=("K", "eps", "L"))
        out["witness"] = {
            "K": _as_int(w["K"], "/verify/witness/K", at_least=1),
            "eps": _as_num(w["eps"], "/verify/witness/eps"),
            "L": _as_int(w["L"], "/verify/witness/L", at_least=1),
        }
    return out


def _echo_config(name, graph, groups, structure, cfg, params):
    """Fully expanded config: presets resolved, every default made explicit."""
    actions_cfg = cfg["actions"]
    mult_echo = {}
    for v, vid in enumerate(graph.vertices):
        h = params["_multipliers"][v]
        rows = []
        for val in h.values:
            rows.append([[float(s.real), float(s.imag)] for s in val.scalars])
        mult_echo[vid] = {"values": rows}
    return {
        "name": name,
        "graph": {
            "vertices": list(graph.vertices),
            "edges": sorted(
                sorted(graph.vertices[i] for i in e) for e in graph.edge_index_pairs()
            ),
        },
        "groups": {
            vid: {"name": groups[v].name, "order": int(groups[v].order)}
            for v, vid in enumerate(graph.vertices)
        },
        "algebra": {"blocks": list(structure.block_dims)},
        "actions": {vid: actions_cfg[vid] for vid in graph.vertices},
        "multipliers": mult_echo,
        "verify": {
            "seed": params["seed"],
            "ball_radius": params["ball_radius"],
            "identity_radius": params["identity_radius"],
            "max_set_size": params["max_set_size"],
            "max_flat_dim": params["max_flat_dim"],
            "num_sets": params["num_sets"],
            "sample_size": params["sample_size"],
            "tuple_target": params["tuple_target"],
            "schoenberg_t": list(params["schoenberg_t"]),
            "nd_trials": params["nd_trials"],
            "budget": params["budget"],
            "witness": params["witness"],
        },
    }


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise ConfigError("/", f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError("/", f"invalid JSON: {err}") from err
    return _as_dict(cfg, "/")


def build_scenario(cfg, seed: int | None = None) -> Scenario:
    _keys(
        cfg,
        "",
        {"name", "graph", "groups", "algebra", "actions", "multipliers", "verify"},
        required=("graph", "groups", "algebra", "actions", "multipliers"),
    )
    name = _as_str(cfg.get("name", "scenario"), "/name")
    graph = _build_graph(cfg)
    structure = _build_structure(cfg)

    groups_cfg = _as_dict(cfg["groups"], "/groups")
    _keys(groups_cfg, "/groups", set(graph.vertices), required=tuple(graph.vertices))
    groups = [
        _build_group(groups_cfg[vid], f"/groups/{vid}") for vid in graph.vertices
    ]
    words = WordContext(graph, groups)

    actions_cfg = _as_dict(cfg["actions"], "/actions")
    _keys(actions_cfg, "/actions", set(graph.vertices), required=tuple(graph.vertices))
    tables = [
        _build_action(actions_cfg[vid], f"/actions/{vid}", groups[v], structure)
        for v, vid in enumerate(graph.vertices)
    ]
    try:
        actions = ActionSystem(words, structure, tables)
    except GPMultError as err:
        raise ConfigError("/actions", str(err)) from err

    mult_cfg = _as_dict(cfg["multipliers"], "/multipliers")
    _keys(mult_cfg, "/multipliers", set(graph.vertices), required=tuple(graph.vertices))
    multipliers = [
        _build_multiplier(mult_cfg[vid], f"/multipliers/{vid}", groups[v], structure)
        for v, vid in enumerate(graph.vertices)
    ]
    system = MultiplierSystem(actions, multipliers)

    defaults = Scenario(name="defaults", system=system)
    params = {
        "seed": defaults.seed,
        "ball_radius": defaults.ball_radius,
        "identity_radius": defaults.identity_radius,
        "max_set_size": defaults.max_set_size,
        "max_flat_dim": defaults.max_flat_dim,
        "num_sets": defaults.num_sets,
        "sample_size": defaults.sample_size,
        "tuple_target": defaults.tuple_target,
        "schoenberg_t": defaults.schoenberg_t,
        "nd_trials": defaults.nd_trials,
        "budget": defaults.budget,
        "witness": None,
    }
    params.update(_verify_params(cfg))
    if seed is not None:
        params["seed"] = seed
    params["_multipliers"] = multipliers
    echo = _echo_config(name, graph, groups, structure, cfg, params)
    del params["_multipliers"]
    witness = params.pop("witness")
    return Scenario(
        name=name,
        system=system,
        witness=witness,
        expanded_config=echo,
        **params,
    )


# ----------------------------------------------------------------------
# word I/O

def _parse_word(text, words: WordContext):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError("/word", f"invalid JSON: {err}") from err
    pairs = _as_list(raw, "/word")
    letters = []
    for i, p in enumerate(pairs):
        pair = _as_list(p, f"/word/{i}", length=2)
        vid = _as_str(pair[0], f"/word/{i}/0")
        _want(
            vid in words.graph.vertices, f"/word/{i}/0", f"unknown vertex {vid!r}"
        )
        v = words.graph.vertex_index(vid)
        e = _as_int(pair[1], f"/word/{i}/1")
        _want(
            0 <= e < words.groups[v].order,
            f"/word/{i}/1",
            f"element out of range for group of order {words.groups[v].order}",
        )
        letters.append((vid, e))
    return words.from_pairs(letters)


def _word_pairs(words: WordContext, x):
    return [[words.graph.vertices[l.vertex], int(l.elem)] for l in x.letters]


def _central_json(val: CentralElement):
    return [[float(s.real), float(s.imag)] for s in val.scalars]


# ----------------------------------------------------------------------
# commands

def _emit(payload, out_path=None):
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_normalize(args) -> int:
    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    words = sc.system.words
    x = _parse_word(args.word, words)
    payload = {
        "canonical": _word_pairs(words, x),
        "vertex_word": [words.graph.vertices[v] for v in x.vertex_word],
        "length": len(x.letters),
        "is_identity": not x.letters,
        "rearrangements": len(words.rearrangements(x)),
    }
    _emit(payload, args.out)
    return 0


def cmd_check_setup(args) -> int:
    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    try:
        sc.system.validate()
    except GPMultError as err:
        _emit(
            {"valid": False, "error": err.code, "message": str(err)},
            args.out,
        )
        return 1
    _emit(
        {
            "valid": True,
            "valid_actions": sc.system.valid_actions,
            "valid_multipliers": sc.system.valid_multipliers,
        },
        args.out,
    )
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    words = sc.system.words
    x = _parse_word(args.word, words)
    val = sc.system.gp_value(x)
    _emit(
        {
            "canonical": _word_pairs(words, x),
            "value": _central_json(val),
            "blocks": list(sc.system.structure.block_dims),
        },
        args.out,
    )
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    sc = build_scenario(cfg, seed=args.seed)
    suites = SUITES if args.suite == "all" else (args.suite,)
    report = run_all(sc, suites=suites, threads=args.threads)
    _emit(report, args.out)
    return 0 if report["pass"] else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpmult",
        description="Graph products of group actions: evaluation and certification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="canonical form of a word")
    p.add_argument("config")
    p.add_argument("--word", required=True, help='JSON like [["a",1],["b",2]]')
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("check-setup", help="validate actions and multipliers")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check_setup)

    p = sub.add_parser("eval", help="evaluate the product multiplier on a word")
    p.add_argument("config")
    p.add_argument("--word", required=True, help='JSON like [["a",1],["b",2]]')
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run certification suites, emit a JSON report")
    p.add_argument("config")
    p.add_argument(
        "--suite",
        choices=list(SUITES) + ["all"],
        default="all",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error at {err.pointer}: {err}", file=sys.stderr)
        return 2
    except BudgetExceededError as err:
        print(f"budget exceeded: {err}", file=sys.stderr)
        return 3
    except GPMultError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
