"""Command line front end: eval, play, verify, construct, suite.

One binary, five subcommands, one seed.  Every byte written is a pure
function of (config, seed, package version): no timestamps, sorted JSON
keys, fixed float formatting in the suite report only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple

from .acceptance import DEFAULT_SEED, run_all
from .automata import NodeAutomaton, lasso_summary
from .construction import (ConstructionState, algebra, branch_limsup,
                           minimize_labeling, verify_construction)
from .corpus import branch_corpus, rng_stream
from .dyadic import Dyadic, as_dyadic
from .families import discretize, family_from_automaton
from .games import (MAX_TRACE_ROUNDS, GameKind, StrategyI, StrategyII,
                    exact_verdict, finite_value_set, gamma, gamma_prime,
                    gamma_restricted, play)
from .strategies import (ConstantII, IndicatorPayoff, LetterFSM, ValueFSM,
                         approx_copycat, copycat_strategy,
                         eventually_zero_instance,
                         indicator_oscillation_instance, lift_strategy,
                         pair_strategies, relabel_strategy,
                         strategy_i_meager_dense, strategy_i_oscillation,
                         strategy_ii_from_u)
from .trees import (EventuallyPeriodicBranch, TreeSpec, binary_tree, nat_tree,
                    parse_branch)


class ConfigError(ValueError):
    """Configuration or contract violation; maps to exit code 2."""


def _dy(v) -> Dyadic:
    if isinstance(v, str):
        return Dyadic.parse(v)
    return as_dyadic(v)


# ---------------------------------------------------------------------------
# configuration

_GAMES = ("gamma", "gamma_prime", "gamma_restricted")
_TREES = ("binary", "nat")
_TRACE_FORMATS = ("csv", "json", "none")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: the game, the payoff source, both players, budgets.

    Round-trips through serialize/parse bit-exactly; unknown keys are
    rejected rather than dropped so a config never silently degrades.
    """

    game: str = "gamma"
    tree: str = "binary"
    restriction: Optional[Tuple[str, ...]] = None
    payoff: Optional[dict] = None
    pipeline: Optional[dict] = None
    player_i: Optional[dict] = None
    player_ii: Optional[dict] = None
    horizon: int = 200
    cap: int = 50000
    seed: int = DEFAULT_SEED
    out_dir: Optional[str] = None
    trace_format: str = "csv"

    def __post_init__(self):
        if self.game not in _GAMES:
            raise ConfigError(f"game must be one of {_GAMES}, got {self.game!r}")
        if self.tree not in _TREES:
            raise ConfigError(f"tree must be one of {_TREES}, got {self.tree!r}")
        if self.trace_format not in _TRACE_FORMATS:
            raise ConfigError(
                f"trace must be one of {_TRACE_FORMATS}, got {self.trace_format!r}")
        if (self.game == "gamma_restricted") != (self.restriction is not None):
            raise ConfigError("restriction goes with gamma_restricted, only")
        if self.restriction is not None:
            object.__setattr__(self, "restriction", tuple(self.restriction))
            for v in self.restriction:
                _dy(v)
        for name in ("horizon", "cap", "seed"):
            val = getattr(self, name)
            if not isinstance(val, int) or val < 0:
                raise ConfigError(f"{name} must be a nonnegative integer")
        # the engine hard-caps every trace; declaring more is a config error,
        # never a silent truncation
        if self.horizon > MAX_TRACE_ROUNDS or self.cap > MAX_TRACE_ROUNDS:
            raise ConfigError(
                f"horizon and cap are limited to {MAX_TRACE_ROUNDS} rounds")

    def to_json_dict(self) -> dict:
        return {
            "game": self.game,
            "tree": self.tree,
            "restriction":
                None if self.restriction is None else list(self.restriction),
            "payoff": self.payoff,
            "pipeline": self.pipeline,
            "player_i": self.player_i,
            "player_ii": self.player_ii,
            "horizon": self.horizon,
            "cap": self.cap,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "trace_format": self.trace_format,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(data)
        if kwargs.get("restriction") is not None:
            kwargs["restriction"] = tuple(kwargs["restriction"])
        return cls(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.parse(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "horizon", None) is not None:
        changes["horizon"] = args.horizon
    if getattr(args, "cap", None) is not None:
        changes["cap"] = args.cap
    if getattr(args, "out", None) is not None:
        changes["out_dir"] = args.out
    if getattr(args, "trace", None) is not None:
        changes["trace_format"] = args.trace
    return replace(cfg, **changes) if changes else cfg


# ---------------------------------------------------------------------------
# builders

def resolve_tree(cfg: ExperimentConfig) -> TreeSpec:
    return binary_tree() if cfg.tree == "binary" else nat_tree()


def resolve_kind(cfg: ExperimentConfig) -> GameKind:
    tree = resolve_tree(cfg)
    if cfg.game == "gamma":
        return gamma(tree)
    if cfg.game == "gamma_prime":
        return gamma_prime(tree)
    return gamma_restricted(
        finite_value_set([_dy(v) for v in cfg.restriction]), tree)


def resolve_automaton(src: dict) -> NodeAutomaton:
    if not isinstance(src, dict):
        raise ConfigError("function source must be an object")
    if "automaton" in src:
        try:
            return NodeAutomaton.from_json_dict(src["automaton"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed inline automaton: {e}") from None
    if "file" in src:
        try:
            return NodeAutomaton.load(src["file"])
        except (OSError, KeyError, TypeError, ValueError,
                json.JSONDecodeError) as e:
            raise ConfigError(
                f"cannot load automaton {src['file']}: {e}") from None
    raise ConfigError("function source needs 'automaton' or 'file'")


@dataclass(frozen=True)
class ConstructedFunction:
    """Payoff backed by a constructed node labeling, evaluated per branch."""

    state: ConstructionState

    def value_on(self, x: EventuallyPeriodicBranch) -> Dyadic:
        return branch_limsup(self.state.fam, x)[0]


def build_payoff(src: Optional[dict], tree: TreeSpec):
    if src is None:
        raise ConfigError("config has no payoff source")
    kind = src.get("kind", "automaton")
    if kind == "automaton":
        return resolve_automaton(src)
    if kind == "algebra":
        for key in ("op", "left", "right"):
            if key not in src:
                raise ConfigError(f"algebra source needs {key!r}")
        return algebra(resolve_automaton(src["left"]),
                       resolve_automaton(src["right"]), src["op"], tree)
    if kind == "indicator":
        return IndicatorPayoff()
    if kind == "pipeline":
        _, state, _ = build_pipeline(src, tree)
        return ConstructedFunction(state)
    raise ConfigError(f"unknown payoff kind {kind!r}")


def _random_letter_fsm(states: int, values, seed: int) -> LetterFSM:
    rng = rng_stream(seed, "random-fsm")
    thresholds = [_dy(v) for v in values]
    width = len(thresholds) + 2
    emits = [rng.randrange(2) for _ in range(states)]
    trans = [[rng.randrange(states) for _ in range(width)]
             for _ in range(states)]
    return LetterFSM(emits, trans, thresholds)


def _random_value_fsm(states: int, values, seed: int,
                      pairs: bool) -> ValueFSM:
    rng = rng_stream(seed, "random-fsm")
    pool = [_dy(v) for v in values]
    if not pool:
        raise ConfigError("random_fsm needs a nonempty value list")
    trans = [[rng.randrange(states) for _ in range(2)] for _ in range(states)]
    vals = [pool[rng.randrange(len(pool))] for _ in range(states)]
    cov = [pool[rng.randrange(len(pool))] for _ in range(states)] \
        if pairs else None
    return ValueFSM(trans, vals, covalues=cov)


def _fsm_params(desc: dict):
    try:
        states = int(desc["states"])
        values = desc["values"]
        seed = int(desc["seed"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(
            "random_fsm needs integer 'states', list 'values', integer 'seed'"
        ) from None
    if states < 1:
        raise ConfigError("random_fsm needs at least one state")
    return states, values, seed


def build_strategy_i(desc: Optional[dict], cfg: ExperimentConfig) -> StrategyI:
    if not desc or "kind" not in desc:
        raise ConfigError("player_i needs a strategy descriptor with a 'kind'")
    kind = desc["kind"]
    if kind == "copycat":
        return copycat_strategy()
    if kind == "approx_copycat":
        return approx_copycat(search_cap=desc.get("cap"))
    if kind == "meager_dense":
        return strategy_i_meager_dense(eventually_zero_instance())
    if kind == "oscillation":
        return strategy_i_oscillation(indicator_oscillation_instance())
    if kind == "lift":
        if "base" not in desc or "restriction" not in desc:
            raise ConfigError("lift needs 'base' and 'restriction'")
        base = build_strategy_i(desc["base"], cfg)
        return lift_strategy(
            base, finite_value_set([_dy(v) for v in desc["restriction"]]))
    if kind == "relabel":
        if "base" not in desc or "mapping" not in desc:
            raise ConfigError("relabel needs 'base' and 'mapping'")
        base = build_strategy_i(desc["base"], cfg)
        mapping = {_dy(k): _dy(v) for k, v in desc["mapping"].items()}
        try:
            return relabel_strategy(base, mapping)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    if kind == "random_fsm":
        return _random_letter_fsm(*_fsm_params(desc))
    raise ConfigError(f"unknown player_i strategy kind {kind!r}")


def build_strategy_ii(desc: Optional[dict], cfg: ExperimentConfig) -> StrategyII:
    if not desc or "kind" not in desc:
        raise ConfigError("player_ii needs a strategy descriptor with a 'kind'")
    kind = desc["kind"]
    if kind == "from_u":
        return strategy_ii_from_u(resolve_automaton(desc))
    if kind == "constant":
        if "value" not in desc:
            raise ConfigError("constant needs a 'value'")
        cov = desc.get("covalue")
        return ConstantII(_dy(desc["value"]),
                          None if cov is None else _dy(cov))
    if kind == "pair":
        if "f" not in desc or "g" not in desc:
            raise ConfigError("pair needs 'f' and 'g' descriptors")
        return pair_strategies(build_strategy_ii(desc["f"], cfg),
                               build_strategy_ii(desc["g"], cfg))
    if kind == "random_fsm":
        states, values, seed = _fsm_params(desc)
        return _random_value_fsm(states, values, seed,
                                 pairs=cfg.game == "gamma_prime")
    raise ConfigError(f"unknown player_ii strategy kind {kind!r}")


# ---------------------------------------------------------------------------
# output plumbing

def _dump(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _emit_trace(trace, cfg: ExperimentConfig, verdict_json=None) -> None:
    if cfg.out_dir is None or cfg.trace_format == "none":
        return
    side = trace.sidecar(verdict_json)
    if cfg.trace_format == "csv":
        _write(cfg.out_dir, "trace.csv", trace.to_csv_text())
        _write(cfg.out_dir, "trace.json", _dump(side))
    else:
        rows = [{"t": r.t, "x_t": r.letter, "v_t": str(r.value),
                 "w_t": None if r.covalue is None else str(r.covalue)}
                for r in trace.rows]
        _write(cfg.out_dir, "trace.json", _dump({**side, "rows": rows}))


def _fault_json(trace) -> Optional[str]:
    if trace.fault is None:
        return None
    return _dump({"fault": {"blame": trace.fault.blame,
                            "round": trace.fault.round_index,
                            "detail": trace.fault.detail}})


# ---------------------------------------------------------------------------
# subcommands

def cmd_eval(args) -> int:
    try:
        u = NodeAutomaton.load(args.automaton)
    except (OSError, KeyError, TypeError, ValueError,
            json.JSONDecodeError) as e:
        raise ConfigError(f"malformed automaton file: {e}") from None
    try:
        x = parse_branch(args.branch)
    except ValueError as e:
        raise ConfigError(f"bad branch descriptor: {e}") from None
    cert = lasso_summary(u, x)
    value = max(cert.cycle_outputs)
    print(str(value))
    cyc = ", ".join(str(v) for v in cert.cycle_outputs)
    print(f"lasso: start={cert.start} period={cert.period} "
          f"cycle_outputs=[{cyc}]")
    return 0


def cmd_play(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    kind = resolve_kind(cfg)
    sI = build_strategy_i(cfg.player_i, cfg)
    sII = build_strategy_ii(cfg.player_ii, cfg)
    trace = play(kind, sI, sII, cfg.horizon)
    fault = _fault_json(trace)
    if fault is not None:
        sys.stderr.write(fault)
    summary = trace.sidecar()
    summary["counters_I"] = sI.counters()
    summary["counters_II"] = sII.counters()
    sys.stdout.write(_dump(summary))
    _emit_trace(trace, cfg)
    return 0


def cmd_verify(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    kind = resolve_kind(cfg)
    payoff = build_payoff(cfg.payoff, resolve_tree(cfg))
    sI = build_strategy_i(cfg.player_i, cfg)
    sII = build_strategy_ii(cfg.player_ii, cfg)
    if not (sI.finite_state and sII.finite_state):
        raise ConfigError(
            "verify needs both strategies to declare finite state; "
            "use play for declared-unbounded strategies")
    verdict = exact_verdict(kind, sI, sII, payoff, cap=cfg.cap)
    vj = verdict.to_json_dict()
    if verdict.fault is not None:
        sys.stderr.write(_dump({"fault": vj["fault"]}))
    sys.stdout.write(_dump(vj))
    if cfg.out_dir is not None:
        _write(cfg.out_dir, "verdict.json", _dump(vj))
    return 0 if verdict.exact else 1


_STAGES = ("from-automaton", "regularize", "discretize", "construct_u")


def build_pipeline(pipe: dict, tree: TreeSpec):
    """Resolve a pipeline spec to (family, construction state, target fn)."""
    if "op" in pipe:
        for key in ("left", "right"):
            if key not in pipe:
                raise ConfigError(f"algebra pipeline needs {key!r}")
        try:
            af = algebra(resolve_automaton(pipe["left"]),
                         resolve_automaton(pipe["right"]), pipe["op"], tree)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        return af.family, af.state, af.expected_on
    stages = pipe.get("stages") or []
    if not stages:
        raise ConfigError("empty pipeline: declare 'stages' or an algebra 'op'")
    unknown = [s for s in stages if s not in _STAGES]
    if unknown:
        raise ConfigError(f"unknown pipeline stages: {', '.join(unknown)}")
    order = [_STAGES.index(s) for s in stages]
    if order != sorted(order) or len(set(order)) != len(order):
        raise ConfigError(f"stages must follow the order {_STAGES}")
    if "from-automaton" not in stages or "construct_u" not in stages:
        raise ConfigError("stages must include from-automaton and construct_u")
    if "source" not in pipe:
        raise ConfigError("pipeline needs a 'source' automaton")
    u = resolve_automaton(pipe["source"])
    fam = family_from_automaton(u, tree)
    # machine-derived levels are already non-increasing, so the regularize
    # stage is accepted as a no-op on this path
    if "discretize" in stages:
        fam = discretize(fam)
    try:
        state = ConstructionState(fam)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return fam, state, None


def _declared_corpus(pipe: dict, tree: TreeSpec):
    decl = pipe.get("branch_corpus")
    if decl is not None:
        try:
            ms, mc = int(decl["max_stem"]), int(decl["max_cycle"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(
                "branch_corpus needs integer max_stem and max_cycle") from None
        alphabet = tree.alphabet if tree.alphabet is not None else (0, 1)
        return branch_corpus(ms, mc, alphabet)
    # default: every stem to depth 3 with each single-letter cycle
    alphabet = tree.alphabet if tree.alphabet is not None else (0, 1)
    stems = [()]
    layer = [()]
    for _ in range(3):
        layer = [s + (a,) for s in layer for a in alphabet]
        stems.extend(layer)
    return [EventuallyPeriodicBranch(s, (a,)) for s in stems for a in alphabet]


def cmd_construct(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if cfg.pipeline is None:
        raise ConfigError("construct needs a 'pipeline' section in the config")
    tree = resolve_tree(cfg)
    fam, state, target = build_pipeline(cfg.pipeline, tree)
    corpus = _declared_corpus(cfg.pipeline, tree)
    report = verify_construction(fam, corpus, target_fn=target)
    machine = minimize_labeling(state, tree)
    if machine is not None:
        function_json = {"automaton": machine.to_json_dict()}
        note = f"minimized to {machine.num_states} state(s)"
    else:
        function_json = {"oracle": {"pipeline": cfg.pipeline,
                                    "tree": cfg.tree},
                         "note": "no finite realization found; evaluate "
                                 "through eval/play against this pipeline"}
        note = "exported as an oracle handle"
    report_json = {
        "label": report.label,
        "summary": report.summary(),
        "max_level_scan": report.max_scan,
        "rows": [{
            "branch": str(r.branch),
            "expected": None if r.expected is None else str(r.expected),
            "got": None if r.got is None else str(r.got),
            "equal": r.equal,
            "inconclusive": r.inconclusive,
        } for r in report.rows],
    }
    if cfg.out_dir is not None:
        _write(cfg.out_dir, "function.json", _dump(function_json))
        _write(cfg.out_dir, "report.json", _dump(report_json))
    print(report.summary())
    print(note)
    for r in report.rows:
        if r.inconclusive:
            print(f"inconclusive at branch {r.branch}: labels did not settle",
                  file=sys.stderr)
    ok = report.all_equal and report.inconclusive_count == 0
    return 0 if ok else 1


def cmd_suite(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    results = run_all(seed)
    for r in results:
        print(r.line())
    passed = sum(1 for r in results if r.passed)
    total = sum(r.seconds for r in results)
    print(f"{passed}/{len(results)} criteria passed in {total:.2f}s "
          f"(seed {seed})")
    if args.out is not None:
        payload = {
            "seed": seed,
            "results": [{
                "name": r.name, "passed": r.passed, "details": r.details,
                "checks": r.count, "seconds": round(r.seconds, 4),
                "budget": r.budget,
            } for r in results],
        }
        _write(args.out, "acceptance.json", _dump(payload))
    return 0 if passed == len(results) else 1


# ---------------------------------------------------------------------------
# argument surface

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limsup-games",
        description="Exact simulation and verification of limsup-payoff "
                    "games on pruned trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser(
        "eval", help="evaluate a machine's limsup on an eventually periodic "
                     "branch")
    p_eval.add_argument("automaton", help="machine JSON file")
    p_eval.add_argument("branch", help="branch descriptor, e.g. "
                                       "'stem=0,1;cycle=1,0'")
    p_eval.set_defaults(func=cmd_eval)

    def common(p, trace=True):
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("--cap", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        if trace:
            p.add_argument("--trace", choices=_TRACE_FORMATS, default=None)

    p_play = sub.add_parser("play", help="run one game and record the trace")
    common(p_play)
    p_play.set_defaults(func=cmd_play)

    p_verify = sub.add_parser(
        "verify", help="play to an exact lasso-certified verdict")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_construct = sub.add_parser(
        "construct", help="run a labeling pipeline and verify it on a "
                          "branch corpus")
    common(p_construct, trace=False)
    p_construct.set_defaults(func=cmd_construct)

    p_suite = sub.add_parser("suite", help="run the acceptance criteria")
    p_suite.add_argument("--seed", type=int, default=None)
    p_suite.add_argument("--out", default=None, help="report directory")
    p_suite.set_defaults(func=cmd_suite)

    return parser


def entry(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


def main() -> None:
    sys.exit(entry())


if __name__ == "__main__":
    main()
