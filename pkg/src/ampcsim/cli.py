"""Command-line harness: generate or load a graph, run an algorithm, check it, report.

Generator specs use ``name:key=val,...``:

  random:n=1000,m=5000[,seed=1]   uniform simple graph
  two-cycles:k=1000               two disjoint k-cycles
  path:n=100                      path on n vertices
  tree:n=100[,seed=1]             random recursive tree
  star:n=100                      star with center 0
  grid:rows=10,cols=20            rows x cols grid

Compare CSV columns, in this order:
  algorithm,rounds,shuffles,total_queries,bytes_shuffled,bytes_kv,result,check

Exit codes: 0 when every check passed or was skipped, 2 when a check failed,
1 on any error (the JSON report then carries an "error" field).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import graph as G
from . import oracles, ranks
from .baselines import mpc_cycle_cc, mpc_mis_rootset, mpc_mm_rootset, mpc_msf_boruvka
from .errors import AmpcError, ConfigError, InputMismatch
from .matching import ampc_mis, ampc_mm_constant, ampc_mm_loglog
from .msf import connectivity, dense_msf, kkt_msf, msf, msf_empirical
from .runtime import Runtime, RuntimeConfig
from .twocycle import ampc_two_cycle

SCHEMA = 1
CSV_COLUMNS = ["algorithm", "rounds", "shuffles", "total_queries", "bytes_shuffled",
               "bytes_kv", "result", "check"]

MSF_ALGS = ("msf", "kkt-msf", "msf-empirical", "dense-msf", "mpc-msf")
MIS_ALGS = ("mis", "mpc-mis")
MM_ALGS = ("mm", "mm-loglog", "mpc-mm")
CYCLE_ALGS = ("two-cycle", "mpc-cycle")
ALGORITHMS = MSF_ALGS + MIS_ALGS + MM_ALGS + CYCLE_ALGS + ("connectivity",)
WEIGHTINGS = ("auto", "random", "degree", "eid", "none")


# ----------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    algorithm: str
    input_path: str | None = None
    generator: str | None = None
    eps: float = 0.5
    machines: int | None = None
    space: int | None = None
    quota_slack: int = 8
    seed: int = 0
    caching: bool = True
    small_threshold: int = 50_000
    weights: str = "auto"
    sample_prob: float | None = None
    output: str | None = None
    result_path: str | None = None
    verify: bool = False
    plant_bug: bool = False

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; "
                              f"choose from {', '.join(ALGORITHMS)}")
        if (self.input_path is None) == (self.generator is None):
            raise ConfigError("give exactly one of --input and --gen")
        if self.weights not in WEIGHTINGS:
            raise ConfigError(f"unknown weighting {self.weights!r}")
        self.runtime_config().validate()

    def runtime_config(self) -> RuntimeConfig:
        return RuntimeConfig(eps=self.eps, space=self.space, quota_slack=self.quota_slack,
                             seed=self.seed, caching=self.caching, machines=self.machines,
                             small_threshold=self.small_threshold)

    def source(self) -> str:
        return self.input_path if self.input_path is not None else f"gen:{self.generator}"


@dataclass
class RunReport:
    config: dict
    graph: dict
    metrics: dict
    phases: list
    result: dict
    verdict: str
    wall_time: float
    schema: int = SCHEMA
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = asdict(self)
        extra = out.pop("extra")
        out.update(extra)
        return out

    def dumps(self) -> str:
        return dumps(self.to_json())


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ----------------------------------------------------------------------
# graphs


_GEN_PARAMS = {
    "random": ("n", "m", "seed"),
    "two-cycles": ("k",),
    "path": ("n",),
    "tree": ("n", "seed"),
    "star": ("n",),
    "grid": ("rows", "cols"),
}


def parse_generator(spec: str):
    """``name:key=val,...`` into ``(name, params)``; values are integers."""
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name not in _GEN_PARAMS:
        raise ConfigError(f"unknown generator {name!r}; choose from {', '.join(_GEN_PARAMS)}")
    params = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = part.partition("=")
        if not eq:
            raise ConfigError(f"generator parameter {part!r} is not key=val")
        if key not in _GEN_PARAMS[name]:
            raise ConfigError(f"generator {name!r} takes {', '.join(_GEN_PARAMS[name])}, "
                              f"not {key!r}")
        try:
            params[key] = int(float(val)) if "e" in val.lower() else int(val)
        except ValueError:
            raise ConfigError(f"generator parameter {key}={val!r} is not an integer") from None
    missing = [k for k in _GEN_PARAMS[name] if k != "seed" and k not in params]
    if missing:
        raise ConfigError(f"generator {name!r} needs {', '.join(missing)}")
    return name, params


def generate(spec: str, seed: int = 0):
    """Build a graph from a generator spec. Returns ``(graph, descriptor)``."""
    name, params = parse_generator(spec)
    gseed = params.get("seed", seed)
    if name == "random":
        g = G.generate_random(params["n"], params["m"], seed=gseed)
    elif name == "two-cycles":
        g = G.generate_two_cycles(params["k"])
    elif name == "path":
        g = G.generate_path(params["n"])
    elif name == "tree":
        g = G.generate_tree(params["n"], seed=gseed)
    elif name == "star":
        g = G.generate_star(params["n"])
    else:
        g = G.generate_grid(params["rows"], params["cols"])
    desc = {"generator": name, "params": {k: v for k, v in params.items() if k != "seed"},
            "seed": gseed}
    return g, desc


def load_graph(cfg: RunConfig):
    if cfg.input_path is not None:
        stats = G.LoadStats()
        g = G.load_edge_list(cfg.input_path, stats)
        desc = {"path": cfg.input_path, "duplicates_dropped": stats.duplicates,
                "self_loops_dropped": stats.self_loops}
    else:
        g, desc = generate(cfg.generator, cfg.seed)
    return _weigh(g, cfg), desc


def _weigh(g, cfg: RunConfig):
    mode = cfg.weights
    if mode == "auto":
        if g.is_weighted or cfg.algorithm not in MSF_ALGS + ("connectivity",):
            return g
        mode = "random"
    if mode == "random":
        return G.random_weights(g, seed=cfg.seed)
    if mode == "degree":
        return G.degree_weights(g)
    if mode == "eid":
        return G.eid_weights(g)
    return g


# ----------------------------------------------------------------------
# running


def _execute(cfg: RunConfig, g, rt: Runtime):
    """Run the algorithm. Returns ``(kind, payload, metrics, phases, info)``."""
    alg = cfg.algorithm
    seed = cfg.seed
    phases = []
    if alg in MSF_ALGS:
        if alg == "msf":
            res = msf(g, runtime=rt)
        elif alg == "kkt-msf":
            res = kkt_msf(g, runtime=rt)
        elif alg == "msf-empirical":
            res = msf_empirical(g, runtime=rt)
        elif alg == "dense-msf":
            start = rt.metrics.copy()
            d = dense_msf(g, runtime=rt)
            return "msf", np.sort(d.edges), rt.metrics.minus(start), [], {"phases": d.phases}
        else:
            res, log = mpc_msf_boruvka(g, runtime=rt, seed=seed)
            phases = log.to_json()
        return "msf", res.edges, res.metrics, phases, res.info
    if alg == "connectivity":
        start = rt.metrics.copy()
        cm = connectivity(g, runtime=rt)
        return "cc", cm.canonical(), rt.metrics.minus(start), [], {}
    if alg in MIS_ALGS:
        rank = ranks.vertex_ranks(g.n, seed)
        if alg == "mis":
            res = ampc_mis(g, rank=rank, runtime=rt, seed=seed)
            info = {"iterations": res.iterations,
                    "truncated_per_iteration": res.truncated_per_iteration}
        else:
            res, log = mpc_mis_rootset(g, rank=rank, runtime=rt, seed=seed)
            phases, info = log.to_json(), {"phases": res.iterations}
        return "mis", res.in_set, res.metrics, phases, info
    if alg in MM_ALGS:
        rank = ranks.edge_ranks(g.eid, seed)
        if alg == "mm":
            res = ampc_mm_constant(g, rank=rank, runtime=rt, seed=seed)
        elif alg == "mm-loglog":
            res = ampc_mm_loglog(g, rank=rank, runtime=rt, seed=seed)
        else:
            res, log = mpc_mm_rootset(g, rank=rank, runtime=rt, seed=seed)
            phases = log.to_json()
        info = dict(res.info)
        info["iterations"] = res.iterations
        return "mm", res.edges, res.metrics, phases, info
    if alg == "two-cycle":
        res = ampc_two_cycle(g, sample_prob=cfg.sample_prob, runtime=rt, seed=seed)
        return "cycles", res.components, res.metrics, [], res.summary()
    start = rt.metrics.copy()
    count, log = mpc_cycle_cc(g, runtime=rt, seed=seed)
    return "cycles", count, rt.metrics.minus(start), log.to_json(), {}


def _plant(kind, payload, g):
    """Corrupt a result on purpose so that verification has something to catch."""
    if kind == "msf":
        chosen = set(np.asarray(payload).tolist())
        others = [e for e in g.eid.tolist() if e not in chosen]
        if others:
            return np.sort(np.array(sorted(chosen) + [others[0]], dtype=np.int64))
        return np.asarray(payload)[1:]
    if kind == "mis":
        out = np.array(payload, copy=True)
        if len(out):
            out[0] = ~out[0]
        return out
    if kind == "mm":
        return np.asarray(payload)[1:] if len(payload) else np.array([0], dtype=np.int64)
    if kind == "cc":
        out = np.array(payload, copy=True)
        if len(out):
            out[0] = out.max() + 1
        return out
    return payload + 1


def _check(kind, payload, g, seed) -> bool:
    if kind == "msf":
        return np.array_equal(np.sort(payload), oracles.kruskal(g))
    if kind == "cc":
        return oracles.same_partition(payload, oracles.union_find_cc(g))
    if kind == "mis":
        return np.array_equal(payload, oracles.seq_greedy_mis(g, ranks.vertex_ranks(g.n, seed)))
    if kind == "mm":
        return np.array_equal(np.sort(payload),
                              oracles.seq_greedy_mm(g, ranks.edge_ranks(g.eid, seed)))
    return int(payload) == len(np.unique(oracles.union_find_cc(g)))


def _summarize(kind, payload, g) -> dict:
    if kind == "msf":
        w = int(g.weight[g.edge_index_of(payload)].sum()) if g.is_weighted and len(payload) else 0
        return {"num_edges": len(payload), "total_weight": w,
                "num_components": g.n - len(payload)}
    if kind == "cc":
        return {"num_components": len(np.unique(payload))}
    if kind == "mis":
        return {"size": int(np.sum(payload))}
    if kind == "mm":
        return {"size": len(payload)}
    return {"components": int(payload)}


def _short(kind, summary) -> str:
    key = {"msf": "total_weight", "cc": "num_components", "mis": "size", "mm": "size",
           "cycles": "components"}[kind]
    return f"{key}={summary[key]}"


def _write_result(path, kind, payload, g):
    if kind == "msf":
        G.save_edge_list(g, path, eids=payload)
        return
    if kind == "mis":
        vals = np.flatnonzero(payload)
    elif kind in ("mm", "cc"):
        vals = np.asarray(payload)
    else:
        vals = np.array([payload])
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in vals)


def run(cfg: RunConfig, graph_and_desc=None) -> RunReport:
    """Execute one configuration and build its report (no files written)."""
    cfg.validate()
    t0 = time.perf_counter()
    g, desc = graph_and_desc if graph_and_desc is not None else load_graph(cfg)
    rt = Runtime(g.n, cfg.runtime_config())
    kind, payload, metrics, phases, info = _execute(cfg, g, rt)
    if cfg.plant_bug:
        payload = _plant(kind, payload, g)
    verdict = "skipped"
    if cfg.verify:
        verdict = "pass" if _check(kind, payload, g, cfg.seed) else "fail"
    summary = _summarize(kind, payload, g)
    summary["info"] = info
    graph = {"n": g.n, "m": g.m, "weighted": g.is_weighted, "source": desc}
    report = RunReport(
        config=_plain(asdict(cfg)), graph=graph, metrics=metrics.to_json(), phases=phases,
        result=summary, verdict=verdict, wall_time=round(time.perf_counter() - t0, 6),
        extra={"S": rt.S, "quota": rt.quota_limit, "quota_events": rt.quota_events})
    report._kind, report._payload, report._graph = kind, payload, g
    return report


def compare(configs: list) -> list:
    """Run each configuration on the shared input; one CSV row (a dict) per run."""
    if not configs:
        return []
    sources = {(c.input_path, c.generator, c.seed, c.weights) for c in configs}
    if len(sources) != 1:
        raise InputMismatch("compared runs must share the same input, seed and weighting")
    gd = load_graph(configs[0])
    rows = []
    for cfg in configs:
        rep = run(cfg, gd)
        m = rep.metrics
        rows.append({
            "algorithm": cfg.algorithm + ("" if cfg.caching else ":cache=off"),
            "rounds": m["rounds"], "shuffles": m["shuffles"],
            "total_queries": m["total_queries"], "bytes_shuffled": m["bytes_shuffled"],
            "bytes_kv": m["bytes_kv"], "result": _short(rep._kind, rep.result),
            "check": rep.verdict,
        })
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ----------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 like every other error; 2 is reserved for failed checks
    def error(self, message):
        raise ConfigError(message)


def _add_common(p):
    p.add_argument("--input", dest="input_path", help="edge-list file ('u v [w]' per line)")
    p.add_argument("--gen", dest="generator", help="generator spec, e.g. random:n=1000,m=5000")
    p.add_argument("--eps", type=float, default=0.5, help="space exponent, S = ceil(n^eps)")
    p.add_argument("--machines", type=int, help="fixed machine count P for every round")
    p.add_argument("--space", type=int, help="explicit per-machine space S")
    p.add_argument("--quota-slack", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-cache", dest="caching", action="store_false",
                   help="disable per-machine lookup caching")
    p.add_argument("--small-threshold", type=int, default=50_000,
                   help="edge count that is finished in memory on one machine")
    p.add_argument("--weights", choices=WEIGHTINGS, default="auto",
                   help="edge weights for generated graphs (auto: random for MSF)")
    p.add_argument("--sample-prob", type=float, help="vertex sampling rate for two-cycle")
    p.add_argument("--verify", action="store_true", help="check the result against an oracle")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="ampcsim", description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 1)[1], formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one algorithm and print a JSON report",
                       epilog=__doc__.split("\n\n", 1)[1],
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("--alg", required=True, help=f"one of: {', '.join(ALGORITHMS)}")
    _add_common(r)
    r.add_argument("--out", dest="output", help="also write the JSON report here")
    r.add_argument("--result", dest="result_path",
                   help="write the result (edge list, ids or count) here")
    r.add_argument("--plant-bug", action="store_true",
                   help="corrupt the result before verification (oracle self-test)")

    c = sub.add_parser("compare", help="run several algorithms on one input; CSV table",
                       epilog=__doc__.split("\n\n", 1)[1],
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    c.add_argument("--alg", action="append", required=True,
                   help="repeatable; 'name' or 'name:cache=off'")
    _add_common(c)
    c.add_argument("--out", dest="output", help="write the CSV here instead of stdout")

    gp = sub.add_parser("gen", help="write a generated graph as an edge list")
    gp.add_argument("spec", help="generator spec, e.g. two-cycles:k=1000")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--weights", choices=("none", "random", "degree", "eid"), default="none")
    gp.add_argument("--out", required=True, help="edge-list path; a .json descriptor is added")
    return ap


def _config(ns, alg: str) -> RunConfig:
    name, _, opts = alg.partition(":")
    caching = ns.caching
    for part in filter(None, opts.split(",")):
        key, _, val = part.partition("=")
        if key != "cache" or val not in ("on", "off"):
            raise ConfigError(f"bad algorithm option {part!r}; only cache=on|off is known")
        caching = val == "on"
    return RunConfig(
        algorithm=name, input_path=ns.input_path, generator=ns.generator, eps=ns.eps,
        machines=ns.machines, space=ns.space, quota_slack=ns.quota_slack, seed=ns.seed,
        caching=caching, small_threshold=ns.small_threshold, weights=ns.weights,
        sample_prob=ns.sample_prob, output=getattr(ns, "output", None),
        result_path=getattr(ns, "result_path", None), verify=ns.verify,
        plant_bug=getattr(ns, "plant_bug", False))


def _emit(text: str, path: str | None, stdout):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    stdout.write(text)


def _error(exc: Exception, path, stdout) -> int:
    doc = {"schema": SCHEMA, "error": {"type": type(exc).__name__, "message": str(exc)}}
    _emit(dumps(doc), path, stdout)
    return 1


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        ns = build_parser().parse_args(argv)
    except ConfigError as exc:
        return _error(exc, None, stdout)
    out_path = getattr(ns, "output", None)
    try:
        if ns.command == "gen":
            g, desc = generate(ns.spec, ns.seed)
            if ns.weights != "none":
                g = _weigh(g, RunConfig("msf", generator=ns.spec, seed=ns.seed,
                                        weights=ns.weights))
            G.save_edge_list(g, ns.out)
            with open(ns.out + ".json", "w") as fh:
                fh.write(dumps(dict(desc, n=g.n, m=g.m, weights=ns.weights)))
            stdout.write(dumps({"schema": SCHEMA, "path": ns.out, "n": g.n, "m": g.m}))
            return 0
        if ns.command == "run":
            cfg = _config(ns, ns.alg)
            rep = run(cfg)
            if cfg.result_path:
                _write_result(cfg.result_path, rep._kind, rep._payload, rep._graph)
            _emit(rep.dumps(), cfg.output, stdout)
            return 2 if rep.verdict == "fail" else 0
        configs = [_config(ns, a) for a in ns.alg]
        rows = compare(configs)
        _emit(rows_to_csv(rows), out_path, stdout)
        return 2 if any(r["check"] == "fail" for r in rows) else 0
    except (AmpcError, ValueError, OSError) as exc:
        return _error(exc, out_path if ns.command != "compare" else None, stdout)


if __name__ == "__main__":
    sys.exit(main())
