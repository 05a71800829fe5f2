"""Command-line experiment driver: JSON config in, CSV results out.

A config file describes one experiment: a topology (generated or loaded),
a workload, one or more policies, an optional parameter sweep, and how many
replicate runs per cell. The driver writes ``runs.csv`` (one row per run)
and ``summary.csv`` (mean and sample standard deviation per sweep-value x
policy cell) into the output directory, printing a one-line digest per cell.
Identical configs produce byte-identical CSV files.

Config example::

    {
      "topology": {"kind": "grid", "rows": 4, "cols": 4,
                   "skr": 50.0, "edge_every": 4, "cpu": 8.0},
      "workload": {
        "arrival_rate": 4.0,
        "mean_holding": 1.0,
        "key_rate_dist": {"dist": "uniform", "low": 1.0, "high": 5.0},
        "cpu_dist": {"dist": "deterministic", "value": 1.0},
        "horizon": 500.0,
        "seed": 20240901
      },
      "policies": ["greedy_first_fit", "best_fit"],
      "k": 3,
      "n_runs": 5,
      "sweep": {"param": "arrival_rate", "values": [2.0, 4.0, 8.0]},
      "output": "results"
    }

Topology kinds: ``grid`` (rows x cols lattice, an edge node at every
``edge_every``-th node in row-major order from node 0), ``ring`` (cycle of
``n`` nodes with ``n_edges`` evenly spaced edge nodes), ``file`` (path to a
topology JSON, resolved relative to the config file), or ``inline`` (the
topology JSON fields directly). Topology JSON format::

    {"nodes": [0, 1], "links": [{"a": 0, "b": 1, "skr": 10.0}],
     "edges": [{"node": 1, "cpu": 4.0}]}

Distribution specs: ``{"dist": "deterministic", "value": v}``,
``{"dist": "uniform", "low": a, "high": b}``, or
``{"dist": "exponential", "mean": m}``. The optional workload
``attachment_dist`` adds ``{"dist": "fixed", "node": i}`` and
``{"dist": "weighted", "weights": [...]}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .model import EdgeNode, QkdLink, QkdTopology
from .oracle import ORACLE_LIMIT, OfflineInstance, offline_optimum
from .policies import PolicyId
from .simulate import AttachmentDist, Dist, WorkloadSpec, generate_trace, run

RUNS_HEADER = (
    "sweep_param,sweep_value,policy,run_index,seed,offered,accepted,"
    "acceptance_ratio,carried_key_rate,cpu_utilization,skr_utilization,"
    "mean_path_hops"
)
SWEEP_PARAMS = ("arrival_rate", "k", "skr_scale", "cpu_scale")
_METRIC_NAMES = (
    "offered",
    "accepted",
    "acceptance_ratio",
    "carried_key_rate",
    "cpu_utilization",
    "skr_utilization",
    "mean_path_hops",
)


class ConfigError(ValueError):
    """A config or topology file failed validation."""


def _fmt(v: float) -> str:
    """Float field format for runs.csv: 9 significant digits."""
    return format(float(v), ".9g")


def _check_keys(obj: dict, allowed, where: str) -> None:
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}; allowed: {sorted(allowed)}")


def _require(obj: dict, field: str, where: str):
    if field not in obj:
        raise ConfigError(f"{where}.{field} is required")
    return obj[field]


def _as_dict(v, where: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(f"{where} must be an object, got {type(v).__name__}")
    return v


def _as_list(v, where: str) -> list:
    if not isinstance(v, list):
        raise ConfigError(f"{where} must be an array, got {type(v).__name__}")
    return v


def _as_str(v, where: str) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"{where} must be a string, got {type(v).__name__}")
    return v


def _as_number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number, got {type(v).__name__}")
    return float(v)


def _as_int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where} must be an integer, got {type(v).__name__}")
    return v


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e


def parse_dist(obj, where: str) -> Dist:
    d = _as_dict(obj, where)
    kind = _as_str(_require(d, "dist", where), f"{where}.dist").lower()
    try:
        if kind == "deterministic":
            _check_keys(d, ("dist", "value"), where)
            return Dist.deterministic(_as_number(_require(d, "value", where), f"{where}.value"))
        if kind == "uniform":
            _check_keys(d, ("dist", "low", "high"), where)
            return Dist.uniform(
                _as_number(_require(d, "low", where), f"{where}.low"),
                _as_number(_require(d, "high", where), f"{where}.high"),
            )
        if kind == "exponential":
            _check_keys(d, ("dist", "mean"), where)
            return Dist.exponential(_as_number(_require(d, "mean", where), f"{where}.mean"))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"{where}: {e}") from e
    raise ConfigError(f"{where}.dist: unknown distribution {kind!r}")


def parse_attachment(obj, where: str) -> AttachmentDist:
    d = _as_dict(obj, where)
    kind = _as_str(_require(d, "dist", where), f"{where}.dist").lower()
    try:
        if kind == "uniform":
            _check_keys(d, ("dist",), where)
            return AttachmentDist.uniform()
        if kind == "fixed":
            _check_keys(d, ("dist", "node"), where)
            return AttachmentDist.fixed(_as_int(_require(d, "node", where), f"{where}.node"))
        if kind == "weighted":
            _check_keys(d, ("dist", "weights"), where)
            weights = _as_list(_require(d, "weights", where), f"{where}.weights")
            return AttachmentDist.weighted(
                [_as_number(w, f"{where}.weights[{i}]") for i, w in enumerate(weights)]
            )
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"{where}: {e}") from e
    raise ConfigError(f"{where}.dist: unknown attachment distribution {kind!r}")


def parse_workload(obj, where: str = "workload") -> WorkloadSpec:
    d = _as_dict(obj, where)
    _check_keys(
        d,
        ("arrival_rate", "mean_holding", "key_rate_dist", "cpu_dist", "attachment_dist", "horizon", "seed"),
        where,
    )
    try:
        return WorkloadSpec(
            arrival_rate=_as_number(_require(d, "arrival_rate", where), f"{where}.arrival_rate"),
            mean_holding=_as_number(_require(d, "mean_holding", where), f"{where}.mean_holding"),
            key_rate_dist=parse_dist(_require(d, "key_rate_dist", where), f"{where}.key_rate_dist"),
            cpu_dist=parse_dist(_require(d, "cpu_dist", where), f"{where}.cpu_dist"),
            horizon=_as_number(_require(d, "horizon", where), f"{where}.horizon"),
            seed=_as_int(_require(d, "seed", where), f"{where}.seed"),
            attachment_dist=(
                parse_attachment(d["attachment_dist"], f"{where}.attachment_dist")
                if "attachment_dist" in d
                else AttachmentDist.uniform()
            ),
        )
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"{where}: {e}") from e


def _topology_from_obj(d: dict, where: str) -> QkdTopology:
    _check_keys(d, ("nodes", "links", "edges"), where)
    nodes = tuple(
        _as_int(n, f"{where}.nodes[{i}]")
        for i, n in enumerate(_as_list(_require(d, "nodes", where), f"{where}.nodes"))
    )
    links = []
    for i, lo in enumerate(_as_list(d.get("links", []), f"{where}.links")):
        ld = _as_dict(lo, f"{where}.links[{i}]")
        _check_keys(ld, ("a", "b", "skr"), f"{where}.links[{i}]")
        links.append(
            QkdLink(
                _as_int(_require(ld, "a", f"{where}.links[{i}]"), f"{where}.links[{i}].a"),
                _as_int(_require(ld, "b", f"{where}.links[{i}]"), f"{where}.links[{i}].b"),
                _as_number(_require(ld, "skr", f"{where}.links[{i}]"), f"{where}.links[{i}].skr"),
            )
        )
    edges = []
    for i, eo in enumerate(_as_list(_require(d, "edges", where), f"{where}.edges")):
        ed = _as_dict(eo, f"{where}.edges[{i}]")
        _check_keys(ed, ("node", "cpu"), f"{where}.edges[{i}]")
        edges.append(
            EdgeNode(
                _as_int(_require(ed, "node", f"{where}.edges[{i}]"), f"{where}.edges[{i}].node"),
                _as_number(_require(ed, "cpu", f"{where}.edges[{i}]"), f"{where}.edges[{i}].cpu"),
            )
        )
    try:
        return QkdTopology(nodes=nodes, links=tuple(links), edges=tuple(edges))
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


def _grid_topology(d: dict, where: str) -> QkdTopology:
    _check_keys(d, ("kind", "rows", "cols", "skr", "edge_every", "cpu"), where)
    rows = _as_int(_require(d, "rows", where), f"{where}.rows")
    cols = _as_int(_require(d, "cols", where), f"{where}.cols")
    skr = _as_number(_require(d, "skr", where), f"{where}.skr")
    edge_every = _as_int(_require(d, "edge_every", where), f"{where}.edge_every")
    cpu = _as_number(_require(d, "cpu", where), f"{where}.cpu")
    if rows < 1 or cols < 1:
        raise ConfigError(f"{where}: grid needs rows >= 1 and cols >= 1")
    if edge_every < 1:
        raise ConfigError(f"{where}.edge_every must be >= 1")
    n = rows * cols
    links = []
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                links.append(QkdLink(node, node + 1, skr))
            if r + 1 < rows:
                links.append(QkdLink(node, node + cols, skr))
    edges = tuple(EdgeNode(i, cpu) for i in range(0, n, edge_every))
    try:
        return QkdTopology(nodes=tuple(range(n)), links=tuple(links), edges=edges)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


def _ring_topology(d: dict, where: str) -> QkdTopology:
    _check_keys(d, ("kind", "n", "skr", "n_edges", "cpu"), where)
    n = _as_int(_require(d, "n", where), f"{where}.n")
    skr = _as_number(_require(d, "skr", where), f"{where}.skr")
    n_edges = _as_int(_require(d, "n_edges", where), f"{where}.n_edges")
    cpu = _as_number(_require(d, "cpu", where), f"{where}.cpu")
    if n < 3:
        raise ConfigError(f"{where}.n must be >= 3 for a ring, got {n}")
    if not 1 <= n_edges <= n:
        raise ConfigError(f"{where}.n_edges must be in [1, {n}], got {n_edges}")
    links = tuple(QkdLink(i, (i + 1) % n, skr) for i in range(n))
    edges = tuple(EdgeNode(i * n // n_edges, cpu) for i in range(n_edges))
    try:
        return QkdTopology(nodes=tuple(range(n)), links=links, edges=edges)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


def build_topology(spec, base_dir: str = ".", where: str = "topology") -> QkdTopology:
    """Build a topology from a config value: generator dict, inline dict, or file path."""
    if isinstance(spec, str):
        return _topology_from_obj(_load_json(os.path.join(base_dir, spec)), spec)
    d = _as_dict(spec, where)
    if "kind" not in d:
        return _topology_from_obj(d, where)
    kind = _as_str(d["kind"], f"{where}.kind").lower()
    if kind == "grid":
        return _grid_topology(d, where)
    if kind == "ring":
        return _ring_topology(d, where)
    if kind == "file":
        _check_keys(d, ("kind", "path"), where)
        path = os.path.join(base_dir, _as_str(_require(d, "path", where), f"{where}.path"))
        return _topology_from_obj(_load_json(path), path)
    if kind == "inline":
        inner = {k: v for k, v in d.items() if k != "kind"}
        return _topology_from_obj(inner, where)
    raise ConfigError(f"{where}.kind: unknown topology kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully parsed experiment: topology, workload, policies, sweep, output."""

    topology: QkdTopology
    workload: WorkloadSpec
    policies: tuple[PolicyId, ...]
    k: int
    n_runs: int
    sweep_param: str | None
    sweep_values: tuple[float, ...]
    warmup_fraction: float
    score_weights: tuple[float, float]
    output: str | None


def parse_config(obj: dict, base_dir: str = ".") -> ExperimentConfig:
    d = _as_dict(obj, "config")
    _check_keys(
        d,
        ("topology", "workload", "policies", "k", "n_runs", "sweep", "warmup_fraction", "score_weights", "output"),
        "config",
    )
    topology = build_topology(_require(d, "topology", "config"), base_dir)
    workload = parse_workload(_require(d, "workload", "config"))

    raw_policies = _as_list(_require(d, "policies", "config"), "policies")
    if not raw_policies:
        raise ConfigError("policies must name at least one policy")
    try:
        policies = tuple(PolicyId.parse(_as_str(p, f"policies[{i}]")) for i, p in enumerate(raw_policies))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"policies: {e}") from e

    k = _as_int(d.get("k", 3), "k")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    n_runs = _as_int(d.get("n_runs", 1), "n_runs")
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")

    sweep_param = None
    sweep_values: tuple[float, ...] = ()
    if "sweep" in d:
        sd = _as_dict(d["sweep"], "sweep")
        _check_keys(sd, ("param", "values"), "sweep")
        sweep_param = _as_str(_require(sd, "param", "sweep"), "sweep.param").lower()
        if sweep_param not in SWEEP_PARAMS:
            raise ConfigError(f"sweep.param must be one of {SWEEP_PARAMS}, got {sweep_param!r}")
        values = _as_list(_require(sd, "values", "sweep"), "sweep.values")
        if not values:
            raise ConfigError("sweep.values must be non-empty")
        parsed = []
        for i, v in enumerate(values):
            if sweep_param == "k":
                parsed.append(float(_as_int(v, f"sweep.values[{i}]")))
            else:
                parsed.append(_as_number(v, f"sweep.values[{i}]"))
            if parsed[-1] <= 0:
                raise ConfigError(f"sweep.values[{i}] must be > 0, got {v}")
        sweep_values = tuple(parsed)

    warmup_fraction = _as_number(d.get("warmup_fraction", 0.1), "warmup_fraction")
    if not 0.0 <= warmup_fraction < 1.0:
        raise ConfigError(f"warmup_fraction must be in [0, 1), got {warmup_fraction}")

    weights = _as_list(d.get("score_weights", [1.0, 1.0]), "score_weights")
    if len(weights) != 2:
        raise ConfigError("score_weights must be [w_cpu, w_key]")
    score_weights = (
        _as_number(weights[0], "score_weights[0]"),
        _as_number(weights[1], "score_weights[1]"),
    )
    if score_weights[0] < 0 or score_weights[1] < 0:
        raise ConfigError("score_weights must be >= 0")

    output = _as_str(d["output"], "output") if "output" in d else None
    return ExperimentConfig(
        topology=topology,
        workload=workload,
        policies=policies,
        k=k,
        n_runs=n_runs,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        warmup_fraction=warmup_fraction,
        score_weights=score_weights,
        output=output,
    )


def load_config(
    path: str, seed_override: int | None = None, output_override: str | None = None
) -> ExperimentConfig:
    """Read and validate a config file, applying CLI overrides."""
    config = parse_config(_load_json(path), base_dir=os.path.dirname(os.path.abspath(path)))
    if seed_override is not None:
        try:
            config = replace(config, workload=replace(config.workload, seed=seed_override))
        except ValueError as e:
            raise ConfigError(f"--seed: {e}") from e
    if output_override is not None:
        config = replace(config, output=output_override)
    return config


def _apply_sweep(
    config: ExperimentConfig, value: float | None
) -> tuple[QkdTopology, WorkloadSpec, int]:
    topology, workload, k = config.topology, config.workload, config.k
    if value is None or config.sweep_param is None:
        return topology, workload, k
    if config.sweep_param == "arrival_rate":
        workload = replace(workload, arrival_rate=value)
    elif config.sweep_param == "k":
        k = int(value)
    elif config.sweep_param == "skr_scale":
        topology = topology.scaled(skr_scale=value)
    else:
        topology = topology.scaled(cpu_scale=value)
    return topology, workload, k


def run_experiment(config: ExperimentConfig, oracle: bool = False, verbose: bool = False) -> int:
    """Execute every sweep value x policy x run, write CSVs, print cell digests."""
    if config.output is None:
        raise ConfigError("no output directory: set 'output' in the config or pass --output")
    os.makedirs(config.output, exist_ok=True)

    header = RUNS_HEADER + (",offline_optimum" if oracle else "")
    run_lines = [header]
    summary_lines = [
        "sweep_param,sweep_value,policy,n_runs,"
        + ",".join(f"{m}_mean,{m}_std" for m in _METRIC_NAMES)
    ]

    if verbose:
        t = config.topology
        print(
            f"topology: {t.n_nodes} nodes, {len(t.links)} links, {len(t.edges)} edge nodes; "
            f"policies: {', '.join(p.value for p in config.policies)}; "
            f"k={config.k} n_runs={config.n_runs}"
        )

    for value in config.sweep_values or (None,):
        topo_v, wl_v, k_v = _apply_sweep(config, value)
        sweep_cols = (config.sweep_param or "", _fmt(value) if value is not None else "")
        oracle_by_run: dict[int, str] = {}
        for policy in config.policies:
            cell = []
            for i in range(config.n_runs):
                seed_i = wl_v.seed + i
                spec_i = replace(wl_v, seed=seed_i)
                trace = generate_trace(topo_v, spec_i)
                metrics, _ = run(
                    topo_v,
                    trace,
                    policy,
                    k_v,
                    seed_i,
                    warmup_fraction=config.warmup_fraction,
                    score_weights=config.score_weights,
                )
                fields = [
                    sweep_cols[0],
                    sweep_cols[1],
                    policy.value,
                    str(i),
                    str(seed_i),
                    str(metrics.offered),
                    str(metrics.accepted),
                    _fmt(metrics.acceptance_ratio),
                    _fmt(metrics.carried_key_rate),
                    _fmt(metrics.cpu_utilization),
                    _fmt(metrics.skr_utilization),
                    _fmt(metrics.mean_path_hops),
                ]
                if oracle:
                    if i not in oracle_by_run:
                        if trace.n <= ORACLE_LIMIT:
                            best, _ = offline_optimum(
                                OfflineInstance(topo_v, tuple(trace.requests()))
                            )
                            oracle_by_run[i] = str(best)
                        else:
                            oracle_by_run[i] = ""
                    fields.append(oracle_by_run[i])
                run_lines.append(",".join(fields))
                # summary aggregates what runs.csv readers will see, so parse
                # the printed fields back rather than reusing full precision
                cell.append([float(x) for x in fields[5:12]])
                if verbose:
                    print(
                        f"  run {i}: seed={seed_i} offered={metrics.offered} "
                        f"accepted={metrics.accepted} ratio={metrics.acceptance_ratio:.4f}"
                    )
            arr = np.asarray(cell)
            means = arr.mean(axis=0)
            stds = arr.std(axis=0, ddof=1) if len(cell) > 1 else np.zeros(arr.shape[1])
            summary_lines.append(
                ",".join(
                    [sweep_cols[0], sweep_cols[1], policy.value, str(config.n_runs)]
                    + [repr(float(x)) for pair in zip(means, stds) for x in pair]
                )
            )
            label = f"{config.sweep_param}={sweep_cols[1]} " if value is not None else ""
            print(
                f"{label}{policy.value}: n_runs={config.n_runs} "
                f"acceptance={means[2]:.4f}±{stds[2]:.4f} cpu_util={means[4]:.4f} "
                f"skr_util={means[5]:.4f} hops={means[6]:.3f}"
            )

    for name, lines in (("runs.csv", run_lines), ("summary.csv", summary_lines)):
        with open(os.path.join(config.output, name), "w", newline="") as f:
            f.write("\n".join(lines) + "\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qkdadmit",
        description="Admission-control simulation experiments on QKD-secured edge networks.",
    )
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--output", help="output directory (overrides config)")
    parser.add_argument(
        "--oracle",
        action="store_true",
        help="add an offline_optimum column where instances are small enough",
    )
    parser.add_argument("--verbose", action="store_true", help="per-run progress output")
    parser.add_argument("--seed", type=int, help="override the workload seed")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, seed_override=args.seed, output_override=args.output)
        return run_experiment(config, oracle=args.oracle, verbose=args.verbose)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
