"""Command-line entry point.

Subcommands: sample, verify, bench, partition, export.  Options come
from flags or a flat key=value config file; flags win.  Every run that
writes artifacts also writes run.json (parameters, counts, access
stats, artifact digests) and run.cfg, a config file that reproduces the
run byte for byte.

Exit codes: 0 success, 1 configuration error, 2 I/O or format error,
3 invariant violation (including verification mismatches).
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import kernels
from .algorithms import (clustergcn_batches, exhaustive_spec, fastgcn_spec,
                         graphsaint_rw_spec, khop_spec, ladies_spec,
                         random_walk_spec)
from .engine import Strategy, run_sampling, save_sampleset
from .errors import ConfigError, FormatError, InvariantError
from .gnn import (features_onehot, features_random, forward_full,
                  forward_minibatch, init_model, save_features)
from .graph import (induced_subgraph, is_cache_file, load_cache,
                    load_edge_list, partition_bfs, save_cache)
from .minibatch import (Block, MiniBatch, assemble, export_minibatch,
                        replication_factor)
from .prf import FORMAT_VERSION, STREAM_ROOTS, derive_stream, prf_draw

_TOLERANCE = 1e-6
_VERIFY_LIMIT = 10000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError("expected a boolean, got %r" % (text,))


def _ints(text):
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if not parts:
        raise ConfigError("expected a comma-separated integer list")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ConfigError("bad integer list %r" % (text,))


_COMMON = {
    "graph": str, "seed": int, "strategy": str, "workers": int,
    "out": str, "directed": _bool, "dedup": _bool, "roots": str,
}
_ALG = {
    "alg": str, "fanouts": _ints, "unique": _bool, "length": int,
    "quotas": _ints, "layers": int, "batch_size": int,
}
_KEYS = {
    "sample": {**_COMMON, **_ALG, "clusters": int, "clusters_per_batch": int,
               "num_roots": int, "walk_length": int, "num_batches": int},
    "verify": {**_COMMON, "layers": int, "batch_size": int,
               "features": str, "feature_dim": int, "dims": _ints,
               "inject_arc_corruption": _bool},
    "bench": {**_COMMON, **_ALG, "features": str, "feature_dim": int,
              "repeat": int},
    "partition": {**_COMMON, "clusters": int},
    "export": {**_COMMON, "features": str, "feature_dim": int},
}
_DEFAULTS = {
    "seed": 0, "strategy": "sample", "workers": 1, "directed": False,
    "dedup": False, "unique": False, "batch_size": 1, "layers": 2,
    "clusters_per_batch": 1, "num_batches": 1, "feature_dim": 8,
    "features": "random", "repeat": 1, "inject_arc_corruption": False,
}


def _load_config_file(path):
    data = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if "=" not in s:
                raise ConfigError("%s:%d: expected key=value" % (path, lineno))
            key, val = s.split("=", 1)
            data[key.strip().lower().replace("-", "_")] = val.strip()
    return data


def _effective(command, args):
    """Merge flag values over config-file values over defaults."""
    keys = _KEYS[command]
    fileconf = {}
    if args.config is not None:
        raw = _load_config_file(args.config)
        want = raw.pop("command", command)
        if want != command:
            raise ConfigError("config file is for %r, not %r"
                              % (want, command))
        for key, val in raw.items():
            if key not in keys:
                raise ConfigError("unknown config key %r" % (key,))
            fileconf[key] = keys[key](val)
    cfg = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
        elif key in fileconf:
            cfg[key] = fileconf[key]
        else:
            cfg[key] = _DEFAULTS.get(key)
    if cfg.get("graph") is None:
        raise ConfigError("--graph is required")
    return cfg


def _require(cfg, key, flag):
    if cfg.get(key) is None:
        raise ConfigError("%s is required" % (flag,))
    return cfg[key]


def _strategy(cfg):
    try:
        return Strategy(cfg["strategy"])
    except ValueError:
        raise ConfigError("strategy must be 'sample' or 'transit', got %r"
                          % (cfg["strategy"],))


def _load_graph(cfg):
    path = cfg["graph"]
    if is_cache_file(path):
        return load_cache(path)
    return load_edge_list(path, directed=cfg["directed"], dedup=cfg["dedup"])


def _parse_roots(text, g):
    t = str(text).strip()
    n = g.num_vertices
    if t == "all":
        return np.arange(n, dtype=np.int64)
    if t.startswith("random:"):
        parts = t.split(":")
        if len(parts) != 3:
            raise ConfigError("roots spec must be random:count:seed")
        try:
            count, rseed = int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError("bad roots spec %r" % (t,))
        if count < 1:
            raise ConfigError("root count must be >= 1")
        stream = derive_stream(rseed, STREAM_ROOTS)
        return np.array([prf_draw(stream, 0, 0, i, n) for i in range(count)],
                        dtype=np.int64)
    roots = np.array(_ints(t), dtype=np.int64)
    if roots.min() < 0 or roots.max() >= n:
        raise ConfigError("root id out of range [0, %d)" % (n,))
    return roots


def _build_spec(cfg, g):
    alg = _require(cfg, "alg", "--alg")
    if alg == "khop":
        return khop_spec(_require(cfg, "fanouts", "--fanouts"),
                         unique=cfg["unique"])
    if alg == "exhaustive":
        return exhaustive_spec(g, cfg["layers"])
    if alg == "walk":
        return random_walk_spec(_require(cfg, "length", "--length"))
    if alg == "fastgcn":
        return fastgcn_spec(_require(cfg, "quotas", "--quotas"), g)
    if alg == "ladies":
        return ladies_spec(_require(cfg, "quotas", "--quotas"))
    raise ConfigError("unknown algorithm %r" % (alg,))


def _make_features(cfg, g):
    spec = cfg["features"]
    if spec == "onehot":
        return features_onehot(g.num_vertices)
    if spec == "random":
        return features_random(g.num_vertices, cfg["feature_dim"],
                               cfg["seed"])
    if spec.startswith("random:"):
        try:
            fseed = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError("bad features spec %r" % (spec,))
        return features_random(g.num_vertices, cfg["feature_dim"], fseed)
    raise ConfigError("features must be onehot, random, or random:seed")


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _serialize(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def _write_run_files(command, cfg, out_dir, stats, counts, artifacts):
    entries = []
    for path in artifacts:
        entries.append({"path": os.path.basename(path),
                        "bytes": os.path.getsize(path),
                        "sha256": _digest(path)})
    manifest = {
        "command": command,
        "format_version": FORMAT_VERSION,
        "config": {k: v for k, v in sorted(cfg.items()) if v is not None},
        "counts": counts,
        "artifacts": entries,
    }
    if stats is not None:
        manifest["access_stats"] = {
            "adjacency_fetches": stats.adjacency_fetches,
            "draws": stats.draws,
            "wall_time": stats.wall_time,
            "per_step_fetches": stats.per_step_fetches,
        }
    with open(os.path.join(out_dir, "run.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    lines = ["command=%s" % command]
    for key, val in sorted(cfg.items()):
        if val is None:
            continue
        lines.append("%s=%s" % (key, _serialize(val)))
    with open(os.path.join(out_dir, "run.cfg"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_sample(cfg):
    g = _load_graph(cfg)
    out_dir = cfg["out"]
    if out_dir is None:
        raise ConfigError("--out is required")
    os.makedirs(out_dir, exist_ok=True)
    alg = _require(cfg, "alg", "--alg")
    artifacts = []
    counts = {"vertices": g.num_vertices, "arcs": g.num_arcs}
    stats = None
    if alg in ("clustergcn", "saint-rw"):
        if alg == "clustergcn":
            k = _require(cfg, "clusters", "--clusters")
            assign = partition_bfs(g, k)
            sets = clustergcn_batches(assign, cfg["clusters_per_batch"],
                                      cfg["seed"])
        else:
            batcher = graphsaint_rw_spec(
                _require(cfg, "num_roots", "--num-roots"),
                _require(cfg, "walk_length", "--walk-length"))
            strategy = _strategy(cfg)
            sets = [batcher(g, cfg["seed"] + i, strategy, cfg["workers"])
                    for i in range(cfg["num_batches"])]
        sizes = []
        for i, vs in enumerate(sets):
            sub, ltg = induced_subgraph(g, vs)
            base = os.path.join(out_dir, "batch_%04d" % (i,))
            with open(base + ".txt", "w") as fh:
                fh.write("\n".join(str(int(v)) for v in ltg) + "\n")
            save_cache(sub, base + ".khop")
            artifacts.extend([base + ".txt", base + ".khop"])
            sizes.append(int(ltg.size))
        counts["batches"] = len(sets)
        counts["batch_sizes"] = sizes
        print("wrote %d subgraph batches, sizes %s" % (len(sets), sizes))
    else:
        spec = _build_spec(cfg, g)
        roots = _parse_roots(_require(cfg, "roots", "--roots"), g)
        ss, stats = run_sampling(g, spec, roots, cfg["seed"],
                                 _strategy(cfg), cfg["workers"])
        ss_path = os.path.join(out_dir, "sample_set.ksmp")
        save_sampleset(ss, ss_path)
        artifacts.append(ss_path)
        batches = assemble(ss, g, spec.steps, cfg["batch_size"])
        for i, mb in enumerate(batches):
            path = os.path.join(out_dir, "batch_%04d.kmbb" % (i,))
            export_minibatch(mb, path)
            artifacts.extend([path, path + ".manifest.txt"])
        counts.update({"samples": ss.num_samples, "steps": ss.steps,
                       "roots": int(roots.size), "minibatches": len(batches)})
        print("sampled %d roots, steps=%d, %d mini-batches"
              % (roots.size, ss.steps, len(batches)))
        print("METRIC adjacency_fetches=%d" % stats.adjacency_fetches)
        print("METRIC draws=%d" % stats.draws)
    _write_run_files("sample", cfg, out_dir, stats, counts, artifacts)
    print("METRIC artifacts=%d" % len(artifacts))
    return 0


def _first_divergence(a, b):
    for s in range(a.steps):
        if not np.array_equal(a.outputs[s], b.outputs[s]):
            rows, cols = np.nonzero(a.outputs[s] != b.outputs[s])
            return int(rows[0]), s, int(cols[0])
    return None


def cmd_verify(cfg):
    g = _load_graph(cfg)
    if g.num_vertices > _VERIFY_LIMIT:
        raise ConfigError("verify is exhaustive; graph has %d vertices, "
                          "limit is %d" % (g.num_vertices, _VERIFY_LIMIT))
    layers = cfg["layers"]
    roots = _parse_roots(cfg["roots"] or "all", g)
    spec = exhaustive_spec(g, layers)
    ss_a, _ = run_sampling(g, spec, roots, cfg["seed"],
                           Strategy.SAMPLE_PARALLEL, cfg["workers"])
    ss_b, _ = run_sampling(g, spec, roots, cfg["seed"],
                           Strategy.TRANSIT_PARALLEL, cfg["workers"])
    if not ss_a.equals(ss_b):
        where = _first_divergence(ss_a, ss_b)
        if where is not None:
            raise InvariantError(
                "strategies diverge at sample=%d step=%d slot=%d"
                % where)
        raise InvariantError("strategies produced different sample sets")
    print("strategy equality: identical (%d samples)" % ss_a.num_samples)
    batches = assemble(ss_a, g, layers, cfg["batch_size"])
    if cfg["inject_arc_corruption"]:
        batches[0] = _corrupt_batch(batches[0])
    x = _make_features(cfg, g)
    dims = cfg.get("dims") or [x.shape[1]] + [16] * (layers - 1) + [8]
    if len(dims) != layers + 1:
        raise ConfigError("dims needs %d entries for %d layers"
                          % (layers + 1, layers))
    if dims[0] != x.shape[1]:
        raise ConfigError("dims[0] must equal the feature dim %d"
                          % (x.shape[1],))
    model = init_model(dims, cfg["seed"])
    full = forward_full(g, x, model)
    worst = 0.0
    where = (0, 0)
    for mb in batches:
        out = forward_minibatch(mb, x[mb.local_to_global], model)
        for t, row in zip(mb.targets, out):
            dev = np.abs(row - full[t])
            d = float(dev.max())
            if d > worst:
                worst = d
                where = (int(t), int(dev.argmax()))
    print("max deviation %.3e at target %d dim %d" % (worst, *where))
    print("METRIC max_deviation=%.18e" % worst)
    if worst > _TOLERANCE:
        raise InvariantError(
            "forward mismatch: |delta|=%.3e > %.0e at target %d dim %d"
            % (worst, _TOLERANCE, *where))
    print("verify: PASS (tolerance %.0e)" % _TOLERANCE)
    return 0


def _corrupt_batch(mb):
    """Flip one arc source; used to prove verify detects bad blocks."""
    for li, blk in enumerate(mb.layers):
        if blk.num_arcs and blk.num_src > 1:
            src = blk.src.copy()
            src[0] = (src[0] + 1) % blk.num_src
            layers = list(mb.layers)
            layers[li] = Block(src, blk.dst.copy(), blk.num_src, blk.num_dst)
            return MiniBatch(mb.targets, layers, mb.local_to_global)
    raise ConfigError("no arc available to corrupt")


def cmd_bench(cfg):
    kernels.warmup()
    g = _load_graph(cfg)
    spec = _build_spec(cfg, g)
    roots = _parse_roots(_require(cfg, "roots", "--roots"), g)
    repeat = max(1, cfg["repeat"])
    times = {}
    fetches = {}
    sets = {}
    for strat in (Strategy.SAMPLE_PARALLEL, Strategy.TRANSIT_PARALLEL):
        t0 = time.perf_counter()
        for _ in range(repeat):
            ss, st = run_sampling(g, spec, roots, cfg["seed"], strat,
                                  cfg["workers"])
        times[strat.value] = (time.perf_counter() - t0) / repeat
        fetches[strat.value] = st.adjacency_fetches
        sets[strat.value] = ss
    ss = sets[_strategy(cfg).value]
    batches = assemble(ss, g, spec.steps, cfg["batch_size"])
    x = _make_features(cfg, g)
    dims = [x.shape[1]] + [16] * (spec.steps - 1) + [8]
    model = init_model(dims, cfg["seed"])
    gathers = [x[mb.local_to_global] for mb in batches]
    t0 = time.perf_counter()
    for _ in range(repeat):
        for mb, xg in zip(batches, gathers):
            forward_minibatch(mb, xg, model)
    forward_time = (time.perf_counter() - t0) / repeat
    sample_time = times[_strategy(cfg).value]
    fraction = sample_time / (sample_time + forward_time) \
        if sample_time + forward_time > 0 else 0.0
    rep = replication_factor(batches, g)
    print("kernel lane: %s" % kernels.active_lane())
    print("%-28s %12s" % ("metric", "value"))
    rows = [
        ("sample time (s)", "%.6f" % sample_time),
        ("forward time (s)", "%.6f" % forward_time),
        ("sampling fraction", "%.4f" % fraction),
        ("fetches sample-parallel", str(fetches["sample"])),
        ("fetches transit-parallel", str(fetches["transit"])),
        ("replication factor", "%.4f" % rep.factor),
        ("mini-batches", str(len(batches))),
    ]
    for name, val in rows:
        print("%-28s %12s" % (name, val))
    print("METRIC sample_time_s=%.9f" % sample_time)
    print("METRIC transit_time_s=%.9f" % times["transit"])
    print("METRIC forward_time_s=%.9f" % forward_time)
    print("METRIC sampling_fraction=%.6f" % fraction)
    print("METRIC fetches_sample=%d" % fetches["sample"])
    print("METRIC fetches_transit=%d" % fetches["transit"])
    print("METRIC replication_factor=%.12f" % rep.factor)
    return 0


def cmd_partition(cfg):
    g = _load_graph(cfg)
    k = _require(cfg, "clusters", "--clusters")
    out_dir = cfg["out"]
    if out_dir is None:
        raise ConfigError("--out is required")
    os.makedirs(out_dir, exist_ok=True)
    assign = partition_bfs(g, k)
    path = os.path.join(out_dir, "partition.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(str(int(p)) for p in assign.part_of) + "\n")
    sizes = [int((assign.part_of == p).sum()) for p in range(assign.num_parts)]
    counts = {"vertices": g.num_vertices, "arcs": g.num_arcs,
              "clusters": assign.num_parts, "sizes": sizes}
    _write_run_files("partition", cfg, out_dir, None, counts, [path])
    print("partitioned %d vertices into %d clusters, sizes %s"
          % (g.num_vertices, assign.num_parts, sizes))
    print("METRIC clusters=%d" % assign.num_parts)
    return 0


def cmd_export(cfg):
    g = _load_graph(cfg)
    out_dir = cfg["out"]
    if out_dir is None:
        raise ConfigError("--out is required")
    os.makedirs(out_dir, exist_ok=True)
    cache = os.path.join(out_dir, "graph.khop")
    save_cache(g, cache)
    artifacts = [cache]
    if cfg["features"] != "none":
        x = _make_features(cfg, g)
        fpath = os.path.join(out_dir, "features.kfea")
        save_features(x, fpath)
        artifacts.append(fpath)
    counts = {"vertices": g.num_vertices, "arcs": g.num_arcs}
    _write_run_files("export", cfg, out_dir, None, counts, artifacts)
    print("exported %d vertices, %d arcs" % (g.num_vertices, g.num_arcs))
    return 0


def _add_common(p):
    p.add_argument("--graph", help="edge-list file or .khop cache")
    p.add_argument("--seed", type=int)
    p.add_argument("--strategy", choices=("sample", "transit"))
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--directed", action="store_true", default=None,
                   help="edge list is directed (default: mirror edges)")
    p.add_argument("--dedup", action="store_true", default=None,
                   help="drop duplicate arcs while loading")
    p.add_argument("--config", help="flat key=value config file")


def _add_alg(p):
    p.add_argument("--alg",
                   choices=("khop", "exhaustive", "walk", "fastgcn",
                            "ladies", "clustergcn", "saint-rw"))
    p.add_argument("--fanouts", type=_ints, metavar="F0,F1,...")
    p.add_argument("--unique", action="store_true", default=None)
    p.add_argument("--length", type=int, help="walk length")
    p.add_argument("--quotas", type=_ints, metavar="Q0,Q1,...")
    p.add_argument("--layers", type=int)
    p.add_argument("--roots", help="id list, 'all', or random:count:seed")
    p.add_argument("--batch-size", dest="batch_size", type=int)


def build_parser():
    top = _Parser(prog="khop",
                  description="Deterministic parallel graph sampling")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run a sampling algorithm")
    _add_common(p)
    _add_alg(p)
    p.add_argument("--clusters", type=int)
    p.add_argument("--clusters-per-batch", dest="clusters_per_batch",
                   type=int)
    p.add_argument("--num-roots", dest="num_roots", type=int)
    p.add_argument("--walk-length", dest="walk_length", type=int)
    p.add_argument("--num-batches", dest="num_batches", type=int)

    p = sub.add_parser("verify", help="oracle-check sampling + assembly")
    _add_common(p)
    p.add_argument("--layers", type=int)
    p.add_argument("--roots", help="id list, 'all', or random:count:seed")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--features", help="onehot, random, or random:seed")
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--dims", type=_ints)
    p.add_argument("--inject-arc-corruption", dest="inject_arc_corruption",
                   action="store_true", default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("bench", help="time sampling against the forward pass")
    _add_common(p)
    _add_alg(p)
    p.add_argument("--features", help="onehot, random, or random:seed")
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--repeat", type=int)

    p = sub.add_parser("partition", help="BFS-partition a graph")
    _add_common(p)
    p.add_argument("--clusters", type=int)

    p = sub.add_parser("export", help="write binary cache and features")
    _add_common(p)
    p.add_argument("--features", help="none, onehot, random, or random:seed")
    p.add_argument("--feature-dim", dest="feature_dim", type=int)

    return top


_RUNNERS = {
    "sample": cmd_sample,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "partition": cmd_partition,
    "export": cmd_export,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = _effective(args.command, args)
        return _RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print("config error: %s" % (exc,), file=sys.stderr)
        return 1
    except FormatError as exc:
        print("format error: %s" % (exc,), file=sys.stderr)
        return 2
    except InvariantError as exc:
        print("invariant violation: %s" % (exc,), file=sys.stderr)
        return 3
    except OSError as exc:
        print("i/o error: %s" % (exc,), file=sys.stderr)
        return 2
    except ValueError as exc:
        print("config error: %s" % (exc,), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
