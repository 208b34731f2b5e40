"""Deterministic parallel graph sampling for GNN mini-batch training."""

from .errors import ConfigError, FormatError, InvariantError
from .prf import FORMAT_VERSION, MAX_BOUND, derive_stream, prf_draw
from .graph import (Graph, PartitionAssignment, from_edges, induced_subgraph,
                    load_cache, load_edge_list, partition_bfs, save_cache)
from .engine import (SENTINEL, AccessStats, CandidateSet, SampleSet,
                     SamplingSpec, SamplingType, Strategy, TransitGroup,
                     build_transit_groups, default_collective_candidates,
                     execute_sample_parallel, execute_transit_parallel,
                     load_sampleset, run_sampling, save_sampleset)
from .algorithms import (LayerQuota, clustergcn_batches, exhaustive_spec,
                         fastgcn_spec, graphsaint_rw_spec, khop_spec,
                         ladies_spec, random_walk_spec)
from .minibatch import (Block, MiniBatch, assemble, export_minibatch,
                        load_minibatch, replication_factor)
from .gnn import (Model, features_onehot, features_random, forward_full,
                  forward_minibatch, init_model, load_features, save_features)

__version__ = "0.1.0"

__all__ = [
    "AccessStats", "Block", "CandidateSet", "ConfigError", "FORMAT_VERSION",
    "FormatError", "Graph", "InvariantError", "LayerQuota", "MAX_BOUND",
    "MiniBatch", "Model", "PartitionAssignment", "SENTINEL", "SampleSet",
    "SamplingSpec", "SamplingType", "Strategy", "TransitGroup", "assemble",
    "build_transit_groups", "clustergcn_batches",
    "default_collective_candidates", "derive_stream", "exhaustive_spec",
    "execute_sample_parallel", "execute_transit_parallel", "export_minibatch",
    "fastgcn_spec", "features_onehot", "features_random", "forward_full",
    "forward_minibatch", "from_edges", "graphsaint_rw_spec",
    "induced_subgraph", "init_model", "khop_spec", "ladies_spec",
    "load_cache", "load_edge_list", "load_features", "load_minibatch",
    "load_sampleset", "partition_bfs", "prf_draw", "random_walk_spec",
    "replication_factor", "run_sampling", "save_cache", "save_features",
    "save_sampleset",
]
