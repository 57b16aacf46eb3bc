// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "omniplan/plan.hpp"
#include "omniplan/specs.hpp"

namespace omniplan {

enum class CollectiveKind { all_gather, reduce_scatter, all_reduce, all_to_all };

struct GroupTopology {
  std::int64_t size = 1;
  bool spans_nodes = false;
};

/// Per-rank bytes moved by one collective, ring accounting. For all_gather,
/// reduce_scatter and all_reduce, full_bytes is the unsharded tensor size;
/// for all_to_all it is the per-rank local payload.
double collective_volume(CollectiveKind kind, double full_bytes, std::int64_t group_size);

/// Alpha-beta time: steps(P) * latency + per-rank volume / bandwidth, with
/// P-1 ring steps for AG/RS, 2(P-1) for AR, one phase for all-to-all. A
/// group that spans nodes is charged entirely at the inter-node link.
double collective_time(CollectiveKind kind, double full_bytes, const GroupTopology& topo,
                       const LinkSpec& link);

/// Per-rank bytes per layer for the four attention all-to-alls (q, k, v,
/// output). At fixed S/sp the value is bounded by
/// (2H + 2*kv_width) * m * (S/sp) * b regardless of scale.
double ulysses_attention_volume(const ParallelPlan& plan, const TransformerSpec& arch,
                                const WorkloadSpec& workload, std::int64_t dtype_bytes);

/// Per-rank bytes per step for sharded-parameter traffic of one module:
/// forward all-gather, backward all-gather, gradient reduce-scatter.
double fsdp_step_volume(const ParallelPlan& plan, std::int64_t module_params,
                        std::int64_t dtype_bytes);

/// Extra per-rank bytes for the cross-replicate gradient all-reduce when
/// dp_replicate > 1 (the sharded gradient is N*b/P per rank).
double hsdp_allreduce_volume(const ParallelPlan& plan, std::int64_t module_params,
                             std::int64_t dtype_bytes);

/// Per-rank bytes per MoE layer for token routing, dispatch plus combine,
/// under uniform routing times the plan's imbalance multiplier.
double ep_dispatch_volume(const ParallelPlan& plan, const TransformerSpec& arch,
                          std::int64_t tokens_local, std::int64_t dtype_bytes);

/// Per-rank bytes for one encoder's feature scatter into the sp group.
double encoder_scatter_volume(const ParallelPlan& plan, const ModuleSpec& encoder,
                              const WorkloadSpec& workload, std::int64_t foundation_hidden,
                              std::int64_t dtype_bytes);

/// Whether any two group members live on different nodes.
bool group_spans_nodes(const Group& group, const ClusterSpec& cluster);

} // namespace omniplan
