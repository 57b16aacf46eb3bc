// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/comm.hpp"

namespace omniplan {

double collective_volume(CollectiveKind kind, double full_bytes, std::int64_t group_size) {
  const double p = static_cast<double>(group_size);
  if (group_size <= 1 || full_bytes <= 0.0) {
    return 0.0;
  }
  switch (kind) {
    case CollectiveKind::all_gather:
    case CollectiveKind::reduce_scatter:
    case CollectiveKind::all_to_all:
      return full_bytes * (p - 1.0) / p;
    case CollectiveKind::all_reduce:
      return 2.0 * full_bytes * (p - 1.0) / p;
  }
  return 0.0;
}

static std::int64_t collective_steps(CollectiveKind kind, std::int64_t group_size) {
  switch (kind) {
    case CollectiveKind::all_gather:
    case CollectiveKind::reduce_scatter:
      return group_size - 1;
    case CollectiveKind::all_reduce:
      return 2 * (group_size - 1);
    case CollectiveKind::all_to_all:
      return 1;
  }
  return 0;
}

double collective_time(CollectiveKind kind, double full_bytes, const GroupTopology& topo,
                       const LinkSpec& link) {
  if (topo.size <= 1) {
    return 0.0;
  }
  const double latency = topo.spans_nodes ? link.inter_latency : link.intra_latency;
  const double bandwidth = topo.spans_nodes ? link.inter_node_bw : link.intra_node_bw;
  const double steps = static_cast<double>(collective_steps(kind, topo.size));
  return steps * latency + collective_volume(kind, full_bytes, topo.size) / bandwidth;
}

double ulysses_attention_volume(const ParallelPlan& plan, const TransformerSpec& arch,
                                const WorkloadSpec& workload, std::int64_t dtype_bytes) {
  if (plan.sp <= 1) {
    return 0.0;
  }
  const double width = 2.0 * static_cast<double>(arch.hidden) +
                       2.0 * static_cast<double>(arch.kv_width());
  const double local_tokens = static_cast<double>(plan.micro_batch) *
                              static_cast<double>(workload.seq_len) /
                              static_cast<double>(plan.sp);
  const double sp = static_cast<double>(plan.sp);
  return width * local_tokens * static_cast<double>(dtype_bytes) * (sp - 1.0) / sp;
}

double fsdp_step_volume(const ParallelPlan& plan, std::int64_t module_params,
                        std::int64_t dtype_bytes) {
  const std::int64_t p = plan.param_shard_degree();
  const double full = static_cast<double>(module_params) * static_cast<double>(dtype_bytes);
  return 3.0 * collective_volume(CollectiveKind::all_gather, full, p);
}

double hsdp_allreduce_volume(const ParallelPlan& plan, std::int64_t module_params,
                             std::int64_t dtype_bytes) {
  if (plan.dp_replicate <= 1) {
    return 0.0;
  }
  const double shard = static_cast<double>(module_params) * static_cast<double>(dtype_bytes) /
                       static_cast<double>(plan.param_shard_degree());
  return collective_volume(CollectiveKind::all_reduce, shard, plan.dp_replicate);
}

double ep_dispatch_volume(const ParallelPlan& plan, const TransformerSpec& arch,
                          std::int64_t tokens_local, std::int64_t dtype_bytes) {
  if (plan.ep <= 1 || !arch.moe) {
    return 0.0;
  }
  const double ep = static_cast<double>(plan.ep);
  const double payload = static_cast<double>(tokens_local) *
                         static_cast<double>(arch.moe->top_k) *
                         static_cast<double>(arch.hidden) * static_cast<double>(dtype_bytes);
  return 2.0 * payload * (ep - 1.0) / ep * plan.moe_imbalance;
}

double encoder_scatter_volume(const ParallelPlan& plan, const ModuleSpec& encoder,
                              const WorkloadSpec& workload, std::int64_t foundation_hidden,
                              std::int64_t dtype_bytes) {
  if (plan.sp <= 1 || encoder.tokens_per_item <= 0) {
    return 0.0;
  }
  const double frac = workload.mix_fraction(encoder.name);
  const double feature_tokens = frac * static_cast<double>(plan.micro_batch) *
                                static_cast<double>(workload.seq_len) /
                                static_cast<double>(plan.sp);
  const double feature_bytes = feature_tokens * static_cast<double>(foundation_hidden) *
                               static_cast<double>(dtype_bytes);
  const double sp = static_cast<double>(plan.sp);
  return feature_bytes * (sp - 1.0) / sp;
}

bool group_spans_nodes(const Group& group, const ClusterSpec& cluster) {
  if (group.members.empty()) {
    return false;
  }
  const std::int64_t first_node = group.members.front() / cluster.gpus_per_node;
  for (std::int64_t r : group.members) {
    if (r / cluster.gpus_per_node != first_node) {
      return true;
    }
  }
  return false;
}

} // namespace omniplan
