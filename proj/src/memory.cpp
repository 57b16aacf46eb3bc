// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/memory.hpp"

#include <algorithm>

namespace omniplan {

MemoryBreakdown estimate(const ParallelPlan& plan, const ModelSpec& model,
                         const ClusterSpec& /*cluster*/, const WorkloadSpec& workload,
                         const MemoryConfig& config) {
  MemoryBreakdown bd;
  const double b = static_cast<double>(model.param_dtype_bytes);
  const double shard = static_cast<double>(plan.param_shard_degree());

  for (const auto& mod : model.modules) {
    const double n = static_cast<double>(module_param_count(mod));
    bd.params += n * b / shard;
    if (mod.trainable) {
      bd.grads += n * b / shard;
      if (!plan.offload.optimizer) {
        bd.optimizer += n * 12.0 / shard; // fp32 master + two moments
      }
    }
  }

  const ModuleSpec& foundation = model.foundation();
  if (foundation.arch) {
    const auto& a = *foundation.arch;
    const double local_tokens = static_cast<double>(plan.micro_batch) *
                                static_cast<double>(workload.seq_len) /
                                static_cast<double>(plan.sp);
    const double layer_input = local_tokens * static_cast<double>(a.hidden) * b;

    // recompute=full keeps one input per layer; recompute=none keeps every
    // layer's full working set instead.
    const double per_layer_saved = plan.recompute == RecomputeMode::full
                                       ? layer_input
                                       : config.working_set_coefficient * layer_input;
    if (!plan.offload.activations) {
      bd.activations_saved = static_cast<double>(a.layers) * per_layer_saved;
    }
    bd.activations_working = config.working_set_coefficient * layer_input;

    const double chunk_tokens =
        plan.micro_batch *
        (config.naive_logits
             ? static_cast<double>(workload.seq_len) / static_cast<double>(plan.sp)
             : std::min(static_cast<double>(config.ce_chunk_tokens),
                        static_cast<double>(workload.seq_len) / static_cast<double>(plan.sp)));
    bd.logits = chunk_tokens * static_cast<double>(a.vocab) * 6.0;

    // Prefetch keeps 1 + depth gathered layers live.
    if (plan.param_shard_degree() > 1) {
      double max_gather = 0.0;
      for (std::int64_t l = 0; l < a.layers; ++l) {
        max_gather = std::max(max_gather, layer_shape(a, l).gathered(plan.ep) * b);
      }
      for (const auto& mod : model.modules) {
        if (mod.kind != ModuleKind::foundation) {
          max_gather =
              std::max(max_gather, static_cast<double>(module_param_count(mod)) * b);
        }
      }
      bd.comm_buffers += (1.0 + static_cast<double>(plan.fsdp_prefetch_depth)) * max_gather;
    }

    // All-to-all staging: send + receive copies of the largest message.
    double max_message = 0.0;
    if (plan.sp > 1) {
      max_message = std::max(max_message, layer_input); // attention q / output
    }
    if (plan.ep > 1 && a.moe) {
      max_message = std::max(max_message, local_tokens *
                                              static_cast<double>(a.moe->top_k) *
                                              static_cast<double>(a.hidden) * b *
                                              plan.moe_imbalance);
    }
    bd.comm_buffers += 2.0 * max_message;
  }

  const int extra_groups = (plan.sp > 1 ? 1 : 0) + (plan.ep > 1 ? 1 : 0);
  bd.comm_buffers += static_cast<double>(extra_groups) * config.comm_group_workspace_bytes;

  bd.runtime_overhead = config.runtime_overhead_bytes;
  bd.total = bd.params + bd.grads + bd.optimizer + bd.activations_saved +
             bd.activations_working + bd.comm_buffers + bd.logits + bd.runtime_overhead;
  return bd;
}

bool fits(const MemoryBreakdown& breakdown, const GpuSpec& gpu) {
  return breakdown.total <= gpu.hbm_bytes;
}

} // namespace omniplan
