// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "omniplan/plan.hpp"
#include "omniplan/specs.hpp"

namespace omniplan {

/// Per-rank peak memory estimate, bytes per component.
struct MemoryBreakdown {
  double params = 0.0;
  double grads = 0.0;
  double optimizer = 0.0;
  double activations_saved = 0.0;
  double activations_working = 0.0;
  double comm_buffers = 0.0;
  double logits = 0.0;
  double runtime_overhead = 0.0;
  double total = 0.0;
};

/// Calibration knobs, each surfaced in reports so a deviation from measured
/// memory is attributable.
struct MemoryConfig {
  /// Working-set multiple of one layer's input while (re)computing it.
  double working_set_coefficient = 16.0;
  /// Tokens of logits materialized at once by chunked cross-entropy.
  std::int64_t ce_chunk_tokens = 1024;
  /// Materialize the full local sequence of logits instead of chunking.
  bool naive_logits = false;
  /// Fixed allocator/runtime floor.
  double runtime_overhead_bytes = 4.0 * (1ll << 30);
  /// Persistent communicator workspace charged once per collective group a
  /// rank joins beyond the sharding group (sequence-parallel, expert-
  /// parallel). Independent of message size.
  double comm_group_workspace_bytes = 2.0 * (1ll << 30);
};

/// Analytic per-rank peak memory for a validated plan. Parameters, gradients
/// and optimizer states divide by the dp_shard*sp shard degree; activations
/// scale with the local sequence S/sp; optimizer/activation offload zero
/// their components.
MemoryBreakdown estimate(const ParallelPlan& plan, const ModelSpec& model,
                         const ClusterSpec& cluster, const WorkloadSpec& workload,
                         const MemoryConfig& config = {});

bool fits(const MemoryBreakdown& breakdown, const GpuSpec& gpu);

} // namespace omniplan
