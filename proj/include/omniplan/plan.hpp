// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omniplan/mesh.hpp"
#include "omniplan/specs.hpp"

namespace omniplan {

enum class RecomputeMode { none, full };

struct OffloadFlags {
  bool optimizer = false;
  bool activations = false;
};

/// Declarative n-D training recipe. Device counts factor the world as
/// dp_replicate x dp_shard x sp (outermost to innermost); parameters shard
/// across dp_shard x sp ranks and the expert-parallel group is carved out of
/// that same flattened set.
struct ParallelPlan {
  std::int64_t dp_replicate = 1;
  std::int64_t dp_shard = 1;
  std::int64_t sp = 1; // sequence-parallel (all-to-all attention) size
  std::int64_t ep = 1;
  std::int64_t micro_batch = 1;
  RecomputeMode recompute = RecomputeMode::full;
  OffloadFlags offload;
  bool async_ulysses = false;
  bool moe_overlap = false;
  std::int64_t fsdp_prefetch_depth = 1;
  double moe_imbalance = 1.0; // routing hot-spot multiplier, 1 = uniform
  // Accepted in configs only to be rejected with a distinct violation code.
  std::int64_t tp = 1;
  std::int64_t pp = 1;

  std::int64_t world() const { return dp_replicate * dp_shard * sp; }
  std::int64_t param_shard_degree() const { return dp_shard * sp; }
  /// Data-parallel width for batch accounting (sp ranks share sequences).
  std::int64_t dp_width() const { return dp_replicate * dp_shard; }
};

/// Per-module resolution of a plan.
struct ModulePlan {
  std::string module_name;
  bool fsdp = true;
  bool participates_in_sp = false;
  bool expert_placement = false; // shard dim 0 of each expert weight across the EP group
};

struct Violation {
  std::string code; // machine readable, stable
  std::string message;
};

struct ExpertSharding {
  std::int64_t experts_per_rank = 0;
  std::int64_t per_expert_fsdp_degree = 0;
};

/// Checks a plan against cluster, model and workload. Empty result means the
/// plan is valid. Pure: identical inputs give identical violation lists.
std::vector<Violation> validate(const ParallelPlan& plan, const ClusterSpec& cluster,
                                const ModelSpec& model, const WorkloadSpec& workload);

/// How one MoE module's experts land on devices: each rank holds
/// num_experts/ep experts, each further sharded dim-0 across the
/// (dp_shard*sp)/ep ranks left over in the flattened shard group.
/// Throws std::invalid_argument for a dense module.
ExpertSharding resolve_expert_sharding(const ParallelPlan& plan, const TransformerSpec& arch);

/// Default per-module resolution: every module is FSDP-sharded, only the
/// foundation participates in sequence parallelism, expert placement is set
/// on MoE-bearing modules.
std::vector<ModulePlan> resolve_module_plans(const ParallelPlan& plan, const ModelSpec& model);

/// Candidate axes for plan enumeration.
struct PlanLimits {
  std::vector<std::int64_t> sp_candidates{1};
  std::vector<std::int64_t> ep_candidates{1};
  std::vector<std::int64_t> dp_replicate_candidates{1};
  std::vector<std::int64_t> micro_batch_candidates; // empty: use workload micro_batch
};

/// All valid plans over the candidate sets, ordered by (sp, ep, dp_replicate,
/// micro_batch). dp_shard is derived as world / (dp_replicate * sp).
std::vector<ParallelPlan> enumerate_plans(const ClusterSpec& cluster, const ModelSpec& model,
                                          const WorkloadSpec& workload, const PlanLimits& limits);

/// Method label in the report grammar: "FSDP[+SPk][+EPk]". The SP suffix is
/// printed whenever ep > 1, even at sp == 1. Replicated plans use an HSDPr
/// base instead of FSDP.
std::string plan_label(const ParallelPlan& plan);

/// The (dp_replicate, dp_shard, sp) mesh a plan binds to.
Mesh plan_mesh(const ParallelPlan& plan);

/// Expert-parallel groups: consecutive ep-sized chunks of each flattened
/// (dp_shard, sp) group.
std::vector<Group> ep_groups(const ParallelPlan& plan);

} // namespace omniplan
