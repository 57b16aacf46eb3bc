// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "omniplan/plan.hpp"

namespace omniplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPlanInvalid = 3;
inline constexpr int kExitPack = 4;
inline constexpr int kExitReshard = 5;

/// Plan shape taken from command-line flags.
struct PlanFlags {
  std::int64_t dp_replicate = 1;
  std::int64_t sp = 1;
  std::int64_t ep = 1;
  std::int64_t micro_batch = 0; // 0: use the workload's micro_batch
  std::string recompute = "full";
  bool offload_optimizer = false;
  bool offload_activations = false;
  bool async_ulysses = false;
  bool moe_overlap = false;
  std::int64_t fsdp_prefetch_depth = 1;
  double moe_imbalance = 1.0;
};

struct PlanCommand {
  std::string cluster_path;
  std::string model_path;
  std::string workload_path;
  std::vector<std::int64_t> sp_candidates{1};
  std::vector<std::int64_t> ep_candidates{1};
  std::vector<std::int64_t> dp_replicate_candidates{1};
  std::vector<std::int64_t> micro_batch_candidates;
  std::vector<std::int64_t> seqlens; // empty: workload seq_len
  PlanFlags flags;                   // recompute/offload/overlap applied to every candidate
  std::string format = "md";         // md | csv | json
  int jobs = 1;
  bool stamp = false;
  double efficiency = 0.45;
};

struct SimulateCommand {
  std::string cluster_path;
  std::string model_path;
  std::string workload_path;
  PlanFlags flags;
  std::string format = "json";
  std::string trace_path; // empty: no trace
  double efficiency = 0.45;
};

struct EstimateMemoryCommand {
  std::string cluster_path;
  std::string model_path;
  std::string workload_path;
  PlanFlags flags;
  std::string format = "json";
};

struct PackCommand {
  std::string lengths_path;
  std::int64_t target_length = 0;
  std::string policy = "first_fit_decreasing"; // or first_fit_arrival
  bool compare = false;                        // emit both policies' batch counts
  std::string format = "json";
};

struct ReshardCommand {
  std::string src_layout_path;
  std::string dst_layout_path;
  std::string out_path;    // empty: stdout
  std::string verify_path; // empty: no verification
};

int cmd_plan(const PlanCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_estimate_memory(const EstimateMemoryCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_pack(const PackCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_reshard(const ReshardCommand& cmd, std::ostream& out, std::ostream& err);

} // namespace omniplan::cli
