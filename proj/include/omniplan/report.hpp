// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omniplan/memory.hpp"
#include "omniplan/plan.hpp"
#include "omniplan/simulator.hpp"

#include "json.hpp"

namespace omniplan {

inline constexpr const char* kToolVersion = "0.1.0";

/// One sweep entry: a (method, seqlen) cell with its memory estimate and,
/// when it fits, the simulated step.
struct RecipeRow {
  ParallelPlan plan;
  std::string method;
  std::int64_t seqlen = 0;
  MemoryBreakdown memory;
  bool oom = false;
  std::optional<StepReport> step;
};

struct InfeasibleEntry {
  std::string method;
  std::int64_t seqlen = 0;
  std::vector<Violation> violations;
};

struct RecipeReport {
  std::vector<RecipeRow> rows; // sorted by (seqlen, method)
  std::vector<InfeasibleEntry> infeasible;
  std::string cluster_hash;
  std::string model_hash;
  std::string workload_hash;
  std::string stamp; // empty unless requested
};

void sort_rows(RecipeReport& report);

/// Markdown table with the columns
/// Method | Seqlen | Memory (GB) | Throughput | MFU (%).
/// Rows that do not fit show OOM in the memory column and dashes after it;
/// infeasible plans are listed under the table with their violation codes.
std::string render_markdown(const RecipeReport& report);
std::string render_csv(const RecipeReport& report);
nlohmann::json to_json(const RecipeReport& report);

nlohmann::json to_json(const MemoryBreakdown& breakdown);
nlohmann::json to_json(const StepReport& report);

/// FNV-1a hash of a canonical JSON dump, for report metadata.
std::string config_hash(const nlohmann::json& j);

double bytes_to_gib(double bytes);

} // namespace omniplan
