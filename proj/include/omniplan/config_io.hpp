// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "omniplan/plan.hpp"
#include "omniplan/reshard.hpp"
#include "omniplan/specs.hpp"

#include "json.hpp"

namespace omniplan {

/// Raised for unreadable, unparseable or invalid configuration input; the
/// message is qualified with the file path when one is involved.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ClusterSpec parse_cluster(const nlohmann::json& j);
ModelSpec parse_model(const nlohmann::json& j);
WorkloadSpec parse_workload(const nlohmann::json& j);

ClusterSpec load_cluster(const std::string& path);
ModelSpec load_model(const std::string& path);
WorkloadSpec load_workload(const std::string& path);

/// Modality-mix names must refer to a module (or the literal "text").
void cross_validate(const WorkloadSpec& workload, const ModelSpec& model);

nlohmann::json to_json(const ClusterSpec& cluster);
nlohmann::json to_json(const ModelSpec& model);
nlohmann::json to_json(const WorkloadSpec& workload);
nlohmann::json to_json(const ParallelPlan& plan);

/// Shard layout file: {"parts": P, "params": [{"id": ..., "numel": ...}]}.
struct LayoutFile {
  std::int64_t parts = 1;
  std::vector<ShardLayout> params;
};
LayoutFile load_layout(const std::string& path);

nlohmann::json to_json(const ReshardPlan& plan);
ReshardPlan reshard_plan_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

} // namespace omniplan
