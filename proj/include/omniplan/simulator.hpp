// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "omniplan/step_graph.hpp"

namespace omniplan {

/// One busy interval on a device channel.
struct TimelineEvent {
  std::int64_t device = 0;
  int channel = 0; // 0 = compute, 1 = comm
  double start = 0.0;
  double end = 0.0;
  std::int64_t node = 0;
};

struct Timeline {
  std::vector<TimelineEvent> events;
  std::vector<double> node_start; // indexed by node id; -1 for skipped ids
  std::vector<double> node_end;
  double makespan = 0.0;
  std::int64_t world = 1;
};

struct SimOptions {
  /// Fraction of peak_flops compute nodes actually achieve.
  double compute_efficiency = 0.45;
};

struct PhaseCost {
  double compute_s = 0.0;
  double comm_s = 0.0;
};

struct StepReport {
  double step_time = 0.0;        // seconds
  double throughput = 0.0;       // tokens / s / GPU
  double mfu = 0.0;              // fraction of peak
  double exposed_comm = 0.0;     // fraction of step_time
  double model_flops_per_token = 0.0;
  std::map<std::string, PhaseCost> phase_breakdown; // device-0 busy time per phase
};

/// Schedules the graph on one compute and one comm channel per device.
/// Channels execute their nodes in id (issue) order; a node starts when its
/// dependencies have finished and every participating channel is free.
/// Deterministic: identical inputs give identical timelines. Throws if a
/// dependency edge points forward (a cycle under the issue order).
Timeline simulate(const StepGraph& graph, const ParallelPlan& plan,
                  const ClusterSpec& cluster, const SimOptions& options = {});

StepReport report(const Timeline& timeline, const StepGraph& graph, const ParallelPlan& plan,
                  const ModelSpec& model, const ClusterSpec& cluster,
                  const WorkloadSpec& workload);

/// Chrome trace-event JSON (one complete event per device/channel interval).
void write_chrome_trace(std::ostream& out, const Timeline& timeline, const StepGraph& graph);

} // namespace omniplan
