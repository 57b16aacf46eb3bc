// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace omniplan {

Timeline simulate(const StepGraph& graph, const ParallelPlan& /*plan*/,
                  const ClusterSpec& cluster, const SimOptions& options) {
  if (options.compute_efficiency <= 0.0 || options.compute_efficiency > 1.0) {
    throw std::invalid_argument("compute_efficiency must be in (0, 1]");
  }
  Timeline tl;
  tl.world = graph.world;
  tl.node_start.assign(graph.nodes.size(), -1.0);
  tl.node_end.assign(graph.nodes.size(), -1.0);
  tl.events.reserve(graph.nodes.size() * static_cast<std::size_t>(graph.world));

  const double effective_flops = cluster.gpu.peak_flops * options.compute_efficiency;
  // All nodes are SPMD-symmetric, so one free-time per channel suffices; kept
  // per channel (not per device) because every device participates in every
  // node's instance.
  double compute_free = 0.0;
  double comm_free = 0.0;

  for (const auto& node : graph.nodes) {
    for (std::int64_t d : node.deps) {
      if (d >= node.id) {
        throw std::invalid_argument("dependency cycle: node " + std::to_string(node.id) +
                                    " depends on node " + std::to_string(d));
      }
    }
    double duration = 0.0;
    if (node.kind == NodeKind::compute) {
      duration = node.flops / effective_flops;
    } else {
      duration = collective_time(node.collective, node.bytes, node.topo, cluster.link);
    }
    if (duration <= 0.0) {
      throw std::logic_error("node " + node.name + " has non-positive duration");
    }
    double& channel_free = node.kind == NodeKind::compute ? compute_free : comm_free;
    double start = channel_free;
    for (std::int64_t d : node.deps) {
      start = std::max(start, tl.node_end[static_cast<std::size_t>(d)]);
    }
    const double end = start + duration;
    tl.node_start[static_cast<std::size_t>(node.id)] = start;
    tl.node_end[static_cast<std::size_t>(node.id)] = end;
    channel_free = end;
    tl.makespan = std::max(tl.makespan, end);

    const int channel = node.kind == NodeKind::compute ? 0 : 1;
    for (std::int64_t dev = 0; dev < graph.world; ++dev) {
      tl.events.push_back(TimelineEvent{dev, channel, start, end, node.id});
    }
  }
  return tl;
}

namespace {

// Seconds of comm on device 0 not covered by any concurrent compute
// interval. Device timelines are symmetric, so device 0 stands for all.
double exposed_comm_seconds(const Timeline& tl) {
  std::vector<std::pair<double, double>> compute;
  std::vector<std::pair<double, double>> comm;
  for (const auto& ev : tl.events) {
    if (ev.device != 0) {
      continue;
    }
    (ev.channel == 0 ? compute : comm).push_back({ev.start, ev.end});
  }
  std::sort(compute.begin(), compute.end());
  std::sort(comm.begin(), comm.end());

  double exposed = 0.0;
  std::size_t ci = 0;
  for (const auto& [start, end] : comm) {
    double cursor = start;
    while (ci < compute.size() && compute[ci].second <= cursor) {
      ++ci;
    }
    std::size_t j = ci;
    while (cursor < end) {
      if (j >= compute.size() || compute[j].first >= end) {
        exposed += end - cursor;
        break;
      }
      if (compute[j].first > cursor) {
        exposed += compute[j].first - cursor;
      }
      cursor = std::max(cursor, compute[j].second);
      ++j;
    }
  }
  return exposed;
}

} // namespace

StepReport report(const Timeline& timeline, const StepGraph& graph,
                  const ParallelPlan& /*plan*/, const ModelSpec& model,
                  const ClusterSpec& cluster, const WorkloadSpec& workload) {
  StepReport r;
  r.step_time = timeline.makespan;
  const double tokens = static_cast<double>(workload.global_batch) *
                        static_cast<double>(workload.seq_len);
  r.throughput = tokens / (r.step_time * static_cast<double>(graph.world));
  r.model_flops_per_token = flops_per_token(model, workload.seq_len);
  r.mfu = r.throughput * r.model_flops_per_token / cluster.gpu.peak_flops;
  r.exposed_comm = exposed_comm_seconds(timeline) / r.step_time;

  for (const auto& node : graph.nodes) {
    const double dur = timeline.node_end[static_cast<std::size_t>(node.id)] -
                       timeline.node_start[static_cast<std::size_t>(node.id)];
    auto& cost = r.phase_breakdown[node.phase];
    if (node.kind == NodeKind::compute) {
      cost.compute_s += dur;
    } else {
      cost.comm_s += dur;
    }
  }
  return r;
}

void write_chrome_trace(std::ostream& out, const Timeline& timeline, const StepGraph& graph) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& ev : timeline.events) {
    const auto& node = graph.nodes[static_cast<std::size_t>(ev.node)];
    events.push_back({
        {"name", node.name},
        {"cat", node.kind == NodeKind::compute ? "compute" : "comm"},
        {"ph", "X"},
        {"ts", ev.start * 1e6},
        {"dur", (ev.end - ev.start) * 1e6},
        {"pid", ev.device},
        {"tid", ev.channel},
        {"args", {{"phase", node.phase}}},
    });
  }
  nlohmann::json trace{{"traceEvents", std::move(events)},
                       {"displayTimeUnit", "ms"}};
  out << trace.dump(2) << "\n";
}

} // namespace omniplan
