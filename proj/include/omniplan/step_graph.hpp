// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omniplan/comm.hpp"
#include "omniplan/mesh.hpp"
#include "omniplan/plan.hpp"
#include "omniplan/specs.hpp"

namespace omniplan {

enum class NodeKind { compute, collective };

/// One operation of the training step. Node ids double as the issue order:
/// each device channel executes its nodes in id order, so ids are a
/// topological order of the dependency edges by construction.
struct OpNode {
  std::int64_t id = 0;
  NodeKind kind = NodeKind::compute;
  std::string name;
  std::string phase; // encoder | fwd.layer<i> | fwd.head | bwd.* | optimizer
  double flops = 0.0;
  CollectiveKind collective = CollectiveKind::all_gather;
  double bytes = 0.0; // unsharded bytes for AG/RS/AR, per-rank payload for A2A
  GroupTopology topo;
  Group group; // representative instance (the one containing rank 0)
  std::vector<std::int64_t> deps;
};

struct StepGraph {
  std::vector<OpNode> nodes;
  std::int64_t world = 1;
  std::int64_t accum_steps = 1;

  std::int64_t collective_count() const;
  std::int64_t collective_count(CollectiveKind kind) const;
};

/// Builds the data-flow graph of one optimizer step: per-encoder forward
/// (and feature scatter under sequence parallelism), then per micro-batch the
/// layered forward/backward with parameter all-gathers, attention
/// all-to-alls, MoE dispatch/combine and gradient reduce-scatters, the
/// cross-replicate all-reduce on the last micro-batch when replicated, and a
/// final optimizer update. Collectives are emitted only for groups larger
/// than one rank.
///
/// Overlap toggles shape the edges:
///  - fsdp_prefetch_depth d lets the all-gather of layer i+j (j <= d) run
///    during layer i's compute; depth 0 serializes each gather behind the
///    previous layer.
///  - async_ulysses drops the projection -> all-to-all ordering so the
///    attention segment costs max(projection, a2a) instead of their sum.
///  - moe_overlap runs dispatch+combine concurrently with expert compute.
StepGraph build_step_graph(const ParallelPlan& plan, const ModelSpec& model,
                           const ClusterSpec& cluster, const WorkloadSpec& workload);

} // namespace omniplan
