// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/plan.hpp"

#include <algorithm>
#include <stdexcept>

namespace omniplan {

namespace {

void add(std::vector<Violation>& v, std::string code, std::string message) {
  v.push_back(Violation{std::move(code), std::move(message)});
}

} // namespace

std::vector<Violation> validate(const ParallelPlan& plan, const ClusterSpec& cluster,
                                const ModelSpec& model, const WorkloadSpec& workload) {
  std::vector<Violation> v;
  const std::int64_t world = cluster.world_size();

  if (plan.dp_replicate < 1 || plan.dp_shard < 1 || plan.sp < 1 || plan.ep < 1 ||
      plan.micro_batch < 1) {
    add(v, "size_positive", "all plan sizes must be >= 1");
    return v;
  }
  if (plan.tp != 1 || plan.pp != 1) {
    add(v, "tp_pp_unsupported",
        "tensor/pipeline parallel sizing is not supported; tp and pp must be 1");
  }
  if (plan.world() != world) {
    add(v, "world_product",
        "dp_replicate*dp_shard*sp = " + std::to_string(plan.world()) +
            " does not equal world size " + std::to_string(world));
  }

  for (const auto& mod : model.modules) {
    if (!mod.arch) {
      continue;
    }
    const auto& a = *mod.arch;
    const bool in_sp = mod.kind == ModuleKind::foundation;
    if (in_sp && plan.sp > 1) {
      // The attention all-to-all scatters whole heads across the sp group.
      if (a.heads % plan.sp != 0) {
        add(v, "head_divisibility",
            "module '" + mod.name + "': heads " + std::to_string(a.heads) +
                " not divisible by sp " + std::to_string(plan.sp));
      }
      if (a.kv_heads % plan.sp != 0) {
        add(v, "kv_head_divisibility",
            "module '" + mod.name + "': kv_heads " + std::to_string(a.kv_heads) +
                " not divisible by sp " + std::to_string(plan.sp));
      }
    }
    if (a.moe && a.moe->num_experts % plan.ep != 0) {
      add(v, "expert_divisibility",
          "module '" + mod.name + "': num_experts " + std::to_string(a.moe->num_experts) +
              " not divisible by ep " + std::to_string(plan.ep));
    }
  }

  if (workload.seq_len % plan.sp != 0) {
    add(v, "seq_divisibility",
        "seq_len " + std::to_string(workload.seq_len) + " not divisible by sp " +
            std::to_string(plan.sp));
  }
  if (plan.param_shard_degree() % plan.ep != 0) {
    add(v, "ep_factorization",
        "ep " + std::to_string(plan.ep) + " does not divide dp_shard*sp = " +
            std::to_string(plan.param_shard_degree()));
  }
  const std::int64_t batch_unit = plan.dp_width() * plan.micro_batch;
  if (workload.global_batch % batch_unit != 0) {
    add(v, "batch_divisibility",
        "global_batch " + std::to_string(workload.global_batch) +
            " not divisible by dp_replicate*dp_shard*micro_batch = " +
            std::to_string(batch_unit));
  }
  return v;
}

ExpertSharding resolve_expert_sharding(const ParallelPlan& plan, const TransformerSpec& arch) {
  if (!arch.moe) {
    throw std::invalid_argument("resolve_expert_sharding called on a dense module");
  }
  ExpertSharding s;
  s.experts_per_rank = arch.moe->num_experts / plan.ep;
  s.per_expert_fsdp_degree = plan.param_shard_degree() / plan.ep;
  return s;
}

std::vector<ModulePlan> resolve_module_plans(const ParallelPlan&, const ModelSpec& model) {
  std::vector<ModulePlan> out;
  out.reserve(model.modules.size());
  for (const auto& mod : model.modules) {
    ModulePlan mp;
    mp.module_name = mod.name;
    mp.fsdp = true;
    mp.participates_in_sp = mod.kind == ModuleKind::foundation;
    mp.expert_placement = mod.arch && mod.arch->moe.has_value();
    out.push_back(std::move(mp));
  }
  return out;
}

std::vector<ParallelPlan> enumerate_plans(const ClusterSpec& cluster, const ModelSpec& model,
                                          const WorkloadSpec& workload,
                                          const PlanLimits& limits) {
  auto sorted_unique = [](std::vector<std::int64_t> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
  };
  const auto sps = sorted_unique(limits.sp_candidates);
  const auto eps = sorted_unique(limits.ep_candidates);
  const auto reps = sorted_unique(limits.dp_replicate_candidates);
  const auto micros = sorted_unique(limits.micro_batch_candidates.empty()
                                        ? std::vector<std::int64_t>{workload.micro_batch}
                                        : limits.micro_batch_candidates);

  const std::int64_t world = cluster.world_size();
  std::vector<ParallelPlan> plans;
  for (std::int64_t sp : sps) {
    for (std::int64_t ep : eps) {
      for (std::int64_t rep : reps) {
        for (std::int64_t m : micros) {
          if (sp < 1 || ep < 1 || rep < 1 || m < 1 || world % (rep * sp) != 0) {
            continue;
          }
          ParallelPlan p;
          p.sp = sp;
          p.ep = ep;
          p.dp_replicate = rep;
          p.dp_shard = world / (rep * sp);
          p.micro_batch = m;
          if (validate(p, cluster, model, workload).empty()) {
            plans.push_back(p);
          }
        }
      }
    }
  }
  return plans;
}

std::string plan_label(const ParallelPlan& plan) {
  std::string label =
      plan.dp_replicate > 1 ? "HSDP" + std::to_string(plan.dp_replicate) : "FSDP";
  if (plan.sp > 1 || plan.ep > 1) {
    label += "+SP" + std::to_string(plan.sp);
  }
  if (plan.ep > 1) {
    label += "+EP" + std::to_string(plan.ep);
  }
  return label;
}

Mesh plan_mesh(const ParallelPlan& plan) {
  return build_mesh({{"dp_replicate", plan.dp_replicate},
                     {"dp_shard", plan.dp_shard},
                     {"sp", plan.sp}},
                    plan.world());
}

std::vector<Group> ep_groups(const ParallelPlan& plan) {
  const Mesh mesh = plan_mesh(plan);
  std::vector<Group> out;
  const auto ep = static_cast<std::size_t>(plan.ep);
  for (const auto& flat : groups_along(mesh, {"dp_shard", "sp"})) {
    for (std::size_t base = 0; base + ep <= flat.members.size(); base += ep) {
      Group g;
      g.dim_names = {"ep"};
      g.members.assign(flat.members.begin() + static_cast<std::ptrdiff_t>(base),
                       flat.members.begin() + static_cast<std::ptrdiff_t>(base + ep));
      out.push_back(std::move(g));
    }
  }
  return out;
}

} // namespace omniplan
