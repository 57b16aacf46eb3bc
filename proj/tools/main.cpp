// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"

#include "omniplan/cli.hpp"
#include "omniplan/report.hpp"

namespace {

void add_config_options(CLI::App* app, std::string& cluster, std::string& model,
                        std::string& workload) {
  app->add_option("--cluster", cluster, "cluster JSON file")->required();
  app->add_option("--model", model, "model JSON file")->required();
  app->add_option("--workload", workload, "workload JSON file")->required();
}

void add_plan_flags(CLI::App* app, omniplan::cli::PlanFlags& flags, bool single_plan) {
  if (single_plan) {
    app->add_option("--sp", flags.sp, "sequence-parallel size");
    app->add_option("--ep", flags.ep, "expert-parallel size");
    app->add_option("--dp-replicate", flags.dp_replicate, "data-parallel replicate size");
    app->add_option("--micro-batch", flags.micro_batch, "micro batch per rank");
  }
  app->add_option("--recompute", flags.recompute, "activation recompute: none|full")
      ->check(CLI::IsMember({"none", "full"}));
  app->add_flag("--offload-optimizer", flags.offload_optimizer, "offload optimizer states");
  app->add_flag("--offload-activations", flags.offload_activations,
                "offload saved activations");
  app->add_flag("--async-ulysses", flags.async_ulysses,
                "overlap attention all-to-alls with projections");
  app->add_flag("--moe-overlap", flags.moe_overlap,
                "overlap MoE dispatch/combine with expert compute");
  app->add_option("--fsdp-prefetch-depth", flags.fsdp_prefetch_depth,
                  "layers of parameter all-gather prefetch (0 = serialized)");
  app->add_option("--moe-imbalance", flags.moe_imbalance, "MoE routing imbalance multiplier");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"omniplan: planner and step simulator for n-D parallel training"};
  app.set_version_flag("--version", omniplan::kToolVersion);
  app.require_subcommand(1);

  omniplan::cli::PlanCommand plan_cmd;
  auto* plan = app.add_subcommand("plan", "sweep and rank training recipes");
  add_config_options(plan, plan_cmd.cluster_path, plan_cmd.model_path, plan_cmd.workload_path);
  plan->add_option("--sp", plan_cmd.sp_candidates, "sequence-parallel sizes to sweep");
  plan->add_option("--ep", plan_cmd.ep_candidates, "expert-parallel sizes to sweep");
  plan->add_option("--dp-replicate", plan_cmd.dp_replicate_candidates,
                   "replicate sizes to sweep");
  plan->add_option("--micro-batch", plan_cmd.micro_batch_candidates,
                   "micro batch sizes to sweep");
  plan->add_option("--seqlens", plan_cmd.seqlens, "sequence lengths to sweep");
  add_plan_flags(plan, plan_cmd.flags, /*single_plan=*/false);
  plan->add_option("--format", plan_cmd.format, "md|csv|json")
      ->check(CLI::IsMember({"md", "csv", "json"}));
  plan->add_option("--jobs", plan_cmd.jobs, "parallel evaluations");
  plan->add_flag("--stamp", plan_cmd.stamp, "embed a timestamp in the report");
  plan->add_option("--efficiency", plan_cmd.efficiency, "compute efficiency scalar");

  omniplan::cli::SimulateCommand sim_cmd;
  auto* simulate = app.add_subcommand("simulate", "simulate one training step");
  add_config_options(simulate, sim_cmd.cluster_path, sim_cmd.model_path,
                     sim_cmd.workload_path);
  add_plan_flags(simulate, sim_cmd.flags, /*single_plan=*/true);
  simulate->add_option("--format", sim_cmd.format, "md|csv|json")
      ->check(CLI::IsMember({"md", "csv", "json"}));
  simulate->add_option("--trace", sim_cmd.trace_path, "write a chrome-trace JSON file");
  simulate->add_option("--efficiency", sim_cmd.efficiency, "compute efficiency scalar");

  omniplan::cli::EstimateMemoryCommand mem_cmd;
  auto* estimate = app.add_subcommand("estimate-memory", "per-rank memory breakdown");
  add_config_options(estimate, mem_cmd.cluster_path, mem_cmd.model_path,
                     mem_cmd.workload_path);
  add_plan_flags(estimate, mem_cmd.flags, /*single_plan=*/true);
  estimate->add_option("--format", mem_cmd.format, "md|csv|json")
      ->check(CLI::IsMember({"md", "csv", "json"}));

  omniplan::cli::PackCommand pack_cmd;
  auto* pack = app.add_subcommand("pack", "pack variable-length samples into batches");
  pack->add_option("lengths", pack_cmd.lengths_path, "newline-delimited sample lengths")
      ->required();
  pack->add_option("--target", pack_cmd.target_length, "target sequence length")->required();
  pack->add_option("--policy", pack_cmd.policy, "first_fit_decreasing|first_fit_arrival")
      ->check(CLI::IsMember({"first_fit_decreasing", "first_fit_arrival"}));
  pack->add_flag("--compare", pack_cmd.compare, "report both policies' batch counts");

  omniplan::cli::ReshardCommand reshard_cmd;
  auto* reshard = app.add_subcommand("reshard", "checkpoint reshard copy plan");
  reshard->add_option("--src", reshard_cmd.src_layout_path, "source layout JSON")->required();
  reshard->add_option("--dst", reshard_cmd.dst_layout_path, "destination layout JSON")
      ->required();
  reshard->add_option("--out", reshard_cmd.out_path, "write the plan here instead of stdout");
  reshard->add_option("--verify", reshard_cmd.verify_path,
                      "apply the plan to this data file and check the round trip");

  CLI11_PARSE(app, argc, argv);

  if (plan->parsed()) {
    return omniplan::cli::cmd_plan(plan_cmd, std::cout, std::cerr);
  }
  if (simulate->parsed()) {
    return omniplan::cli::cmd_simulate(sim_cmd, std::cout, std::cerr);
  }
  if (estimate->parsed()) {
    return omniplan::cli::cmd_estimate_memory(mem_cmd, std::cout, std::cerr);
  }
  if (pack->parsed()) {
    return omniplan::cli::cmd_pack(pack_cmd, std::cout, std::cerr);
  }
  if (reshard->parsed()) {
    return omniplan::cli::cmd_reshard(reshard_cmd, std::cout, std::cerr);
  }
  return 0;
}
