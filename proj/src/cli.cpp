// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "omniplan/config_io.hpp"
#include "omniplan/memory.hpp"
#include "omniplan/packing.hpp"
#include "omniplan/report.hpp"
#include "omniplan/reshard.hpp"
#include "omniplan/simulator.hpp"
#include "omniplan/step_graph.hpp"

namespace omniplan::cli {

using nlohmann::json;

namespace {

struct Configs {
  ClusterSpec cluster;
  ModelSpec model;
  WorkloadSpec workload;
};

Configs load_configs(const std::string& cluster_path, const std::string& model_path,
                     const std::string& workload_path) {
  Configs c;
  c.cluster = load_cluster(cluster_path);
  c.model = load_model(model_path);
  c.workload = load_workload(workload_path);
  cross_validate(c.workload, c.model);
  return c;
}

ParallelPlan plan_from_flags(const PlanFlags& flags, const ClusterSpec& cluster,
                             const WorkloadSpec& workload) {
  ParallelPlan p;
  p.dp_replicate = flags.dp_replicate;
  p.sp = flags.sp;
  p.ep = flags.ep;
  if (flags.dp_replicate * flags.sp > 0 &&
      cluster.world_size() % (flags.dp_replicate * flags.sp) == 0) {
    p.dp_shard = cluster.world_size() / (flags.dp_replicate * flags.sp);
  }
  p.micro_batch = flags.micro_batch > 0 ? flags.micro_batch : workload.micro_batch;
  p.recompute = flags.recompute == "none" ? RecomputeMode::none : RecomputeMode::full;
  p.offload.optimizer = flags.offload_optimizer;
  p.offload.activations = flags.offload_activations;
  p.async_ulysses = flags.async_ulysses;
  p.moe_overlap = flags.moe_overlap;
  p.fsdp_prefetch_depth = flags.fsdp_prefetch_depth;
  p.moe_imbalance = flags.moe_imbalance;
  return p;
}

void apply_flags_to_candidate(ParallelPlan& p, const PlanFlags& flags) {
  p.recompute = flags.recompute == "none" ? RecomputeMode::none : RecomputeMode::full;
  p.offload.optimizer = flags.offload_optimizer;
  p.offload.activations = flags.offload_activations;
  p.async_ulysses = flags.async_ulysses;
  p.moe_overlap = flags.moe_overlap;
  p.fsdp_prefetch_depth = flags.fsdp_prefetch_depth;
  p.moe_imbalance = flags.moe_imbalance;
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

int violations_exit(const std::vector<Violation>& violations, std::ostream& err) {
  err << "plan invalid:";
  for (const auto& v : violations) {
    err << " " << v.code;
  }
  err << "\n";
  for (const auto& v : violations) {
    err << "  " << v.code << ": " << v.message << "\n";
  }
  return kExitPlanInvalid;
}

} // namespace

int cmd_plan(const PlanCommand& cmd, std::ostream& out, std::ostream& err) {
  Configs cfg;
  try {
    cfg = load_configs(cmd.cluster_path, cmd.model_path, cmd.workload_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  auto sorted_unique = [](std::vector<std::int64_t> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
  };
  const std::vector<std::int64_t> seqlens = sorted_unique(
      cmd.seqlens.empty() ? std::vector<std::int64_t>{cfg.workload.seq_len} : cmd.seqlens);

  struct Cell {
    ParallelPlan plan;
    WorkloadSpec workload;
    std::int64_t seqlen = 0;
    bool valid = false;
    std::vector<Violation> violations;
  };
  std::vector<Cell> cells;
  PlanLimits limits;
  limits.sp_candidates = sorted_unique(cmd.sp_candidates);
  limits.ep_candidates = sorted_unique(cmd.ep_candidates);
  limits.dp_replicate_candidates = sorted_unique(cmd.dp_replicate_candidates);
  limits.micro_batch_candidates = sorted_unique(cmd.micro_batch_candidates);

  for (std::int64_t s : seqlens) {
    WorkloadSpec w = cfg.workload;
    w.seq_len = s;
    // Walk the full candidate grid so infeasible combinations can be listed
    // with their violations; the valid subset matches enumerate_plans.
    const auto micros = limits.micro_batch_candidates.empty()
                            ? std::vector<std::int64_t>{w.micro_batch}
                            : limits.micro_batch_candidates;
    for (std::int64_t sp : limits.sp_candidates) {
      for (std::int64_t ep : limits.ep_candidates) {
        for (std::int64_t rep : limits.dp_replicate_candidates) {
          for (std::int64_t m : micros) {
            Cell cell;
            cell.seqlen = s;
            cell.workload = w;
            cell.plan.sp = sp;
            cell.plan.ep = ep;
            cell.plan.dp_replicate = rep;
            cell.plan.micro_batch = m;
            if (rep * sp > 0 && cfg.cluster.world_size() % (rep * sp) == 0) {
              cell.plan.dp_shard = cfg.cluster.world_size() / (rep * sp);
            }
            apply_flags_to_candidate(cell.plan, cmd.flags);
            cell.violations = validate(cell.plan, cfg.cluster, cfg.model, cell.workload);
            cell.valid = cell.violations.empty();
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }

  RecipeReport report;
  report.cluster_hash = config_hash(to_json(cfg.cluster));
  report.model_hash = config_hash(to_json(cfg.model));
  report.workload_hash = config_hash(to_json(cfg.workload));
  if (cmd.stamp) {
    report.stamp = iso_timestamp();
  }

  std::vector<RecipeRow> rows(cells.size());
  std::vector<char> row_used(cells.size(), 0);
  SimOptions sim_options;
  sim_options.compute_efficiency = cmd.efficiency;

  auto evaluate = [&](std::size_t i) {
    const Cell& cell = cells[i];
    if (!cell.valid) {
      return;
    }
    RecipeRow row;
    row.plan = cell.plan;
    row.method = plan_label(cell.plan);
    row.seqlen = cell.seqlen;
    row.memory = estimate(cell.plan, cfg.model, cfg.cluster, cell.workload);
    row.oom = !fits(row.memory, cfg.cluster.gpu);
    if (!row.oom) {
      const StepGraph graph =
          build_step_graph(cell.plan, cfg.model, cfg.cluster, cell.workload);
      const Timeline tl = simulate(graph, cell.plan, cfg.cluster, sim_options);
      row.step =
          omniplan::report(tl, graph, cell.plan, cfg.model, cfg.cluster, cell.workload);
    }
    rows[i] = std::move(row);
    row_used[i] = 1;
  };

  const int jobs = std::max(1, cmd.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      evaluate(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
          evaluate(i);
        }
      });
    }
    for (auto& w : workers) {
      w.join();
    }
  }

  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (row_used[i]) {
      report.rows.push_back(std::move(rows[i]));
    } else {
      report.infeasible.push_back(
          InfeasibleEntry{plan_label(cells[i].plan), cells[i].seqlen, cells[i].violations});
    }
  }
  sort_rows(report);

  if (cmd.format == "json") {
    out << to_json(report).dump(2) << "\n";
  } else if (cmd.format == "csv") {
    out << render_csv(report);
  } else {
    out << render_markdown(report);
  }
  return kExitOk;
}

int cmd_simulate(const SimulateCommand& cmd, std::ostream& out, std::ostream& err) {
  Configs cfg;
  try {
    cfg = load_configs(cmd.cluster_path, cmd.model_path, cmd.workload_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const ParallelPlan plan = plan_from_flags(cmd.flags, cfg.cluster, cfg.workload);
  const auto violations = validate(plan, cfg.cluster, cfg.model, cfg.workload);
  if (!violations.empty()) {
    return violations_exit(violations, err);
  }

  SimOptions options;
  options.compute_efficiency = cmd.efficiency;
  const StepGraph graph = build_step_graph(plan, cfg.model, cfg.cluster, cfg.workload);
  const Timeline tl = simulate(graph, plan, cfg.cluster, options);
  const StepReport step = report(tl, graph, plan, cfg.model, cfg.cluster, cfg.workload);

  if (!cmd.trace_path.empty()) {
    std::ofstream trace(cmd.trace_path);
    if (!trace) {
      err << "cannot write trace file " << cmd.trace_path << "\n";
      return kExitConfig;
    }
    write_chrome_trace(trace, tl, graph);
  }

  if (cmd.format == "md") {
    out << "| Metric | Value |\n|---|---|\n";
    out << "| Method | " << plan_label(plan) << " |\n";
    out << "| Step time (s) | " << step.step_time << " |\n";
    out << "| Throughput (tokens/s/GPU) | " << step.throughput << " |\n";
    out << "| MFU (%) | " << step.mfu * 100.0 << " |\n";
    out << "| Exposed comm (%) | " << step.exposed_comm * 100.0 << " |\n";
  } else if (cmd.format == "csv") {
    out << "metric,value\n";
    out << "method," << plan_label(plan) << "\n";
    out << "step_time_s," << step.step_time << "\n";
    out << "throughput_tokens_per_s_per_gpu," << step.throughput << "\n";
    out << "mfu," << step.mfu << "\n";
    out << "exposed_comm_fraction," << step.exposed_comm << "\n";
  } else {
    json j{{"method", plan_label(plan)},
           {"plan", to_json(plan)},
           {"report", to_json(step)}};
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_estimate_memory(const EstimateMemoryCommand& cmd, std::ostream& out,
                        std::ostream& err) {
  Configs cfg;
  try {
    cfg = load_configs(cmd.cluster_path, cmd.model_path, cmd.workload_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const ParallelPlan plan = plan_from_flags(cmd.flags, cfg.cluster, cfg.workload);
  const auto violations = validate(plan, cfg.cluster, cfg.model, cfg.workload);
  if (!violations.empty()) {
    return violations_exit(violations, err);
  }
  const MemoryConfig mem_config;
  const MemoryBreakdown breakdown = estimate(plan, cfg.model, cfg.cluster, cfg.workload,
                                             mem_config);
  if (cmd.format == "md") {
    out << "| Component | GiB |\n|---|---|\n";
    const auto line = [&](const char* name, double bytes) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f", bytes_to_gib(bytes));
      out << "| " << name << " | " << buf << " |\n";
    };
    line("params", breakdown.params);
    line("grads", breakdown.grads);
    line("optimizer", breakdown.optimizer);
    line("activations_saved", breakdown.activations_saved);
    line("activations_working", breakdown.activations_working);
    line("comm_buffers", breakdown.comm_buffers);
    line("logits", breakdown.logits);
    line("runtime_overhead", breakdown.runtime_overhead);
    line("total", breakdown.total);
    out << "\nFits " << (fits(breakdown, cfg.cluster.gpu) ? "yes" : "no") << "\n";
  } else if (cmd.format == "csv") {
    out << "component,bytes\n";
    out << "params," << breakdown.params << "\n";
    out << "grads," << breakdown.grads << "\n";
    out << "optimizer," << breakdown.optimizer << "\n";
    out << "activations_saved," << breakdown.activations_saved << "\n";
    out << "activations_working," << breakdown.activations_working << "\n";
    out << "comm_buffers," << breakdown.comm_buffers << "\n";
    out << "logits," << breakdown.logits << "\n";
    out << "runtime_overhead," << breakdown.runtime_overhead << "\n";
    out << "total," << breakdown.total << "\n";
  } else {
    json j{{"method", plan_label(plan)},
           {"plan", to_json(plan)},
           {"memory", to_json(breakdown)},
           {"fits", fits(breakdown, cfg.cluster.gpu)},
           {"memory_config",
            {{"working_set_coefficient", mem_config.working_set_coefficient},
             {"ce_chunk_tokens", mem_config.ce_chunk_tokens},
             {"naive_logits", mem_config.naive_logits},
             {"runtime_overhead_bytes", mem_config.runtime_overhead_bytes},
             {"comm_group_workspace_bytes", mem_config.comm_group_workspace_bytes}}}};
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_pack(const PackCommand& cmd, std::ostream& out, std::ostream& err) {
  std::ifstream in(cmd.lengths_path);
  if (!in) {
    err << "config error: " << cmd.lengths_path << ": cannot open file\n";
    return kExitConfig;
  }
  if (cmd.target_length < 1) {
    err << "config error: target length must be >= 1\n";
    return kExitConfig;
  }

  std::vector<Sample> samples;
  std::string line;
  std::int64_t line_number = 0;
  std::vector<std::int64_t> line_of_sample;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    std::int64_t length = 0;
    try {
      length = std::stoll(line);
    } catch (const std::exception&) {
      err << "config error: " << cmd.lengths_path << ": line " << line_number
          << ": not an integer\n";
      return kExitConfig;
    }
    samples.push_back(Sample{static_cast<std::int64_t>(samples.size()), length});
    line_of_sample.push_back(line_number);
  }

  const PackPolicy policy = cmd.policy == "first_fit_arrival"
                                ? PackPolicy::first_fit_arrival
                                : PackPolicy::first_fit_decreasing;
  std::vector<PackedBatch> batches;
  try {
    batches = pack(samples, cmd.target_length, policy);
  } catch (const PackError& e) {
    err << "pack error: line " << line_of_sample[static_cast<std::size_t>(e.sample_id)]
        << ": " << e.what() << "\n";
    return kExitPack;
  }

  json jbatches = json::array();
  for (const auto& b : batches) {
    json entries = json::array();
    for (const auto& entry : b.entries) {
      entries.push_back({{"id", entry.id}, {"offset", entry.offset}, {"length", entry.length}});
    }
    jbatches.push_back({{"entries", std::move(entries)}, {"boundaries", b.boundaries}});
  }
  json j{{"target_length", cmd.target_length},
         {"policy", cmd.policy},
         {"batch_count", batches.size()},
         {"padding_ratio", padding_ratio(batches)},
         {"batches", std::move(jbatches)}};
  if (cmd.compare) {
    const auto ffd = pack(samples, cmd.target_length, PackPolicy::first_fit_decreasing);
    const auto arrival = pack(samples, cmd.target_length, PackPolicy::first_fit_arrival);
    j["comparison"] = {
        {"first_fit_decreasing",
         {{"batch_count", ffd.size()}, {"padding_ratio", padding_ratio(ffd)}}},
        {"first_fit_arrival",
         {{"batch_count", arrival.size()}, {"padding_ratio", padding_ratio(arrival)}}}};
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_reshard(const ReshardCommand& cmd, std::ostream& out, std::ostream& err) {
  LayoutFile src;
  LayoutFile dst;
  try {
    src = load_layout(cmd.src_layout_path);
    dst = load_layout(cmd.dst_layout_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (src.params.size() != dst.params.size()) {
    err << "reshard error: layouts declare different parameter counts\n";
    return kExitReshard;
  }
  std::vector<ReshardPlan> plans;
  for (std::size_t i = 0; i < src.params.size(); ++i) {
    try {
      plans.push_back(make_plan(src.params[i], dst.params[i]));
    } catch (const std::invalid_argument& e) {
      err << "reshard error: " << e.what() << "\n";
      return kExitReshard;
    }
  }

  json jplans = json::array();
  for (const auto& plan : plans) {
    jplans.push_back(to_json(plan));
  }
  json j{{"src_parts", src.parts}, {"dst_parts", dst.parts}, {"plans", std::move(jplans)}};

  if (!cmd.verify_path.empty()) {
    std::ifstream data(cmd.verify_path, std::ios::binary);
    if (!data) {
      err << "config error: " << cmd.verify_path << ": cannot open file\n";
      return kExitConfig;
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(data)),
                                    std::istreambuf_iterator<char>());
    std::int64_t total = 0;
    for (const auto& p : src.params) {
      total += p.numel;
    }
    if (static_cast<std::int64_t>(bytes.size()) != total) {
      err << "reshard error: data file holds " << bytes.size() << " bytes, layouts need "
          << total << "\n";
      return kExitReshard;
    }
    std::int64_t offset = 0;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      const std::vector<std::uint8_t> flat(bytes.begin() + offset,
                                           bytes.begin() + offset + src.params[i].numel);
      offset += src.params[i].numel;
      const auto moved = apply_plan(plans[i], shard_array(flat, src.parts), dst.parts);
      if (moved != shard_array(flat, dst.parts)) {
        err << "reshard error: verification mismatch on param '" << plans[i].param_id
            << "'\n";
        return kExitReshard;
      }
    }
    j["verified"] = true;
  }

  if (cmd.out_path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    std::ofstream file(cmd.out_path);
    if (!file) {
      err << "config error: cannot write " << cmd.out_path << "\n";
      return kExitConfig;
    }
    file << j.dump(2) << "\n";
  }
  return kExitOk;
}

} // namespace omniplan::cli
