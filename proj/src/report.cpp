// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "omniplan/config_io.hpp"

namespace omniplan {

using nlohmann::json;

double bytes_to_gib(double bytes) { return bytes / static_cast<double>(1ll << 30); }

std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

void sort_rows(RecipeReport& report) {
  std::sort(report.rows.begin(), report.rows.end(), [](const RecipeRow& a, const RecipeRow& b) {
    if (a.seqlen != b.seqlen) {
      return a.seqlen < b.seqlen;
    }
    return a.method < b.method;
  });
  std::sort(report.infeasible.begin(), report.infeasible.end(),
            [](const InfeasibleEntry& a, const InfeasibleEntry& b) {
              if (a.seqlen != b.seqlen) {
                return a.seqlen < b.seqlen;
              }
              return a.method < b.method;
            });
}

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

} // namespace

std::string render_markdown(const RecipeReport& report) {
  std::ostringstream os;
  os << "| Method | Seqlen | Memory (GB) | Throughput | MFU (%) |\n";
  os << "|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    os << "| " << row.method << " | " << row.seqlen << " | ";
    if (row.oom) {
      os << "OOM | - | - |\n";
      continue;
    }
    os << fixed(bytes_to_gib(row.memory.total), 2) << " | ";
    if (row.step) {
      os << fixed(row.step->throughput, 0) << " | " << fixed(row.step->mfu * 100.0, 2)
         << " |\n";
    } else {
      os << "- | - |\n";
    }
  }
  if (!report.infeasible.empty()) {
    os << "\nInfeasible plans:\n";
    for (const auto& entry : report.infeasible) {
      os << "- " << entry.method << " @ " << entry.seqlen << ":";
      for (const auto& violation : entry.violations) {
        os << " " << violation.code;
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string render_csv(const RecipeReport& report) {
  std::ostringstream os;
  os << "method,seqlen,memory_gb,throughput,mfu_pct,oom\n";
  for (const auto& row : report.rows) {
    os << row.method << "," << row.seqlen << ",";
    os << fixed(bytes_to_gib(row.memory.total), 6) << ",";
    if (row.step) {
      os << fixed(row.step->throughput, 6) << "," << fixed(row.step->mfu * 100.0, 6);
    } else {
      os << ",";
    }
    os << "," << (row.oom ? 1 : 0) << "\n";
  }
  return os.str();
}

json to_json(const MemoryBreakdown& b) {
  return json{{"params", b.params},
              {"grads", b.grads},
              {"optimizer", b.optimizer},
              {"activations_saved", b.activations_saved},
              {"activations_working", b.activations_working},
              {"comm_buffers", b.comm_buffers},
              {"logits", b.logits},
              {"runtime_overhead", b.runtime_overhead},
              {"total", b.total},
              {"total_gib", bytes_to_gib(b.total)}};
}

json to_json(const StepReport& r) {
  json phases = json::object();
  for (const auto& [phase, cost] : r.phase_breakdown) {
    phases[phase] = {{"compute_s", cost.compute_s}, {"comm_s", cost.comm_s}};
  }
  return json{{"step_time_s", r.step_time},
              {"throughput_tokens_per_s_per_gpu", r.throughput},
              {"mfu", r.mfu},
              {"exposed_comm_fraction", r.exposed_comm},
              {"model_flops_per_token", r.model_flops_per_token},
              {"phase_breakdown", std::move(phases)}};
}

json to_json(const RecipeReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json rj{{"method", row.method},
            {"seqlen", row.seqlen},
            {"plan", to_json(row.plan)},
            {"memory", to_json(row.memory)},
            {"memory_gb", bytes_to_gib(row.memory.total)},
            {"oom", row.oom}};
    if (row.step) {
      rj["step"] = to_json(*row.step);
      rj["throughput"] = row.step->throughput;
      rj["mfu_pct"] = row.step->mfu * 100.0;
    }
    rows.push_back(std::move(rj));
  }

  // Feasible methods ranked by descending throughput within each seqlen.
  json ranking = json::array();
  std::vector<std::int64_t> seqlens;
  for (const auto& row : report.rows) {
    if (std::find(seqlens.begin(), seqlens.end(), row.seqlen) == seqlens.end()) {
      seqlens.push_back(row.seqlen);
    }
  }
  for (std::int64_t s : seqlens) {
    std::vector<const RecipeRow*> feasible;
    for (const auto& row : report.rows) {
      if (row.seqlen == s && row.step && !row.oom) {
        feasible.push_back(&row);
      }
    }
    std::stable_sort(feasible.begin(), feasible.end(),
                     [](const RecipeRow* a, const RecipeRow* b) {
                       return a->step->throughput > b->step->throughput;
                     });
    json methods = json::array();
    for (const auto* row : feasible) {
      methods.push_back(row->method);
    }
    ranking.push_back({{"seqlen", s}, {"methods", std::move(methods)}});
  }

  json infeasible = json::array();
  for (const auto& entry : report.infeasible) {
    json codes = json::array();
    for (const auto& violation : entry.violations) {
      codes.push_back(violation.code);
    }
    infeasible.push_back(
        {{"method", entry.method}, {"seqlen", entry.seqlen}, {"violations", codes}});
  }

  json meta{{"tool_version", kToolVersion},
            {"cluster_hash", report.cluster_hash},
            {"model_hash", report.model_hash},
            {"workload_hash", report.workload_hash}};
  if (!report.stamp.empty()) {
    meta["stamp"] = report.stamp;
  }
  return json{{"rows", std::move(rows)},
              {"ranking", std::move(ranking)},
              {"infeasible", std::move(infeasible)},
              {"metadata", std::move(meta)}};
}

} // namespace omniplan
