// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/config_io.hpp"

#include <fstream>
#include <sstream>

namespace omniplan {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw ConfigError(context.empty() ? message : context + ": " + message);
}

void require_fields(const json& j, const std::vector<std::string>& fields,
                    const std::string& context) {
  for (const auto& f : fields) {
    if (!j.contains(f)) {
      fail(context, "missing required field '" + f + "'");
    }
  }
}

void check_or_fail(const std::vector<std::string>& problems, const std::string& context) {
  if (!problems.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      os << (i ? "; " : "") << problems[i];
    }
    fail(context, os.str());
  }
}

} // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(path, "cannot open file");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path, std::string("JSON parse error: ") + e.what());
  }
}

ClusterSpec parse_cluster(const json& j) {
  require_fields(j, {"num_nodes", "gpus_per_node", "gpu", "link"}, "cluster");
  require_fields(j.at("gpu"), {"peak_flops", "hbm_bytes"}, "cluster.gpu");
  require_fields(j.at("link"),
                 {"intra_node_bw", "inter_node_bw", "intra_latency", "inter_latency"},
                 "cluster.link");
  ClusterSpec c;
  c.num_nodes = j.at("num_nodes").get<std::int64_t>();
  c.gpus_per_node = j.at("gpus_per_node").get<std::int64_t>();
  c.gpu.peak_flops = j.at("gpu").at("peak_flops").get<double>();
  c.gpu.hbm_bytes = j.at("gpu").at("hbm_bytes").get<double>();
  c.link.intra_node_bw = j.at("link").at("intra_node_bw").get<double>();
  c.link.inter_node_bw = j.at("link").at("inter_node_bw").get<double>();
  c.link.intra_latency = j.at("link").at("intra_latency").get<double>();
  c.link.inter_latency = j.at("link").at("inter_latency").get<double>();
  check_or_fail(check(c), "cluster");
  return c;
}

namespace {

TransformerSpec parse_arch(const json& j, const std::string& context) {
  require_fields(j, {"layers", "hidden", "heads", "kv_heads", "head_dim", "ffn_dim", "vocab"},
                 context);
  TransformerSpec a;
  a.layers = j.at("layers").get<std::int64_t>();
  a.hidden = j.at("hidden").get<std::int64_t>();
  a.heads = j.at("heads").get<std::int64_t>();
  a.kv_heads = j.at("kv_heads").get<std::int64_t>();
  a.head_dim = j.at("head_dim").get<std::int64_t>();
  a.ffn_dim = j.at("ffn_dim").get<std::int64_t>();
  a.vocab = j.at("vocab").get<std::int64_t>();
  if (j.contains("moe")) {
    require_fields(j.at("moe"), {"num_experts", "top_k", "expert_ffn_dim"}, context + ".moe");
    MoeSpec m;
    m.num_experts = j.at("moe").at("num_experts").get<std::int64_t>();
    m.top_k = j.at("moe").at("top_k").get<std::int64_t>();
    m.expert_ffn_dim = j.at("moe").at("expert_ffn_dim").get<std::int64_t>();
    m.moe_layer_stride = j.at("moe").value("moe_layer_stride", std::int64_t{1});
    a.moe = m;
  }
  return a;
}

ModuleKind parse_kind(const std::string& kind, const std::string& context) {
  if (kind == "encoder") {
    return ModuleKind::encoder;
  }
  if (kind == "foundation") {
    return ModuleKind::foundation;
  }
  if (kind == "decoder") {
    return ModuleKind::decoder;
  }
  fail(context, "unknown module kind '" + kind + "'");
}

} // namespace

ModelSpec parse_model(const json& j) {
  require_fields(j, {"modules"}, "model");
  ModelSpec m;
  m.param_dtype_bytes = j.value("param_dtype_bytes", std::int64_t{2});
  for (const auto& mj : j.at("modules")) {
    require_fields(mj, {"name", "kind"}, "model.modules[]");
    ModuleSpec mod;
    mod.name = mj.at("name").get<std::string>();
    const std::string context = "model.modules['" + mod.name + "']";
    mod.kind = parse_kind(mj.at("kind").get<std::string>(), context);
    mod.trainable = mj.value("trainable", false);
    mod.tokens_per_item = mj.value("tokens_per_item", std::int64_t{0});
    if (mj.contains("arch")) {
      mod.arch = parse_arch(mj.at("arch"), context + ".arch");
    }
    if (mj.contains("raw_param_count")) {
      mod.raw_param_count = mj.at("raw_param_count").get<std::int64_t>();
    }
    m.modules.push_back(std::move(mod));
  }
  check_or_fail(check(m), "model");
  if (!m.foundation().arch) {
    fail("model", "the foundation module requires an arch");
  }
  return m;
}

WorkloadSpec parse_workload(const json& j) {
  require_fields(j, {"seq_len", "micro_batch", "global_batch"}, "workload");
  WorkloadSpec w;
  w.seq_len = j.at("seq_len").get<std::int64_t>();
  w.micro_batch = j.at("micro_batch").get<std::int64_t>();
  w.global_batch = j.at("global_batch").get<std::int64_t>();
  if (j.contains("modality_mix")) {
    for (const auto& [name, frac] : j.at("modality_mix").items()) {
      w.modality_mix[name] = frac.get<double>();
    }
  }
  check_or_fail(check(w), "workload");
  return w;
}

namespace {

template <typename T>
T load_with_context(const std::string& path, T (*parse)(const json&)) {
  try {
    return parse(load_json_file(path));
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) {
      throw;
    }
    throw ConfigError(path + ": " + e.what());
  }
}

} // namespace

ClusterSpec load_cluster(const std::string& path) {
  return load_with_context(path, parse_cluster);
}

ModelSpec load_model(const std::string& path) { return load_with_context(path, parse_model); }

WorkloadSpec load_workload(const std::string& path) {
  return load_with_context(path, parse_workload);
}

void cross_validate(const WorkloadSpec& workload, const ModelSpec& model) {
  for (const auto& [name, frac] : workload.modality_mix) {
    (void)frac;
    if (name == "text") {
      continue;
    }
    bool found = false;
    for (const auto& mod : model.modules) {
      found = found || mod.name == name;
    }
    if (!found) {
      fail("workload", "modality_mix entry '" + name + "' names no model module");
    }
  }
}

json to_json(const ClusterSpec& cluster) {
  return json{{"num_nodes", cluster.num_nodes},
              {"gpus_per_node", cluster.gpus_per_node},
              {"gpu",
               {{"peak_flops", cluster.gpu.peak_flops}, {"hbm_bytes", cluster.gpu.hbm_bytes}}},
              {"link",
               {{"intra_node_bw", cluster.link.intra_node_bw},
                {"inter_node_bw", cluster.link.inter_node_bw},
                {"intra_latency", cluster.link.intra_latency},
                {"inter_latency", cluster.link.inter_latency}}}};
}

json to_json(const ModelSpec& model) {
  json modules = json::array();
  for (const auto& mod : model.modules) {
    json mj{{"name", mod.name},
            {"kind", mod.kind == ModuleKind::encoder      ? "encoder"
                     : mod.kind == ModuleKind::foundation ? "foundation"
                                                          : "decoder"},
            {"trainable", mod.trainable},
            {"tokens_per_item", mod.tokens_per_item}};
    if (mod.arch) {
      json aj{{"layers", mod.arch->layers},     {"hidden", mod.arch->hidden},
              {"heads", mod.arch->heads},       {"kv_heads", mod.arch->kv_heads},
              {"head_dim", mod.arch->head_dim}, {"ffn_dim", mod.arch->ffn_dim},
              {"vocab", mod.arch->vocab}};
      if (mod.arch->moe) {
        aj["moe"] = {{"num_experts", mod.arch->moe->num_experts},
                     {"top_k", mod.arch->moe->top_k},
                     {"expert_ffn_dim", mod.arch->moe->expert_ffn_dim},
                     {"moe_layer_stride", mod.arch->moe->moe_layer_stride}};
      }
      mj["arch"] = std::move(aj);
    }
    if (mod.raw_param_count) {
      mj["raw_param_count"] = *mod.raw_param_count;
    }
    modules.push_back(std::move(mj));
  }
  return json{{"param_dtype_bytes", model.param_dtype_bytes}, {"modules", std::move(modules)}};
}

json to_json(const WorkloadSpec& workload) {
  json mix = json::object();
  for (const auto& [name, frac] : workload.modality_mix) {
    mix[name] = frac;
  }
  return json{{"seq_len", workload.seq_len},
              {"micro_batch", workload.micro_batch},
              {"global_batch", workload.global_batch},
              {"modality_mix", std::move(mix)}};
}

json to_json(const ParallelPlan& plan) {
  return json{{"dp_replicate", plan.dp_replicate},
              {"dp_shard", plan.dp_shard},
              {"sp", plan.sp},
              {"ep", plan.ep},
              {"micro_batch", plan.micro_batch},
              {"recompute", plan.recompute == RecomputeMode::full ? "full" : "none"},
              {"offload_optimizer", plan.offload.optimizer},
              {"offload_activations", plan.offload.activations},
              {"async_ulysses", plan.async_ulysses},
              {"moe_overlap", plan.moe_overlap},
              {"fsdp_prefetch_depth", plan.fsdp_prefetch_depth},
              {"moe_imbalance", plan.moe_imbalance},
              {"label", plan_label(plan)}};
}

LayoutFile load_layout(const std::string& path) {
  const json j = load_json_file(path);
  try {
    require_fields(j, {"parts", "params"}, "layout");
    LayoutFile layout;
    layout.parts = j.at("parts").get<std::int64_t>();
    if (layout.parts < 1) {
      fail("layout", "parts must be >= 1");
    }
    for (const auto& pj : j.at("params")) {
      require_fields(pj, {"id", "numel"}, "layout.params[]");
      ShardLayout s;
      s.param_id = pj.at("id").get<std::string>();
      s.numel = pj.at("numel").get<std::int64_t>();
      s.parts = layout.parts;
      if (s.numel < 0) {
        fail("layout", "param '" + s.param_id + "' has negative numel");
      }
      layout.params.push_back(std::move(s));
    }
    return layout;
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const ReshardPlan& plan) {
  json ops = json::array();
  for (const auto& op : plan.ops) {
    ops.push_back({op.src_rank, op.src_offset, op.dst_rank, op.dst_offset, op.len});
  }
  return json{{"param", plan.param_id}, {"numel", plan.numel}, {"ops", std::move(ops)}};
}

ReshardPlan reshard_plan_from_json(const json& j) {
  ReshardPlan plan;
  plan.param_id = j.at("param").get<std::string>();
  plan.numel = j.at("numel").get<std::int64_t>();
  for (const auto& oj : j.at("ops")) {
    plan.ops.push_back(CopyOp{oj.at(0).get<std::int64_t>(), oj.at(1).get<std::int64_t>(),
                              oj.at(2).get<std::int64_t>(), oj.at(3).get<std::int64_t>(),
                              oj.at(4).get<std::int64_t>()});
  }
  return plan;
}

} // namespace omniplan
