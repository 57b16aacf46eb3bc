// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/specs.hpp"

#include <cmath>
#include <stdexcept>

namespace omniplan {

namespace {

std::int64_t dense_mlp_params(const TransformerSpec& a) {
  return 3 * a.hidden * a.ffn_dim; // gate, up, down
}

std::int64_t moe_expert_params(const TransformerSpec& a) {
  return a.moe->num_experts * 3 * a.hidden * a.moe->expert_ffn_dim;
}

std::int64_t moe_router_params(const TransformerSpec& a) {
  return a.hidden * a.moe->num_experts;
}

std::int64_t count_params(const TransformerSpec& a, bool active_only) {
  std::int64_t p = head_param_count(a);
  for (std::int64_t l = 0; l < a.layers; ++l) {
    const LayerShape shape = layer_shape(a, l);
    p += active_only ? shape.active() : shape.total();
  }
  return p;
}

} // namespace

LayerShape layer_shape(const TransformerSpec& a, std::int64_t layer) {
  LayerShape s;
  s.qkv_params = a.hidden * a.hidden + 2 * a.hidden * a.kv_width() + a.hidden;
  s.out_params = a.hidden * a.hidden;
  if (a.layer_is_moe(layer)) {
    s.is_moe = true;
    s.router_params = moe_router_params(a);
    s.expert_params_total = moe_expert_params(a);
    s.expert_params_active = s.expert_params_total / a.moe->num_experts * a.moe->top_k;
    s.mlp_params = a.hidden; // pre-MLP norm
  } else {
    s.mlp_params = dense_mlp_params(a) + a.hidden;
  }
  return s;
}

std::int64_t head_param_count(const TransformerSpec& a) {
  // Untied input embedding + output head + final norm.
  return 2 * a.vocab * a.hidden + a.hidden;
}

const ModuleSpec& ModelSpec::foundation() const {
  for (const auto& m : modules) {
    if (m.kind == ModuleKind::foundation) {
      return m;
    }
  }
  throw std::logic_error("ModelSpec has no foundation module");
}

double WorkloadSpec::mix_fraction(const std::string& module_name) const {
  auto it = modality_mix.find(module_name);
  return it == modality_mix.end() ? 0.0 : it->second;
}

std::int64_t param_count(const TransformerSpec& arch) {
  return count_params(arch, /*active_only=*/false);
}

std::int64_t active_param_count(const TransformerSpec& arch) {
  return count_params(arch, /*active_only=*/true);
}

std::int64_t module_param_count(const ModuleSpec& mod) {
  if (mod.arch) {
    return param_count(*mod.arch);
  }
  return mod.raw_param_count.value_or(0);
}

std::int64_t module_active_param_count(const ModuleSpec& mod) {
  if (mod.arch) {
    return active_param_count(*mod.arch);
  }
  return mod.raw_param_count.value_or(0);
}

double flops_per_token(const ModelSpec& model, std::int64_t seq_len) {
  double flops = 0.0;
  for (const auto& mod : model.modules) {
    const double factor = mod.trainable ? 6.0 : 2.0;
    flops += factor * static_cast<double>(module_active_param_count(mod));
    if (mod.kind == ModuleKind::foundation && mod.arch) {
      // Causal attention, average context S/2: 4*H*(S/2) per layer per
      // token forward, tripled for forward + backward when trainable.
      const double fwd_bwd = mod.trainable ? 3.0 : 1.0;
      flops += fwd_bwd * 2.0 * static_cast<double>(mod.arch->layers) *
               static_cast<double>(mod.arch->hidden) * static_cast<double>(seq_len);
    }
  }
  return flops;
}

std::vector<std::string> check(const ClusterSpec& cluster) {
  std::vector<std::string> problems;
  if (cluster.num_nodes < 1 || cluster.gpus_per_node < 1) {
    problems.push_back("cluster world must be at least 1 device");
  }
  if (cluster.gpu.peak_flops <= 0) {
    problems.push_back("gpu.peak_flops must be > 0");
  }
  if (cluster.gpu.hbm_bytes <= 0) {
    problems.push_back("gpu.hbm_bytes must be > 0");
  }
  if (cluster.link.intra_node_bw <= 0 || cluster.link.inter_node_bw <= 0 ||
      cluster.link.intra_latency <= 0 || cluster.link.inter_latency <= 0) {
    problems.push_back("link bandwidths and latencies must be > 0");
  }
  if (cluster.link.intra_node_bw < cluster.link.inter_node_bw) {
    problems.push_back("intra_node_bw must be >= inter_node_bw");
  }
  return problems;
}

std::vector<std::string> check(const TransformerSpec& arch) {
  std::vector<std::string> problems;
  if (arch.layers < 0) {
    problems.push_back("layers must be >= 0");
  }
  if (arch.hidden < 1 || arch.heads < 1 || arch.head_dim < 1 || arch.ffn_dim < 1 ||
      arch.vocab < 1 || arch.kv_heads < 1) {
    problems.push_back("transformer dimensions must be >= 1");
  }
  if (arch.heads * arch.head_dim != arch.hidden) {
    problems.push_back("heads * head_dim must equal hidden");
  }
  if (arch.kv_heads > 0 && arch.heads % arch.kv_heads != 0) {
    problems.push_back("kv_heads must divide heads");
  }
  if (arch.moe) {
    if (arch.moe->top_k < 1 || arch.moe->top_k > arch.moe->num_experts) {
      problems.push_back("moe top_k must satisfy 1 <= top_k <= num_experts");
    }
    if (arch.moe->moe_layer_stride < 1) {
      problems.push_back("moe_layer_stride must be >= 1");
    }
    if (arch.moe->expert_ffn_dim < 1) {
      problems.push_back("expert_ffn_dim must be >= 1");
    }
  }
  return problems;
}

std::vector<std::string> check(const ModelSpec& model) {
  std::vector<std::string> problems;
  int foundations = 0;
  for (const auto& mod : model.modules) {
    if (mod.kind == ModuleKind::foundation) {
      ++foundations;
    }
    if (mod.arch.has_value() == mod.raw_param_count.has_value()) {
      problems.push_back("module '" + mod.name +
                         "': exactly one of arch / raw_param_count must be set");
    }
    if (mod.tokens_per_item < 0) {
      problems.push_back("module '" + mod.name + "': tokens_per_item must be >= 0");
    }
    if (mod.arch) {
      for (auto& p : check(*mod.arch)) {
        problems.push_back("module '" + mod.name + "': " + p);
      }
    }
  }
  if (foundations != 1) {
    problems.push_back("model must contain exactly one foundation module");
  }
  if (model.param_dtype_bytes != 1 && model.param_dtype_bytes != 2 &&
      model.param_dtype_bytes != 4) {
    problems.push_back("param_dtype_bytes must be 1, 2 or 4");
  }
  return problems;
}

std::vector<std::string> check(const WorkloadSpec& workload) {
  std::vector<std::string> problems;
  if (workload.seq_len < 1) {
    problems.push_back("seq_len must be >= 1");
  }
  if (workload.micro_batch < 1) {
    problems.push_back("micro_batch must be >= 1");
  }
  if (workload.global_batch < workload.micro_batch) {
    problems.push_back("global_batch must be >= micro_batch");
  }
  if (!workload.modality_mix.empty()) {
    double sum = 0.0;
    for (auto& [name, frac] : workload.modality_mix) {
      if (frac < 0.0) {
        problems.push_back("modality fraction for '" + name + "' must be >= 0");
      }
      sum += frac;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      problems.push_back("modality fractions must sum to 1");
    }
  }
  return problems;
}

} // namespace omniplan
