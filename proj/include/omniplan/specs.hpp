// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace omniplan {

/// One accelerator: peak math rate at training precision and device memory.
struct GpuSpec {
  double peak_flops = 0.0; // FLOP/s
  double hbm_bytes = 0.0;
};

/// Point-to-point link parameters for the alpha-beta cost model.
struct LinkSpec {
  double intra_node_bw = 0.0; // bytes/s
  double inter_node_bw = 0.0; // bytes/s
  double intra_latency = 0.0; // seconds
  double inter_latency = 0.0; // seconds
};

struct ClusterSpec {
  std::int64_t num_nodes = 1;
  std::int64_t gpus_per_node = 1;
  GpuSpec gpu;
  LinkSpec link;

  std::int64_t world_size() const { return num_nodes * gpus_per_node; }
};

/// Mixture-of-experts block shape. Experts replace the dense MLP on the
/// layers they occupy.
struct MoeSpec {
  std::int64_t num_experts = 1;
  std::int64_t top_k = 1;
  std::int64_t expert_ffn_dim = 1;
  std::int64_t moe_layer_stride = 1; // layer i (0-based) is MoE iff (i+1) % stride == 0
};

/// Decoder-style transformer shape, gated MLP, optional grouped-query
/// attention (kv_heads < heads) and optional MoE layers.
struct TransformerSpec {
  std::int64_t layers = 0;
  std::int64_t hidden = 0; // heads * head_dim
  std::int64_t heads = 1;
  std::int64_t kv_heads = 1;
  std::int64_t head_dim = 1;
  std::int64_t ffn_dim = 1;
  std::int64_t vocab = 0;
  std::optional<MoeSpec> moe;

  bool layer_is_moe(std::int64_t layer) const {
    return moe.has_value() && (layer + 1) % moe->moe_layer_stride == 0;
  }
  std::int64_t kv_width() const { return kv_heads * head_dim; }
};

enum class ModuleKind { encoder, foundation, decoder };

/// One component of the composite model. Either a full transformer shape or
/// an opaque parameter count for modules we only need to size.
struct ModuleSpec {
  std::string name;
  ModuleKind kind = ModuleKind::encoder;
  std::optional<TransformerSpec> arch;
  std::optional<std::int64_t> raw_param_count;
  bool trainable = false;
  std::int64_t tokens_per_item = 0; // tokens one modality item injects into the sequence
};

/// Composite model: any number of encoders/decoders around exactly one
/// foundation module.
struct ModelSpec {
  std::vector<ModuleSpec> modules;
  std::int64_t param_dtype_bytes = 2; // mixed precision default

  const ModuleSpec& foundation() const;
};

/// Per-step workload shape. modality_mix maps a module name (or "text") to
/// its fraction of the sequence tokens; fractions sum to 1.
struct WorkloadSpec {
  std::int64_t seq_len = 1;
  std::int64_t micro_batch = 1;
  std::int64_t global_batch = 1;
  std::map<std::string, double> modality_mix;

  double mix_fraction(const std::string& module_name) const;
};

/// Total parameter count of a transformer. Counts untied input embedding and
/// output head, per-layer attention projections, gated MLP or MoE block with
/// router, two layer norms per layer, and the final norm.
std::int64_t param_count(const TransformerSpec& arch);

/// Parameters touched per token: like param_count but each MoE expert block
/// contributes top_k/num_experts of its weights (router counted in full).
std::int64_t active_param_count(const TransformerSpec& arch);

/// Weight shapes of one transformer layer, split the way the step graph and
/// memory model consume them.
struct LayerShape {
  std::int64_t qkv_params = 0;  // q, k, v projections + the pre-attention norm
  std::int64_t out_params = 0;  // output projection
  std::int64_t mlp_params = 0;  // gated dense MLP + the pre-MLP norm (0 on MoE layers)
  bool is_moe = false;
  std::int64_t router_params = 0;
  std::int64_t expert_params_total = 0;
  std::int64_t expert_params_active = 0; // top_k experts' share

  std::int64_t total() const {
    return qkv_params + out_params + mlp_params + router_params + expert_params_total;
  }
  std::int64_t active() const {
    return qkv_params + out_params + mlp_params + router_params + expert_params_active;
  }
  /// Parameters one rank materializes when the layer is gathered under an
  /// expert-parallel degree ep (experts stay split ep ways).
  double gathered(std::int64_t ep) const {
    return static_cast<double>(qkv_params + out_params + mlp_params + router_params) +
           static_cast<double>(expert_params_total) / static_cast<double>(ep);
  }
};

LayerShape layer_shape(const TransformerSpec& arch, std::int64_t layer);

/// Input embedding + output head + final norm.
std::int64_t head_param_count(const TransformerSpec& arch);

std::int64_t module_param_count(const ModuleSpec& mod);
std::int64_t module_active_param_count(const ModuleSpec& mod);

/// Training FLOPs per sequence token across the whole composite model.
/// Trainable modules cost 6 x active params (fwd + bwd), frozen modules
/// 2 x active params (fwd only). The foundation adds the attention term
/// 4 * hidden * (S/2) per layer per token, times 3 when trainable.
double flops_per_token(const ModelSpec& model, std::int64_t seq_len);

/// Invariant check used by config loading; returns human-readable problems,
/// empty when the value is well formed.
std::vector<std::string> check(const ClusterSpec& cluster);
std::vector<std::string> check(const TransformerSpec& arch);
std::vector<std::string> check(const ModelSpec& model);
std::vector<std::string> check(const WorkloadSpec& workload);

} // namespace omniplan
