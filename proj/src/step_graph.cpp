// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/step_graph.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace omniplan {

std::int64_t StepGraph::collective_count() const {
  std::int64_t n = 0;
  for (const auto& node : nodes) {
    n += node.kind == NodeKind::collective ? 1 : 0;
  }
  return n;
}

std::int64_t StepGraph::collective_count(CollectiveKind kind) const {
  std::int64_t n = 0;
  for (const auto& node : nodes) {
    n += (node.kind == NodeKind::collective && node.collective == kind) ? 1 : 0;
  }
  return n;
}

namespace {

struct GroupInfo {
  GroupTopology topo;
  Group representative;
};

// All instances of a logical collective run concurrently; the representative
// carries the member list and the topology is charged at the slowest link
// any instance crosses.
GroupInfo summarize(const std::vector<Group>& groups, const ClusterSpec& cluster) {
  GroupInfo info;
  if (groups.empty()) {
    return info;
  }
  info.representative = groups.front();
  info.topo.size = static_cast<std::int64_t>(groups.front().members.size());
  for (const auto& g : groups) {
    info.topo.spans_nodes = info.topo.spans_nodes || group_spans_nodes(g, cluster);
  }
  return info;
}

class GraphBuilder {
 public:
  GraphBuilder(const ParallelPlan& plan, const ModelSpec& model, const ClusterSpec& cluster,
               const WorkloadSpec& workload)
      : plan_(plan), model_(model), workload_(workload) {
    graph_.world = cluster.world_size();
    graph_.accum_steps = workload.global_batch / (plan.dp_width() * plan.micro_batch);
    const Mesh mesh = plan_mesh(plan);
    shard_group_ = summarize(groups_along(mesh, {"dp_shard", "sp"}), cluster);
    sp_group_ = summarize(groups_along(mesh, {"sp"}), cluster);
    replicate_group_ = summarize(groups_along(mesh, {"dp_replicate"}), cluster);
    ep_group_ = summarize(ep_groups(plan), cluster);
    const auto& f = model.foundation();
    if (!f.arch) {
      throw std::invalid_argument(
          "step graph requires the foundation module to carry an arch");
    }
    arch_ = &*f.arch;
    foundation_trainable_ = f.trainable;
    local_tokens_ = static_cast<double>(plan.micro_batch) *
                    static_cast<double>(workload.seq_len) / static_cast<double>(plan.sp);
    dtype_bytes_ = static_cast<double>(model.param_dtype_bytes);
  }

  StepGraph build() {
    for (std::int64_t micro = 0; micro < graph_.accum_steps; ++micro) {
      const bool last_micro = micro == graph_.accum_steps - 1;
      build_encoders(micro);
      build_forward(micro);
      if (foundation_trainable_) {
        build_backward(micro, last_micro);
      }
      build_module_backward(micro);
    }
    build_optimizer();
    return std::move(graph_);
  }

 private:
  using Ids = std::vector<std::int64_t>;

  std::int64_t add_node(OpNode node, Ids deps) {
    node.id = static_cast<std::int64_t>(graph_.nodes.size());
    for (std::int64_t d : deps) {
      if (d >= 0) {
        node.deps.push_back(d);
      }
    }
    std::sort(node.deps.begin(), node.deps.end());
    node.deps.erase(std::unique(node.deps.begin(), node.deps.end()), node.deps.end());
    graph_.nodes.push_back(std::move(node));
    return graph_.nodes.back().id;
  }

  std::int64_t add_compute(std::string name, std::string phase, double flops, Ids deps) {
    if (flops <= 0.0) {
      return -1;
    }
    OpNode node;
    node.kind = NodeKind::compute;
    node.name = std::move(name);
    node.phase = std::move(phase);
    node.flops = flops;
    return add_node(std::move(node), std::move(deps));
  }

  std::int64_t add_collective(std::string name, std::string phase, CollectiveKind kind,
                              double bytes, const GroupInfo& group, Ids deps) {
    if (group.topo.size <= 1 || bytes <= 0.0) {
      return -1;
    }
    OpNode node;
    node.kind = NodeKind::collective;
    node.name = std::move(name);
    node.phase = std::move(phase);
    node.collective = kind;
    node.bytes = bytes;
    node.topo = group.topo;
    node.group = group.representative;
    return add_node(std::move(node), std::move(deps));
  }

  static std::string tag(const std::string& base, std::int64_t micro) {
    return base + ".m" + std::to_string(micro);
  }

  double layer_gathered_bytes(std::int64_t layer) const {
    return layer_shape(*arch_, layer).gathered(plan_.ep) * dtype_bytes_;
  }

  void build_encoders(std::int64_t micro) {
    encoder_outputs_.clear();
    for (const auto& mod : model_.modules) {
      if (mod.kind == ModuleKind::foundation) {
        continue;
      }
      const double tokens = workload_.mix_fraction(mod.name) * local_tokens_;
      const double flops =
          2.0 * static_cast<double>(module_active_param_count(mod)) * tokens;
      std::int64_t fwd = add_compute(tag("encoder." + mod.name, micro), "encoder", flops, {});
      if (fwd >= 0 && mod.trainable) {
        pending_module_backward_.push_back({mod.name, 2.0 * flops, micro});
      }
      double scatter_payload = 0.0;
      if (mod.tokens_per_item > 0) {
        scatter_payload = tokens * static_cast<double>(arch_->hidden) * dtype_bytes_;
      }
      std::int64_t scatter =
          add_collective(tag("scatter." + mod.name, micro), "encoder",
                         CollectiveKind::all_to_all, scatter_payload, sp_group_, {fwd});
      std::int64_t out = scatter >= 0 ? scatter : fwd;
      if (out >= 0) {
        encoder_outputs_.push_back(out);
      }
    }
  }

  void build_forward(std::int64_t micro) {
    const std::int64_t layers = arch_->layers;
    const std::int64_t depth = std::max<std::int64_t>(plan_.fsdp_prefetch_depth, 0);
    fwd_exit_.assign(static_cast<std::size_t>(layers), Ids{});
    std::vector<std::int64_t> gather(static_cast<std::size_t>(layers), -1);

    // Gathers are always issued one block ahead of their layer; the prefetch
    // depth only decides how early the dependency anchor lets them start.
    // Keeping the issue order fixed across depths (and across the overlap
    // toggles, which only remove ordering edges) makes a deeper setting
    // never schedule worse than a shallower one.
    auto issue_gather = [&](std::int64_t layer) {
      if (layer < 0 || layer >= layers) {
        return;
      }
      const std::int64_t anchor = layer - depth - 1;
      Ids dep = anchor >= 0 ? fwd_exit_[static_cast<std::size_t>(anchor)] : Ids{};
      gather[static_cast<std::size_t>(layer)] = add_collective(
          tag("fwd.ag.layer" + std::to_string(layer), micro),
          "fwd.layer" + std::to_string(layer), CollectiveKind::all_gather,
          layer_gathered_bytes(layer), shard_group_, std::move(dep));
    };

    issue_gather(0);
    Ids prev_exit = encoder_outputs_;
    for (std::int64_t l = 0; l < layers; ++l) {
      fwd_exit_[static_cast<std::size_t>(l)] =
          build_forward_layer(micro, l, prev_exit, gather[static_cast<std::size_t>(l)]);
      prev_exit = fwd_exit_[static_cast<std::size_t>(l)];
      issue_gather(l + 1);
    }

    const double head_flops =
        2.0 * static_cast<double>(head_param_count(*arch_)) * local_tokens_;
    fwd_head_ = add_compute(tag("fwd.head", micro), "fwd.head", head_flops, prev_exit);
  }

  // Returns the nodes a consumer of the layer's output must wait for.
  Ids build_forward_layer(std::int64_t micro, std::int64_t layer, const Ids& prev_exit,
                          std::int64_t gather) {
    const LayerShape shape = layer_shape(*arch_, layer);
    const std::string phase = "fwd.layer" + std::to_string(layer);
    const std::string prefix = tag("fwd.layer" + std::to_string(layer), micro);
    Ids entry = prev_exit;
    entry.push_back(gather);

    const double qkv_flops = 2.0 * static_cast<double>(shape.qkv_params) * local_tokens_;
    std::int64_t qkv = add_compute(prefix + ".qkv_proj", phase, qkv_flops, entry);

    // Attention all-to-alls. Without async_ulysses they wait for the
    // projection; with it they only wait on the layer entry, so the segment
    // costs max(projection, a2a) plus the attention core.
    const double q_bytes = local_tokens_ * static_cast<double>(arch_->hidden) * dtype_bytes_;
    const double kv_bytes =
        local_tokens_ * static_cast<double>(arch_->kv_width()) * dtype_bytes_;
    const Ids a2a_dep = plan_.async_ulysses ? entry : Ids{qkv};
    std::int64_t a2a_q = add_collective(prefix + ".a2a_q", phase, CollectiveKind::all_to_all,
                                        q_bytes, sp_group_, a2a_dep);
    std::int64_t a2a_k = add_collective(prefix + ".a2a_k", phase, CollectiveKind::all_to_all,
                                        kv_bytes, sp_group_, a2a_dep);
    std::int64_t a2a_v = add_collective(prefix + ".a2a_v", phase, CollectiveKind::all_to_all,
                                        kv_bytes, sp_group_, a2a_dep);

    // Causal attention over the full sequence: 4*H*(S/2) per token forward.
    const double attn_flops = 2.0 * static_cast<double>(arch_->hidden) *
                              static_cast<double>(workload_.seq_len) * local_tokens_;
    std::int64_t attn =
        add_compute(prefix + ".attn_core", phase, attn_flops, {qkv, a2a_q, a2a_k, a2a_v});

    std::int64_t a2a_out =
        add_collective(prefix + ".a2a_out", phase, CollectiveKind::all_to_all, q_bytes,
                       sp_group_, {attn});
    const double out_flops = 2.0 * static_cast<double>(shape.out_params) * local_tokens_;
    const Ids out_dep = plan_.async_ulysses ? Ids{attn} : Ids{attn, a2a_out};
    std::int64_t out_proj = add_compute(prefix + ".out_proj", phase, out_flops, out_dep);

    const Ids block_entry{out_proj, a2a_out};
    if (!shape.is_moe) {
      const double mlp_flops = 2.0 * static_cast<double>(shape.mlp_params) * local_tokens_;
      std::int64_t mlp = add_compute(prefix + ".mlp", phase, mlp_flops, block_entry);
      return {mlp >= 0 ? mlp : out_proj};
    }
    return build_moe_block(phase, prefix, block_entry, shape, /*backward=*/false);
  }

  Ids build_moe_block(const std::string& phase, const std::string& prefix, const Ids& entry,
                      const LayerShape& shape, bool backward) {
    const double bwd_factor = backward ? 2.0 : 1.0;
    const double router_flops = bwd_factor * 2.0 *
                                static_cast<double>(shape.router_params + shape.mlp_params) *
                                local_tokens_;
    const double expert_flops =
        bwd_factor * 2.0 * static_cast<double>(shape.expert_params_active) * local_tokens_;
    const double a2a_bytes = local_tokens_ * static_cast<double>(arch_->moe->top_k) *
                             static_cast<double>(arch_->hidden) * dtype_bytes_ *
                             plan_.moe_imbalance;

    std::int64_t router = add_compute(prefix + ".router", phase, router_flops, entry);
    const Ids after_router = router >= 0 ? Ids{router} : entry;

    std::int64_t dispatch =
        add_collective(prefix + (backward ? ".a2a_combine_grad" : ".a2a_dispatch"), phase,
                       CollectiveKind::all_to_all, a2a_bytes, ep_group_, after_router);
    // moe_overlap runs the expert GEMMs concurrently with dispatch+combine.
    Ids expert_dep = after_router;
    if (!plan_.moe_overlap && dispatch >= 0) {
      expert_dep = {dispatch};
    }
    std::int64_t expert = add_compute(prefix + ".experts", phase, expert_flops, expert_dep);
    Ids combine_dep = plan_.moe_overlap ? Ids{dispatch} : Ids{expert, dispatch};
    if (dispatch < 0) {
      combine_dep = {expert};
    }
    std::int64_t combine =
        add_collective(prefix + (backward ? ".a2a_dispatch_grad" : ".a2a_combine"), phase,
                       CollectiveKind::all_to_all, a2a_bytes, ep_group_, combine_dep);

    Ids exit;
    if (combine >= 0) {
      exit.push_back(combine);
    }
    if (expert >= 0) {
      exit.push_back(expert);
    }
    return exit.empty() ? after_router : exit;
  }

  void build_backward(std::int64_t micro, bool last_micro) {
    const std::int64_t layers = arch_->layers;
    const std::int64_t depth = std::max<std::int64_t>(plan_.fsdp_prefetch_depth, 0);

    const double head_bwd_flops =
        4.0 * static_cast<double>(head_param_count(*arch_)) * local_tokens_;
    std::int64_t head_bwd =
        add_compute(tag("bwd.head", micro), "bwd.head", head_bwd_flops, {fwd_head_});

    std::vector<std::int64_t> gather(static_cast<std::size_t>(layers), -1);
    std::vector<Ids> bwd_exit(static_cast<std::size_t>(layers));
    auto bwd_done = [&](std::int64_t layer) -> Ids {
      // Backward walks layers high to low.
      if (layer > layers - 1) {
        return head_bwd >= 0 ? Ids{head_bwd} : Ids{};
      }
      return bwd_exit[static_cast<std::size_t>(layer)];
    };
    // Mirror of the forward issue rule: always one block ahead (before the
    // reduce-scatter), with the depth moving only the dependency anchor.
    auto issue_gather = [&](std::int64_t layer) {
      if (layer < 0 || layer >= layers) {
        return;
      }
      gather[static_cast<std::size_t>(layer)] = add_collective(
          tag("bwd.ag.layer" + std::to_string(layer), micro),
          "bwd.layer" + std::to_string(layer), CollectiveKind::all_gather,
          layer_gathered_bytes(layer), shard_group_, bwd_done(layer + depth + 1));
    };

    issue_gather(layers - 1);
    for (std::int64_t l = layers - 1; l >= 0; --l) {
      const std::string phase = "bwd.layer" + std::to_string(l);
      const std::string prefix = tag("bwd.layer" + std::to_string(l), micro);
      const LayerShape shape = layer_shape(*arch_, l);
      Ids entry = bwd_done(l + 1);
      entry.push_back(gather[static_cast<std::size_t>(l)]);

      Ids tail = shape.is_moe
                     ? build_moe_block(phase, prefix, entry, shape, /*backward=*/true)
                     : entry;
      // Everything outside the MoE block at twice the forward cost.
      const double rest_fwd_flops =
          2.0 *
          static_cast<double>(shape.qkv_params + shape.out_params +
                              (shape.is_moe ? 0 : shape.mlp_params)) *
          local_tokens_;
      const double attn_flops = 2.0 * static_cast<double>(arch_->hidden) *
                                static_cast<double>(workload_.seq_len) * local_tokens_;
      std::int64_t rest =
          add_compute(prefix + ".rest", phase, 2.0 * (rest_fwd_flops + attn_flops), tail);
      bwd_exit[static_cast<std::size_t>(l)] = rest >= 0 ? Ids{rest} : tail;

      // Next gather goes on the channel before this layer's reduce-scatter.
      issue_gather(l - 1);

      std::int64_t rs = add_collective(tag("bwd.rs.layer" + std::to_string(l), micro), phase,
                                       CollectiveKind::reduce_scatter,
                                       layer_gathered_bytes(l), shard_group_,
                                       bwd_exit[static_cast<std::size_t>(l)]);
      std::int64_t sync = rs;
      if (last_micro && plan_.dp_replicate > 1) {
        const double shard_bytes =
            layer_gathered_bytes(l) / static_cast<double>(plan_.param_shard_degree());
        Ids ar_dep = rs >= 0 ? Ids{rs} : bwd_exit[static_cast<std::size_t>(l)];
        std::int64_t ar =
            add_collective(tag("bwd.ar.layer" + std::to_string(l), micro), phase,
                           CollectiveKind::all_reduce, shard_bytes, replicate_group_, ar_dep);
        sync = ar >= 0 ? ar : rs;
      }
      if (last_micro && sync >= 0) {
        grad_syncs_.push_back(sync);
      }
    }

    if (layers > 0 && !bwd_exit.front().empty()) {
      last_backward_exit_ = bwd_exit.front();
    } else if (head_bwd >= 0) {
      last_backward_exit_ = {head_bwd};
    }
  }

  void build_module_backward(std::int64_t micro) {
    for (const auto& pending : pending_module_backward_) {
      if (pending.micro != micro) {
        continue;
      }
      std::int64_t id = add_compute(tag("bwd.encoder." + pending.name, micro), "encoder",
                                    pending.flops, last_backward_exit_);
      if (id >= 0 && micro == graph_.accum_steps - 1) {
        grad_syncs_.push_back(id);
      }
    }
    std::erase_if(pending_module_backward_,
                  [micro](const PendingBackward& p) { return p.micro == micro; });
  }

  void build_optimizer() {
    std::int64_t trainable_params = 0;
    for (const auto& mod : model_.modules) {
      if (mod.trainable) {
        trainable_params += module_param_count(mod);
      }
    }
    if (trainable_params == 0) {
      return;
    }
    const double flops = 6.0 * static_cast<double>(trainable_params) /
                         static_cast<double>(plan_.param_shard_degree());
    Ids deps = grad_syncs_;
    for (std::int64_t d : last_backward_exit_) {
      deps.push_back(d);
    }
    add_compute("optimizer", "optimizer", flops, deps);
  }

  struct PendingBackward {
    std::string name;
    double flops = 0.0;
    std::int64_t micro = 0;
  };

  const ParallelPlan& plan_;
  const ModelSpec& model_;
  const WorkloadSpec& workload_;
  const TransformerSpec* arch_ = nullptr;
  bool foundation_trainable_ = false;
  double local_tokens_ = 0.0;
  double dtype_bytes_ = 2.0;

  GroupInfo shard_group_;
  GroupInfo sp_group_;
  GroupInfo replicate_group_;
  GroupInfo ep_group_;

  StepGraph graph_;
  Ids encoder_outputs_;
  std::vector<Ids> fwd_exit_;
  std::int64_t fwd_head_ = -1;
  Ids last_backward_exit_;
  Ids grad_syncs_;
  std::vector<PendingBackward> pending_module_backward_;
};

} // namespace

StepGraph build_step_graph(const ParallelPlan& plan, const ModelSpec& model,
                           const ClusterSpec& cluster, const WorkloadSpec& workload) {
  if (plan.dp_width() < 1 ||
      workload.global_batch % (plan.dp_width() * plan.micro_batch) != 0) {
    throw std::invalid_argument("global batch does not divide into micro batches");
  }
  return GraphBuilder(plan, model, cluster, workload).build();
}

} // namespace omniplan
