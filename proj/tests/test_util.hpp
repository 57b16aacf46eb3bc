// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "omniplan/comm.hpp"
#include "omniplan/mesh.hpp"
#include "omniplan/plan.hpp"
#include "omniplan/specs.hpp"

namespace omniplan::testing {

// ---------------------------------------------------------------------------
// Independent oracles. These re-derive expected values from first principles
// and must stay independent of the library code paths they check.
// ---------------------------------------------------------------------------

/// Parameter-count oracle: materializes every weight shape of the
/// transformer and sums the products.
inline std::int64_t shape_sum_param_oracle(const TransformerSpec& a, bool active_only) {
  std::vector<std::vector<std::int64_t>> shapes;
  shapes.push_back({a.vocab, a.hidden}); // input embedding
  shapes.push_back({a.vocab, a.hidden}); // output head
  shapes.push_back({a.hidden});          // final norm
  for (std::int64_t l = 0; l < a.layers; ++l) {
    shapes.push_back({a.hidden, a.hidden});                // q
    shapes.push_back({a.hidden, a.kv_heads * a.head_dim}); // k
    shapes.push_back({a.hidden, a.kv_heads * a.head_dim}); // v
    shapes.push_back({a.hidden, a.hidden});                // o
    shapes.push_back({a.hidden});                          // attn norm
    shapes.push_back({a.hidden});                          // mlp norm
    const bool is_moe = a.moe && (l + 1) % a.moe->moe_layer_stride == 0;
    if (is_moe) {
      shapes.push_back({a.hidden, a.moe->num_experts}); // router
      const std::int64_t experts = active_only ? a.moe->top_k : a.moe->num_experts;
      for (std::int64_t e = 0; e < experts; ++e) {
        shapes.push_back({a.hidden, a.moe->expert_ffn_dim}); // gate
        shapes.push_back({a.hidden, a.moe->expert_ffn_dim}); // up
        shapes.push_back({a.moe->expert_ffn_dim, a.hidden}); // down
      }
    } else {
      shapes.push_back({a.hidden, a.ffn_dim});
      shapes.push_back({a.hidden, a.ffn_dim});
      shapes.push_back({a.ffn_dim, a.hidden});
    }
  }
  std::int64_t total = 0;
  for (const auto& shape : shapes) {
    std::int64_t numel = 1;
    for (std::int64_t d : shape) {
      numel *= d;
    }
    total += numel;
  }
  return total;
}

/// Ring/all-to-all traffic oracle: materializes every (step, src, dst,
/// bytes) message and sums what one rank sends. full_bytes must be divisible
/// by the group size so chunking is exact.
inline double collective_send_oracle(CollectiveKind kind, std::int64_t full_bytes,
                                     std::int64_t p) {
  if (p <= 1) {
    return 0.0;
  }
  struct Message {
    std::int64_t step, src, dst, bytes;
  };
  std::vector<Message> messages;
  const std::int64_t chunk = full_bytes / p;
  auto ring_pass = [&](std::int64_t step0) {
    for (std::int64_t step = 0; step < p - 1; ++step) {
      for (std::int64_t src = 0; src < p; ++src) {
        messages.push_back({step0 + step, src, (src + 1) % p, chunk});
      }
    }
  };
  switch (kind) {
    case CollectiveKind::all_gather:
    case CollectiveKind::reduce_scatter:
      ring_pass(0);
      break;
    case CollectiveKind::all_reduce:
      ring_pass(0);     // reduce-scatter pass
      ring_pass(p - 1); // all-gather pass
      break;
    case CollectiveKind::all_to_all:
      for (std::int64_t src = 0; src < p; ++src) {
        for (std::int64_t dst = 0; dst < p; ++dst) {
          if (src != dst) {
            messages.push_back({0, src, dst, chunk});
          }
        }
      }
      break;
  }
  std::int64_t sent_by_rank0 = 0;
  for (const auto& m : messages) {
    if (m.src == 0) {
      sent_by_rank0 += m.bytes;
    }
  }
  return static_cast<double>(sent_by_rank0);
}

/// Group oracle: partitions ranks by their coordinates on the unselected
/// dims, derived with its own coordinate math.
inline std::vector<std::vector<std::int64_t>> grouping_oracle(
    const std::vector<std::int64_t>& sizes, const std::vector<std::size_t>& selected_dims) {
  std::int64_t world = 1;
  for (std::int64_t s : sizes) {
    world *= s;
  }
  auto coord_of = [&](std::int64_t rank) {
    std::vector<std::int64_t> coord(sizes.size());
    for (std::size_t i = sizes.size(); i-- > 0;) {
      coord[i] = rank % sizes[i];
      rank /= sizes[i];
    }
    return coord;
  };
  std::map<std::vector<std::int64_t>, std::vector<std::int64_t>> buckets;
  for (std::int64_t r = 0; r < world; ++r) {
    auto coord = coord_of(r);
    std::vector<std::int64_t> key;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (std::find(selected_dims.begin(), selected_dims.end(), i) == selected_dims.end()) {
        key.push_back(coord[i]);
      }
    }
    buckets[key].push_back(r);
  }
  std::vector<std::vector<std::int64_t>> groups;
  for (auto& [key, members] : buckets) {
    groups.push_back(members);
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

/// Exhaustive bin-packing optimum for small inputs (branch and bound over
/// item-to-bin assignments).
inline std::size_t optimal_bin_count(const std::vector<std::int64_t>& lengths,
                                     std::int64_t capacity) {
  std::vector<std::int64_t> items = lengths;
  std::sort(items.begin(), items.end(), std::greater<>());
  std::size_t best = items.size();
  std::vector<std::int64_t> bins;
  auto rec = [&](auto&& self, std::size_t index) -> void {
    if (bins.size() >= best) {
      return;
    }
    if (index == items.size()) {
      best = std::min(best, bins.size());
      return;
    }
    // Index-based: recursion grows and shrinks the bins vector.
    const std::size_t open_bins = bins.size();
    for (std::size_t b = 0; b < open_bins; ++b) {
      if (bins[b] + items[index] <= capacity) {
        bins[b] += items[index];
        self(self, index + 1);
        bins[b] -= items[index];
      }
    }
    bins.push_back(items[index]);
    self(self, index + 1);
    bins.pop_back();
  };
  if (!items.empty()) {
    rec(rec, 0);
  } else {
    best = 0;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random-instance generators for the simulator and plan property tests.
// ---------------------------------------------------------------------------

struct Instance {
  ClusterSpec cluster;
  ModelSpec model;
  WorkloadSpec workload;
  ParallelPlan plan;
};

inline Instance random_instance(std::mt19937_64& rng) {
  auto pick = [&](std::initializer_list<std::int64_t> xs) {
    std::vector<std::int64_t> v(xs);
    return v[rng() % v.size()];
  };

  Instance inst;
  inst.cluster.num_nodes = pick({1, 2});
  inst.cluster.gpus_per_node = pick({1, 2, 4});
  inst.cluster.gpu.peak_flops = 1e12;
  inst.cluster.gpu.hbm_bytes = 80.0 * (1ll << 30);
  inst.cluster.link.intra_node_bw = 1e11;
  inst.cluster.link.inter_node_bw = 2e10;
  inst.cluster.link.intra_latency = 5e-6;
  inst.cluster.link.inter_latency = 2e-5;

  TransformerSpec arch;
  arch.layers = pick({1, 2, 3, 4});
  arch.head_dim = pick({2, 4});
  arch.heads = pick({2, 4, 8});
  arch.hidden = arch.heads * arch.head_dim;
  arch.kv_heads = arch.heads / pick({1, 2});
  arch.ffn_dim = arch.hidden * pick({2, 3});
  arch.vocab = pick({64, 128, 512});
  if (rng() % 2 == 0) {
    MoeSpec moe;
    moe.num_experts = pick({2, 4, 8});
    moe.top_k = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(
                                                          moe.num_experts));
    moe.expert_ffn_dim = arch.hidden * 2;
    moe.moe_layer_stride = pick({1, 2});
    arch.moe = moe;
  }

  ModuleSpec foundation;
  foundation.name = "core";
  foundation.kind = ModuleKind::foundation;
  foundation.arch = arch;
  foundation.trainable = true;
  inst.model.modules.push_back(foundation);
  inst.model.param_dtype_bytes = 2;

  double text_fraction = 1.0;
  const int encoders = static_cast<int>(rng() % 3);
  for (int e = 0; e < encoders; ++e) {
    ModuleSpec enc;
    enc.name = "enc" + std::to_string(e);
    enc.kind = e % 2 == 0 ? ModuleKind::encoder : ModuleKind::decoder;
    enc.raw_param_count = 1000 + static_cast<std::int64_t>(rng() % 9000);
    enc.trainable = rng() % 4 == 0;
    enc.tokens_per_item = pick({0, 4, 16});
    const double frac = 0.1 + 0.2 * static_cast<double>(rng() % 2);
    if (text_fraction - frac > 0.05) {
      inst.workload.modality_mix[enc.name] = frac;
      text_fraction -= frac;
    }
    inst.model.modules.push_back(enc);
  }
  if (!inst.workload.modality_mix.empty()) {
    inst.workload.modality_mix["text"] = text_fraction;
  }

  // Factor the world into replicate x shard x sp with sp dividing both the
  // head counts and the sequence length.
  const std::int64_t world = inst.cluster.world_size();
  std::vector<std::int64_t> sp_choices;
  for (std::int64_t sp = 1; sp <= world; ++sp) {
    if (world % sp == 0 && arch.heads % sp == 0 && arch.kv_heads % sp == 0) {
      sp_choices.push_back(sp);
    }
  }
  inst.plan.sp = sp_choices[rng() % sp_choices.size()];
  const std::int64_t rest = world / inst.plan.sp;
  std::vector<std::int64_t> rep_choices;
  for (std::int64_t rep = 1; rep <= rest; ++rep) {
    if (rest % rep == 0) {
      rep_choices.push_back(rep);
    }
  }
  inst.plan.dp_replicate = rep_choices[rng() % rep_choices.size()];
  inst.plan.dp_shard = rest / inst.plan.dp_replicate;

  if (arch.moe) {
    std::vector<std::int64_t> ep_choices;
    for (std::int64_t ep = 1; ep <= inst.plan.param_shard_degree(); ++ep) {
      if (inst.plan.param_shard_degree() % ep == 0 && arch.moe->num_experts % ep == 0) {
        ep_choices.push_back(ep);
      }
    }
    inst.plan.ep = ep_choices[rng() % ep_choices.size()];
  }

  inst.plan.micro_batch = pick({1, 2});
  inst.plan.fsdp_prefetch_depth = pick({0, 1, 2});
  inst.plan.recompute = rng() % 2 == 0 ? RecomputeMode::full : RecomputeMode::none;

  inst.workload.seq_len = inst.plan.sp * pick({4, 8, 16});
  inst.workload.micro_batch = inst.plan.micro_batch;
  inst.workload.global_batch =
      inst.plan.dp_width() * inst.plan.micro_batch * pick({1, 2});
  return inst;
}

} // namespace omniplan::testing
