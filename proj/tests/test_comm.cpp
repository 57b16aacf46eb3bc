// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "omniplan/comm.hpp"
#include "test_util.hpp"

using namespace omniplan;

namespace {

const LinkSpec kLink{3e11, 5e10, 1e-5, 2e-5};

ParallelPlan sp_plan(std::int64_t sp, std::int64_t micro = 1) {
  ParallelPlan p;
  p.sp = sp;
  p.dp_shard = 1;
  p.micro_batch = micro;
  return p;
}

TransformerSpec tiny_arch() {
  TransformerSpec a;
  a.layers = 1;
  a.hidden = 4;
  a.heads = 2;
  a.kv_heads = 2;
  a.head_dim = 2;
  a.ffn_dim = 8;
  a.vocab = 16;
  return a;
}

} // namespace

TEST_CASE("collective_volume: group of one moves nothing") {
  for (auto kind : {CollectiveKind::all_gather, CollectiveKind::reduce_scatter,
                    CollectiveKind::all_reduce, CollectiveKind::all_to_all}) {
    CHECK(collective_volume(kind, 4096.0, 1) == 0.0);
  }
}

TEST_CASE("collective_volume: frozen examples") {
  CHECK(collective_volume(CollectiveKind::all_gather, 1024.0, 4) == 768.0);
  CHECK(collective_volume(CollectiveKind::all_reduce, 1000.0, 5) == 1600.0);
}

TEST_CASE("collective_volume equals the per-message enumeration oracle") {
  std::mt19937_64 rng(7);
  for (std::int64_t p = 2; p <= 8; ++p) {
    for (int i = 0; i < 50; ++i) {
      // Chunk-exact message sizes keep the oracle sum integral.
      const std::int64_t m = p * static_cast<std::int64_t>(1 + rng() % 100000);
      for (auto kind : {CollectiveKind::all_gather, CollectiveKind::reduce_scatter,
                        CollectiveKind::all_reduce, CollectiveKind::all_to_all}) {
        CHECK(collective_volume(kind, static_cast<double>(m), p) ==
              testing::collective_send_oracle(kind, m, p));
      }
    }
  }
}

TEST_CASE("collective_time: group of one costs nothing") {
  CHECK(collective_time(CollectiveKind::all_reduce, 1e9, {1, false}, kLink) == 0.0);
}

TEST_CASE("collective_time: bandwidth term on an intra-node ring") {
  LinkSpec link{768.0, 768.0, 1e-30, 1e-30};
  // All-gather of 1024 bytes over 4 ranks moves 768 per rank.
  const double t = collective_time(CollectiveKind::all_gather, 1024.0, {4, false}, link);
  CHECK(t == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("collective_time: latency term counts ring steps") {
  LinkSpec link{1e30, 1e30, 0.5, 0.5};
  CHECK(collective_time(CollectiveKind::all_gather, 8.0, {4, false}, link) ==
        doctest::Approx(1.5)); // 3 steps
  CHECK(collective_time(CollectiveKind::all_reduce, 8.0, {4, false}, link) ==
        doctest::Approx(3.0)); // 2(P-1) steps
  CHECK(collective_time(CollectiveKind::all_to_all, 8.0, {4, false}, link) ==
        doctest::Approx(0.5)); // single phase
}

TEST_CASE("collective_time: crossing nodes is never faster") {
  const double intra = collective_time(CollectiveKind::all_gather, 1e9, {4, false}, kLink);
  const double inter = collective_time(CollectiveKind::all_gather, 1e9, {4, true}, kLink);
  CHECK(inter > intra);
}

TEST_CASE("ulysses volume: no sequence parallelism, no traffic") {
  WorkloadSpec w;
  w.seq_len = 8;
  CHECK(ulysses_attention_volume(sp_plan(1), tiny_arch(), w, 2) == 0.0);
}

TEST_CASE("ulysses volume: toy value and four-message cross-check") {
  WorkloadSpec w;
  w.seq_len = 8;
  const auto plan = sp_plan(2);
  const auto arch = tiny_arch(); // H = 4, kv width = 4
  const double volume = ulysses_attention_volume(plan, arch, w, 2);
  CHECK(volume == 64.0);

  // Same number from the four explicit all-to-all payloads (q, k, v, out).
  const double local = 1.0 * 8.0 / 2.0;
  const double q = local * 4 * 2, k = local * 4 * 2, v = local * 4 * 2, o = local * 4 * 2;
  double total = 0.0;
  for (double payload : {q, k, v, o}) {
    total += collective_volume(CollectiveKind::all_to_all, payload, 2);
  }
  CHECK(volume == total);
}

TEST_CASE("ulysses volume: constant bound under proportional scaling") {
  TransformerSpec a = tiny_arch();
  a.heads = 16;
  a.kv_heads = 16;
  a.head_dim = 2;
  a.hidden = 32;
  const double local_tokens = 64;
  const double bound =
      (2.0 * a.hidden + 2.0 * a.kv_width()) * local_tokens * 2.0; // b = 2
  double previous = 0.0;
  for (std::int64_t sp : {2, 4, 8, 16}) {
    WorkloadSpec w;
    w.seq_len = sp * static_cast<std::int64_t>(local_tokens);
    const double volume = ulysses_attention_volume(sp_plan(sp), a, w, 2);
    CHECK(volume == bound * (static_cast<double>(sp) - 1.0) / static_cast<double>(sp));
    CHECK(volume <= bound);
    CHECK(volume >= previous); // nondecreasing in sp at fixed S/sp
    previous = volume;
  }
}

TEST_CASE("fsdp_step_volume: single shard moves nothing") {
  ParallelPlan p;
  p.dp_shard = 1;
  p.sp = 1;
  CHECK(fsdp_step_volume(p, 1000, 2) == 0.0);
}

TEST_CASE("fsdp_step_volume: two gathers plus a reduce-scatter") {
  ParallelPlan p;
  p.dp_shard = 4;
  p.sp = 1;
  CHECK(fsdp_step_volume(p, 1000, 2) == 4500.0);
}

TEST_CASE("hsdp_allreduce_volume: cross-replicate gradient sync") {
  ParallelPlan p;
  p.dp_replicate = 2;
  p.dp_shard = 2;
  p.sp = 1;
  CHECK(hsdp_allreduce_volume(p, 1000, 2) == 1000.0);

  ParallelPlan flat;
  flat.dp_shard = 4;
  CHECK(hsdp_allreduce_volume(flat, 1000, 2) == 0.0);
}

TEST_CASE("ep_dispatch_volume: no expert parallelism, no traffic") {
  ParallelPlan p = sp_plan(1);
  p.ep = 1;
  TransformerSpec a = tiny_arch();
  a.moe = MoeSpec{4, 2, 8, 1};
  CHECK(ep_dispatch_volume(p, a, 16, 2) == 0.0);
}

TEST_CASE("ep_dispatch_volume: toy value and routing-table cross-check") {
  ParallelPlan p = sp_plan(1);
  p.dp_shard = 4;
  p.ep = 4;
  TransformerSpec a = tiny_arch();
  a.moe = MoeSpec{4, 2, 8, 1};
  const double volume = ep_dispatch_volume(p, a, 16, 2);
  CHECK(volume == 384.0);

  // Uniform routing table: 16 local tokens, top-2, so 32 (token, expert)
  // assignments spread evenly over 4 expert ranks; 3/4 of them leave the
  // rank, each carrying H*b = 8 bytes, and return after expert compute.
  const double assignments = 16.0 * 2.0;
  const double remote = assignments * 3.0 / 4.0;
  CHECK(volume == 2.0 * remote * 4.0 * 2.0);
}

TEST_CASE("ep_dispatch_volume: imbalance multiplier is linear") {
  ParallelPlan p = sp_plan(1);
  p.dp_shard = 4;
  p.ep = 4;
  TransformerSpec a = tiny_arch();
  a.moe = MoeSpec{4, 2, 8, 1};
  const double base = ep_dispatch_volume(p, a, 16, 2);
  p.moe_imbalance = 2.0;
  CHECK(ep_dispatch_volume(p, a, 16, 2) == 2.0 * base);
}

TEST_CASE("encoder_scatter_volume: sp of one scatters nothing") {
  ModuleSpec enc;
  enc.name = "vision";
  enc.kind = ModuleKind::encoder;
  enc.raw_param_count = 10;
  enc.tokens_per_item = 16;
  WorkloadSpec w;
  w.seq_len = 128;
  w.modality_mix = {{"vision", 1.0}};
  CHECK(encoder_scatter_volume(sp_plan(1), enc, w, 4, 2) == 0.0);
}

TEST_CASE("encoder_scatter_volume: 64 feature tokens at H=4, b=2, sp=2") {
  ModuleSpec enc;
  enc.name = "vision";
  enc.kind = ModuleKind::encoder;
  enc.raw_param_count = 10;
  enc.tokens_per_item = 16;
  WorkloadSpec w;
  w.seq_len = 128; // 64 local feature tokens at sp=2 with full vision mix
  w.modality_mix = {{"vision", 1.0}};
  CHECK(encoder_scatter_volume(sp_plan(2), enc, w, 4, 2) == 256.0);
}

TEST_CASE("encoder_scatter_volume: independent encoders add up") {
  ModuleSpec a;
  a.name = "vision";
  a.kind = ModuleKind::encoder;
  a.raw_param_count = 10;
  a.tokens_per_item = 16;
  ModuleSpec b = a;
  b.name = "audio";
  WorkloadSpec w;
  w.seq_len = 128;
  w.modality_mix = {{"vision", 0.5}, {"audio", 0.5}};
  const double va = encoder_scatter_volume(sp_plan(2), a, w, 4, 2);
  const double vb = encoder_scatter_volume(sp_plan(2), b, w, 4, 2);
  WorkloadSpec merged = w;
  merged.modality_mix = {{"vision", 1.0}};
  CHECK(va + vb == encoder_scatter_volume(sp_plan(2), a, merged, 4, 2));
}

TEST_CASE("group_spans_nodes inspects member node indices") {
  ClusterSpec c;
  c.num_nodes = 2;
  c.gpus_per_node = 4;
  Group intra{{"sp"}, {0, 1, 2, 3}};
  Group inter{{"dp"}, {0, 4}};
  CHECK_FALSE(group_spans_nodes(intra, c));
  CHECK(group_spans_nodes(inter, c));
}
