// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/reshard.hpp"

#include <algorithm>
#include <stdexcept>

namespace omniplan {

Interval owned_interval(std::int64_t numel, std::int64_t parts, std::int64_t rank) {
  if (rank < 0 || rank >= parts) {
    throw std::out_of_range("shard rank " + std::to_string(rank) + " outside [0, " +
                            std::to_string(parts) + ")");
  }
  const std::int64_t chunk = (numel + parts - 1) / parts;
  return Interval{std::min(rank * chunk, numel), std::min((rank + 1) * chunk, numel)};
}

ReshardPlan make_plan(const ShardLayout& src, const ShardLayout& dst) {
  if (src.param_id != dst.param_id) {
    throw std::invalid_argument("reshard param mismatch: '" + src.param_id + "' vs '" +
                                dst.param_id + "'");
  }
  if (src.numel != dst.numel) {
    throw std::invalid_argument("reshard numel mismatch for '" + src.param_id + "': " +
                                std::to_string(src.numel) + " vs " +
                                std::to_string(dst.numel));
  }
  ReshardPlan plan;
  plan.param_id = src.param_id;
  plan.numel = src.numel;
  for (std::int64_t d = 0; d < dst.parts; ++d) {
    const Interval dst_iv = owned_interval(dst.numel, dst.parts, d);
    if (dst_iv.empty()) {
      continue;
    }
    for (std::int64_t s = 0; s < src.parts; ++s) {
      const Interval src_iv = owned_interval(src.numel, src.parts, s);
      const std::int64_t lo = std::max(dst_iv.begin, src_iv.begin);
      const std::int64_t hi = std::min(dst_iv.end, src_iv.end);
      if (lo < hi) {
        plan.ops.push_back(CopyOp{s, lo - src_iv.begin, d, lo - dst_iv.begin, hi - lo});
      }
    }
  }
  // Construction already yields (dst_rank, dst_offset) order; keep the
  // contract explicit.
  std::sort(plan.ops.begin(), plan.ops.end(), [](const CopyOp& a, const CopyOp& b) {
    if (a.dst_rank != b.dst_rank) {
      return a.dst_rank < b.dst_rank;
    }
    return a.dst_offset < b.dst_offset;
  });
  return plan;
}

std::vector<std::string> verify(const ReshardPlan& plan, std::int64_t numel) {
  std::vector<std::string> violations;
  std::int64_t total = 0;
  std::int64_t max_dst = -1;
  for (const auto& op : plan.ops) {
    total += op.len;
    max_dst = std::max(max_dst, op.dst_rank);
    if (op.len <= 0) {
      violations.push_back("non-positive copy length in op for dst rank " +
                           std::to_string(op.dst_rank));
    }
  }
  if (total != numel) {
    violations.push_back("copy lengths sum to " + std::to_string(total) + ", expected " +
                         std::to_string(numel));
  }

  // Destination coverage: each rank's writes must tile [0, shard length)
  // from offset 0 with no gap or overlap, and the shard lengths must sum to
  // numel. The plan does not carry the destination part count, so coverage
  // is judged per rank mentioned by the ops.
  std::vector<std::vector<Interval>> per_dst(static_cast<std::size_t>(max_dst + 1));
  for (const auto& op : plan.ops) {
    if (op.len > 0) {
      per_dst[static_cast<std::size_t>(op.dst_rank)].push_back(
          Interval{op.dst_offset, op.dst_offset + op.len});
    }
  }
  std::int64_t covered_total = 0;
  for (std::size_t d = 0; d < per_dst.size(); ++d) {
    auto& ivs = per_dst[d];
    std::sort(ivs.begin(), ivs.end(),
              [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
    std::int64_t cursor = 0;
    for (const auto& iv : ivs) {
      if (iv.begin < cursor) {
        violations.push_back("overlapping writes on dst rank " + std::to_string(d) +
                             " at offset " + std::to_string(iv.begin));
      } else if (iv.begin > cursor) {
        violations.push_back("coverage gap on dst rank " + std::to_string(d) + " at [" +
                             std::to_string(cursor) + ", " + std::to_string(iv.begin) + ")");
      }
      cursor = std::max(cursor, iv.end);
    }
    covered_total += cursor;
  }
  if (covered_total != numel && total == numel) {
    violations.push_back("destination coverage is " + std::to_string(covered_total) +
                         " elements, expected " + std::to_string(numel));
  }
  return violations;
}

std::vector<std::vector<std::uint8_t>> shard_array(const std::vector<std::uint8_t>& flat,
                                                   std::int64_t parts) {
  const std::int64_t n = static_cast<std::int64_t>(flat.size());
  std::vector<std::vector<std::uint8_t>> shards;
  shards.reserve(static_cast<std::size_t>(parts));
  for (std::int64_t r = 0; r < parts; ++r) {
    const Interval iv = owned_interval(n, parts, r);
    shards.emplace_back(flat.begin() + iv.begin, flat.begin() + iv.end);
  }
  return shards;
}

std::vector<std::vector<std::uint8_t>> apply_plan(
    const ReshardPlan& plan, const std::vector<std::vector<std::uint8_t>>& src_shards,
    std::int64_t dst_parts) {
  std::vector<std::vector<std::uint8_t>> dst(static_cast<std::size_t>(dst_parts));
  for (std::int64_t r = 0; r < dst_parts; ++r) {
    dst[static_cast<std::size_t>(r)].resize(
        static_cast<std::size_t>(owned_interval(plan.numel, dst_parts, r).size()));
  }
  for (const auto& op : plan.ops) {
    const auto& src = src_shards.at(static_cast<std::size_t>(op.src_rank));
    auto& out = dst.at(static_cast<std::size_t>(op.dst_rank));
    std::copy(src.begin() + op.src_offset, src.begin() + op.src_offset + op.len,
              out.begin() + op.dst_offset);
  }
  return dst;
}

} // namespace omniplan
