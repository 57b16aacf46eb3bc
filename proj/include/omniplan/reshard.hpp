// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace omniplan {

/// Even-chunk shard layout of one flattened parameter: rank r owns
/// [min(r*c, n), min((r+1)*c, n)) with c = ceil(n / parts). Trailing ranks
/// may own empty intervals.
struct ShardLayout {
  std::string param_id;
  std::int64_t numel = 0;
  std::int64_t parts = 1;
};

struct Interval {
  std::int64_t begin = 0;
  std::int64_t end = 0; // half open

  std::int64_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

/// The half-open element interval rank r owns. Throws std::out_of_range for
/// r outside [0, parts).
Interval owned_interval(std::int64_t numel, std::int64_t parts, std::int64_t rank);

struct CopyOp {
  std::int64_t src_rank = 0;
  std::int64_t src_offset = 0; // into the source rank's shard
  std::int64_t dst_rank = 0;
  std::int64_t dst_offset = 0; // into the destination rank's shard
  std::int64_t len = 0;        // elements
};

/// Exact element moves taking one parameter from the src layout to the dst
/// layout, ordered by (dst_rank, dst_offset).
struct ReshardPlan {
  std::string param_id;
  std::int64_t numel = 0;
  std::vector<CopyOp> ops;
};

/// Interval-intersection plan between two layouts of the same parameter.
/// Throws std::invalid_argument on param id or numel mismatch.
ReshardPlan make_plan(const ShardLayout& src, const ShardLayout& dst);

/// Checks full destination coverage, no overlapping writes, and total copied
/// length == numel. Violations are returned, never thrown.
std::vector<std::string> verify(const ReshardPlan& plan, std::int64_t numel);

/// Applies a plan to source shards (outer index: rank). Shard sizes must
/// match the layouts the plan was built from.
std::vector<std::vector<std::uint8_t>> apply_plan(
    const ReshardPlan& plan, const std::vector<std::vector<std::uint8_t>>& src_shards,
    std::int64_t dst_parts);

/// Splits a flat array into the shards of a layout.
std::vector<std::vector<std::uint8_t>> shard_array(const std::vector<std::uint8_t>& flat,
                                                   std::int64_t parts);

} // namespace omniplan
