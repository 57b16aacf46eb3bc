// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "omniplan/mesh.hpp"
#include "test_util.hpp"

using namespace omniplan;

namespace {

Mesh cube() {
  return build_mesh({{"dp_replicate", 2}, {"dp_shard", 2}, {"sp", 2}}, 8);
}

std::vector<std::vector<std::int64_t>> member_lists(const std::vector<Group>& groups) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& g : groups) {
    out.push_back(g.members);
  }
  return out;
}

} // namespace

TEST_CASE("build_mesh accepts a 2x2x2 layout over 8 ranks") {
  const Mesh m = cube();
  CHECK(m.world == 8);
  CHECK(m.dims.size() == 3);
}

TEST_CASE("build_mesh accepts the singleton mesh") {
  const Mesh m = build_mesh({{"dp", 1}}, 1);
  CHECK(m.world == 1);
}

TEST_CASE("build_mesh rejects a size mismatch naming the product") {
  CHECK_THROWS_WITH_AS(build_mesh({{"dp", 3}, {"sp", 3}}, 8),
                       "mesh dim sizes multiply to 9, expected world size 8",
                       std::invalid_argument);
}

TEST_CASE("build_mesh rejects duplicate dim names") {
  CHECK_THROWS_AS(build_mesh({{"dp", 2}, {"dp", 2}}, 4), std::invalid_argument);
}

TEST_CASE("rank_to_coord: row major, last dim fastest") {
  const Mesh m = cube();
  CHECK(rank_to_coord(m, 0) == std::vector<std::int64_t>{0, 0, 0});
  CHECK(rank_to_coord(m, 5) == std::vector<std::int64_t>{1, 0, 1});
  CHECK_THROWS_AS(rank_to_coord(m, 8), std::out_of_range);
  CHECK_THROWS_AS(rank_to_coord(m, -1), std::out_of_range);
}

TEST_CASE("rank/coord round trip is a bijection") {
  const Mesh m = build_mesh({{"a", 3}, {"b", 2}, {"c", 4}}, 24);
  std::set<std::vector<std::int64_t>> seen;
  for (std::int64_t r = 0; r < m.world; ++r) {
    const auto coord = rank_to_coord(m, r);
    CHECK(coord_to_rank(m, coord) == r);
    seen.insert(coord);
  }
  CHECK(static_cast<std::int64_t>(seen.size()) == m.world);
}

TEST_CASE("groups_along the innermost dim") {
  const auto groups = groups_along(cube(), {"sp"});
  CHECK(member_lists(groups) == std::vector<std::vector<std::int64_t>>{
                                    {0, 1}, {2, 3}, {4, 5}, {6, 7}});
  CHECK(member_lists(groups) == testing::grouping_oracle({2, 2, 2}, {2}));
}

TEST_CASE("groups_along all dims is one world group") {
  const auto groups = groups_along(cube(), {"dp_replicate", "dp_shard", "sp"});
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members == std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("groups_along a flattened pair of dims") {
  const auto groups = groups_along(cube(), {"dp_shard", "sp"});
  CHECK(member_lists(groups) ==
        std::vector<std::vector<std::int64_t>>{{0, 1, 2, 3}, {4, 5, 6, 7}});
  CHECK(member_lists(groups) == testing::grouping_oracle({2, 2, 2}, {1, 2}));
}

TEST_CASE("groups_along non-adjacent dims matches the oracle") {
  const Mesh m = build_mesh({{"a", 2}, {"b", 3}, {"c", 2}}, 12);
  const auto groups = groups_along(m, {"a", "c"});
  CHECK(member_lists(groups) == testing::grouping_oracle({2, 3, 2}, {0, 2}));
}

TEST_CASE("groups_along rejects unknown dims") {
  CHECK_THROWS_AS(groups_along(cube(), {"tp"}), std::invalid_argument);
}

TEST_CASE("every dim subset partitions the world (sampled meshes)") {
  const std::vector<std::vector<std::int64_t>> shapes = {
      {2, 2, 2}, {4, 2}, {3, 3}, {2, 3, 4}, {6}, {2, 2, 2, 2}, {1, 5, 2}};
  for (const auto& sizes : shapes) {
    std::vector<Mesh::Dim> dims;
    std::int64_t world = 1;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      dims.push_back({"d" + std::to_string(i), sizes[i]});
      world *= sizes[i];
    }
    const Mesh mesh = build_mesh(dims, world);
    for (std::uint32_t mask = 1; mask < (1u << sizes.size()); ++mask) {
      std::vector<std::string> names;
      std::int64_t expected_size = 1;
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (mask & (1u << i)) {
          names.push_back(dims[i].name);
          expected_size *= sizes[i];
        }
      }
      const auto groups = groups_along(mesh, names);
      std::set<std::int64_t> covered;
      for (const auto& g : groups) {
        CHECK(static_cast<std::int64_t>(g.members.size()) == expected_size);
        CHECK(std::is_sorted(g.members.begin(), g.members.end()));
        for (std::int64_t r : g.members) {
          CHECK(covered.insert(r).second); // disjoint
        }
      }
      CHECK(static_cast<std::int64_t>(covered.size()) == world); // covering
    }
  }
}

TEST_CASE("group derivation is deterministic") {
  const auto a = groups_along(cube(), {"dp_shard"});
  const auto b = groups_along(cube(), {"dp_shard"});
  CHECK(member_lists(a) == member_lists(b));
}
