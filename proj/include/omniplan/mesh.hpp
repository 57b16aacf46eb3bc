// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace omniplan {

/// A named n-D grid over the global device ranks. Layout is row major with
/// the last dimension varying fastest; all group math below derives from
/// that linearization.
struct Mesh {
  struct Dim {
    std::string name;
    std::int64_t size = 1;
  };
  std::vector<Dim> dims;
  std::int64_t world = 1;

  std::int64_t dim_index(const std::string& name) const; // -1 if absent
};

/// One communication group: the ranks that share every coordinate outside
/// the selected dimensions. Members are sorted ascending.
struct Group {
  std::vector<std::string> dim_names;
  std::vector<std::int64_t> members;
};

/// Builds a mesh and checks that the dimension sizes factor the world size.
/// Throws std::invalid_argument naming the offending product otherwise.
Mesh build_mesh(const std::vector<Mesh::Dim>& dims, std::int64_t world);

std::vector<std::int64_t> rank_to_coord(const Mesh& mesh, std::int64_t rank);
std::int64_t coord_to_rank(const Mesh& mesh, const std::vector<std::int64_t>& coord);

/// All groups spanning the given dimensions (adjacent or not). Groups
/// partition [0, world); there are world / prod(selected sizes) of them,
/// each listed in ascending rank order and ordered by lowest member.
std::vector<Group> groups_along(const Mesh& mesh, const std::vector<std::string>& dim_names);

} // namespace omniplan
