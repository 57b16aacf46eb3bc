// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/mesh.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace omniplan {

std::int64_t Mesh::dim_index(const std::string& name) const {
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i].name == name) {
      return static_cast<std::int64_t>(i);
    }
  }
  return -1;
}

Mesh build_mesh(const std::vector<Mesh::Dim>& dims, std::int64_t world) {
  std::int64_t product = 1;
  for (const auto& d : dims) {
    if (d.size < 1) {
      throw std::invalid_argument("mesh dim '" + d.name + "' has size < 1");
    }
    product *= d.size;
  }
  for (std::size_t i = 0; i < dims.size(); ++i) {
    for (std::size_t j = i + 1; j < dims.size(); ++j) {
      if (dims[i].name == dims[j].name) {
        throw std::invalid_argument("duplicate mesh dim name '" + dims[i].name + "'");
      }
    }
  }
  if (product != world) {
    throw std::invalid_argument("mesh dim sizes multiply to " + std::to_string(product) +
                                ", expected world size " + std::to_string(world));
  }
  return Mesh{dims, world};
}

std::vector<std::int64_t> rank_to_coord(const Mesh& mesh, std::int64_t rank) {
  if (rank < 0 || rank >= mesh.world) {
    throw std::out_of_range("rank " + std::to_string(rank) + " outside [0, " +
                            std::to_string(mesh.world) + ")");
  }
  std::vector<std::int64_t> coord(mesh.dims.size(), 0);
  std::int64_t rest = rank;
  for (std::size_t i = mesh.dims.size(); i-- > 0;) {
    coord[i] = rest % mesh.dims[i].size;
    rest /= mesh.dims[i].size;
  }
  return coord;
}

std::int64_t coord_to_rank(const Mesh& mesh, const std::vector<std::int64_t>& coord) {
  if (coord.size() != mesh.dims.size()) {
    throw std::invalid_argument("coordinate arity does not match mesh");
  }
  std::int64_t rank = 0;
  for (std::size_t i = 0; i < mesh.dims.size(); ++i) {
    if (coord[i] < 0 || coord[i] >= mesh.dims[i].size) {
      throw std::out_of_range("coordinate out of range on dim '" + mesh.dims[i].name + "'");
    }
    rank = rank * mesh.dims[i].size + coord[i];
  }
  return rank;
}

std::vector<Group> groups_along(const Mesh& mesh, const std::vector<std::string>& dim_names) {
  std::vector<bool> selected(mesh.dims.size(), false);
  for (const auto& name : dim_names) {
    std::int64_t idx = mesh.dim_index(name);
    if (idx < 0) {
      throw std::invalid_argument("unknown mesh dim '" + name + "'");
    }
    selected[static_cast<std::size_t>(idx)] = true;
  }

  // Key each rank by its coordinates on the unselected dims; ranks sharing a
  // key form one group. std::map keeps group order deterministic.
  std::map<std::vector<std::int64_t>, Group> by_key;
  for (std::int64_t r = 0; r < mesh.world; ++r) {
    auto coord = rank_to_coord(mesh, r);
    std::vector<std::int64_t> key;
    for (std::size_t i = 0; i < coord.size(); ++i) {
      if (!selected[i]) {
        key.push_back(coord[i]);
      }
    }
    auto& g = by_key[key];
    g.dim_names = dim_names;
    g.members.push_back(r); // ascending: ranks visited in order
  }

  std::vector<Group> groups;
  groups.reserve(by_key.size());
  for (auto& [key, g] : by_key) {
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(),
            [](const Group& a, const Group& b) { return a.members.front() < b.members.front(); });
  return groups;
}

} // namespace omniplan
