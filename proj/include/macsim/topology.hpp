#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "macsim/time.hpp"

namespace macsim {

// Unit-disk connectivity: link(a,b) iff dist(a,b) <= range.
class Topology {
 public:
  struct Pos {
    double x = 0, y = 0;
  };

  Topology() = default;
  Topology(std::vector<Pos> positions, double range_m);

  std::size_t node_count() const { return positions_.size(); }
  double range() const { return range_; }
  const Pos& position(NodeId n) const { return positions_.at(n); }
  const std::vector<NodeId>& neighbors(NodeId n) const { return neighbors_.at(n); }
  bool linked(NodeId a, NodeId b) const;
  bool connected() const;

 private:
  std::vector<Pos> positions_;
  std::vector<std::vector<NodeId>> neighbors_;
  double range_ = 0;
};

// rows x cols lattice with the given spacing. Disconnected geometry
// (range < spacing) is a hard error.
Topology build_grid(std::uint32_t rows, std::uint32_t cols, double spacing,
                    double range);

// BFS tree toward the sink; ties broken by smallest node id.
struct GatheringTree {
  NodeId root = 0;
  std::vector<NodeId> parent;       // parent[root] == root
  std::vector<std::uint32_t> depth;  // hops to root
  std::uint32_t max_depth = 0;
};

GatheringTree build_gathering_tree(const Topology& topo, NodeId root);

}  // namespace macsim
