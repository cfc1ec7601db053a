#include "macsim/topology.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace macsim {

Topology::Topology(std::vector<Pos> positions, double range_m)
    : positions_(std::move(positions)), range_(range_m) {
  neighbors_.resize(positions_.size());
  for (NodeId a = 0; a < positions_.size(); ++a) {
    for (NodeId b = a + 1; b < positions_.size(); ++b) {
      const double dx = positions_[a].x - positions_[b].x;
      const double dy = positions_[a].y - positions_[b].y;
      if (std::sqrt(dx * dx + dy * dy) <= range_ + 1e-9) {
        neighbors_[a].push_back(b);
        neighbors_[b].push_back(a);
      }
    }
  }
}

bool Topology::linked(NodeId a, NodeId b) const {
  for (NodeId n : neighbors_.at(a))
    if (n == b) return true;
  return false;
}

bool Topology::connected() const {
  if (positions_.empty()) return true;
  std::vector<bool> seen(positions_.size(), false);
  std::deque<NodeId> q{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    NodeId n = q.front();
    q.pop_front();
    for (NodeId nb : neighbors_[n]) {
      if (!seen[nb]) {
        seen[nb] = true;
        ++count;
        q.push_back(nb);
      }
    }
  }
  return count == positions_.size();
}

Topology build_grid(std::uint32_t rows, std::uint32_t cols, double spacing,
                    double range) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("build_grid: empty grid");
  if ((rows > 1 || cols > 1) && range < spacing)
    throw std::invalid_argument("build_grid: range < spacing disconnects the grid");
  std::vector<Topology::Pos> pos;
  pos.reserve(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c)
      pos.push_back({c * spacing, r * spacing});
  return Topology(std::move(pos), range);
}

GatheringTree build_gathering_tree(const Topology& topo, NodeId root) {
  if (!topo.connected())
    throw std::invalid_argument("build_gathering_tree: topology not connected");
  const std::size_t n = topo.node_count();
  GatheringTree tree;
  tree.root = root;
  tree.parent.assign(n, root);
  tree.depth.assign(n, std::numeric_limits<std::uint32_t>::max());
  tree.depth[root] = 0;
  std::deque<NodeId> q{root};
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : topo.neighbors(u)) {
      if (tree.depth[v] == std::numeric_limits<std::uint32_t>::max()) {
        tree.depth[v] = tree.depth[u] + 1;
        tree.max_depth = std::max(tree.max_depth, tree.depth[v]);
        q.push_back(v);
      }
    }
  }
  // Parent = smallest-id neighbor one hop closer to the root.
  for (NodeId v = 0; v < n; ++v) {
    if (v == root) continue;
    for (NodeId u : topo.neighbors(v)) {
      if (tree.depth[u] + 1 == tree.depth[v]) {
        tree.parent[v] = u;
        break;
      }
    }
  }
  return tree;
}

}  // namespace macsim
