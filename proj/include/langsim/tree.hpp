#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "langsim/random.hpp"

namespace langsim {

using NodeId = int;
inline constexpr NodeId k_no_node = -1;

// Local-borrowing distance meaning "no restriction".
inline constexpr double k_infinite_distance = std::numeric_limits<double>::infinity();

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NewickError : public TreeError {
 public:
  NewickError(const std::string& what, std::size_t position)
      : TreeError(what + " at position " + std::to_string(position)), position_(position) {}
  auto position() const -> std::size_t { return position_; }

 private:
  std::size_t position_;
};

struct Node {
  NodeId parent = k_no_node;
  std::vector<NodeId> children;
  double age = 0.0;  // time before present
  std::string label;

  auto is_leaf() const -> bool { return children.empty(); }
};

// Rooted binary phylogeny. Ages are measured backwards from the present, so
// the root carries the largest age. Immutable once constructed.
class Tree {
 public:
  // Validates the invariants: single root, binary internal nodes, strictly
  // positive branch lengths, unique leaf labels.
  Tree(std::vector<Node> nodes, NodeId root);

  auto size() const -> int { return static_cast<int>(nodes_.size()); }
  auto root() const -> NodeId { return root_; }
  auto at(NodeId id) const -> const Node& { return nodes_.at(static_cast<std::size_t>(id)); }
  auto nodes() const -> const std::vector<Node>& { return nodes_; }
  auto height() const -> double { return at(root_).age; }

  // Branch length above `id`; zero for the root.
  auto branch_length(NodeId id) const -> double;

  // Leaves in depth-first order.
  auto leaves() const -> const std::vector<NodeId>& { return leaves_; }
  auto leaf_count() const -> int { return static_cast<int>(leaves_.size()); }
  auto find_leaf(std::string_view label) const -> std::optional<NodeId>;

  // Breadth-first order starting at the root.
  auto level_order() const -> std::vector<NodeId>;

  auto is_ancestor(NodeId ancestor, NodeId node) const -> bool;
  auto mrca(NodeId a, NodeId b) const -> NodeId;

 private:
  std::vector<Node> nodes_;
  NodeId root_;
  std::vector<NodeId> leaves_;
};

auto parse_newick(std::string_view text) -> Tree;
auto serialize_newick(const Tree& tree) -> std::string;

// Pure-birth tree: two lineages at the root, each splitting at `birth_rate`
// until `n_leaves` exist, then one further waiting time Exp(n * birth_rate)
// before the present. Leaf labels t1..tn are assigned in random order.
auto generate_yule(int n_leaves, double birth_rate, Rng& rng) -> Tree;

// Lineages are identified by the node at the bottom of their branch.
// A lineage is alive at `age` when child.age <= age < parent.age; the root
// lineage is alive only at exactly the root age.
auto lineages_alive_at(const Tree& tree, double age) -> std::vector<NodeId>;

// True iff age(mrca(a, b)) - at_age <= z. Always true for an infinite z.
auto mrca_within(const Tree& tree, NodeId a, NodeId b, double at_age, double z) -> bool;

struct ScheduleEntry {
  double age;
  NodeId node;                  // node whose age this is
  std::vector<NodeId> alive;    // lineages alive just below `age`
};

// Node ages from the root down, each with the lineage set that holds in the
// following interval. Ties between node ages are kept as separate entries in
// a deterministic order.
auto branch_event_schedule(const Tree& tree) -> std::vector<ScheduleEntry>;

// Pairwise root-to-leaf path lengths indexed by leaf position in leaves().
auto leaf_path_lengths(const Tree& tree) -> std::vector<std::vector<double>>;

}  // namespace langsim
