#include "langsim/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

namespace langsim {

Tree::Tree(std::vector<Node> nodes, NodeId root) : nodes_(std::move(nodes)), root_(root) {
  auto n = size();
  if (root_ < 0 || root_ >= n) {
    throw TreeError("root id out of range");
  }
  if (at(root_).parent != k_no_node) {
    throw TreeError("root has a parent");
  }
  auto labels = std::unordered_set<std::string>{};
  auto seen = std::vector<bool>(static_cast<std::size_t>(n), false);
  auto stack = std::vector<NodeId>{root_};
  while (!stack.empty()) {
    auto id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]) {
      throw TreeError("node reachable twice (cycle)");
    }
    seen[static_cast<std::size_t>(id)] = true;
    const auto& node = at(id);
    if (node.is_leaf()) {
      if (node.label.empty()) {
        throw TreeError("leaf without a taxon label");
      }
      if (!labels.insert(node.label).second) {
        throw TreeError("duplicate taxon label '" + node.label + "'");
      }
      leaves_.push_back(id);
      continue;
    }
    if (node.children.size() != 2) {
      throw TreeError("internal node " + std::to_string(id) + " has " +
                      std::to_string(node.children.size()) + " children; only binary trees are supported");
    }
    // push right first so leaves come out left to right
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
      auto child = *it;
      if (child < 0 || child >= n || at(child).parent != id) {
        throw TreeError("inconsistent parent/child links at node " + std::to_string(id));
      }
      if (!(node.age > at(child).age)) {
        throw TreeError("non-positive branch length above node " + std::to_string(child));
      }
      stack.push_back(child);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw TreeError("node not reachable from the root");
  }
  for (const auto& node : nodes_) {
    if (node.age < 0.0 || !std::isfinite(node.age)) {
      throw TreeError("node age must be finite and non-negative");
    }
  }
}

auto Tree::branch_length(NodeId id) const -> double {
  const auto& node = at(id);
  return node.parent == k_no_node ? 0.0 : at(node.parent).age - node.age;
}

auto Tree::find_leaf(std::string_view label) const -> std::optional<NodeId> {
  for (auto id : leaves_) {
    if (at(id).label == label) {
      return id;
    }
  }
  return std::nullopt;
}

auto Tree::level_order() const -> std::vector<NodeId> {
  auto order = std::vector<NodeId>{root_};
  order.reserve(nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (auto child : at(order[i]).children) {
      order.push_back(child);
    }
  }
  return order;
}

auto Tree::is_ancestor(NodeId ancestor, NodeId node) const -> bool {
  for (auto cur = node; cur != k_no_node; cur = at(cur).parent) {
    if (cur == ancestor) {
      return true;
    }
  }
  return false;
}

auto Tree::mrca(NodeId a, NodeId b) const -> NodeId {
  auto ancestors = std::vector<NodeId>{};
  for (auto cur = a; cur != k_no_node; cur = at(cur).parent) {
    ancestors.push_back(cur);
  }
  for (auto cur = b; cur != k_no_node; cur = at(cur).parent) {
    if (std::find(ancestors.begin(), ancestors.end(), cur) != ancestors.end()) {
      return cur;
    }
  }
  throw TreeError("nodes share no ancestor");
}

// ---------------------------------------------------------------------------
// Newick

namespace {

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  auto parse() -> Tree {
    skip_space();
    auto root = parse_subtree();
    skip_space();
    if (peek() == ':') {
      ++pos_;
      parse_length();  // root branch length carries no information
      skip_space();
    }
    if (peek() == ';') {
      ++pos_;
      skip_space();
    }
    if (pos_ != text_.size()) {
      throw NewickError("unexpected trailing text", pos_);
    }

    // ages from depths; the deepest leaf defines the present
    auto depth = std::vector<double>(nodes_.size(), 0.0);
    auto order = std::vector<NodeId>{root};
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (auto child : nodes_[static_cast<std::size_t>(order[i])].children) {
        depth[static_cast<std::size_t>(child)] =
            depth[static_cast<std::size_t>(order[i])] + lengths_[static_cast<std::size_t>(child)];
        order.push_back(child);
      }
    }
    auto root_age = *std::max_element(depth.begin(), depth.end());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto age = root_age - depth[i];
      if (std::abs(age) <= 1e-12 * std::max(1.0, root_age)) {
        age = 0.0;
      }
      nodes_[i].age = age;
    }
    try {
      return Tree(std::move(nodes_), root);
    } catch (const NewickError&) {
      throw;
    } catch (const TreeError& e) {
      throw NewickError(e.what(), pos_);
    }
  }

 private:
  auto peek() const -> char { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  auto new_node() -> NodeId {
    nodes_.emplace_back();
    lengths_.push_back(0.0);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  auto parse_subtree() -> NodeId {
    auto id = new_node();
    skip_space();
    if (peek() == '(') {
      ++pos_;
      while (true) {
        auto child = parse_subtree();
        nodes_[static_cast<std::size_t>(child)].parent = id;
        nodes_[static_cast<std::size_t>(id)].children.push_back(child);
        skip_space();
        if (peek() != ':') {
          throw NewickError("missing branch length", pos_);
        }
        ++pos_;
        lengths_[static_cast<std::size_t>(child)] = parse_length();
        skip_space();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        throw NewickError("expected ',' or ')'", pos_);
      }
      skip_space();
      nodes_[static_cast<std::size_t>(id)].label = parse_label(false);
    } else {
      nodes_[static_cast<std::size_t>(id)].label = parse_label(true);
    }
    return id;
  }

  auto parse_label(bool required) -> std::string {
    skip_space();
    auto start = pos_;
    if (peek() == '\'') {
      ++pos_;
      auto label = std::string{};
      while (true) {
        if (pos_ >= text_.size()) {
          throw NewickError("unterminated quoted label", start);
        }
        if (text_[pos_] == '\'') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
            label += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          return label;
        }
        label += text_[pos_++];
      }
    }
    while (pos_ < text_.size() && std::string_view{"(),:;"}.find(text_[pos_]) == std::string_view::npos) {
      ++pos_;
    }
    auto label = std::string{text_.substr(start, pos_ - start)};
    while (!label.empty() && std::isspace(static_cast<unsigned char>(label.back()))) {
      label.pop_back();
    }
    if (required && label.empty()) {
      throw NewickError("expected a taxon label or '('", start);
    }
    return label;
  }

  auto parse_length() -> double {
    skip_space();
    auto start = pos_;
    auto value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{}) {
      throw NewickError("malformed branch length", start);
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (!std::isfinite(value) || value < 0.0) {
      throw NewickError("branch length must be finite and non-negative", start);
    }
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> lengths_;
};

auto format_number(double value) -> std::string {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

auto needs_quoting(const std::string& label) -> bool {
  return label.find_first_of("(),:;' \t\n[]") != std::string::npos;
}

void write_label(std::string& out, const std::string& label) {
  if (!needs_quoting(label)) {
    out += label;
    return;
  }
  out += '\'';
  for (auto c : label) {
    if (c == '\'') {
      out += '\'';
    }
    out += c;
  }
  out += '\'';
}

void write_subtree(const Tree& tree, NodeId id, std::string& out) {
  const auto& node = tree.at(id);
  if (!node.is_leaf()) {
    out += '(';
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) {
        out += ',';
      }
      write_subtree(tree, node.children[i], out);
    }
    out += ')';
  }
  write_label(out, node.label);
  if (id != tree.root()) {
    out += ':';
    out += format_number(tree.branch_length(id));
  }
}

}  // namespace

auto parse_newick(std::string_view text) -> Tree {
  return NewickParser{text}.parse();
}

auto serialize_newick(const Tree& tree) -> std::string {
  auto out = std::string{};
  write_subtree(tree, tree.root(), out);
  out += ';';
  return out;
}

// ---------------------------------------------------------------------------

auto generate_yule(int n_leaves, double birth_rate, Rng& rng) -> Tree {
  if (n_leaves < 2) {
    throw TreeError("Yule tree needs at least 2 leaves");
  }
  if (!(birth_rate > 0.0) || !std::isfinite(birth_rate)) {
    throw TreeError("Yule birth rate must be positive");
  }
  // Grow forward in time; `time` holds the forward time of each node.
  auto nodes = std::vector<Node>(1);
  auto time = std::vector<double>{0.0};
  auto tips = std::vector<NodeId>{};
  auto split = [&](NodeId parent) {
    for (int c = 0; c < 2; ++c) {
      auto child = static_cast<NodeId>(nodes.size());
      nodes.emplace_back();
      nodes.back().parent = parent;
      time.push_back(0.0);
      nodes[static_cast<std::size_t>(parent)].children.push_back(child);
      tips.push_back(child);
    }
  };
  split(0);
  auto now = 0.0;
  while (static_cast<int>(tips.size()) < n_leaves) {
    now += exponential(rng, static_cast<double>(tips.size()) * birth_rate);
    auto pick = uniform_index(rng, tips.size());
    auto parent = tips[pick];
    tips[pick] = tips.back();
    tips.pop_back();
    time[static_cast<std::size_t>(parent)] = now;
    split(parent);
  }
  auto end = now + exponential(rng, static_cast<double>(tips.size()) * birth_rate);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].age = nodes[i].children.empty() ? 0.0 : end - time[i];
  }
  auto labels = std::vector<int>(tips.size());
  std::iota(labels.begin(), labels.end(), 1);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::sort(tips.begin(), tips.end());
  for (std::size_t i = 0; i < tips.size(); ++i) {
    nodes[static_cast<std::size_t>(tips[i])].label = "t" + std::to_string(labels[i]);
  }
  return Tree(std::move(nodes), 0);
}

auto lineages_alive_at(const Tree& tree, double age) -> std::vector<NodeId> {
  if (!(age >= 0.0) || age > tree.height()) {
    throw TreeError("age " + std::to_string(age) + " outside [0, root age]");
  }
  if (age == tree.height()) {
    return {tree.root()};
  }
  auto alive = std::vector<NodeId>{};
  for (NodeId id = 0; id < tree.size(); ++id) {
    const auto& node = tree.at(id);
    if (node.parent != k_no_node && node.age <= age && age < tree.at(node.parent).age) {
      alive.push_back(id);
    }
  }
  return alive;
}

auto mrca_within(const Tree& tree, NodeId a, NodeId b, double at_age, double z) -> bool {
  auto alive_at = [&](NodeId id) {
    const auto& node = tree.at(id);
    if (node.parent == k_no_node) {
      return at_age == node.age;
    }
    return node.age <= at_age && at_age < tree.at(node.parent).age;
  };
  if (!alive_at(a) || !alive_at(b)) {
    throw TreeError("lineage not alive at age " + std::to_string(at_age));
  }
  if (a == b) {
    throw TreeError("mrca_within needs two distinct lineages");
  }
  if (std::isinf(z)) {
    return true;
  }
  return tree.at(tree.mrca(a, b)).age - at_age <= z;
}

auto branch_event_schedule(const Tree& tree) -> std::vector<ScheduleEntry> {
  auto order = std::vector<NodeId>(static_cast<std::size_t>(tree.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId x, NodeId y) {
    auto ax = tree.at(x).age;
    auto ay = tree.at(y).age;
    if (ax != ay) {
      return ax > ay;
    }
    // a parent always precedes its children; leaves after internal nodes
    return tree.at(x).is_leaf() < tree.at(y).is_leaf();
  });
  auto schedule = std::vector<ScheduleEntry>{};
  schedule.reserve(order.size());
  auto alive = std::vector<NodeId>{};
  for (auto id : order) {
    const auto& node = tree.at(id);
    if (id != tree.root()) {
      alive.erase(std::find(alive.begin(), alive.end(), id));
    }
    for (auto child : node.children) {
      alive.push_back(child);
    }
    schedule.push_back({node.age, id, alive});
  }
  return schedule;
}

auto leaf_path_lengths(const Tree& tree) -> std::vector<std::vector<double>> {
  const auto& leaves = tree.leaves();
  auto n = leaves.size();
  auto out = std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto m = tree.at(tree.mrca(leaves[i], leaves[j])).age;
      out[i][j] = out[j][i] = (m - tree.at(leaves[i]).age) + (m - tree.at(leaves[j]).age);
    }
  }
  return out;
}

}  // namespace langsim
