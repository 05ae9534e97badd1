#include "langsim/tree_evolve.hpp"

namespace langsim {

auto TreeLanguages::leaf_alignment(const Tree& tree) const -> Alignment {
  auto out = Alignment{};
  out.meaning_class = registry.meaning_classes();
  for (auto leaf : tree.leaves()) {
    out.taxa.push_back(tree.at(leaf).label);
    auto row = by_node.at(static_cast<std::size_t>(leaf));
    row.resize(registry.column_count());
    row.clear_hidden();
    out.rows.push_back(std::move(row));
  }
  return out;
}

auto evolve_tree(const Tree& tree, TraitSequence root, const RateConfig& config, Rng& rng, EventLog& log,
                 std::vector<int> root_meaning_classes, TreeEvolveOptions options) -> TreeLanguages {
  config.validate();
  require_no_missing(root);
  if (root_meaning_classes.empty()) {
    root_meaning_classes = contiguous_meaning_classes(root.length(), 0);
  }
  if (root_meaning_classes.size() != root.length()) {
    throw ModelError("root meaning-class vector length differs from the root sequence");
  }

  auto result = TreeLanguages{};
  result.registry = TraitRegistry(std::move(root_meaning_classes));
  result.by_node.resize(static_cast<std::size_t>(tree.size()));

  auto gtr_q = std::optional<RateMatrix>{};
  auto cov_q = std::optional<RateMatrix>{};
  switch (config.kind) {
    case ModelKind::gtr:
      gtr_q = RateMatrix::gtr(config.q01, config.q10);
      break;
    case ModelKind::covarion:
      cov_q = covarion_rate_matrix(config.q01, config.q10, config.delta, config.kappa);
      if (!root.has_hidden()) {
        root.set_hidden_states(draw_hidden_states(root.length(), config.kappa, rng));
      }
      break;
    case ModelKind::stochastic_dollo:
      break;
  }

  result.by_node[static_cast<std::size_t>(tree.root())] = std::move(root);
  for (auto id : tree.level_order()) {
    if (id == tree.root()) {
      continue;
    }
    const auto& node = tree.at(id);
    auto seq = result.by_node[static_cast<std::size_t>(node.parent)];
    auto duration = tree.branch_length(id);
    auto ctx = BranchContext{tree.at(node.parent).age, id};
    switch (config.kind) {
      case ModelKind::gtr:
        if (options.gtr_method == KernelMethod::matrix && config.no_empty == NoEmptyMode::off) {
          gtr_evolve_matrix(seq, *gtr_q, duration, rng);
        } else {
          gtr_evolve_events(seq, *gtr_q, duration, rng, log, ctx, config.no_empty, &result.registry);
        }
        break;
      case ModelKind::covarion:
        covarion_evolve(seq, *cov_q, duration, rng, log, options.covarion_method, ctx);
        break;
      case ModelKind::stochastic_dollo:
        sd_evolve(seq, config.lambda, config.mu, duration, rng, result.registry, log, ctx, config.no_empty);
        break;
    }
    result.by_node[static_cast<std::size_t>(id)] = std::move(seq);
  }
  for (auto& seq : result.by_node) {
    seq.resize(result.registry.column_count());
  }
  return result;
}

}  // namespace langsim
