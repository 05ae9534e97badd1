#pragma once

#include "langsim/substitution.hpp"
#include "langsim/trait_seq.hpp"
#include "langsim/tree.hpp"

namespace langsim {

// Languages at every node of a simulated tree, indexed by NodeId, plus the
// column metadata they share.
struct TreeLanguages {
  std::vector<TraitSequence> by_node;
  TraitRegistry registry;

  // Leaf rows in tree.leaves() order, padded to the full column count.
  auto leaf_alignment(const Tree& tree) const -> Alignment;
};

struct TreeEvolveOptions {
  // GTR branches; a no-empty guard forces the event kernel.
  KernelMethod gtr_method = KernelMethod::matrix;
  KernelMethod covarion_method = KernelMethod::events;
};

// Root meaning classes: one entry per root column; empty means one class per
// column. Covarion roots without hidden states get stationary regimes drawn.
auto evolve_tree(const Tree& tree, TraitSequence root, const RateConfig& config, Rng& rng, EventLog& log,
                 std::vector<int> root_meaning_classes = {}, TreeEvolveOptions options = {}) -> TreeLanguages;

}  // namespace langsim
