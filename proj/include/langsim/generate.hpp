#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "langsim/borrowing.hpp"
#include "langsim/config.hpp"
#include "langsim/tree.hpp"

namespace langsim {

auto load_tree(const TreeSource& source, Rng& rng) -> Tree;
auto make_root(const RunConfig& config, Rng& rng) -> TraitSequence;

struct GeneratedReplicate {
  Tree tree;
  Alignment alignment;          // leaves, classes grouped, missing data applied
  std::string data_id;          // "GTR", "SD" or "Covarion"
  std::vector<int> missing_events;
  BorrowingStats borrowing;     // zero unless borrowing ran
};

// Replicate `index` of the configured run, drawn from make_stream(seed, index).
auto generate_replicate(const RunConfig& config, std::size_t index, EventLog* log = nullptr) -> GeneratedReplicate;

}  // namespace langsim
