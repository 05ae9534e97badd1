#include "langsim/generate.hpp"

#include <fstream>
#include <sstream>

#include "langsim/alignment_io.hpp"
#include "langsim/missing_data.hpp"
#include "langsim/tree_evolve.hpp"

namespace langsim {

auto load_tree(const TreeSource& source, Rng& rng) -> Tree {
  switch (source.kind) {
    case TreeSource::Kind::newick:
      return parse_newick(source.newick);
    case TreeSource::Kind::file: {
      auto in = std::ifstream(source.path);
      if (!in) {
        throw ConfigError("cannot read tree file " + source.path.string());
      }
      auto text = std::stringstream{};
      text << in.rdbuf();
      return parse_newick(text.str());
    }
    case TreeSource::Kind::yule:
      return generate_yule(source.n_leaves, source.birth_rate, rng);
  }
  throw ConfigError("unknown tree source");
}

auto make_root(const RunConfig& config, Rng& rng) -> TraitSequence {
  switch (config.root.kind) {
    case RootSource::Kind::bits:
      return TraitSequence::from_string(config.root.bits);
    case RootSource::Kind::all_present: {
      auto seq = TraitSequence(config.root.length);
      for (std::size_t i = 0; i < config.root.length; ++i) {
        seq.set(i, TraitState::present);
      }
      return seq;
    }
    case RootSource::Kind::sd_stationary: {
      auto scratch = TraitRegistry{};
      return sd_stationary_sequence(config.model.lambda, config.model.mu, rng, scratch);
    }
  }
  throw ConfigError("unknown root source");
}

auto generate_replicate(const RunConfig& config, std::size_t index, EventLog* log) -> GeneratedReplicate {
  config.validate();
  auto rng = make_stream(config.seed, index);
  auto local_log = EventLog(false);
  auto& events = log ? *log : local_log;

  auto tree = load_tree(config.tree, rng);
  auto root = make_root(config, rng);
  auto classes = contiguous_meaning_classes(root.length(), config.meaning_classes);
  const auto& m = config.model;

  auto languages = TreeLanguages{};
  auto stats = BorrowingStats{};
  if (m.borrow_rate > 0.0) {
    auto params = BorrowingParams{};
    params.b = m.borrow_rate;
    params.scope = std::isinf(m.local_z) ? BorrowScope::global : BorrowScope::local;
    params.z = m.local_z;
    params.no_empty = m.no_empty;
    auto run = BorrowingRun{};
    if (m.kind == ModelKind::gtr) {
      params.mu = m.q01;
      run = evolve_tree_gtr_borrowing(tree, root, params, rng, events, std::move(classes));
    } else {
      params.mu = m.mu;
      params.lambda = m.lambda;
      run = evolve_tree_sd_borrowing(tree, root, params, rng, events, TraitRegistry(std::move(classes)));
    }
    languages = std::move(run.languages);
    stats = run.stats;
  } else {
    languages = evolve_tree(tree, root, m, rng, events, std::move(classes));
  }

  auto alignment = group_columns_by_class(languages.leaf_alignment(tree));
  auto missing = std::vector<int>{};
  if (config.missing.rate > 0.0) {
    missing = config.missing.kind == MissingConfig::Kind::languages
                  ? apply_missing_languages(alignment, config.missing.rate, rng)
                  : apply_missing_meaning_classes(alignment, config.missing.rate, rng);
  }
  return GeneratedReplicate{std::move(tree), std::move(alignment), to_string(m.kind), std::move(missing), stats};
}

}  // namespace langsim
