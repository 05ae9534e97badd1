#include "langsim/borrowing.hpp"

#include <algorithm>
#include <cmath>

namespace langsim {

auto gtr_mutation_rate(const RateTotals& totals, double mu) -> double {
  return mu * totals.sum_length;
}

auto gtr_total_rate(const RateTotals& totals, double mu, double b) -> double {
  return mu * totals.sum_length + b * mu * totals.sum_alive;
}

auto sd_total_rate(const RateTotals& totals, double lambda, double mu, double b) -> double {
  return lambda * static_cast<double>(totals.languages) + mu * totals.sum_alive + mu * b * totals.sum_alive;
}

// ---------------------------------------------------------------------------

void TreeSimState::add(NodeId lineage, TraitSequence seq) {
  totals_.sum_length += static_cast<double>(seq.length());
  totals_.sum_alive += static_cast<double>(seq.alive_count());
  ++totals_.languages;
  by_node_[static_cast<std::size_t>(lineage)] = std::move(seq);
  alive_.push_back(lineage);
}

void TreeSimState::remove(NodeId lineage) {
  auto it = std::find(alive_.begin(), alive_.end(), lineage);
  if (it == alive_.end()) {
    throw std::logic_error("lineage is not alive");
  }
  const auto& seq = by_node_[static_cast<std::size_t>(lineage)];
  totals_.sum_length -= static_cast<double>(seq.length());
  totals_.sum_alive -= static_cast<double>(seq.alive_count());
  --totals_.languages;
  alive_.erase(it);
}

void TreeSimState::set(std::size_t slot, std::size_t column, TraitState state) {
  auto& seq = language(slot);
  auto before = seq.alive_count();
  seq.set(column, state);
  totals_.sum_alive += static_cast<double>(seq.alive_count()) - static_cast<double>(before);
}

void TreeSimState::grow(std::size_t slot, std::size_t length) {
  auto& seq = language(slot);
  if (length > seq.length()) {
    totals_.sum_length += static_cast<double>(length - seq.length());
    seq.resize(length);
  }
}

auto TreeSimState::recompute() const -> RateTotals {
  auto out = RateTotals{};
  for (auto id : alive_) {
    const auto& seq = by_node_[static_cast<std::size_t>(id)];
    out.sum_length += static_cast<double>(seq.length());
    out.sum_alive += static_cast<double>(seq.recount_alive());
    ++out.languages;
  }
  return out;
}

auto TreeSimState::min_alive() const -> std::size_t {
  auto m = static_cast<std::size_t>(-1);
  for (auto id : alive_) {
    m = std::min(m, by_node_[static_cast<std::size_t>(id)].alive_count());
  }
  return m;
}

auto TreeSimState::weighted_slot(Rng& rng) const -> std::size_t {
  auto total = static_cast<std::size_t>(std::llround(totals_.sum_alive));
  if (total == 0) {
    throw NoAliveTraitError{};
  }
  auto r = uniform_index(rng, total);
  for (std::size_t slot = 0; slot < alive_.size(); ++slot) {
    auto k = by_node_[static_cast<std::size_t>(alive_[slot])].alive_count();
    if (r < k) {
      return slot;
    }
    r -= k;
  }
  throw std::logic_error("cached alive total exceeds the languages' alive counts");
}

// ---------------------------------------------------------------------------

namespace {

void validate(const BorrowingParams& p, bool sd) {
  auto ok = [](double v) { return v >= 0.0 && std::isfinite(v); };
  if (!ok(p.mu) || !ok(p.b) || (sd && !ok(p.lambda))) {
    throw ModelError("borrowing rates must be finite and non-negative");
  }
  if (!(p.z >= 0.0)) {
    throw ModelError("local borrowing distance must be non-negative");
  }
}

// Shared interval sweep. `step` performs one event at the given age and
// `rate` reports the current total rate.
template <typename Rate, typename Step, typename Audit>
void sweep(const Tree& tree, TreeSimState& state, std::vector<TraitSequence>& by_node, Rng& rng, Rate rate, Step step,
           Audit audit) {
  auto schedule = branch_event_schedule(tree);
  auto root_id = tree.root();
  for (auto child : tree.at(root_id).children) {
    state.add(child, by_node[static_cast<std::size_t>(root_id)]);
  }
  audit();
  auto age = tree.height();
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    const auto& entry = schedule[i];
    while (entry.age < age) {
      auto total = rate();
      if (total <= 0.0) {
        break;
      }
      auto next = age - exponential(rng, total);
      if (next <= entry.age) {
        break;  // memoryless: redraw from the boundary with the new rate
      }
      age = next;
      step(age);
      audit();
    }
    age = entry.age;
    const auto& node = tree.at(entry.node);
    auto final_seq = by_node[static_cast<std::size_t>(entry.node)];
    state.remove(entry.node);
    for (auto child : node.children) {
      state.add(child, final_seq);
    }
    audit();
  }
}

struct Engine {
  const Tree& tree;
  TreeSimState& state;
  const BorrowingParams& params;
  Rng& rng;
  EventLog& log;
  BorrowingStats& stats;
  const TraitRegistry* registry;

  void borrow(double age) {
    auto donor = state.weighted_slot(rng);
    auto column = state.language(donor).random_alive_index(rng);
    auto donor_id = state.lineages()[donor];
    if (state.size() < 2) {
      ++stats.borrow_vetoes;
      log.record({age, EventKind::borrow_veto, k_no_node, static_cast<std::int64_t>(column), donor_id});
      return;
    }
    auto recipient = uniform_index(rng, state.size() - 1);
    if (recipient >= donor) {
      ++recipient;
    }
    auto recipient_id = state.lineages()[recipient];
    if (params.scope == BorrowScope::local && !mrca_within(tree, donor_id, recipient_id, age, params.z)) {
      ++stats.borrow_vetoes;
      log.record({age, EventKind::borrow_veto, recipient_id, static_cast<std::int64_t>(column), donor_id});
      return;
    }
    auto& target = state.language(recipient);
    if (column >= target.length()) {
      state.grow(recipient, column + 1);
    }
    if (target.get(column) == TraitState::present) {
      ++stats.borrow_noops;
    }
    state.set(recipient, column, TraitState::present);
    ++stats.borrows;
    log.record({age, EventKind::borrow, recipient_id, static_cast<std::int64_t>(column), donor_id});
  }

  // Removes `column` from `slot` unless the guard forbids it.
  void kill(double age, std::size_t slot, std::size_t column) {
    auto id = state.lineages()[slot];
    if (!death_allowed(state.language(slot), column, params.no_empty, registry)) {
      ++stats.death_vetoes;
      log.record({age, EventKind::death_veto, id, static_cast<std::int64_t>(column)});
      return;
    }
    state.set(slot, column, TraitState::absent);
    log.record({age, registry_is_sd ? EventKind::death : EventKind::mutation10, id, static_cast<std::int64_t>(column)});
  }

  bool registry_is_sd = false;
};

template <typename Rate>
auto make_audit(TreeSimState& state, const BorrowingOptions& options, BorrowingStats& stats, Rate rate_of) {
  return [&state, &options, &stats, rate_of]() {
    if (options.audit_interval == 0) {
      return;
    }
    if (stats.events % options.audit_interval != 0 && stats.audits > 0) {
      return;
    }
    auto cached = state.totals();
    auto fresh = state.recompute();
    auto err = std::max({std::abs(cached.sum_length - fresh.sum_length), std::abs(cached.sum_alive - fresh.sum_alive),
                         cached.languages == fresh.languages ? 0.0 : 1.0});
    auto cached_rate = rate_of(cached);
    auto fresh_rate = rate_of(fresh);
    err = std::max(err, std::abs(cached_rate - fresh_rate) / std::max(1.0, std::abs(fresh_rate)));
    stats.max_audit_error = std::max(stats.max_audit_error, err);
    ++stats.audits;
    if (state.size() > 0) {
      stats.min_alive = std::min(stats.min_alive, state.min_alive());
    }
    if (err > 1e-12) {
      throw AuditError("cached rate totals diverged from recount after " + std::to_string(stats.events) + " events");
    }
  };
}

}  // namespace

auto evolve_tree_gtr_borrowing(const Tree& tree, const TraitSequence& root, const BorrowingParams& params, Rng& rng,
                               EventLog& log, std::vector<int> root_meaning_classes, BorrowingOptions options)
    -> BorrowingRun {
  validate(params, false);
  require_no_missing(root);
  if (root_meaning_classes.empty()) {
    root_meaning_classes = contiguous_meaning_classes(root.length(), 0);
  }
  if (root_meaning_classes.size() != root.length()) {
    throw ModelError("root meaning-class vector length differs from the root sequence");
  }
  auto run = BorrowingRun{};
  run.languages.registry = TraitRegistry(std::move(root_meaning_classes));
  auto& by_node = run.languages.by_node;
  by_node.resize(static_cast<std::size_t>(tree.size()));
  by_node[static_cast<std::size_t>(tree.root())] = root;
  by_node[static_cast<std::size_t>(tree.root())].clear_hidden();

  auto state = TreeSimState(tree, by_node);
  auto& stats = run.stats;
  auto engine = Engine{tree, state, params, rng, log, stats, &run.languages.registry};
  auto length = root.length();
  auto rate_of = [mu = params.mu, b = params.b](const RateTotals& t) { return gtr_total_rate(t, mu, b); };
  auto audit = make_audit(state, options, stats, rate_of);

  auto step = [&](double age) {
    ++stats.events;
    const auto& totals = state.totals();
    auto total = gtr_total_rate(totals, params.mu, params.b);
    if (uniform01(rng) * total < gtr_mutation_rate(totals, params.mu)) {
      ++stats.mutations;
      auto slot = uniform_index(rng, state.size());
      auto site = uniform_index(rng, length);
      if (state.language(slot).get(site) == TraitState::present) {
        engine.kill(age, slot, site);
      } else {
        state.set(slot, site, TraitState::present);
        log.record({age, EventKind::mutation01, state.lineages()[slot], static_cast<std::int64_t>(site)});
      }
    } else {
      engine.borrow(age);
    }
  };
  sweep(tree, state, by_node, rng, [&] { return rate_of(state.totals()); }, step, audit);
  return run;
}

auto evolve_tree_sd_borrowing(const Tree& tree, const TraitSequence& root, const BorrowingParams& params, Rng& rng,
                              EventLog& log, TraitRegistry registry, BorrowingOptions options) -> BorrowingRun {
  validate(params, true);
  require_no_missing(root);
  if (registry.column_count() == 0 && root.length() > 0) {
    registry = TraitRegistry(contiguous_meaning_classes(root.length(), 0));
  }
  if (registry.column_count() < root.length()) {
    throw ModelError("trait registry has fewer columns than the root sequence");
  }
  auto run = BorrowingRun{};
  run.languages.registry = std::move(registry);
  auto& reg = run.languages.registry;
  auto& by_node = run.languages.by_node;
  by_node.resize(static_cast<std::size_t>(tree.size()));
  by_node[static_cast<std::size_t>(tree.root())] = root;
  by_node[static_cast<std::size_t>(tree.root())].resize(reg.column_count());
  by_node[static_cast<std::size_t>(tree.root())].clear_hidden();

  auto state = TreeSimState(tree, by_node);
  auto& stats = run.stats;
  auto engine = Engine{tree, state, params, rng, log, stats, &reg};
  engine.registry_is_sd = true;
  auto rate_of = [lambda = params.lambda, mu = params.mu, b = params.b](const RateTotals& t) {
    return sd_total_rate(t, lambda, mu, b);
  };
  auto audit = make_audit(state, options, stats, rate_of);

  auto step = [&](double age) {
    ++stats.events;
    const auto& totals = state.totals();
    auto birth = params.lambda * static_cast<double>(totals.languages);
    auto death = params.mu * totals.sum_alive;
    auto total = sd_total_rate(totals, params.lambda, params.mu, params.b);
    auto u = uniform01(rng) * total;
    if (u < birth) {
      ++stats.births;
      auto slot = uniform_index(rng, state.size());
      auto column = reg.allocate(draw_birth_class(reg, rng));
      state.grow(slot, column + 1);
      state.set(slot, column, TraitState::present);
      log.record({age, EventKind::birth, state.lineages()[slot], static_cast<std::int64_t>(column)});
    } else if (u < birth + death) {
      ++stats.deaths;
      auto slot = state.weighted_slot(rng);
      auto column = state.language(slot).random_alive_index(rng);
      engine.kill(age, slot, column);
    } else {
      engine.borrow(age);
    }
  };
  sweep(tree, state, by_node, rng, [&] { return rate_of(state.totals()); }, step, audit);
  for (auto& seq : by_node) {
    seq.resize(reg.column_count());
  }
  return run;
}

// ---------------------------------------------------------------------------

auto borrowing_percentage(double b) -> double {
  if (!(b >= 0.0)) {
    throw std::invalid_argument("borrowing rate must be non-negative");
  }
  return -std::expm1(-b * 1000.0);
}

auto borrowing_rate_for_percentage(double fraction) -> double {
  if (!(fraction >= 0.0) || fraction >= 1.0) {
    throw std::invalid_argument("borrowed fraction must lie in [0, 1)");
  }
  return -std::log1p(-fraction) / 1000.0;
}

auto borrowing_rate_table() -> const std::array<BorrowingTableEntry, 9>& {
  static constexpr auto table = std::array<BorrowingTableEntry, 9>{{
      {0.0, 0},
      {0.045, 1},
      {0.224, 5},
      {0.448, 10},
      {0.672, 15},
      {0.896, 20},
      {1.344, 30},
      {1.793, 40},
      {2.241, 50},
  }};
  return table;
}

auto table_rate_for_percent(int percent) -> double {
  for (const auto& e : borrowing_rate_table()) {
    if (e.percent == percent) {
      return e.rate;
    }
  }
  throw std::invalid_argument("no tabulated borrowing rate for " + std::to_string(percent) + "%");
}

auto derive_sd_rates(double loss_fraction_per_1000y, std::size_t root_length) -> SdRates {
  if (!(loss_fraction_per_1000y >= 0.0) || loss_fraction_per_1000y >= 1.0) {
    throw std::invalid_argument("loss fraction must lie in [0, 1)");
  }
  if (root_length < 1) {
    throw std::invalid_argument("root length must be at least 1");
  }
  auto mu = -std::log1p(-loss_fraction_per_1000y) / 1000.0;
  return {static_cast<double>(root_length) * mu, mu};
}

auto gtr_rate_for_change_probability(double p, double years) -> double {
  if (!(p >= 0.0) || p >= 0.5 || !(years > 0.0)) {
    throw std::invalid_argument("change probability must lie in [0, 0.5) over a positive period");
  }
  // symmetric two-state chain: p(t) = (1 - exp(-2 mu t)) / 2
  return -std::log1p(-2.0 * p) / (2.0 * years);
}

}  // namespace langsim
