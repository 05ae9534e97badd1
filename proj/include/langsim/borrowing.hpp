#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "langsim/substitution.hpp"
#include "langsim/tree_evolve.hpp"

namespace langsim {

struct RateTotals {
  double sum_length = 0.0;   // sum of |l_i| over alive languages
  double sum_alive = 0.0;    // sum of k_i, present traits
  std::size_t languages = 0;  // n
};

// mu * sum|l_i| + b * mu * sum k_i
auto gtr_total_rate(const RateTotals& totals, double mu, double b) -> double;
auto gtr_mutation_rate(const RateTotals& totals, double mu) -> double;
// lambda * n + mu * sum k_i + mu * b * sum k_i
auto sd_total_rate(const RateTotals& totals, double lambda, double mu, double b) -> double;

// Alive lineages with their working languages and cached rate totals.
class TreeSimState {
 public:
  TreeSimState(const Tree& tree, std::vector<TraitSequence>& by_node) : tree_(tree), by_node_(by_node) {}

  auto lineages() const -> const std::vector<NodeId>& { return alive_; }
  auto size() const -> std::size_t { return alive_.size(); }
  auto language(std::size_t slot) -> TraitSequence& { return by_node_[static_cast<std::size_t>(alive_[slot])]; }
  auto language(std::size_t slot) const -> const TraitSequence& {
    return by_node_[static_cast<std::size_t>(alive_[slot])];
  }
  auto totals() const -> const RateTotals& { return totals_; }

  void add(NodeId lineage, TraitSequence seq);
  void remove(NodeId lineage);
  // Writes a state and keeps the cached totals in step.
  void set(std::size_t slot, std::size_t column, TraitState state);
  // Grows one language (SD column append); updates sum_length.
  void grow(std::size_t slot, std::size_t length);

  // Totals from a full recount of every alive language's states.
  auto recompute() const -> RateTotals;
  auto min_alive() const -> std::size_t;

  // Slot chosen with probability proportional to its present-trait count.
  auto weighted_slot(Rng& rng) const -> std::size_t;

 private:
  const Tree& tree_;
  std::vector<TraitSequence>& by_node_;
  std::vector<NodeId> alive_;
  RateTotals totals_;
};

enum class BorrowScope { global, local };

struct BorrowingParams {
  double mu = 0.0;
  double lambda = 0.0;  // SD only
  double b = 0.0;
  BorrowScope scope = BorrowScope::global;
  double z = k_infinite_distance;  // local scope only
  NoEmptyMode no_empty = NoEmptyMode::off;
};

struct BorrowingOptions {
  // Audit cached totals against a full recount every this many events; 0 disables.
  std::size_t audit_interval = 0;
};

struct BorrowingStats {
  std::size_t events = 0;
  std::size_t mutations = 0;
  std::size_t births = 0;
  std::size_t deaths = 0;
  std::size_t borrows = 0;
  std::size_t borrow_noops = 0;   // recipient already had the trait
  std::size_t borrow_vetoes = 0;  // local distance check failed or no partner
  std::size_t death_vetoes = 0;
  std::size_t audits = 0;
  double max_audit_error = 0.0;
  std::size_t min_alive = static_cast<std::size_t>(-1);  // over audited steps
};

struct BorrowingRun {
  TreeLanguages languages;
  BorrowingStats stats;
};

class AuditError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

auto evolve_tree_gtr_borrowing(const Tree& tree, const TraitSequence& root, const BorrowingParams& params, Rng& rng,
                               EventLog& log, std::vector<int> root_meaning_classes = {},
                               BorrowingOptions options = {}) -> BorrowingRun;

auto evolve_tree_sd_borrowing(const Tree& tree, const TraitSequence& root, const BorrowingParams& params, Rng& rng,
                              EventLog& log, TraitRegistry registry = {}, BorrowingOptions options = {})
    -> BorrowingRun;

// Fraction of traits borrowed over 1000 time units: 1 - exp(-1000 b).
auto borrowing_percentage(double b) -> double;
auto borrowing_rate_for_percentage(double fraction) -> double;

struct BorrowingTableEntry {
  double rate;
  int percent;
};

// Published rate <-> percentage pairs used to configure experiments.
auto borrowing_rate_table() -> const std::array<BorrowingTableEntry, 9>&;
auto table_rate_for_percent(int percent) -> double;

struct SdRates {
  double lambda;
  double mu;
};

// mu = -ln(1 - loss) / 1000, lambda = root_length * mu.
auto derive_sd_rates(double loss_fraction_per_1000y, std::size_t root_length) -> SdRates;

// Symmetric GTR rate giving probability `p` of a state change over `years`.
auto gtr_rate_for_change_probability(double p, double years = 1000.0) -> double;

}  // namespace langsim
