#pragma once

#include <Eigen/Dense>

#include "langsim/random.hpp"
#include "langsim/trait_seq.hpp"

namespace langsim {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ModelKind { gtr, covarion, stochastic_dollo };

auto to_string(ModelKind kind) -> const char*;

// How death events treat a language about to lose its last trait.
enum class NoEmptyMode {
  off,
  language,       // veto deaths that would leave the language with no present trait
  meaning_class,  // veto deaths that would empty the trait's meaning class in that language
};

// Model parameters. Rates are per unit time; borrow_rate is a multiplier of
// mu. Only the fields of the active kind are read.
struct RateConfig {
  ModelKind kind = ModelKind::gtr;
  double q01 = 0.5;
  double q10 = 0.5;
  double delta = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double borrow_rate = 0.0;
  double local_z = k_infinite_distance;
  NoEmptyMode no_empty = NoEmptyMode::off;

  void validate() const;
};

// Square generator: off-diagonals >= 0, rows sum to zero.
class RateMatrix {
 public:
  explicit RateMatrix(Eigen::MatrixXd q);
  static auto gtr(double q01, double q10) -> RateMatrix;

  auto dim() const -> int { return static_cast<int>(q_.rows()); }
  auto matrix() const -> const Eigen::MatrixXd& { return q_; }
  auto operator()(int i, int j) const -> double { return q_(i, j); }
  auto exit_rate(int i) const -> double { return -q_(i, i); }

 private:
  Eigen::MatrixXd q_;
};

// P(t) = exp(Qt). Two-state generators use the closed form; larger ones use
// scaling and squaring of a Taylor series.
auto transition_matrix(const RateMatrix& q, double t) -> Eigen::MatrixXd;
// The series path regardless of dimension.
auto transition_matrix_series(const RateMatrix& q, double t) -> Eigen::MatrixXd;

// Where a branch sits on the tree, for event-log ages.
struct BranchContext {
  double start_age = 0.0;
  NodeId language = k_no_node;
};

// Redraws every site from row P(T)[state].
void gtr_evolve_matrix(TraitSequence& seq, const RateMatrix& q, double duration, Rng& rng);

// Explicit per-site mutation events. The branch's events are appended to
// `log` ordered by decreasing age. With a no-empty guard the sites are
// simulated jointly, since the guard couples them.
void gtr_evolve_events(TraitSequence& seq, const RateMatrix& q, double duration, Rng& rng, EventLog& log,
                       BranchContext ctx = {}, NoEmptyMode no_empty = NoEmptyMode::off,
                       const TraitRegistry* registry = nullptr);

// States ordered 0v, 1v, 0i, 1i.
auto covarion_rate_matrix(double q01, double q10, double delta, double kappa) -> RateMatrix;

// Long-run fraction of sites in the variant regime.
auto covarion_variant_fraction(double kappa) -> double;
auto draw_hidden_states(std::size_t length, double kappa, Rng& rng) -> std::vector<Regime>;

enum class KernelMethod { matrix, events };

void covarion_evolve(TraitSequence& seq, const RateMatrix& covarion_q, double duration, Rng& rng, EventLog& log,
                     KernelMethod method = KernelMethod::events, BranchContext ctx = {});

// Birth-death kernel. Births allocate fresh registry columns (meaning class
// drawn uniformly from the existing classes); deaths remove a uniformly
// chosen present trait.
void sd_evolve(TraitSequence& seq, double lambda, double mu, double duration, Rng& rng, TraitRegistry& registry,
               EventLog& log, BranchContext ctx = {}, NoEmptyMode no_empty = NoEmptyMode::off);

// True iff a death in `seq` leaves at least one present trait.
auto death_check(const TraitSequence& seq) -> bool;

// Applies the configured guard to a proposed death of `column`.
auto death_allowed(const TraitSequence& seq, std::size_t column, NoEmptyMode mode, const TraitRegistry* registry)
    -> bool;

// Meaning class for a newly born trait.
auto draw_birth_class(const TraitRegistry& registry, Rng& rng) -> int;

// Stationary Poisson(lambda/mu) root for the SD model.
auto sd_stationary_sequence(double lambda, double mu, Rng& rng, TraitRegistry& registry) -> TraitSequence;

void require_no_missing(const TraitSequence& seq);

}  // namespace langsim
