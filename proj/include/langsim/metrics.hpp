#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "langsim/substitution.hpp"
#include "langsim/tree.hpp"

namespace langsim {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Tree comparison

// Fraction of 4-leaf subsets whose induced unrooted topologies differ.
// Brute-force enumeration; trees must share their leaf label set (n >= 4).
auto quartet_distance(const Tree& t1, const Tree& t2) -> double;

// (height(true) - height(other)) / height(true); positive = underestimate.
auto height_difference(const Tree& true_tree, const Tree& other) -> double;
auto height_difference(double true_height, double other_height) -> double;

// ---------------------------------------------------------------------------
// Mass functions, evaluated in log space.

auto pmf_binomial(int n, double p, int k) -> double;
auto pmf_poisson(double rate, int k) -> double;
auto pmf_multinomial(std::span<const double> probs, std::span<const int> counts) -> double;

// ---------------------------------------------------------------------------
// Goodness of fit

struct FitResult {
  double statistic = 0.0;
  double critical = 0.0;
  double p_value = 1.0;
  int dof = 0;
  bool pass = false;
};

// Pearson chi-square. `expected` holds cell probabilities summing to 1;
// adjacent cells are pooled until every expected count is >= 5.
auto goodness_of_fit(std::span<const double> observed, std::span<const double> expected, double alpha) -> FitResult;

// Homogeneity of two histograms over the same cells, pooled likewise.
auto two_sample_test(std::span<const double> a, std::span<const double> b, double alpha) -> FitResult;

// Histogram of non-negative integer values; index = value.
auto histogram(std::span<const int> values) -> std::vector<double>;

// Cell probabilities pmf(0..last-1) with the upper tail folded into cell
// `last`; `last` is chosen so the folded tail mass drops below 1e-12 and
// at least `min_cells` cells exist.
auto discrete_cells(const std::function<double(int)>& pmf, int min_cells) -> std::vector<double>;

// Folds observed values at or above cells.size()-1 into the last cell.
auto fold_histogram(std::vector<double> observed, std::size_t cells) -> std::vector<double>;

// ---------------------------------------------------------------------------
// Stationary distributions

enum class StationaryMethod { large_time, null_space };

// Row vector pi with pi Q = 0, sum 1. The default runs both methods and
// requires them to agree within 1e-8.
auto stationary_distribution(const RateMatrix& q) -> Eigen::VectorXd;
auto stationary_distribution(const RateMatrix& q, StationaryMethod method) -> Eigen::VectorXd;

// Per-column joint state of n languages under mutation (rate mu each way)
// plus borrowing. States are bitmasks, bit i = language i present.
enum class BorrowingGeneratorRule {
  // Absent language gains at (b+1)mu when any other language holds the
  // trait (the two-language construction applied verbatim to n languages).
  any_holder,
  // Absent language gains at mu + h*b*mu/(n-1) with h holders: the exact
  // per-column law of donor-weighted, uniform-recipient borrowing.
  uniform_recipient,
};

auto borrowing_joint_generator(int languages, double mu, double b, BorrowingGeneratorRule rule) -> RateMatrix;
// "0110"-style label, language 0 first.
auto joint_state_label(unsigned mask, int languages) -> std::string;

// ---------------------------------------------------------------------------

struct Summary {
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  std::size_t count = 0;
};

auto summarize(std::vector<double> values) -> Summary;

}  // namespace langsim
