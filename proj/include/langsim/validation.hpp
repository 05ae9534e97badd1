#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "langsim/metrics.hpp"

namespace langsim {

// One pass/fail line. Fit checks carry the chi-square statistic and
// critical value; tolerance checks carry the largest deviation and the
// tolerance.
struct Check {
  std::string name;
  double statistic = 0.0;
  double critical = 0.0;
  bool pass = false;
};

struct NamedHistogram {
  std::string name;
  std::vector<double> counts;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  std::vector<NamedHistogram> histograms;

  auto pass() const -> bool;
};

struct SuiteOptions {
  std::size_t replicates = 100000;
  std::uint64_t seed = 1;
  double alpha = 0.01;
  unsigned workers = 0;
};

// Single-branch GTR, matrix and event kernels, against Binomial(20, 1/2).
auto suite_gtr_branch(const SuiteOptions& options) -> SuiteReport;
// Single-branch stochastic Dollo from a stationary start, against Poisson(1).
auto suite_sd_branch(const SuiteOptions& options) -> SuiteReport;
// A random leaf of a random Yule tree, for both models.
auto suite_tree_stationary(const SuiteOptions& options) -> SuiteReport;
// Per-column joint states of two / three coexisting borrowing languages.
auto suite_two_language_borrowing(const SuiteOptions& options) -> SuiteReport;
auto suite_three_language_borrowing(const SuiteOptions& options) -> SuiteReport;
// Missing-language and missing-meaning-class event counts.
auto suite_missing_data(const SuiteOptions& options) -> SuiteReport;

auto suite_names() -> const std::vector<std::string>&;  // fig2 ... fig8
auto run_suite(const std::string& name, const SuiteOptions& options) -> SuiteReport;

// Published three-language stationary vector, in mask order (bit i =
// language i), and the two-language one.
auto published_three_language_stationary() -> std::vector<double>;
auto published_two_language_stationary() -> std::vector<double>;

auto tolerance_check(std::string name, const std::vector<double>& observed, const std::vector<double>& expected,
                     double tolerance) -> Check;
auto fit_check(std::string name, const FitResult& fit) -> Check;

// `value,count` rows.
void write_histogram_csv(const std::filesystem::path& path, const std::vector<double>& counts);
// `test,statistic,critical,pass` rows.
void write_fit_report_csv(const std::filesystem::path& path, const std::vector<SuiteReport>& reports);

}  // namespace langsim
