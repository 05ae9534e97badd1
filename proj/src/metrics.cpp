#include "langsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/chi_squared.hpp>

namespace langsim {

namespace {

// Edge-count distances between leaves, ordered by `order`.
auto topological_distances(const Tree& tree, const std::vector<NodeId>& order) -> std::vector<int> {
  auto depth = std::vector<int>(static_cast<std::size_t>(tree.size()), 0);
  for (auto id : tree.level_order()) {
    const auto& node = tree.at(id);
    if (node.parent != k_no_node) {
      depth[static_cast<std::size_t>(id)] = depth[static_cast<std::size_t>(node.parent)] + 1;
    }
  }
  auto n = order.size();
  auto d = std::vector<int>(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto lca = tree.mrca(order[i], order[j]);
      auto v = depth[static_cast<std::size_t>(order[i])] + depth[static_cast<std::size_t>(order[j])] -
               2 * depth[static_cast<std::size_t>(lca)];
      d[i * n + j] = d[j * n + i] = v;
    }
  }
  return d;
}

// 0: ab|cd, 1: ac|bd, 2: ad|bc
inline auto quartet_split(const int* d, std::size_t n, std::size_t a, std::size_t b, std::size_t c, std::size_t e)
    -> int {
  auto s0 = d[a * n + b] + d[c * n + e];
  auto s1 = d[a * n + c] + d[b * n + e];
  auto s2 = d[a * n + e] + d[b * n + c];
  if (s0 < s1 && s0 < s2) {
    return 0;
  }
  return s1 < s2 ? 1 : 2;
}

auto chi_square_critical(int dof, double alpha) -> double {
  auto dist = boost::math::chi_squared_distribution<double>(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

auto chi_square_p_value(int dof, double statistic) -> double {
  auto dist = boost::math::chi_squared_distribution<double>(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw MetricError("alpha must lie in (0, 1)");
  }
}

// Contiguous cell groups whose weight (by `weight_of`) reaches `min_weight`.
auto pool_cells(std::size_t cells, const std::function<double(std::size_t)>& weight_of, double min_weight)
    -> std::vector<std::pair<std::size_t, std::size_t>> {
  auto groups = std::vector<std::pair<std::size_t, std::size_t>>{};
  auto start = std::size_t{0};
  auto acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    acc += weight_of(i);
    if (acc >= min_weight) {
      groups.emplace_back(start, i + 1);
      start = i + 1;
      acc = 0.0;
    }
  }
  if (start < cells) {
    if (groups.empty()) {
      groups.emplace_back(start, cells);
    } else {
      groups.back().second = cells;
    }
  }
  return groups;
}

}  // namespace

auto quartet_distance(const Tree& t1, const Tree& t2) -> double {
  auto n = static_cast<std::size_t>(t1.leaf_count());
  if (n < 4) {
    throw MetricError("quartet distance needs at least 4 leaves");
  }
  if (static_cast<std::size_t>(t2.leaf_count()) != n) {
    throw MetricError("trees have different leaf counts");
  }
  auto order2 = std::vector<NodeId>{};
  order2.reserve(n);
  for (auto leaf : t1.leaves()) {
    auto match = t2.find_leaf(t1.at(leaf).label);
    if (!match) {
      throw MetricError("leaf '" + t1.at(leaf).label + "' missing from the second tree");
    }
    order2.push_back(*match);
  }
  auto d1 = topological_distances(t1, t1.leaves());
  auto d2 = topological_distances(t2, order2);
  auto differing = std::uint64_t{0};
  auto total = std::uint64_t{0};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        for (std::size_t e = c + 1; e < n; ++e) {
          differing += quartet_split(d1.data(), n, a, b, c, e) != quartet_split(d2.data(), n, a, b, c, e);
          ++total;
        }
      }
    }
  }
  return static_cast<double>(differing) / static_cast<double>(total);
}

auto height_difference(double true_height, double other_height) -> double {
  if (true_height == 0.0) {
    throw MetricError("true tree has zero height");
  }
  return (true_height - other_height) / true_height;
}

auto height_difference(const Tree& true_tree, const Tree& other) -> double {
  return height_difference(true_tree.height(), other.height());
}

// ---------------------------------------------------------------------------

auto pmf_binomial(int n, double p, int k) -> double {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) {
    throw MetricError("binomial needs n >= 0 and p in [0, 1]");
  }
  if (k < 0 || k > n) {
    return 0.0;
  }
  if (p == 0.0) {
    return k == 0 ? 1.0 : 0.0;
  }
  if (p == 1.0) {
    return k == n ? 1.0 : 0.0;
  }
  auto log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

auto pmf_poisson(double rate, int k) -> double {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw MetricError("Poisson rate must be finite and non-negative");
  }
  if (k < 0) {
    return 0.0;
  }
  if (rate == 0.0) {
    return k == 0 ? 1.0 : 0.0;
  }
  return std::exp(k * std::log(rate) - rate - std::lgamma(k + 1.0));
}

auto pmf_multinomial(std::span<const double> probs, std::span<const int> counts) -> double {
  if (probs.size() != counts.size() || probs.empty()) {
    throw MetricError("multinomial needs matching, non-empty probability and count vectors");
  }
  auto sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    throw MetricError("multinomial probabilities must sum to 1");
  }
  auto total = 0;
  auto log_mass = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0 || counts[i] < 0) {
      throw MetricError("negative multinomial probability or count");
    }
    if (counts[i] == 0) {
      continue;
    }
    if (probs[i] == 0.0) {
      return 0.0;
    }
    total += counts[i];
    log_mass += counts[i] * std::log(probs[i]) - std::lgamma(counts[i] + 1.0);
  }
  return std::exp(log_mass + std::lgamma(total + 1.0));
}

// ---------------------------------------------------------------------------

auto goodness_of_fit(std::span<const double> observed, std::span<const double> expected, double alpha) -> FitResult {
  check_alpha(alpha);
  if (observed.size() != expected.size() || observed.empty()) {
    throw MetricError("observed and expected cell counts differ");
  }
  auto total = std::accumulate(observed.begin(), observed.end(), 0.0);
  if (total < 1000.0) {
    throw MetricError("goodness of fit needs at least 1000 observations");
  }
  auto mass = std::accumulate(expected.begin(), expected.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-9) {
    throw MetricError("expected cell probabilities must sum to 1");
  }
  auto groups = pool_cells(expected.size(), [&](std::size_t i) { return expected[i] * total; }, 5.0);
  if (groups.size() < 2) {
    throw MetricError("expected distribution is degenerate after pooling");
  }
  auto result = FitResult{};
  for (auto [lo, hi] : groups) {
    auto o = std::accumulate(observed.begin() + static_cast<std::ptrdiff_t>(lo),
                             observed.begin() + static_cast<std::ptrdiff_t>(hi), 0.0);
    auto e = total * std::accumulate(expected.begin() + static_cast<std::ptrdiff_t>(lo),
                                     expected.begin() + static_cast<std::ptrdiff_t>(hi), 0.0);
    if (e <= 0.0) {
      if (o > 0.0) {
        result.statistic = std::numeric_limits<double>::infinity();
      }
      continue;
    }
    result.statistic += (o - e) * (o - e) / e;
  }
  result.dof = static_cast<int>(groups.size()) - 1;
  result.critical = chi_square_critical(result.dof, alpha);
  result.p_value = std::isinf(result.statistic) ? 0.0 : chi_square_p_value(result.dof, result.statistic);
  result.pass = result.statistic < result.critical;
  return result;
}

auto two_sample_test(std::span<const double> a, std::span<const double> b, double alpha) -> FitResult {
  check_alpha(alpha);
  auto cells = std::max(a.size(), b.size());
  auto at = [](std::span<const double> v, std::size_t i) { return i < v.size() ? v[i] : 0.0; };
  auto na = std::accumulate(a.begin(), a.end(), 0.0);
  auto nb = std::accumulate(b.begin(), b.end(), 0.0);
  if (na <= 0.0 || nb <= 0.0) {
    throw MetricError("two-sample test needs two non-empty histograms");
  }
  auto n = na + nb;
  // expected count in the smaller sample must reach 5
  auto scale = std::min(na, nb) / n;
  auto groups = pool_cells(cells, [&](std::size_t i) { return (at(a, i) + at(b, i)) * scale; }, 5.0);
  if (groups.size() < 2) {
    throw MetricError("histograms are degenerate after pooling");
  }
  auto result = FitResult{};
  for (auto [lo, hi] : groups) {
    auto oa = 0.0;
    auto ob = 0.0;
    for (auto i = lo; i < hi; ++i) {
      oa += at(a, i);
      ob += at(b, i);
    }
    auto col = oa + ob;
    auto ea = col * na / n;
    auto eb = col * nb / n;
    result.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  result.dof = static_cast<int>(groups.size()) - 1;
  result.critical = chi_square_critical(result.dof, alpha);
  result.p_value = chi_square_p_value(result.dof, result.statistic);
  result.pass = result.statistic < result.critical;
  return result;
}

auto histogram(std::span<const int> values) -> std::vector<double> {
  auto out = std::vector<double>{};
  for (auto v : values) {
    if (v < 0) {
      throw MetricError("histogram values must be non-negative");
    }
    if (static_cast<std::size_t>(v) >= out.size()) {
      out.resize(static_cast<std::size_t>(v) + 1, 0.0);
    }
    out[static_cast<std::size_t>(v)] += 1.0;
  }
  return out;
}

auto discrete_cells(const std::function<double(int)>& pmf, int min_cells) -> std::vector<double> {
  auto cells = std::vector<double>{};
  auto acc = 0.0;
  for (int k = 0; k < 100000; ++k) {
    auto p = pmf(k);
    cells.push_back(p);
    acc += p;
    if (static_cast<int>(cells.size()) >= min_cells && 1.0 - acc < 1e-12) {
      break;
    }
  }
  cells.back() += std::max(0.0, 1.0 - acc);
  return cells;
}

auto fold_histogram(std::vector<double> observed, std::size_t cells) -> std::vector<double> {
  if (cells == 0) {
    throw MetricError("need at least one cell");
  }
  if (observed.size() > cells) {
    auto tail = std::accumulate(observed.begin() + static_cast<std::ptrdiff_t>(cells), observed.end(), 0.0);
    observed.resize(cells);
    observed.back() += tail;
  }
  observed.resize(cells, 0.0);
  return observed;
}

// ---------------------------------------------------------------------------

auto stationary_distribution(const RateMatrix& q, StationaryMethod method) -> Eigen::VectorXd {
  auto n = q.dim();
  if (method == StationaryMethod::null_space) {
    // pi Q = 0 with the last balance equation replaced by sum(pi) = 1
    auto a = Eigen::MatrixXd(q.matrix().transpose());
    a.row(n - 1).setOnes();
    auto rhs = Eigen::VectorXd(Eigen::VectorXd::Zero(n));
    rhs(n - 1) = 1.0;
    auto lu = Eigen::FullPivLU<Eigen::MatrixXd>(a);
    if (lu.rank() < n) {
      throw MetricError("generator is reducible: stationary distribution is not unique");
    }
    auto pi = Eigen::VectorXd(lu.solve(rhs));
    if ((pi.array() < -1e-12).any()) {
      throw MetricError("generator has no non-negative stationary solution");
    }
    return pi;
  }
  auto t = 1.0;
  auto prev = transition_matrix(q, t);
  for (int i = 0; i < 200; ++i) {
    t *= 2.0;
    auto p = transition_matrix(q, t);
    auto row_spread = 0.0;
    for (int r = 1; r < n; ++r) {
      row_spread = std::max(row_spread, (p.row(r) - p.row(0)).cwiseAbs().maxCoeff());
    }
    auto change = (p - prev).cwiseAbs().maxCoeff();
    if (row_spread < 1e-10 && change < 1e-10) {
      return p.row(0).transpose();
    }
    prev = std::move(p);
  }
  throw MetricError("transition matrix rows did not converge: generator is reducible or degenerate");
}

auto stationary_distribution(const RateMatrix& q) -> Eigen::VectorXd {
  auto by_time = stationary_distribution(q, StationaryMethod::large_time);
  auto by_solve = stationary_distribution(q, StationaryMethod::null_space);
  if ((by_time - by_solve).cwiseAbs().maxCoeff() > 1e-8) {
    throw MetricError("large-time and null-space stationary distributions disagree");
  }
  return by_solve;
}

auto borrowing_joint_generator(int languages, double mu, double b, BorrowingGeneratorRule rule) -> RateMatrix {
  if (languages < 2 || languages > 12) {
    throw MetricError("joint generator supports 2 to 12 languages");
  }
  if (!(mu >= 0.0) || !(b >= 0.0)) {
    throw MetricError("rates must be non-negative");
  }
  auto states = 1u << languages;
  auto q = Eigen::MatrixXd(Eigen::MatrixXd::Zero(states, states));
  for (unsigned s = 0; s < states; ++s) {
    auto holders = std::popcount(s);
    for (int i = 0; i < languages; ++i) {
      auto bit = 1u << i;
      auto rate = mu;
      if ((s & bit) == 0 && holders > 0) {
        rate += rule == BorrowingGeneratorRule::any_holder ? b * mu : holders * b * mu / (languages - 1);
      }
      q(s, s ^ bit) += rate;
    }
    q(s, s) = -q.row(s).sum();
  }
  return RateMatrix(q);
}

auto joint_state_label(unsigned mask, int languages) -> std::string {
  auto out = std::string(static_cast<std::size_t>(languages), '0');
  for (int i = 0; i < languages; ++i) {
    if (mask & (1u << i)) {
      out[static_cast<std::size_t>(i)] = '1';
    }
  }
  return out;
}

auto summarize(std::vector<double> values) -> Summary {
  if (values.empty()) {
    throw MetricError("cannot summarize an empty sample");
  }
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    auto pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  auto s = Summary{};
  s.count = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.q025 = quantile(0.025);
  s.q975 = quantile(0.975);
  return s;
}

}  // namespace langsim
