#include "langsim/missing_data.hpp"

#include <algorithm>
#include <numeric>

namespace langsim {

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw MissingDataError("missing-data probability must lie in [0, 1]");
  }
}

}  // namespace

auto apply_missing_languages(Alignment& alignment, double p, Rng& rng) -> std::vector<int> {
  check_probability(p);
  auto counts = std::vector<int>(alignment.rows.size(), 0);
  auto pool = std::vector<std::size_t>{};
  for (std::size_t r = 0; r < alignment.rows.size(); ++r) {
    auto& row = alignment.rows[r];
    auto columns = row.length();
    auto u = std::binomial_distribution<int>{static_cast<int>(columns), p}(rng);
    counts[r] = u;
    if (u == 0) {
      continue;
    }
    // partial Fisher-Yates: the first u entries are a uniform u-subset
    pool.resize(columns);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(u); ++i) {
      auto j = i + uniform_index(rng, columns - i);
      std::swap(pool[i], pool[j]);
      row.set(pool[i], TraitState::missing);
    }
  }
  return counts;
}

auto apply_missing_meaning_classes(Alignment& alignment, double p, Rng& rng) -> std::vector<int> {
  check_probability(p);
  auto per_class = std::vector<double>(static_cast<std::size_t>(std::max(alignment.class_count(), 0)), p);
  return apply_missing_meaning_classes(alignment, per_class, rng);
}

auto apply_missing_meaning_classes(Alignment& alignment, std::span<const double> p, Rng& rng) -> std::vector<int> {
  for (auto q : p) {
    check_probability(q);
  }
  for (const auto& row : alignment.rows) {
    if (row.length() != alignment.column_count()) {
      throw MissingDataError("alignment lacks meaning-class metadata for its columns");
    }
  }
  for (auto c : alignment.meaning_class) {
    if (c < 0) {
      throw MissingDataError("negative meaning class id");
    }
  }
  auto languages = alignment.rows.size();
  auto classes = alignment.class_count();
  if (p.size() < static_cast<std::size_t>(classes)) {
    throw MissingDataError("missing-data probabilities given for " + std::to_string(p.size()) + " of " +
                           std::to_string(classes) + " meaning classes");
  }
  auto counts = std::vector<int>(static_cast<std::size_t>(classes), 0);
  if (languages == 0) {
    return counts;
  }
  auto buckets = std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < alignment.meaning_class.size(); ++i) {
    buckets[static_cast<std::size_t>(alignment.meaning_class[i])].push_back(i);
  }
  for (int c = 0; c < classes; ++c) {
    const auto& members = buckets[static_cast<std::size_t>(c)];
    auto u = std::binomial_distribution<int>{static_cast<int>(languages), p[static_cast<std::size_t>(c)]}(rng);
    counts[static_cast<std::size_t>(c)] = u;
    if (members.empty()) {
      continue;
    }
    for (int e = 0; e < u; ++e) {
      auto& row = alignment.rows[uniform_index(rng, languages)];
      auto column = members[uniform_index(rng, members.size())];
      row.set(column, TraitState::missing);
    }
  }
  return counts;
}

}  // namespace langsim
