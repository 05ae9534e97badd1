#include <doctest.h>

#include "langsim/metrics.hpp"
#include "langsim/missing_data.hpp"
#include "test_helpers.hpp"

using namespace langsim;

namespace {

auto make_alignment(std::size_t languages, std::vector<int> classes, Rng& rng) -> Alignment {
  auto a = Alignment{};
  for (std::size_t i = 0; i < languages; ++i) {
    a.taxa.push_back("L" + std::to_string(i));
    a.rows.push_back(test::random_bits(classes.size(), rng));
  }
  a.meaning_class = std::move(classes);
  return a;
}

auto missing_in(const TraitSequence& row) -> int {
  auto s = row.to_string();
  return static_cast<int>(std::count(s.begin(), s.end(), '?'));
}

}  // namespace

TEST_CASE("missing languages: extremes") {
  auto rng = make_stream(61, 0);
  auto a = make_alignment(5, contiguous_meaning_classes(12, 4), rng);
  auto before = a.rows;
  auto counts = apply_missing_languages(a, 0.0, rng);
  CHECK(counts == std::vector<int>(5, 0));
  CHECK(a.rows == before);

  counts = apply_missing_languages(a, 1.0, rng);
  CHECK(counts == std::vector<int>(5, 12));
  for (const auto& row : a.rows) {
    CHECK(row.to_string() == std::string(12, '?'));
    CHECK(row.alive_count() == 0);
    CHECK(row.consistent());
  }
  CHECK_THROWS_AS(apply_missing_languages(a, 1.5, rng), MissingDataError);
  CHECK_THROWS_AS(apply_missing_languages(a, -0.1, rng), MissingDataError);
}

TEST_CASE("missing languages: counts are binomial and columns distinct") {
  auto rng = make_stream(62, 0);
  auto observed = std::vector<int>{};
  for (int i = 0; i < 4000; ++i) {
    auto a = make_alignment(3, contiguous_meaning_classes(20, 5), rng);
    auto counts = apply_missing_languages(a, 0.3, rng);
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
      // u distinct columns, so exactly u '?' per row
      REQUIRE(missing_in(a.rows[r]) == counts[r]);
    }
    observed.push_back(counts[0]);
  }
  auto expected = std::vector<double>{};
  for (int k = 0; k <= 20; ++k) {
    expected.push_back(pmf_binomial(20, 0.3, k));
  }
  CHECK(goodness_of_fit(fold_histogram(histogram(observed), 21), expected, 0.01).pass);
}

TEST_CASE("missing meaning classes: extremes and confinement") {
  auto rng = make_stream(63, 0);
  auto a = make_alignment(6, {0, 0, 1, 1, 2, 2}, rng);
  auto before = a.rows;
  auto counts = apply_missing_meaning_classes(a, 0.0, rng);
  CHECK(counts == std::vector<int>{0, 0, 0});
  CHECK(a.rows == before);

  // only class 2 can lose data
  auto probs = std::vector<double>{0.0, 0.0, 1.0};
  for (int rep = 0; rep < 200; ++rep) {
    auto b = make_alignment(6, {0, 0, 1, 1, 2, 2}, rng);
    auto original = b.rows;
    counts = apply_missing_meaning_classes(b, probs, rng);
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 0);
    CHECK(counts[2] == 6);
    for (std::size_t r = 0; r < b.rows.size(); ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        REQUIRE(b.rows[r].get(c) == original[r].get(c));
      }
    }
  }
  CHECK_THROWS_AS(apply_missing_meaning_classes(a, std::vector<double>{0.5, 0.5}, rng), MissingDataError);
}

TEST_CASE("missing data is never undone") {
  auto rng = make_stream(64, 0);
  auto a = make_alignment(4, contiguous_meaning_classes(16, 4), rng);
  apply_missing_languages(a, 0.4, rng);
  auto first = a.rows;
  apply_missing_meaning_classes(a, 0.7, rng);
  apply_missing_languages(a, 0.2, rng);
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      if (first[r].get(c) == TraitState::missing) {
        CHECK(a.rows[r].get(c) == TraitState::missing);
      } else if (a.rows[r].get(c) != TraitState::missing) {
        CHECK(a.rows[r].get(c) == first[r].get(c));
      }
    }
    CHECK(a.rows[r].consistent());
  }
}

TEST_CASE("missing data is deterministic per stream") {
  auto setup = make_stream(65, 0);
  auto a = make_alignment(5, contiguous_meaning_classes(30, 6), setup);
  auto b = a;
  auto r1 = make_stream(65, 1);
  auto r2 = make_stream(65, 1);
  CHECK(apply_missing_meaning_classes(a, 0.5, r1) == apply_missing_meaning_classes(b, 0.5, r2));
  CHECK(apply_missing_languages(a, 0.5, r1) == apply_missing_languages(b, 0.5, r2));
  CHECK(a.rows == b.rows);
}

TEST_CASE("meaning-class missingness needs column metadata") {
  auto rng = make_stream(66, 0);
  auto a = make_alignment(3, {0, 1, 2}, rng);
  a.rows[1].resize(5);
  CHECK_THROWS_WITH_AS(apply_missing_meaning_classes(a, 0.5, rng),
                       "alignment lacks meaning-class metadata for its columns", MissingDataError);
  auto b = make_alignment(3, {0, -1, 1}, rng);
  CHECK_THROWS_AS(apply_missing_meaning_classes(b, 0.5, rng), MissingDataError);
}
