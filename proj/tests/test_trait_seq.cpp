#include <doctest.h>

#include <set>

#include "langsim/metrics.hpp"
#include "langsim/trait_seq.hpp"
#include "test_helpers.hpp"

using namespace langsim;

TEST_CASE("set_state keeps the alive count") {
  auto seq = TraitSequence::from_string("0110");
  CHECK(seq.alive_count() == 2);
  seq.set(0, TraitState::present);
  CHECK(seq.alive_count() == 3);
  // borrowing into a present trait changes nothing
  seq.set(0, TraitState::present);
  CHECK(seq.alive_count() == 3);
  seq.set(1, TraitState::missing);
  CHECK(seq.alive_count() == 2);
  CHECK(seq.missing_count() == 1);
  CHECK(seq.to_string() == "1?10");
  CHECK_THROWS_AS(seq.set(4, TraitState::present), std::out_of_range);
  CHECK_THROWS_AS(seq.get(4), std::out_of_range);
}

TEST_CASE("random tapes agree with a recount") {
  auto rng = make_stream(21, 0);
  auto seq = TraitSequence(200);
  for (int i = 0; i < 10000; ++i) {
    auto s = static_cast<TraitState>(uniform_index(rng, 3));
    seq.set(uniform_index(rng, seq.length()), s);
    if (i % 1000 == 0) {
      seq.resize(seq.length() + 5);
    }
  }
  CHECK(seq.alive_count() == seq.recount_alive());
  CHECK(seq.consistent());
  auto naive = std::size_t{0};
  auto members = std::set<std::uint32_t>(seq.alive_indices().begin(), seq.alive_indices().end());
  for (std::size_t c = 0; c < seq.length(); ++c) {
    auto present = seq.get(c) == TraitState::present;
    naive += present;
    CHECK(members.count(static_cast<std::uint32_t>(c)) == static_cast<std::size_t>(present));
  }
  CHECK(naive == seq.alive_count());
}

TEST_CASE("random alive index is uniform") {
  auto rng = make_stream(22, 0);
  auto seq = TraitSequence::from_string("0110");
  auto hits = std::vector<double>(4, 0.0);
  for (int i = 0; i < 10000; ++i) {
    hits[seq.random_alive_index(rng)] += 1.0;
  }
  CHECK(hits[0] == 0.0);
  CHECK(hits[3] == 0.0);
  CHECK(std::abs(hits[1] / 10000.0 - 0.5) < 0.02);
  auto observed = std::vector<double>{hits[1], hits[2]};
  auto expected = std::vector<double>{0.5, 0.5};
  CHECK(goodness_of_fit(observed, expected, 0.01).pass);

  auto single = TraitSequence::from_string("00010");
  for (int i = 0; i < 100; ++i) {
    CHECK(single.random_alive_index(rng) == 3);
  }
  CHECK_THROWS_AS(TraitSequence(5).random_alive_index(rng), NoAliveTraitError);
}

TEST_CASE("lazy absent tail") {
  auto seq = TraitSequence::from_string("11");
  seq.resize(2449);
  CHECK(seq.length() == 2449);
  CHECK(seq.get(2000) == TraitState::absent);
  CHECK(seq.alive_count() == 2);
  auto other = TraitSequence::from_string("11");
  other.resize(2449);
  CHECK(seq == other);
}

TEST_CASE("hidden states") {
  auto seq = TraitSequence(3);
  CHECK_FALSE(seq.has_hidden());
  CHECK_THROWS(seq.set_hidden_states({Regime::variant}));
  seq.set_hidden_states({Regime::variant, Regime::invariant, Regime::variant});
  CHECK(seq.hidden(1) == Regime::invariant);
  seq.resize(5);
  CHECK(seq.hidden(4) == Regime::variant);
}

TEST_CASE("append_trait") {
  auto a = Alignment{};
  auto registry = TraitRegistry{};
  for (int i = 0; i < 3; ++i) {
    a.taxa.push_back("L" + std::to_string(i));
    a.rows.emplace_back(0);
  }
  auto col = append_trait(a, registry, 0, 0);
  CHECK(col == 0);
  CHECK(a.rows[0].to_string() == "1");
  CHECK(a.rows[1].to_string() == "0");
  CHECK(a.rows[2].to_string() == "0");
  a.validate();

  auto root = TraitRegistry(contiguous_meaning_classes(2449, 0));
  auto big = Alignment{{"x"}, {TraitSequence(2449)}, root.meaning_classes()};
  auto fresh = append_trait(big, root, 0, 7);
  CHECK(fresh == 2449);
  CHECK(big.column_count() == 2450);
  CHECK(root.meaning_class(2449) == 7);

  auto rng = make_stream(23, 0);
  auto ids = std::set<std::size_t>{};
  for (int i = 0; i < 1000; ++i) {
    ids.insert(append_trait(a, registry, uniform_index(rng, 3), 0));
  }
  CHECK(ids.size() == 1000);
  CHECK(ids.count(0) == 0);
  CHECK_THROWS(append_trait(a, registry, 3, 0));
}

TEST_CASE("contiguous meaning classes") {
  CHECK(contiguous_meaning_classes(5, 0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(contiguous_meaning_classes(5, 2) == std::vector<int>{0, 0, 0, 1, 1});
  CHECK(contiguous_meaning_classes(6, 3) == std::vector<int>{0, 0, 1, 1, 2, 2});
  CHECK(contiguous_meaning_classes(3, 10) == std::vector<int>{0, 1, 2});
  auto a = Alignment{{}, {}, {0, 0, 1, 1, 2, 2}};
  CHECK(a.class_count() == 3);
  CHECK(a.columns_of_class(1) == std::vector<std::size_t>{2, 3});
  CHECK(a.class_first_positions() == std::vector<std::size_t>{0, 2, 4});
}

TEST_CASE("alignment validation") {
  auto a = Alignment{{"a", "a"}, {TraitSequence(2), TraitSequence(2)}, {0, 1}};
  CHECK_THROWS(a.validate());
  a.taxa[1] = "b";
  a.validate();
  a.rows[1].resize(3);
  CHECK_THROWS(a.validate());
}

TEST_CASE("event log") {
  auto log = EventLog(true);
  log.record({1.0, EventKind::birth, 0, 3});
  log.record({0.5, EventKind::death, 0, 3});
  CHECK(log.count(EventKind::birth) == 1);
  CHECK(log.size() == 2);
  auto off = EventLog(false);
  off.record({1.0, EventKind::birth, 0, 3});
  CHECK(off.size() == 0);
  CHECK(std::string(to_string(EventKind::borrow_veto)) == "borrow_veto");
}
