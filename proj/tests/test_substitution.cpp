#include <doctest.h>

#include <cmath>

#include "langsim/metrics.hpp"
#include "langsim/substitution.hpp"
#include "test_helpers.hpp"

using namespace langsim;

namespace {

auto random_generator(int dim, Rng& rng) -> RateMatrix {
  auto q = Eigen::MatrixXd(Eigen::MatrixXd::Zero(dim, dim));
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (i != j) {
        q(i, j) = uniform01(rng);
      }
    }
    q(i, i) = -q.row(i).sum();
  }
  return RateMatrix(q);
}

auto alive_histogram(const std::vector<int>& counts) -> std::vector<double> {
  return histogram(counts);
}

}  // namespace

TEST_CASE("transition matrix") {
  auto rng = make_stream(31, 0);
  auto sym = RateMatrix::gtr(0.5, 0.5);
  CHECK(transition_matrix(sym, 0.0).isApprox(Eigen::MatrixXd::Identity(2, 2)));
  auto p = transition_matrix(sym, 100.0);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(p(i, j) - 0.5) < 1e-9);
    }
  }
  // closed form p01(t) = (1 - exp(-2 mu t)) / 2
  for (auto t : {0.01, 0.3, 1.0, 4.0}) {
    auto exact = (1.0 - std::exp(-2.0 * 0.5 * t)) / 2.0;
    CHECK(std::abs(transition_matrix(sym, t)(0, 1) - exact) < 1e-12);
    CHECK(std::abs(transition_matrix_series(sym, t)(0, 1) - exact) < 1e-12);
  }
  auto asym = RateMatrix::gtr(0.2, 0.7);
  CHECK((transition_matrix(asym, 2.5) - transition_matrix_series(asym, 2.5)).cwiseAbs().maxCoeff() < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    auto q = random_generator(4, rng);
    auto s = uniform01(rng) * 3.0;
    auto t = uniform01(rng) * 3.0;
    auto pst = transition_matrix(q, s + t);
    CHECK((pst - transition_matrix(q, s) * transition_matrix(q, t)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pst.minCoeff() >= 0.0);
    for (int r = 0; r < 4; ++r) {
      CHECK(std::abs(pst.row(r).sum() - 1.0) < 1e-9);
    }
  }
  CHECK_THROWS(transition_matrix(sym, -1.0));
}

TEST_CASE("rate matrix validation") {
  auto bad = Eigen::MatrixXd(2, 2);
  bad << -0.5, 0.4, 0.5, -0.5;
  CHECK_THROWS(RateMatrix(bad));
  bad << 0.5, -0.5, 0.5, -0.5;
  CHECK_THROWS(RateMatrix(bad));
  CHECK_THROWS(RateMatrix::gtr(-1.0, 0.5));
}

TEST_CASE("gtr kernels") {
  auto rng = make_stream(32, 0);
  auto q = RateMatrix::gtr(0.5, 0.5);
  auto log = EventLog(true);

  SUBCASE("zero time leaves the sequence alone") {
    auto seq = TraitSequence::from_string("0110100");
    auto copy = seq;
    gtr_evolve_matrix(seq, q, 0.0, rng);
    CHECK(seq == copy);
    gtr_evolve_events(seq, q, 0.0, rng, log);
    CHECK(seq == copy);
    CHECK(log.size() == 0);
  }

  SUBCASE("single-site marginal matches P(T)") {
    auto asym = RateMatrix::gtr(0.3, 0.9);
    auto t = 0.7;
    auto expected = transition_matrix(asym, t)(0, 1);
    auto n = 100000;
    auto ones = 0;
    for (int i = 0; i < n; ++i) {
      auto seq = TraitSequence(1);
      gtr_evolve_matrix(seq, asym, t, rng);
      ones += seq.alive_count();
    }
    auto se = std::sqrt(expected * (1 - expected) / n);
    CHECK(std::abs(ones / static_cast<double>(n) - expected) < 4 * se);
  }

  SUBCASE("event log replays to the final sequence") {
    auto seq = test::random_bits(30, rng);
    auto start = seq;
    auto branch_log = EventLog(true);
    gtr_evolve_events(seq, q, 3.0, rng, branch_log, BranchContext{3.0, 5});
    auto replay = start;
    auto prev_age = 3.0;
    for (const auto& r : branch_log.records()) {
      CHECK(r.age <= prev_age);
      CHECK(r.age >= 0.0);
      CHECK(r.language == 5);
      prev_age = r.age;
      auto c = static_cast<std::size_t>(r.column);
      if (r.kind == EventKind::mutation01) {
        CHECK(replay.get(c) == TraitState::absent);
        replay.set(c, TraitState::present);
      } else {
        REQUIRE(r.kind == EventKind::mutation10);
        CHECK(replay.get(c) == TraitState::present);
        replay.set(c, TraitState::absent);
      }
    }
    CHECK(replay == seq);
  }

  SUBCASE("matrix and event kernels agree") {
    for (int setting = 0; setting < 3; ++setting) {
      auto q01 = 0.1 + uniform01(rng);
      auto q10 = 0.1 + uniform01(rng);
      auto t = 0.2 + 2.0 * uniform01(rng);
      auto gq = RateMatrix::gtr(q01, q10);
      auto a = std::vector<int>{};
      auto b = std::vector<int>{};
      auto quiet = EventLog(false);
      for (int i = 0; i < 20000; ++i) {
        auto s1 = TraitSequence::from_string("11110000001111100000");
        gtr_evolve_matrix(s1, gq, t, rng);
        a.push_back(static_cast<int>(s1.alive_count()));
        auto s2 = TraitSequence::from_string("11110000001111100000");
        gtr_evolve_events(s2, gq, t, rng, quiet);
        b.push_back(static_cast<int>(s2.alive_count()));
      }
      CHECK(two_sample_test(alive_histogram(a), alive_histogram(b), 0.01).pass);
    }
  }

  SUBCASE("missing entries are rejected") {
    auto seq = TraitSequence::from_string("01?");
    CHECK_THROWS_AS(gtr_evolve_matrix(seq, q, 1.0, rng), ModelError);
    CHECK_THROWS_AS(gtr_evolve_events(seq, q, 1.0, rng, log), ModelError);
  }
}

TEST_CASE("covarion matrix") {
  auto q = covarion_rate_matrix(0.5, 0.5, 0.2, 0.5);
  auto row0 = std::vector<double>{-0.7, 0.5, 0.2, 0.0};
  auto row2 = std::vector<double>{0.1, 0.0, -0.1, 0.0};
  for (int j = 0; j < 4; ++j) {
    CHECK(q(0, j) == doctest::Approx(row0[static_cast<std::size_t>(j)]).epsilon(1e-15));
    CHECK(q(2, j) == doctest::Approx(row2[static_cast<std::size_t>(j)]).epsilon(1e-15));
  }
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(q.matrix().row(i).sum()) < 1e-12);
  }
  auto frozen = covarion_rate_matrix(0.3, 0.6, 0.0, 2.0);
  auto gtr = RateMatrix::gtr(0.3, 0.6);
  CHECK(frozen.matrix().block(0, 0, 2, 2).isApprox(gtr.matrix()));
  CHECK(frozen.matrix().block(2, 0, 2, 4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(frozen.matrix().block(0, 2, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(covarion_rate_matrix(0.5, 0.5, -0.1, 1.0));
}

TEST_CASE("covarion kernel") {
  auto rng = make_stream(33, 0);
  auto log = EventLog(false);

  SUBCASE("frozen variant sites reduce to gtr") {
    auto cq = covarion_rate_matrix(0.5, 0.5, 0.0, 1.0);
    auto gq = RateMatrix::gtr(0.5, 0.5);
    auto a = std::vector<int>{};
    auto b = std::vector<int>{};
    for (int i = 0; i < 20000; ++i) {
      auto s1 = TraitSequence(20);
      s1.set_hidden_states(std::vector<Regime>(20, Regime::variant));
      covarion_evolve(s1, cq, 0.8, rng, log);
      a.push_back(static_cast<int>(s1.alive_count()));
      auto s2 = TraitSequence(20);
      gtr_evolve_matrix(s2, gq, 0.8, rng);
      b.push_back(static_cast<int>(s2.alive_count()));
    }
    CHECK(two_sample_test(histogram(a), histogram(b), 0.01).pass);
  }

  SUBCASE("invariant sites never change") {
    auto cq = covarion_rate_matrix(0.5, 0.5, 0.0, 1.0);
    auto seq = TraitSequence::from_string("0110101");
    seq.set_hidden_states(std::vector<Regime>(7, Regime::invariant));
    auto copy = seq;
    for (auto method : {KernelMethod::matrix, KernelMethod::events}) {
      covarion_evolve(seq, cq, 1000.0, rng, log, method);
      CHECK(seq.to_string() == copy.to_string());
    }
  }

  SUBCASE("four-state occupancy matches the matrix exponential") {
    auto cq = covarion_rate_matrix(0.4, 0.6, 0.3, 0.5);
    auto t = 1.5;
    auto p = transition_matrix(cq, t);
    for (auto method : {KernelMethod::matrix, KernelMethod::events}) {
      auto counts = std::vector<double>(4, 0.0);
      auto n = 40000;
      for (int i = 0; i < n; ++i) {
        auto seq = TraitSequence(1);
        seq.set_hidden_states({Regime::variant});
        covarion_evolve(seq, cq, t, rng, log, method);
        auto state = (seq.get(0) == TraitState::present ? 1 : 0) + (seq.hidden(0) == Regime::invariant ? 2 : 0);
        counts[static_cast<std::size_t>(state)] += 1.0;
      }
      for (int s = 0; s < 4; ++s) {
        auto expected = p(0, s);
        auto se = std::sqrt(expected * (1 - expected) / n);
        CHECK(std::abs(counts[static_cast<std::size_t>(s)] / n - expected) < 4 * se + 1e-12);
      }
    }
  }

  SUBCASE("hidden states are required") {
    auto cq = covarion_rate_matrix(0.5, 0.5, 0.2, 0.5);
    auto seq = TraitSequence(4);
    CHECK_THROWS(covarion_evolve(seq, cq, 1.0, rng, log));
  }

  SUBCASE("stationary regime draw") {
    CHECK(covarion_variant_fraction(0.5) == doctest::Approx(1.0 / 3.0));
    auto h = draw_hidden_states(30000, 0.5, rng);
    auto variant = std::count(h.begin(), h.end(), Regime::variant);
    CHECK(std::abs(variant / 30000.0 - 1.0 / 3.0) < 0.015);
  }
}

TEST_CASE("stochastic dollo kernel") {
  auto rng = make_stream(34, 0);

  SUBCASE("pure death") {
    auto first = std::vector<double>{};
    for (int i = 0; i < 5000; ++i) {
      auto registry = TraitRegistry(contiguous_meaning_classes(5, 0));
      auto log = EventLog(true);
      auto seq = TraitSequence::from_string("11111");
      sd_evolve(seq, 0.0, 0.5, 200.0, rng, registry, log, BranchContext{200.0, 0});
      CHECK(seq.alive_count() == 0);
      REQUIRE(log.size() == 5);
      CHECK(log.count(EventKind::death) == 5);
      first.push_back(200.0 - log.records().front().age);
    }
    // first death after Exp(5 mu)
    CHECK(std::abs(test::mean(first) - 1.0 / 2.5) < 4 * test::standard_error(first));
  }

  SUBCASE("jump probabilities") {
    auto lambda = 0.7;
    auto mu = 0.3;
    auto births = std::vector<double>(8, 0.0);
    auto jumps = std::vector<double>(8, 0.0);
    for (int i = 0; i < 3000; ++i) {
      auto registry = TraitRegistry(contiguous_meaning_classes(3, 0));
      auto log = EventLog(true);
      auto seq = TraitSequence::from_string("111");
      sd_evolve(seq, lambda, mu, 5.0, rng, registry, log);
      auto k = 3;
      for (const auto& r : log.records()) {
        if (k < 8) {
          jumps[static_cast<std::size_t>(k)] += 1.0;
          births[static_cast<std::size_t>(k)] += r.kind == EventKind::birth;
        }
        k += r.kind == EventKind::birth ? 1 : -1;
      }
      CHECK(k == static_cast<int>(seq.alive_count()));
    }
    for (int k = 1; k < 6; ++k) {
      auto n = jumps[static_cast<std::size_t>(k)];
      REQUIRE(n > 100);
      auto p = lambda / (lambda + k * mu);
      auto se = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(births[static_cast<std::size_t>(k)] / n - p) < 4 * se);
    }
  }

  SUBCASE("master equation") {
    // dP_k/dt = lambda P_{k-1} + mu (k+1) P_{k+1} - (lambda + mu k) P_k, RK4
    auto lambda = 0.3;
    auto mu = 1.0;
    auto t_end = 0.5;
    constexpr int cap = 40;
    auto p = std::vector<double>(cap + 1, 0.0);
    p[2] = 1.0;
    auto deriv = [&](const std::vector<double>& x) {
      auto d = std::vector<double>(cap + 1, 0.0);
      for (int k = 0; k <= cap; ++k) {
        auto out = (lambda + mu * k) * x[static_cast<std::size_t>(k)];
        d[static_cast<std::size_t>(k)] -= out;
        if (k > 0) {
          d[static_cast<std::size_t>(k)] += lambda * x[static_cast<std::size_t>(k - 1)];
        }
        if (k < cap) {
          d[static_cast<std::size_t>(k)] += mu * (k + 1) * x[static_cast<std::size_t>(k + 1)];
        }
      }
      return d;
    };
    auto h = 1e-4;
    for (int step = 0; step < static_cast<int>(t_end / h + 0.5); ++step) {
      auto k1 = deriv(p);
      auto tmp = p;
      for (int k = 0; k <= cap; ++k) tmp[k] = p[k] + h / 2 * k1[k];
      auto k2 = deriv(tmp);
      for (int k = 0; k <= cap; ++k) tmp[k] = p[k] + h / 2 * k2[k];
      auto k3 = deriv(tmp);
      for (int k = 0; k <= cap; ++k) tmp[k] = p[k] + h * k3[k];
      auto k4 = deriv(tmp);
      for (int k = 0; k <= cap; ++k) p[k] += h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    }
    auto n = 40000;
    auto counts = std::vector<double>(cap + 1, 0.0);
    auto log = EventLog(false);
    for (int i = 0; i < n; ++i) {
      auto registry = TraitRegistry(contiguous_meaning_classes(2, 0));
      auto seq = TraitSequence::from_string("11");
      sd_evolve(seq, lambda, mu, t_end, rng, registry, log);
      counts[std::min<std::size_t>(seq.alive_count(), cap)] += 1.0;
    }
    for (int k = 0; k <= 5; ++k) {
      auto se = std::sqrt(p[k] * (1 - p[k]) / n);
      CHECK(std::abs(counts[k] / n - p[k]) < 4 * se + 1e-9);
    }
  }

  SUBCASE("stationary start and guard") {
    auto registry = TraitRegistry{};
    auto seq = sd_stationary_sequence(0.0, 1.0, rng, registry);
    CHECK(seq.length() == 0);
    auto reg = TraitRegistry(contiguous_meaning_classes(1, 0));
    auto lone = TraitSequence::from_string("1");
    CHECK_FALSE(death_check(lone));
    CHECK(death_check(TraitSequence::from_string("11111")));
    auto log = EventLog(true);
    sd_evolve(lone, 0.0, 1.0, 100.0, rng, reg, log, {}, NoEmptyMode::language);
    CHECK(lone.alive_count() == 1);
    CHECK(log.count(EventKind::death_veto) > 0);
    CHECK(log.count(EventKind::death) == 0);
  }

  SUBCASE("births allocate fresh registry columns") {
    auto registry = TraitRegistry(contiguous_meaning_classes(4, 2));
    auto log = EventLog(true);
    auto seq = TraitSequence::from_string("1111");
    sd_evolve(seq, 2.0, 0.1, 5.0, rng, registry, log);
    CHECK(registry.column_count() == 4 + log.count(EventKind::birth));
    for (std::size_t c = 4; c < registry.column_count(); ++c) {
      CHECK(registry.meaning_class(c) >= 0);
      CHECK(registry.meaning_class(c) < 2);
    }
  }
}

TEST_CASE("determinism") {
  auto run = [] {
    auto rng = make_stream(35, 4);
    auto registry = TraitRegistry(contiguous_meaning_classes(10, 0));
    auto log = EventLog(false);
    auto seq = TraitSequence::from_string("1010101010");
    sd_evolve(seq, 0.5, 0.5, 10.0, rng, registry, log);
    gtr_evolve_events(seq, RateMatrix::gtr(0.5, 0.5), 2.0, rng, log);
    return seq.to_string();
  };
  CHECK(run() == run());
}
