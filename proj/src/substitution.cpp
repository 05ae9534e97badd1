#include "langsim/substitution.hpp"

#include <algorithm>
#include <cmath>

namespace langsim {

auto to_string(ModelKind kind) -> const char* {
  switch (kind) {
    case ModelKind::gtr:
      return "GTR";
    case ModelKind::covarion:
      return "Covarion";
    case ModelKind::stochastic_dollo:
      return "SD";
  }
  return "unknown";
}

void RateConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || std::isnan(v) || (std::isinf(v) && std::string_view{name} != "local_z")) {
      throw ModelError(std::string{name} + " must be a finite non-negative rate");
    }
  };
  check(borrow_rate, "borrow_rate");
  check(local_z, "local_z");
  switch (kind) {
    case ModelKind::gtr:
      check(q01, "q01");
      check(q10, "q10");
      break;
    case ModelKind::covarion:
      check(q01, "q01");
      check(q10, "q10");
      check(delta, "delta");
      check(kappa, "kappa");
      break;
    case ModelKind::stochastic_dollo:
      check(lambda, "lambda");
      check(mu, "mu");
      break;
  }
}

void require_no_missing(const TraitSequence& seq) {
  if (seq.missing_count() != 0) {
    throw ModelError("simulation input contains missing ('?') entries");
  }
}

// ---------------------------------------------------------------------------

RateMatrix::RateMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() < 2) {
    throw ModelError("rate matrix must be square with dimension >= 2");
  }
  for (Eigen::Index i = 0; i < q_.rows(); ++i) {
    auto scale = 0.0;
    for (Eigen::Index j = 0; j < q_.cols(); ++j) {
      if (!std::isfinite(q_(i, j))) {
        throw ModelError("rate matrix entries must be finite");
      }
      if (i != j && q_(i, j) < 0.0) {
        throw ModelError("negative off-diagonal rate");
      }
      scale = std::max(scale, std::abs(q_(i, j)));
    }
    if (std::abs(q_.row(i).sum()) > 1e-12 * std::max(1.0, scale)) {
      throw ModelError("rate matrix rows must sum to zero");
    }
  }
}

auto RateMatrix::gtr(double q01, double q10) -> RateMatrix {
  auto q = Eigen::MatrixXd(2, 2);
  q << -q01, q01, q10, -q10;
  return RateMatrix(q);
}

auto transition_matrix_series(const RateMatrix& q, double t) -> Eigen::MatrixXd {
  if (!(t >= 0.0)) {
    throw ModelError("transition time must be non-negative");
  }
  auto a = Eigen::MatrixXd(q.matrix() * t);
  auto n = a.rows();
  auto norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  auto squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  a /= std::ldexp(1.0, squarings);
  auto result = Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n));
  auto term = Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n));
  for (int k = 1; k < 60; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * result.cwiseAbs().maxCoeff()) {
      break;
    }
  }
  for (int s = 0; s < squarings; ++s) {
    result = result * result;
  }
  // clip round-off negatives so rows stay valid probability vectors
  result = result.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    result.row(i) /= result.row(i).sum();
  }
  return result;
}

auto transition_matrix(const RateMatrix& q, double t) -> Eigen::MatrixXd {
  if (!(t >= 0.0)) {
    throw ModelError("transition time must be non-negative");
  }
  if (q.dim() != 2) {
    return transition_matrix_series(q, t);
  }
  auto a = q(0, 1);
  auto b = q(1, 0);
  auto s = a + b;
  auto p = Eigen::MatrixXd(2, 2);
  if (s == 0.0) {
    p.setIdentity();
    return p;
  }
  // exp(-s t) decays towards the stationary (b, a) / s
  auto decay = -std::expm1(-s * t);
  p(0, 1) = a / s * decay;
  p(0, 0) = 1.0 - p(0, 1);
  p(1, 0) = b / s * decay;
  p(1, 1) = 1.0 - p(1, 0);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

auto draw_from_row(const Eigen::MatrixXd& p, int row, Rng& rng) -> int {
  auto u = uniform01(rng);
  auto acc = 0.0;
  auto last = static_cast<int>(p.cols()) - 1;
  for (int j = 0; j < last; ++j) {
    acc += p(row, j);
    if (u < acc) {
      return j;
    }
  }
  return last;
}

// Next state after leaving `state` on generator `q`.
auto jump(const RateMatrix& q, int state, Rng& rng) -> int {
  auto exit = q.exit_rate(state);
  auto u = uniform01(rng) * exit;
  auto acc = 0.0;
  auto chosen = -1;
  for (int j = 0; j < q.dim(); ++j) {
    if (j == state || q(state, j) <= 0.0) {
      continue;
    }
    chosen = j;
    acc += q(state, j);
    if (u < acc) {
      return j;
    }
  }
  return chosen;
}

auto as_index(TraitState s) -> int {
  return s == TraitState::present ? 1 : 0;
}

auto as_state(int i) -> TraitState {
  return i == 1 ? TraitState::present : TraitState::absent;
}

void append_sorted(EventLog& log, std::vector<EventRecord>& branch) {
  std::stable_sort(branch.begin(), branch.end(),
                   [](const EventRecord& x, const EventRecord& y) { return x.age > y.age; });
  for (const auto& r : branch) {
    log.record(r);
  }
}

}  // namespace

void gtr_evolve_matrix(TraitSequence& seq, const RateMatrix& q, double duration, Rng& rng) {
  require_no_missing(seq);
  if (q.dim() != 2) {
    throw ModelError("GTR kernel needs a 2-state generator");
  }
  if (!(duration >= 0.0)) {
    throw ModelError("branch duration must be non-negative");
  }
  if (duration == 0.0) {
    return;
  }
  auto p = transition_matrix(q, duration);
  for (std::size_t i = 0; i < seq.length(); ++i) {
    seq.set(i, as_state(draw_from_row(p, as_index(seq.get(i)), rng)));
  }
}

auto death_check(const TraitSequence& seq) -> bool {
  return seq.alive_count() > 1;
}

auto death_allowed(const TraitSequence& seq, std::size_t column, NoEmptyMode mode, const TraitRegistry* registry)
    -> bool {
  switch (mode) {
    case NoEmptyMode::off:
      return true;
    case NoEmptyMode::language:
      return death_check(seq);
    case NoEmptyMode::meaning_class: {
      if (registry == nullptr) {
        throw ModelError("meaning-class guard needs a trait registry");
      }
      auto cls = registry->meaning_class(column);
      for (auto other : seq.alive_indices()) {
        if (other != column && registry->meaning_class(other) == cls) {
          return true;
        }
      }
      return false;
    }
  }
  return true;
}

void gtr_evolve_events(TraitSequence& seq, const RateMatrix& q, double duration, Rng& rng, EventLog& log,
                       BranchContext ctx, NoEmptyMode no_empty, const TraitRegistry* registry) {
  require_no_missing(seq);
  if (q.dim() != 2) {
    throw ModelError("GTR kernel needs a 2-state generator");
  }
  if (!(duration >= 0.0)) {
    throw ModelError("branch duration must be non-negative");
  }
  auto branch = std::vector<EventRecord>{};
  auto record = [&](double t, std::size_t site, int from) {
    if (log.enabled()) {
      branch.push_back({ctx.start_age - t, from == 0 ? EventKind::mutation01 : EventKind::mutation10, ctx.language,
                        static_cast<std::int64_t>(site)});
    }
  };

  if (no_empty == NoEmptyMode::off) {
    for (std::size_t site = 0; site < seq.length(); ++site) {
      auto state = as_index(seq.get(site));
      auto rate = q.exit_rate(state);
      if (rate <= 0.0) {
        continue;
      }
      auto t = exponential(rng, rate);
      while (t < duration) {
        auto next = jump(q, state, rng);
        record(t, site, state);
        state = next;
        rate = q.exit_rate(state);
        if (rate <= 0.0) {
          break;
        }
        t += exponential(rng, rate);
      }
      seq.set(site, as_state(state));
    }
    append_sorted(log, branch);
    return;
  }

  // joint Gillespie over all sites
  auto q01 = q(0, 1);
  auto q10 = q(1, 0);
  auto t = 0.0;
  while (true) {
    auto k = static_cast<double>(seq.alive_count());
    auto absent = static_cast<double>(seq.length()) - k;
    auto total = q01 * absent + q10 * k;
    if (total <= 0.0) {
      break;
    }
    t += exponential(rng, total);
    if (t >= duration) {
      break;
    }
    if (uniform01(rng) * total < q01 * absent) {
      // uniformly random absent site
      std::size_t site;
      do {
        site = uniform_index(rng, seq.length());
      } while (seq.get(site) == TraitState::present);
      seq.set(site, TraitState::present);
      record(t, site, 0);
    } else {
      auto site = seq.random_alive_index(rng);
      if (!death_allowed(seq, site, no_empty, registry)) {
        if (log.enabled()) {
          branch.push_back({ctx.start_age - t, EventKind::death_veto, ctx.language, static_cast<std::int64_t>(site)});
        }
        continue;
      }
      seq.set(site, TraitState::absent);
      record(t, site, 1);
    }
  }
  append_sorted(log, branch);
}

// ---------------------------------------------------------------------------

auto covarion_rate_matrix(double q01, double q10, double delta, double kappa) -> RateMatrix {
  for (auto v : {q01, q10, delta, kappa}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ModelError("covarion parameters must be finite and non-negative");
    }
  }
  auto q = Eigen::MatrixXd(4, 4);
  // clang-format off
  q << -(q01 + delta), q01,            delta,          0.0,
       q10,            -(q10 + delta), 0.0,            delta,
       kappa * delta,  0.0,            -kappa * delta, 0.0,
       0.0,            kappa * delta,  0.0,            -kappa * delta;
  // clang-format on
  return RateMatrix(q);
}

auto covarion_variant_fraction(double kappa) -> double {
  return kappa / (1.0 + kappa);
}

auto draw_hidden_states(std::size_t length, double kappa, Rng& rng) -> std::vector<Regime> {
  auto p_variant = covarion_variant_fraction(kappa);
  auto out = std::vector<Regime>(length);
  for (auto& r : out) {
    r = uniform01(rng) < p_variant ? Regime::variant : Regime::invariant;
  }
  return out;
}

void covarion_evolve(TraitSequence& seq, const RateMatrix& covarion_q, double duration, Rng& rng, EventLog& log,
                     KernelMethod method, BranchContext ctx) {
  require_no_missing(seq);
  if (!seq.has_hidden()) {
    throw ModelError("covarion kernel needs hidden regime states");
  }
  if (covarion_q.dim() != 4) {
    throw ModelError("covarion kernel needs a 4-state generator");
  }
  if (!(duration >= 0.0)) {
    throw ModelError("branch duration must be non-negative");
  }
  auto encode = [&](std::size_t site) {
    return as_index(seq.get(site)) + (seq.hidden(site) == Regime::invariant ? 2 : 0);
  };
  auto store = [&](std::size_t site, int s) {
    seq.set(site, as_state(s % 2));
    seq.set_hidden(site, s >= 2 ? Regime::invariant : Regime::variant);
  };
  if (duration == 0.0) {
    return;
  }
  if (method == KernelMethod::matrix) {
    auto p = transition_matrix(covarion_q, duration);
    for (std::size_t site = 0; site < seq.length(); ++site) {
      store(site, draw_from_row(p, encode(site), rng));
    }
    return;
  }
  auto branch = std::vector<EventRecord>{};
  for (std::size_t site = 0; site < seq.length(); ++site) {
    auto state = encode(site);
    auto rate = covarion_q.exit_rate(state);
    auto t = rate > 0.0 ? exponential(rng, rate) : duration;
    while (t < duration) {
      auto next = jump(covarion_q, state, rng);
      if (log.enabled()) {
        auto kind = (next / 2 != state / 2)   ? EventKind::hidden_switch
                    : (state % 2 == 0)        ? EventKind::mutation01
                                              : EventKind::mutation10;
        branch.push_back({ctx.start_age - t, kind, ctx.language, static_cast<std::int64_t>(site)});
      }
      state = next;
      rate = covarion_q.exit_rate(state);
      if (rate <= 0.0) {
        break;
      }
      t += exponential(rng, rate);
    }
    store(site, state);
  }
  append_sorted(log, branch);
}

// ---------------------------------------------------------------------------

auto draw_birth_class(const TraitRegistry& registry, Rng& rng) -> int {
  auto classes = registry.class_count();
  return classes == 0 ? 0 : static_cast<int>(uniform_index(rng, static_cast<std::size_t>(classes)));
}

void sd_evolve(TraitSequence& seq, double lambda, double mu, double duration, Rng& rng, TraitRegistry& registry,
               EventLog& log, BranchContext ctx, NoEmptyMode no_empty) {
  require_no_missing(seq);
  if (!(lambda >= 0.0) || !(mu >= 0.0)) {
    throw ModelError("birth and death rates must be non-negative");
  }
  if (!(duration >= 0.0)) {
    throw ModelError("branch duration must be non-negative");
  }
  seq.resize(std::max(seq.length(), registry.column_count()));
  auto t = 0.0;
  while (true) {
    auto k = static_cast<double>(seq.alive_count());
    auto total = lambda + k * mu;
    if (total <= 0.0) {
      break;
    }
    t += exponential(rng, total);
    if (t >= duration) {
      break;
    }
    auto age = ctx.start_age - t;
    if (uniform01(rng) * total < lambda) {
      auto column = registry.allocate(draw_birth_class(registry, rng));
      seq.resize(registry.column_count());
      seq.set(column, TraitState::present);
      log.record({age, EventKind::birth, ctx.language, static_cast<std::int64_t>(column)});
    } else {
      auto column = seq.random_alive_index(rng);
      if (!death_allowed(seq, column, no_empty, &registry)) {
        log.record({age, EventKind::death_veto, ctx.language, static_cast<std::int64_t>(column)});
        continue;
      }
      seq.set(column, TraitState::absent);
      log.record({age, EventKind::death, ctx.language, static_cast<std::int64_t>(column)});
    }
  }
}

auto sd_stationary_sequence(double lambda, double mu, Rng& rng, TraitRegistry& registry) -> TraitSequence {
  if (!(mu > 0.0) || !(lambda >= 0.0)) {
    throw ModelError("stationary SD root needs mu > 0 and lambda >= 0");
  }
  auto k = lambda > 0.0 ? std::poisson_distribution<long>{lambda / mu}(rng) : 0L;
  auto seq = TraitSequence(registry.column_count());
  for (long i = 0; i < k; ++i) {
    auto column = registry.allocate(static_cast<int>(registry.column_count()));
    seq.resize(registry.column_count());
    seq.set(column, TraitState::present);
  }
  return seq;
}

}  // namespace langsim
