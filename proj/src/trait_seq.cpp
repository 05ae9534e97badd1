#include "langsim/trait_seq.hpp"

#include <algorithm>

namespace langsim {

auto to_char(TraitState s) -> char {
  switch (s) {
    case TraitState::absent:
      return '0';
    case TraitState::present:
      return '1';
    case TraitState::missing:
      return '?';
  }
  return '?';
}

auto trait_state_from_char(char c) -> TraitState {
  switch (c) {
    case '0':
      return TraitState::absent;
    case '1':
      return TraitState::present;
    case '?':
      return TraitState::missing;
    default:
      throw std::invalid_argument(std::string{"invalid trait character '"} + c + "'");
  }
}

// ---------------------------------------------------------------------------

void AliveIndexSet::insert(std::size_t column) {
  if (column >= position_.size()) {
    position_.resize(std::max(column + 1, position_.size() * 2), k_absent);
  }
  if (position_[column] != k_absent) {
    return;
  }
  position_[column] = static_cast<std::uint32_t>(members_.size());
  members_.push_back(static_cast<std::uint32_t>(column));
}

void AliveIndexSet::erase(std::size_t column) {
  if (!contains(column)) {
    return;
  }
  auto pos = position_[column];
  auto last = members_.back();
  members_[pos] = last;
  position_[last] = pos;
  members_.pop_back();
  position_[column] = k_absent;
}

auto AliveIndexSet::random(Rng& rng) const -> std::size_t {
  if (members_.empty()) {
    throw NoAliveTraitError{};
  }
  return members_[uniform_index(rng, members_.size())];
}

// ---------------------------------------------------------------------------

TraitSequence::TraitSequence(std::size_t length) : length_(length), states_(length, TraitState::absent) {}

auto TraitSequence::from_string(std::string_view bits) -> TraitSequence {
  auto seq = TraitSequence(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    seq.set(i, trait_state_from_char(bits[i]));
  }
  return seq;
}

auto TraitSequence::get(std::size_t column) const -> TraitState {
  if (column >= length_) {
    throw std::out_of_range("column " + std::to_string(column) + " out of range");
  }
  return column < states_.size() ? states_[column] : TraitState::absent;
}

void TraitSequence::set(std::size_t column, TraitState state) {
  if (column >= length_) {
    throw std::out_of_range("column " + std::to_string(column) + " out of range");
  }
  if (column >= states_.size()) {
    if (state == TraitState::absent) {
      return;
    }
    states_.resize(std::max(column + 1, std::min(length_, states_.size() * 2)), TraitState::absent);
  }
  auto old = states_[column];
  if (old == state) {
    return;
  }
  if (old == TraitState::present) {
    alive_.erase(column);
  } else if (old == TraitState::missing) {
    --missing_;
  }
  if (state == TraitState::present) {
    alive_.insert(column);
  } else if (state == TraitState::missing) {
    ++missing_;
  }
  states_[column] = state;
}

void TraitSequence::resize(std::size_t length) {
  if (length < length_) {
    throw std::invalid_argument("sequences only grow");
  }
  length_ = length;
  if (!hidden_.empty()) {
    hidden_.resize(length, Regime::variant);
  }
}

auto TraitSequence::random_alive_index(Rng& rng) const -> std::size_t {
  return alive_.random(rng);
}

void TraitSequence::set_hidden_states(std::vector<Regime> hidden) {
  if (hidden.size() != length_) {
    throw std::invalid_argument("hidden-state vector length differs from sequence length");
  }
  hidden_ = std::move(hidden);
}

auto TraitSequence::to_string() const -> std::string {
  auto out = std::string(length_, '0');
  for (std::size_t i = 0; i < states_.size(); ++i) {
    out[i] = to_char(states_[i]);
  }
  return out;
}

auto TraitSequence::recount_alive() const -> std::size_t {
  return static_cast<std::size_t>(std::count(states_.begin(), states_.end(), TraitState::present));
}

auto TraitSequence::consistent() const -> bool {
  if (recount_alive() != alive_.size()) {
    return false;
  }
  if (static_cast<std::size_t>(std::count(states_.begin(), states_.end(), TraitState::missing)) != missing_) {
    return false;
  }
  for (auto column : alive_.members()) {
    if (column >= states_.size() || states_[column] != TraitState::present) {
      return false;
    }
  }
  return hidden_.empty() || hidden_.size() == length_;
}

auto operator==(const TraitSequence& a, const TraitSequence& b) -> bool {
  if (a.length_ != b.length_ || a.alive_count() != b.alive_count() || a.hidden_ != b.hidden_) {
    return false;
  }
  for (std::size_t i = 0; i < a.length_; ++i) {
    if (a.get(i) != b.get(i)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

TraitRegistry::TraitRegistry(std::vector<int> meaning_classes) : classes_(std::move(meaning_classes)) {
  for (auto c : classes_) {
    if (c < 0) {
      throw std::invalid_argument("meaning class ids must be non-negative");
    }
    class_count_ = std::max(class_count_, c + 1);
  }
}

auto TraitRegistry::allocate(int meaning_class) -> std::size_t {
  if (meaning_class < 0) {
    throw std::invalid_argument("meaning class ids must be non-negative");
  }
  classes_.push_back(meaning_class);
  class_count_ = std::max(class_count_, meaning_class + 1);
  return classes_.size() - 1;
}

auto contiguous_meaning_classes(std::size_t columns, int class_count) -> std::vector<int> {
  if (class_count < 0) {
    throw std::invalid_argument("meaning class count must be non-negative");
  }
  auto out = std::vector<int>(columns);
  if (class_count == 0 || static_cast<std::size_t>(class_count) >= columns) {
    for (std::size_t i = 0; i < columns; ++i) {
      out[i] = static_cast<int>(i);
    }
    return out;
  }
  // first (columns % k) blocks take one extra column
  auto k = static_cast<std::size_t>(class_count);
  auto base = columns / k;
  auto extra = columns % k;
  std::size_t col = 0;
  for (std::size_t c = 0; c < k; ++c) {
    auto width = base + (c < extra ? 1 : 0);
    for (std::size_t j = 0; j < width; ++j) {
      out[col++] = static_cast<int>(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

auto Alignment::class_count() const -> int {
  auto m = -1;
  for (auto c : meaning_class) {
    m = std::max(m, c);
  }
  return m + 1;
}

auto Alignment::columns_of_class(int cls) const -> std::vector<std::size_t> {
  auto out = std::vector<std::size_t>{};
  for (std::size_t i = 0; i < meaning_class.size(); ++i) {
    if (meaning_class[i] == cls) {
      out.push_back(i);
    }
  }
  return out;
}

auto Alignment::class_first_positions() const -> std::vector<std::size_t> {
  auto n = class_count();
  auto first = std::vector<std::size_t>(static_cast<std::size_t>(std::max(n, 0)), meaning_class.size());
  for (std::size_t i = 0; i < meaning_class.size(); ++i) {
    auto& f = first[static_cast<std::size_t>(meaning_class[i])];
    f = std::min(f, i);
  }
  std::erase(first, meaning_class.size());
  return first;
}

void Alignment::validate() const {
  if (taxa.size() != rows.size()) {
    throw std::invalid_argument("alignment has " + std::to_string(taxa.size()) + " taxa but " +
                                std::to_string(rows.size()) + " rows");
  }
  for (const auto& row : rows) {
    if (row.length() != column_count()) {
      throw std::invalid_argument("alignment rows differ in length from the column metadata");
    }
  }
  auto sorted = taxa;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate taxon in alignment");
  }
  for (auto c : meaning_class) {
    if (c < 0) {
      throw std::invalid_argument("negative meaning class id");
    }
  }
}

auto append_trait(Alignment& alignment, TraitRegistry& registry, std::size_t owner, int meaning_class)
    -> std::size_t {
  if (owner >= alignment.rows.size()) {
    throw std::out_of_range("owner language out of range");
  }
  auto column = registry.allocate(meaning_class);
  alignment.meaning_class.push_back(meaning_class);
  for (auto& row : alignment.rows) {
    row.resize(column + 1);
  }
  alignment.rows[owner].set(column, TraitState::present);
  return column;
}

// ---------------------------------------------------------------------------

auto to_string(EventKind kind) -> const char* {
  switch (kind) {
    case EventKind::birth:
      return "birth";
    case EventKind::death:
      return "death";
    case EventKind::mutation01:
      return "mutation01";
    case EventKind::mutation10:
      return "mutation10";
    case EventKind::borrow:
      return "borrow";
    case EventKind::borrow_veto:
      return "borrow_veto";
    case EventKind::death_veto:
      return "death_veto";
    case EventKind::hidden_switch:
      return "hidden_switch";
  }
  return "unknown";
}

auto EventLog::count(EventKind kind) const -> std::size_t {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const EventRecord& r) { return r.kind == kind; }));
}

}  // namespace langsim
