#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "langsim/random.hpp"
#include "langsim/tree.hpp"

namespace langsim {

enum class TraitState : std::uint8_t { absent = 0, present = 1, missing = 2 };

auto to_char(TraitState s) -> char;
auto trait_state_from_char(char c) -> TraitState;

// Covarion regime of a site.
enum class Regime : std::uint8_t { variant = 0, invariant = 1 };

class NoAliveTraitError : public std::runtime_error {
 public:
  NoAliveTraitError() : std::runtime_error("sequence has no present trait") {}
};

// Set of column indices with O(1) insert, erase, and uniform choice.
// Dense member array plus reverse position map; erase swaps with the last.
class AliveIndexSet {
 public:
  auto size() const -> std::size_t { return members_.size(); }
  auto empty() const -> bool { return members_.empty(); }
  auto contains(std::size_t column) const -> bool {
    return column < position_.size() && position_[column] != k_absent;
  }
  void insert(std::size_t column);
  void erase(std::size_t column);
  auto random(Rng& rng) const -> std::size_t;
  auto members() const -> const std::vector<std::uint32_t>& { return members_; }

 private:
  static constexpr std::uint32_t k_absent = 0xffffffffu;
  std::vector<std::uint32_t> members_;
  std::vector<std::uint32_t> position_;
};

// One language. Columns beyond the stored length read as absent, so a column
// appended to a whole alignment costs nothing for languages that lack it.
class TraitSequence {
 public:
  TraitSequence() = default;
  explicit TraitSequence(std::size_t length);
  static auto from_string(std::string_view bits) -> TraitSequence;

  auto length() const -> std::size_t { return length_; }
  auto alive_count() const -> std::size_t { return alive_.size(); }
  auto missing_count() const -> std::size_t { return missing_; }
  auto get(std::size_t column) const -> TraitState;

  // Throws std::out_of_range for column >= length().
  void set(std::size_t column, TraitState state);

  // Extends the logical length; new columns are absent.
  void resize(std::size_t length);

  // Uniformly random present column. Throws NoAliveTraitError when empty.
  auto random_alive_index(Rng& rng) const -> std::size_t;
  auto alive_indices() const -> const std::vector<std::uint32_t>& { return alive_.members(); }

  auto has_hidden() const -> bool { return !hidden_.empty(); }
  auto hidden(std::size_t column) const -> Regime { return hidden_.at(column); }
  void set_hidden(std::size_t column, Regime r) { hidden_.at(column) = r; }
  void set_hidden_states(std::vector<Regime> hidden);
  void clear_hidden() { hidden_.clear(); }

  auto to_string() const -> std::string;
  auto recount_alive() const -> std::size_t;
  // Cross-checks cached alive count, index set and states.
  auto consistent() const -> bool;

  friend auto operator==(const TraitSequence& a, const TraitSequence& b) -> bool;

 private:
  std::size_t length_ = 0;
  std::vector<TraitState> states_;  // may be shorter than length_
  AliveIndexSet alive_;
  std::size_t missing_ = 0;
  std::vector<Regime> hidden_;
};

// Global trait bookkeeping. Trait ids are column indices; a column is never
// reused, so ids stay unique across the whole tree.
class TraitRegistry {
 public:
  TraitRegistry() = default;
  // One column per entry of `meaning_classes`.
  explicit TraitRegistry(std::vector<int> meaning_classes);

  auto column_count() const -> std::size_t { return classes_.size(); }
  auto meaning_class(std::size_t column) const -> int { return classes_.at(column); }
  auto meaning_classes() const -> const std::vector<int>& { return classes_; }
  auto class_count() const -> int { return class_count_; }
  auto allocate(int meaning_class) -> std::size_t;

 private:
  std::vector<int> classes_;
  int class_count_ = 0;
};

// Contiguous equal blocks; count 0 gives one class per column.
auto contiguous_meaning_classes(std::size_t columns, int class_count) -> std::vector<int>;

// Languages x columns with per-column meaning class ids.
struct Alignment {
  std::vector<std::string> taxa;
  std::vector<TraitSequence> rows;
  std::vector<int> meaning_class;  // per column

  auto column_count() const -> std::size_t { return meaning_class.size(); }
  auto class_count() const -> int;
  auto columns_of_class(int cls) const -> std::vector<std::size_t>;
  // First column of each class, in class-id order.
  auto class_first_positions() const -> std::vector<std::size_t>;
  void validate() const;
};

// Adds a fresh trait column, present only in `owner`.
auto append_trait(Alignment& alignment, TraitRegistry& registry, std::size_t owner, int meaning_class)
    -> std::size_t;

enum class EventKind : std::uint8_t {
  birth,
  death,
  mutation01,
  mutation10,
  borrow,
  borrow_veto,   // local distance check failed
  death_veto,    // no-empty-trait guard refused a death
  hidden_switch,
};

auto to_string(EventKind kind) -> const char*;

struct EventRecord {
  double age;
  EventKind kind;
  NodeId language;
  std::int64_t column;
  NodeId donor = k_no_node;
};

// Append-only. Recording is skipped entirely when disabled.
class EventLog {
 public:
  explicit EventLog(bool enabled = true) : enabled_(enabled) {}
  auto enabled() const -> bool { return enabled_; }
  void record(const EventRecord& r) {
    if (enabled_) {
      records_.push_back(r);
    }
  }
  auto records() const -> const std::vector<EventRecord>& { return records_; }
  auto size() const -> std::size_t { return records_.size(); }
  auto count(EventKind kind) const -> std::size_t;
  void clear() { records_.clear(); }

 private:
  bool enabled_;
  std::vector<EventRecord> records_;
};

}  // namespace langsim
