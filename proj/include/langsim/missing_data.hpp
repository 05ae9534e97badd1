#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "langsim/random.hpp"
#include "langsim/trait_seq.hpp"

namespace langsim {

class MissingDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Per language, u ~ Binomial(columns, p) distinct columns become '?'.
// Returns u for each row.
auto apply_missing_languages(Alignment& alignment, double p, Rng& rng) -> std::vector<int>;

// Per meaning class, u ~ Binomial(languages, p) events; each event marks a
// uniformly chosen column of the class in a uniformly chosen language.
// Returns u for each class id.
auto apply_missing_meaning_classes(Alignment& alignment, double p, Rng& rng) -> std::vector<int>;
// Per-class probabilities, indexed by class id; must cover every class.
auto apply_missing_meaning_classes(Alignment& alignment, std::span<const double> p, Rng& rng) -> std::vector<int>;

}  // namespace langsim
