#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "langsim/trait_seq.hpp"

namespace langsim {

class AlignmentFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Current local time as "YYYY-MM-DD HH:MM:SS.mmm".
auto timestamp_now() -> std::string;

// BEAST-style alignment document. Meaning classes are written as the first
// column of each class in a trailing comment, so classes must occupy
// contiguous column blocks (see group_columns_by_class). The timestamp
// comment is omitted when `timestamp` is empty.
void write_alignment(std::ostream& out, const Alignment& alignment, const std::string& data_id,
                     const std::string& timestamp);
auto format_alignment(const Alignment& alignment, const std::string& data_id, const std::string& timestamp)
    -> std::string;

struct AlignmentDocument {
  std::string data_id;
  Alignment alignment;
  std::optional<std::string> timestamp;
};

// Inverse of write_alignment; meaning classes are rebuilt as contiguous
// blocks from the first-position comment (one class per column if absent).
auto read_alignment(const std::string& xml_text) -> AlignmentDocument;

// Stable column permutation putting each meaning class in one contiguous
// block, classes in id order. Class ids are preserved.
auto group_columns_by_class(const Alignment& alignment) -> Alignment;

}  // namespace langsim
