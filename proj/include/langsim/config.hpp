#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "langsim/substitution.hpp"

namespace langsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TreeSource {
  enum class Kind { newick, file, yule };
  Kind kind = Kind::newick;
  std::string newick;
  std::filesystem::path path;
  int n_leaves = 0;
  double birth_rate = 0.0;
};

struct RootSource {
  enum class Kind { bits, all_present, sd_stationary };
  Kind kind = Kind::bits;
  std::string bits;
  std::size_t length = 0;
  std::string taxon = "root";
};

struct MissingConfig {
  enum class Kind { languages, meaning_classes };
  Kind kind = Kind::languages;
  double rate = 0.0;  // 0 disables
};

struct RunConfig {
  TreeSource tree;
  RootSource root;
  RateConfig model;
  MissingConfig missing;
  int meaning_classes = 0;  // 0: one class per root column
  std::size_t replicates = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

// Appendix-style BEAST XML. Relative tree file paths resolve against
// `base_dir`.
auto parse_config(const std::string& xml_text, const std::filesystem::path& base_dir = {}) -> RunConfig;
auto read_config(const std::filesystem::path& path) -> RunConfig;

// Echo of a config that parse_config reads back field for field.
auto write_config(const RunConfig& config) -> std::string;

}  // namespace langsim
