#include "langsim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "langsim/tree.hpp"

namespace langsim {

namespace pt = boost::property_tree;

namespace {

auto trim(std::string s) -> std::string {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    return {};
  }
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

auto attr(const pt::ptree& node, const std::string& name) -> std::optional<std::string> {
  if (auto v = node.get_optional<std::string>("<xmlattr>." + name)) {
    return trim(*v);
  }
  return std::nullopt;
}

auto require_attr(const pt::ptree& node, const std::string& element, const std::string& name) -> std::string {
  auto v = attr(node, name);
  if (!v) {
    throw ConfigError("<" + element + "> is missing attribute '" + name + "'");
  }
  return *v;
}

auto to_double(const std::string& text, const std::string& what) -> double {
  auto value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("attribute '" + what + "' is not a number: '" + text + "'");
  }
  return value;
}

template <typename Int>
auto to_int(const std::string& text, const std::string& what) -> Int {
  auto value = Int{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("attribute '" + what + "' is not a non-negative integer: '" + text + "'");
  }
  return value;
}

auto to_bool(const std::string& text, const std::string& what) -> bool {
  if (text == "true" || text == "1") {
    return true;
  }
  if (text == "false" || text == "0") {
    return false;
  }
  throw ConfigError("attribute '" + what + "' must be true or false");
}

auto attr_double(const pt::ptree& node, const std::string& element, const std::string& name) -> double {
  return to_double(require_attr(node, element, name), name);
}

// The newick attribute in the appendix wraps lines; whitespace is not
// significant outside quoted labels.
auto strip_newick_whitespace(const std::string& text) -> std::string {
  auto out = std::string{};
  auto quoted = false;
  for (auto c : text) {
    if (c == '\'') {
      quoted = !quoted;
    }
    if (!quoted && (c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

auto find_element(const pt::ptree& parent, const std::string& name) -> const pt::ptree* {
  auto it = parent.find(name);
  return it == parent.not_found() ? nullptr : &it->second;
}

void parse_tree(const pt::ptree& node, const std::filesystem::path& base_dir, TreeSource& tree) {
  auto spec = attr(node, "spec").value_or("");
  if (spec == "YuleTree" || spec == "Yule") {
    tree.kind = TreeSource::Kind::yule;
    tree.n_leaves = to_int<int>(require_attr(node, "tree", "leaves"), "leaves");
    tree.birth_rate = attr_double(node, "tree", "birthrate");
  } else if (auto file = attr(node, "file")) {
    tree.kind = TreeSource::Kind::file;
    tree.path = std::filesystem::path(*file);
    if (tree.path.is_relative() && !base_dir.empty()) {
      tree.path = base_dir / tree.path;
    }
  } else if (auto newick = attr(node, "newick")) {
    tree.kind = TreeSource::Kind::newick;
    tree.newick = strip_newick_whitespace(*newick);
  } else {
    throw ConfigError("<tree> needs a newick or file attribute, or spec='YuleTree'");
  }
}

void parse_root(const pt::ptree& node, RootSource& root) {
  auto spec = attr(node, "spec").value_or("Sequence");
  root.taxon = attr(node, "taxon").value_or("root");
  if (spec == "StochasticDolloStationary") {
    root.kind = RootSource::Kind::sd_stationary;
  } else if (auto value = attr(node, "value")) {
    root.kind = RootSource::Kind::bits;
    root.bits = *value;
  } else if (auto length = attr(node, "length")) {
    root.kind = RootSource::Kind::all_present;
    root.length = to_int<std::size_t>(*length, "length");
  } else {
    throw ConfigError("<root> needs a value or length attribute");
  }
}

void parse_sub_model(const pt::ptree& node, RateConfig& model) {
  auto spec = require_attr(node, "subModel", "spec");
  if (spec == "ExplicitBinaryGTR") {
    model.kind = ModelKind::gtr;
    model.q01 = model.q10 = attr_double(node, "subModel", "rate");
  } else if (spec == "ExplicitBinaryStochasticDollo") {
    model.kind = ModelKind::stochastic_dollo;
    model.lambda = attr_double(node, "subModel", "birth");
    model.mu = attr_double(node, "subModel", "death");
  } else if (spec == "ExplicitBinaryCovarion") {
    model.kind = ModelKind::covarion;
    model.q01 = model.q10 = attr_double(node, "subModel", "rate");
    model.delta = attr_double(node, "subModel", "delta");
    model.kappa = attr_double(node, "subModel", "kappa");
  } else {
    throw ConfigError("unknown subModel spec '" + spec + "'");
  }
  model.borrow_rate = to_double(attr(node, "borrowrate").value_or("0.0"), "borrowrate");
  auto z = to_double(attr(node, "borrowzrate").value_or("0.0"), "borrowzrate");
  model.local_z = z == 0.0 ? k_infinite_distance : z;
  auto no_empty = attr(node, "noEmptyTrait").value_or("false");
  if (no_empty == "meaningclass") {
    model.no_empty = NoEmptyMode::meaning_class;
  } else {
    model.no_empty = to_bool(no_empty, "noEmptyTrait") ? NoEmptyMode::language : NoEmptyMode::off;
  }
}

void parse_missing(const pt::ptree& node, MissingConfig& missing) {
  auto spec = require_attr(node, "missingModel", "spec");
  if (spec == "MissingLanguageModel") {
    missing.kind = MissingConfig::Kind::languages;
  } else if (spec == "MissingMeaningClassModel") {
    missing.kind = MissingConfig::Kind::meaning_classes;
  } else {
    throw ConfigError("unknown missingModel spec '" + spec + "'");
  }
  missing.rate = attr_double(node, "missingModel", "rate");
}

auto format_double(double v) -> std::string {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  auto s = std::string(buf, ptr);
  // keep a decimal point so the echo reads like the appendix ("0.5", "0.0")
  if (s.find_first_of(".e") == std::string::npos && s != "inf") {
    s += ".0";
  }
  return s;
}

}  // namespace

void RunConfig::validate() const {
  if (root.kind == RootSource::Kind::bits) {
    if (root.bits.empty()) {
      throw ConfigError("root sequence is empty");
    }
    if (root.bits.find_first_not_of("01") != std::string::npos) {
      throw ConfigError("root sequence may contain only 0 and 1");
    }
  }
  if (root.kind == RootSource::Kind::all_present && root.length == 0) {
    throw ConfigError("root length must be positive");
  }
  if (root.kind == RootSource::Kind::sd_stationary && model.kind != ModelKind::stochastic_dollo) {
    throw ConfigError("a stationary root draw needs the stochastic-Dollo model");
  }
  if (!(missing.rate >= 0.0 && missing.rate <= 1.0)) {
    throw ConfigError("missingModel rate must lie in [0, 1]");
  }
  if (tree.kind == TreeSource::Kind::yule && (tree.n_leaves < 2 || !(tree.birth_rate > 0.0))) {
    throw ConfigError("Yule tree needs at least 2 leaves and a positive birth rate");
  }
  if (meaning_classes < 0) {
    throw ConfigError("meaning class count must be non-negative");
  }
  if (replicates == 0) {
    throw ConfigError("replicate count must be positive");
  }
  if (model.kind == ModelKind::covarion && model.borrow_rate > 0.0) {
    throw ConfigError("borrowing is not available for the covarion model");
  }
  if (model.kind == ModelKind::covarion && model.no_empty != NoEmptyMode::off) {
    throw ConfigError("noEmptyTrait is not available for the covarion model");
  }
  try {
    model.validate();
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
}

auto parse_config(const std::string& xml_text, const std::filesystem::path& base_dir) -> RunConfig {
  auto doc = pt::ptree{};
  try {
    auto in = std::istringstream(xml_text);
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ConfigError(std::string("malformed config XML: ") + e.what());
  }
  const auto* beast = find_element(doc, "beast");
  if (!beast) {
    throw ConfigError("config has no <beast> element");
  }
  const auto* tree = find_element(*beast, "tree");
  const auto* run = find_element(*beast, "run");
  if (!tree) {
    throw ConfigError("config has no <tree> element");
  }
  if (!run) {
    throw ConfigError("config has no <run> element");
  }
  auto config = RunConfig{};
  parse_tree(*tree, base_dir, config.tree);
  const auto* root = find_element(*run, "root");
  const auto* sub = find_element(*run, "subModel");
  const auto* missing = find_element(*run, "missingModel");
  if (!root) {
    throw ConfigError("<run> has no <root> element");
  }
  if (!sub) {
    throw ConfigError("<run> has no <subModel> element");
  }
  parse_root(*root, config.root);
  parse_sub_model(*sub, config.model);
  if (missing) {
    parse_missing(*missing, config.missing);
  }
  if (auto v = attr(*run, "replicates")) {
    config.replicates = to_int<std::size_t>(*v, "replicates");
  }
  if (auto v = attr(*run, "seed")) {
    config.seed = to_int<std::uint64_t>(*v, "seed");
  }
  if (auto v = attr(*run, "meaningClasses")) {
    config.meaning_classes = to_int<int>(*v, "meaningClasses");
  }
  config.validate();
  return config;
}

auto read_config(const std::filesystem::path& path) -> RunConfig {
  auto in = std::ifstream(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  auto text = std::stringstream{};
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

auto write_config(const RunConfig& config) -> std::string {
  auto out = std::ostringstream{};
  out << "<beast version='2.0'>\n";
  switch (config.tree.kind) {
    case TreeSource::Kind::newick:
      out << "    <tree id='tree' newick='" << config.tree.newick << "'/>\n";
      break;
    case TreeSource::Kind::file:
      out << "    <tree id='tree' file='" << config.tree.path.string() << "'/>\n";
      break;
    case TreeSource::Kind::yule:
      out << "    <tree id='tree' spec='YuleTree' leaves='" << config.tree.n_leaves << "' birthrate='"
          << format_double(config.tree.birth_rate) << "'/>\n";
      break;
  }
  out << "    <run spec='LanguageSequenceGen' tree='@tree' replicates='" << config.replicates << "' seed='"
      << config.seed << "' meaningClasses='" << config.meaning_classes << "'>\n";
  switch (config.root.kind) {
    case RootSource::Kind::bits:
      out << "        <root spec='Sequence' taxon='" << config.root.taxon << "' value='" << config.root.bits << "'/>\n";
      break;
    case RootSource::Kind::all_present:
      out << "        <root spec='Sequence' taxon='" << config.root.taxon << "' length='" << config.root.length
          << "'/>\n";
      break;
    case RootSource::Kind::sd_stationary:
      out << "        <root spec='StochasticDolloStationary' taxon='" << config.root.taxon << "'/>\n";
      break;
  }
  const auto& m = config.model;
  out << "        <subModel spec='";
  switch (m.kind) {
    case ModelKind::gtr:
      out << "ExplicitBinaryGTR' rate='" << format_double(m.q01) << "'";
      break;
    case ModelKind::stochastic_dollo:
      out << "ExplicitBinaryStochasticDollo' birth='" << format_double(m.lambda) << "' death='"
          << format_double(m.mu) << "'";
      break;
    case ModelKind::covarion:
      out << "ExplicitBinaryCovarion' rate='" << format_double(m.q01) << "' delta='" << format_double(m.delta)
          << "' kappa='" << format_double(m.kappa) << "'";
      break;
  }
  auto z = std::isinf(m.local_z) ? 0.0 : m.local_z;
  out << " borrowrate='" << format_double(m.borrow_rate) << "' borrowzrate='" << format_double(z)
      << "' noEmptyTrait='"
      << (m.no_empty == NoEmptyMode::off ? "false" : m.no_empty == NoEmptyMode::language ? "true" : "meaningclass")
      << "'/>\n";
  out << "        <missingModel spec='"
      << (config.missing.kind == MissingConfig::Kind::languages ? "MissingLanguageModel" : "MissingMeaningClassModel")
      << "' rate='" << format_double(config.missing.rate) << "'/>\n";
  out << "    </run>\n</beast>\n";
  return out.str();
}

}  // namespace langsim
