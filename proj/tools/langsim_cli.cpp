// langsim: generate / validate / sweep / compare.
// Exit codes: 0 ok, 1 usage, 2 config or input error, 3 validation failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "langsim/alignment_io.hpp"
#include "langsim/borrowing.hpp"
#include "langsim/config.hpp"
#include "langsim/generate.hpp"
#include "langsim/metrics.hpp"
#include "langsim/parallel.hpp"
#include "langsim/validation.hpp"

namespace fs = std::filesystem;
using namespace langsim;

namespace {

constexpr int k_ok = 0;
constexpr int k_usage = 1;
constexpr int k_config = 2;
constexpr int k_failed = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

auto read_text(const fs::path& path) -> std::string {
  auto in = std::ifstream(path);
  if (!in) {
    throw InputError("cannot read " + path.string());
  }
  auto text = std::stringstream{};
  text << in.rdbuf();
  return text.str();
}

// One tree per ';'-terminated statement.
auto read_trees(const fs::path& path) -> std::vector<Tree> {
  auto text = read_text(path);
  auto trees = std::vector<Tree>{};
  auto start = std::size_t{0};
  while (true) {
    auto end = text.find(';', start);
    auto chunk = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (chunk.find_first_not_of(" \t\r\n") != std::string::npos) {
      trees.push_back(parse_newick(chunk.substr(chunk.find_first_not_of(" \t\r\n")) + ";"));
    }
    if (end == std::string::npos) {
      break;
    }
    start = end + 1;
  }
  if (trees.empty()) {
    throw InputError("no trees in " + path.string());
  }
  return trees;
}

auto replicate_path(const fs::path& output, std::size_t index, std::size_t count) -> fs::path {
  if (count == 1) {
    return output;
  }
  auto name = output.stem().string() + "_" + std::to_string(index) + output.extension().string();
  return output.parent_path() / name;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  auto out = std::ofstream(path);
  if (!out || !(out << text)) {
    throw InputError("cannot write " + path.string());
  }
}

auto generate_all(const RunConfig& config) -> std::vector<GeneratedReplicate> {
  auto slots = std::vector<std::optional<GeneratedReplicate>>(config.replicates);
  parallel_for(config.replicates, [&](std::size_t i) { slots[i] = generate_replicate(config, i); });
  auto runs = std::vector<GeneratedReplicate>{};
  runs.reserve(slots.size());
  for (auto& r : slots) {
    runs.push_back(std::move(*r));
  }
  return runs;
}

struct GenerateArgs {
  std::string config;
  int meaning_classes = 0;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  bool no_timestamp = false;
};

auto cmd_generate(const GenerateArgs& args) -> int {
  auto config = read_config(args.config);
  config.meaning_classes = args.meaning_classes;
  if (args.seed) {
    config.seed = *args.seed;
  }
  if (args.replicates) {
    config.replicates = *args.replicates;
  }
  config.validate();
  auto runs = generate_all(config);
  auto stamp = args.no_timestamp ? std::string{} : timestamp_now();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto text = format_alignment(runs[i].alignment, runs[i].data_id, stamp);
    if (args.output.empty()) {
      std::cout << text;
    } else {
      write_file(replicate_path(args.output, i, runs.size()), text);
    }
  }
  return k_ok;
}

struct ValidateArgs {
  std::string suite = "all";
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  std::string out = "validation";
};

auto cmd_validate(const ValidateArgs& args) -> int {
  auto names = args.suite == "all" ? suite_names() : std::vector<std::string>{args.suite};
  auto options = SuiteOptions{};
  options.replicates = args.n;
  options.seed = args.seed;
  fs::create_directories(args.out);
  auto reports = std::vector<SuiteReport>{};
  for (const auto& name : names) {
    auto report = run_suite(name, options);
    for (const auto& h : report.histograms) {
      write_histogram_csv(fs::path(args.out) / (name + "_" + h.name + ".csv"), h.counts);
    }
    for (const auto& c : report.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << name << '/' << c.name << " statistic=" << c.statistic
                << " critical=" << c.critical << '\n';
    }
    reports.push_back(std::move(report));
  }
  write_fit_report_csv(fs::path(args.out) / "fit_report.csv", reports);
  auto ok = std::all_of(reports.begin(), reports.end(), [](const SuiteReport& r) { return r.pass(); });
  return ok ? k_ok : k_failed;
}

struct SweepArgs {
  std::string model = "gtr";
  std::vector<std::string> rates;
  std::size_t trees = 100;
  int leaves = 80;
  double yule_rate = 0.00055;
  std::size_t root_length = 2449;
  std::uint64_t seed = 1;
  std::string out = "sweep";
  bool no_timestamp = false;
};

auto parse_rates(const std::vector<std::string>& items) -> std::vector<double> {
  auto rates = std::vector<double>{};
  for (const auto& item : items) {
    if (item == "table") {
      for (const auto& e : borrowing_rate_table()) {
        rates.push_back(e.rate);
      }
      continue;
    }
    try {
      auto pos = std::size_t{0};
      rates.push_back(std::stod(item, &pos));
      if (pos != item.size() || rates.back() < 0.0) {
        throw std::invalid_argument(item);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad borrowing rate '" + item + "'");
    }
  }
  if (rates.empty()) {
    throw ConfigError("no borrowing rates given");
  }
  return rates;
}

auto cmd_sweep(const SweepArgs& args) -> int {
  auto config = RunConfig{};
  config.tree.kind = TreeSource::Kind::yule;
  config.tree.n_leaves = args.leaves;
  config.tree.birth_rate = args.yule_rate;
  config.root.kind = RootSource::Kind::all_present;
  config.root.length = args.root_length;
  config.replicates = args.trees;
  config.seed = args.seed;
  if (args.model == "gtr") {
    config.model.kind = ModelKind::gtr;
    config.model.q01 = config.model.q10 = gtr_rate_for_change_probability(0.1);
  } else if (args.model == "sd") {
    auto sd = derive_sd_rates(0.1, args.root_length);
    config.model.kind = ModelKind::stochastic_dollo;
    config.model.lambda = sd.lambda;
    config.model.mu = sd.mu;
  } else {
    throw ConfigError("sweep model must be gtr or sd");
  }
  auto stamp = args.no_timestamp ? std::string{} : timestamp_now();
  for (auto rate : parse_rates(args.rates)) {
    config.model.borrow_rate = rate;
    config.validate();
    std::ostringstream name;
    name << "rate_" << rate;
    auto dir = fs::path(args.out) / args.model / name.str();
    fs::create_directories(dir);
    write_file(dir / "config.xml", write_config(config));
    auto runs = generate_all(config);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      write_file(dir / ("tree_" + std::to_string(i) + ".nwk"), serialize_newick(runs[i].tree) + "\n");
      write_file(dir / ("alignment_" + std::to_string(i) + ".xml"),
                 format_alignment(runs[i].alignment, runs[i].data_id, stamp));
    }
    std::cerr << "rate " << rate << ": " << runs.size() << " replicates -> " << dir.string() << '\n';
  }
  return k_ok;
}

struct CompareArgs {
  std::string truth;
  std::vector<std::string> others;
  std::string out;
};

auto cmd_compare(const CompareArgs& args) -> int {
  auto truth = read_trees(args.truth);
  if (truth.size() != 1) {
    throw InputError("the true tree file must hold exactly one tree");
  }
  auto csv = std::ostringstream{};
  csv << "file,index,quartet_distance,height_difference\n";
  csv.precision(10);
  for (const auto& path : args.others) {
    auto trees = read_trees(path);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      csv << path << ',' << i << ',' << quartet_distance(truth[0], trees[i]) << ','
          << height_difference(truth[0], trees[i]) << '\n';
    }
  }
  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(args.out, csv.str());
  }
  return k_ok;
}

}  // namespace

int main(int argc, char** argv) {
  auto app = CLI::App{"Language evolution simulator"};
  app.require_subcommand(1);

  auto gen = GenerateArgs{};
  auto* g = app.add_subcommand("generate", "Simulate alignments from a config file");
  g->add_option("config", gen.config, "Config XML")->required();
  g->add_option("meaning_classes", gen.meaning_classes, "Meaning classes over the root (0: one per column)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  g->add_option("output", gen.output, "Output file (default: stdout)");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--replicates", gen.replicates, "Replicate count")->check(CLI::PositiveNumber);
  g->add_flag("--no-timestamp", gen.no_timestamp, "Omit the creation-time comment");

  auto val = ValidateArgs{};
  auto* v = app.add_subcommand("validate", "Run stationary-distribution validation suites");
  v->add_option("--suite", val.suite, "fig2|fig3|fig4|fig5|fig6|fig8|all")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6", "fig8", "all"}));
  v->add_option("--n", val.n, "Replicates per experiment")->check(CLI::PositiveNumber);
  v->add_option("--seed", val.seed, "Master seed");
  v->add_option("--out", val.out, "Directory for CSV output");

  auto sw = SweepArgs{};
  auto* s = app.add_subcommand("sweep", "Generate trees and alignments across borrowing rates");
  s->add_option("--model", sw.model, "gtr or sd")->check(CLI::IsMember({"gtr", "sd"}));
  s->add_option("--rates", sw.rates, "Borrowing rates, or 'table' for the tabulated set")->required();
  s->add_option("--trees", sw.trees, "Trees per rate")->check(CLI::PositiveNumber);
  s->add_option("--leaves", sw.leaves, "Leaves per tree")->check(CLI::Range(2, 100000));
  s->add_option("--yule-rate", sw.yule_rate, "Yule birth rate")->check(CLI::PositiveNumber);
  s->add_option("--root-length", sw.root_length, "Root cognate count")->check(CLI::PositiveNumber);
  s->add_option("--seed", sw.seed, "Master seed");
  s->add_option("--out", sw.out, "Output directory");
  s->add_flag("--no-timestamp", sw.no_timestamp, "Omit the creation-time comment");

  auto cmp = CompareArgs{};
  auto* c = app.add_subcommand("compare", "Quartet distance and height difference against a true tree");
  c->add_option("--true", cmp.truth, "True tree (Newick file)")->required();
  c->add_option("--others", cmp.others, "Tree files to compare")->required();
  c->add_option("--out", cmp.out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    auto code = app.exit(e);
    return code == 0 ? k_ok : k_usage;
  }

  try {
    if (*g) {
      return cmd_generate(gen);
    }
    if (*v) {
      return cmd_validate(val);
    }
    if (*s) {
      return cmd_sweep(sw);
    }
    return cmd_compare(cmp);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const NewickError& e) {
    std::cerr << "tree error: " << e.what() << '\n';
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return k_config;
}
