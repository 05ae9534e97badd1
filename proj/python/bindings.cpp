#include <optional>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "langsim/alignment_io.hpp"
#include "langsim/borrowing.hpp"
#include "langsim/config.hpp"
#include "langsim/generate.hpp"
#include "langsim/metrics.hpp"
#include "langsim/validation.hpp"

namespace py = pybind11;
using namespace langsim;

namespace {

auto alignment_dict(const Alignment& a) -> py::dict {
  auto rows = std::vector<std::string>{};
  for (const auto& row : a.rows) {
    rows.push_back(row.to_string());
  }
  auto d = py::dict{};
  d["taxa"] = a.taxa;
  d["rows"] = rows;
  d["meaning_classes"] = a.meaning_class;
  return d;
}

auto to_rate_matrix(const std::vector<std::vector<double>>& rows) -> RateMatrix {
  auto n = static_cast<Eigen::Index>(rows.size());
  auto q = Eigen::MatrixXd(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw std::invalid_argument("rate matrix must be square");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      q(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return RateMatrix(q);
}

auto to_vector(const Eigen::VectorXd& v) -> std::vector<double> { return {v.data(), v.data() + v.size()}; }

}  // namespace

PYBIND11_MODULE(_langsim, m) {
  m.doc() = "Simulation of binary cognate data along language trees";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TreeError>(m, "TreeError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);

  py::class_<Tree>(m, "Tree")
      .def_property_readonly("height", &Tree::height)
      .def_property_readonly("leaf_count", &Tree::leaf_count)
      .def_property_readonly("leaf_labels",
                             [](const Tree& t) {
                               auto out = std::vector<std::string>{};
                               for (auto leaf : t.leaves()) {
                                 out.push_back(t.at(leaf).label);
                               }
                               return out;
                             })
      .def("newick", &serialize_newick)
      .def("__repr__", [](const Tree& t) { return "<Tree " + serialize_newick(t) + ">"; });

  m.def("parse_newick", [](const std::string& text) { return parse_newick(text); }, py::arg("text"));
  m.def(
      "generate_yule",
      [](int n, double rate, std::uint64_t seed) {
        auto rng = make_stream(seed, 0);
        return generate_yule(n, rate, rng);
      },
      py::arg("n_leaves"), py::arg("birth_rate"), py::arg("seed") = 1);

  m.def("quartet_distance", &quartet_distance, py::arg("tree1"), py::arg("tree2"));
  m.def("height_difference", py::overload_cast<double, double>(&height_difference), py::arg("true_height"),
        py::arg("other_height"));

  m.def(
      "stationary_distribution",
      [](const std::vector<std::vector<double>>& q, const std::string& method) {
        auto rm = to_rate_matrix(q);
        if (method == "both") return to_vector(stationary_distribution(rm));
        if (method == "large_time") return to_vector(stationary_distribution(rm, StationaryMethod::large_time));
        if (method == "null_space") return to_vector(stationary_distribution(rm, StationaryMethod::null_space));
        throw std::invalid_argument("method must be 'both', 'large_time' or 'null_space'");
      },
      py::arg("q"), py::arg("method") = "both");
  m.def(
      "borrowing_generator",
      [](int languages, double mu, double b, const std::string& rule) {
        auto r = rule == "any_holder" ? BorrowingGeneratorRule::any_holder : BorrowingGeneratorRule::uniform_recipient;
        if (rule != "any_holder" && rule != "uniform_recipient") {
          throw std::invalid_argument("rule must be 'any_holder' or 'uniform_recipient'");
        }
        auto generator = borrowing_joint_generator(languages, mu, b, r);
        const auto& q = generator.matrix();
        auto out = std::vector<std::vector<double>>(static_cast<std::size_t>(q.rows()));
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
          for (Eigen::Index j = 0; j < q.cols(); ++j) {
            out[static_cast<std::size_t>(i)].push_back(q(i, j));
          }
        }
        return out;
      },
      py::arg("languages"), py::arg("mu"), py::arg("b"), py::arg("rule") = "uniform_recipient");

  m.def(
      "goodness_of_fit",
      [](const std::vector<double>& observed, const std::vector<double>& expected, double alpha) {
        auto r = goodness_of_fit(observed, expected, alpha);
        auto d = py::dict{};
        d["statistic"] = r.statistic;
        d["critical"] = r.critical;
        d["p_value"] = r.p_value;
        d["dof"] = r.dof;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("observed"), py::arg("expected"), py::arg("alpha") = 0.01);

  m.def("borrowing_rate_for_percentage", &borrowing_rate_for_percentage, py::arg("fraction"));
  m.def(
      "derive_sd_rates",
      [](double loss, std::size_t root_length) {
        auto r = derive_sd_rates(loss, root_length);
        return py::make_tuple(r.lambda, r.mu);
      },
      py::arg("loss_fraction"), py::arg("root_length"));

  m.def(
      "generate",
      [](const std::string& config_xml, std::size_t replicate, std::optional<std::uint64_t> seed,
         std::optional<int> meaning_classes, const std::filesystem::path& base_dir) {
        auto config = parse_config(config_xml, base_dir);
        if (seed) config.seed = *seed;
        if (meaning_classes) config.meaning_classes = *meaning_classes;
        config.validate();
        auto rep = [&] {
          py::gil_scoped_release release;
          return generate_replicate(config, replicate);
        }();
        auto d = alignment_dict(rep.alignment);
        d["data_id"] = rep.data_id;
        d["tree"] = serialize_newick(rep.tree);
        d["xml"] = format_alignment(rep.alignment, rep.data_id, "");
        d["missing_events"] = rep.missing_events;
        return d;
      },
      py::arg("config_xml"), py::arg("replicate") = 0, py::arg("seed") = py::none(),
      py::arg("meaning_classes") = py::none(), py::arg("base_dir") = std::filesystem::path{});

  m.def(
      "read_alignment",
      [](const std::string& xml) {
        auto doc = read_alignment(xml);
        auto d = alignment_dict(doc.alignment);
        d["data_id"] = doc.data_id;
        d["timestamp"] = doc.timestamp;
        return d;
      },
      py::arg("xml"));

  m.def("suite_names", &suite_names);
  m.def(
      "run_suite",
      [](const std::string& name, std::size_t replicates, std::uint64_t seed) {
        auto options = SuiteOptions{};
        options.replicates = replicates;
        options.seed = seed;
        auto report = [&] {
          py::gil_scoped_release release;
          return run_suite(name, options);
        }();
        auto checks = py::list{};
        for (const auto& c : report.checks) {
          auto d = py::dict{};
          d["name"] = c.name;
          d["statistic"] = c.statistic;
          d["critical"] = c.critical;
          d["pass"] = c.pass;
          checks.append(d);
        }
        auto histograms = py::dict{};
        for (const auto& h : report.histograms) {
          histograms[py::str(h.name)] = h.counts;
        }
        auto d = py::dict{};
        d["suite"] = report.suite;
        d["pass"] = report.pass();
        d["checks"] = checks;
        d["histograms"] = histograms;
        return d;
      },
      py::arg("name"), py::arg("replicates") = 10000, py::arg("seed") = 1);
}
