#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "langsim/alignment_io.hpp"
#include "langsim/config.hpp"
#include "langsim/generate.hpp"
#include "test_helpers.hpp"

using namespace langsim;

namespace {

auto appendix_path() -> std::filesystem::path {
  return std::filesystem::path{LANGSIM_SOURCE_DIR} / "data" / "appendix_config.xml";
}

auto wrap(const std::string& sub_model, const std::string& extra = "") -> std::string {
  return "<beast version='2.0'>\n<tree id='tree' spec='beast.util.TreeParser' newick='((A:1,B:1):1,C:2);'/>\n"
         "<run spec='beast.app.seqgen.LanguageSequenceGen' tree='@tree'>\n"
         "<root spec='Sequence' value='0101' taxon='root'/>\n" +
         sub_model + "\n" + extra + "</run>\n</beast>\n";
}

}  // namespace

TEST_CASE("appendix configuration") {
  auto config = read_config(appendix_path());
  CHECK(config.model.kind == ModelKind::stochastic_dollo);
  CHECK(config.model.lambda == 0.5);
  CHECK(config.model.mu == 0.5);
  CHECK(config.model.borrow_rate == 0.0);
  CHECK(std::isinf(config.model.local_z));
  CHECK(config.model.no_empty == NoEmptyMode::off);
  CHECK(config.missing.kind == MissingConfig::Kind::languages);
  CHECK(config.missing.rate == 0.5);
  CHECK(config.root.kind == RootSource::Kind::bits);
  CHECK(config.root.bits == "01010101010100100010101010000100");
  CHECK(config.root.bits.size() == 32);
  REQUIRE(config.tree.kind == TreeSource::Kind::newick);
  auto tree = parse_newick(config.tree.newick);
  CHECK(tree.leaf_count() == 6);
  CHECK(tree.height() == doctest::Approx(0.92));
}

TEST_CASE("sub-model variants") {
  auto gtr = parse_config(wrap("<subModel spec='ExplicitBinaryGTR' rate='0.3' borrowrate='0.0' borrowzrate='0.0'/>"));
  CHECK(gtr.model.kind == ModelKind::gtr);
  CHECK(gtr.model.q01 == 0.3);
  CHECK(gtr.model.q10 == 0.3);
  CHECK(gtr.model.borrow_rate == 0.0);

  auto global =
      parse_config(wrap("<subModel spec='ExplicitBinaryGTR' rate='0.5' borrowrate='0.5' borrowzrate='0.0'/>"));
  CHECK(global.model.borrow_rate == 0.5);
  CHECK(std::isinf(global.model.local_z));
  auto local =
      parse_config(wrap("<subModel spec='ExplicitBinaryGTR' rate='0.5' borrowrate='0.5' borrowzrate='0.25'/>"));
  CHECK(local.model.local_z == 0.25);

  auto guarded = parse_config(wrap(
      "<subModel spec='ExplicitBinaryStochasticDollo' birth='1' death='0.2' noEmptyTrait='meaningclass'/>",
      "<missingModel spec='MissingMeaningClassModel' rate='0.1'/>"));
  CHECK(guarded.model.no_empty == NoEmptyMode::meaning_class);
  CHECK(guarded.missing.kind == MissingConfig::Kind::meaning_classes);
  CHECK(guarded.missing.rate == 0.1);

  auto cov = parse_config(wrap("<subModel spec='ExplicitBinaryCovarion' rate='0.5' delta='0.2' kappa='0.4'/>"));
  CHECK(cov.model.kind == ModelKind::covarion);
  CHECK(cov.model.delta == 0.2);
  CHECK(cov.model.kappa == 0.4);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse_config(wrap("<subModel spec='ExplicitBinaryJC'/>")), ConfigError);
  CHECK_THROWS_AS(parse_config(wrap("<subModel spec='ExplicitBinaryStochasticDollo' birth='0.5'/>")), ConfigError);
  CHECK_THROWS_AS(parse_config(wrap("<subModel spec='ExplicitBinaryGTR' rate='fast'/>")), ConfigError);
  CHECK_THROWS_AS(parse_config(wrap("<subModel spec='ExplicitBinaryGTR' rate='-1'/>")), ConfigError);
  CHECK_THROWS_AS(parse_config("<beast><run"), ConfigError);
  auto bad_root = wrap("<subModel spec='ExplicitBinaryGTR' rate='0.5'/>");
  bad_root.replace(bad_root.find("0101"), 4, "01x1");
  CHECK_THROWS_AS(parse_config(bad_root), ConfigError);
  CHECK_THROWS_AS(
      parse_config(wrap("<subModel spec='ExplicitBinaryCovarion' rate='0.5' delta='0.2' kappa='0.4' borrowrate='1'/>")),
      ConfigError);
  CHECK_THROWS_AS(read_config("/nonexistent/config.xml"), ConfigError);
}

TEST_CASE("configuration echo round trip") {
  auto config = read_config(appendix_path());
  config.meaning_classes = 4;
  config.replicates = 3;
  config.seed = 99;
  auto again = parse_config(write_config(config));
  CHECK(again.model.kind == config.model.kind);
  CHECK(again.model.lambda == config.model.lambda);
  CHECK(again.model.mu == config.model.mu);
  CHECK(again.missing.rate == config.missing.rate);
  CHECK(again.root.bits == config.root.bits);
  CHECK(again.tree.newick == config.tree.newick);
  CHECK(again.meaning_classes == 4);
  CHECK(again.replicates == 3);
  CHECK(again.seed == 99);
  CHECK(write_config(again) == write_config(config));
}

TEST_CASE("alignment document round trip") {
  auto rng = make_stream(81, 0);
  auto a = Alignment{};
  a.taxa = {"english", "german", "irish"};
  for (std::size_t i = 0; i < 3; ++i) {
    a.rows.push_back(test::random_bits(12, rng));
  }
  a.rows[1].set(3, TraitState::missing);
  a.meaning_class = contiguous_meaning_classes(12, 3);
  auto text = format_alignment(a, "SD", "2026-01-02 03:04:05.678");
  CHECK(text.find("<data id='SD' dataType='binary'>") != std::string::npos);
  CHECK(text.find("<!-- Meaning Classes: 0,4,8 -->") != std::string::npos);
  CHECK(text.find("<!-- Created at: 2026-01-02 03:04:05.678 -->") != std::string::npos);
  auto doc = read_alignment(text);
  CHECK(doc.data_id == "SD");
  CHECK(doc.timestamp == "2026-01-02 03:04:05.678");
  CHECK(doc.alignment.taxa == a.taxa);
  CHECK(doc.alignment.rows == a.rows);
  CHECK(doc.alignment.meaning_class == a.meaning_class);
  CHECK(doc.alignment.rows[1].get(3) == TraitState::missing);

  auto plain = format_alignment(a, "SD", "");
  CHECK(plain.find("Created at") == std::string::npos);
  CHECK_FALSE(read_alignment(plain).timestamp.has_value());
  CHECK(std::regex_match(timestamp_now(), std::regex{R"(\d{4}-\d\d-\d\d \d\d:\d\d:\d\d\.\d{3})"}));

  // interleaved classes must be grouped first
  a.meaning_class = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  CHECK_THROWS_AS(format_alignment(a, "SD", ""), AlignmentFormatError);
  auto grouped = group_columns_by_class(a);
  CHECK(grouped.meaning_class == contiguous_meaning_classes(12, 3));
  CHECK(grouped.rows[0].get(1) == a.rows[0].get(3));
  CHECK(grouped.rows[2].get(4) == a.rows[2].get(1));
  CHECK_THROWS_AS(read_alignment("<beast><data id='x'>"), AlignmentFormatError);
}

TEST_CASE("generated appendix output") {
  auto config = read_config(appendix_path());
  config.meaning_classes = 4;
  config.seed = 7;
  auto rep = generate_replicate(config, 0);
  CHECK(rep.data_id == "SD");
  CHECK(rep.alignment.taxa.size() == 6);
  for (const auto& row : rep.alignment.rows) {
    CHECK(row.length() == rep.alignment.column_count());
    CHECK(row.length() >= 32);
  }
  auto text = format_alignment(rep.alignment, rep.data_id, "");
  CHECK(text == format_alignment(generate_replicate(config, 0).alignment, "SD", ""));
  CHECK(text != format_alignment(generate_replicate(config, 1).alignment, "SD", ""));
  // missing-language rate 0.5 leaves some '?'
  CHECK(text.find('?') != std::string::npos);
}
