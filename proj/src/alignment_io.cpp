#include "langsim/alignment_io.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <numeric>
#include <regex>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace langsim {

namespace pt = boost::property_tree;

namespace {

auto escape_attr(const std::string& s) -> std::string {
  auto out = std::string{};
  for (auto c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '\'':
        out += "&apos;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

void require_contiguous_classes(const Alignment& alignment) {
  const auto& mc = alignment.meaning_class;
  auto seen_max = -1;
  for (std::size_t i = 0; i < mc.size(); ++i) {
    if (i > 0 && mc[i] != mc[i - 1] && mc[i] <= seen_max) {
      throw AlignmentFormatError("meaning classes must occupy contiguous, increasing column blocks");
    }
    seen_max = std::max(seen_max, mc[i]);
  }
}

}  // namespace

auto timestamp_now() -> std::string {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  auto tm = std::tm{};
  localtime_r(&secs, &tm);
  auto out = std::ostringstream{};
  out << std::put_time(&tm, "%Y-%m-%d %H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms;
  return out.str();
}

void write_alignment(std::ostream& out, const Alignment& alignment, const std::string& data_id,
                     const std::string& timestamp) {
  alignment.validate();
  require_contiguous_classes(alignment);
  out << "<beast version='2.0'>\n";
  out << "<data id='" << escape_attr(data_id) << "' dataType='binary'>\n";
  for (std::size_t r = 0; r < alignment.rows.size(); ++r) {
    if (r > 0) {
      out << '\n';
    }
    out << "    <sequence taxon='" << escape_attr(alignment.taxa[r]) << "' value='" << alignment.rows[r].to_string()
        << "'/>\n";
  }
  out << "</data>\n\n";
  out << "<!-- Meaning Classes:";
  auto first = alignment.class_first_positions();
  for (std::size_t i = 0; i < first.size(); ++i) {
    out << (i == 0 ? " " : ",") << first[i];
  }
  out << " -->\n";
  if (!timestamp.empty()) {
    out << "<!-- Created at: " << timestamp << " -->\n";
  }
  out << "</beast>\n";
  if (!out) {
    throw AlignmentFormatError("failed to write alignment");
  }
}

auto format_alignment(const Alignment& alignment, const std::string& data_id, const std::string& timestamp)
    -> std::string {
  auto out = std::ostringstream{};
  write_alignment(out, alignment, data_id, timestamp);
  return out.str();
}

auto read_alignment(const std::string& xml_text) -> AlignmentDocument {
  auto doc = pt::ptree{};
  try {
    auto in = std::istringstream(xml_text);
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw AlignmentFormatError(std::string("malformed alignment XML: ") + e.what());
  }
  auto beast = doc.get_child_optional("beast");
  if (!beast) {
    throw AlignmentFormatError("alignment has no <beast> element");
  }
  auto data = beast->get_child_optional("data");
  if (!data) {
    throw AlignmentFormatError("alignment has no <data> element");
  }
  auto result = AlignmentDocument{};
  result.data_id = data->get("<xmlattr>.id", std::string{});
  for (const auto& [key, child] : *data) {
    if (key != "sequence") {
      continue;
    }
    auto taxon = child.get_optional<std::string>("<xmlattr>.taxon");
    auto value = child.get_optional<std::string>("<xmlattr>.value");
    if (!taxon || !value) {
      throw AlignmentFormatError("<sequence> needs taxon and value attributes");
    }
    try {
      result.alignment.rows.push_back(TraitSequence::from_string(*value));
    } catch (const std::invalid_argument& e) {
      throw AlignmentFormatError(std::string("bad sequence value: ") + e.what());
    }
    result.alignment.taxa.push_back(*taxon);
  }
  auto columns = result.alignment.rows.empty() ? std::size_t{0} : result.alignment.rows.front().length();

  auto classes = std::vector<int>(columns);
  std::iota(classes.begin(), classes.end(), 0);
  static const auto mc_re = std::regex(R"(<!--\s*Meaning Classes:([^>]*)-->)");
  static const auto ts_re = std::regex(R"(<!--\s*Created at:\s*(.*?)\s*-->)");
  auto m = std::smatch{};
  if (std::regex_search(xml_text, m, mc_re)) {
    auto text = m[1].str();
    std::replace(text.begin(), text.end(), ',', ' ');
    auto in = std::istringstream(text);
    auto starts = std::vector<std::size_t>{};
    for (std::size_t p; in >> p;) {
      starts.push_back(p);
    }
    if (!in.eof()) {
      throw AlignmentFormatError("malformed meaning-class comment");
    }
    if (!starts.empty()) {
      if (starts.front() != 0 || !std::is_sorted(starts.begin(), starts.end()) ||
          std::adjacent_find(starts.begin(), starts.end()) != starts.end() || starts.back() >= columns) {
        throw AlignmentFormatError("meaning-class positions must be increasing column indices starting at 0");
      }
      auto cls = -1;
      for (std::size_t c = 0, next = 0; c < columns; ++c) {
        if (next < starts.size() && starts[next] == c) {
          ++cls;
          ++next;
        }
        classes[c] = cls;
      }
    }
  }
  if (std::regex_search(xml_text, m, ts_re)) {
    result.timestamp = m[1].str();
  }
  result.alignment.meaning_class = std::move(classes);
  try {
    result.alignment.validate();
  } catch (const std::invalid_argument& e) {
    throw AlignmentFormatError(e.what());
  }
  return result;
}

auto group_columns_by_class(const Alignment& alignment) -> Alignment {
  auto order = std::vector<std::size_t>(alignment.column_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return alignment.meaning_class[a] < alignment.meaning_class[b];
  });
  auto out = Alignment{};
  out.taxa = alignment.taxa;
  out.meaning_class.reserve(order.size());
  for (auto c : order) {
    out.meaning_class.push_back(alignment.meaning_class[c]);
  }
  for (const auto& row : alignment.rows) {
    auto permuted = TraitSequence(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto s = order[i] < row.length() ? row.get(order[i]) : TraitState::absent;
      if (s != TraitState::absent) {
        permuted.set(i, s);
      }
    }
    out.rows.push_back(std::move(permuted));
  }
  return out;
}

}  // namespace langsim
