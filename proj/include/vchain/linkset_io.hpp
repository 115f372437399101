#ifndef VCHAIN_LINKSET_IO_HPP
#define VCHAIN_LINKSET_IO_HPP

#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"

#include "vchain/csv.hpp"
#include "vchain/error.hpp"
#include "vchain/inference.hpp"

namespace vchain {

/// One JSON object per line: {"output","input","merged_rank","backward_score"}.
inline void write_links_jsonl(std::ostream& out, const LinkSet& links) {
  for (const auto& l : links.links) {
    nlohmann::ordered_json j;
    j["output"] = l.output;
    j["input"] = l.input;
    j["merged_rank"] = l.merged_rank;
    j["backward_score"] = l.backward_score;
    out << j.dump() << '\n';
  }
}

/// Reads links written by write_links_jsonl. The product universe becomes the
/// sorted set of ids mentioned.
inline LinkSet read_links_jsonl(std::istream& in) {
  LinkSet out;
  std::set<std::string> universe;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Link l{j.at("output").get<std::string>(), j.at("input").get<std::string>(), j.value("merged_rank", 0L),
             j.value("backward_score", 0L)};
      universe.insert(l.output);
      universe.insert(l.input);
      out.links.push_back(std::move(l));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad link record: ") + e.what(), line_no);
    }
  }
  out.products.assign(universe.begin(), universe.end());
  return out;
}

/// Edge list for graph tools: source = input, target = output.
inline void write_links_edge_csv(std::ostream& out, const LinkSet& links) {
  out << "source,target,merged_rank,backward_score\n";
  for (const auto& l : links.links) {
    csv::write_row(out, {l.input, l.output, std::to_string(l.merged_rank), std::to_string(l.backward_score)});
  }
}

namespace detail {
inline std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}
}  // namespace detail

inline void write_links_dot(std::ostream& out, const LinkSet& links, const std::string& name = "value_chain") {
  out << "digraph " << detail::dot_id(name) << " {\n";
  std::set<std::string> nodes;
  for (const auto& l : links.links) {
    nodes.insert(l.input);
    nodes.insert(l.output);
  }
  for (const auto& n : nodes) out << "  " << detail::dot_id(n) << ";\n";
  for (const auto& l : links.links) {
    out << "  " << detail::dot_id(l.input) << " -> " << detail::dot_id(l.output) << " [label=\"" << l.merged_rank
        << "\"];\n";
  }
  out << "}\n";
}

/// Truth / label file: CSV with `output` and `input` columns.
inline LinkSet read_truth_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  csv::Header header(fields);
  long out_col = header.find("output"), in_col = header.find("input");
  if (out_col < 0 || in_col < 0) throw ParseError("truth file needs columns: output, input", reader.line());
  LinkSet out;
  std::set<std::string> universe;
  while (reader.next(fields)) {
    if (static_cast<long>(fields.size()) <= std::max(out_col, in_col)) throw ParseError("malformed row", reader.line());
    Link l{fields[out_col], fields[in_col], 0, 0};
    if (l.output.empty() || l.input.empty()) throw ParseError("empty product id", reader.line());
    universe.insert(l.output);
    universe.insert(l.input);
    out.links.push_back(std::move(l));
  }
  out.products.assign(universe.begin(), universe.end());
  return out;
}

inline void write_truth_csv(std::ostream& out, const LinkSet& links) {
  out << "output,input\n";
  for (const auto& l : links.links) csv::write_row(out, {l.output, l.input});
}

}  // namespace vchain

#endif  // VCHAIN_LINKSET_IO_HPP
