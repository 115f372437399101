#ifndef VCHAIN_ICIO_HPP
#define VCHAIN_ICIO_HPP

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vchain/csv.hpp"
#include "vchain/error.hpp"
#include "vchain/format.hpp"
#include "vchain/matrix.hpp"
#include "vchain/specialization.hpp"

namespace vchain {

/// Splits "CCC_III" into country and industry at the first underscore.
inline std::pair<std::string, std::string> split_pair_code(std::string_view code) {
  auto pos = code.find('_');
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == code.size()) {
    throw Error("malformed country_industry code '" + std::string(code) + "'");
  }
  return {std::string(code.substr(0, pos)), std::string(code.substr(pos + 1))};
}

/// Intermediate-use flows between country_industry pairs. Row = seller,
/// column = buyer.
struct IcioTensor {
  std::vector<std::string> codes;
  Matrix flows;
};

/// Reads an ICIO CSV. The first header cell is ignored; the remaining header
/// cells are column codes. Only rows whose label is also a column label are
/// kept, which selects the square intermediate-use block and skips final
/// demand columns and value-added / output rows.
inline IcioTensor read_icio(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  if (fields.size() < 2) throw ParseError("ICIO header has no column codes", reader.line());
  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (!column_of.emplace(fields[i], i).second) throw ParseError("duplicate column '" + fields[i] + "'", reader.line());
  }
  std::vector<std::string> codes;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::set<std::string> seen;
  while (reader.next(fields)) {
    if (fields.empty() || !column_of.count(fields[0])) continue;
    if (!seen.insert(fields[0]).second) throw ParseError("duplicate row '" + fields[0] + "'", reader.line());
    codes.push_back(fields[0]);
    rows.push_back(std::move(fields));
    row_lines.push_back(reader.line());
  }
  if (codes.empty()) throw Error("ICIO file has no rows matching its column codes");
  for (const auto& c : codes) split_pair_code(c);

  IcioTensor t{codes, Matrix(codes.size(), codes.size())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < codes.size(); ++c) {
      const std::size_t col = column_of.at(codes[c]);
      if (col >= rows[r].size()) throw ParseError("row '" + codes[r] + "' is too short", row_lines[r]);
      double v;
      if (!parse_double(rows[r][col], v)) {
        throw ParseError("malformed number in column " + codes[c] + ": '" + rows[r][col] + "'", row_lines[r]);
      }
      if (v < 0.0) throw ParseError("negative flow in column " + codes[c], row_lines[r]);
      t.flows(r, c) = v;
    }
  }
  return t;
}

/// Element-wise sum of several years; codes are aligned by name and must
/// form the same set in every year.
inline IcioTensor sum_icio(const std::vector<IcioTensor>& years) {
  if (years.empty()) throw Error("no ICIO tables to merge");
  IcioTensor out = years.front();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < out.codes.size(); ++i) index[out.codes[i]] = i;
  for (std::size_t y = 1; y < years.size(); ++y) {
    const auto& t = years[y];
    if (t.codes.size() != out.codes.size()) throw Error("ICIO tables have different code sets");
    std::vector<std::size_t> map(t.codes.size());
    for (std::size_t i = 0; i < t.codes.size(); ++i) {
      auto it = index.find(t.codes[i]);
      if (it == index.end()) throw Error("ICIO code '" + t.codes[i] + "' missing from the first table");
      map[i] = it->second;
    }
    for (std::size_t r = 0; r < t.codes.size(); ++r) {
      for (std::size_t c = 0; c < t.codes.size(); ++c) out.flows(map[r], map[c]) += t.flows(r, c);
    }
  }
  return out;
}

struct IcioCleaning {
  /// Country code -> canonical country code.
  std::map<std::string, std::string> merge_countries{{"CN1", "CHN"}, {"CN2", "CHN"}, {"MX1", "MEX"}, {"MX2", "MEX"}};
  /// Codes dropped when they match either the country or the industry part.
  std::vector<std::string> drop_codes{"ROW", "97T98"};
};

/// Flow mass removed by clean_icio; total before = total after + dropped +
/// domestic.
struct IcioCleanReport {
  double total_before = 0.0;
  double dropped_mass = 0.0;
  double domestic_mass = 0.0;
  std::size_t countries = 0;
  std::size_t industries = 0;
  std::vector<std::string> warnings;
};

/// Merges country aliases by summation, drops listed countries/industries and
/// zeroes flows within a country.
inline IcioTensor clean_icio(const IcioTensor& raw, const IcioCleaning& cfg = {}, IcioCleanReport* report = nullptr) {
  if (raw.flows.rows() != raw.flows.cols() || raw.flows.rows() != raw.codes.size()) {
    throw Error("ICIO matrix must be square with one code per row/column");
  }
  IcioCleanReport rep;
  std::set<std::string> drop(cfg.drop_codes.begin(), cfg.drop_codes.end());
  std::set<std::string> seen_countries, seen_industries;

  std::vector<std::string> codes;
  std::map<std::string, std::size_t> index;
  std::vector<long> target(raw.codes.size(), -1);
  std::vector<std::string> country_of;
  for (std::size_t i = 0; i < raw.codes.size(); ++i) {
    auto [country, industry] = split_pair_code(raw.codes[i]);
    seen_countries.insert(country);
    seen_industries.insert(industry);
    auto m = cfg.merge_countries.find(country);
    std::string canonical = m == cfg.merge_countries.end() ? country : m->second;
    if (drop.count(country) || drop.count(canonical) || drop.count(industry)) continue;
    std::string code = canonical + "_" + industry;
    auto [it, inserted] = index.emplace(code, codes.size());
    if (inserted) {
      codes.push_back(code);
      country_of.push_back(canonical);
    }
    target[i] = static_cast<long>(it->second);
  }
  for (const auto& [from, to] : cfg.merge_countries) {
    if (!seen_countries.count(from)) rep.warnings.push_back("merge source '" + from + "' not present");
  }
  for (const auto& d : cfg.drop_codes) {
    if (!seen_countries.count(d) && !seen_industries.count(d)) rep.warnings.push_back("drop code '" + d + "' not present");
  }

  IcioTensor out{codes, Matrix(codes.size(), codes.size())};
  for (std::size_t r = 0; r < raw.codes.size(); ++r) {
    for (std::size_t c = 0; c < raw.codes.size(); ++c) {
      const double v = raw.flows(r, c);
      rep.total_before += v;
      if (target[r] < 0 || target[c] < 0) {
        rep.dropped_mass += v;
        continue;
      }
      if (country_of[target[r]] == country_of[target[c]]) {
        rep.domestic_mass += v;
        continue;
      }
      out.flows(target[r], target[c]) += v;
    }
  }

  std::set<std::string> countries(country_of.begin(), country_of.end());
  std::set<std::string> industries;
  for (const auto& c : codes) industries.insert(split_pair_code(c).second);
  rep.countries = countries.size();
  rep.industries = industries.size();
  if (codes.size() != countries.size() * industries.size()) {
    rep.warnings.push_back("country x industry grid is incomplete: " + std::to_string(codes.size()) + " codes for " +
                           std::to_string(countries.size()) + " countries and " + std::to_string(industries.size()) +
                           " industries");
  }
  if (report) *report = std::move(rep);
  return out;
}

/// Country x industry specialization: exports are row sums, imports column
/// sums.
inline SpecializationTable icio_specialization(const IcioTensor& t) {
  std::vector<std::string> countries, industries;
  std::map<std::string, std::size_t> ci, ii;
  std::vector<std::pair<std::size_t, std::size_t>> cell(t.codes.size());
  for (std::size_t i = 0; i < t.codes.size(); ++i) {
    auto [country, industry] = split_pair_code(t.codes[i]);
    auto c = ci.emplace(country, countries.size());
    if (c.second) countries.push_back(country);
    auto k = ii.emplace(industry, industries.size());
    if (k.second) industries.push_back(industry);
    cell[i] = {c.first->second, k.first->second};
  }
  Matrix exp(countries.size(), industries.size()), imp(countries.size(), industries.size());
  const auto rows = row_sums(t.flows);
  const auto cols = col_sums(t.flows);
  for (std::size_t i = 0; i < t.codes.size(); ++i) {
    exp(cell[i].first, cell[i].second) += rows[i];
    imp(cell[i].first, cell[i].second) += cols[i];
  }
  return SpecializationTable::from_flows(std::move(countries), std::move(industries), std::move(exp), std::move(imp));
}

/// Square matrix over named industries.
struct IndustryMatrix {
  std::vector<std::string> industries;
  Matrix values;
};

/// Aggregates both axes over countries. Industries are sorted by code.
inline IndustryMatrix industry_flows(const IcioTensor& t) {
  std::set<std::string> names;
  std::vector<std::string> industry_of(t.codes.size());
  for (std::size_t i = 0; i < t.codes.size(); ++i) {
    industry_of[i] = split_pair_code(t.codes[i]).second;
    names.insert(industry_of[i]);
  }
  IndustryMatrix out{{names.begin(), names.end()}, Matrix(names.size(), names.size())};
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < out.industries.size(); ++i) index[out.industries[i]] = i;
  std::vector<std::size_t> map(t.codes.size());
  for (std::size_t i = 0; i < t.codes.size(); ++i) map[i] = index[industry_of[i]];
  for (std::size_t r = 0; r < t.codes.size(); ++r) {
    for (std::size_t c = 0; c < t.codes.size(); ++c) out.values(map[r], map[c]) += t.flows(r, c);
  }
  return out;
}

/// Trade intensity of every industry pair:
///
///   TI(p,q) = (X[p,q] / sum_q' X[p,q']) / (sum_p' X[p',q] / sum X)
///
/// Rows or columns with zero total give 0.
inline Matrix trade_intensity(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error("trade intensity needs a square matrix");
  const auto rows = row_sums(m);
  const auto cols = col_sums(m);
  const double all = total(rows);
  if (!(all > 0.0)) throw Error("industry flow matrix is all zero; trade intensity is undefined");
  Matrix out(m.rows(), m.cols(), 0.0);
  for (std::size_t p = 0; p < m.rows(); ++p) {
    if (!(rows[p] > 0.0)) continue;
    for (std::size_t q = 0; q < m.cols(); ++q) {
      if (!(cols[q] > 0.0)) continue;
      out(p, q) = (m(p, q) / rows[p]) / (cols[q] / all);
    }
  }
  return out;
}

/// Binary industry x industry relation; 1 means the row industry feeds the
/// column industry.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::vector<std::string> industries, std::vector<std::uint8_t> cells)
      : industries_(std::move(industries)), cells_(std::move(cells)) {
    if (cells_.size() != industries_.size() * industries_.size()) throw Error("label matrix must be square");
    for (auto v : cells_) {
      if (v > 1) throw Error("label entries must be 0 or 1");
    }
    for (std::size_t i = 0; i < industries_.size(); ++i) {
      if (!index_.emplace(industries_[i], i).second) throw Error("duplicate label index '" + industries_[i] + "'");
    }
  }

  const std::vector<std::string>& industries() const noexcept { return industries_; }
  std::size_t size() const noexcept { return industries_.size(); }
  bool at(std::size_t from, std::size_t to) const { return cells_.at(from * industries_.size() + to) != 0; }
  bool has(std::string_view id) const { return index_.count(std::string(id)) != 0; }
  std::size_t index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw Error("unknown label id '" + std::string(id) + "'");
    return it->second;
  }
  /// Label of input -> output.
  bool link(std::string_view input, std::string_view output) const { return at(index(input), index(output)); }
  std::size_t ones() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }

  bool operator==(const LabelMatrix& o) const { return industries_ == o.industries_ && cells_ == o.cells_; }

 private:
  std::vector<std::string> industries_;
  std::vector<std::uint8_t> cells_;
  std::map<std::string, std::size_t> index_;
};

/// 1 where TI >= 1. Values within `tolerance` (relative) below 1 also count,
/// so the independence case TI == 1 survives floating-point rounding.
inline LabelMatrix binarize_ti(const IndustryMatrix& ti, double tolerance = 1e-12) {
  std::vector<std::uint8_t> cells;
  cells.reserve(ti.values.values().size());
  for (double v : ti.values.values()) cells.push_back(v >= 1.0 - tolerance ? 1 : 0);
  return LabelMatrix(ti.industries, std::move(cells));
}

inline LabelMatrix icio_labels(const IcioTensor& cleaned) {
  auto flows = industry_flows(cleaned);
  return binarize_ti({flows.industries, trade_intensity(flows.values)});
}

/// Square CSV: empty corner cell, industry codes across and down.
inline void write_industry_matrix(std::ostream& out, const IndustryMatrix& m) {
  std::vector<std::string> row{""};
  row.insert(row.end(), m.industries.begin(), m.industries.end());
  csv::write_row(out, row);
  for (std::size_t r = 0; r < m.industries.size(); ++r) {
    row.assign(1, m.industries[r]);
    for (double v : m.values.row(r)) row.push_back(format_double(v));
    csv::write_row(out, row);
  }
}

inline void write_labels(std::ostream& out, const LabelMatrix& labels) {
  std::vector<std::string> row{""};
  row.insert(row.end(), labels.industries().begin(), labels.industries().end());
  csv::write_row(out, row);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    row.assign(1, labels.industries()[r]);
    for (std::size_t c = 0; c < labels.size(); ++c) row.push_back(labels.at(r, c) ? "1" : "0");
    csv::write_row(out, row);
  }
}

inline LabelMatrix read_labels(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  std::vector<std::string> industries(fields.begin() + 1, fields.end());
  std::vector<std::uint8_t> cells;
  std::size_t r = 0;
  while (reader.next(fields)) {
    if (r >= industries.size()) throw ParseError("more rows than columns", reader.line());
    if (fields.size() != industries.size() + 1) throw ParseError("row width does not match header", reader.line());
    if (fields[0] != industries[r]) {
      throw ParseError("row '" + fields[0] + "' out of order; expected '" + industries[r] + "'", reader.line());
    }
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c] != "0" && fields[c] != "1") throw ParseError("label must be 0 or 1, got '" + fields[c] + "'", reader.line());
      cells.push_back(fields[c] == "1" ? 1 : 0);
    }
    ++r;
  }
  if (r != industries.size()) throw ParseError("label matrix is not square", reader.line());
  return LabelMatrix(std::move(industries), std::move(cells));
}

}  // namespace vchain

#endif  // VCHAIN_ICIO_HPP
