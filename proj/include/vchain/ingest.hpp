#ifndef VCHAIN_INGEST_HPP
#define VCHAIN_INGEST_HPP

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vchain/csv.hpp"
#include "vchain/error.hpp"
#include "vchain/format.hpp"

namespace vchain {

/// One row of a regional trade file.
struct RawTradeRecord {
  std::string geography;
  std::string product;
  double value_imp = 0.0;
  double value_exp = 0.0;
  long long year = 0;
};

/// Flows of one product at one location, pooled over years.
struct TradeRecord {
  std::string geography;
  std::string product;
  double value_imp = 0.0;
  double value_exp = 0.0;

  bool operator==(const TradeRecord&) const = default;
};

/// Canonical trade table: one record per (geography, product), sorted by
/// geography then product, with per-location and per-product totals.
class TradeTable {
 public:
  TradeTable() = default;

  /// Aggregates `raw` by (geography, product). Rows are sorted before
  /// summation, so the result does not depend on input order.
  static TradeTable aggregate(std::vector<RawTradeRecord> raw) {
    for (const auto& r : raw) validate(r.geography, r.product, r.value_imp, r.value_exp);
    std::sort(raw.begin(), raw.end(), [](const RawTradeRecord& a, const RawTradeRecord& b) {
      return std::tie(a.geography, a.product, a.year, a.value_exp, a.value_imp) <
             std::tie(b.geography, b.product, b.year, b.value_exp, b.value_imp);
    });
    std::vector<TradeRecord> records;
    for (const auto& r : raw) {
      if (records.empty() || records.back().geography != r.geography || records.back().product != r.product) {
        records.push_back({r.geography, r.product, 0.0, 0.0});
      }
      records.back().value_imp += r.value_imp;
      records.back().value_exp += r.value_exp;
    }
    return from_sorted(std::move(records));
  }

  /// Builds a table from already pooled records (any order, unique keys).
  static TradeTable from_records(std::vector<TradeRecord> records) {
    for (const auto& r : records) validate(r.geography, r.product, r.value_imp, r.value_exp);
    std::sort(records.begin(), records.end(), [](const TradeRecord& a, const TradeRecord& b) {
      return std::tie(a.geography, a.product) < std::tie(b.geography, b.product);
    });
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].geography == records[i - 1].geography && records[i].product == records[i - 1].product) {
        throw Error("duplicate trade record for (" + records[i].geography + ", " + records[i].product + ")");
      }
    }
    return from_sorted(std::move(records));
  }

  const std::vector<TradeRecord>& records() const noexcept { return records_; }
  const std::map<std::string, double>& geography_exp() const noexcept { return geography_exp_; }
  const std::map<std::string, double>& geography_imp() const noexcept { return geography_imp_; }
  const std::map<std::string, double>& product_exp() const noexcept { return product_exp_; }
  const std::map<std::string, double>& product_imp() const noexcept { return product_imp_; }

  std::vector<std::string> geographies() const { return keys(geography_exp_); }
  std::vector<std::string> products() const { return keys(product_exp_); }

  bool empty() const noexcept { return records_.empty(); }

  bool operator==(const TradeTable&) const = default;

 private:
  static void validate(const std::string& geo, const std::string& product, double imp, double exp) {
    if (geo.empty()) throw Error("trade record with empty geography");
    if (product.empty()) throw Error("trade record with empty product");
    if (!(imp >= 0.0)) throw Error("negative or invalid value_imp for (" + geo + ", " + product + ")");
    if (!(exp >= 0.0)) throw Error("negative or invalid value_exp for (" + geo + ", " + product + ")");
  }

  static std::vector<std::string> keys(const std::map<std::string, double>& m) {
    std::vector<std::string> out;
    out.reserve(m.size());
    for (const auto& [k, v] : m) out.push_back(k);
    return out;
  }

  static TradeTable from_sorted(std::vector<TradeRecord> records) {
    TradeTable t;
    t.records_ = std::move(records);
    for (const auto& r : t.records_) {
      t.geography_exp_[r.geography] += r.value_exp;
      t.geography_imp_[r.geography] += r.value_imp;
      t.product_exp_[r.product] += r.value_exp;
      t.product_imp_[r.product] += r.value_imp;
    }
    return t;
  }

  std::vector<TradeRecord> records_;
  std::map<std::string, double> geography_exp_;
  std::map<std::string, double> geography_imp_;
  std::map<std::string, double> product_exp_;
  std::map<std::string, double> product_imp_;
};

/// Names of the input columns carrying each logical field.
struct ColumnMapping {
  std::string geography = "geography";
  std::string product = "product";
  std::string value_imp = "value_imp";
  std::string value_exp = "value_exp";
  std::string year = "year";
};

/// Parses a regional trade CSV. Extra columns are ignored; records are pooled
/// over years.
inline std::vector<RawTradeRecord> read_raw_trade(std::istream& in, const ColumnMapping& schema = {}) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  csv::Header header(fields);

  const std::string* names[] = {&schema.geography, &schema.product, &schema.value_imp, &schema.value_exp,
                                &schema.year};
  long idx[5];
  std::string missing;
  for (int i = 0; i < 5; ++i) {
    idx[i] = header.find(*names[i]);
    if (idx[i] < 0) missing += (missing.empty() ? "" : ", ") + *names[i];
  }
  if (!missing.empty()) {
    throw ParseError("missing column(s) " + missing + "; expected schema: " + schema.geography + ", " +
                         schema.product + ", " + schema.value_imp + ", " + schema.value_exp + ", " + schema.year,
                     reader.line());
  }
  long width = *std::max_element(std::begin(idx), std::end(idx)) + 1;

  std::vector<RawTradeRecord> out;
  while (reader.next(fields)) {
    const std::size_t line = reader.line();
    if (static_cast<long>(fields.size()) < width) {
      throw ParseError("malformed row: expected at least " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line);
    }
    RawTradeRecord r;
    r.geography = fields[idx[0]];
    r.product = fields[idx[1]];
    if (r.geography.empty()) throw ParseError("empty " + schema.geography, line);
    if (r.product.empty()) throw ParseError("empty " + schema.product, line);
    auto number = [&](long col, const std::string& name) {
      double v;
      if (!parse_double(fields[col], v)) throw ParseError("malformed number in " + name + ": '" + fields[col] + "'", line);
      if (v < 0.0) throw ParseError("negative value in " + name, line);
      return v;
    };
    r.value_imp = number(idx[2], schema.value_imp);
    r.value_exp = number(idx[3], schema.value_exp);
    if (!parse_int(fields[idx[4]], r.year)) {
      throw ParseError("malformed integer in " + schema.year + ": '" + fields[idx[4]] + "'", line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline TradeTable parse_regional_trade(std::istream& in, const ColumnMapping& schema = {}) {
  return TradeTable::aggregate(read_raw_trade(in, schema));
}

/// How the import and export floors combine.
enum class TailRule {
  either,  // drop when imports < floor OR exports < floor
  both,    // drop only when both are below their floors
};

struct CleaningPolicy {
  std::vector<std::string> excluded_geographies;
  double import_floor = 0.0;
  double export_floor = 0.0;
  TailRule rule = TailRule::either;
};

/// Drops excluded geographies and small regions; totals are recomputed.
inline TradeTable filter_regions(const TradeTable& t, const CleaningPolicy& policy) {
  if (policy.import_floor < 0.0 || policy.export_floor < 0.0) throw Error("cleaning floors must be non-negative");
  std::set<std::string> excluded(policy.excluded_geographies.begin(), policy.excluded_geographies.end());
  std::set<std::string> dropped;
  for (const auto& [geo, exp] : t.geography_exp()) {
    if (excluded.count(geo)) {
      dropped.insert(geo);
      continue;
    }
    const double imp = t.geography_imp().at(geo);
    const bool low_imp = imp < policy.import_floor;
    const bool low_exp = exp < policy.export_floor;
    if (policy.rule == TailRule::either ? (low_imp || low_exp) : (low_imp && low_exp)) dropped.insert(geo);
  }
  std::vector<TradeRecord> kept;
  for (const auto& r : t.records()) {
    if (!dropped.count(r.geography)) kept.push_back(r);
  }
  return TradeTable::from_records(std::move(kept));
}

/// Keeps products with strictly positive global exports and imports.
inline TradeTable reconcile_products(const TradeTable& t) {
  std::vector<TradeRecord> kept;
  for (const auto& r : t.records()) {
    if (t.product_exp().at(r.product) > 0.0 && t.product_imp().at(r.product) > 0.0) kept.push_back(r);
  }
  return TradeTable::from_records(std::move(kept));
}

/// Alternates filter_regions and reconcile_products until nothing changes.
/// Removing a product can push a region under a floor, so a single pass is
/// not always a fixed point.
inline TradeTable clean_trade_table(const TradeTable& t, const CleaningPolicy& policy) {
  TradeTable current = reconcile_products(filter_regions(t, policy));
  for (;;) {
    TradeTable next = reconcile_products(filter_regions(current, policy));
    if (next.records().size() == current.records().size()) return next;
    current = std::move(next);
  }
}

/// Writes the canonical four-column table.
inline void write_trade_table(std::ostream& out, const TradeTable& t) {
  out << "geography,product,value_imp,value_exp\n";
  for (const auto& r : t.records()) {
    csv::write_row(out, {r.geography, r.product, format_double(r.value_imp), format_double(r.value_exp)});
  }
}

/// Reads a table with at least geography, product, value_imp and value_exp
/// columns (the canonical table or a specialization dump). Each
/// (geography, product) pair must appear once.
inline TradeTable read_trade_table(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  csv::Header header(fields);
  const char* names[] = {"geography", "product", "value_imp", "value_exp"};
  long idx[4];
  for (int i = 0; i < 4; ++i) {
    idx[i] = header.find(names[i]);
    if (idx[i] < 0) {
      throw ParseError(std::string("missing column ") + names[i] +
                           "; expected schema: geography, product, value_imp, value_exp",
                       reader.line());
    }
  }
  long width = *std::max_element(std::begin(idx), std::end(idx)) + 1;
  std::vector<TradeRecord> records;
  while (reader.next(fields)) {
    if (static_cast<long>(fields.size()) < width) throw ParseError("malformed row", reader.line());
    TradeRecord r{fields[idx[0]], fields[idx[1]], 0.0, 0.0};
    if (!parse_double(fields[idx[2]], r.value_imp) || r.value_imp < 0.0) {
      throw ParseError("bad value_imp '" + fields[idx[2]] + "'", reader.line());
    }
    if (!parse_double(fields[idx[3]], r.value_exp) || r.value_exp < 0.0) {
      throw ParseError("bad value_exp '" + fields[idx[3]] + "'", reader.line());
    }
    records.push_back(std::move(r));
  }
  return TradeTable::from_records(std::move(records));
}

}  // namespace vchain

#endif  // VCHAIN_INGEST_HPP
