#ifndef VCHAIN_ALLOCATION_HPP
#define VCHAIN_ALLOCATION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "vchain/csv.hpp"
#include "vchain/error.hpp"
#include "vchain/format.hpp"
#include "vchain/inference.hpp"
#include "vchain/parallel.hpp"
#include "vchain/specialization.hpp"

namespace vchain {

/// Exports of `product` from `region` to `country`.
struct RegionExport {
  std::string region;
  std::string product;
  std::string country;
  double usd = 0.0;
};

/// Imports of `product` by `region` from `country`.
struct RegionImport {
  std::string country;
  std::string product;
  std::string region;
  double usd = 0.0;
};

struct BilateralFlowTable {
  std::vector<RegionExport> exports_to_country;
  std::vector<RegionImport> imports_from_country;
  /// Parent country of every region.
  std::map<std::string, std::string> region_country;
};

struct AllocationEntry {
  std::string origin_region;
  std::string input_product;
  std::string dest_region;
  std::string output_product;
  double usd = 0.0;

  bool operator==(const AllocationEntry&) const = default;
};

struct AllocationOptions {
  /// Normalize the destination's export shares over the products linked to
  /// each input instead of over all of its exports.
  bool renormalize = false;
  unsigned jobs = 0;
};

/// Import flows that could not be allocated because the origin country has no
/// recorded exports of the product to the destination's country.
struct AllocationReport {
  std::size_t entries = 0;
  std::size_t skipped_groups = 0;
  double skipped_usd = 0.0;
};

/// Proportional allocation of every (origin country, input, destination
/// region) import flow:
///
///   X[r1,p1,r2,p2] = X[r1,p1,c2] / sum_r1 X[r1,p1,c2]
///                    * L[p1,p2]
///                    * X[r2,p2] / sum_p2 X[r2,p2]
///                    * X[c1,p1,r2]
///
/// where r1 ranges over the regions of c1 and c2 is r2's country. Regional
/// export totals X[r2,p2] come from `s`. Only nonzero entries reach `sink`,
/// ordered by (c1, p1, r2), then r1, then p2; input order does not matter.
inline AllocationReport allocate(const LinkSet& links, const BilateralFlowTable& flows, const SpecializationTable& s,
                                 const std::function<void(const AllocationEntry&)>& sink,
                                 const AllocationOptions& opts = {}) {
  auto country_of = [&](const std::string& region) -> const std::string& {
    auto it = flows.region_country.find(region);
    if (it == flows.region_country.end()) throw Error("region '" + region + "' has no parent country");
    return it->second;
  };
  auto check = [](double v, const std::string& what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("negative or invalid flow in " + what);
  };

  // (c1, p1, c2) -> r1 -> usd
  std::map<std::tuple<std::string, std::string, std::string>, std::map<std::string, double>> exports;
  for (const auto& e : flows.exports_to_country) {
    check(e.usd, "exports of " + e.region);
    const auto& c1 = country_of(e.region);
    if (c1 == e.country) throw Error("domestic export entry for region '" + e.region + "'");
    exports[{c1, e.product, e.country}][e.region] += e.usd;
  }
  // (c1, p1, r2) -> usd
  std::map<std::tuple<std::string, std::string, std::string>, double> imports;
  for (const auto& i : flows.imports_from_country) {
    check(i.usd, "imports of " + i.region);
    if (country_of(i.region) == i.country) throw Error("domestic import entry for region '" + i.region + "'");
    imports[{i.country, i.product, i.region}] += i.usd;
  }

  std::map<std::string, std::vector<std::string>> outputs_of;
  for (const auto& l : links.links) outputs_of[l.input].push_back(l.output);
  for (auto& [p1, outs] : outputs_of) {
    std::sort(outs.begin(), outs.end());
    outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  }

  struct Group {
    const std::tuple<std::string, std::string, std::string>* key;
    double usd;
  };
  std::vector<Group> groups;
  for (const auto& [key, usd] : imports) {
    if (usd > 0.0) groups.push_back({&key, usd});
  }

  const Matrix& region_exports = s.flows(Direction::exports);
  const auto& region_totals = s.location_totals(Direction::exports);

  AllocationReport report;
  constexpr std::size_t chunk = 256;
  for (std::size_t start = 0; start < groups.size(); start += chunk) {
    const std::size_t end = std::min(groups.size(), start + chunk);
    std::vector<std::vector<AllocationEntry>> out(end - start);
    std::vector<char> skipped(end - start, 0);
    parallel_for(end - start, opts.jobs, [&](std::size_t gi) {
      const auto& [c1, p1, r2] = *groups[start + gi].key;
      const double x_in = groups[start + gi].usd;
      auto eit = exports.find({c1, p1, country_of(r2)});
      double denom = 0.0;
      if (eit != exports.end()) {
        for (const auto& [r1, v] : eit->second) denom += v;
      }
      if (!(denom > 0.0)) {
        skipped[gi] = 1;
        return;
      }
      auto lit = outputs_of.find(p1);
      if (lit == outputs_of.end()) return;
      if (!s.has_location(r2)) return;
      const std::size_t r2i = s.location_index(r2);
      std::vector<std::pair<const std::string*, double>> dest;
      double dest_total = opts.renormalize ? 0.0 : region_totals[r2i];
      for (const auto& p2 : lit->second) {
        if (!s.has_product(p2)) continue;
        const double v = region_exports(r2i, s.product_index(p2));
        if (v > 0.0) dest.push_back({&p2, v});
        if (opts.renormalize) dest_total += v;
      }
      if (!(dest_total > 0.0)) return;
      for (const auto& [r1, v] : eit->second) {
        if (!(v > 0.0)) continue;
        const double origin_share = v / denom;
        for (const auto& [p2, xv] : dest) {
          const double usd = origin_share * (xv / dest_total) * x_in;
          if (usd > 0.0) out[gi].push_back({r1, p1, r2, *p2, usd});
        }
      }
    });
    for (std::size_t gi = 0; gi < out.size(); ++gi) {
      if (skipped[gi]) {
        ++report.skipped_groups;
        report.skipped_usd += groups[start + gi].usd;
      }
      for (const auto& e : out[gi]) {
        sink(e);
        ++report.entries;
      }
    }
  }
  return report;
}

inline std::vector<AllocationEntry> allocate_all(const LinkSet& links, const BilateralFlowTable& flows,
                                                 const SpecializationTable& s, const AllocationOptions& opts = {},
                                                 AllocationReport* report = nullptr) {
  std::vector<AllocationEntry> out;
  auto r = allocate(links, flows, s, [&](const AllocationEntry& e) { out.push_back(e); }, opts);
  if (report) *report = r;
  return out;
}

inline void write_allocation_jsonl(std::ostream& out, const AllocationEntry& e) {
  nlohmann::ordered_json j;
  j["origin_region"] = e.origin_region;
  j["input_product"] = e.input_product;
  j["dest_region"] = e.dest_region;
  j["output_product"] = e.output_product;
  j["usd"] = e.usd;
  out << j.dump() << '\n';
}

inline void write_allocation_csv_header(std::ostream& out) {
  out << "origin_region,input_product,dest_region,output_product,usd\n";
}

inline void write_allocation_csv(std::ostream& out, const AllocationEntry& e) {
  csv::write_row(out, {e.origin_region, e.input_product, e.dest_region, e.output_product, format_double(e.usd)});
}

namespace detail {
inline std::vector<std::vector<std::string>> read_columns(std::istream& in, const std::vector<std::string>& names) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  csv::Header header(fields);
  std::vector<long> idx;
  for (const auto& n : names) {
    idx.push_back(header.find(n));
    if (idx.back() < 0) {
      std::string expected;
      for (const auto& m : names) expected += (expected.empty() ? "" : ", ") + m;
      throw ParseError("missing column " + n + "; expected schema: " + expected, reader.line());
    }
  }
  std::vector<std::vector<std::string>> rows;
  while (reader.next(fields)) {
    std::vector<std::string> row;
    for (auto i : idx) {
      if (i >= static_cast<long>(fields.size())) throw ParseError("malformed row", reader.line());
      row.push_back(fields[i]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double read_usd(const std::string& s) {
  double v;
  if (!parse_double(s, v)) throw Error("malformed usd value '" + s + "'");
  if (v < 0.0) throw Error("negative usd value '" + s + "'");
  return v;
}
}  // namespace detail

/// CSV with columns region, product, country, usd.
inline std::vector<RegionExport> read_region_exports(std::istream& in) {
  std::vector<RegionExport> out;
  for (auto& r : detail::read_columns(in, {"region", "product", "country", "usd"})) {
    out.push_back({r[0], r[1], r[2], detail::read_usd(r[3])});
  }
  return out;
}

/// CSV with columns country, product, region, usd.
inline std::vector<RegionImport> read_region_imports(std::istream& in) {
  std::vector<RegionImport> out;
  for (auto& r : detail::read_columns(in, {"country", "product", "region", "usd"})) {
    out.push_back({r[0], r[1], r[2], detail::read_usd(r[3])});
  }
  return out;
}

/// CSV with columns region, country.
inline std::map<std::string, std::string> read_region_countries(std::istream& in) {
  std::map<std::string, std::string> out;
  for (auto& r : detail::read_columns(in, {"region", "country"})) {
    auto [it, inserted] = out.emplace(r[0], r[1]);
    if (!inserted && it->second != r[1]) throw Error("region '" + r[0] + "' mapped to two countries");
  }
  return out;
}

}  // namespace vchain

#endif  // VCHAIN_ALLOCATION_HPP
