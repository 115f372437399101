#ifndef VCHAIN_TUNING_HPP
#define VCHAIN_TUNING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vchain/csv.hpp"
#include "vchain/error.hpp"
#include "vchain/format.hpp"
#include "vchain/icio.hpp"
#include "vchain/inference.hpp"
#include "vchain/parallel.hpp"

namespace vchain {

/// Candidate values for each of the four thresholds, in ParamSet order.
struct GridSpec {
  std::array<std::vector<double>, 4> values;

  /// lo, lo+step, ... strictly below hi.
  static std::vector<double> range(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) throw Error("grid range needs finite bounds and step > 0");
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (!(v < hi - step * 1e-9)) break;
      out.push_back(v);
    }
    return out;
  }

  static GridSpec uniform(const std::vector<double>& v) { return GridSpec{{v, v, v, v}}; }

  /// [1, 6) in steps of 0.5 for every threshold.
  static GridSpec default_grid() { return uniform(range(1.0, 6.0, 0.5)); }

  static GridSpec single(const ParamSet& p) {
    return GridSpec{{{{p.rca_locations_1}, {p.rca_industries_1}, {p.rca_locations_2}, {p.rca_industries_2}}}};
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& v : values) n *= v.size();
    return n;
  }

  void validate() const {
    for (const auto& v : values) {
      if (v.empty()) throw Error("grid parameter list is empty");
      for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw Error("grid values must be finite and non-negative");
      }
    }
  }

  /// Grid point `i` in row-major order over (l1, i1, l2, i2).
  ParamSet at(std::size_t i, std::size_t n, std::size_t k) const {
    std::array<std::size_t, 4> idx{};
    for (int d = 3; d >= 0; --d) {
      idx[d] = i % values[d].size();
      i /= values[d].size();
    }
    ParamSet p;
    p.rca_locations_1 = values[0][idx[0]];
    p.rca_industries_1 = values[1][idx[1]];
    p.rca_locations_2 = values[2][idx[2]];
    p.rca_industries_2 = values[3][idx[3]];
    p.n = n;
    p.k = k;
    return p;
  }
};

struct PrecisionResult {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  double precision = 0.0;
  /// No links were predicted; precision is reported as 0.
  bool empty = false;

  bool operator==(const PrecisionResult&) const = default;
};

inline PrecisionResult precision_from_counts(std::size_t tp, std::size_t fp) {
  PrecisionResult r{tp, fp, 0.0, tp + fp == 0};
  if (!r.empty) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  return r;
}

/// Each predicted link is one prediction; it is a true positive when the
/// label of input -> output is 1.
inline PrecisionResult precision(const LinkSet& pred, const LabelMatrix& labels) {
  std::set<std::string> unmatched;
  for (const auto& l : pred.links) {
    if (!labels.has(l.input)) unmatched.insert(l.input);
    if (!labels.has(l.output)) unmatched.insert(l.output);
  }
  if (!unmatched.empty()) {
    std::string list;
    for (const auto& u : unmatched) list += (list.empty() ? "" : ", ") + u;
    throw Error("predicted products missing from the label index: " + list);
  }
  std::size_t tp = 0;
  for (const auto& l : pred.links) tp += labels.link(l.input, l.output) ? 1 : 0;
  return precision_from_counts(tp, pred.links.size() - tp);
}

struct TuneResult {
  ParamSet params;
  PrecisionResult score;
};

struct GridOptions {
  unsigned jobs = 0;
  MissingRank missing_rank = MissingRank::observed;
  /// Write every finished evaluation to `checkpoint_path` after each batch of
  /// this many grid points. 0 disables checkpoints.
  std::size_t checkpoint_every = 0;
  std::string checkpoint_path;
};

/// Leaderboard order: precision descending, then smaller threshold tuple.
inline bool leaderboard_before(const TuneResult& a, const TuneResult& b) {
  if (a.score.precision != b.score.precision) return a.score.precision > b.score.precision;
  return a.params.thresholds() < b.params.thresholds();
}

inline void write_leaderboard(std::ostream& out, const std::vector<TuneResult>& rows) {
  out << "rca_locations_1,rca_industries_1,rca_locations_2,rca_industries_2,tp,fp,precision\n";
  for (const auto& r : rows) {
    csv::write_row(out, {format_double(r.params.rca_locations_1), format_double(r.params.rca_industries_1),
                         format_double(r.params.rca_locations_2), format_double(r.params.rca_industries_2),
                         std::to_string(r.score.true_positives), std::to_string(r.score.false_positives),
                         format_double(r.score.precision)});
  }
}

namespace detail {

/// TP/FP of the top-k links without materializing them.
inline PrecisionResult score_links(const SpecializationTable& s, const std::vector<std::vector<Ranked>>& backward,
                                   const std::vector<std::vector<Ranked>>& forward, const ParamSet& p,
                                   const std::vector<std::size_t>& label_of, const LabelMatrix& labels) {
  std::size_t tp = 0, fp = 0;
  for (std::size_t target = 0; target < s.product_count(); ++target) {
    auto merged = merge(target, backward[target], forward, p.n, p.missing_rank);
    const std::size_t keep = std::min(merged.size(), p.k);
    for (std::size_t i = 0; i < keep; ++i) {
      if (labels.at(label_of[merged[i].product], label_of[target])) ++tp;
      else ++fp;
    }
  }
  return precision_from_counts(tp, fp);
}

}  // namespace detail

/// Exhaustive search over `grid`, scoring each point by the precision of
/// infer_all against `labels`. The returned leaderboard is a deterministic
/// total order regardless of `opts.jobs`.
inline std::vector<TuneResult> grid_search(const SpecializationTable& s, const LabelMatrix& labels,
                                           const GridSpec& grid, std::size_t n, std::size_t k,
                                           const GridOptions& opts = {}) {
  grid.validate();
  {
    ParamSet probe = grid.at(0, n, k);
    probe.validate();
  }
  std::set<std::string> table_ids(s.products().begin(), s.products().end());
  std::set<std::string> label_ids(labels.industries().begin(), labels.industries().end());
  if (table_ids != label_ids) {
    std::string diff;
    for (const auto& id : table_ids) {
      if (!label_ids.count(id)) diff += (diff.empty() ? "" : ", ") + id;
    }
    for (const auto& id : label_ids) {
      if (!table_ids.count(id)) diff += (diff.empty() ? "" : ", ") + id;
    }
    throw Error("label index does not match the table's products: " + diff);
  }
  std::vector<std::size_t> label_of(s.product_count());
  for (std::size_t i = 0; i < s.product_count(); ++i) label_of[i] = labels.index(s.products()[i]);

  // Backward lists depend only on (l1, i1) and forward lists on (l2, i2).
  const auto& g = grid.values;
  const std::size_t nb = g[0].size() * g[1].size(), nf = g[2].size() * g[3].size();
  std::vector<std::vector<std::vector<detail::Ranked>>> backward(nb), forward(nf);
  parallel_for(nb + nf, opts.jobs, [&](std::size_t i) {
    if (i < nb) {
      backward[i] = detail::directional_all(s, Direction::exports, g[0][i / g[1].size()], g[1][i % g[1].size()], n, 1);
    } else {
      const std::size_t j = i - nb;
      forward[j] = detail::directional_all(s, Direction::imports, g[2][j / g[3].size()], g[3][j % g[3].size()], n, 1);
    }
  });

  const std::size_t total = grid.size();
  std::vector<TuneResult> results(total);
  auto evaluate = [&](std::size_t i) {
    ParamSet p = grid.at(i, n, k);
    p.missing_rank = opts.missing_rank;
    const std::size_t b = i / nf, f = i % nf;
    results[i] = {p, detail::score_links(s, backward[b], forward[f], p, label_of, labels)};
  };

  const std::size_t batch = opts.checkpoint_every == 0 ? total : opts.checkpoint_every;
  for (std::size_t start = 0; start < total; start += batch) {
    const std::size_t end = std::min(total, start + batch);
    parallel_for(end - start, opts.jobs, [&](std::size_t i) { evaluate(start + i); });
    if (opts.checkpoint_every != 0 && !opts.checkpoint_path.empty()) {
      std::ofstream ck(opts.checkpoint_path, std::ios::trunc);
      if (!ck) throw Error("cannot write checkpoint '" + opts.checkpoint_path + "'");
      write_leaderboard(ck, std::vector<TuneResult>(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(end)));
    }
  }
  std::sort(results.begin(), results.end(), leaderboard_before);
  return results;
}

}  // namespace vchain

#endif  // VCHAIN_TUNING_HPP
