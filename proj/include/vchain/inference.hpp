#ifndef VCHAIN_INFERENCE_HPP
#define VCHAIN_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "vchain/error.hpp"
#include "vchain/parallel.hpp"
#include "vchain/specialization.hpp"

namespace vchain {

/// Penalty added when the output product is missing from a candidate's
/// forward list.
enum class MissingRank {
  observed,     // length of the forward list + 1
  list_length,  // n + 1
};

/// Thresholds and list sizes of the backward & forward search.
///
/// `rca_locations_1` selects the specialized exporters of an output and
/// `rca_industries_1` decides which of their imports count as over-imported.
/// `rca_locations_2` / `rca_industries_2` play the same roles for the forward
/// pass (specialized importers, over-exported products).
struct ParamSet {
  double rca_locations_1 = 2.0;
  double rca_industries_1 = 1.5;
  double rca_locations_2 = 3.5;
  double rca_industries_2 = 2.0;
  std::size_t n = 10;
  std::size_t k = 3;
  MissingRank missing_rank = MissingRank::observed;

  void validate() const {
    for (double t : {rca_locations_1, rca_industries_1, rca_locations_2, rca_industries_2}) {
      if (!(t >= 0.0) || !std::isfinite(t)) throw Error("rca thresholds must be finite and non-negative");
    }
    if (k < 1) throw Error("k must be at least 1");
    if (n < k) throw Error("n must be at least k");
  }

  auto thresholds() const { return std::tuple(rca_locations_1, rca_industries_1, rca_locations_2, rca_industries_2); }
};

struct Candidate {
  std::string product;
  /// Specialized-location count for directional lists; merged rank after
  /// backward_forward.
  long score = 0;
  /// Count from the backward pass.
  long support = 0;

  bool operator==(const Candidate&) const = default;
};

struct RankedCandidates {
  std::string target;
  std::vector<Candidate> candidates;

  bool operator==(const RankedCandidates&) const = default;
};

/// Directed input -> output link.
struct Link {
  std::string output;
  std::string input;
  long merged_rank = 0;
  long backward_score = 0;

  bool operator==(const Link&) const = default;
};

/// Ranked links grouped by output product. `products` is the product universe
/// the links were drawn from.
struct LinkSet {
  std::vector<std::string> products;
  std::vector<Link> links;

  bool contains(std::string_view input, std::string_view output) const {
    return std::any_of(links.begin(), links.end(),
                       [&](const Link& l) { return l.input == input && l.output == output; });
  }

  bool operator==(const LinkSet&) const = default;
};

namespace detail {

/// One directional candidate list, by product index.
struct Ranked {
  std::uint32_t product;
  std::int32_t count;
};

/// Candidates for `target`: anchors are locations with anchor-side rca >=
/// `anchor_threshold`; each other product is scored by the number of anchors
/// whose partner-side rca reaches `partner_threshold`. Zero scores are
/// dropped. Order: count desc, summed partner rca over anchors desc (same
/// order as the mean), product asc. Truncated to `n`.
inline std::vector<Ranked> directional(const SpecializationTable& s, std::size_t target, Direction anchor_side,
                                       double anchor_threshold, double partner_threshold, std::size_t n) {
  const Direction partner_side = anchor_side == Direction::exports ? Direction::imports : Direction::exports;
  const Matrix& anchor_rca = s.rca(anchor_side);
  const Matrix& anchor_flow = s.flows(anchor_side);
  const Matrix& partner_rca = s.rca(partner_side);
  const Matrix& partner_flow = s.flows(partner_side);
  const std::size_t products = s.product_count();

  std::vector<std::int32_t> count(products, 0);
  std::vector<double> weight(products, 0.0);
  bool any_anchor = false;
  for (std::size_t l = 0; l < s.location_count(); ++l) {
    if (!(anchor_rca(l, target) >= anchor_threshold && anchor_flow(l, target) > 0.0)) continue;
    any_anchor = true;
    auto rca_row = partner_rca.row(l);
    auto flow_row = partner_flow.row(l);
    for (std::size_t c = 0; c < products; ++c) {
      weight[c] += rca_row[c];
      if (rca_row[c] >= partner_threshold && flow_row[c] > 0.0) ++count[c];
    }
  }
  std::vector<Ranked> out;
  if (!any_anchor) return out;
  for (std::size_t c = 0; c < products; ++c) {
    if (c != target && count[c] > 0) out.push_back({static_cast<std::uint32_t>(c), count[c]});
  }
  auto better = [&](const Ranked& a, const Ranked& b) {
    if (a.count != b.count) return a.count > b.count;
    if (weight[a.product] != weight[b.product]) return weight[a.product] > weight[b.product];
    return a.product < b.product;
  };
  if (out.size() > n) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), better);
    out.resize(n);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

/// Directional lists for every product under one threshold pair.
inline std::vector<std::vector<Ranked>> directional_all(const SpecializationTable& s, Direction anchor_side,
                                                        double anchor_threshold, double partner_threshold,
                                                        std::size_t n, unsigned jobs) {
  std::vector<std::vector<Ranked>> out(s.product_count());
  parallel_for(s.product_count(), jobs, [&](std::size_t p) {
    out[p] = directional(s, p, anchor_side, anchor_threshold, partner_threshold, n);
  });
  return out;
}

struct Merged {
  std::uint32_t product;
  std::int32_t merged_rank;
  std::int32_t count;
};

/// Re-ranks the backward list of `target` with the forward lists of its
/// candidates: merged = backward position + position of `target` in the
/// candidate's forward list (or the missing-rank penalty). Stable in backward
/// order on ties.
inline std::vector<Merged> merge(std::size_t target, const std::vector<Ranked>& backward,
                                 const std::vector<std::vector<Ranked>>& forward, std::size_t n, MissingRank rule) {
  std::vector<Merged> out;
  out.reserve(backward.size());
  for (std::size_t j = 0; j < backward.size(); ++j) {
    const auto& fwd = forward[backward[j].product];
    std::int32_t value = 0;
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      if (fwd[i].product == target) {
        value = static_cast<std::int32_t>(i + 1);
        break;
      }
    }
    if (value == 0) {
      value = static_cast<std::int32_t>((rule == MissingRank::observed ? fwd.size() : n) + 1);
    }
    out.push_back({backward[j].product, static_cast<std::int32_t>(j + 1) + value, backward[j].count});
  }
  std::stable_sort(out.begin(), out.end(), [](const Merged& a, const Merged& b) { return a.merged_rank < b.merged_rank; });
  return out;
}

inline RankedCandidates to_ranked(const SpecializationTable& s, std::size_t target, const std::vector<Ranked>& list) {
  RankedCandidates rc{s.products()[target], {}};
  for (const auto& r : list) rc.candidates.push_back({s.products()[r.product], r.count, r.count});
  return rc;
}

/// Top-k links of every product from precomputed directional lists.
inline LinkSet links_from(const SpecializationTable& s, const std::vector<std::vector<Ranked>>& backward,
                          const std::vector<std::vector<Ranked>>& forward, const ParamSet& p) {
  LinkSet out{s.products(), {}};
  for (std::size_t target = 0; target < s.product_count(); ++target) {
    auto merged = merge(target, backward[target], forward, p.n, p.missing_rank);
    const std::size_t keep = std::min(merged.size(), p.k);
    for (std::size_t i = 0; i < keep; ++i) {
      out.links.push_back({s.products()[target], s.products()[merged[i].product], merged[i].merged_rank, merged[i].count});
    }
  }
  return out;
}

}  // namespace detail

/// Inputs proposed for `output_product` by its specialized exporters.
inline RankedCandidates backward_candidates(const SpecializationTable& s, std::string_view output_product,
                                            const ParamSet& p) {
  p.validate();
  const std::size_t target = s.product_index(output_product);
  return detail::to_ranked(
      s, target, detail::directional(s, target, Direction::exports, p.rca_locations_1, p.rca_industries_1, p.n));
}

/// Outputs proposed for `input_product` by its specialized importers.
inline RankedCandidates forward_candidates(const SpecializationTable& s, std::string_view input_product,
                                           const ParamSet& p) {
  p.validate();
  const std::size_t target = s.product_index(input_product);
  return detail::to_ranked(
      s, target, detail::directional(s, target, Direction::imports, p.rca_locations_2, p.rca_industries_2, p.n));
}

/// Backward candidates of `output_product` re-ranked by forward validation.
/// `score` holds the merged rank (ascending), `support` the backward count.
inline RankedCandidates backward_forward(const SpecializationTable& s, std::string_view output_product,
                                         const ParamSet& p) {
  p.validate();
  const std::size_t target = s.product_index(output_product);
  auto backward = detail::directional(s, target, Direction::exports, p.rca_locations_1, p.rca_industries_1, p.n);
  std::vector<std::vector<detail::Ranked>> forward(s.product_count());
  for (const auto& c : backward) {
    forward[c.product] =
        detail::directional(s, c.product, Direction::imports, p.rca_locations_2, p.rca_industries_2, p.n);
  }
  RankedCandidates rc{s.products()[target], {}};
  for (const auto& m : detail::merge(target, backward, forward, p.n, p.missing_rank)) {
    rc.candidates.push_back({s.products()[m.product], m.merged_rank, m.count});
  }
  return rc;
}

/// Top-k inputs of every product. `jobs` = 0 uses default_jobs(); the result
/// does not depend on it.
inline LinkSet infer_all(const SpecializationTable& s, const ParamSet& p, unsigned jobs = 0) {
  p.validate();
  if (s.product_count() == 0) throw Error("specialization table is empty");
  auto backward = detail::directional_all(s, Direction::exports, p.rca_locations_1, p.rca_industries_1, p.n, jobs);
  auto forward = detail::directional_all(s, Direction::imports, p.rca_locations_2, p.rca_industries_2, p.n, jobs);
  return detail::links_from(s, backward, forward, p);
}

}  // namespace vchain

#endif  // VCHAIN_INFERENCE_HPP
