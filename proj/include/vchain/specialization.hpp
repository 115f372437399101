#ifndef VCHAIN_SPECIALIZATION_HPP
#define VCHAIN_SPECIALIZATION_HPP

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vchain/csv.hpp"
#include "vchain/error.hpp"
#include "vchain/format.hpp"
#include "vchain/ingest.hpp"
#include "vchain/matrix.hpp"

namespace vchain {

enum class Direction { exports, imports };

/// Revealed comparative advantage of a location x product flow matrix:
///
///   rca(l,p) = (X[l,p] / sum_p' X[l,p']) / (sum_l' X[l',p] / sum X)
///
/// Cells whose location or product total is zero get 0.
inline Matrix rca_matrix(const Matrix& flows) {
  const auto rows = row_sums(flows);
  const auto cols = col_sums(flows);
  const double all = total(rows);
  if (!(all > 0.0)) throw Error("flow matrix is all zero; specialization is undefined");
  Matrix out(flows.rows(), flows.cols(), 0.0);
  for (std::size_t l = 0; l < flows.rows(); ++l) {
    if (!(rows[l] > 0.0)) continue;
    for (std::size_t p = 0; p < flows.cols(); ++p) {
      const double x = flows(l, p);
      if (x == 0.0 || !(cols[p] > 0.0)) continue;
      out(l, p) = (x / rows[l]) / (cols[p] / all);
    }
  }
  return out;
}

/// Export and import specialization of every (location, product) cell.
/// Locations and products are kept in ascending name order; the table is
/// immutable once built.
class SpecializationTable {
 public:
  SpecializationTable() = default;

  static SpecializationTable from_trade(const TradeTable& t) {
    std::vector<std::string> locations = t.geographies();
    std::vector<std::string> products = t.products();
    std::map<std::string, std::size_t> li, pi;
    for (std::size_t i = 0; i < locations.size(); ++i) li[locations[i]] = i;
    for (std::size_t i = 0; i < products.size(); ++i) pi[products[i]] = i;
    Matrix exp(locations.size(), products.size()), imp(locations.size(), products.size());
    for (const auto& r : t.records()) {
      exp(li[r.geography], pi[r.product]) = r.value_exp;
      imp(li[r.geography], pi[r.product]) = r.value_imp;
    }
    return from_flows(std::move(locations), std::move(products), std::move(exp), std::move(imp));
  }

  /// `exports` and `imports` are locations x products. Names are sorted
  /// together with their rows and columns.
  static SpecializationTable from_flows(std::vector<std::string> locations, std::vector<std::string> products,
                                        Matrix exports, Matrix imports) {
    if (exports.rows() != locations.size() || exports.cols() != products.size() ||
        imports.rows() != locations.size() || imports.cols() != products.size()) {
      throw Error("flow matrix shape does not match location/product lists");
    }
    for (double v : exports.values()) {
      if (!(v >= 0.0)) throw Error("negative export flow");
    }
    for (double v : imports.values()) {
      if (!(v >= 0.0)) throw Error("negative import flow");
    }
    auto lorder = sorted_order(locations, "location");
    auto porder = sorted_order(products, "product");

    SpecializationTable s;
    s.exp_ = Matrix(locations.size(), products.size());
    s.imp_ = Matrix(locations.size(), products.size());
    for (std::size_t l = 0; l < lorder.size(); ++l) {
      for (std::size_t p = 0; p < porder.size(); ++p) {
        s.exp_(l, p) = exports(lorder[l], porder[p]);
        s.imp_(l, p) = imports(lorder[l], porder[p]);
      }
    }
    for (auto i : lorder) s.locations_.push_back(locations[i]);
    for (auto i : porder) s.products_.push_back(products[i]);
    for (std::size_t i = 0; i < s.products_.size(); ++i) s.product_index_[s.products_[i]] = i;
    for (std::size_t i = 0; i < s.locations_.size(); ++i) s.location_index_[s.locations_[i]] = i;

    s.rca_exp_ = rca_matrix(s.exp_);
    s.rca_imp_ = rca_matrix(s.imp_);
    s.geography_exp_ = row_sums(s.exp_);
    s.geography_imp_ = row_sums(s.imp_);
    s.product_exp_ = col_sums(s.exp_);
    s.product_imp_ = col_sums(s.imp_);
    return s;
  }

  std::size_t location_count() const noexcept { return locations_.size(); }
  std::size_t product_count() const noexcept { return products_.size(); }
  const std::vector<std::string>& locations() const noexcept { return locations_; }
  const std::vector<std::string>& products() const noexcept { return products_; }

  /// Index of `product`; throws when it is not in the table.
  std::size_t product_index(std::string_view product) const {
    auto it = product_index_.find(std::string(product));
    if (it == product_index_.end()) throw Error("unknown product '" + std::string(product) + "'");
    return it->second;
  }
  bool has_product(std::string_view product) const { return product_index_.count(std::string(product)) != 0; }

  std::size_t location_index(std::string_view location) const {
    auto it = location_index_.find(std::string(location));
    if (it == location_index_.end()) throw Error("unknown location '" + std::string(location) + "'");
    return it->second;
  }
  bool has_location(std::string_view location) const { return location_index_.count(std::string(location)) != 0; }

  const Matrix& flows(Direction d) const noexcept { return d == Direction::exports ? exp_ : imp_; }
  const Matrix& rca(Direction d) const noexcept { return d == Direction::exports ? rca_exp_ : rca_imp_; }
  const std::vector<double>& location_totals(Direction d) const noexcept {
    return d == Direction::exports ? geography_exp_ : geography_imp_;
  }
  const std::vector<double>& product_totals(Direction d) const noexcept {
    return d == Direction::exports ? product_exp_ : product_imp_;
  }

  double rca_exp(std::size_t l, std::size_t p) const { return rca_exp_(l, p); }
  double rca_imp(std::size_t l, std::size_t p) const { return rca_imp_(l, p); }

 private:
  static std::vector<std::size_t> sorted_order(const std::vector<std::string>& names, const char* what) {
    std::vector<std::size_t> order(names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names[a] < names[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (names[order[i]] == names[order[i - 1]]) throw Error(std::string("duplicate ") + what + " '" + names[order[i]] + "'");
    }
    return order;
  }

  std::vector<std::string> locations_;
  std::vector<std::string> products_;
  std::map<std::string, std::size_t> product_index_;
  std::map<std::string, std::size_t> location_index_;
  Matrix exp_, imp_, rca_exp_, rca_imp_;
  std::vector<double> geography_exp_, geography_imp_, product_exp_, product_imp_;
};

/// Locations with rca >= threshold for `product`, by rca descending then
/// name ascending.
inline std::vector<std::string> specialized_locations(const SpecializationTable& s, std::string_view product,
                                                      double threshold, Direction direction) {
  const std::size_t p = s.product_index(product);
  const Matrix& rca = s.rca(direction);
  std::vector<std::size_t> hits;
  for (std::size_t l = 0; l < s.location_count(); ++l) {
    if (rca(l, p) >= threshold && s.flows(direction)(l, p) > 0.0) hits.push_back(l);
  }
  std::sort(hits.begin(), hits.end(), [&](auto a, auto b) {
    if (rca(a, p) != rca(b, p)) return rca(a, p) > rca(b, p);
    return s.locations()[a] < s.locations()[b];
  });
  std::vector<std::string> out;
  out.reserve(hits.size());
  for (auto l : hits) out.push_back(s.locations()[l]);
  return out;
}

/// Dumps every cell with the trade-table column names: geography, value_imp,
/// product, geography_imp, product_imp, rca_imp, value_exp, geography_exp,
/// product_exp, rca_exp.
inline void write_specialization(std::ostream& out, const SpecializationTable& s) {
  out << "geography,value_imp,product,geography_imp,product_imp,rca_imp,value_exp,geography_exp,product_exp,rca_exp\n";
  const auto& ge = s.location_totals(Direction::exports);
  const auto& gi = s.location_totals(Direction::imports);
  const auto& pe = s.product_totals(Direction::exports);
  const auto& pi = s.product_totals(Direction::imports);
  for (std::size_t l = 0; l < s.location_count(); ++l) {
    for (std::size_t p = 0; p < s.product_count(); ++p) {
      csv::write_row(out, {s.locations()[l], format_double(s.flows(Direction::imports)(l, p)), s.products()[p],
                           format_double(gi[l]), format_double(pi[p]), format_double(s.rca_imp(l, p)),
                           format_double(s.flows(Direction::exports)(l, p)), format_double(ge[l]),
                           format_double(pe[p]), format_double(s.rca_exp(l, p))});
    }
  }
}

}  // namespace vchain

#endif  // VCHAIN_SPECIALIZATION_HPP
