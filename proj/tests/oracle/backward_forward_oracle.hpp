// Straight-line transcription of the backward & forward procedure, used only
// as a test oracle. It shares no code with the library: it works on plain
// nested vectors and string ids, and recomputes everything per call.
#ifndef VCHAIN_TESTS_BACKWARD_FORWARD_ORACLE_HPP
#define VCHAIN_TESTS_BACKWARD_FORWARD_ORACLE_HPP

#include <string>
#include <vector>

namespace oracle {

struct World {
  std::vector<std::string> locations;  // ascending
  std::vector<std::string> products;   // ascending
  std::vector<std::vector<double>> exp_flow, imp_flow, rca_exp, rca_imp;  // [location][product]
};

struct Params {
  double loc1, ind1, loc2, ind2;
  int n;
  bool penalty_is_n_plus_1 = false;
};

struct Entry {
  std::string product;
  int rank;
  int count;
};

// get_n_input_candidates / get_n_output_candidates. `anchor_*` select the
// specialized locations of `target`, `partner_*` are checked for every other
// product.
inline std::vector<Entry> get_n_candidates(const World& w, const std::string& target,
                                           const std::vector<std::vector<double>>& anchor_rca,
                                           const std::vector<std::vector<double>>& anchor_flow, double anchor_thr,
                                           const std::vector<std::vector<double>>& partner_rca,
                                           const std::vector<std::vector<double>>& partner_flow, double partner_thr,
                                           int n) {
  int t = -1;
  for (int p = 0; p < static_cast<int>(w.products.size()); ++p) {
    if (w.products[p] == target) t = p;
  }
  std::vector<int> specialized;
  for (int l = 0; l < static_cast<int>(w.locations.size()); ++l) {
    if (anchor_rca[l][t] >= anchor_thr && anchor_flow[l][t] > 0.0) specialized.push_back(l);
  }
  struct Scored {
    std::string product;
    int count;
    double sum;
  };
  std::vector<Scored> scored;
  for (int c = 0; c < static_cast<int>(w.products.size()); ++c) {
    if (w.products[c] == target) continue;
    int count = 0;
    double sum = 0.0;
    for (int l : specialized) {
      sum += partner_rca[l][c];
      if (partner_rca[l][c] >= partner_thr && partner_flow[l][c] > 0.0) count = count + 1;
    }
    if (count > 0) scored.push_back({w.products[c], count, sum});
  }
  // selection sort: count desc, rca sum desc, id asc
  for (std::size_t i = 0; i < scored.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < scored.size(); ++j) {
      const auto& a = scored[j];
      const auto& b = scored[best];
      bool better = a.count > b.count || (a.count == b.count && a.sum > b.sum) ||
                    (a.count == b.count && a.sum == b.sum && a.product < b.product);
      if (better) best = j;
    }
    std::swap(scored[i], scored[best]);
  }
  std::vector<Entry> out;
  for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < n; ++i) {
    out.push_back({scored[i].product, static_cast<int>(i) + 1, scored[i].count});
  }
  return out;
}

inline std::vector<Entry> backward_forward(const World& w, const std::string& P_i, const Params& prm) {
  // C <- get_n_input_candidates(P_i)
  std::vector<Entry> C =
      get_n_candidates(w, P_i, w.rca_exp, w.exp_flow, prm.loc1, w.rca_imp, w.imp_flow, prm.ind1, prm.n);
  // if P_i in C: C.drop(P_i)
  for (std::size_t j = 0; j < C.size(); ++j) {
    if (C[j].product == P_i) {
      C.erase(C.begin() + static_cast<long>(j));
      break;
    }
  }
  std::vector<int> new_ranks(C.size());
  for (std::size_t j = 0; j < C.size(); ++j) {
    std::vector<Entry> T =
        get_n_candidates(w, C[j].product, w.rca_imp, w.imp_flow, prm.loc2, w.rca_exp, w.exp_flow, prm.ind2, prm.n);
    int value = -1;
    for (const auto& e : T) {
      if (e.product == P_i) value = e.rank;
    }
    if (value < 0) {
      // rank of the last candidate T_n, plus one
      value = (prm.penalty_is_n_plus_1 ? prm.n : static_cast<int>(T.size())) + 1;
    }
    int old_rank = static_cast<int>(j) + 1;
    new_ranks[j] = old_rank + value;
  }
  for (std::size_t j = 0; j < C.size(); ++j) C[j].rank = new_ranks[j];
  // order_by_rank_ascending, earlier candidates first on ties (insertion sort)
  for (std::size_t i = 1; i < C.size(); ++i) {
    Entry x = C[i];
    std::size_t j = i;
    while (j > 0 && C[j - 1].rank > x.rank) {
      C[j] = C[j - 1];
      --j;
    }
    C[j] = x;
  }
  return C;
}

}  // namespace oracle

#endif  // VCHAIN_TESTS_BACKWARD_FORWARD_ORACLE_HPP
