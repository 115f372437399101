#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "vchain/csv.hpp"
#include "vchain/specialization.hpp"

using namespace vchain;
using testutil::make_matrix;

TEST(RcaMatrix, UniformMatrixIsOne) {
  auto r = rca_matrix(make_matrix({{1, 1}, {1, 1}}));
  for (double v : r.values()) EXPECT_EQ(v, 1.0);
}

TEST(RcaMatrix, DiagonalHandEvaluation) {
  // row share 1, column share 4/8: rca = 1 / 0.5 = 2 on the diagonal
  auto r = rca_matrix(make_matrix({{4, 0}, {0, 4}}));
  EXPECT_EQ(r(0, 0), 2.0);
  EXPECT_EQ(r(1, 1), 2.0);
  EXPECT_EQ(r(0, 1), 0.0);
  EXPECT_EQ(r(1, 0), 0.0);
}

TEST(RcaMatrix, ScaleInvariant) {
  auto x = make_matrix({{3, 1, 7}, {2, 9, 4}, {0, 5, 6}});
  auto y = x;
  for (double& v : y.values()) v *= 1000.0;
  EXPECT_EQ(rca_matrix(x), rca_matrix(y));
}

TEST(RcaMatrix, ZeroRowsAndColumnsGiveZero) {
  auto r = rca_matrix(make_matrix({{0, 0, 0}, {1, 0, 3}}));
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(r(0, c), 0.0);
  EXPECT_EQ(r(1, 1), 0.0);
  EXPECT_EQ(r(1, 0), 1.0);
}

TEST(RcaMatrix, AllZeroIsAnError) { EXPECT_THROW(rca_matrix(Matrix(2, 3)), Error); }

TEST(RcaMatrix, NormalizationIdentityOnRandomMatrices) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = testutil::random_flows(rng, 1 + trial % 17, 1 + trial % 13, 0.3);
    auto r = rca_matrix(x);
    auto cols = col_sums(x);
    auto rows = row_sums(x);
    double all = total(rows);
    for (std::size_t l = 0; l < x.rows(); ++l) {
      if (rows[l] == 0) continue;
      double s = 0;
      for (std::size_t p = 0; p < x.cols(); ++p) s += r(l, p) * cols[p] / all;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(RcaMatrix, AtLeastOneIffLocalShareExceedsGlobalShare) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = testutil::random_flows(rng, 12, 9, 0.2);
    auto r = rca_matrix(x);
    auto cols = col_sums(x);
    auto rows = row_sums(x);
    double all = total(rows);
    for (std::size_t l = 0; l < x.rows(); ++l) {
      for (std::size_t p = 0; p < x.cols(); ++p) {
        // cross-multiplied to avoid rounding in the comparison
        const double lhs = x(l, p) * all, rhs = cols[p] * rows[l];
        if (std::abs(lhs - rhs) <= 1e-12 * rhs) continue;
        EXPECT_EQ(r(l, p) >= 1.0, lhs > rhs) << l << "," << p;
      }
    }
  }
}

namespace {

// A exports only x; B splits 3/2; C 2/8. x has half the world's exports, so
// rca(A,x) = 2, rca(B,x) = 0.6/0.5 = 1.2, rca(C,x) = 0.2/0.5 = 0.4.
SpecializationTable three_locations() {
  return testutil::table({"C", "A", "B"}, {"y", "x"}, {{8, 2}, {0, 5}, {2, 3}}, {{1, 1}, {1, 1}, {1, 1}});
}

}  // namespace

TEST(SpecializationTable, SortsNamesAndKeepsCellsAligned) {
  auto s = three_locations();
  EXPECT_EQ(s.locations(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(s.products(), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(s.flows(Direction::exports)(s.location_index("C"), s.product_index("y")), 8.0);
  EXPECT_DOUBLE_EQ(s.rca_exp(s.location_index("A"), s.product_index("x")), 2.0);
  EXPECT_DOUBLE_EQ(s.rca_exp(s.location_index("B"), s.product_index("x")), 1.2);
  EXPECT_DOUBLE_EQ(s.rca_exp(s.location_index("C"), s.product_index("x")), 0.4);
}

TEST(SpecializedLocations, ThresholdFilterAndOrder) {
  auto s = three_locations();
  EXPECT_EQ(specialized_locations(s, "x", 1.5, Direction::exports), std::vector<std::string>{"A"});
  EXPECT_EQ(specialized_locations(s, "x", 1.2, Direction::exports), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(specialized_locations(s, "x", 0.0, Direction::exports), (std::vector<std::string>{"A", "B", "C"}));
  // A has no exports of y
  EXPECT_EQ(specialized_locations(s, "y", 0.0, Direction::exports), (std::vector<std::string>{"C", "B"}));
  EXPECT_TRUE(specialized_locations(s, "x", 2.0000001, Direction::exports).empty());
}

TEST(SpecializedLocations, TiesBreakByName) {
  auto s = three_locations();
  EXPECT_EQ(specialized_locations(s, "x", 0.0, Direction::imports), (std::vector<std::string>{"A", "B", "C"}));
}

TEST(SpecializedLocations, UnknownProductIsNamed) {
  auto s = three_locations();
  try {
    specialized_locations(s, "zzz", 1.0, Direction::exports);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zzz"), std::string::npos);
  }
}

TEST(SpecializationTable, FromTradeMatchesFromFlows) {
  auto t = TradeTable::from_records({{"A", "x", 1, 0}, {"A", "y", 2, 5}, {"B", "x", 3, 4}});
  auto s = SpecializationTable::from_trade(t);
  auto ref = testutil::table({"A", "B"}, {"x", "y"}, {{0, 5}, {4, 0}}, {{1, 2}, {3, 0}});
  EXPECT_EQ(s.rca(Direction::exports), ref.rca(Direction::exports));
  EXPECT_EQ(s.rca(Direction::imports), ref.rca(Direction::imports));
  EXPECT_EQ(s.location_totals(Direction::exports), (std::vector<double>{5, 4}));
}

TEST(SpecializationTable, RejectsBadInput) {
  EXPECT_THROW(testutil::table({"A", "A"}, {"x"}, {{1}, {1}}, {{1}, {1}}), Error);
  EXPECT_THROW(testutil::table({"A"}, {"x"}, {{-1}}, {{1}}), Error);
  EXPECT_THROW(testutil::table({"A"}, {"x"}, {{1}}, {{0}}), Error);
}

TEST(SpecializationTable, DumpUsesTradeTableColumns) {
  auto s = three_locations();
  std::stringstream out;
  write_specialization(out, s);
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header,
            "geography,value_imp,product,geography_imp,product_imp,rca_imp,value_exp,geography_exp,product_exp,rca_exp");
  std::string first;
  std::getline(out, first);
  EXPECT_EQ(first, "A,1,x,2,3,1,5,5,10,2");
}
