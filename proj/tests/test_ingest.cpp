#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "vchain/ingest.hpp"

using namespace vchain;

namespace {

TradeTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_regional_trade(in);
}

const char* kFourRegions =
    "geography,product,value_imp,value_exp,year,extra\n"
    "Jalisco,0709 Other Vegetables,9451035.0,34593964.0,2017,a\n"
    "Jalisco,8703 Cars,120.5,4000.25,2017,b\n"
    "Jalisco,8703 Cars,79.5,999.75,2018,c\n"
    "Nuevo Leon,0709 Other Vegetables,3813095.0,51550913.0,2019,d\n"
    "Nuevo Leon,8708 Vehicle Parts,500,0,2020,e\n"
    "Bavaria,8703 Cars,10,90000,2018,f\n"
    "Bavaria,8708 Vehicle Parts,70000,25000,2018,g\n"
    "\"Ciudad de Mexico\",8708 Vehicle Parts,1775336.0,5882480.0,2017,h\n";

}  // namespace

TEST(ParseRegionalTrade, SumsAcrossYears) {
  auto t = parse("geography,product,value_imp,value_exp,year\nA,x,1,5,2017\nA,x,2,7,2018\n");
  ASSERT_EQ(t.records().size(), 1u);
  EXPECT_EQ(t.records()[0].value_exp, 12.0);
  EXPECT_EQ(t.records()[0].value_imp, 3.0);
}

TEST(ParseRegionalTrade, HeaderOnlyGivesEmptyTable) {
  auto t = parse("geography,product,value_imp,value_exp,year\n");
  EXPECT_TRUE(t.empty());
  EXPECT_TRUE(t.geography_exp().empty());
  EXPECT_TRUE(t.product_imp().empty());
}

TEST(ParseRegionalTrade, TotalsMatchHandSummedColumns) {
  auto t = parse(kFourRegions);
  // Independent spreadsheet-style pass over the raw lines.
  std::istringstream in(kFourRegions);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> geo_exp, geo_imp, prod_exp, prod_imp;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    std::string geo = cells[0];
    geo.erase(std::remove(geo.begin(), geo.end(), '"'), geo.end());
    geo_imp[geo] += std::stod(cells[2]);
    geo_exp[geo] += std::stod(cells[3]);
    prod_imp[cells[1]] += std::stod(cells[2]);
    prod_exp[cells[1]] += std::stod(cells[3]);
  }
  EXPECT_EQ(t.geography_exp(), geo_exp);
  EXPECT_EQ(t.geography_imp(), geo_imp);
  EXPECT_EQ(t.product_exp(), prod_exp);
  EXPECT_EQ(t.product_imp(), prod_imp);
  EXPECT_EQ(t.geographies().size(), 4u);
  EXPECT_EQ(t.geography_exp().at("Jalisco"), 34593964.0 + 5000.0);
}

TEST(ParseRegionalTrade, ColumnMappingAndExtraColumns) {
  std::istringstream in("Year,Region,HS4,Imports,Exports,Notes\n2018,A,x,1,2,\"n, 1\"\n");
  ColumnMapping m{"Region", "HS4", "Imports", "Exports", "Year"};
  auto t = parse_regional_trade(in, m);
  ASSERT_EQ(t.records().size(), 1u);
  EXPECT_EQ(t.records()[0], (TradeRecord{"A", "x", 1.0, 2.0}));
}

TEST(ParseRegionalTrade, MalformedRowNamesLine) {
  try {
    parse("geography,product,value_imp,value_exp,year\nA,x,1,2,2017\nA,x,abc,2,2018\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  try {
    parse("geography,product,value_imp,value_exp,year\nA,x,1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseRegionalTrade, NegativeValueNamesField) {
  try {
    parse("geography,product,value_imp,value_exp,year\nA,x,1,-2,2017\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("value_exp"), std::string::npos);
  }
}

TEST(ParseRegionalTrade, MissingColumnListsSchema) {
  try {
    parse("geography,product,value_imp,year\nA,x,1,2017\n");
    FAIL();
  } catch (const ParseError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("value_exp"), std::string::npos);
    EXPECT_NE(what.find("geography, product, value_imp, value_exp, year"), std::string::npos);
  }
}

TEST(ParseRegionalTrade, RowOrderDoesNotMatter) {
  std::vector<RawTradeRecord> raw;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1e9);
  for (int g = 0; g < 6; ++g) {
    for (int p = 0; p < 5; ++p) {
      for (int y = 2017; y <= 2020; ++y) {
        raw.push_back({"G" + std::to_string(g), "P" + std::to_string(p), u(rng), u(rng), y});
      }
    }
  }
  const TradeTable ref = TradeTable::aggregate(raw);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(raw.begin(), raw.end(), rng);
    EXPECT_EQ(TradeTable::aggregate(raw), ref);
  }
}

TEST(ParseRegionalTrade, WholeDollarTotalsAreExact) {
  std::vector<RawTradeRecord> raw;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> cents(0, 1'000'000'000);
  for (int g = 0; g < 20; ++g) {
    for (int p = 0; p < 30; ++p) {
      raw.push_back({"G" + std::to_string(g), "P" + std::to_string(p), static_cast<double>(cents(rng)), static_cast<double>(cents(rng)), 2019});
    }
  }
  auto t = TradeTable::aggregate(raw);
  double rec_exp = 0, geo_exp = 0, rec_imp = 0, geo_imp = 0;
  for (const auto& r : t.records()) rec_exp += r.value_exp, rec_imp += r.value_imp;
  for (const auto& [g, v] : t.geography_exp()) geo_exp += v;
  for (const auto& [g, v] : t.geography_imp()) geo_imp += v;
  EXPECT_EQ(rec_exp, geo_exp);
  EXPECT_EQ(rec_imp, geo_imp);
}

TEST(FilterRegions, EitherTailRemovesRegion) {
  auto t = TradeTable::from_records({{"Small importer", "x", 5e7, 2e9},
                                     {"Big", "x", 5e8, 5e9},
                                     {"Small exporter", "x", 2e8, 5e8},
                                     {"Tiny", "x", 1e6, 1e6}});
  CleaningPolicy policy{{}, 1e8, 1e9, TailRule::either};
  auto f = filter_regions(t, policy);
  EXPECT_EQ(f.geographies(), std::vector<std::string>{"Big"});

  policy.rule = TailRule::both;
  auto g = filter_regions(t, policy);
  EXPECT_EQ(g.geographies(), (std::vector<std::string>{"Big", "Small exporter", "Small importer"}));
}

TEST(FilterRegions, ExclusionListAndIdentity) {
  auto t = TradeTable::from_records({{"Reexportação", "x", 1, 1}, {"Unknown", "x", 1, 1},
                                     {"Sin provincia asignada", "y", 1, 1}, {"Bahia", "x", 1, 1}});
  EXPECT_EQ(filter_regions(t, {}), t);
  auto f = filter_regions(t, {{"Reexportação", "Unknown", "Sin provincia asignada"}, 0, 0});
  EXPECT_EQ(f.geographies(), std::vector<std::string>{"Bahia"});
  EXPECT_EQ(f.products(), std::vector<std::string>{"x"});
  EXPECT_THROW(filter_regions(t, {{}, -1, 0}), Error);
}

TEST(ReconcileProducts, KeepsProductsTradedBothWays) {
  std::vector<TradeRecord> recs;
  for (int i = 0; i < 3; ++i) recs.push_back({"A", "exp_only" + std::to_string(i), 0, 10});
  for (int i = 0; i < 2; ++i) recs.push_back({"A", "imp_only" + std::to_string(i), 10, 0});
  for (int i = 0; i < 5; ++i) {
    recs.push_back({"A", "both" + std::to_string(i), 0, 3});
    recs.push_back({"B", "both" + std::to_string(i), 4, 0});
  }
  auto r = reconcile_products(TradeTable::from_records(recs));
  EXPECT_EQ(r.products().size(), 5u);
  for (const auto& p : r.products()) EXPECT_EQ(p.rfind("both", 0), 0u);
  EXPECT_EQ(r.geography_exp().at("A"), 15.0);
  EXPECT_EQ(r.geography_imp().at("A"), 0.0);
}

TEST(CleanTradeTable, ReachesAFixedPoint) {
  // Dropping the import-only product pushes B below the import floor, so one
  // pass is not enough.
  auto t = TradeTable::from_records(
      {{"A", "x", 100, 100}, {"A", "y", 100, 100}, {"B", "x", 10, 100}, {"B", "z", 95, 0}});
  CleaningPolicy policy{{}, 100, 50};
  auto once = reconcile_products(filter_regions(t, policy));
  auto twice = reconcile_products(filter_regions(once, policy));
  EXPECT_NE(once, twice);

  auto clean = clean_trade_table(t, policy);
  EXPECT_EQ(clean.geographies(), std::vector<std::string>{"A"});
  EXPECT_EQ(clean_trade_table(clean, policy), clean);
}

TEST(CleanTradeTable, IdempotentOnRandomTables) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln(10, 2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TradeRecord> recs;
    for (int g = 0; g < 15; ++g) {
      for (int p = 0; p < 12; ++p) {
        recs.push_back({"G" + std::to_string(g), "P" + std::to_string(p), u(rng) < 0.3 ? 0.0 : ln(rng),
                        u(rng) < 0.3 ? 0.0 : ln(rng)});
      }
    }
    auto t = TradeTable::from_records(recs);
    CleaningPolicy policy{{"G3"}, 3e5, 3e5};
    auto once = clean_trade_table(t, policy);
    EXPECT_EQ(clean_trade_table(once, policy), once);
    for (const auto& [p, v] : once.product_exp()) {
      EXPECT_GT(v, 0.0);
      EXPECT_GT(once.product_imp().at(p), 0.0);
    }
  }
}

TEST(TradeTableIo, WriteThenReadIsIdentity) {
  auto t = parse(kFourRegions);
  std::stringstream buf;
  write_trade_table(buf, t);
  EXPECT_EQ(read_trade_table(buf), t);
}

TEST(TradeTable, RejectsDuplicatesAndEmptyNames) {
  EXPECT_THROW(TradeTable::from_records({{"A", "x", 1, 1}, {"A", "x", 2, 2}}), Error);
  EXPECT_THROW(TradeTable::from_records({{"", "x", 1, 1}}), Error);
  EXPECT_THROW(TradeTable::from_records({{"A", "x", -1, 1}}), Error);
}
