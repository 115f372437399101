#ifndef VCHAIN_CLI_HPP
#define VCHAIN_CLI_HPP

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vchain/allocation.hpp"
#include "vchain/eval_bench.hpp"
#include "vchain/icio.hpp"
#include "vchain/inference.hpp"
#include "vchain/ingest.hpp"
#include "vchain/linkset_io.hpp"
#include "vchain/specialization.hpp"
#include "vchain/tuning.hpp"

namespace vchain::cli {

namespace fs = std::filesystem;

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

inline fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw Error("output directory '" + dir + "' is not usable");
  return p;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

inline ParamSet parse_params(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 4) throw Error("--params expects four comma-separated thresholds");
  ParamSet p;
  double* dst[] = {&p.rca_locations_1, &p.rca_industries_1, &p.rca_locations_2, &p.rca_industries_2};
  for (int i = 0; i < 4; ++i) {
    if (!parse_double(parts[i], *dst[i])) throw Error("bad threshold '" + parts[i] + "' in --params");
  }
  return p;
}

inline GridSpec parse_grid(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() != 3) throw Error("--grid expects lo:hi:step");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    if (!parse_double(parts[i], v[i])) throw Error("bad number '" + parts[i] + "' in --grid");
  }
  return GridSpec::uniform(GridSpec::range(v[0], v[1], v[2]));
}

inline std::vector<std::string> read_name_list(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

/// Trade table or specialization dump; both carry the four value columns.
inline SpecializationTable load_table(const std::string& path) {
  auto in = open_in(path);
  return SpecializationTable::from_trade(read_trade_table(in));
}

inline std::string describe(const ParamSet& p) {
  return format_double(p.rca_locations_1) + "," + format_double(p.rca_industries_1) + "," +
         format_double(p.rca_locations_2) + "," + format_double(p.rca_industries_2);
}

inline void add_rates(HitRates& acc, const HitRates& h) {
  acc.at_least_1 += h.at_least_1;
  acc.at_least_2 += h.at_least_2;
  acc.at_least_3 += h.at_least_3;
  acc.outputs = h.outputs;
}

inline HitRates mean_rates(HitRates acc, std::size_t count) {
  const double c = static_cast<double>(count);
  acc.at_least_1 /= c;
  acc.at_least_2 /= c;
  acc.at_least_3 /= c;
  return acc;
}

/// Runs the command line. Returns 0 on success, 1 on a failed stage and 2 on
/// a usage error.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Infer product value chains from regional trade specialization", "vchain"};
  app.set_config("--config", "", "TOML/INI file with default flag values; explicit flags win");
  app.require_subcommand(1);
  app.fallthrough();

  unsigned jobs = 0;
  std::string out_dir = ".";
  app.add_option("--jobs", jobs, "Worker threads (0 = $VCHAIN_JOBS or all cores)");
  app.add_option("--out", out_dir, "Output directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Regional trade CSVs -> canonical trade table");
  std::vector<std::string> ingest_inputs;
  std::string exclude_file;
  double import_floor = 0.0, export_floor = 0.0;
  std::string tail_rule = "either";
  bool single_pass = false;
  std::vector<std::string> column_overrides;
  ingest->add_option("inputs", ingest_inputs, "Trade CSV files")->required();
  ingest->add_option("--exclude-file", exclude_file, "Geographies to drop, one per line");
  ingest->add_option("--import-floor", import_floor, "Minimum total imports (USD)");
  ingest->add_option("--export-floor", export_floor, "Minimum total exports (USD)");
  ingest->add_option("--tail-rule", tail_rule, "either: drop below either floor; both: only below both")
      ->check(CLI::IsMember({"either", "both"}));
  ingest->add_flag("--single-pass", single_pass, "One filter + reconcile pass instead of iterating to a fixed point");
  ingest->add_option("--column", column_overrides, "field=header, e.g. geography=Region");

  // rca
  auto* rca = app.add_subcommand("rca", "Trade table -> specialization table");
  std::string table_path;
  rca->add_option("--table", table_path, "Trade table CSV")->required();

  // infer
  auto* infer = app.add_subcommand("infer", "Specialization + parameters -> link set");
  std::string params_text = "2,1.5,3.5,2";
  std::size_t n = 10, k = 3;
  std::string missing_rank = "observed";
  infer->add_option("--table", table_path, "Trade or specialization table CSV")->required();
  infer->add_option("--params", params_text, "rca_locations_1,rca_industries_1,rca_locations_2,rca_industries_2");
  infer->add_option("--n", n, "Candidate list length");
  infer->add_option("--k", k, "Inputs emitted per product");
  infer->add_option("--missing-rank", missing_rank, "Penalty when absent from a forward list: observed (|T|+1) or n (n+1)")
      ->check(CLI::IsMember({"observed", "n"}));

  // labels
  auto* labels = app.add_subcommand("labels", "ICIO tables -> tuning table + trade-intensity labels");
  std::vector<std::string> icio_inputs;
  std::string merge_text = "CN1=CHN,CN2=CHN,MX1=MEX,MX2=MEX";
  std::string drop_text = "ROW,97T98";
  labels->add_option("inputs", icio_inputs, "ICIO CSV files (summed)")->required();
  labels->add_option("--merge", merge_text, "Country aliases, from=to,...");
  labels->add_option("--drop", drop_text, "Country or industry codes to drop, comma-separated");

  // tune
  auto* tune = app.add_subcommand("tune", "Grid search over the four thresholds");
  std::string labels_path, grid_text = "1:6:0.5";
  std::size_t checkpoint_every = 0;
  tune->add_option("--table", table_path, "Specialization table CSV")->required();
  tune->add_option("--labels", labels_path, "Label matrix CSV")->required();
  tune->add_option("--grid", grid_text, "lo:hi:step, applied to every threshold");
  tune->add_option("--n", n, "Candidate list length");
  tune->add_option("--k", k, "Inputs emitted per product");
  tune->add_option("--missing-rank", missing_rank)->check(CLI::IsMember({"observed", "n"}));
  tune->add_option("--checkpoint-every", checkpoint_every, "Write partial results every N evaluations");

  // allocate
  auto* alloc = app.add_subcommand("allocate", "Link set + bilateral flows -> region-to-region flows");
  std::string links_path, exports_path, imports_path, regions_path, format = "jsonl";
  bool renormalize = false;
  alloc->add_option("--links", links_path, "Link set JSONL")->required();
  alloc->add_option("--table", table_path, "Trade table with regional exports")->required();
  alloc->add_option("--exports", exports_path, "CSV region,product,country,usd")->required();
  alloc->add_option("--imports", imports_path, "CSV country,product,region,usd")->required();
  alloc->add_option("--regions", regions_path, "CSV region,country")->required();
  alloc->add_option("--format", format)->check(CLI::IsMember({"jsonl", "csv"}));
  alloc->add_flag("--renormalize", renormalize, "Normalize destination shares over linked products");

  // bench
  auto* bench = app.add_subcommand("bench", "Synthetic worlds or a truth file vs. the random baseline");
  std::uint64_t seed = 1;
  std::size_t seeds = 20;
  SynthWorldConfig synth;
  synth.noise = 0.3;
  std::string truth_path, pred_path, filter_path;
  bench->add_option("--seed", seed, "First seed");
  bench->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  bench->add_option("--regions", synth.regions);
  bench->add_option("--products", synth.products);
  bench->add_option("--links", synth.planted_links, "Planted links per world");
  bench->add_option("--strength", synth.strength);
  bench->add_option("--noise", synth.noise, "Log-normal sigma");
  bench->add_option("--params", params_text);
  bench->add_option("--n", n);
  bench->add_option("--k", k);
  bench->add_option("--truth", truth_path, "Truth CSV output,input (scores --pred instead of synthetic worlds)");
  bench->add_option("--pred", pred_path, "Link set JSONL to score against --truth");
  bench->add_option("--table", table_path, "Table defining the product universe for --pred");
  bench->add_option("--product-filter", filter_path, "Restrict scored outputs to these products, one per line");

  // export-graph
  auto* graph = app.add_subcommand("export-graph", "Link set -> DOT + edge list");
  graph->add_option("--links", links_path, "Link set JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const MissingRank rule = missing_rank == "n" ? MissingRank::list_length : MissingRank::observed;

    if (*ingest) {
      ColumnMapping schema;
      for (const auto& o : column_overrides) {
        auto kv = split(o, '=');
        if (kv.size() != 2) throw Error("--column expects field=header");
        std::string* field = kv[0] == "geography" ? &schema.geography
                             : kv[0] == "product" ? &schema.product
                             : kv[0] == "value_imp" ? &schema.value_imp
                             : kv[0] == "value_exp" ? &schema.value_exp
                             : kv[0] == "year" ? &schema.year
                                               : nullptr;
        if (!field) throw Error("unknown field '" + kv[0] + "' in --column");
        *field = kv[1];
      }
      std::vector<RawTradeRecord> raw;
      for (const auto& path : ingest_inputs) {
        auto in = open_in(path);
        try {
          auto part = read_raw_trade(in, schema);
          raw.insert(raw.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        } catch (const ParseError& e) {
          throw Error(path + ": " + e.what());
        }
      }
      CleaningPolicy policy;
      if (!exclude_file.empty()) policy.excluded_geographies = read_name_list(exclude_file);
      policy.import_floor = import_floor;
      policy.export_floor = export_floor;
      policy.rule = tail_rule == "both" ? TailRule::both : TailRule::either;
      TradeTable t = TradeTable::aggregate(std::move(raw));
      const std::size_t before = t.geographies().size();
      TradeTable cleaned = single_pass ? reconcile_products(filter_regions(t, policy)) : clean_trade_table(t, policy);
      auto dir = prepare_dir(out_dir);
      auto f = open_out(dir / "trade_table.csv");
      write_trade_table(f, cleaned);
      out << "regions " << before << " -> " << cleaned.geographies().size() << ", products "
          << cleaned.products().size() << ", records " << cleaned.records().size() << "\n";
    } else if (*rca) {
      auto s = load_table(table_path);
      auto dir = prepare_dir(out_dir);
      auto f = open_out(dir / "specialization.csv");
      write_specialization(f, s);
      out << "locations " << s.location_count() << ", products " << s.product_count() << "\n";
    } else if (*infer) {
      ParamSet p = parse_params(params_text);
      p.n = n;
      p.k = k;
      p.missing_rank = rule;
      auto s = load_table(table_path);
      LinkSet links = infer_all(s, p, jobs);
      auto dir = prepare_dir(out_dir);
      auto j = open_out(dir / "links.jsonl");
      write_links_jsonl(j, links);
      auto c = open_out(dir / "links.csv");
      write_links_edge_csv(c, links);
      auto d = open_out(dir / "links.dot");
      write_links_dot(d, links);
      out << "links " << links.links.size() << " over " << s.product_count() << " products\n";
    } else if (*labels) {
      std::vector<IcioTensor> years;
      for (const auto& path : icio_inputs) {
        auto in = open_in(path);
        try {
          years.push_back(read_icio(in));
        } catch (const ParseError& e) {
          throw Error(path + ": " + e.what());
        }
      }
      IcioCleaning cfg;
      cfg.merge_countries.clear();
      for (const auto& m : split(merge_text, ',')) {
        if (m.empty()) continue;
        auto kv = split(m, '=');
        if (kv.size() != 2) throw Error("--merge expects from=to pairs");
        cfg.merge_countries[kv[0]] = kv[1];
      }
      cfg.drop_codes.clear();
      for (const auto& d : split(drop_text, ',')) {
        if (!d.empty()) cfg.drop_codes.push_back(d);
      }
      IcioCleanReport report;
      IcioTensor cleaned = clean_icio(sum_icio(years), cfg, &report);
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      auto flows = industry_flows(cleaned);
      IndustryMatrix ti{flows.industries, trade_intensity(flows.values)};
      LabelMatrix lm = binarize_ti(ti);
      auto s = icio_specialization(cleaned);
      auto dir = prepare_dir(out_dir);
      auto lf = open_out(dir / "labels.csv");
      write_labels(lf, lm);
      auto tf = open_out(dir / "trade_intensity.csv");
      write_industry_matrix(tf, ti);
      auto sf = open_out(dir / "icio_table.csv");
      write_specialization(sf, s);
      out << "tensor " << cleaned.codes.size() << "x" << cleaned.codes.size() << " (" << report.countries
          << " countries x " << report.industries << " industries), labels " << lm.size() << "x" << lm.size()
          << " with " << lm.ones() << " ones\n";
    } else if (*tune) {
      auto s = load_table(table_path);
      auto lin = open_in(labels_path);
      LabelMatrix lm = read_labels(lin);
      GridSpec grid = parse_grid(grid_text);
      auto dir = prepare_dir(out_dir);
      GridOptions opts;
      opts.jobs = jobs;
      opts.missing_rank = rule;
      opts.checkpoint_every = checkpoint_every;
      opts.checkpoint_path = (dir / "leaderboard.partial.csv").string();
      auto results = grid_search(s, lm, grid, n, k, opts);
      auto f = open_out(dir / "leaderboard.csv");
      write_leaderboard(f, results);
      const auto& best = results.front();
      out << "evaluated " << results.size() << " parameter sets\n"
          << "best " << describe(best.params) << " precision " << format_double(best.score.precision) << " (tp "
          << best.score.true_positives << ", fp " << best.score.false_positives << ")\n";
    } else if (*alloc) {
      auto lin = open_in(links_path);
      LinkSet links = read_links_jsonl(lin);
      auto s = load_table(table_path);
      BilateralFlowTable flows;
      {
        auto in = open_in(exports_path);
        flows.exports_to_country = read_region_exports(in);
      }
      {
        auto in = open_in(imports_path);
        flows.imports_from_country = read_region_imports(in);
      }
      {
        auto in = open_in(regions_path);
        flows.region_country = read_region_countries(in);
      }
      auto dir = prepare_dir(out_dir);
      auto f = open_out(dir / (format == "csv" ? "allocation.csv" : "allocation.jsonl"));
      if (format == "csv") write_allocation_csv_header(f);
      AllocationOptions opts;
      opts.renormalize = renormalize;
      opts.jobs = jobs;
      auto report = allocate(
          links, flows, s,
          [&](const AllocationEntry& e) {
            if (format == "csv") write_allocation_csv(f, e);
            else write_allocation_jsonl(f, e);
          },
          opts);
      out << "entries " << report.entries << ", unallocated import groups " << report.skipped_groups << " ("
          << format_double(report.skipped_usd) << " usd)\n";
    } else if (*bench) {
      std::optional<std::set<std::string>> filter;
      if (!filter_path.empty()) {
        auto names = read_name_list(filter_path);
        filter.emplace(names.begin(), names.end());
      }
      std::vector<std::pair<std::string, HitRates>> rows;
      if (!truth_path.empty()) {
        if (pred_path.empty()) throw Error("--truth needs --pred");
        auto tin = open_in(truth_path);
        LinkSet truth = read_truth_csv(tin);
        auto pin = open_in(pred_path);
        LinkSet pred = read_links_jsonl(pin);
        if (!table_path.empty()) pred.products = load_table(table_path).products();
        std::set<std::string> universe(pred.products.begin(), pred.products.end());
        for (const auto& l : truth.links) universe.insert(l.input);
        std::vector<HitRates> base;
        for (std::size_t i = 0; i < seeds; ++i) {
          base.push_back(hit_rates(random_baseline({universe.begin(), universe.end()}, k, seed + i), truth, filter));
        }
        HitRates b;
        for (const auto& h : base) add_rates(b, h);
        rows.push_back({"B", mean_rates(b, base.size())});
        rows.push_back({"BF", hit_rates(pred, truth, filter)});
      } else {
        ParamSet p = parse_params(params_text);
        p.n = n;
        p.k = k;
        HitRates bf, base;
        double rec = 0.0;
        for (std::size_t i = 0; i < seeds; ++i) {
          synth.seed = seed + i;
          SynthWorld w = synth_world(synth);
          auto s = SpecializationTable::from_trade(w.table);
          LinkSet pred = infer_all(s, p, jobs);
          add_rates(bf, hit_rates(pred, w.truth, filter));
          add_rates(base, hit_rates(random_baseline(s.products(), k, synth.seed), w.truth, filter));
          rec += recovery(pred, w.truth);
        }
        rows.push_back({"B", mean_rates(base, seeds)});
        rows.push_back({"BF", mean_rates(bf, seeds)});
        rec /= static_cast<double>(seeds);
        out << "planted-link recovery " << format_double(rec) << " over " << seeds << " seeds\n";
      }
      auto dir = prepare_dir(out_dir);
      auto f = open_out(dir / "bench.csv");
      write_hit_rate_report(f, rows);
      write_hit_rate_report(out, rows);
    } else if (*graph) {
      auto lin = open_in(links_path);
      LinkSet links = read_links_jsonl(lin);
      auto dir = prepare_dir(out_dir);
      auto d = open_out(dir / "graph.dot");
      write_links_dot(d, links);
      auto c = open_out(dir / "edges.csv");
      write_links_edge_csv(c, links);
      out << "nodes " << links.products.size() << ", edges " << links.links.size() << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace vchain::cli

#endif  // VCHAIN_CLI_HPP
