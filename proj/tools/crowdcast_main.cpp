// Command-line front end: scenario ingestion and synthesis, experiment
// batches, single auctions, property verification, and report generation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crowdcast/harness.hpp"

namespace fs = std::filesystem;
using namespace crowdcast;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig load_config(const CommonFlags& flags) {
  ExperimentConfig config = ExperimentConfig::from_json_file(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.threads) config.threads = *flags.threads;
  return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--threads", flags.threads, "worker thread override");
}

int cmd_ingest(const std::string& edges, const std::string& out,
               const std::string& idmap) {
  std::ifstream in(edges);
  if (!in) {
    std::cerr << "error: cannot open edge list: " << edges << "\n";
    return 1;
  }
  std::ofstream dense(out), map(idmap);
  if (!dense || !map) {
    std::cerr << "error: cannot open output files\n";
    return 1;
  }
  const auto [nodes, count] = ingest_edge_list(in, dense, map);
  std::cout << "ingested " << count << " edges over " << nodes
            << " nodes -> " << out << " (id map: " << idmap << ")\n";
  return 0;
}

int cmd_synth(const CommonFlags& flags, const std::string& out_dir) {
  const ExperimentConfig config = load_config(flags);
  const Scenario scenario = build_scenario(config, config.seed);
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "locations.csv");
    out << "node,x,y,subarea\n";
    for (NodeId v = 0; v < scenario.graph.node_count(); ++v)
      out << v << ',' << format_double(scenario.graph.location_x(v)) << ','
          << format_double(scenario.graph.location_y(v)) << ','
          << scenario.graph.location_of(v) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "qualities.csv");
    out << "task,subarea,quality\n";
    for (TaskId j = 0; j < scenario.graph.task_count(); ++j)
      for (std::int32_t a = 0; a < scenario.graph.grid().subarea_count(); ++a)
        out << j << ',' << a << ',' << format_double(scenario.graph.quality(j, a))
            << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "bidders.csv");
    out << "user,claims_mask,claimed_tasks,bid\n";
    const auto& b = scenario.bidders;
    for (std::size_t i = 0; i < b.size(); ++i)
      out << b.users[i] << ',' << b.claims[i] << ',' << b.claimed_count(i) << ','
          << format_double(b.bids[i]) << '\n';
  }
  std::cout << "scenario: " << scenario.graph.node_count() << " nodes, "
            << scenario.graph.edge_count() << " edges, "
            << scenario.graph.task_count() << " tasks, "
            << scenario.bidders.size() << " registered users -> " << out_dir
            << "\n";
  return 0;
}

int cmd_run(const CommonFlags& flags, const std::string& out_dir) {
  const ExperimentConfig config = load_config(flags);
  SuiteResult result;
  const int rc = run_suite(config, out_dir, &result);
  std::cout << result.records.size() << " cells -> " << out_dir << "\n";
  for (const auto& p : result.properties)
    std::cout << p.name << ": " << p.pass << " pass, " << p.fail << " fail\n";
  if (rc != 0) std::cerr << "property checks FAILED\n";
  return rc;
}

int cmd_auction(const CommonFlags& flags, double budget,
                const std::string& out_file) {
  ExperimentConfig config = load_config(flags);
  const Scenario scenario = build_scenario(config, config.seed);
  const std::int32_t k = compute_cardinality_bound(scenario.bidders.bids, budget);
  const SamplingResult sampled =
      modified_opimc(scenario.graph, scenario.bidders, k, config.epsilon,
                     config.delta, config.seed, config.threads);
  const AuctionOutcome outcome =
      run_auction(sampled.primary, scenario.bidders, budget);

  std::ofstream out(out_file);
  if (!out) {
    std::cerr << "error: cannot write " << out_file << "\n";
    return 1;
  }
  write_auction_csv(out, scenario, outcome);
  std::cout << outcome.winners.size() << " winners, bid total "
            << format_double(outcome.bid_total) << ", payment total "
            << format_double(outcome.payment_total) << ", overpayment ratio "
            << (outcome.winners.empty() ? "n/a"
                                        : format_double(outcome.overpayment_ratio))
            << "\n";
  return 0;
}

int cmd_verify(const CommonFlags& flags, const std::string& out_csv) {
  const ExperimentConfig config = load_config(flags);
  std::vector<PropertyCount> rows;
  const int rc = verify_properties(config, out_csv, &rows);
  for (const auto& p : rows)
    std::cout << p.name << ": " << p.pass << " pass, " << p.fail << " fail\n";
  std::cout << (rc == 0 ? "all property checks passed\n"
                        : "property checks FAILED\n");
  return rc;
}

// Post-processing over an existing run_records.csv: per-budget estimation gap
// for the sampling pipeline and a mean-value table per algorithm.
int cmd_report(const std::string& in_csv, const std::string& out_dir) {
  std::ifstream in(in_csv);
  if (!in) {
    std::cerr << "error: cannot open " << in_csv << "\n";
    return 1;
  }
  std::string header;
  std::getline(in, header);
  if (header != "algorithm,budget,seed,f_standard,f_estimated,set_size,ms") {
    std::cerr << "error: unexpected run_records schema\n";
    return 1;
  }

  struct Cell {
    double std_sum = 0.0, est_sum = 0.0;
    std::int64_t n = 0, n_est = 0;
  };
  std::map<std::pair<std::string, double>, Cell> cells;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string alg, field;
    std::getline(ss, alg, ',');
    std::getline(ss, field, ',');
    const double budget = std::stod(field);
    std::getline(ss, field, ',');  // seed
    std::getline(ss, field, ',');
    const double f_standard = std::stod(field);
    std::getline(ss, field, ',');
    const bool has_est = !field.empty();
    const double f_estimated = has_est ? std::stod(field) : 0.0;
    auto& cell = cells[{alg, budget}];
    cell.std_sum += f_standard;
    cell.n++;
    if (has_est) {
      cell.est_sum += f_estimated;
      cell.n_est++;
    }
  }

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "estimation_gap.csv");
    out << "budget,f_estimated,f_standard,gap,relative_gap\n";
    for (const auto& [key, cell] : cells) {
      if (key.first != "modified-opimc" || cell.n_est == 0) continue;
      const double est = cell.est_sum / double(cell.n_est);
      const double stand = cell.std_sum / double(cell.n);
      out << format_double(key.second) << ',' << format_double(est) << ','
          << format_double(stand) << ',' << format_double(est - stand) << ','
          << format_double(stand != 0.0 ? (est - stand) / stand : 0.0) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "mean_values.csv");
    out << "algorithm,budget,mean_f_standard,cells\n";
    for (const auto& [key, cell] : cells)
      out << key.first << ',' << format_double(key.second) << ','
          << format_double(cell.std_sum / double(cell.n)) << ',' << cell.n
          << '\n';
  }
  std::cout << "report -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seed-worker selection and pricing for multi-task diffusion"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_edges, ingest_out, ingest_map;
  auto* ingest = app.add_subcommand(
      "ingest", "remap an edge list with sparse ids to dense 0-based ids");
  ingest->add_option("--edges", ingest_edges, "input edge list")->required();
  ingest->add_option("--out", ingest_out, "dense edge list output")->required();
  ingest->add_option("--id-map", ingest_map, "id map sidecar output")->required();

  // synth
  CommonFlags synth_flags;
  std::string synth_out;
  auto* synth = app.add_subcommand(
      "synth", "materialize a scenario (locations, qualities, bidders)");
  add_common(synth, synth_flags);
  synth->add_option("--out", synth_out, "output directory")->required();

  // run
  CommonFlags run_flags;
  std::string run_out;
  auto* run = app.add_subcommand("run", "run the experiment suite");
  add_common(run, run_flags);
  run->add_option("--out", run_out, "output directory")->required();

  // auction
  CommonFlags auction_flags;
  double auction_budget = 0.0;
  std::string auction_out;
  auto* auction =
      app.add_subcommand("auction", "run one auction and dump its outcome");
  add_common(auction, auction_flags);
  auction->add_option("--budget", auction_budget, "budget")->required();
  auction->add_option("--out", auction_out, "outcome CSV path")->required();

  // verify
  CommonFlags verify_flags;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "run the property checks");
  add_common(verify, verify_flags);
  verify->add_option("--out", verify_out, "properties report CSV path")
      ->required();

  // report
  std::string report_in, report_out;
  auto* report =
      app.add_subcommand("report", "summarize an existing run_records.csv");
  report->add_option("--in", report_in, "run_records.csv path")->required();
  report->add_option("--out", report_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_edges, ingest_out, ingest_map);
    if (synth->parsed()) return cmd_synth(synth_flags, synth_out);
    if (run->parsed()) return cmd_run(run_flags, run_out);
    if (auction->parsed())
      return cmd_auction(auction_flags, auction_budget, auction_out);
    if (verify->parsed()) return cmd_verify(verify_flags, verify_out);
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
