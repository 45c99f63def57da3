#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crowdcast/auction.hpp"
#include "crowdcast/coverage.hpp"
#include "crowdcast/diffusion.hpp"
#include "crowdcast/graph.hpp"

namespace crowdcast {

/// Synthetic-graph settings used when no dataset file is given.
struct SyntheticGraphConfig {
  std::string model = "preferential";  // "preferential" | "uniform"
  std::int32_t nodes = 0;
  std::int32_t edges_per_node = 3;  // preferential attachment
  std::int32_t edges = 0;           // uniform model
};

/// Experiment definition; loadable from a JSON file (see README for the
/// schema and configs/ for a worked example).
struct ExperimentConfig {
  std::string dataset;  // edge-list path; empty means synthetic
  std::optional<SyntheticGraphConfig> synthetic;

  double registered_fraction = 0.2;
  std::vector<double> task_probabilities;
  double area_side = 1000.0;
  double block_side = 100.0;
  std::vector<double> budgets;
  std::vector<std::string> algorithms;
  std::uint64_t seed = 1;
  std::int32_t trials = 1;
  std::int64_t mc_standard_sims = 2000;
  std::int64_t mc_greedy_sims = 500;
  double epsilon = 0.1;
  double delta = 0.1;
  int threads = 1;
  bool singleton_comparison = true;
  /// Price winners on a freshly sampled collection instead of the selection
  /// collection (sensitivity experiments only; breaks exact criticality).
  bool payment_fresh_collection = false;
  std::optional<std::uint64_t> quality_seed;
  std::optional<std::uint64_t> location_seed;

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;
};

/// The names run_baseline accepts.
extern const std::vector<std::string> kAlgorithmNames;

/// One fully materialized instance: diffusion model plus auction side.
struct Scenario {
  TaskGraph graph;
  BidderProfile bidders;
  PrivateCosts costs;
};

/// Deterministic function of (config, seed): loads or generates the graph,
/// synthesizes layers/locations/qualities, samples the registered users,
/// their claims (50% per task, redrawn while empty) and bids
/// (claimed-task count times a unit bid uniform in [0.8, 1.2]; private cost
/// equals the bid).
Scenario build_scenario(const ExperimentConfig& config, std::uint64_t seed);

struct RunRecord {
  std::string algorithm;
  double budget = 0.0;
  std::uint64_t seed = 0;
  double f_standard = 0.0;   ///< 2000-sim Monte Carlo value of the final set
  double f_estimated = 0.0;  ///< the algorithm's own objective estimate (NaN if none)
  std::int32_t set_size = 0;
  double millis = 0.0;
  std::vector<std::int32_t> seeds_selected;  ///< bidder indices (not serialized)
};

/// Extra artifacts produced by the sampling pipeline cells.
struct CellArtifacts {
  std::vector<SamplingRound> rounds;
  std::optional<AuctionOutcome> auction;
};

/// Runs one algorithm cell and scores its seed set with the shared standard
/// evaluator. Valid names: greedy, modified-opimc, greedy-im, opim-c,
/// max-degree, random.
RunRecord run_baseline(const std::string& name, const Scenario& scenario,
                       double budget, const ExperimentConfig& config,
                       std::uint64_t seed, CellArtifacts* artifacts = nullptr);

struct PropertyCount {
  std::string name;
  std::int64_t pass = 0;
  std::int64_t fail = 0;
};

struct SuiteResult {
  std::vector<RunRecord> records;
  std::vector<PropertyCount> properties;
  bool any_property_failed = false;
};

/// Executes every (algorithm x budget x trial) cell and writes
/// run_records.csv, estimation_gap.csv, properties_report.csv, summary.txt
/// and per-cell auction_outcomes.csv / opimc_rounds.csv under out_dir.
/// Returns nonzero iff any property check failed.
int run_suite(const ExperimentConfig& config, const std::string& out_dir,
              SuiteResult* result = nullptr);

/// Standalone property verification (the checks behind properties_report):
/// individual rationality, bid-sum budget feasibility, estimator
/// monotonicity/submodularity on random triples, and estimator agreement
/// with the Monte Carlo standard value on random feasible sets.
int verify_properties(const ExperimentConfig& config,
                      const std::string& out_csv,
                      std::vector<PropertyCount>* out = nullptr);

/// Rewrites an edge list with arbitrary nonnegative integer ids into dense
/// 0-based ids (first-seen order), emitting "external internal" lines to the
/// id-map sidecar. Returns (nodes, edges).
std::pair<std::int64_t, std::int64_t> ingest_edge_list(std::istream& in,
                                                       std::ostream& dense_out,
                                                       std::ostream& idmap_out);

/// Detailed single-auction outcome in CSV form:
/// user_id, won, bid, payment, critical_trace_max, utility_if_truthful.
void write_auction_csv(std::ostream& out, const Scenario& scenario,
                       const AuctionOutcome& outcome);

/// Locale-independent shortest-round-trip double formatting used by every
/// CSV writer (byte-identical reruns are part of the contract).
std::string format_double(double v);

}  // namespace crowdcast
