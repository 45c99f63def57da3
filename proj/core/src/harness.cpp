#include "crowdcast/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include "crowdcast/generators.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kAlgorithmNames = {
    "greedy", "modified-opimc", "greedy-im", "opim-c", "max-degree", "random"};

namespace {

// Substream tags.
constexpr std::uint64_t kUserStream = 0x757372;     // "usr"
constexpr std::uint64_t kClaimStream = 0x636c6d;    // "clm"
constexpr std::uint64_t kBidStream = 0x626964;      // "bid"
constexpr std::uint64_t kStdEvalStream = 0x657674;  // "evt"
constexpr std::uint64_t kCellStream = 0x63656c;     // "cel"
constexpr std::uint64_t kPropStream = 0x707270;     // "prp"
constexpr std::uint64_t kPayStream = 0x706179;      // "pay"

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    SyntheticGraphConfig g;
    if (s.contains("model")) g.model = s.at("model").get<std::string>();
    g.nodes = s.at("nodes").get<std::int32_t>();
    if (s.contains("edges_per_node"))
      g.edges_per_node = s.at("edges_per_node").get<std::int32_t>();
    if (s.contains("edges")) g.edges = s.at("edges").get<std::int32_t>();
    c.synthetic = g;
  }
  if (j.contains("registered_fraction"))
    c.registered_fraction = j.at("registered_fraction").get<double>();
  c.task_probabilities = j.at("tasks").get<std::vector<double>>();
  if (j.contains("area_side")) c.area_side = j.at("area_side").get<double>();
  if (j.contains("block_side")) c.block_side = j.at("block_side").get<double>();
  c.budgets = j.at("budgets").get<std::vector<double>>();
  c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) c.trials = j.at("trials").get<std::int32_t>();
  if (j.contains("mc_standard_sims"))
    c.mc_standard_sims = j.at("mc_standard_sims").get<std::int64_t>();
  if (j.contains("mc_greedy_sims"))
    c.mc_greedy_sims = j.at("mc_greedy_sims").get<std::int64_t>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("singleton_comparison"))
    c.singleton_comparison = j.at("singleton_comparison").get<bool>();
  if (j.contains("payment_fresh_collection"))
    c.payment_fresh_collection = j.at("payment_fresh_collection").get<bool>();
  if (j.contains("quality_seed"))
    c.quality_seed = j.at("quality_seed").get<std::uint64_t>();
  if (j.contains("location_seed"))
    c.location_seed = j.at("location_seed").get<std::uint64_t>();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (dataset.empty() && !synthetic)
    throw std::invalid_argument("config needs a dataset path or a synthetic block");
  if (!(registered_fraction > 0.0 && registered_fraction <= 1.0))
    throw std::invalid_argument("registered_fraction must lie in (0,1]");
  if (task_probabilities.empty() || task_probabilities.size() > 4)
    throw std::invalid_argument("tasks must list 1 to 4 per-task probabilities");
  for (double p : task_probabilities)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("task probabilities must lie in [0,1]");
  if (budgets.empty()) throw std::invalid_argument("budget schedule is empty");
  for (double d : budgets)
    if (!(d > 0.0)) throw std::invalid_argument("budgets must be positive");
  if (algorithms.empty()) throw std::invalid_argument("no algorithms selected");
  for (const auto& a : algorithms)
    if (std::find(kAlgorithmNames.begin(), kAlgorithmNames.end(), a) ==
        kAlgorithmNames.end())
      throw std::invalid_argument("unknown algorithm: " + a);
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (mc_standard_sims < 1 || mc_greedy_sims < 1)
    throw std::invalid_argument("simulation counts must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("epsilon and delta must lie in (0,1)");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (synthetic) {
    if (synthetic->model != "preferential" && synthetic->model != "uniform")
      throw std::invalid_argument("synthetic.model must be preferential or uniform");
    if (synthetic->nodes < 2)
      throw std::invalid_argument("synthetic.nodes must be at least 2");
  }
}

// ---------------------------------------------------------------------------
// Scenario assembly
// ---------------------------------------------------------------------------

Scenario build_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  GraphSkeleton skeleton;
  if (!config.dataset.empty()) {
    skeleton = load_edge_list_file(config.dataset);
  } else {
    const auto& s = *config.synthetic;
    skeleton = s.model == "uniform"
                   ? uniform_random_graph(s.nodes, s.edges, seed)
                   : preferential_attachment_graph(s.nodes, s.edges_per_node, seed);
  }

  ScenarioParams params;
  params.area_side = config.area_side;
  params.block_side = config.block_side;
  params.task_probabilities = config.task_probabilities;
  params.quality_seed = config.quality_seed;
  params.location_seed = config.location_seed;
  TaskGraph graph = synthesize_scenario(std::move(skeleton), params, seed);

  const std::int32_t n = graph.node_count();
  const std::int32_t n_tasks = graph.task_count();
  std::int32_t n_reg =
      std::int32_t(std::llround(config.registered_fraction * double(n)));
  n_reg = std::clamp(n_reg, 1, n);

  // Registered users: partial Fisher-Yates, then sorted for canonical order.
  Rng user_rng = Rng::substream(seed, kUserStream);
  std::vector<NodeId> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (std::int32_t i = 0; i < n_reg; ++i) {
    const auto j = i + std::int64_t(user_rng.below(std::uint64_t(n - i)));
    std::swap(pool[std::size_t(i)], pool[std::size_t(j)]);
  }
  std::vector<NodeId> users(pool.begin(), pool.begin() + n_reg);
  std::sort(users.begin(), users.end());

  // Claims: each task with probability 1/2, redrawn while empty; the whole
  // block is redrawn if some task ends up claimed by nobody.
  Rng claim_rng = Rng::substream(seed, kClaimStream);
  std::vector<std::uint32_t> claims(static_cast<std::size_t>(n_reg));
  const std::uint32_t all_tasks = (1u << n_tasks) - 1u;
  for (int attempt = 0;; ++attempt) {
    std::uint32_t seen = 0;
    for (auto& mask : claims) {
      do {
        mask = 0;
        for (std::int32_t j = 0; j < n_tasks; ++j)
          if (claim_rng.bernoulli(0.5)) mask |= 1u << j;
      } while (mask == 0);
      seen |= mask;
    }
    if (seen == all_tasks) break;
    if (attempt > 1000)
      throw std::runtime_error(
          "could not draw claims covering every task; too few registered users");
  }

  Rng bid_rng = Rng::substream(seed, kBidStream);
  std::vector<double> bids(static_cast<std::size_t>(n_reg));
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const double unit = bid_rng.uniform(0.8, 1.2);
    bids[i] = double(__builtin_popcount(claims[i])) * unit;
  }

  Scenario scenario{std::move(graph),
                    BidderProfile{std::move(users), std::move(claims), bids},
                    PrivateCosts{bids}};
  scenario.bidders.validate(scenario.graph.node_count(), n_tasks);
  return scenario;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

namespace {

/// Single-layer scenario for the influence-only baselines: edge weights are
/// averaged across tasks, every subarea has quality 1 (so the objective is
/// the plain expected activation count), every bidder claims the one task.
Scenario collapse_to_influence(const Scenario& scenario) {
  const TaskGraph& g = scenario.graph;
  std::vector<std::vector<double>> weights(1);
  weights[0].resize(std::size_t(g.edge_count()));
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    double sum = 0.0;
    for (TaskId j = 0; j < g.task_count(); ++j) sum += g.edge_weight(j, e);
    weights[0][std::size_t(e)] = sum / double(g.task_count());
  }
  std::vector<double> xs(std::size_t(g.node_count())), ys(xs);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    xs[std::size_t(v)] = g.location_x(v);
    ys[std::size_t(v)] = g.location_y(v);
  }
  std::vector<std::vector<double>> quality(
      1, std::vector<double>(std::size_t(g.grid().subarea_count()), 1.0));
  TaskGraph collapsed(g.skeleton(), std::move(weights), std::move(xs),
                      std::move(ys), g.grid(), std::move(quality));

  BidderProfile bidders = scenario.bidders;
  std::fill(bidders.claims.begin(), bidders.claims.end(), 1u);
  return Scenario{std::move(collapsed), std::move(bidders), scenario.costs};
}

/// Hill climbing on Monte Carlo estimates with CELF reuse of stale gains.
/// Candidates within one step share the simulation substreams (common random
/// numbers), so their marginals are directly comparable. `ratio_divisors`
/// scales each bidder's bid for the selection ratio only; the budget always
/// uses the real bids.
std::vector<std::int32_t> mc_ratio_greedy(const Scenario& scenario,
                                          std::span<const double> ratio_divisors,
                                          double budget, std::int64_t sims,
                                          std::uint64_t seed, int threads) {
  const auto& bidders = scenario.bidders;
  const std::size_t n = bidders.size();

  struct Entry {
    // Stale gains must upper-bound fresh ones for the lazy evaluation to be
    // sound, so everything starts at infinity and is measured in step 0.
    double gain = std::numeric_limits<double>::infinity();
    std::int32_t step = -1;  // step whose prefix the gain was measured against
  };
  std::vector<Entry> cache(n);
  std::vector<std::int32_t> picked;
  std::vector<char> in_set(n, 0);
  double spent = 0.0;
  double current_value = 0.0;
  std::int32_t step = 0;

  while (picked.size() < n) {
    const std::uint64_t step_seed = hash_streams(seed, 0x6d6367 /* "mcg" */,
                                                 std::uint64_t(step));
    std::vector<std::int32_t> trial_set(picked);
    trial_set.push_back(0);

    std::int32_t best = -1;
    double best_gain = 0.0;
    while (true) {
      // Freshest cached ratio first; recompute if it predates this step.
      std::int32_t top = -1;
      double top_ratio = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        if (in_set[b]) continue;
        const double r = cache[b].gain / ratio_divisors[b];
        if (top < 0 || r > top_ratio ||
            (r == top_ratio && bidders.users[b] < bidders.users[std::size_t(top)])) {
          top = std::int32_t(b);
          top_ratio = r;
        }
      }
      if (top < 0) break;
      if (cache[std::size_t(top)].step == step) {
        if (cache[std::size_t(top)].gain > 0.0) {
          best = top;
          best_gain = cache[std::size_t(top)].gain;
        }
        break;
      }
      trial_set.back() = top;
      const double value =
          mc_estimate(scenario.graph, trial_set, bidders, sims, step_seed, threads)
              .mean;
      cache[std::size_t(top)] = {value - current_value, step};
    }
    if (best < 0 || best_gain <= 0.0) break;
    if (spent + bidders.bids[std::size_t(best)] > budget) break;

    picked.push_back(best);
    in_set[std::size_t(best)] = 1;
    spent += bidders.bids[std::size_t(best)];
    ++step;
    const std::uint64_t value_seed = hash_streams(seed, 0x6d6367,
                                                  std::uint64_t(step));
    current_value =
        mc_estimate(scenario.graph, picked, bidders, sims, value_seed, threads)
            .mean;
  }
  return picked;
}

std::vector<std::int32_t> max_degree_baseline(const Scenario& scenario,
                                              double budget) {
  const auto& bidders = scenario.bidders;
  std::vector<std::int32_t> order(bidders.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(bidders.size());
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    const double degree = scenario.graph.skeleton().out_degree(bidders.users[b]);
    score[b] = degree * double(bidders.claimed_count(b)) / bidders.bids[b];
  }
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (score[std::size_t(a)] != score[std::size_t(b)])
      return score[std::size_t(a)] > score[std::size_t(b)];
    return bidders.users[std::size_t(a)] < bidders.users[std::size_t(b)];
  });
  std::vector<std::int32_t> picked;
  double spent = 0.0;
  for (std::int32_t b : order) {
    if (spent + bidders.bids[std::size_t(b)] > budget) continue;
    picked.push_back(b);
    spent += bidders.bids[std::size_t(b)];
  }
  return picked;
}

std::vector<std::int32_t> random_baseline(const Scenario& scenario, double budget,
                                          std::uint64_t seed) {
  const auto& bidders = scenario.bidders;
  Rng rng(seed);
  std::vector<std::int32_t> remaining(bidders.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<std::int32_t> picked;
  double spent = 0.0;
  while (true) {
    std::vector<std::int32_t> feasible;
    for (std::int32_t b : remaining)
      if (spent + bidders.bids[std::size_t(b)] <= budget) feasible.push_back(b);
    if (feasible.empty()) break;
    const std::int32_t pick =
        feasible[std::size_t(rng.below(feasible.size()))];
    picked.push_back(pick);
    spent += bidders.bids[std::size_t(pick)];
    remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
  }
  return picked;
}

}  // namespace

RunRecord run_baseline(const std::string& name, const Scenario& scenario,
                       double budget, const ExperimentConfig& config,
                       std::uint64_t seed, CellArtifacts* artifacts) {
  if (std::find(kAlgorithmNames.begin(), kAlgorithmNames.end(), name) ==
      kAlgorithmNames.end())
    throw std::invalid_argument("unknown algorithm: " + name);

  const double start = now_ms();
  const std::uint64_t cell_seed = hash_streams(seed, kCellStream,
                                               std::uint64_t(budget * 1000.0));
  std::vector<std::int32_t> selected;
  double f_estimated = std::numeric_limits<double>::quiet_NaN();

  if (name == "modified-opimc") {
    const std::int32_t k =
        compute_cardinality_bound(scenario.bidders.bids, budget);
    SamplingResult sampled =
        modified_opimc(scenario.graph, scenario.bidders, k, config.epsilon,
                       config.delta, cell_seed, config.threads);
    selected = budgeted_coverage_greedy(sampled.primary, scenario.bidders,
                                        budget, config.singleton_comparison);
    f_estimated = sampled.primary.estimate(selected, scenario.bidders);
    if (artifacts) {
      artifacts->rounds = sampled.rounds;
      if (!config.payment_fresh_collection) {
        artifacts->auction = run_auction(sampled.primary, scenario.bidders, budget);
      } else {
        // Sensitivity mode: select on the primary collection, price on a
        // fresh one of the same size.
        RrCollection pricing(scenario.graph, hash_streams(cell_seed, kPayStream), 9);
        pricing.extend(sampled.primary.size(), config.threads);
        AuctionOutcome outcome;
        outcome.winners = select_winners(sampled.primary, scenario.bidders, budget);
        for (std::int32_t w : outcome.winners) {
          PaymentTrace trace;
          const double p = critical_payment(pricing, scenario.bidders, budget, w,
                                            PaymentRule::budget_capped, &trace);
          outcome.payments.push_back(p);
          outcome.traces.push_back(trace);
          outcome.bid_total += scenario.bidders.bids[std::size_t(w)];
          outcome.payment_total += p;
        }
        outcome.overpayment_ratio =
            outcome.winners.empty()
                ? std::numeric_limits<double>::quiet_NaN()
                : (outcome.payment_total - outcome.bid_total) / outcome.bid_total;
        artifacts->auction = std::move(outcome);
      }
    }
  } else if (name == "greedy") {
    selected = mc_ratio_greedy(scenario, scenario.bidders.bids, budget,
                               config.mc_greedy_sims, cell_seed, config.threads);
    if (!selected.empty())
      f_estimated = mc_estimate(scenario.graph, selected, scenario.bidders,
                                config.mc_greedy_sims,
                                hash_streams(cell_seed, 0x76616c), config.threads)
                        .mean;
  } else if (name == "greedy-im") {
    const Scenario influence = collapse_to_influence(scenario);
    std::vector<double> divisors(scenario.bidders.size());
    for (std::size_t b = 0; b < divisors.size(); ++b)
      divisors[b] = scenario.bidders.bids[b] /
                    double(scenario.bidders.claimed_count(b));
    selected = mc_ratio_greedy(influence, divisors, budget,
                               config.mc_greedy_sims, cell_seed, config.threads);
  } else if (name == "opim-c") {
    const Scenario influence = collapse_to_influence(scenario);
    const std::int32_t k =
        compute_cardinality_bound(scenario.bidders.bids, budget);
    SamplingResult sampled =
        modified_opimc(influence.graph, influence.bidders, k, config.epsilon,
                       config.delta, cell_seed, config.threads);
    // Ratio greedy with task-count-normalized bids; budget on the real bids.
    CoverageState state(sampled.primary, influence.bidders);
    double spent = 0.0;
    while (true) {
      std::int32_t best = -1;
      double best_ratio = 0.0;
      for (std::size_t b = 0; b < influence.bidders.size(); ++b) {
        if (state.is_selected(b)) continue;
        const double g = state.gain(b);
        if (g <= 0.0) continue;
        const double divisor = scenario.bidders.bids[b] /
                               double(scenario.bidders.claimed_count(b));
        const double ratio = g / divisor;
        if (ratio > best_ratio ||
            (ratio == best_ratio && best >= 0 &&
             influence.bidders.users[b] <
                 influence.bidders.users[std::size_t(best)])) {
          best = std::int32_t(b);
          best_ratio = ratio;
        }
      }
      if (best < 0) break;
      if (spent + scenario.bidders.bids[std::size_t(best)] > budget) break;
      state.add(std::size_t(best));
      spent += scenario.bidders.bids[std::size_t(best)];
    }
    selected = state.selected();
  } else if (name == "max-degree") {
    selected = max_degree_baseline(scenario, budget);
  } else if (name == "random") {
    selected = random_baseline(scenario, budget, cell_seed);
  }

  RunRecord record;
  record.algorithm = name;
  record.budget = budget;
  record.seed = seed;
  record.f_estimated = f_estimated;
  record.set_size = std::int32_t(selected.size());
  record.seeds_selected = selected;

  // Fair-comparison rule: one standard evaluator, identical substreams for
  // every algorithm on the same scenario.
  record.f_standard =
      selected.empty()
          ? 0.0
          : mc_estimate(scenario.graph, selected, scenario.bidders,
                        config.mc_standard_sims,
                        hash_streams(seed, kStdEvalStream), config.threads)
                .mean;
  record.millis = now_ms() - start;
  return record;
}

// ---------------------------------------------------------------------------
// Property checks
// ---------------------------------------------------------------------------

namespace {

struct PropertyAccumulator {
  PropertyCount ir{"individual_rationality", 0, 0};
  PropertyCount budget{"bid_sum_within_budget", 0, 0};
  PropertyCount monotone{"estimator_monotonicity", 0, 0};
  PropertyCount submodular{"estimator_submodularity", 0, 0};
  PropertyCount unbiased{"estimator_mc_agreement", 0, 0};

  std::vector<PropertyCount> rows() const {
    return {ir, budget, monotone, submodular, unbiased};
  }
  bool any_failed() const {
    for (const auto& c : rows())
      if (c.fail > 0) return true;
    return false;
  }
};

/// Estimator value and standard error of one seed set on one collection.
std::pair<double, double> estimator_with_se(const RrCollection& rr,
                                            std::span<const std::int32_t> set,
                                            const BidderProfile& bidders) {
  const std::size_t theta = rr.size();
  std::vector<std::uint32_t> claimed_at(std::size_t(rr.graph().node_count()), 0);
  for (std::int32_t b : set)
    claimed_at[std::size_t(bidders.users[std::size_t(b)])] |=
        bidders.claims[std::size_t(b)];
  double sum = 0.0, sq = 0.0;
  for (std::size_t x = 0; x < theta; ++x) {
    const RrSet& s = rr.set(x);
    double value = 0.0;
    for (NodeId v : s.nodes) {
      if (claimed_at[std::size_t(v)] & (1u << s.task)) {
        value = rr.set_weight(x);
        break;
      }
    }
    sum += value;
    sq += value * value;
  }
  const double mean = sum / double(theta);
  const double var =
      theta > 1 ? std::max(0.0, (sq - sum * mean) / double(theta - 1)) : 0.0;
  return {mean, std::sqrt(var / double(theta))};
}

void check_trial_properties(const Scenario& scenario,
                            const ExperimentConfig& config,
                            std::uint64_t trial_seed, PropertyAccumulator& acc) {
  RrCollection rr(scenario.graph, hash_streams(trial_seed, kPropStream), 7);
  rr.extend(2000, config.threads);
  const auto& bidders = scenario.bidders;
  Rng rng = Rng::substream(trial_seed, kPropStream, 1);

  // Monotonicity and submodularity of the estimator on random chains.
  const std::size_t n = bidders.size();
  for (int t = 0; t < 200; ++t) {
    std::vector<std::int32_t> small, large, rest;
    for (std::size_t b = 0; b < n; ++b) {
      const double u = rng.uniform();
      if (u < 0.25) {
        small.push_back(std::int32_t(b));
        large.push_back(std::int32_t(b));
      } else if (u < 0.5) {
        large.push_back(std::int32_t(b));
      } else {
        rest.push_back(std::int32_t(b));
      }
    }
    if (rest.empty()) continue;
    const std::int32_t v = rest[std::size_t(rng.below(rest.size()))];

    const double f_small = rr.estimate(small, bidders);
    const double f_large = rr.estimate(large, bidders);
    (f_small <= f_large + 1e-12 ? acc.monotone.pass : acc.monotone.fail)++;

    std::vector<std::int32_t> small_v(small), large_v(large);
    small_v.push_back(v);
    large_v.push_back(v);
    const double gain_small = rr.estimate(small_v, bidders) - f_small;
    const double gain_large = rr.estimate(large_v, bidders) - f_large;
    (gain_small >= gain_large - 1e-12 ? acc.submodular.pass
                                      : acc.submodular.fail)++;
  }

  // Estimator agreement with the Monte Carlo standard value on random sets.
  const double median_budget = config.budgets[config.budgets.size() / 2];
  for (int t = 0; t < 10; ++t) {
    std::vector<std::int32_t> set;
    double spent = 0.0;
    std::vector<std::int32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < n && set.size() < 32; ++i) {
      const auto j = i + std::size_t(rng.below(std::uint64_t(n - i)));
      std::swap(order[i], order[j]);
      const std::int32_t b = order[i];
      if (spent + bidders.bids[std::size_t(b)] > median_budget) continue;
      set.push_back(b);
      spent += bidders.bids[std::size_t(b)];
    }
    if (set.empty()) continue;
    const auto [f_hat, se_hat] = estimator_with_se(rr, set, bidders);
    const auto mc = mc_estimate(scenario.graph, set, bidders,
                                config.mc_standard_sims,
                                hash_streams(trial_seed, kPropStream, 2, t),
                                config.threads);
    const double tol = 4.0 * std::sqrt(se_hat * se_hat +
                                       mc.standard_error() * mc.standard_error());
    (std::abs(f_hat - mc.mean) <= std::max(tol, 1e-9) ? acc.unbiased.pass
                                                      : acc.unbiased.fail)++;
  }

  // Mechanism checks at the median budget.
  const AuctionOutcome outcome = run_auction(rr, bidders, median_budget);
  double bid_sum = 0.0;
  for (std::size_t i = 0; i < outcome.winners.size(); ++i) {
    const double bid = bidders.bids[std::size_t(outcome.winners[i])];
    bid_sum += bid;
    (outcome.payments[i] >= bid - 1e-9 ? acc.ir.pass : acc.ir.fail)++;
  }
  (bid_sum <= median_budget + 1e-9 ? acc.budget.pass : acc.budget.fail)++;
}

void write_properties_csv(const std::string& path,
                          const std::vector<PropertyCount>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "check,pass,fail\n";
  for (const auto& c : rows)
    out << c.name << ',' << c.pass << ',' << c.fail << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Suite driver
// ---------------------------------------------------------------------------

namespace {

void write_run_records(const std::string& path,
                       const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algorithm,budget,seed,f_standard,f_estimated,set_size,ms\n";
  for (const auto& r : records)
    out << r.algorithm << ',' << format_double(r.budget) << ',' << r.seed << ','
        << format_double(r.f_standard) << ',' << format_double(r.f_estimated)
        << ',' << r.set_size << ',' << format_double(r.millis) << '\n';
}

void write_rounds_csv(const std::string& path,
                      const std::vector<SamplingRound>& rounds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "round,theta,f_hat,f_low,f_up,ratio,ms\n";
  for (const auto& r : rounds)
    out << r.round << ',' << r.theta << ',' << format_double(r.f_hat) << ','
        << format_double(r.f_low) << ',' << format_double(r.f_up) << ','
        << format_double(r.ratio) << ',' << format_double(r.millis) << '\n';
}

void write_cell_auction_csv(const std::string& path, const Scenario& scenario,
                            const AuctionOutcome& outcome) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "user,won,bid,payment,utility\n";
  const auto& bidders = scenario.bidders;
  std::vector<double> payment(bidders.size(), 0.0);
  std::vector<char> won(bidders.size(), 0);
  for (std::size_t i = 0; i < outcome.winners.size(); ++i) {
    payment[std::size_t(outcome.winners[i])] = outcome.payments[i];
    won[std::size_t(outcome.winners[i])] = 1;
  }
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    const double utility =
        won[b] ? payment[b] - scenario.costs.cost[b] : 0.0;
    out << bidders.users[b] << ',' << int(won[b]) << ','
        << format_double(bidders.bids[b]) << ',' << format_double(payment[b])
        << ',' << format_double(utility) << '\n';
  }
}

void write_estimation_gap(const std::string& path,
                          const std::vector<RunRecord>& records,
                          std::span<const double> budgets) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "budget,f_estimated,f_standard,gap,relative_gap\n";
  for (double budget : budgets) {
    double est = 0.0, stand = 0.0;
    std::int64_t count = 0;
    for (const auto& r : records) {
      if (r.algorithm != "modified-opimc" || r.budget != budget) continue;
      if (std::isnan(r.f_estimated)) continue;
      est += r.f_estimated;
      stand += r.f_standard;
      ++count;
    }
    if (count == 0) continue;
    est /= double(count);
    stand /= double(count);
    const double gap = est - stand;
    const double rel = stand != 0.0 ? gap / stand : 0.0;
    out << format_double(budget) << ',' << format_double(est) << ','
        << format_double(stand) << ',' << format_double(gap) << ','
        << format_double(rel) << '\n';
  }
}

void write_summary(const std::string& path, const ExperimentConfig& config,
                   const std::vector<RunRecord>& records,
                   const std::vector<PropertyCount>& properties) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "mean standard value by algorithm and budget (" << config.trials
      << " trial(s))\n\n";
  out << "algorithm";
  for (double d : config.budgets) out << '\t' << format_double(d);
  out << '\n';
  for (const auto& alg : config.algorithms) {
    out << alg;
    for (double d : config.budgets) {
      double sum = 0.0;
      std::int64_t count = 0;
      for (const auto& r : records)
        if (r.algorithm == alg && r.budget == d) {
          sum += r.f_standard;
          ++count;
        }
      out << '\t' << (count ? format_double(sum / double(count)) : "-");
    }
    out << '\n';
  }
  out << "\nproperty checks\n";
  for (const auto& c : properties)
    out << c.name << ": " << c.pass << " pass, " << c.fail << " fail\n";
}

}  // namespace

int run_suite(const ExperimentConfig& config, const std::string& out_dir,
              SuiteResult* result) {
  config.validate();
  if (!config.dataset.empty() && !fs::exists(config.dataset))
    throw std::runtime_error("dataset not found: " + config.dataset);

  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "cells");

  std::vector<Scenario> scenarios;
  scenarios.reserve(std::size_t(config.trials));
  for (std::int32_t t = 0; t < config.trials; ++t)
    scenarios.push_back(build_scenario(config, config.seed + std::uint64_t(t)));

  std::vector<RunRecord> records;
  PropertyAccumulator properties;

  for (std::int32_t t = 0; t < config.trials; ++t) {
    const std::uint64_t trial_seed = config.seed + std::uint64_t(t);
    for (double budget : config.budgets) {
      for (const auto& alg : config.algorithms) {
        CellArtifacts artifacts;
        RunRecord record = run_baseline(alg, scenarios[std::size_t(t)], budget,
                                        config, trial_seed, &artifacts);
        if (alg == "modified-opimc") {
          const std::string cell =
              (fs::path(out_dir) / "cells" /
               ("budget" + format_double(budget) + "_seed" +
                std::to_string(trial_seed)))
                  .string();
          fs::create_directories(cell);
          write_rounds_csv(cell + "/opimc_rounds.csv", artifacts.rounds);
          if (artifacts.auction)
            write_cell_auction_csv(cell + "/auction_outcomes.csv",
                                   scenarios[std::size_t(t)], *artifacts.auction);
        }
        records.push_back(std::move(record));
      }
    }
    check_trial_properties(scenarios[std::size_t(t)], config, trial_seed,
                           properties);
  }

  write_run_records((fs::path(out_dir) / "run_records.csv").string(), records);
  write_estimation_gap((fs::path(out_dir) / "estimation_gap.csv").string(),
                       records, config.budgets);
  write_properties_csv((fs::path(out_dir) / "properties_report.csv").string(),
                       properties.rows());
  write_summary((fs::path(out_dir) / "summary.txt").string(), config, records,
                properties.rows());

  if (result) {
    result->records = records;
    result->properties = properties.rows();
    result->any_property_failed = properties.any_failed();
  }
  return properties.any_failed() ? 1 : 0;
}

int verify_properties(const ExperimentConfig& config, const std::string& out_csv,
                      std::vector<PropertyCount>* out) {
  config.validate();
  if (!config.dataset.empty() && !fs::exists(config.dataset))
    throw std::runtime_error("dataset not found: " + config.dataset);

  PropertyAccumulator acc;
  for (std::int32_t t = 0; t < config.trials; ++t) {
    const std::uint64_t trial_seed = config.seed + std::uint64_t(t);
    const Scenario scenario = build_scenario(config, trial_seed);
    check_trial_properties(scenario, config, trial_seed, acc);
  }
  if (!out_csv.empty()) write_properties_csv(out_csv, acc.rows());
  if (out) *out = acc.rows();
  return acc.any_failed() ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

std::pair<std::int64_t, std::int64_t> ingest_edge_list(std::istream& in,
                                                       std::ostream& dense_out,
                                                       std::ostream& idmap_out) {
  std::unordered_map<std::int64_t, std::int32_t> id_map;
  std::vector<std::int64_t> external;  // internal -> external, first-seen order
  auto intern = [&](std::int64_t ext) {
    const auto [it, inserted] = id_map.try_emplace(ext, std::int32_t(external.size()));
    if (inserted) external.push_back(ext);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  std::int64_t edges = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char ch : line) {
      if (ch == '#') break;
      if (!std::isspace(static_cast<unsigned char>(ch))) {
        blank = false;
        break;
      }
    }
    if (blank) continue;

    const char* p = line.c_str();
    char* end = nullptr;
    std::int64_t ids[2];
    for (int k = 0; k < 2; ++k) {
      ids[k] = std::strtoll(p, &end, 10);
      if (end == p)
        throw std::runtime_error("ingest parse error at line " +
                                 std::to_string(line_no) + ": expected integer id");
      if (ids[k] < 0)
        throw std::runtime_error("ingest parse error at line " +
                                 std::to_string(line_no) + ": negative node id");
      p = end;
    }
    std::strtod(p, &end);
    p = end;
    while (*p != '\0' && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (*p != '\0')
      throw std::runtime_error("ingest parse error at line " +
                               std::to_string(line_no) + ": trailing tokens");

    dense_out << intern(ids[0]) << ' ' << intern(ids[1]) << '\n';
    ++edges;
  }
  for (std::size_t i = 0; i < external.size(); ++i)
    idmap_out << external[i] << ' ' << i << '\n';
  return {std::int64_t(external.size()), edges};
}

void write_auction_csv(std::ostream& out, const Scenario& scenario,
                       const AuctionOutcome& outcome) {
  out << "user_id,won,bid,payment,critical_trace_max,utility_if_truthful\n";
  const auto& bidders = scenario.bidders;
  std::vector<double> payment(bidders.size(), 0.0);
  std::vector<double> trace_max(bidders.size(), 0.0);
  std::vector<char> won(bidders.size(), 0);
  for (std::size_t i = 0; i < outcome.winners.size(); ++i) {
    const auto w = std::size_t(outcome.winners[i]);
    payment[w] = outcome.payments[i];
    trace_max[w] = std::max(outcome.traces[i].best_candidate,
                            outcome.traces[i].remainder_term);
    won[w] = 1;
  }
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    const double utility = won[b] ? payment[b] - scenario.costs.cost[b] : 0.0;
    out << bidders.users[b] << ',' << int(won[b]) << ','
        << format_double(bidders.bids[b]) << ',' << format_double(payment[b])
        << ',' << format_double(trace_max[b]) << ',' << format_double(utility)
        << '\n';
  }
}

}  // namespace crowdcast
