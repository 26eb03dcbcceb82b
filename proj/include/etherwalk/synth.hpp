#pragma once

/*
  Synthetic transaction graphs with known ground truth.

  Background edges draw endpoints from a power-law fitness distribution:
  each node gets an integer fitness from a floored Pareto law with tail
  exponent gamma, a stub pool holds every node with its fitness multiplicity,
  and shuffled stub pairs become edges. At the natural density
  (n_background_edges ~ half the pool) node degrees equal their fitness draw,
  so the tail MLE recovers gamma. Timestamps are uniform over [0, horizon]
  and amounts log-normal.

  Each planted chain is a temporal money-flow loop: a small node cycle walked
  with strictly increasing timestamps, so consecutive hops repeat the same
  ordered pairs several times. The final hop lands in the last 10% of the
  horizon, which puts it past any mid-horizon train/test split; its pair is
  recoverable from the earlier, pre-split traversals of the loop.
*/

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "etherwalk/error.hpp"
#include "etherwalk/graph.hpp"
#include "etherwalk/rng.hpp"

namespace etherwalk {

struct SynthConfig {
  std::size_t n_nodes = 1000;
  double gamma = 2.5;              // degree tail exponent, > 1
  std::int64_t horizon = 1000000;  // max timestamp
  std::size_t n_background_edges = 10000;
  std::size_t n_chains = 0;
  std::size_t chain_length = 20;   // hops per planted chain, >= 3
  double weight_mu = 0.0;          // log-normal amount parameters
  double weight_sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_nodes < 2) throw MathError("synth: need at least 2 nodes");
    if (!(gamma > 1.0)) throw MathError("synth: gamma must be > 1");
    if (horizon <= 0) throw MathError("synth: horizon must be > 0");
    if (n_chains > 0 && chain_length < 3) throw MathError("synth: chain_length must be >= 3");
  }
};

struct SynthResult {
  TemporalGraph graph;
  std::vector<std::vector<EdgeId>> chains;  // planted chains, edge ids in hop order
  std::vector<EdgeId> planted_final_hops;   // last hop of each chain (test-split edges)
};

namespace detail {

inline std::string synth_label(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "a%06zx", i);
  return buf;
}

// Strictly increasing draw of `count` distinct integers from [0, bound).
inline std::vector<std::int64_t> distinct_sorted_timestamps(std::int64_t bound, std::size_t count,
                                                            Rng& rng) {
  std::vector<std::int64_t> ts;
  ts.reserve(count);
  while (ts.size() < count) {
    const std::int64_t t = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(bound)));
    bool dup = false;
    for (auto existing : ts) dup = dup || existing == t;
    if (!dup) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

}  // namespace detail

inline SynthResult generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const std::int64_t test_window_start = cfg.horizon - cfg.horizon / 10;
  if (cfg.n_chains > 0 &&
      static_cast<std::int64_t>(cfg.chain_length) + 1 >= test_window_start) {
    throw MathError("synth: chains longer than horizon granularity");
  }

  Rng rng(cfg.seed);

  // Integer Pareto fitness, P(F >= f) = f^-(gamma-1) for f >= 1. The stub
  // pool realizes each node exactly fitness-many times, then shrinks or
  // grows (fitness-proportionally) to the 2 * m endpoint slots.
  std::vector<std::uint64_t> fitness(cfg.n_nodes);
  std::vector<double> fitness_cdf(cfg.n_nodes);
  double total_fitness = 0.0;
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    double u = rng.next_double();
    while (u >= 1.0) u = rng.next_double();
    fitness[i] =
        static_cast<std::uint64_t>(std::floor(std::pow(1.0 - u, -1.0 / (cfg.gamma - 1.0))));
    total_fitness += static_cast<double>(fitness[i]);
    fitness_cdf[i] = total_fitness;
  }
  std::vector<std::uint32_t> stubs;
  stubs.reserve(static_cast<std::size_t>(total_fitness));
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    for (std::uint64_t s = 0; s < fitness[i]; ++s) stubs.push_back(static_cast<std::uint32_t>(i));
  }
  const std::size_t slots = 2 * cfg.n_background_edges;
  while (stubs.size() > slots) {
    const std::size_t victim = rng.next_below(stubs.size());
    stubs[victim] = stubs.back();
    stubs.pop_back();
  }
  while (stubs.size() < slots) {
    const double x = rng.next_double() * total_fitness;
    stubs.push_back(static_cast<std::uint32_t>(
        std::lower_bound(fitness_cdf.begin(), fitness_cdf.end(), x) - fitness_cdf.begin()));
  }
  for (std::size_t i = stubs.size(); i > 1; --i) {
    std::swap(stubs[i - 1], stubs[rng.next_below(i)]);
  }

  auto sample_weight = [&]() {
    return std::exp(cfg.weight_mu + cfg.weight_sigma * rng.next_gaussian());
  };

  std::vector<EdgeRecord> records;
  records.reserve(cfg.n_background_edges + cfg.n_chains * cfg.chain_length);
  for (std::size_t i = 0; i < cfg.n_background_edges; ++i) {
    const std::size_t src = stubs[2 * i];
    const std::size_t dst = stubs[2 * i + 1];
    const auto t =
        static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(cfg.horizon) + 1));
    records.push_back({detail::synth_label(src), detail::synth_label(dst), sample_weight(), t});
  }

  // Chain nodes are fitness-weighted like background endpoints: flows run
  // through active accounts, whose background traffic the walker must
  // disambiguate.
  auto sample_fitness_node = [&]() -> std::size_t {
    const double x = rng.next_double() * total_fitness;
    return static_cast<std::size_t>(
        std::lower_bound(fitness_cdf.begin(), fitness_cdf.end(), x) - fitness_cdf.begin());
  };

  std::vector<std::vector<std::size_t>> chain_record_ids(cfg.n_chains);
  for (std::size_t c = 0; c < cfg.n_chains; ++c) {
    // Loop of 3..4 distinct nodes, walked chain_length hops. One log-normal
    // base sum is forwarded along the whole flow with small per-hop jitter.
    const std::size_t loop_size = 3 + rng.next_below(2);
    std::vector<std::size_t> loop;
    while (loop.size() < loop_size) {
      const std::size_t node = sample_fitness_node();
      bool dup = false;
      for (auto existing : loop) dup = dup || existing == node;
      if (!dup) loop.push_back(node);
    }
    // Forwarded sums sit in the upper half of the amount law: a flow worth
    // planting moves more than the background median.
    const double base_amount =
        std::exp(cfg.weight_mu + cfg.weight_sigma * std::abs(rng.next_gaussian()));
    auto ts = detail::distinct_sorted_timestamps(test_window_start, cfg.chain_length - 1, rng);
    const std::int64_t final_t =
        test_window_start +
        static_cast<std::int64_t>(
            rng.next_below(static_cast<std::uint64_t>(cfg.horizon - test_window_start) + 1));
    for (std::size_t hop = 0; hop < cfg.chain_length; ++hop) {
      const std::size_t src = loop[hop % loop_size];
      const std::size_t dst = loop[(hop + 1) % loop_size];
      const std::int64_t t = hop + 1 < cfg.chain_length ? ts[hop] : final_t;
      const double amount = base_amount * std::exp(0.05 * rng.next_gaussian());
      chain_record_ids[c].push_back(records.size());
      records.push_back({detail::synth_label(src), detail::synth_label(dst), amount, t});
    }
  }

  SynthResult result;
  result.graph = build_graph(records);
  for (auto& ids : chain_record_ids) {
    std::vector<EdgeId> chain;
    chain.reserve(ids.size());
    for (auto rid : ids) chain.push_back(static_cast<EdgeId>(rid));
    result.planted_final_hops.push_back(chain.back());
    result.chains.push_back(std::move(chain));
  }
  return result;
}

}  // namespace etherwalk
