#pragma once

/*
  Edge-selection strategies and walk sampling.

  Temporal strategies over the candidate set L_t(u):
    Unbiased       uniform 1/|L|
    BiasedRecent   rank edges by (timestamp, edge_id); the earliest gets rank
                   |L| and the latest rank 1, P = rank / triangular sum
    BiasedDistant  same ordering with ascending ranks 1..|L|
  Weight strategies:
    Unbiased       uniform
    BiasedRaw      P = w / sum w
    BiasedLinear   ascending ordinal ranks over (weight, edge_id)
  The two domains blend as P_T^alpha * P_W^(1-alpha), renormalized over the
  candidate set (the raw product is not a distribution; renormalizing keeps
  all ratios).

  Corpus generation derives one RNG stream per (node, walk index) from the
  master seed, so output is identical for any worker count.
*/

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "etherwalk/error.hpp"
#include "etherwalk/graph.hpp"
#include "etherwalk/rng.hpp"

namespace etherwalk {

enum class TemporalStrategy { Unbiased, BiasedRecent, BiasedDistant };
enum class WeightStrategy { Unbiased, BiasedRaw, BiasedLinear };

struct WalkConfig {
  int walk_length = 10;      // l, >= 2
  int walks_per_node = 10;   // r, >= 1
  double alpha = 0.5;        // in [0, 1]
  TemporalStrategy temporal = TemporalStrategy::Unbiased;
  WeightStrategy weighted = WeightStrategy::Unbiased;
  int min_emit_length = 2;   // walks shorter than this are discarded
  std::uint64_t seed = 0;

  void validate() const {
    if (walk_length < 2) throw MathError("walk_length must be >= 2");
    if (walks_per_node < 1) throw MathError("walks_per_node must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) throw MathError("alpha must be in [0,1]");
    if (min_emit_length < 2 || min_emit_length > walk_length) {
      throw MathError("min_emit_length must be in [2, walk_length]");
    }
  }
};

// Node and edge sequences chain head-to-tail with non-decreasing timestamps.
struct TemporalWalk {
  std::vector<NodeId> node_seq;
  std::vector<EdgeId> edge_seq;
};

namespace detail {

// Candidate positions sorted by the given key, ties broken by edge_id.
template <typename Key>
std::vector<std::size_t> sorted_positions(std::span<const EdgeId> candidates, Key key) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ka = key(candidates[a]);
    auto kb = key(candidates[b]);
    if (ka != kb) return ka < kb;
    return candidates[a] < candidates[b];
  });
  return order;
}

inline std::vector<double> normalize(std::vector<double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  for (double& v : values) v /= sum;
  return values;
}

}  // namespace detail

inline std::vector<double> temporal_probabilities(const TemporalGraph& g,
                                                  std::span<const EdgeId> candidates,
                                                  TemporalStrategy strategy) {
  if (candidates.empty()) throw MathError("temporal_probabilities: no candidates");
  const std::size_t n = candidates.size();
  std::vector<double> probs(n);
  if (strategy == TemporalStrategy::Unbiased) {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(n));
    return probs;
  }
  auto order = detail::sorted_positions(candidates, [&](EdgeId e) { return g.edge(e).timestamp; });
  for (std::size_t i = 0; i < n; ++i) {
    const double ascending_rank = static_cast<double>(i + 1);
    probs[order[i]] = strategy == TemporalStrategy::BiasedRecent
                          ? static_cast<double>(n - i)
                          : ascending_rank;
  }
  return detail::normalize(std::move(probs));
}

inline std::vector<double> weight_probabilities(const TemporalGraph& g,
                                                std::span<const EdgeId> candidates,
                                                WeightStrategy strategy) {
  if (candidates.empty()) throw MathError("weight_probabilities: no candidates");
  const std::size_t n = candidates.size();
  std::vector<double> probs(n);
  switch (strategy) {
    case WeightStrategy::Unbiased:
      std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(n));
      return probs;
    case WeightStrategy::BiasedRaw:
      for (std::size_t i = 0; i < n; ++i) probs[i] = g.edge(candidates[i]).weight;
      return detail::normalize(std::move(probs));
    case WeightStrategy::BiasedLinear: {
      auto order = detail::sorted_positions(candidates, [&](EdgeId e) { return g.edge(e).weight; });
      for (std::size_t i = 0; i < n; ++i) probs[order[i]] = static_cast<double>(i + 1);
      return detail::normalize(std::move(probs));
    }
  }
  throw MathError("weight_probabilities: unknown strategy");
}

inline std::vector<double> combined_probabilities(std::span<const double> p_time,
                                                  std::span<const double> p_weight, double alpha) {
  if (p_time.size() != p_weight.size() || p_time.empty()) {
    throw MathError("combined_probabilities: dimension mismatch");
  }
  if (alpha == 1.0) return {p_time.begin(), p_time.end()};
  if (alpha == 0.0) return {p_weight.begin(), p_weight.end()};
  std::vector<double> probs(p_time.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = std::pow(p_time[i], alpha) * std::pow(p_weight[i], 1.0 - alpha);
  }
  return detail::normalize(std::move(probs));
}

// Inverse-CDF draw: one uniform per selection.
inline std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

// The first hop draws from all out-edges (start time -inf); hop i+1 draws
// from L_{T(e_i)}(v_{i+1}). Stops at walk_length nodes or a dead end.
inline TemporalWalk sample_temporal_walk(const TemporalGraph& g, NodeId start,
                                         const WalkConfig& cfg, Rng& rng) {
  TemporalWalk walk;
  walk.node_seq.push_back(start);
  NodeId current = start;
  std::int64_t now = std::numeric_limits<std::int64_t>::min();
  while (walk.node_seq.size() < static_cast<std::size_t>(cfg.walk_length)) {
    auto candidates = now == std::numeric_limits<std::int64_t>::min()
                          ? g.out_edges(current)
                          : g.successive_edges(current, now);
    if (candidates.empty()) break;
    auto p_time = temporal_probabilities(g, candidates, cfg.temporal);
    auto p_weight = weight_probabilities(g, candidates, cfg.weighted);
    auto probs = combined_probabilities(p_time, p_weight, cfg.alpha);
    const EdgeId chosen = candidates[sample_index(probs, rng)];
    const auto& e = g.edge(chosen);
    walk.edge_seq.push_back(chosen);
    walk.node_seq.push_back(e.dst);
    current = e.dst;
    now = e.timestamp;
  }
  return walk;
}

struct StaticWalkMode {
  bool node2vec = false;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
};

// Uniform mode picks each out-neighbor equally; node2vec applies the standard
// second-order return/in-out biases over the collapsed digraph.
inline std::vector<NodeId> sample_static_walk(const StaticGraph& g, NodeId start, int length,
                                              const StaticWalkMode& mode, Rng& rng) {
  std::vector<NodeId> walk{start};
  NodeId current = start;
  bool have_prev = false;
  NodeId prev = start;
  std::vector<double> probs;
  while (walk.size() < static_cast<std::size_t>(length)) {
    auto neighbors = g.out_edges(current);
    if (neighbors.empty()) break;
    std::size_t pick;
    if (!mode.node2vec || !have_prev) {
      pick = rng.next_below(neighbors.size());
    } else {
      probs.resize(neighbors.size());
      for (std::size_t i = 0; i < neighbors.size(); ++i) {
        const NodeId x = neighbors[i].dst;
        if (x == prev) {
          probs[i] = 1.0 / mode.p;
        } else if (g.has_edge(prev, x)) {
          probs[i] = 1.0;
        } else {
          probs[i] = 1.0 / mode.q;
        }
      }
      double sum = 0.0;
      for (double v : probs) sum += v;
      for (double& v : probs) v /= sum;
      pick = sample_index(probs, rng);
    }
    prev = current;
    have_prev = true;
    current = neighbors[pick].dst;
    walk.push_back(current);
  }
  return walk;
}

using WalkCorpus = std::vector<std::vector<std::string>>;

namespace detail {

// Runs one job per (node, walk index) slot over a fixed slot array; slot
// content depends only on (seed, node, walk index), never on scheduling.
template <typename Job>
void run_slots(std::size_t slot_count, int workers, Job job) {
  if (workers <= 1 || slot_count < 2) {
    for (std::size_t i = 0; i < slot_count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t chunk = 64;
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= slot_count) return;
      std::size_t end = std::min(begin + chunk, slot_count);
      for (std::size_t i = begin; i < end; ++i) job(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace detail

// r walks per node; walks shorter than min_emit_length are discarded, not
// restarted. Output order is (node id, walk index) ascending.
inline WalkCorpus generate_corpus(const TemporalGraph& g, const WalkConfig& cfg, int workers = 1) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  const std::size_t r = static_cast<std::size_t>(cfg.walks_per_node);
  std::vector<std::vector<NodeId>> slots(n * r);
  detail::run_slots(n * r, workers, [&](std::size_t i) {
    const NodeId node = static_cast<NodeId>(i / r);
    const std::uint64_t walk_index = i % r;
    Rng rng = derive_rng(cfg.seed, node, walk_index);
    slots[i] = sample_temporal_walk(g, node, cfg, rng).node_seq;
  });
  WalkCorpus corpus;
  for (auto& nodes : slots) {
    if (nodes.size() < static_cast<std::size_t>(cfg.min_emit_length)) continue;
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (NodeId v : nodes) labels.push_back(g.label(v));
    corpus.push_back(std::move(labels));
  }
  return corpus;
}

struct StaticWalkConfig {
  int walk_length = 10;
  int walks_per_node = 10;
  StaticWalkMode mode;
  int min_emit_length = 2;
  std::uint64_t seed = 0;
};

inline WalkCorpus generate_static_corpus(const StaticGraph& g, const StaticWalkConfig& cfg,
                                         int workers = 1) {
  const std::size_t n = g.num_nodes();
  const std::size_t r = static_cast<std::size_t>(cfg.walks_per_node);
  std::vector<std::vector<NodeId>> slots(n * r);
  detail::run_slots(n * r, workers, [&](std::size_t i) {
    const NodeId node = static_cast<NodeId>(i / r);
    const std::uint64_t walk_index = i % r;
    Rng rng = derive_rng(cfg.seed, node, walk_index);
    slots[i] = sample_static_walk(g, node, cfg.walk_length, cfg.mode, rng);
  });
  WalkCorpus corpus;
  for (auto& nodes : slots) {
    if (nodes.size() < static_cast<std::size_t>(cfg.min_emit_length)) continue;
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (NodeId v : nodes) labels.push_back(g.label(v));
    corpus.push_back(std::move(labels));
  }
  return corpus;
}

// One walk per line, labels separated by single spaces, newline-terminated.
inline void write_corpus(std::ostream& out, const WalkCorpus& corpus) {
  for (const auto& walk : corpus) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i > 0) out << ' ';
      out << walk[i];
    }
    out << '\n';
  }
}

inline WalkCorpus read_corpus(std::istream& in) {
  WalkCorpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> walk;
    std::istringstream fields(line);
    std::string token;
    while (fields >> token) walk.push_back(token);
    corpus.push_back(std::move(walk));
  }
  return corpus;
}

inline void write_corpus_file(const std::string& path, const WalkCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_corpus(out, corpus);
}

inline WalkCorpus read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_corpus(in);
}

}  // namespace etherwalk
