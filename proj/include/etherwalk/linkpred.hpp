#pragma once

/*
  Temporal link prediction over learned embeddings.

  Protocol: split edges by time, embed the train graph only, featurize a
  directed pair (u, v) as the concatenation [phi(u), phi(v)], train a
  hinge-loss linear ranker (a linear SVM without the external solver), and
  score the test pairs with AUC and average precision.

  Negative pairs are drawn uniformly over ordered non-loop pairs of embedded
  nodes and excluded against every pair that has an edge anywhere in the full
  dataset, so a future positive can never appear as a training negative.
*/

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "etherwalk/error.hpp"
#include "etherwalk/graph.hpp"
#include "etherwalk/rng.hpp"
#include "etherwalk/skipgram.hpp"
#include "etherwalk/walk.hpp"

namespace etherwalk {

struct SplitSpec {
  double train_fraction = 0.5;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw MathError("train_fraction must be in (0,1)");
    }
  }
};

// Edges sorted by (timestamp, edge_id); the first ceil(fraction * m) go to
// train, so every train timestamp <= every test timestamp.
inline std::pair<std::vector<TemporalEdge>, std::vector<TemporalEdge>> temporal_split(
    std::span<const TemporalEdge> edges, const SplitSpec& spec) {
  spec.validate();
  if (edges.size() < 2) throw MathError("temporal_split: need at least 2 edges");
  std::vector<TemporalEdge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), [](const TemporalEdge& a, const TemporalEdge& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
  });
  const auto n_train = static_cast<std::size_t>(
      std::ceil(spec.train_fraction * static_cast<double>(sorted.size())));
  std::vector<TemporalEdge> train(sorted.begin(), sorted.begin() + n_train);
  std::vector<TemporalEdge> test(sorted.begin() + n_train, sorted.end());
  return {std::move(train), std::move(test)};
}

inline std::uint64_t pair_key(NodeId src, NodeId dst) {
  return (static_cast<std::uint64_t>(src) << 32) | dst;
}

using PairSet = std::unordered_set<std::uint64_t>;

// Uniform over ordered pairs (u, v), u != v, drawn from `eligible`, excluding
// `forbidden` and duplicates. Rejection-sampled; gives up after 100 * count
// attempts when the candidate space is (near) exhausted.
inline std::vector<std::pair<NodeId, NodeId>> sample_negative_pairs(
    std::span<const NodeId> eligible, const PairSet& forbidden, std::size_t count, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (count == 0) return pairs;
  if (eligible.size() < 2) throw MathError("sample_negative_pairs: fewer than 2 eligible nodes");
  PairSet taken;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 100 * count;
  while (pairs.size() < count) {
    if (attempts++ >= max_attempts) {
      throw MathError("sample_negative_pairs: candidate pairs exhausted after " +
                      std::to_string(max_attempts) + " attempts");
    }
    const NodeId u = eligible[rng.next_below(eligible.size())];
    const NodeId v = eligible[rng.next_below(eligible.size())];
    if (u == v) continue;
    const std::uint64_t key = pair_key(u, v);
    if (forbidden.contains(key) || !taken.insert(key).second) continue;
    pairs.emplace_back(u, v);
  }
  return pairs;
}

// F(u, v) = [phi(u), phi(v)]; order-sensitive. Empty when either endpoint
// has no embedding (caller skips and counts).
inline std::optional<std::vector<double>> edge_features(const EmbeddingMatrix& emb,
                                                        const std::string& src,
                                                        const std::string& dst) {
  const double* a = emb.find(src);
  const double* b = emb.find(dst);
  if (a == nullptr || b == nullptr) return std::nullopt;
  std::vector<double> feature(2 * emb.dim);
  std::copy(a, a + emb.dim, feature.begin());
  std::copy(b, b + emb.dim, feature.begin() + static_cast<std::ptrdiff_t>(emb.dim));
  return feature;
}

struct LinearClassifier {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;

  double score(std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
    return s;
  }
};

// SGD on mean hinge loss + lambda * ||w||^2 over shuffled samples. Weight
// decay is applied after each step, so w collapses to zero as lambda grows.
inline LinearClassifier train_linear_classifier(const std::vector<std::vector<double>>& features,
                                                const std::vector<int>& labels, double lambda,
                                                int epochs, std::uint64_t seed) {
  if (features.size() != labels.size() || features.empty()) {
    throw MathError("train_linear_classifier: bad input sizes");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw MathError("train_linear_classifier: single-class input");
  const std::size_t d = features.front().size();
  for (const auto& x : features) {
    if (x.size() != d) throw MathError("train_linear_classifier: feature length mismatch");
  }

  LinearClassifier clf;
  clf.lambda = lambda;
  clf.weights.assign(d, 0.0);
  Rng rng = derive_rng(seed, 0x5c1a);

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  const double init_lr = 0.1;
  const std::uint64_t total = static_cast<std::uint64_t>(epochs) * features.size();
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    for (std::size_t idx : order) {
      const double lr =
          init_lr * std::max(0.01, 1.0 - static_cast<double>(step) / static_cast<double>(total));
      ++step;
      const auto& x = features[idx];
      const double y = labels[idx] > 0 ? 1.0 : -1.0;
      const double margin = y * clf.score(x);
      if (margin < 1.0) {
        for (std::size_t i = 0; i < d; ++i) clf.weights[i] += lr * y * x[i];
        clf.bias += lr * y;
      }
      const double shrink = std::max(0.0, 1.0 - 2.0 * lr * lambda);
      for (double& w : clf.weights) w *= shrink;
    }
  }
  return clf;
}

// Mann-Whitney AUC via average ranks; ties contribute 1/2.
inline double score_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) throw MathError("score_auc: bad input");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y > 0 ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MathError("score_auc: needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  return (pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

// AP over the score-descending ordering, ties broken by stable input order:
// mean of precision@k at each positive rank.
inline double score_ap(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) throw MathError("score_ap: bad input");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y > 0 ? 1 : 0;
  if (n_pos == 0) throw MathError("score_ap: no positives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] > 0) {
      hits += 1;
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return ap / static_cast<double>(n_pos);
}

enum class Method { StaticUnbiased, StaticBiased, TwmdgUnbiased, TwmdgBiased };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::StaticUnbiased: return "static-unbiased";
    case Method::StaticBiased: return "static-biased";
    case Method::TwmdgUnbiased: return "twmdg-unbiased";
    case Method::TwmdgBiased: return "twmdg-biased";
  }
  return "unknown";
}

inline Method parse_method(const std::string& name) {
  if (name == "static-unbiased") return Method::StaticUnbiased;
  if (name == "static-biased") return Method::StaticBiased;
  if (name == "twmdg-unbiased") return Method::TwmdgUnbiased;
  if (name == "twmdg-biased") return Method::TwmdgBiased;
  throw ParseError("unknown method '" + name + "'");
}

inline std::string temporal_strategy_name(TemporalStrategy s) {
  switch (s) {
    case TemporalStrategy::Unbiased: return "unbiased";
    case TemporalStrategy::BiasedRecent: return "recent";
    case TemporalStrategy::BiasedDistant: return "distant";
  }
  return "unknown";
}

inline std::string weight_strategy_name(WeightStrategy s) {
  switch (s) {
    case WeightStrategy::Unbiased: return "unbiased";
    case WeightStrategy::BiasedRaw: return "raw";
    case WeightStrategy::BiasedLinear: return "linear";
  }
  return "unknown";
}

inline TemporalStrategy parse_temporal_strategy(const std::string& name) {
  if (name == "unbiased") return TemporalStrategy::Unbiased;
  if (name == "recent") return TemporalStrategy::BiasedRecent;
  if (name == "distant") return TemporalStrategy::BiasedDistant;
  throw ParseError("unknown temporal bias '" + name + "'");
}

inline WeightStrategy parse_weight_strategy(const std::string& name) {
  if (name == "unbiased") return WeightStrategy::Unbiased;
  if (name == "raw") return WeightStrategy::BiasedRaw;
  if (name == "linear") return WeightStrategy::BiasedLinear;
  throw ParseError("unknown weight bias '" + name + "'");
}

struct PipelineConfig {
  Method method = Method::TwmdgBiased;
  int walk_length = 10;
  int walks_per_node = 10;
  double alpha = 0.5;
  TemporalStrategy temporal_bias = TemporalStrategy::BiasedRecent;  // biased temporal mode
  WeightStrategy weight_bias = WeightStrategy::BiasedRaw;
  double p = 1.0;  // node2vec return, static-biased mode
  double q = 1.0;  // node2vec in-out
  int min_emit_length = 2;
  SgnsParams sgns;
  SplitSpec split;
  double lambda = 1e-4;
  int clf_epochs = 10;
  std::uint64_t seed = 0;
  int walk_workers = 1;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["method"] = method_name(method);
    j["walk_length"] = walk_length;
    j["walks_per_node"] = walks_per_node;
    j["alpha"] = alpha;
    j["temporal_bias"] = temporal_strategy_name(temporal_bias);
    j["weight_bias"] = weight_strategy_name(weight_bias);
    j["p"] = p;
    j["q"] = q;
    j["min_emit_length"] = min_emit_length;
    j["dim"] = sgns.dim;
    j["window"] = sgns.window;
    j["negatives"] = sgns.negatives;
    j["epochs"] = sgns.epochs;
    j["learning_rate"] = sgns.learning_rate;
    j["min_count"] = sgns.min_count;
    j["train_fraction"] = split.train_fraction;
    j["lambda"] = lambda;
    j["clf_epochs"] = clf_epochs;
    j["seed"] = seed;
    return j;
  }
};

struct EvalReport {
  double auc = 0.0;
  double ap = 0.0;
  std::size_t n_train_pos = 0;
  std::size_t n_train_neg = 0;
  std::size_t n_test_pos = 0;
  std::size_t n_test_neg = 0;
  std::size_t n_skipped = 0;  // test pairs without embeddings
  std::string method;
  nlohmann::ordered_json config;

  // Raw test outputs kept in memory for downstream analysis; not serialized.
  std::vector<double> test_scores;
  std::vector<int> test_labels;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["auc"] = auc;
    j["ap"] = ap;
    j["n_train_pos"] = n_train_pos;
    j["n_train_neg"] = n_train_neg;
    j["n_test_pos"] = n_test_pos;
    j["n_test_neg"] = n_test_neg;
    j["n_skipped"] = n_skipped;
    j["method"] = method;
    j["config"] = config;
    return j;
  }
};

namespace detail {

// Distinct ordered pairs, first-seen order; pairs without embeddings are
// dropped and counted.
inline std::vector<std::pair<NodeId, NodeId>> embedded_pairs(const TemporalGraph& g,
                                                             std::span<const TemporalEdge> edges,
                                                             const EmbeddingMatrix& emb,
                                                             std::size_t& skipped) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  PairSet seen;
  skipped = 0;
  for (const auto& e : edges) {
    if (!seen.insert(pair_key(e.src, e.dst)).second) continue;
    if (emb.find(g.label(e.src)) == nullptr || emb.find(g.label(e.dst)) == nullptr) {
      skipped += 1;
      continue;
    }
    pairs.emplace_back(e.src, e.dst);
  }
  return pairs;
}

}  // namespace detail

// End-to-end protocol for one method. Fully determined by cfg.seed; walk
// workers only change wall time, never the report.
inline EvalReport run_pipeline(const TemporalGraph& g, const PipelineConfig& cfg) {
  cfg.split.validate();
  if (g.num_edges() < 2) throw MathError("run_pipeline: need at least 2 edges");

  auto [train_edges, test_edges] = temporal_split(g.edges(), cfg.split);

  std::vector<EdgeRecord> train_records;
  train_records.reserve(train_edges.size());
  for (const auto& e : train_edges) {
    train_records.push_back({g.label(e.src), g.label(e.dst), e.weight, e.timestamp});
  }
  const TemporalGraph train_graph = build_graph(train_records);

  WalkCorpus corpus;
  const std::uint64_t walk_seed = derive_seed(cfg.seed, 1);
  switch (cfg.method) {
    case Method::StaticUnbiased:
    case Method::StaticBiased: {
      StaticWalkConfig wc;
      wc.walk_length = cfg.walk_length;
      wc.walks_per_node = cfg.walks_per_node;
      wc.min_emit_length = cfg.min_emit_length;
      wc.seed = walk_seed;
      wc.mode.node2vec = cfg.method == Method::StaticBiased;
      wc.mode.p = cfg.p;
      wc.mode.q = cfg.q;
      corpus = generate_static_corpus(collapse_to_static(train_graph), wc, cfg.walk_workers);
      break;
    }
    case Method::TwmdgUnbiased:
    case Method::TwmdgBiased: {
      WalkConfig wc;
      wc.walk_length = cfg.walk_length;
      wc.walks_per_node = cfg.walks_per_node;
      wc.alpha = cfg.alpha;
      wc.min_emit_length = cfg.min_emit_length;
      wc.seed = walk_seed;
      if (cfg.method == Method::TwmdgBiased) {
        wc.temporal = cfg.temporal_bias;
        wc.weighted = cfg.weight_bias;
      } else {
        wc.temporal = TemporalStrategy::Unbiased;
        wc.weighted = WeightStrategy::Unbiased;
      }
      corpus = generate_corpus(train_graph, wc, cfg.walk_workers);
      break;
    }
  }
  if (corpus.empty()) throw MathError("run_pipeline: empty walk corpus");

  SgnsParams sgns = cfg.sgns;
  sgns.seed = derive_seed(cfg.seed, 2);
  const EmbeddingMatrix emb = train_embeddings(corpus, sgns, /*workers=*/1);

  std::size_t train_skipped = 0;
  std::size_t test_skipped = 0;
  const auto train_pos = detail::embedded_pairs(g, train_edges, emb, train_skipped);
  const auto test_pos = detail::embedded_pairs(g, test_edges, emb, test_skipped);
  if (train_pos.empty() || test_pos.empty()) {
    throw MathError("run_pipeline: no usable positive pairs");
  }

  PairSet forbidden;
  for (const auto& e : g.edges()) forbidden.insert(pair_key(e.src, e.dst));

  std::vector<NodeId> eligible;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (emb.find(g.label(u)) != nullptr) eligible.push_back(u);
  }

  Rng neg_rng = derive_rng(cfg.seed, 3);
  const auto negatives =
      sample_negative_pairs(eligible, forbidden, train_pos.size() + test_pos.size(), neg_rng);
  const std::span<const std::pair<NodeId, NodeId>> train_neg(negatives.data(), train_pos.size());
  const std::span<const std::pair<NodeId, NodeId>> test_neg(negatives.data() + train_pos.size(),
                                                            test_pos.size());

  auto featurize = [&](const std::pair<NodeId, NodeId>& pair) {
    auto f = edge_features(emb, g.label(pair.first), g.label(pair.second));
    return std::move(*f);  // endpoints pre-checked against emb
  };

  std::vector<std::vector<double>> train_x;
  std::vector<int> train_y;
  train_x.reserve(train_pos.size() + train_neg.size());
  for (const auto& pr : train_pos) {
    train_x.push_back(featurize(pr));
    train_y.push_back(1);
  }
  for (const auto& pr : train_neg) {
    train_x.push_back(featurize(pr));
    train_y.push_back(-1);
  }
  const LinearClassifier clf =
      train_linear_classifier(train_x, train_y, cfg.lambda, cfg.clf_epochs, derive_seed(cfg.seed, 4));

  EvalReport report;
  report.test_scores.reserve(test_pos.size() + test_neg.size());
  for (const auto& pr : test_pos) {
    report.test_scores.push_back(clf.score(featurize(pr)));
    report.test_labels.push_back(1);
  }
  for (const auto& pr : test_neg) {
    report.test_scores.push_back(clf.score(featurize(pr)));
    report.test_labels.push_back(0);
  }
  report.auc = score_auc(report.test_scores, report.test_labels);
  report.ap = score_ap(report.test_scores, report.test_labels);
  report.n_train_pos = train_pos.size();
  report.n_train_neg = train_neg.size();
  report.n_test_pos = test_pos.size();
  report.n_test_neg = test_neg.size();
  report.n_skipped = test_skipped;
  report.method = method_name(cfg.method);
  report.config = cfg.to_json();
  return report;
}

}  // namespace etherwalk
