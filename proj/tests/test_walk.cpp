#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "etherwalk/graph.hpp"
#include "etherwalk/walk.hpp"
#include "test_util.hpp"

using namespace etherwalk;

namespace {

// Graph with a single source and one out-edge per (timestamp, weight) pair.
TemporalGraph fan_graph(const std::vector<std::pair<std::int64_t, double>>& edges) {
  std::vector<EdgeRecord> records;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    records.push_back({"src", "t" + std::to_string(i), edges[i].second, edges[i].first});
  }
  return build_graph(records);
}

std::vector<EdgeId> fan_candidates(const TemporalGraph& g) {
  auto out = g.out_edges(0);
  return {out.begin(), out.end()};
}

// Rank oracle: normalize explicit rank lists.
std::vector<double> normalized(std::vector<double> v) {
  double s = 0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

TEST_CASE("temporal probabilities: uniform, recent, distant") {
  auto g = fan_graph({{10, 1.0}, {20, 1.0}, {30, 1.0}, {40, 1.0}});
  auto c4 = fan_candidates(g);
  auto uniform = temporal_probabilities(g, c4, TemporalStrategy::Unbiased);
  CHECK(uniform == std::vector<double>{0.25, 0.25, 0.25, 0.25});

  auto g3 = fan_graph({{10, 1.0}, {20, 1.0}, {30, 1.0}});
  auto c3 = fan_candidates(g3);
  // descending ranks 3,2,1 over ascending timestamps
  auto recent = temporal_probabilities(g3, c3, TemporalStrategy::BiasedRecent);
  auto expect_recent = normalized({3, 2, 1});
  for (std::size_t i = 0; i < 3; ++i) CHECK(recent[i] == doctest::Approx(expect_recent[i]));
  CHECK(recent[0] == doctest::Approx(0.5));
  CHECK(recent[1] == doctest::Approx(1.0 / 3));
  CHECK(recent[2] == doctest::Approx(1.0 / 6));

  auto distant = temporal_probabilities(g3, c3, TemporalStrategy::BiasedDistant);
  auto expect_distant = normalized({1, 2, 3});
  for (std::size_t i = 0; i < 3; ++i) CHECK(distant[i] == doctest::Approx(expect_distant[i]));
}

TEST_CASE("temporal probabilities break timestamp ties by edge id") {
  auto g = fan_graph({{5, 1.0}, {5, 1.0}, {5, 1.0}});
  auto c = fan_candidates(g);
  auto recent = temporal_probabilities(g, c, TemporalStrategy::BiasedRecent);
  CHECK(recent[0] == doctest::Approx(0.5));   // lowest edge id = earliest in the sort
  CHECK(recent[2] == doctest::Approx(1.0 / 6));
}

TEST_CASE("temporal probabilities reject an empty candidate set") {
  auto g = fan_graph({{1, 1.0}});
  std::vector<EdgeId> empty;
  CHECK_THROWS_AS(temporal_probabilities(g, empty, TemporalStrategy::Unbiased), MathError);
  CHECK_THROWS_AS(weight_probabilities(g, empty, WeightStrategy::Unbiased), MathError);
}

TEST_CASE("weight probabilities: raw ratio and linear ranks") {
  auto g2 = fan_graph({{1, 1.0}, {2, 3.0}});
  auto raw = weight_probabilities(g2, fan_candidates(g2), WeightStrategy::BiasedRaw);
  CHECK(raw[0] == doctest::Approx(0.25));
  CHECK(raw[1] == doctest::Approx(0.75));

  auto g3 = fan_graph({{1, 5.0}, {2, 1.0}, {3, 100.0}});
  auto linear = weight_probabilities(g3, fan_candidates(g3), WeightStrategy::BiasedLinear);
  // ascending weight order 1.0 < 5.0 < 100.0 -> ranks 2,1,3 in input order
  CHECK(linear[0] == doctest::Approx(2.0 / 6));
  CHECK(linear[1] == doctest::Approx(1.0 / 6));
  CHECK(linear[2] == doctest::Approx(3.0 / 6));

  auto geq = fan_graph({{1, 2.0}, {2, 2.0}, {3, 2.0}});
  auto equal = weight_probabilities(geq, fan_candidates(geq), WeightStrategy::BiasedRaw);
  for (double v : equal) CHECK(v == doctest::Approx(1.0 / 3));
}

TEST_CASE("raw weight bias preserves strict weight ordering") {
  Rng rng(3);
  for (int round = 0; round < 20; ++round) {
    std::vector<std::pair<std::int64_t, double>> spec;
    for (int i = 0; i < 6; ++i) spec.push_back({i, 0.5 + rng.next_double() * 9.0});
    auto g = fan_graph(spec);
    auto probs = weight_probabilities(g, fan_candidates(g), WeightStrategy::BiasedRaw);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      for (std::size_t j = 0; j < spec.size(); ++j) {
        if (spec[i].second > spec[j].second) CHECK(probs[i] > probs[j]);
      }
    }
  }
}

TEST_CASE("recent and distant vectors reverse each other on distinct timestamps") {
  Rng rng(17);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 2 + rng.next_below(8);
    std::vector<std::pair<std::int64_t, double>> spec;
    for (std::size_t i = 0; i < n; ++i) spec.push_back({static_cast<std::int64_t>(10 * i + 1), 1.0});
    auto g = fan_graph(spec);
    auto recent = temporal_probabilities(g, fan_candidates(g), TemporalStrategy::BiasedRecent);
    auto distant = temporal_probabilities(g, fan_candidates(g), TemporalStrategy::BiasedDistant);
    auto reversed = distant;
    std::reverse(reversed.begin(), reversed.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(recent[i] == doctest::Approx(reversed[i]));
  }
}

TEST_CASE("every strategy yields a non-negative vector summing to one") {
  Rng rng(29);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 1 + rng.next_below(10);
    std::vector<std::pair<std::int64_t, double>> spec;
    for (std::size_t i = 0; i < n; ++i) {
      spec.push_back({static_cast<std::int64_t>(rng.next_below(20)), 0.1 + rng.next_double() * 50});
    }
    auto g = fan_graph(spec);
    auto c = fan_candidates(g);
    for (auto ts : {TemporalStrategy::Unbiased, TemporalStrategy::BiasedRecent,
                    TemporalStrategy::BiasedDistant}) {
      for (auto ws :
           {WeightStrategy::Unbiased, WeightStrategy::BiasedRaw, WeightStrategy::BiasedLinear}) {
        auto pt = temporal_probabilities(g, c, ts);
        auto pw = weight_probabilities(g, c, ws);
        auto blend = combined_probabilities(pt, pw, rng.next_double());
        for (auto* vec : {&pt, &pw, &blend}) {
          double sum = 0.0;
          for (double v : *vec) {
            CHECK(v >= 0.0);
            sum += v;
          }
          CHECK(std::abs(sum - 1.0) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("combined probabilities at the endpoints return the inputs exactly") {
  std::vector<double> pt{0.5, 0.3, 0.2};
  std::vector<double> pw{0.1, 0.1, 0.8};
  CHECK(combined_probabilities(pt, pw, 1.0) == pt);
  CHECK(combined_probabilities(pt, pw, 0.0) == pw);
}

TEST_CASE("combined probabilities match the sqrt-product oracle at alpha 0.5") {
  std::vector<double> pt{0.5, 0.5};
  std::vector<double> pw{0.8, 0.2};
  auto blend = combined_probabilities(pt, pw, 0.5);
  // oracle: sqrt(0.4), sqrt(0.1) normalized; the ratio is exactly 2
  const double a = std::sqrt(0.5 * 0.8);
  const double b = std::sqrt(0.5 * 0.2);
  CHECK(blend[0] == doctest::Approx(a / (a + b)));
  CHECK(blend[1] == doctest::Approx(b / (a + b)));
  CHECK(blend[0] / blend[1] == doctest::Approx(2.0));
  CHECK(blend[0] == doctest::Approx(2.0 / 3));
}

TEST_CASE("combined probabilities are idempotent on equal inputs") {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> p(3 + rng.next_below(5));
    double sum = 0;
    for (double& v : p) {
      v = 0.05 + rng.next_double();
      sum += v;
    }
    for (double& v : p) v /= sum;
    auto blend = combined_probabilities(p, p, rng.next_double());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(blend[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }
}

TEST_CASE("combined probabilities reject mismatched lengths") {
  std::vector<double> a{0.5, 0.5};
  std::vector<double> b{1.0};
  CHECK_THROWS_AS(combined_probabilities(a, b, 0.5), MathError);
}

TEST_CASE("a node with no out-edges yields a one-node walk") {
  std::vector<EdgeRecord> records{{"a", "b", 1.0, 1}};
  auto g = build_graph(records);
  WalkConfig cfg;
  Rng rng(1);
  auto walk = sample_temporal_walk(g, *g.find_node("b"), cfg, rng);
  CHECK(walk.node_seq == std::vector<NodeId>{*g.find_node("b")});
  CHECK(walk.edge_seq.empty());
}

TEST_CASE("walks never traverse backwards in time") {
  // A -> B at t=5, B -> C at t=3: the only temporally valid path from A is [A, B]
  std::vector<EdgeRecord> records{{"a", "b", 1.0, 5}, {"b", "c", 1.0, 3}};
  auto g = build_graph(records);
  WalkConfig cfg;
  cfg.walk_length = 5;
  for (int i = 0; i < 200; ++i) {
    Rng rng(i);
    auto walk = sample_temporal_walk(g, *g.find_node("a"), cfg, rng);
    REQUIRE(walk.node_seq.size() == 2);
    CHECK(g.label(walk.node_seq[1]) == "b");
  }
}

TEST_CASE("arrival time blocks earlier transactions in the six-account graph") {
  auto g = testutil::six_account_graph();
  const NodeId a5 = *g.find_node("a5");
  const NodeId a1 = *g.find_node("a1");
  const NodeId a2 = *g.find_node("a2");
  WalkConfig cfg;
  cfg.walk_length = 6;
  cfg.temporal = TemporalStrategy::BiasedRecent;
  cfg.weighted = WeightStrategy::BiasedRaw;
  for (int i = 0; i < 500; ++i) {
    Rng rng(1000 + i);
    auto walk = sample_temporal_walk(g, a5, cfg, rng);
    CHECK(testutil::valid_temporal_walk(g, walk.node_seq, walk.edge_seq));
    for (std::size_t k = 0; k + 2 < walk.node_seq.size(); ++k) {
      const bool forbidden = walk.node_seq[k] == a5 && walk.node_seq[k + 1] == a1 &&
                             walk.node_seq[k + 2] == a2;
      CHECK_FALSE(forbidden);
    }
  }
}

TEST_CASE("sampled walks satisfy the validity oracle across strategies") {
  Rng seed_rng(77);
  auto records = testutil::random_records(seed_rng, 40, 400, 60);
  auto g = build_graph(records);
  for (auto ts : {TemporalStrategy::Unbiased, TemporalStrategy::BiasedRecent,
                  TemporalStrategy::BiasedDistant}) {
    for (auto ws :
         {WeightStrategy::Unbiased, WeightStrategy::BiasedRaw, WeightStrategy::BiasedLinear}) {
      WalkConfig cfg;
      cfg.temporal = ts;
      cfg.weighted = ws;
      cfg.walk_length = 8;
      for (int i = 0; i < 100; ++i) {
        Rng rng(i);
        const NodeId start = static_cast<NodeId>(i % g.num_nodes());
        auto walk = sample_temporal_walk(g, start, cfg, rng);
        CHECK(testutil::valid_temporal_walk(g, walk.node_seq, walk.edge_seq));
        CHECK(walk.node_seq.size() <= 8);
      }
    }
  }
}

TEST_CASE("static walk takes a forced first step and stops at dead ends") {
  std::vector<EdgeRecord> records{{"a", "b", 1.0, 1}, {"b", "c", 1.0, 2}};
  auto s = collapse_to_static(build_graph(records));
  Rng rng(4);
  auto walk = sample_static_walk(s, 0, 3, {}, rng);
  REQUIRE(walk.size() == 3);
  CHECK(s.label(walk[1]) == "b");
  CHECK(s.label(walk[2]) == "c");

  auto short_walk = sample_static_walk(s, 2, 3, {}, rng);
  CHECK(short_walk.size() == 1);  // c has no out-edges
}

TEST_CASE("uniform static steps hit each neighbor equally often") {
  std::vector<EdgeRecord> records;
  for (int i = 0; i < 4; ++i) records.push_back({"hub", "n" + std::to_string(i), 1.0, i});
  auto s = collapse_to_static(build_graph(records));
  Rng rng(8);
  std::map<NodeId, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto walk = sample_static_walk(s, 0, 2, {}, rng);
    counts[walk[1]] += 1;
  }
  for (auto [node, count] : counts) {
    CHECK(std::abs(count / static_cast<double>(draws) - 0.25) < 0.01);
  }
}

TEST_CASE("node2vec with p=q=1 matches the uniform transition law") {
  Rng seed_rng(13);
  auto records = testutil::random_records(seed_rng, 8, 40, 10);
  auto s = collapse_to_static(build_graph(records));
  // walk two steps from a fixed start; second-step distribution conditioned on
  // the first step must be uniform over the current node's out-neighbors
  StaticWalkMode n2v{true, 1.0, 1.0};
  std::map<std::pair<NodeId, NodeId>, int> transitions;
  std::map<NodeId, int> visits;
  const int draws = 200000;
  Rng rng(99);
  for (int i = 0; i < draws; ++i) {
    auto walk = sample_static_walk(s, 0, 3, n2v, rng);
    if (walk.size() == 3) {
      visits[walk[1]] += 1;
      transitions[{walk[1], walk[2]}] += 1;
    }
  }
  for (auto [key, count] : transitions) {
    const auto degree = s.out_edges(key.first).size();
    const double conditional = count / static_cast<double>(visits[key.first]);
    CHECK(std::abs(conditional - 1.0 / static_cast<double>(degree)) < 0.015);
  }
}

TEST_CASE("generate_corpus on an edgeless graph is empty") {
  std::vector<EdgeRecord> records{{"a", "b", 1.0, 1}};
  auto g = build_graph(records);
  // b never has out-edges; restrict to it by filtering min_emit_length
  WalkConfig cfg;
  auto corpus = generate_corpus(g, cfg);
  for (const auto& walk : corpus) CHECK(walk.size() >= 2);

  std::vector<EdgeRecord> none;
  auto empty_graph = build_graph(none);
  CHECK(generate_corpus(empty_graph, cfg).empty());
}

TEST_CASE("corpus generation is deterministic across worker counts") {
  Rng seed_rng(55);
  auto records = testutil::random_records(seed_rng, 100, 600, 80);
  auto g = build_graph(records);
  WalkConfig cfg;
  cfg.walks_per_node = 2;
  cfg.seed = 4242;
  cfg.temporal = TemporalStrategy::BiasedRecent;
  cfg.weighted = WeightStrategy::BiasedRaw;
  auto one = generate_corpus(g, cfg, 1);
  auto eight = generate_corpus(g, cfg, 8);
  std::ostringstream s1, s8;
  write_corpus(s1, one);
  write_corpus(s8, eight);
  CHECK(s1.str() == s8.str());
  CHECK_FALSE(one.empty());
}

TEST_CASE("emitted corpus walks admit a temporally valid edge assignment") {
  Rng seed_rng(66);
  auto records = testutil::random_records(seed_rng, 50, 300, 40);
  auto g = build_graph(records);
  WalkConfig cfg;
  cfg.walks_per_node = 3;
  cfg.seed = 9;
  auto corpus = generate_corpus(g, cfg);
  REQUIRE_FALSE(corpus.empty());
  for (const auto& walk : corpus) {
    // greedy earliest-feasible edge assignment; feasible iff the greedy works
    std::int64_t now = std::numeric_limits<std::int64_t>::min();
    bool feasible = true;
    for (std::size_t i = 0; i + 1 < walk.size() && feasible; ++i) {
      auto u = g.find_node(walk[i]);
      auto v = g.find_node(walk[i + 1]);
      REQUIRE(u.has_value());
      REQUIRE(v.has_value());
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const auto& e : g.edges()) {
        if (e.src == *u && e.dst == *v && e.timestamp >= now) {
          best = std::min(best, e.timestamp);
        }
      }
      if (best == std::numeric_limits<std::int64_t>::max()) {
        feasible = false;
      } else {
        now = best;
      }
    }
    CHECK(feasible);
  }
}

TEST_CASE("corpus files round-trip through the line format") {
  WalkCorpus corpus{{"a", "b", "c"}, {"x", "y"}};
  std::ostringstream out;
  write_corpus(out, corpus);
  CHECK(out.str() == "a b c\nx y\n");
  std::istringstream in(out.str());
  CHECK(read_corpus(in) == corpus);
}

TEST_CASE("walk config validation") {
  WalkConfig cfg;
  cfg.walk_length = 1;
  CHECK_THROWS_AS(cfg.validate(), MathError);
  cfg = {};
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), MathError);
  cfg = {};
  cfg.min_emit_length = 11;
  CHECK_THROWS_AS(cfg.validate(), MathError);
}
