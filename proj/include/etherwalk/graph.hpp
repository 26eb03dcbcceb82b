#pragma once

/*
  Temporal weighted multidigraph over transaction records.

  Each edge is one transaction (src, dst, weight, timestamp); parallel edges
  and self-loops are kept. The graph is immutable after build_graph and holds
  a per-source edge index sorted by (timestamp, edge_id), so the temporal
  successor query L_t(u) = { e : src(e)=u, t(e) >= t } is a binary-searched
  suffix of a contiguous array. Safe for unsynchronized shared reads.
*/

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "etherwalk/error.hpp"

namespace etherwalk {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

constexpr std::size_t kNoDepthLimit = std::numeric_limits<std::size_t>::max();

// One transaction. weight is Ether (always > 0), timestamp Unix seconds.
struct TemporalEdge {
  EdgeId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double weight = 0.0;
  std::int64_t timestamp = 0;
};

// Input row for build_graph; labels are account addresses.
struct EdgeRecord {
  std::string src;
  std::string dst;
  double weight = 0.0;
  std::int64_t timestamp = 0;
};

inline std::string lowercase_label(std::string label) {
  for (char& c : label) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return label;
}

class TemporalGraph {
public:
  TemporalGraph() = default;

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<TemporalEdge>& edges() const noexcept { return edges_; }
  const TemporalEdge& edge(EdgeId e) const { return edges_[e]; }

  const std::string& label(NodeId u) const { return labels_[u]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<NodeId> find_node(const std::string& label) const {
    auto it = ids_.find(lowercase_label(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  // Out-edges of u sorted ascending by (timestamp, edge_id).
  std::span<const EdgeId> out_edges(NodeId u) const {
    const auto& list = out_index_[u];
    return {list.data(), list.size()};
  }

  // Temporal successive edges L_t(u): out-edges with timestamp >= t, as the
  // suffix of the sorted index found by binary search.
  std::span<const EdgeId> successive_edges(NodeId u, std::int64_t t) const {
    const auto& list = out_index_[u];
    auto first = std::partition_point(list.begin(), list.end(),
                                      [&](EdgeId e) { return edges_[e].timestamp < t; });
    return {list.data() + (first - list.begin()),
            static_cast<std::size_t>(list.end() - first)};
  }

  double total_weight() const noexcept {
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.weight;
    return sum;
  }

  friend TemporalGraph build_graph(std::span<const EdgeRecord> records,
                                   std::span<const std::string> seed_labels);

private:
  NodeId intern(const std::string& raw_label) {
    std::string label = lowercase_label(raw_label);
    auto it = ids_.find(label);
    if (it != ids_.end()) return it->second;
    NodeId id = static_cast<NodeId>(labels_.size());
    ids_.emplace(label, id);
    labels_.push_back(std::move(label));
    return id;
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> ids_;
  std::vector<TemporalEdge> edges_;
  std::vector<std::vector<EdgeId>> out_index_;
};

// Nodes get dense ids in first-appearance order, edges in input order.
// Addresses are lowercased before id assignment, so mixed-case duplicates
// merge into one node. seed_labels are interned ahead of the records, which
// lets callers keep nodes that end up with no incident edge.
inline TemporalGraph build_graph(std::span<const EdgeRecord> records,
                                 std::span<const std::string> seed_labels = {}) {
  TemporalGraph g;
  for (const auto& label : seed_labels) g.intern(label);
  g.edges_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EdgeRecord& rec = records[i];
    if (!(rec.weight > 0.0)) {
      throw ParseError("rejected record " + std::to_string(i) + ": non-positive weight");
    }
    if (rec.timestamp < 0) {
      throw ParseError("rejected record " + std::to_string(i) + ": negative timestamp");
    }
    TemporalEdge e;
    e.id = static_cast<EdgeId>(i);
    e.src = g.intern(rec.src);
    e.dst = g.intern(rec.dst);
    e.weight = rec.weight;
    e.timestamp = rec.timestamp;
    g.edges_.push_back(e);
  }
  g.out_index_.resize(g.labels_.size());
  for (const auto& e : g.edges_) g.out_index_[e.src].push_back(e.id);
  for (auto& list : g.out_index_) {
    std::sort(list.begin(), list.end(), [&](EdgeId a, EdgeId b) {
      const auto& ea = g.edges_[a];
      const auto& eb = g.edges_[b];
      if (ea.timestamp != eb.timestamp) return ea.timestamp < eb.timestamp;
      return a < b;
    });
  }
  return g;
}

inline std::vector<EdgeRecord> to_records(const TemporalGraph& g) {
  std::vector<EdgeRecord> records;
  records.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    records.push_back({g.label(e.src), g.label(e.dst), e.weight, e.timestamp});
  }
  return records;
}

namespace detail {

// BFS distances over the collapsed reachability relation. reverse=true walks
// incoming edges. Unreached nodes stay at SIZE_MAX.
inline std::vector<std::size_t> bfs_depths(const TemporalGraph& g, NodeId source, bool reverse,
                                           std::size_t max_depth) {
  std::vector<std::vector<NodeId>> adj(g.num_nodes());
  for (const auto& e : g.edges()) {
    if (reverse) {
      adj[e.dst].push_back(e.src);
    } else {
      adj[e.src].push_back(e.dst);
    }
  }
  std::vector<std::size_t> depth(g.num_nodes(), kNoDepthLimit);
  depth[source] = 0;
  std::deque<NodeId> frontier{source};
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop_front();
    if (depth[u] >= max_depth) continue;
    for (NodeId v : adj[u]) {
      if (depth[v] == kNoDepthLimit) {
        depth[v] = depth[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return depth;
}

}  // namespace detail

// Subgraph of every edge lying on a directed path of length <= k_out forward
// from center or <= k_in backward into center. Parallel edges between
// qualifying pairs are all kept; self-loops on center survive even at depth
// zero. Ids are re-densified, labels preserved.
inline TemporalGraph k_order_subgraph(const TemporalGraph& g, NodeId center, std::size_t k_in,
                                      std::size_t k_out) {
  const auto dist_out = detail::bfs_depths(g, center, /*reverse=*/false, k_out);
  const auto dist_in = detail::bfs_depths(g, center, /*reverse=*/true, k_in);

  std::vector<EdgeRecord> kept;
  for (const auto& e : g.edges()) {
    const bool forward = dist_out[e.src] != kNoDepthLimit && k_out > 0 && dist_out[e.src] <= k_out - 1;
    const bool backward = dist_in[e.dst] != kNoDepthLimit && k_in > 0 && dist_in[e.dst] <= k_in - 1;
    const bool center_loop = e.src == center && e.dst == center;
    if (forward || backward || center_loop) {
      kept.push_back({g.label(e.src), g.label(e.dst), e.weight, e.timestamp});
    }
  }
  const std::string center_label[] = {g.label(center)};
  return build_graph(kept, center_label);
}

struct StaticEdge {
  NodeId dst = 0;
  double weight = 0.0;
};

// Collapsed view: at most one edge per ordered pair, weight summed over the
// parallel edges, timestamps dropped.
class StaticGraph {
public:
  StaticGraph() = default;
  explicit StaticGraph(std::vector<std::string> labels, std::vector<std::vector<StaticEdge>> adj)
      : labels_(std::move(labels)), adj_(std::move(adj)) {}

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  const std::string& label(NodeId u) const { return labels_[u]; }
  std::span<const StaticEdge> out_edges(NodeId u) const {
    return {adj_[u].data(), adj_[u].size()};
  }
  bool has_edge(NodeId u, NodeId v) const {
    const auto& list = adj_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const StaticEdge& e, NodeId d) { return e.dst < d; });
    return it != list.end() && it->dst == v;
  }
  std::size_t num_edges() const noexcept {
    std::size_t m = 0;
    for (const auto& list : adj_) m += list.size();
    return m;
  }
  double total_weight() const noexcept {
    double sum = 0.0;
    for (const auto& list : adj_)
      for (const auto& e : list) sum += e.weight;
    return sum;
  }

private:
  std::vector<std::string> labels_;
  std::vector<std::vector<StaticEdge>> adj_;  // per src, sorted by dst
};

inline StaticGraph collapse_to_static(const TemporalGraph& g) {
  std::vector<std::vector<StaticEdge>> adj(g.num_nodes());
  std::vector<std::unordered_map<NodeId, std::size_t>> slot(g.num_nodes());
  for (const auto& e : g.edges()) {
    auto& index = slot[e.src];
    auto it = index.find(e.dst);
    if (it == index.end()) {
      index.emplace(e.dst, adj[e.src].size());
      adj[e.src].push_back({e.dst, e.weight});
    } else {
      adj[e.src][it->second].weight += e.weight;
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(),
              [](const StaticEdge& a, const StaticEdge& b) { return a.dst < b.dst; });
  }
  return StaticGraph(g.labels(), std::move(adj));
}

struct DegreeHistogram {
  std::vector<std::pair<std::uint64_t, std::size_t>> counts;  // (degree, node count), ascending
  std::uint64_t xmin = 1;
  std::size_t n_tail = 0;                  // nodes with degree >= xmin
  std::optional<double> fitted_exponent;   // absent when n_tail < 10
};

// Histogram over total degree (in + out, parallel edges counted). The
// power-law exponent is the discrete MLE gamma = 1 + n / sum ln(d / (xmin - 0.5))
// over degrees >= xmin.
inline DegreeHistogram degree_histogram(const TemporalGraph& g, std::uint64_t xmin = 1) {
  if (g.num_nodes() == 0) throw MathError("degree_histogram: empty graph");
  if (xmin < 1) throw MathError("degree_histogram: xmin must be >= 1");
  std::vector<std::uint64_t> degree(g.num_nodes(), 0);
  for (const auto& e : g.edges()) {
    degree[e.src] += 1;
    degree[e.dst] += 1;
  }
  std::unordered_map<std::uint64_t, std::size_t> buckets;
  for (auto d : degree) buckets[d] += 1;

  DegreeHistogram hist;
  hist.xmin = xmin;
  hist.counts.assign(buckets.begin(), buckets.end());
  std::sort(hist.counts.begin(), hist.counts.end());

  double log_sum = 0.0;
  std::size_t n_tail = 0;
  for (auto d : degree) {
    if (d >= xmin) {
      log_sum += std::log(static_cast<double>(d) / (static_cast<double>(xmin) - 0.5));
      n_tail += 1;
    }
  }
  hist.n_tail = n_tail;
  if (n_tail >= 10 && log_sum > 0.0) {
    hist.fitted_exponent = 1.0 + static_cast<double>(n_tail) / log_sum;
  }
  return hist;
}

}  // namespace etherwalk
