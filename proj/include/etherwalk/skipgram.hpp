#pragma once

/*
  SkipGram with negative sampling over walk corpora.

  Per (center, context) pair with negatives n1..nk:
    loss = -log sigma(phi_c . psi_o) - sum_i log sigma(-phi_c . psi_ni)
  Logits are clamped to [-30, 30] so the loss stays finite. The center
  gradient is accumulated and applied after the output rows, which makes the
  update the exact gradient at the pre-step point.

  Input vectors start uniform in (-0.5/d, +0.5/d), output vectors at zero.
  Learning rate decays linearly to 1e-4 of its initial value over the total
  number of trained pairs. Single-worker training is bit-deterministic for a
  fixed seed; the optional sharded mode trades that away and is opt-in.
*/

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "etherwalk/csv.hpp"
#include "etherwalk/error.hpp"
#include "etherwalk/rng.hpp"
#include "etherwalk/walk.hpp"

namespace etherwalk {

struct Vocab {
  std::vector<std::string> labels;  // first-appearance order over the corpus
  std::vector<std::uint64_t> freq;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<double> neg_cdf;  // cumulative freq^0.75 mass, last entry 1

  std::size_t size() const noexcept { return labels.size(); }

  std::optional<std::uint32_t> find(const std::string& label) const {
    auto it = index.find(label);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t sample_negative(Rng& rng) const {
    const double u = rng.next_double();
    auto it = std::upper_bound(neg_cdf.begin(), neg_cdf.end(), u);
    if (it == neg_cdf.end()) --it;
    return static_cast<std::uint32_t>(it - neg_cdf.begin());
  }
};

constexpr double kNegativeTableExponent = 0.75;

inline Vocab build_vocab(const WalkCorpus& corpus, std::uint64_t min_count = 1) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& walk : corpus) {
    for (const auto& token : walk) {
      auto [it, inserted] = counts.emplace(token, 0);
      if (inserted) order.push_back(token);
      it->second += 1;
    }
  }
  if (counts.empty()) throw MathError("build_vocab: empty corpus");

  Vocab vocab;
  for (const auto& token : order) {
    const std::uint64_t c = counts[token];
    if (c < min_count) continue;
    vocab.index.emplace(token, static_cast<std::uint32_t>(vocab.labels.size()));
    vocab.labels.push_back(token);
    vocab.freq.push_back(c);
  }
  double total = 0.0;
  for (auto c : vocab.freq) total += std::pow(static_cast<double>(c), kNegativeTableExponent);
  vocab.neg_cdf.resize(vocab.freq.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.freq.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab.freq[i]), kNegativeTableExponent) / total;
    vocab.neg_cdf[i] = acc;
  }
  if (!vocab.neg_cdf.empty()) vocab.neg_cdf.back() = 1.0;
  return vocab;
}

struct SgnsParams {
  int dim = 64;                 // d
  int window = 4;               // k
  int negatives = 5;            // per positive pair
  int epochs = 5;
  double learning_rate = 0.025;  // initial
  std::uint64_t min_count = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (dim < 1) throw MathError("dim must be >= 1");
    if (window < 1) throw MathError("window must be >= 1");
    if (negatives < 1) throw MathError("negatives must be >= 1");
    if (epochs < 1) throw MathError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw MathError("learning_rate must be > 0");
  }
};

struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<double> input;   // phi, |V| x dim row-major
  std::vector<double> output;  // psi

  std::size_t size() const noexcept { return labels.size(); }

  std::span<double> phi(std::uint32_t u) { return {input.data() + u * dim, dim}; }
  std::span<const double> phi(std::uint32_t u) const { return {input.data() + u * dim, dim}; }
  std::span<double> psi(std::uint32_t u) { return {output.data() + u * dim, dim}; }
  std::span<const double> psi(std::uint32_t u) const { return {output.data() + u * dim, dim}; }

  const double* find(const std::string& label) const {
    auto it = index.find(label);
    if (it == index.end()) return nullptr;
    return input.data() + static_cast<std::size_t>(it->second) * dim;
  }
};

namespace detail {

inline double clamp_logit(double z) { return std::min(30.0, std::max(-30.0, z)); }

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log sigma(z), stable on both tails.
inline double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// One gradient step on (center, context, negatives); returns the loss at the
// pre-step parameters. lr = 0 computes the loss and changes nothing.
inline double sgns_step(EmbeddingMatrix& emb, std::uint32_t center, std::uint32_t context,
                        std::span<const std::uint32_t> negatives, double lr) {
  const std::size_t d = emb.dim;
  auto phi_c = emb.phi(center);
  std::vector<double> grad_c(d, 0.0);

  auto psi_o = emb.psi(context);
  const double z = detail::clamp_logit(detail::dot(phi_c, psi_o));
  double loss = -detail::log_sigmoid(z);
  const double g_pos = detail::sigmoid(z) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    grad_c[i] += g_pos * psi_o[i];
    psi_o[i] -= lr * g_pos * phi_c[i];
  }
  for (std::uint32_t n : negatives) {
    auto psi_n = emb.psi(n);
    const double zn = detail::clamp_logit(detail::dot(phi_c, psi_n));
    loss -= detail::log_sigmoid(-zn);
    const double g_neg = detail::sigmoid(zn);
    for (std::size_t i = 0; i < d; ++i) {
      grad_c[i] += g_neg * psi_n[i];
      psi_n[i] -= lr * g_neg * phi_c[i];
    }
  }
  for (std::size_t i = 0; i < d; ++i) phi_c[i] -= lr * grad_c[i];
  return loss;
}

namespace detail {

inline std::vector<std::vector<std::uint32_t>> index_corpus(const WalkCorpus& corpus,
                                                            const Vocab& vocab) {
  std::vector<std::vector<std::uint32_t>> indexed;
  indexed.reserve(corpus.size());
  for (const auto& walk : corpus) {
    std::vector<std::uint32_t> ids;
    ids.reserve(walk.size());
    for (const auto& token : walk) {
      if (auto id = vocab.find(token)) ids.push_back(*id);
    }
    indexed.push_back(std::move(ids));
  }
  return indexed;
}

inline std::uint64_t count_pairs(const std::vector<std::vector<std::uint32_t>>& walks,
                                 int window) {
  std::uint64_t pairs = 0;
  for (const auto& walk : walks) {
    const std::int64_t len = static_cast<std::int64_t>(walk.size());
    for (std::int64_t i = 0; i < len; ++i) {
      const std::int64_t lo = std::max<std::int64_t>(0, i - window);
      const std::int64_t hi = std::min<std::int64_t>(len - 1, i + window);
      pairs += static_cast<std::uint64_t>(hi - lo);  // excludes j == i
    }
  }
  return pairs;
}

// Trains every window pair of one walk. Returns (loss sum, pair count).
inline std::pair<double, std::uint64_t> train_walk(EmbeddingMatrix& emb, const Vocab& vocab,
                                                   std::span<const std::uint32_t> walk,
                                                   const SgnsParams& params, Rng& rng,
                                                   double init_lr, std::uint64_t total_pairs,
                                                   std::uint64_t processed_before) {
  double loss_sum = 0.0;
  std::uint64_t done = 0;
  std::vector<std::uint32_t> negatives;
  const std::int64_t len = static_cast<std::int64_t>(walk.size());
  for (std::int64_t i = 0; i < len; ++i) {
    const std::int64_t lo = std::max<std::int64_t>(0, i - params.window);
    const std::int64_t hi = std::min<std::int64_t>(len - 1, i + params.window);
    for (std::int64_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      const std::uint32_t center = walk[i];
      const std::uint32_t context = walk[j];
      negatives.clear();
      for (int nidx = 0; nidx < params.negatives; ++nidx) {
        std::uint32_t neg = vocab.sample_negative(rng);
        for (int attempt = 0; attempt < 8 && neg == context; ++attempt) {
          neg = vocab.sample_negative(rng);
        }
        if (neg == context) continue;  // exhausted resampling, skip this slot
        negatives.push_back(neg);
      }
      const double progress =
          static_cast<double>(processed_before + done) / static_cast<double>(total_pairs);
      const double lr = init_lr * std::max(1e-4, 1.0 - progress);
      loss_sum += sgns_step(emb, center, context, negatives, lr);
      done += 1;
    }
  }
  return {loss_sum, done};
}

}  // namespace detail

inline EmbeddingMatrix init_embeddings(const Vocab& vocab, const SgnsParams& params) {
  EmbeddingMatrix emb;
  emb.dim = static_cast<std::size_t>(params.dim);
  emb.labels = vocab.labels;
  emb.index = vocab.index;
  emb.input.resize(vocab.size() * emb.dim);
  emb.output.assign(vocab.size() * emb.dim, 0.0);
  Rng init_rng = derive_rng(params.seed, 0, 0);
  const double half_width = 0.5 / static_cast<double>(params.dim);
  for (double& v : emb.input) v = (init_rng.next_double() * 2.0 - 1.0) * half_width;
  return emb;
}

// workers > 1 shards walks across threads with unsynchronized (hogwild)
// updates; only workers == 1 guarantees bit-exact reproducibility.
inline EmbeddingMatrix train_embeddings(const WalkCorpus& corpus, const SgnsParams& params,
                                        int workers = 1,
                                        std::vector<double>* epoch_losses = nullptr) {
  params.validate();
  const Vocab vocab = build_vocab(corpus, params.min_count);
  if (vocab.size() == 0) throw MathError("train_embeddings: empty vocab after min_count");
  const auto walks = detail::index_corpus(corpus, vocab);

  EmbeddingMatrix emb = init_embeddings(vocab, params);

  const std::uint64_t pairs_per_epoch = detail::count_pairs(walks, params.window);
  if (pairs_per_epoch == 0) throw MathError("train_embeddings: no trainable pairs");
  const std::uint64_t total_pairs =
      pairs_per_epoch * static_cast<std::uint64_t>(params.epochs);
  if (epoch_losses) epoch_losses->clear();

  std::uint64_t processed = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::uint64_t epoch_pairs = 0;
    if (workers <= 1) {
      for (std::size_t w = 0; w < walks.size(); ++w) {
        Rng rng = derive_rng(params.seed, static_cast<std::uint64_t>(epoch) + 1, w);
        auto [loss, done] = detail::train_walk(emb, vocab, walks[w], params, rng,
                                               params.learning_rate, total_pairs, processed);
        epoch_loss += loss;
        epoch_pairs += done;
        processed += done;
      }
    } else {
      std::atomic<std::size_t> next{0};
      std::atomic<std::uint64_t> shared_processed{processed};
      std::vector<double> losses(static_cast<std::size_t>(workers), 0.0);
      std::vector<std::uint64_t> counts(static_cast<std::size_t>(workers), 0);
      auto run = [&](int tid) {
        for (;;) {
          const std::size_t w = next.fetch_add(1);
          if (w >= walks.size()) return;
          Rng rng = derive_rng(params.seed, static_cast<std::uint64_t>(epoch) + 1, w);
          auto [loss, done] =
              detail::train_walk(emb, vocab, walks[w], params, rng, params.learning_rate,
                                 total_pairs, shared_processed.load(std::memory_order_relaxed));
          shared_processed.fetch_add(done, std::memory_order_relaxed);
          losses[static_cast<std::size_t>(tid)] += loss;
          counts[static_cast<std::size_t>(tid)] += done;
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < workers; ++t) pool.emplace_back(run, t);
      for (auto& t : pool) t.join();
      for (double l : losses) epoch_loss += l;
      for (auto c : counts) epoch_pairs += c;
      processed += epoch_pairs;
    }
    if (epoch_losses) {
      epoch_losses->push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
    }
  }
  return emb;
}

// Text format: first line "<n> <d>", then one node per line,
// "<label> <v1> ... <vd>" with shortest round-trip decimals.
inline void write_embeddings(std::ostream& out, const EmbeddingMatrix& emb) {
  out << emb.size() << ' ' << emb.dim << '\n';
  for (std::size_t u = 0; u < emb.size(); ++u) {
    out << emb.labels[u];
    auto row = emb.phi(static_cast<std::uint32_t>(u));
    for (double v : row) out << ' ' << format_double(v);
    out << '\n';
  }
}

inline EmbeddingMatrix read_embeddings(std::istream& in) {
  std::size_t n = 0;
  std::size_t d = 0;
  if (!(in >> n >> d)) throw ParseError("embeddings: bad header");
  EmbeddingMatrix emb;
  emb.dim = d;
  emb.input.resize(n * d);
  emb.output.assign(n * d, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    std::string label;
    if (!(in >> label)) throw ParseError("embeddings: truncated at row " + std::to_string(u));
    emb.index.emplace(label, static_cast<std::uint32_t>(u));
    emb.labels.push_back(std::move(label));
    for (std::size_t i = 0; i < d; ++i) {
      if (!(in >> emb.input[u * d + i])) {
        throw ParseError("embeddings: truncated row " + std::to_string(u));
      }
    }
  }
  return emb;
}

inline void write_embeddings_file(const std::string& path, const EmbeddingMatrix& emb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_embeddings(out, emb);
}

inline EmbeddingMatrix read_embeddings_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_embeddings(in);
}

}  // namespace etherwalk
