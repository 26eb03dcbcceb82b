/*
  etherwalk - temporal transaction-graph embedding toolkit.

  Subcommands: ingest, crawl, stats, walk, embed, eval, synth, sweep.
  Every artifact-producing run writes the resolved configuration to
  <artifact>.config as flat key=value lines. A saved file feeds back through
  --config; explicit command-line flags win over file values, so a
  deterministic run reproduces its artifact bit-exactly.

  Exit codes: 0 ok, 1 usage, 2 parse, 3 io, 4 api, 5 math.
*/

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "etherwalk/csv.hpp"
#include "etherwalk/error.hpp"
#include "etherwalk/etherscan.hpp"
#include "etherwalk/etherscan_http.hpp"
#include "etherwalk/graph.hpp"
#include "etherwalk/linkpred.hpp"
#include "etherwalk/skipgram.hpp"
#include "etherwalk/synth.hpp"
#include "etherwalk/walk.hpp"

using namespace etherwalk;

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Flat key=value config text, deterministic key order, values unquoted.
class ConfigText {
public:
  void set(const std::string& key, const std::string& value) {
    text_ += key + "=" + value + "\n";
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "1" : "0")); }
  template <typename T>
  void set(const std::string& key, T value) {
    set(key, std::to_string(value));
  }

  const std::string& str() const { return text_; }

private:
  std::string text_;
};

// Feeds key=value lines into options the command line left unset.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  std::unordered_map<std::string, std::vector<std::string>> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": expected key=value");
    }
    pending[line.substr(0, eq)].push_back(line.substr(eq + 1));
  }
  for (const auto& [key, values] : pending) {
    if (key == "config") continue;
    auto* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw ParseError(path + ": unknown key '" + key + "' for subcommand " + sub->get_name());
    }
    if (opt->count() > 0) continue;  // command line wins
    try {
      for (const auto& value : values) opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ParseError(path + ": bad value for '" + key + "': " + e.what());
    }
  }
}

void save_config(const ConfigText& config, const std::string& artifact) {
  std::ofstream out(artifact + ".config", std::ios::binary);
  if (!out) throw IoError("cannot write " + artifact + ".config");
  out << config.str();
}

void log_config(const std::string& name, const ConfigText& config) {
  std::istringstream lines(config.str());
  std::string line;
  while (std::getline(lines, line)) std::cerr << "# " << name << "." << line << '\n';
}

void require_value(const std::string& sub, const std::string& flag, const std::string& value) {
  if (value.empty()) throw ParseError(sub + ": missing required --" + flag);
}

TemporalGraph load_graph(const std::string& path) {
  auto csv = read_csv_file(path);
  return build_graph(csv.records);
}

struct FilterFlags {
  bool keep_failed = false;
  bool keep_zero = false;
  bool keep_contract_creation = false;

  void add_to(CLI::App* sub) {
    sub->add_flag("--keep-failed", keep_failed, "keep failed transactions");
    sub->add_flag("--keep-zero", keep_zero, "keep zero-value transactions");
    sub->add_flag("--keep-contract-creation", keep_contract_creation,
                  "keep rows with an empty recipient");
  }

  TxFilter to_filter() const {
    TxFilter f;
    f.require_success = !keep_failed;
    f.require_nonzero = !keep_zero;
    f.drop_missing_recipient = !keep_contract_creation;
    return f;
  }

  void dump(ConfigText& config) const {
    config.set("keep-failed", keep_failed);
    config.set("keep-zero", keep_zero);
    config.set("keep-contract-creation", keep_contract_creation);
  }
};

struct WalkFlags {
  int length = 10;
  int walks_per_node = 10;
  double alpha = 0.5;
  std::string temporal_bias = "unbiased";
  std::string weight_bias = "unbiased";
  double p = 1.0;
  double q = 1.0;
  int min_emit = 2;

  void add_to(CLI::App* sub) {
    sub->add_option("--l,--length", length, "walk length l");
    sub->add_option("--r,--walks-per-node", walks_per_node, "walks per node r");
    sub->add_option("--alpha", alpha, "time/amount blend exponent");
    sub->add_option("--temporal-bias", temporal_bias, "unbiased|recent|distant");
    sub->add_option("--weight-bias", weight_bias, "unbiased|raw|linear");
    sub->add_option("--p", p, "node2vec return parameter");
    sub->add_option("--q", q, "node2vec in-out parameter");
    sub->add_option("--min-emit", min_emit, "discard walks shorter than this");
  }

  void dump(ConfigText& config) const {
    config.set("l", length);
    config.set("r", walks_per_node);
    config.set("alpha", alpha);
    config.set("temporal-bias", temporal_bias);
    config.set("weight-bias", weight_bias);
    config.set("p", p);
    config.set("q", q);
    config.set("min-emit", min_emit);
  }
};

struct SgnsFlags {
  int dim = 64;
  int window = 4;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t min_count = 1;

  void add_to(CLI::App* sub) {
    sub->add_option("--d,--dim", dim, "embedding dimension d");
    sub->add_option("--k,--window", window, "context window k");
    sub->add_option("--negatives", negatives, "negative samples per pair");
    sub->add_option("--epochs", epochs, "training epochs");
    sub->add_option("--lr", lr, "initial learning rate");
    sub->add_option("--min-count", min_count, "minimum corpus frequency");
  }

  SgnsParams to_params(std::uint64_t seed) const {
    SgnsParams params;
    params.dim = dim;
    params.window = window;
    params.negatives = negatives;
    params.epochs = epochs;
    params.learning_rate = lr;
    params.min_count = min_count;
    params.seed = seed;
    return params;
  }

  void dump(ConfigText& config) const {
    config.set("d", dim);
    config.set("k", window);
    config.set("negatives", negatives);
    config.set("epochs", epochs);
    config.set("lr", lr);
    config.set("min-count", min_count);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal transaction-graph embedding toolkit"};
  app.require_subcommand(0, 1);

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "convert transaction records to canonical CSV");
  std::vector<std::string> ingest_json;
  std::string ingest_in, ingest_out, ingest_config;
  FilterFlags ingest_filter;
  ingest->add_option("--json", ingest_json, "Etherscan-style JSON page files");
  ingest->add_option("--in", ingest_in, "input CSV to filter and re-canonicalize");
  ingest->add_option("--out", ingest_out, "output CSV path");
  ingest_filter.add_to(ingest);
  ingest->add_option("--config", ingest_config, "key=value config file (flags win)");

  // ---- crawl ----
  auto* crawl = app.add_subcommand("crawl", "fetch a K-order account neighborhood");
  std::string crawl_center, crawl_fixtures, crawl_out, crawl_config;
  std::string crawl_host = "https://api.etherscan.io";
  std::uint64_t crawl_k_in = 1, crawl_k_out = 1;
  std::uint64_t crawl_max_accounts = 10000, crawl_max_tx = 100000;
  int crawl_page_size = 10000;
  double crawl_rate = 5.0;
  bool crawl_live = false;
  FilterFlags crawl_filter;
  crawl->add_option("--center", crawl_center, "center account address");
  crawl->add_option("--k-in", crawl_k_in, "inward sampling depth");
  crawl->add_option("--k-out", crawl_k_out, "outward sampling depth");
  crawl->add_option("--fixtures", crawl_fixtures, "directory of recorded JSON pages");
  crawl->add_flag("--live", crawl_live, "query the live API (needs ETHERSCAN_API_KEY)");
  crawl->add_option("--api-host", crawl_host, "API host for --live");
  crawl->add_option("--rate-limit", crawl_rate, "live requests per second");
  crawl->add_option("--max-accounts", crawl_max_accounts, "account fetch cap");
  crawl->add_option("--max-tx-per-account", crawl_max_tx, "per-account transaction cap");
  crawl->add_option("--page-size", crawl_page_size, "rows per API page");
  crawl->add_option("--out", crawl_out, "output CSV path");
  crawl_filter.add_to(crawl);
  crawl->add_option("--config", crawl_config, "key=value config file (flags win)");

  // ---- stats ----
  auto* stats = app.add_subcommand("stats", "degree histogram and power-law fit");
  std::string stats_in, stats_out, stats_config;
  std::uint64_t stats_xmin = 1;
  bool stats_log_cols = false;
  stats->add_option("--in", stats_in, "input CSV");
  stats->add_option("--out", stats_out, "histogram CSV path");
  stats->add_option("--xmin", stats_xmin, "minimum degree for the exponent fit");
  stats->add_flag("--log-cols", stats_log_cols, "append log10 columns for plotting");
  stats->add_option("--config", stats_config, "key=value config file (flags win)");

  // ---- walk ----
  auto* walk = app.add_subcommand("walk", "generate a random-walk corpus");
  std::string walk_in, walk_out, walk_config, walk_mode = "temporal";
  WalkFlags walk_flags;
  std::uint64_t walk_seed = 0;
  int walk_workers = 0;
  walk->add_option("--in", walk_in, "input CSV");
  walk->add_option("--out", walk_out, "corpus path");
  walk->add_option("--mode", walk_mode, "temporal|static-uniform|static-node2vec");
  walk_flags.add_to(walk);
  walk->add_option("--seed", walk_seed, "master seed");
  walk->add_option("--workers", walk_workers, "walk workers (0 = all cores)");
  walk->add_option("--config", walk_config, "key=value config file (flags win)");

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "train SkipGram embeddings from a corpus");
  std::string embed_corpus, embed_out, embed_config;
  SgnsFlags embed_flags;
  std::uint64_t embed_seed = 0;
  int embed_workers = 1;
  embed->add_option("--corpus", embed_corpus, "walk corpus path");
  embed->add_option("--out", embed_out, "embedding file path");
  embed_flags.add_to(embed);
  embed->add_option("--seed", embed_seed, "training seed");
  embed->add_option("--workers", embed_workers,
                    "training workers (>1 is sharded and non-deterministic)");
  embed->add_option("--config", embed_config, "key=value config file (flags win)");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "temporal link-prediction evaluation");
  std::string eval_in, eval_out, eval_method, eval_config;
  WalkFlags eval_walk;
  SgnsFlags eval_sgns;
  double eval_split = 0.5, eval_lambda = 1e-4;
  int eval_clf_epochs = 10, eval_workers = 0;
  std::uint64_t eval_seed = 0;
  eval->add_option("--in", eval_in, "input CSV");
  eval->add_option("--method", eval_method,
                   "static-unbiased|static-biased|twmdg-unbiased|twmdg-biased");
  eval->add_option("--out", eval_out, "report JSON path");
  eval_walk.add_to(eval);
  eval_sgns.add_to(eval);
  eval->add_option("--split-fraction", eval_split, "train fraction of the time split");
  eval->add_option("--lambda", eval_lambda, "classifier L2 strength");
  eval->add_option("--clf-epochs", eval_clf_epochs, "classifier epochs");
  eval->add_option("--seed", eval_seed, "pipeline seed");
  eval->add_option("--workers", eval_workers, "walk workers (0 = all cores)");
  eval->add_option("--config", eval_config, "key=value config file (flags win)");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic transaction graph");
  std::string synth_out, synth_planted, synth_config;
  SynthConfig synth_cfg;
  synth->add_option("--nodes", synth_cfg.n_nodes, "node count");
  synth->add_option("--gamma", synth_cfg.gamma, "degree tail exponent");
  synth->add_option("--horizon", synth_cfg.horizon, "max timestamp");
  synth->add_option("--edges", synth_cfg.n_background_edges, "background edges");
  synth->add_option("--chains", synth_cfg.n_chains, "planted temporal chains");
  synth->add_option("--chain-length", synth_cfg.chain_length, "hops per chain");
  synth->add_option("--mu", synth_cfg.weight_mu, "log-normal amount mu");
  synth->add_option("--sigma", synth_cfg.weight_sigma, "log-normal amount sigma");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path");
  synth->add_option("--planted", synth_planted, "CSV path for planted final hops");
  synth->add_option("--config", synth_config, "key=value config file (flags win)");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "vary one hyperparameter and tabulate AUC");
  std::string sweep_in, sweep_out, sweep_vary, sweep_values, sweep_config;
  std::string sweep_method = "twmdg-biased";
  WalkFlags sweep_walk;
  SgnsFlags sweep_sgns;
  double sweep_split = 0.5, sweep_lambda = 1e-4;
  int sweep_clf_epochs = 10, sweep_workers = 0;
  std::uint64_t sweep_seed = 0;
  sweep->add_option("--in", sweep_in, "input CSV");
  sweep->add_option("--vary", sweep_vary, "one of k|l|r|d")
      ->check(CLI::IsMember({"k", "l", "r", "d"}));
  sweep->add_option("--values", sweep_values, "comma-separated values, e.g. 2,4,6,8");
  sweep->add_option("--method", sweep_method, "pipeline method");
  sweep->add_option("--out", sweep_out, "table CSV path (default stdout)");
  sweep_walk.add_to(sweep);
  sweep_sgns.add_to(sweep);
  sweep->add_option("--split-fraction", sweep_split, "train fraction");
  sweep->add_option("--lambda", sweep_lambda, "classifier L2 strength");
  sweep->add_option("--clf-epochs", sweep_clf_epochs, "classifier epochs");
  sweep->add_option("--seed", sweep_seed, "pipeline seed");
  sweep->add_option("--workers", sweep_workers, "walk workers (0 = all cores)");
  sweep->add_option("--config", sweep_config, "key=value config file (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << '\n';
    return 1;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << '\n';
    return 1;
  }

  try {
    if (*ingest) {
      if (!ingest_config.empty()) apply_config(ingest, ingest_config);
      require_value("ingest", "out", ingest_out);
      if (ingest_json.empty() == ingest_in.empty()) {
        throw ParseError("ingest: provide exactly one of --json or --in");
      }
      const TxFilter filter = ingest_filter.to_filter();
      std::vector<EdgeRecord> records;
      std::size_t filtered = 0, duplicates = 0;
      if (!ingest_json.empty()) {
        std::vector<RawTransaction> txs;
        std::unordered_set<std::string> hashes;
        for (const auto& path : ingest_json) {
          std::ifstream in(path, std::ios::binary);
          if (!in) throw IoError("cannot open " + path);
          std::ostringstream body;
          body << in.rdbuf();
          for (auto& tx : parse_etherscan_page(body.str(), filter)) {
            if (!tx.tx_hash.empty() && !hashes.insert(tx.tx_hash).second) {
              ++duplicates;
              continue;
            }
            txs.push_back(std::move(tx));
          }
        }
        records = to_edge_records(txs);
      } else {
        auto csv = read_csv_file(ingest_in, filter);
        records = std::move(csv.records);
        filtered = csv.filtered;
        duplicates = csv.duplicates;
      }
      write_csv_file(ingest_out, records);
      ConfigText config;
      for (const auto& path : ingest_json) config.set("json", path);
      config.set("in", ingest_in);
      config.set("out", ingest_out);
      ingest_filter.dump(config);
      log_config("ingest", config);
      save_config(config, ingest_out);
      std::cout << "ingested " << records.size() << " records (filtered " << filtered
                << ", duplicates " << duplicates << ") -> " << ingest_out << '\n';
    }

    if (*crawl) {
      if (!crawl_config.empty()) apply_config(crawl, crawl_config);
      require_value("crawl", "center", crawl_center);
      require_value("crawl", "out", crawl_out);
      CrawlOptions opt;
      opt.caps.max_accounts = crawl_max_accounts;
      opt.caps.max_tx_per_account = crawl_max_tx;
      opt.page_size = crawl_page_size;
      opt.filter = crawl_filter.to_filter();
      std::unique_ptr<AccountTxProvider> provider;
      if (crawl_live) {
        const char* key = std::getenv("ETHERSCAN_API_KEY");
        if (key == nullptr || *key == '\0') {
          throw ApiError("crawl --live needs ETHERSCAN_API_KEY in the environment");
        }
        provider = std::make_unique<HttpProvider>(crawl_host, key, crawl_rate);
      } else if (!crawl_fixtures.empty()) {
        provider = std::make_unique<FixtureProvider>(crawl_fixtures);
      } else {
        throw ParseError("crawl: provide --fixtures DIR or --live");
      }
      auto result = crawl_k_order(*provider, crawl_center, crawl_k_in, crawl_k_out, opt);
      write_csv_file(crawl_out, to_edge_records(result.transactions));
      ConfigText config;
      config.set("center", crawl_center);
      config.set("k-in", crawl_k_in);
      config.set("k-out", crawl_k_out);
      config.set("fixtures", crawl_fixtures);
      config.set("live", crawl_live);
      config.set("api-host", crawl_host);
      config.set("rate-limit", crawl_rate);
      config.set("max-accounts", crawl_max_accounts);
      config.set("max-tx-per-account", crawl_max_tx);
      config.set("page-size", crawl_page_size);
      config.set("out", crawl_out);
      crawl_filter.dump(config);
      log_config("crawl", config);
      save_config(config, crawl_out);
      std::cout << "crawled " << result.transactions.size() << " transactions from "
                << result.accounts_fetched << " accounts"
                << (result.account_cap_hit ? " (account cap hit)" : "") << " -> " << crawl_out
                << '\n';
    }

    if (*stats) {
      if (!stats_config.empty()) apply_config(stats, stats_config);
      require_value("stats", "in", stats_in);
      auto g = load_graph(stats_in);
      auto hist = degree_histogram(g, stats_xmin);
      std::ostringstream table;
      table << "degree,node_count";
      if (stats_log_cols) table << ",log10_degree,log10_node_count";
      table << '\n';
      for (auto [degree, count] : hist.counts) {
        table << degree << ',' << count;
        if (stats_log_cols) {
          table << ',' << (degree > 0 ? format_double(std::log10(double(degree))) : "") << ','
                << format_double(std::log10(double(count)));
        }
        table << '\n';
      }
      ConfigText config;
      config.set("in", stats_in);
      config.set("out", stats_out);
      config.set("xmin", stats_xmin);
      config.set("log-cols", stats_log_cols);
      log_config("stats", config);
      if (!stats_out.empty()) {
        std::ofstream out(stats_out, std::ios::binary);
        if (!out) throw IoError("cannot write " + stats_out);
        out << table.str();
        save_config(config, stats_out);
      } else {
        std::cout << table.str();
      }
      std::cout << "nodes=" << g.num_nodes() << " edges=" << g.num_edges()
                << " xmin=" << hist.xmin << " n_tail=" << hist.n_tail << " gamma_hat="
                << (hist.fitted_exponent ? format_double(*hist.fitted_exponent) : "unavailable")
                << '\n';
    }

    if (*walk) {
      if (!walk_config.empty()) apply_config(walk, walk_config);
      require_value("walk", "in", walk_in);
      require_value("walk", "out", walk_out);
      auto g = load_graph(walk_in);
      const int workers = resolve_workers(walk_workers);
      WalkCorpus corpus;
      if (walk_mode == "temporal") {
        WalkConfig cfg;
        cfg.walk_length = walk_flags.length;
        cfg.walks_per_node = walk_flags.walks_per_node;
        cfg.alpha = walk_flags.alpha;
        cfg.temporal = parse_temporal_strategy(walk_flags.temporal_bias);
        cfg.weighted = parse_weight_strategy(walk_flags.weight_bias);
        cfg.min_emit_length = walk_flags.min_emit;
        cfg.seed = walk_seed;
        corpus = generate_corpus(g, cfg, workers);
      } else if (walk_mode == "static-uniform" || walk_mode == "static-node2vec") {
        StaticWalkConfig cfg;
        cfg.walk_length = walk_flags.length;
        cfg.walks_per_node = walk_flags.walks_per_node;
        cfg.min_emit_length = walk_flags.min_emit;
        cfg.seed = walk_seed;
        cfg.mode.node2vec = walk_mode == "static-node2vec";
        cfg.mode.p = walk_flags.p;
        cfg.mode.q = walk_flags.q;
        corpus = generate_static_corpus(collapse_to_static(g), cfg, workers);
      } else {
        throw ParseError("walk: unknown mode '" + walk_mode + "'");
      }
      write_corpus_file(walk_out, corpus);
      ConfigText config;
      config.set("in", walk_in);
      config.set("out", walk_out);
      config.set("mode", walk_mode);
      walk_flags.dump(config);
      config.set("seed", walk_seed);
      config.set("workers", walk_workers);
      log_config("walk", config);
      save_config(config, walk_out);
      std::cout << "wrote " << corpus.size() << " walks -> " << walk_out << '\n';
    }

    if (*embed) {
      if (!embed_config.empty()) apply_config(embed, embed_config);
      require_value("embed", "corpus", embed_corpus);
      require_value("embed", "out", embed_out);
      auto corpus = read_corpus_file(embed_corpus);
      auto emb = train_embeddings(corpus, embed_flags.to_params(embed_seed), embed_workers);
      write_embeddings_file(embed_out, emb);
      ConfigText config;
      config.set("corpus", embed_corpus);
      config.set("out", embed_out);
      embed_flags.dump(config);
      config.set("seed", embed_seed);
      config.set("workers", embed_workers);
      log_config("embed", config);
      save_config(config, embed_out);
      std::cout << "trained " << emb.size() << " x " << emb.dim << " embeddings -> " << embed_out
                << '\n';
    }

    auto fill_pipeline = [](PipelineConfig& cfg, const std::string& method, const WalkFlags& wf,
                            const SgnsFlags& sf, double split, double lambda, int clf_epochs,
                            std::uint64_t seed, int workers) {
      cfg.method = parse_method(method);
      cfg.walk_length = wf.length;
      cfg.walks_per_node = wf.walks_per_node;
      cfg.alpha = wf.alpha;
      if (cfg.method == Method::TwmdgBiased) {
        // biased mode defaults: recent time bias with raw amount bias
        cfg.temporal_bias = wf.temporal_bias == "unbiased"
                                ? TemporalStrategy::BiasedRecent
                                : parse_temporal_strategy(wf.temporal_bias);
        cfg.weight_bias = wf.weight_bias == "unbiased" ? WeightStrategy::BiasedRaw
                                                       : parse_weight_strategy(wf.weight_bias);
      }
      cfg.p = wf.p;
      cfg.q = wf.q;
      cfg.min_emit_length = wf.min_emit;
      cfg.sgns = sf.to_params(0);
      cfg.split.train_fraction = split;
      cfg.lambda = lambda;
      cfg.clf_epochs = clf_epochs;
      cfg.seed = seed;
      cfg.walk_workers = resolve_workers(workers);
    };

    if (*eval) {
      if (!eval_config.empty()) apply_config(eval, eval_config);
      require_value("eval", "in", eval_in);
      require_value("eval", "method", eval_method);
      auto g = load_graph(eval_in);
      PipelineConfig cfg;
      fill_pipeline(cfg, eval_method, eval_walk, eval_sgns, eval_split, eval_lambda,
                    eval_clf_epochs, eval_seed, eval_workers);
      auto report = run_pipeline(g, cfg);
      const std::string json = report.to_json().dump(2) + "\n";
      ConfigText config;
      config.set("in", eval_in);
      config.set("method", eval_method);
      config.set("out", eval_out);
      eval_walk.dump(config);
      eval_sgns.dump(config);
      config.set("split-fraction", eval_split);
      config.set("lambda", eval_lambda);
      config.set("clf-epochs", eval_clf_epochs);
      config.set("seed", eval_seed);
      config.set("workers", eval_workers);
      log_config("eval", config);
      if (!eval_out.empty()) {
        std::ofstream out(eval_out, std::ios::binary);
        if (!out) throw IoError("cannot write " + eval_out);
        out << json;
        save_config(config, eval_out);
      } else {
        std::cout << json;
      }
      std::cout << "method=" << report.method << " auc=" << format_double(report.auc)
                << " ap=" << format_double(report.ap) << " skipped=" << report.n_skipped << '\n';
    }

    if (*synth) {
      if (!synth_config.empty()) apply_config(synth, synth_config);
      require_value("synth", "out", synth_out);
      auto result = generate_synthetic(synth_cfg);
      write_csv_file(synth_out, to_records(result.graph));
      if (!synth_planted.empty()) {
        std::vector<EdgeRecord> hops;
        for (EdgeId e : result.planted_final_hops) {
          const auto& edge = result.graph.edge(e);
          hops.push_back({result.graph.label(edge.src), result.graph.label(edge.dst),
                          edge.weight, edge.timestamp});
        }
        write_csv_file(synth_planted, hops);
      }
      ConfigText config;
      config.set("nodes", synth_cfg.n_nodes);
      config.set("gamma", synth_cfg.gamma);
      config.set("horizon", synth_cfg.horizon);
      config.set("edges", synth_cfg.n_background_edges);
      config.set("chains", synth_cfg.n_chains);
      config.set("chain-length", synth_cfg.chain_length);
      config.set("mu", synth_cfg.weight_mu);
      config.set("sigma", synth_cfg.weight_sigma);
      config.set("seed", synth_cfg.seed);
      config.set("out", synth_out);
      config.set("planted", synth_planted);
      log_config("synth", config);
      save_config(config, synth_out);
      std::cout << "generated " << result.graph.num_nodes() << " nodes, "
                << result.graph.num_edges() << " edges, " << result.chains.size()
                << " chains -> " << synth_out << '\n';
    }

    if (*sweep) {
      if (!sweep_config.empty()) apply_config(sweep, sweep_config);
      require_value("sweep", "in", sweep_in);
      require_value("sweep", "vary", sweep_vary);
      require_value("sweep", "values", sweep_values);
      auto g = load_graph(sweep_in);
      std::vector<int> values;
      std::stringstream tokens(sweep_values);
      std::string token;
      while (std::getline(tokens, token, ',')) {
        try {
          values.push_back(std::stoi(token));
        } catch (const std::exception&) {
          throw ParseError("sweep: bad value '" + token + "'");
        }
      }
      if (values.empty()) throw ParseError("sweep: no values given");
      std::ostringstream table;
      table << "param,value,auc,ap\n";
      for (int value : values) {
        PipelineConfig cfg;
        fill_pipeline(cfg, sweep_method, sweep_walk, sweep_sgns, sweep_split, sweep_lambda,
                      sweep_clf_epochs, sweep_seed, sweep_workers);
        if (sweep_vary == "k") cfg.sgns.window = value;
        if (sweep_vary == "l") cfg.walk_length = value;
        if (sweep_vary == "r") cfg.walks_per_node = value;
        if (sweep_vary == "d") cfg.sgns.dim = value;
        auto report = run_pipeline(g, cfg);
        table << sweep_vary << ',' << value << ',' << format_double(report.auc) << ','
              << format_double(report.ap) << '\n';
        std::cerr << "sweep " << sweep_vary << "=" << value << " auc=" << report.auc << '\n';
      }
      ConfigText config;
      config.set("in", sweep_in);
      config.set("vary", sweep_vary);
      config.set("values", sweep_values);
      config.set("method", sweep_method);
      config.set("out", sweep_out);
      sweep_walk.dump(config);
      sweep_sgns.dump(config);
      config.set("split-fraction", sweep_split);
      config.set("lambda", sweep_lambda);
      config.set("clf-epochs", sweep_clf_epochs);
      config.set("seed", sweep_seed);
      config.set("workers", sweep_workers);
      log_config("sweep", config);
      if (!sweep_out.empty()) {
        std::ofstream out(sweep_out, std::ios::binary);
        if (!out) throw IoError("cannot write " + sweep_out);
        out << table.str();
        save_config(config, sweep_out);
      } else {
        std::cout << table.str();
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
