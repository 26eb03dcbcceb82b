#pragma once

/*
  Etherscan-compatible transaction ingestion.

  parse_etherscan_page understands the account/txlist response shape:
    {"status", "message", "result": [{from, to, value, timeStamp, hash,
      isError, txreceipt_status}, ...]}
  Values arrive as integer Wei in decimal strings and are converted to Ether
  (1 Ether = 10^18 Wei) at double precision; the division is exact for values
  up to 2^53 Wei.

  crawl_k_order expands a breadth-first frontier around a center account:
  recipients up to depth k_out, senders up to depth k_in. All network access
  goes through AccountTxProvider, so tests replay recorded JSON fixtures.
*/

#include <chrono>
#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "etherwalk/csv.hpp"
#include "etherwalk/error.hpp"
#include "etherwalk/graph.hpp"

namespace etherwalk {

struct RawTransaction {
  std::string tx_hash;
  std::string from;
  std::string to;
  std::string value_wei;  // normalized decimal string, exact
  std::int64_t timestamp = 0;
  bool is_error = false;
};

// Exact decimal-string Wei to double Ether.
inline double wei_to_ether(const std::string& wei) {
  std::string digits = wei;
  std::size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) return 0.0;
  digits = digits.substr(first);
  for (char c : digits) {
    if (c < '0' || c > '9') throw ParseError("bad wei value '" + wei + "'");
  }
  if (digits.size() <= 38) {  // fits unsigned 128-bit
    unsigned __int128 value = 0;
    for (char c : digits) value = value * 10 + static_cast<unsigned>(c - '0');
    return static_cast<double>(value) / 1e18;
  }
  return std::strtod(digits.c_str(), nullptr) / 1e18;
}

namespace detail {

inline std::string json_string_field(const nlohmann::json& row, const char* key) {
  auto it = row.find(key);
  if (it == row.end()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return {};
}

inline std::string normalize_wei(const std::string& raw) {
  std::size_t first = raw.find_first_not_of('0');
  if (first == std::string::npos) return "0";
  return raw.substr(first);
}

}  // namespace detail

// Keeps rows passing the filter; a "No transactions found" page is an empty
// list, any other non-OK status is an API error.
inline std::vector<RawTransaction> parse_etherscan_page(const std::string& body,
                                                        const TxFilter& filter = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("etherscan page: ") + e.what());
  }
  const std::string status = detail::json_string_field(doc, "status");
  const std::string message = detail::json_string_field(doc, "message");
  if (status != "1") {
    if (status == "0" && message.find("No transactions found") != std::string::npos) return {};
    throw ApiError("etherscan status " + status + ": " + message);
  }
  if (!doc.contains("result") || !doc["result"].is_array()) {
    throw ParseError("etherscan page: missing result array");
  }

  std::vector<RawTransaction> txs;
  for (const auto& row : doc["result"]) {
    RawTransaction tx;
    tx.tx_hash = lowercase_label(detail::json_string_field(row, "hash"));
    tx.from = lowercase_label(detail::json_string_field(row, "from"));
    tx.to = lowercase_label(detail::json_string_field(row, "to"));
    tx.value_wei = detail::normalize_wei(detail::json_string_field(row, "value"));
    tx.is_error = detail::json_string_field(row, "isError") != "0";
    const std::string ts = detail::json_string_field(row, "timeStamp");
    try {
      tx.timestamp = std::stoll(ts);
    } catch (const std::exception&) {
      throw ParseError("etherscan page: bad timeStamp '" + ts + "'");
    }
    const std::string receipt = detail::json_string_field(row, "txreceipt_status");
    if (filter.require_success && (tx.is_error || receipt != "1")) continue;
    if (filter.require_nonzero && tx.value_wei == "0") continue;
    if (filter.drop_missing_recipient && tx.to.empty()) continue;
    txs.push_back(std::move(tx));
  }
  return txs;
}

inline std::vector<EdgeRecord> to_edge_records(std::span<const RawTransaction> txs) {
  std::vector<EdgeRecord> records;
  records.reserve(txs.size());
  for (const auto& tx : txs) {
    records.push_back({tx.from, tx.to, wei_to_ether(tx.value_wei), tx.timestamp});
  }
  return records;
}

// One page of an account's transaction list, raw response body. Implementors
// throw TransportError for retriable failures.
class AccountTxProvider {
public:
  virtual ~AccountTxProvider() = default;
  virtual std::string fetch(const std::string& address, int page, int page_size) = 0;
};

// Replays recorded pages from <dir>/<address>_page<N>.json; a missing file
// reads as an exhausted listing.
class FixtureProvider : public AccountTxProvider {
public:
  explicit FixtureProvider(std::string dir) : dir_(std::move(dir)) {}

  std::string fetch(const std::string& address, int page, int /*page_size*/) override {
    const std::string path =
        dir_ + "/" + lowercase_label(address) + "_page" + std::to_string(page) + ".json";
    std::ifstream in(path, std::ios::binary);
    if (!in) return R"({"status":"0","message":"No transactions found","result":[]})";
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
  }

private:
  std::string dir_;
};

struct CrawlCaps {
  std::size_t max_accounts = 10000;
  std::size_t max_tx_per_account = 100000;
};

struct CrawlOptions {
  CrawlCaps caps;
  int page_size = 10000;
  int max_attempts = 5;
  int retry_base_ms = 1000;  // exponential backoff base
  TxFilter filter;
};

struct CrawlResult {
  std::vector<RawTransaction> transactions;  // deduplicated by tx_hash, discovery order
  std::size_t accounts_fetched = 0;
  bool account_cap_hit = false;
  std::size_t tx_cap_hits = 0;
};

namespace detail {

inline std::vector<RawTransaction> fetch_account(AccountTxProvider& provider,
                                                 const std::string& address,
                                                 const CrawlOptions& opt, CrawlResult& result) {
  std::vector<RawTransaction> txs;
  for (int page = 1;; ++page) {
    std::string body;
    for (int attempt = 0;; ++attempt) {
      try {
        body = provider.fetch(address, page, opt.page_size);
        break;
      } catch (const TransportError&) {
        if (attempt + 1 >= opt.max_attempts) throw;
        std::this_thread::sleep_for(
            std::chrono::milliseconds(opt.retry_base_ms * (1LL << attempt)));
      }
    }
    auto page_txs = parse_etherscan_page(body, opt.filter);
    const bool last_page = page_txs.size() < static_cast<std::size_t>(opt.page_size);
    for (auto& tx : page_txs) txs.push_back(std::move(tx));
    if (txs.size() >= opt.caps.max_tx_per_account) {
      if (txs.size() > opt.caps.max_tx_per_account || !last_page) result.tx_cap_hits += 1;
      txs.resize(opt.caps.max_tx_per_account);
      break;
    }
    if (last_page) break;
  }
  return txs;
}

}  // namespace detail

// Breadth-first crawl centered on one account: one BFS pass over recipients
// to depth k_out, one over senders to depth k_in, sharing a fetch cache so
// each account is retrieved at most once. Cap violations stop expansion and
// are recorded on the result, never thrown.
inline CrawlResult crawl_k_order(AccountTxProvider& provider, const std::string& center,
                                 std::size_t k_in, std::size_t k_out,
                                 const CrawlOptions& opt = {}) {
  CrawlResult result;
  std::unordered_map<std::string, std::vector<RawTransaction>> cache;
  std::vector<std::string> fetch_order;

  // nullptr when the account cap blocks a first-time fetch.
  auto fetch_cached = [&](const std::string& account) -> const std::vector<RawTransaction>* {
    auto it = cache.find(account);
    if (it != cache.end()) return &it->second;
    if (cache.size() >= opt.caps.max_accounts) {
      result.account_cap_hit = true;
      return nullptr;
    }
    auto txs = detail::fetch_account(provider, account, opt, result);
    fetch_order.push_back(account);
    return &cache.emplace(account, std::move(txs)).first->second;
  };

  const std::string root = lowercase_label(center);
  const bool expand_out[2] = {true, false};
  for (int pass = 0; pass < 2; ++pass) {
    const bool outward = expand_out[pass];
    const std::size_t max_depth = outward ? k_out : k_in;
    std::unordered_map<std::string, std::size_t> depth{{root, 0}};
    std::deque<std::string> frontier{root};
    while (!frontier.empty()) {
      const std::string account = frontier.front();
      frontier.pop_front();
      const std::size_t d = depth[account];
      const auto* txs = fetch_cached(account);
      if (txs == nullptr || d >= max_depth) continue;
      for (const auto& tx : *txs) {
        std::string next;
        if (outward && tx.from == account && !tx.to.empty()) next = tx.to;
        if (!outward && tx.to == account) next = tx.from;
        if (next.empty() || depth.contains(next)) continue;
        depth.emplace(next, d + 1);
        frontier.push_back(next);
      }
    }
  }

  std::unordered_set<std::string> seen_hashes;
  for (const auto& account : fetch_order) {
    for (const auto& tx : cache[account]) {
      if (!tx.tx_hash.empty() && !seen_hashes.insert(tx.tx_hash).second) continue;
      result.transactions.push_back(tx);
    }
  }
  result.accounts_fetched = fetch_order.size();
  return result;
}

}  // namespace etherwalk
