#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "etherwalk/csv.hpp"
#include "etherwalk/etherscan.hpp"
#include "test_util.hpp"

using namespace etherwalk;

namespace {

const std::string kFixtures = FIXTURE_DIR;

// Provider that fails transport n times before delegating to fixtures.
class FlakyProvider : public AccountTxProvider {
public:
  FlakyProvider(std::string dir, int failures) : inner_(std::move(dir)), failures_(failures) {}

  std::string fetch(const std::string& address, int page, int page_size) override {
    if (failures_ > 0) {
      --failures_;
      throw TransportError("connection reset");
    }
    return inner_.fetch(address, page, page_size);
  }

private:
  FixtureProvider inner_;
  int failures_;
};

CrawlOptions fast_options() {
  CrawlOptions opt;
  opt.retry_base_ms = 1;  // keep backoff out of test wall time
  return opt;
}

}  // namespace

TEST_CASE("parse_csv reads the canonical format") {
  std::istringstream in("from,to,value,timestamp\nA,B,1.5,10\n");
  auto result = parse_csv(in);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].src == "A");
  CHECK(result.records[0].dst == "B");
  CHECK(result.records[0].weight == 1.5);
  CHECK(result.records[0].timestamp == 10);
  CHECK(result.filtered == 0);
}

TEST_CASE("parse_csv accepts an empty body") {
  std::istringstream in("from,to,value,timestamp\n");
  CHECK(parse_csv(in).records.empty());
}

TEST_CASE("parse_csv drops zero-value rows under require_nonzero") {
  std::istringstream in("from,to,value,timestamp\na,b,0,10\nc,d,2.0,11\n");
  auto result = parse_csv(in);
  CHECK(result.records.size() == 1);
  CHECK(result.filtered == 1);

  std::istringstream again("from,to,value,timestamp\na,b,0,10\n");
  TxFilter keep_zero;
  keep_zero.require_nonzero = false;
  CHECK(parse_csv(again, keep_zero).records.size() == 1);
}

TEST_CASE("parse_csv drops empty recipients and dedupes txhash rows") {
  std::istringstream in(
      "from,to,value,timestamp,txhash\n"
      "a,,1.0,10,0xh1\n"
      "a,b,1.0,11,0xh2\n"
      "a,b,1.0,12,0xH2\n");
  auto result = parse_csv(in);
  CHECK(result.records.size() == 1);
  CHECK(result.filtered == 1);
  CHECK(result.duplicates == 1);
}

TEST_CASE("parse_csv reports malformed input with its line number") {
  std::istringstream missing("not,a,header\n");
  CHECK_THROWS_AS(parse_csv(missing), ParseError);

  std::istringstream bad_value("from,to,value,timestamp\na,b,abc,10\n");
  CHECK_THROWS_WITH_AS(parse_csv(bad_value), doctest::Contains("line 2"), ParseError);

  std::istringstream bad_ts("from,to,value,timestamp\na,b,1.0,xx\n");
  CHECK_THROWS_WITH_AS(parse_csv(bad_ts), doctest::Contains("line 2"), ParseError);

  std::istringstream negative_ts("from,to,value,timestamp\na,b,1.0,-5\n");
  CHECK_THROWS_AS(parse_csv(negative_ts), ParseError);

  std::istringstream short_row("from,to,value,timestamp\na,b,1.0\n");
  CHECK_THROWS_AS(parse_csv(short_row), ParseError);
}

TEST_CASE("write_csv then parse_csv is the identity on canonical records") {
  Rng rng(404);
  auto records = testutil::random_records(rng, 10, 80, 1000);
  const std::string text = to_csv_string(records);
  std::istringstream in(text);
  auto parsed = parse_csv(in);
  REQUIRE(parsed.records.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed.records[i].src == records[i].src);
    CHECK(parsed.records[i].dst == records[i].dst);
    CHECK(parsed.records[i].weight == records[i].weight);  // exact round trip
    CHECK(parsed.records[i].timestamp == records[i].timestamp);
  }
  CHECK(to_csv_string(parsed.records) == text);
}

TEST_CASE("wei conversion is exact at the Ether boundary and below 2^53") {
  CHECK(wei_to_ether("1000000000000000000") == 1.0);
  CHECK(wei_to_ether("0") == 0.0);
  CHECK(wei_to_ether("000") == 0.0);
  CHECK(wei_to_ether("250000000000000000") == 0.25);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t wei = rng.next_u64() >> 11;  // <= 2^53
    CHECK(wei_to_ether(std::to_string(wei)) == static_cast<double>(wei) / 1e18);
  }
  // far beyond 64 bits still lands within double accuracy
  CHECK(wei_to_ether("123456789012345678901234567890") ==
        doctest::Approx(1.2345678901234568e11).epsilon(1e-12));
  CHECK_THROWS_AS(wei_to_ether("12x4"), ParseError);
}

TEST_CASE("etherscan page parsing applies the filter rules exactly") {
  std::ifstream in(kFixtures + "/0xaaa_page1.json");
  REQUIRE(in.good());
  std::ostringstream body;
  body << in.rdbuf();

  auto txs = parse_etherscan_page(body.str());
  REQUIRE(txs.size() == 3);  // failed, zero-value and contract-creation rows dropped
  std::set<std::string> hashes;
  for (const auto& tx : txs) hashes.insert(tx.tx_hash);
  CHECK(hashes == std::set<std::string>{"0x01", "0x02", "0x06"});
  CHECK(txs[0].value_wei == "1000000000000000000");
  CHECK(txs[2].to == "0xbbb");  // lowercased

  auto records = to_edge_records(txs);
  CHECK(records[0].weight == 1.0);  // 10^18 Wei
  CHECK(records[2].weight == 0.25);

  TxFilter lax;
  lax.require_success = false;
  lax.require_nonzero = false;
  lax.drop_missing_recipient = false;
  CHECK(parse_etherscan_page(body.str(), lax).size() == 6);
}

TEST_CASE("etherscan page status handling") {
  CHECK(parse_etherscan_page(
            R"({"status":"0","message":"No transactions found","result":[]})")
            .empty());
  CHECK_THROWS_AS(
      parse_etherscan_page(R"({"status":"0","message":"NOTOK","result":"Invalid API Key"})"),
      ApiError);
  CHECK_THROWS_AS(parse_etherscan_page("not json"), ParseError);
  CHECK_THROWS_AS(parse_etherscan_page(R"({"status":"1","message":"OK"})"), ParseError);
}

TEST_CASE("crawl at depth zero fetches only the center") {
  FixtureProvider provider(kFixtures);
  auto result = crawl_k_order(provider, "0xAAA", 0, 0, fast_options());
  CHECK(result.accounts_fetched == 1);
  REQUIRE(result.transactions.size() == 3);
  CHECK_FALSE(result.account_cap_hit);
}

TEST_CASE("crawl expands recipients to k_out and dedupes by hash") {
  FixtureProvider provider(kFixtures);
  auto result = crawl_k_order(provider, "0xaaa", 0, 1, fast_options());
  // center and its recipient 0xbbb fetched; 0xbbb's recipient 0xccc is not
  CHECK(result.accounts_fetched == 2);
  std::set<std::string> hashes;
  for (const auto& tx : result.transactions) CHECK(hashes.insert(tx.tx_hash).second);
  CHECK(hashes == std::set<std::string>{"0x01", "0x02", "0x06", "0x07"});
}

TEST_CASE("crawl expands senders to k_in") {
  FixtureProvider provider(kFixtures);
  auto result = crawl_k_order(provider, "0xaaa", 1, 0, fast_options());
  CHECK(result.accounts_fetched == 2);  // center and 0xwww
  std::set<std::string> hashes;
  for (const auto& tx : result.transactions) hashes.insert(tx.tx_hash);
  CHECK(hashes == std::set<std::string>{"0x01", "0x02", "0x06", "0x08"});
}

TEST_CASE("crawl replays identically from the same fixtures") {
  FixtureProvider provider(kFixtures);
  auto a = crawl_k_order(provider, "0xaaa", 1, 1, fast_options());
  auto b = crawl_k_order(provider, "0xaaa", 1, 1, fast_options());
  REQUIRE(a.transactions.size() == b.transactions.size());
  for (std::size_t i = 0; i < a.transactions.size(); ++i) {
    CHECK(a.transactions[i].tx_hash == b.transactions[i].tx_hash);
  }
}

TEST_CASE("crawl pages until a short page") {
  FixtureProvider provider(kFixtures);
  auto opt = fast_options();
  opt.page_size = 2;
  auto result = crawl_k_order(provider, "0xpag", 0, 0, opt);
  CHECK(result.transactions.size() == 3);  // page1 full, page2 short
}

TEST_CASE("crawl caps are recorded, not fatal") {
  FixtureProvider provider(kFixtures);
  auto opt = fast_options();
  opt.caps.max_accounts = 1;
  auto capped = crawl_k_order(provider, "0xaaa", 1, 1, opt);
  CHECK(capped.accounts_fetched == 1);
  CHECK(capped.account_cap_hit);

  auto opt2 = fast_options();
  opt2.caps.max_tx_per_account = 1;
  auto truncated = crawl_k_order(provider, "0xaaa", 0, 0, opt2);
  CHECK(truncated.transactions.size() == 1);
  CHECK(truncated.tx_cap_hits >= 1);
}

TEST_CASE("transport failures are retried with backoff then surfaced") {
  FlakyProvider flaky(kFixtures, 3);
  auto result = crawl_k_order(flaky, "0xaaa", 0, 0, fast_options());
  CHECK(result.transactions.size() == 3);

  FlakyProvider dead(kFixtures, 1000000);
  CHECK_THROWS_AS(crawl_k_order(dead, "0xaaa", 0, 0, fast_options()), TransportError);
}

TEST_CASE("retained rows satisfy the active filter predicates") {
  std::ifstream in(kFixtures + "/0xaaa_page1.json");
  std::ostringstream body;
  body << in.rdbuf();
  for (int mask = 0; mask < 8; ++mask) {
    TxFilter filter;
    filter.require_success = mask & 1;
    filter.require_nonzero = mask & 2;
    filter.drop_missing_recipient = mask & 4;
    for (const auto& tx : parse_etherscan_page(body.str(), filter)) {
      if (filter.require_success) CHECK_FALSE(tx.is_error);
      if (filter.require_nonzero) CHECK(tx.value_wei != "0");
      if (filter.drop_missing_recipient) CHECK_FALSE(tx.to.empty());
    }
  }
}

TEST_CASE("crawled transactions build a graph after conversion") {
  FixtureProvider provider(kFixtures);
  auto result = crawl_k_order(provider, "0xaaa", 1, 1, fast_options());
  auto records = to_edge_records(result.transactions);
  auto g = build_graph(records);
  CHECK(g.num_edges() == result.transactions.size());
  CHECK(g.find_node("0xaaa").has_value());
}
