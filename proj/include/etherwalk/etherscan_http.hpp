#pragma once

// Live Etherscan client. Kept out of etherscan.hpp so fixture-only builds do
// not pull in the HTTP stack.

#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>

#include "etherwalk/error.hpp"
#include "etherwalk/etherscan.hpp"

namespace etherwalk {

class HttpProvider : public AccountTxProvider {
public:
  HttpProvider(std::string host, std::string api_key, double requests_per_second = 5.0)
      : client_(host), api_key_(std::move(api_key)),
        min_interval_ms_(requests_per_second > 0.0 ? 1000.0 / requests_per_second : 0.0) {
    client_.set_connection_timeout(10);
    client_.set_read_timeout(30);
  }

  std::string fetch(const std::string& address, int page, int page_size) override {
    throttle();
    const std::string path = "/api?module=account&action=txlist&address=" + address +
                             "&startblock=0&endblock=99999999&page=" + std::to_string(page) +
                             "&offset=" + std::to_string(page_size) +
                             "&sort=asc&apikey=" + api_key_;
    auto res = client_.Get(path);
    if (!res) throw TransportError("etherscan request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw TransportError("etherscan http status " + std::to_string(res->status));
    }
    return res->body;
  }

private:
  void throttle() {
    using clock = std::chrono::steady_clock;
    const auto now = clock::now();
    if (last_request_.time_since_epoch().count() != 0) {
      const auto elapsed =
          std::chrono::duration_cast<std::chrono::milliseconds>(now - last_request_).count();
      const auto wait = static_cast<long long>(min_interval_ms_) - elapsed;
      if (wait > 0) std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
    last_request_ = clock::now();
  }

  httplib::Client client_;
  std::string api_key_;
  double min_interval_ms_;
  std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace etherwalk
