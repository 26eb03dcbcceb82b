#pragma once

/*
  Canonical edge-list CSV: header "from,to,value,timestamp" with an optional
  trailing ",txhash" column, UTF-8, LF line endings. Values are Ether written
  as shortest round-trip decimals, so write -> parse -> write is byte-stable.
*/

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "etherwalk/error.hpp"
#include "etherwalk/graph.hpp"

namespace etherwalk {

// Filter switches shared by CSV and API ingestion. require_success only
// applies where a success flag exists (API rows).
struct TxFilter {
  bool require_success = true;
  bool require_nonzero = true;
  bool drop_missing_recipient = true;
};

struct CsvResult {
  std::vector<EdgeRecord> records;
  std::size_t filtered = 0;    // rows dropped by the active TxFilter
  std::size_t duplicates = 0;  // rows dropped for a repeated txhash
};

inline std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline double parse_value_field(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("csv line " + std::to_string(line_no) + ": non-numeric value '" +
                     std::string(text) + "'");
  }
  if (value < 0.0) {
    throw ParseError("csv line " + std::to_string(line_no) + ": negative value");
  }
  return value;
}

inline std::int64_t parse_timestamp_field(std::string_view text, std::size_t line_no) {
  std::int64_t ts = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), ts);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || ts < 0) {
    throw ParseError("csv line " + std::to_string(line_no) + ": bad timestamp '" +
                     std::string(text) + "'");
  }
  return ts;
}

}  // namespace detail

// Malformed rows abort with the offending line number; rows excluded by the
// filter are dropped and counted.
inline CsvResult parse_csv(std::istream& in, const TxFilter& filter = {}) {
  CsvResult result;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_hash = false;
  if (line == "from,to,value,timestamp") {
    has_hash = false;
  } else if (line == "from,to,value,timestamp,txhash") {
    has_hash = true;
  } else {
    throw ParseError("csv: bad header '" + line + "'");
  }

  std::unordered_set<std::string> seen_hashes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    const std::size_t expected = has_hash ? 5u : 4u;
    if (fields.size() != expected) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      throw ParseError("csv line " + std::to_string(line_no) + ": empty sender");
    }
    const double value = detail::parse_value_field(fields[2], line_no);
    const std::int64_t ts = detail::parse_timestamp_field(fields[3], line_no);
    if (has_hash) {
      std::string hash = lowercase_label(std::string(fields[4]));
      if (!hash.empty() && !seen_hashes.insert(hash).second) {
        result.duplicates += 1;
        continue;
      }
    }
    if (filter.drop_missing_recipient && fields[1].empty()) {
      result.filtered += 1;
      continue;
    }
    if (filter.require_nonzero && value == 0.0) {
      result.filtered += 1;
      continue;
    }
    result.records.push_back(
        {std::string(fields[0]), std::string(fields[1]), value, ts});
  }
  return result;
}

inline void write_csv(std::ostream& out, std::span<const EdgeRecord> records) {
  out << "from,to,value,timestamp\n";
  for (const auto& rec : records) {
    out << rec.src << ',' << rec.dst << ',' << format_double(rec.weight) << ','
        << rec.timestamp << '\n';
  }
}

inline std::string to_csv_string(std::span<const EdgeRecord> records) {
  std::ostringstream out;
  write_csv(out, records);
  return out.str();
}

inline CsvResult read_csv_file(const std::string& path, const TxFilter& filter = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_csv(in, filter);
}

inline void write_csv_file(const std::string& path, std::span<const EdgeRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out, records);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace etherwalk
