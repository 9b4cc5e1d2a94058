#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <ostream>
#include <string>
#include <vector>

#include "selfsim/numerics/ball.hpp"
#include "selfsim/version.hpp"

namespace selfsim::cli {

using json = nlohmann::json;

/// Shortest decimal that reads back as the same double.
inline std::string shortest(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Nearest double to the centre.
inline double centre(const numerics::Ball& b) { return b.mid().to_double(); }

/// A double no smaller than the radius plus the centre's rounding to double.
inline double radius_up(const numerics::Ball& b) {
  double c = b.mid().to_double();
  numerics::Dyadic total = b.rad() + (b.mid() - numerics::Dyadic::from_double(c)).abs();
  double r = total.to_double();
  if (std::isfinite(r) && cmp(numerics::Dyadic::from_double(r), total) < 0) r = std::nextafter(r, INFINITY);
  return r;
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json ball_json(const numerics::Ball& b) { return {{"mid", centre(b)}, {"rad", radius_up(b)}}; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::string quantity;
  json value;  // number, null, or a structured value
  double error = 0;
  std::string method;
  std::int64_t precision_bits = 0;
  std::vector<std::string> provenance;  // operations that produced the value
  json details = json::object();
  Table table;  // CSV body; empty header means one quantity row
};

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json report_json(const Report& r, const json& input, const std::string& timestamp) {
  json j;
  j["quantity"] = r.quantity;
  j["value"] = r.value;
  j["error"] = number_or_null(r.error);
  j["method"] = r.method;
  j["precision_bits"] = r.precision_bits;
  j["provenance"] = r.provenance;
  j["details"] = r.details;
  j["input"] = input;
  j["version"] = kVersion;
  j["timestamp"] = timestamp;
  return j;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(const Report& r, std::ostream& out) {
  Table t = r.table;
  if (t.header.empty()) {
    t.header = {"quantity", "value", "radius"};
    std::string v = r.value.is_number() ? shortest(r.value.get<double>()) : r.value.is_null() ? "" : r.value.dump();
    t.rows = {{r.quantity, v, shortest(r.error)}};
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << "\n";
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
}

}  // namespace selfsim::cli
