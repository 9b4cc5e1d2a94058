#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "selfsim/cli/run.hpp"

using namespace selfsim;
using namespace selfsim::cli;

namespace {

const std::string kSamples = SELFSIM_SAMPLES_DIR;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome exec(const RunConfig& c) {
  std::ostringstream o, e;
  int code = run(c, o, e, "fixed");
  return {code, o.str(), e.str()};
}

RunConfig sample(const std::string& name) { return load_config(kSamples + "/" + name); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// min gap between distinct sums sum_{k<n} lam^k w_k, w in {0,1}^n.
long double min_gap(long double lam, int n) {
  std::vector<long double> v{0};
  long double p = 1;
  for (int k = 0; k < n; ++k, p *= lam) {
    std::vector<long double> next;
    for (auto x : v) next.insert(next.end(), {x, x + p});
    v = std::move(next);
  }
  std::sort(v.begin(), v.end());
  long double best = INFINITY;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] - v[i - 1] > 1e-15L) best = std::min(best, v[i] - v[i - 1]);
  return best;
}

}  // namespace

TEST(Cli, OverlapReportOnGolden) {
  auto r = exec(sample("golden.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["quantity"], "exact_overlap_level");
  EXPECT_EQ(j["value"], 3);
  EXPECT_EQ(j["details"]["word1"], json({1, 2, 2}));
  EXPECT_EQ(j["details"]["word2"], json({2, 1, 1}));
  EXPECT_EQ(j["timestamp"], "fixed");
  EXPECT_EQ(j["version"], kVersion);
  for (const char* k : {"quantity", "value", "error", "method", "precision_bits", "provenance", "details", "input"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Cli, DeterministicApartFromTimestamp) {
  for (const char* name : {"golden.json", "third.json", "sweep_delta8.json"}) {
    auto a = exec(sample(name)), b = exec(sample(name));
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out) << name;
  }
}

TEST(Cli, EchoedInputReloads) {
  auto first = exec(sample("third.json"));
  json j = json::parse(first.out);
  RunConfig again = config_from_json(j["input"]);
  auto second = exec(again);
  ASSERT_EQ(second.code, 0);
  json k = json::parse(second.out);
  EXPECT_EQ(k["value"], j["value"]);
  EXPECT_EQ(k["input"], j["input"]);
}

TEST(Cli, ValidationErrorsCarryPointers) {
  auto bad = exec(sample("bad_probs.json"));
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(bad.out.empty());
  json e = json::parse(bad.err);
  EXPECT_EQ(e["error"]["pointer"], "/ifs/probs");
  EXPECT_EQ(e["exit_code"], 2);

  RunConfig c = sample("third.json");
  c.params["bogus"] = 1;
  auto u = exec(c);
  EXPECT_EQ(u.code, 2);
  EXPECT_EQ(json::parse(u.err)["error"]["pointer"], "/params/bogus");

  c = sample("third.json");
  c.command = "nonsense";
  EXPECT_EQ(json::parse(exec(c).err)["error"]["pointer"], "/command");

  EXPECT_THROW(config_from_json(json{{"command", "dim"}, {"extra", 1}}), ValidationError);
}

TEST(Cli, BudgetExhaustionExitsThree) {
  RunConfig c = sample("dyadic.json");
  c.command = "deltan";
  c.params = {{"n", 16}};
  c.memory_cap = 1000;
  auto r = exec(c);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "BudgetExceeded");
}

TEST(Cli, SweepRowsMatchEnumeration) {
  RunConfig c = sample("sweep_delta8.json");
  auto r = exec(c);
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 22u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"index", "lambda", "mode", "value", "radius", "overlap", "ambiguous", "error"}));
  for (std::size_t i = 1; i <= 20; ++i) {
    EXPECT_EQ(rows[i][2], "numeric");
    double lam = std::stod(rows[i][1]);
    double v = std::stod(rows[i][3]);
    EXPECT_GT(v, 0);
    EXPECT_NEAR(v, static_cast<double>(min_gap(lam, 8)), 1e-12) << rows[i][1];
    EXPECT_TRUE(rows[i][7].empty());
  }
  EXPECT_EQ(rows[21][1], "1/2");
  EXPECT_EQ(rows[21][2], "certified");
  EXPECT_EQ(std::stod(rows[21][3]), 0.0078125);

  c.threads = 1;
  EXPECT_EQ(exec(c).out, r.out);
}

TEST(Cli, EmptySweepGridIsHeaderOnly) {
  RunConfig c = sample("sweep_delta8.json");
  c.params["grid"] = json::array();
  auto r = exec(c);
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(parse_csv(r.out).size(), 1u);
}

TEST(Cli, CsvTables) {
  RunConfig c = sample("third.json");
  c.format = "csv";
  auto rows = parse_csv(exec(c).out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0][0], "n");
  for (std::size_t n = 1; n <= 10; ++n) {
    EXPECT_NEAR(std::stod(rows[n][1]), static_cast<double>(n) * std::log(2.0), 1e-12);
    EXPECT_EQ(rows[n].back(), n == 1 ? std::string("log(2)") : std::to_string(n) + "*log(2)");
  }

  RunConfig m;
  m.command = "mahler";
  m.params = {{"poly", {"-1", "-1", "1"}}};
  m.format = "csv";
  rows = parse_csv(exec(m).out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"quantity", "value", "radius"}));
  EXPECT_NEAR(std::stod(rows[1][1]), (1 + std::sqrt(5.0)) / 2, 1e-15);
}

TEST(Cli, MahlerOfPolynomialNeedsNoSystem) {
  RunConfig c;
  c.command = "mahler";
  c.params = {{"poly", {"-1", "-1", "1"}}};
  auto r = exec(c);
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), (1 + std::sqrt(5.0)) / 2, 1e-15);
}
