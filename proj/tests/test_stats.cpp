// Copyright 2026 The provaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/stats.hpp"
#include "test_support.hpp"

using namespace provaudit;
using nlohmann::json;

namespace {

json reference() {
  static const json j = json::parse(read_file(testsupport::test_data() / "data" / "stats_reference.json"));
  return j;
}

std::vector<std::int64_t> random_counts(std::mt19937_64& g) {
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<std::int64_t> val(0, 500);
  std::vector<std::int64_t> v(static_cast<std::size_t>(len(g)));
  do {
    for (auto& x : v) x = val(g);
  } while (std::accumulate(v.begin(), v.end(), std::int64_t{0}) == 0);
  return v;
}

}  // namespace

TEST(Gini, KnownValues) {
  EXPECT_EQ(gini({10, 10, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(gini({1, 3}), 0.25);
  EXPECT_NEAR(gini({0, 0, 10}), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(gini({7}), 0.0);
  EXPECT_NEAR(gini({32, 8}), 0.3, 1e-15);
  EXPECT_THROW(gini({0, 0}), EmptyCounts);
  EXPECT_THROW(gini(std::vector<std::int64_t>{}), EmptyCounts);
}

TEST(Gini, MatchesMeanDifferenceOracle) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 2000; ++i) {
    const auto v = random_counts(g);
    ASSERT_NEAR(gini(v), testsupport::gini_oracle(v), 1e-12);
  }
}

TEST(Gini, ZeroCountKeysCountTowardsN) {
  ProviderCountVector v;
  v.counts = {{"Google", 5}, {"Nuance", 5}};
  EXPECT_EQ(gini(v), 0.0);
  v.counts["Amazon"] = 0;
  EXPECT_EQ(v.n(), 3u);
  EXPECT_NEAR(gini(v), 1.0 / 3.0, 1e-15);
}

TEST(Gini, PropertyUpperBound) {
  std::mt19937_64 g(2);
  for (int i = 0; i < 500; ++i) {
    const auto v = random_counts(g);
    const double n = static_cast<double>(v.size());
    EXPECT_GE(gini(v), 0.0);
    EXPECT_LE(gini(v), (n - 1) / n + 1e-15);
  }
}

TEST(Percentage, ExactFormatting) {
  EXPECT_EQ((Percentage{273, 1000}).format(2), "27.30");
  EXPECT_EQ((Percentage{0, 7}).format(2), "0.00");
  EXPECT_EQ((Percentage{7, 7}).format(2), "100.00");
  EXPECT_EQ((Percentage{1, 3}).format(2), "33.33");
  EXPECT_EQ((Percentage{2, 3}).format(2), "66.67");
  EXPECT_EQ((Percentage{1, 8}).format(2), "12.50");
  EXPECT_EQ((Percentage{1, 16}).format(2), "6.25");
  EXPECT_EQ((Percentage{1, 32}).format(2), "3.13");  // 3.125 rounds half up
  EXPECT_EQ((Percentage{1, 3}).format(0), "33");
  EXPECT_DOUBLE_EQ((Percentage{3, 100}).value(), 3.0);
}

TEST(Percentage, ModificationRatio) {
  EXPECT_EQ(modification_ratio({3, 100, "debugging", "m", "s"}).format(), "3.00");
  EXPECT_THROW(modification_ratio({0, 0, "", "", ""}), EmptyTally);
  EXPECT_THROW(modification_ratio({5, 4, "", "", ""}), ValidationError);
  EXPECT_THROW(modification_ratio({-1, 4, "", "", ""}), ValidationError);
}

TEST(Bootstrap, DeterministicWithSeed) {
  std::vector<double> obs;
  for (int i = 0; i < 50; ++i) obs.push_back(i % 7);
  const std::function<double(const std::vector<double>&)> mean = [](const std::vector<double>& s) {
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  };
  BootstrapOptions o;
  o.replicates = 500;
  o.rng_seed = 9;
  const auto a = bootstrap(obs, mean, o);
  const auto b = bootstrap(obs, mean, o);
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_EQ(a.b, 500);
  EXPECT_LE(a.ci_low, a.point);
  EXPECT_GE(a.ci_high, a.point);
  o.rng_seed = 10;
  EXPECT_NE(bootstrap(obs, mean, o).replicates, a.replicates);
}

TEST(Bootstrap, ResampleSizeAndUndefined) {
  BootstrapOptions o;
  o.replicates = 200;
  o.resample_size = 3;
  std::size_t seen = 0;
  const auto s = bootstrap(
      10,
      [&](const std::vector<std::size_t>& idx) {
        seen = idx.size();
        if (idx.size() == 3 && idx[0] == idx[1] && idx[1] == idx[2]) throw EmptyCounts("all same");
        return static_cast<double>(idx[0]);
      },
      o);
  EXPECT_EQ(seen, 3u);
  EXPECT_EQ(s.replicates.size(), 200u);
  EXPECT_GE(s.undefined, 0);
  EXPECT_THROW(bootstrap(0, [](const auto&) { return 0.0; }, o), EmptyObservations);
}

TEST(Bootstrap, QuantileType7) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 1.75);
}

TEST(Stats, WelchMatchesReference) {
  for (const auto& c : reference()["welch"]) {
    const auto r = welch_t(c["a"].get<std::vector<double>>(), c["b"].get<std::vector<double>>());
    EXPECT_NEAR(r.statistic, c["statistic"].get<double>(), 1e-9);
    EXPECT_NEAR(r.p_value, c["p_value"].get<double>(), 1e-6);
    EXPECT_NEAR(r.df, c["df"].get<double>(), 1e-6);
  }
}

TEST(Stats, ChiSquareMatchesReference) {
  for (const auto& c : reference()["chi2"]) {
    const auto r = chi_square_independence(c["table"].get<std::vector<std::vector<std::int64_t>>>());
    EXPECT_NEAR(r.statistic, c["statistic"].get<double>(), 1e-9);
    EXPECT_NEAR(r.p_value, c["p_value"].get<double>(), 1e-6);
    EXPECT_EQ(r.df, c["df"].get<double>());
  }
}

TEST(Stats, SpearmanMatchesReference) {
  for (const auto& c : reference()["spearman"]) {
    const auto r = spearman(c["a"].get<std::vector<double>>(), c["b"].get<std::vector<double>>());
    EXPECT_NEAR(r.statistic, c["statistic"].get<double>(), 1e-9);
    EXPECT_NEAR(r.p_value, c["p_value"].get<double>(), 1e-6);
  }
}

TEST(Stats, SpearmanWorkedExample) {
  // d = (-1, 1, -1, 1, 0): rho = 1 - 6 * 4 / (5 * 24) = 0.8.
  EXPECT_NEAR(spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}).statistic, 0.8, 1e-15);
  const auto perfect = spearman({1, 2, 3, 4}, {10, 20, 30, 40});
  EXPECT_DOUBLE_EQ(perfect.statistic, 1.0);
  EXPECT_EQ(perfect.p_value, 0.0);
}

TEST(Stats, EdgeCases) {
  EXPECT_THROW(welch_t({1.0}, {1.0, 2.0}), DegenerateSample);
  const auto separated = welch_t({1, 1, 1}, {2, 2, 2});
  EXPECT_TRUE(std::isfinite(separated.statistic));
  EXPECT_LT(separated.p_value, 1e-6);
  EXPECT_THROW(chi_square_independence({{1, 2}, {0, 0}}), ZeroExpectedCell);
  EXPECT_THROW(chi_square_independence({{1, 2}, {3}}), LengthMismatch);
  EXPECT_EQ(chi_square_independence({{4, 5}}).p_value, 1.0);
  EXPECT_THROW(spearman({1, 2, 3}, {1, 2}), LengthMismatch);
  EXPECT_THROW(spearman({1, 2}, {1, 2}), LengthMismatch);
  EXPECT_THROW(spearman({1, 1, 1}, {1, 2, 3}), DegenerateSample);
  EXPECT_EQ(average_ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Stats, PreferredProvider) {
  ProviderCountVector v;
  v.counts = {{"None", 50}, {"Google", 10}, {"Nuance", 10}, {"IBM", 2}};
  EXPECT_EQ(preferred_provider(v), (std::vector<std::string>{"Google", "Nuance"}));
  v.counts = {{"None", 3}, {"Python Library", 0}};
  EXPECT_THROW(preferred_provider(v), OnlySentinels);
  v.counts = {{"Python Library", 9}, {"Google", 1}};
  EXPECT_EQ(preferred_provider(v), (std::vector<std::string>{"Python Library"}));
}

TEST(Stats, Median) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
}
