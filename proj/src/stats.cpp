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

#include "provaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/registry.hpp"
#include "provaudit/rng.hpp"

namespace provaudit {

using nlohmann::json;

std::int64_t ProviderCountVector::total() const {
  std::int64_t s = 0;
  for (const auto& [_, c] : counts) s += c;
  return s;
}

double gini(const std::vector<std::int64_t>& counts) {
  if (counts.empty()) throw EmptyCounts("gini of an empty count vector");
  std::vector<std::int64_t> x(counts);
  for (auto c : x)
    if (c < 0) throw ValidationError("gini: negative count");
  std::sort(x.begin(), x.end());
  const auto n = static_cast<std::int64_t>(x.size());
  __int128 sum = 0;
  __int128 num = 0;
  for (std::int64_t i = 1; i <= n; ++i) {
    sum += x[static_cast<std::size_t>(i - 1)];
    num += static_cast<__int128>(2 * i - n - 1) * x[static_cast<std::size_t>(i - 1)];
  }
  if (sum == 0) throw EmptyCounts("gini: counts sum to zero");
  if (n == 1) return 0.0;
  return static_cast<double>(static_cast<long double>(num) / (static_cast<long double>(n) * static_cast<long double>(sum)));
}

double gini(const ProviderCountVector& v) {
  std::vector<std::int64_t> x;
  x.reserve(v.counts.size());
  for (const auto& [_, c] : v.counts) x.push_back(c);
  return gini(x);
}

double Percentage::value() const {
  return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::string Percentage::format(int decimals) const {
  __int128 scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const __int128 scaled = static_cast<__int128>(numerator) * scale;
  __int128 q = scaled / denominator;
  if (2 * (scaled % denominator) >= denominator) ++q;
  std::string digits;
  for (__int128 v = q; v > 0 || digits.size() <= static_cast<std::size_t>(decimals); v /= 10)
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
  if (decimals > 0) digits.insert(digits.end() - decimals, '.');
  return digits;
}

Percentage modification_ratio(const ModificationTally& t) {
  if (t.total <= 0) throw EmptyTally("modification ratio with N = 0");
  if (t.modifications < 0 || t.modifications > t.total)
    throw ValidationError("modification count " + std::to_string(t.modifications) + " outside [0, " +
                          std::to_string(t.total) + "]");
  return {t.modifications, t.total};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapSummary bootstrap(std::size_t observation_count, const IndexMetric& metric,
                           const BootstrapOptions& options) {
  if (observation_count == 0) throw EmptyObservations("bootstrap over zero observations");
  if (options.replicates < 1) throw ValidationError("bootstrap needs B >= 1");
  const std::size_t m = options.resample_size.value_or(observation_count);
  if (m == 0) throw ValidationError("bootstrap resample size must be positive");

  BootstrapSummary s;
  s.b = options.replicates;
  s.rng_seed = options.rng_seed;
  std::vector<std::size_t> all(observation_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  s.point = metric(all);

  Rng rng(options.rng_seed);
  std::vector<std::size_t> idx(m);
  s.replicates.reserve(static_cast<std::size_t>(options.replicates));
  std::vector<double> defined;
  for (int b = 0; b < options.replicates; ++b) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(observation_count));
    double v;
    try {
      v = metric(idx);
    } catch (const Error&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    s.replicates.push_back(v);
    if (std::isnan(v)) ++s.undefined;
    else defined.push_back(v);
  }
  if (defined.empty()) {
    s.mean = s.ci_low = s.ci_high = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
  std::sort(defined.begin(), defined.end());
  s.ci_low = quantile_sorted(defined, 0.025);
  s.ci_high = quantile_sorted(defined, 0.975);
  return s;
}

json BootstrapSummary::to_json(bool with_replicates) const {
  json j = {{"point", point}, {"mean", mean},         {"ci_low", ci_low},
            {"ci_high", ci_high}, {"b", b}, {"rng_seed", rng_seed}, {"undefined", undefined}};
  if (with_replicates) j["replicates"] = replicates;
  return j;
}

json TestResult::to_json() const { return {{"statistic", statistic}, {"p_value", p_value}, {"df", df}}; }

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double t_two_sided(double t, double df) {
  if (t == 0) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

}  // namespace

TestResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateSample("welch_t needs at least two values per sample");
  constexpr double kVarianceFloor = 1e-12;
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::max(sample_variance(a, ma), kVarianceFloor) / na;
  const double vb = std::max(sample_variance(b, mb), kVarianceFloor) / nb;
  TestResult r;
  r.statistic = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  r.p_value = t_two_sided(r.statistic, r.df);
  return r;
}

TestResult chi_square_independence(const std::vector<std::vector<std::int64_t>>& table) {
  if (table.empty() || table[0].empty()) throw ZeroExpectedCell("chi-square on an empty table");
  const std::size_t cols = table[0].size();
  for (const auto& row : table)
    if (row.size() != cols) throw LengthMismatch("chi-square table rows differ in length");
  std::vector<double> row_sum(table.size(), 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (table[i][j] < 0) throw ValidationError("chi-square table has a negative count");
      const auto v = static_cast<double>(table[i][j]);
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  for (std::size_t i = 0; i < table.size(); ++i)
    if (row_sum[i] == 0) throw ZeroExpectedCell("row " + std::to_string(i) + " sums to zero");
  for (std::size_t j = 0; j < cols; ++j)
    if (col_sum[j] == 0) throw ZeroExpectedCell("column " + std::to_string(j) + " sums to zero");

  TestResult r;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      const double d = static_cast<double>(table[i][j]) - e;
      r.statistic += d * d / e;
    }
  r.df = static_cast<double>((table.size() - 1) * (cols - 1));
  if (r.df == 0) {
    r.p_value = 1.0;
    return r;
  }
  boost::math::chi_squared dist(r.df);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

TestResult spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw LengthMismatch("spearman inputs have lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  if (a.size() < 3) throw LengthMismatch("spearman needs at least three paired values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = mean_of(ra);
  const double mb = mean_of(rb);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) throw DegenerateSample("spearman of a constant ranking is undefined");
  TestResult r;
  r.statistic = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  r.df = static_cast<double>(a.size()) - 2.0;
  if (std::fabs(r.statistic) >= 1.0) {
    r.p_value = 0.0;
    return r;
  }
  const double t = r.statistic * std::sqrt(r.df / ((1.0 - r.statistic) * (1.0 + r.statistic)));
  r.p_value = t_two_sided(t, r.df);
  return r;
}

std::vector<std::string> preferred_provider(const ProviderCountVector& v) {
  std::int64_t best = 0;
  bool any_real = false;
  for (const auto& [p, c] : v.counts) {
    if (p == kProviderNone || c <= 0) continue;
    best = std::max(best, c);
    any_real = any_real || !is_sentinel_provider(p);
  }
  if (!any_real) throw OnlySentinels("no provider other than the sentinels was used");
  std::vector<std::string> out;
  for (const auto& [p, c] : v.counts)
    if (p != kProviderNone && c == best) out.push_back(p);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace provaudit
