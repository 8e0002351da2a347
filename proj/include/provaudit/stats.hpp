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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace provaudit {

/// Per-provider usage counts for one (model, scenario). Every key counts
/// towards n, including keys with a zero count.
struct ProviderCountVector {
  std::map<std::string, std::int64_t> counts;
  std::string scenario_id;
  std::string model_id;
  bool include_none = true;

  std::size_t n() const { return counts.size(); }
  std::int64_t total() const;
};

/// Sorted-formula Gini index, sum_i (2i - n - 1) x_(i) / (n sum x). Returns
/// 0 for n = 1. Throws EmptyCounts when the counts sum to zero.
double gini(const std::vector<std::int64_t>& counts);
double gini(const ProviderCountVector& v);

struct ModificationTally {
  std::int64_t modifications = 0;  // N_m
  std::int64_t total = 0;          // N
  std::string task;
  std::string model_id;
  std::string scenario_id;
};

/// Exact ratio N_m / N, formatted without going through binary floating
/// point.
struct Percentage {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  double value() const;  // percent
  /// Percent rounded half up to `decimals` places, computed in integers.
  std::string format(int decimals = 2) const;
};

/// Throws EmptyTally when N = 0 and ValidationError when N_m is outside [0, N].
Percentage modification_ratio(const ModificationTally& t);

struct BootstrapOptions {
  int replicates = 1000;
  std::uint64_t rng_seed = 0;
  /// Size of each resample; defaults to the number of observations.
  std::optional<std::size_t> resample_size;
};

struct BootstrapSummary {
  double point = 0;
  std::vector<double> replicates;
  double mean = 0;
  double ci_low = 0;
  double ci_high = 0;
  int b = 0;
  std::uint64_t rng_seed = 0;
  /// Replicates on which the metric was undefined (e.g. a resample holding
  /// only excluded labels); left out of mean and CI.
  int undefined = 0;

  nlohmann::json to_json(bool with_replicates = false) const;
};

/// Metric over a resample, given as indices into the observation list.
using IndexMetric = std::function<double(const std::vector<std::size_t>& indices)>;

/// Percentile bootstrap. The point estimate uses every observation once.
/// Throws EmptyObservations.
BootstrapSummary bootstrap(std::size_t observation_count, const IndexMetric& metric, const BootstrapOptions& options);

template <typename T>
BootstrapSummary bootstrap(const std::vector<T>& observations,
                           const std::function<double(const std::vector<T>&)>& metric,
                           const BootstrapOptions& options) {
  return bootstrap(
      observations.size(),
      [&](const std::vector<std::size_t>& idx) {
        std::vector<T> sample;
        sample.reserve(idx.size());
        for (auto i : idx) sample.push_back(observations[i]);
        return metric(sample);
      },
      options);
}

/// Type-7 sample quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  double df = 0;

  nlohmann::json to_json() const;
};

/// Two-sided Welch t-test. Each sample variance is floored at 1e-12 so that
/// fully separated constant samples still give a p-value. Throws
/// DegenerateSample when a sample has fewer than two values.
TestResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

/// Pearson chi-square test of independence on an r x c count table.
/// Throws ZeroExpectedCell when a row or column sums to zero.
TestResult chi_square_independence(const std::vector<std::vector<std::int64_t>>& table);

/// Spearman rank correlation with average ranks for ties; p from the t
/// approximation with n - 2 degrees of freedom. Throws LengthMismatch.
TestResult spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Most used providers excluding "None"; ties are all returned, in key
/// order. Throws OnlySentinels when no non-sentinel provider has a count.
std::vector<std::string> preferred_provider(const ProviderCountVector& v);

/// Median of unsorted values (mean of the middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace provaudit
