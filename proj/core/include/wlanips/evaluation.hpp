#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wlanips/radio_map.hpp"
#include "wlanips/svm.hpp"

namespace wlanips {

struct EvalReport {
  std::string scenario;
  std::size_t n_total = 0;
  std::size_t n_correct = 0;
  double accuracy_pct = 0.0;
  std::vector<double> errors_m;  // per test sample, in test-set order
  double mean_m = 0.0;
  double std_m = 0.0;  // sample standard deviation (N - 1)
  double p50_m = 0.0;
  double p90_m = 0.0;
};

/// Linear interpolation between order statistics: rank = q (n - 1).
double percentile(std::span<const double> values, double q);

/// Accuracy and distance statistics for predicted vs. true RP ids.
/// Throws std::invalid_argument on an empty set or an id missing from `grid`.
EvalReport evaluate_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                const std::vector<GridPoint>& grid, const std::string& scenario = {});

/// Predicts every test sample with `model` and scores it against the test RPs.
EvalReport evaluate(const SvmModel& model, const RadioMap& test, const std::vector<GridPoint>& grid);

/// Euclidean k-NN on normalized features; majority vote, ties to the lowest rp_id.
std::vector<int> knn_predict(const RadioMap& train, const RadioMap& test, int k);
EvalReport knn_baseline(const RadioMap& train, const RadioMap& test, int k);

/// Empirical CDF points (sorted error, i / n) for i = 1..n.
std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> errors);

/// Human-readable table of one or more reports, `stanza` prepended as comments.
std::string format_report(const std::vector<EvalReport>& reports, const std::string& stanza = {});
void write_report(const std::vector<EvalReport>& reports, const std::filesystem::path& path,
                  const std::string& stanza = {});
/// Tab-separated "error_m\tcumulative_fraction" rows.
void write_cdf(const EvalReport& report, const std::filesystem::path& path, const std::string& stanza = {});

}  // namespace wlanips
