#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wlanips/radio_map.hpp"

namespace wlanips {

enum class KernelType { Linear, Rbf };

struct KernelSpec {
  KernelType type = KernelType::Rbf;
  double gamma = 1.0;

  [[nodiscard]] double operator()(const double* a, const double* b, std::size_t dim) const;
};

struct SvmParams {
  KernelType kernel = KernelType::Rbf;
  double gamma = 0.0;  // <= 0 selects 1 / (n_features x variance of the normalized data)
  double c = 10.0;
  double tolerance = 1e-3;  // KKT violation stopping bound
  std::size_t max_iterations = 10'000'000;  // per pair
  unsigned threads = 0;  // 0 = hardware concurrency; results do not depend on it
};

/// Binary machine separating `positive` (decision > 0) from `negative`.
struct PairClassifier {
  int positive = 0;
  int negative = 0;
  double bias = 0.0;                 // decision = sum coef_i K(sv_i, x) + bias
  std::vector<std::uint32_t> sv;     // indices into SvmModel::support_vectors
  std::vector<double> coef;          // alpha_i y_i
  std::vector<double> weights;       // explicit w for the linear kernel
  std::size_t iterations = 0;
};

struct VoteResult {
  int rp_id = 0;
  std::vector<int> votes;       // per class, aligned with SvmModel::classes
  std::vector<double> margins;  // summed signed decision values per class
};

/// One-vs-one soft-margin SVM. Inputs are normalized internally with the
/// stored min-max parameters. Immutable after training; safe to share.
class SvmModel {
 public:
  KernelSpec kernel;
  double c = 10.0;
  FeatureSet feature_set = FeatureSet::RssPlusTaps;
  std::vector<std::string> feature_names;
  NormParams norm;
  std::vector<int> classes;  // ascending RP ids
  std::vector<std::vector<double>> support_vectors;  // normalized
  std::vector<PairClassifier> pairs;                 // K(K-1)/2, ordered (i < j)

  [[nodiscard]] std::size_t dimension() const { return norm.dimension(); }

  /// Majority vote; ties go to the larger summed decision margin, then to the
  /// lower RP id. Throws std::invalid_argument on a dimension mismatch.
  [[nodiscard]] int predict(std::span<const double> raw_features) const;
  [[nodiscard]] VoteResult vote(std::span<const double> raw_features) const;
  [[nodiscard]] std::vector<int> predict_batch(const std::vector<std::vector<double>>& raw_rows) const;

  void save(const std::filesystem::path& path, const std::string& stanza = {}) const;
  static SvmModel load(const std::filesystem::path& path);
};

/// 1 / (n_features x variance over every normalized value).
double auto_gamma(const std::vector<std::vector<double>>& normalized_rows);

/// Trains on normalized rows. Throws std::invalid_argument with fewer than
/// two classes or non-finite input.
SvmModel svm_train(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                   const SvmParams& params);

/// Trains on a radio map, normalizing with its stored parameters.
SvmModel svm_train(const RadioMap& train, const SvmParams& params = {});

}  // namespace wlanips
