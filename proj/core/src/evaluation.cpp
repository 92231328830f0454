#include "wlanips/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wlanips/errors.hpp"

namespace wlanips {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile fraction outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double rank = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

EvalReport evaluate_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                const std::vector<GridPoint>& grid, const std::string& scenario) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth lengths differ");
  if (truth.empty()) throw std::invalid_argument("empty test set");
  std::map<int, const GridPoint*> where;
  for (const auto& g : grid) where[g.rp_id] = &g;
  auto locate = [&](int id) {
    const auto it = where.find(id);
    if (it == where.end()) throw std::invalid_argument("rp " + std::to_string(id) + " is not in the grid");
    return it->second;
  };
  EvalReport r;
  r.scenario = scenario;
  r.n_total = truth.size();
  r.errors_m.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const GridPoint* t = locate(truth[i]);
    const GridPoint* p = locate(predicted[i]);
    if (predicted[i] == truth[i]) ++r.n_correct;
    r.errors_m.push_back(std::hypot(p->x_m - t->x_m, p->y_m - t->y_m));
  }
  const auto n = static_cast<double>(r.n_total);
  r.accuracy_pct = 100.0 * static_cast<double>(r.n_correct) / n;
  r.mean_m = std::accumulate(r.errors_m.begin(), r.errors_m.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : r.errors_m) ss += (e - r.mean_m) * (e - r.mean_m);
  r.std_m = r.n_total > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  r.p50_m = percentile(r.errors_m, 0.5);
  r.p90_m = percentile(r.errors_m, 0.9);
  return r;
}

EvalReport evaluate(const SvmModel& model, const RadioMap& test, const std::vector<GridPoint>& grid) {
  if (test.samples.empty()) throw std::invalid_argument("empty test set");
  if (test.dimension() != model.dimension()) throw std::invalid_argument("test features do not match the model");
  std::vector<std::vector<double>> rows;
  std::vector<int> truth;
  rows.reserve(test.samples.size());
  for (const auto& s : test.samples) {
    rows.push_back(s.features);
    truth.push_back(s.rp_id);
  }
  return evaluate_predictions(model.predict_batch(rows), truth, grid, to_string(model.feature_set));
}

std::vector<int> knn_predict(const RadioMap& train, const RadioMap& test, int k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (train.samples.empty()) throw std::invalid_argument("empty training set");
  const auto x = train.normalized();
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), x.size());
  std::vector<int> out;
  out.reserve(test.samples.size());
  std::vector<std::pair<double, std::size_t>> dist(x.size());
  for (const auto& s : test.samples) {
    const auto q = train.norm.applied(s.features);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) d2 += (x[i][j] - q[j]) * (x[i][j] - q[j]);
      dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::map<int, int> votes;
    for (std::size_t i = 0; i < kk; ++i) ++votes[train.samples[dist[i].second].rp_id];
    int best = votes.begin()->first;
    int best_votes = 0;
    for (const auto& [id, v] : votes) {
      if (v > best_votes) {
        best = id;
        best_votes = v;
      }
    }
    out.push_back(best);
  }
  return out;
}

EvalReport knn_baseline(const RadioMap& train, const RadioMap& test, int k) {
  std::vector<int> truth;
  for (const auto& s : test.samples) truth.push_back(s.rp_id);
  return evaluate_predictions(knn_predict(train, test, k), truth, train.rps,
                              std::string(to_string(train.feature_set)) + "/knn" + std::to_string(k));
}

std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> errors) {
  std::vector<double> v(errors.begin(), errors.end());
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    cdf.emplace_back(v[i], static_cast<double>(i + 1) / static_cast<double>(v.size()));
  }
  return cdf;
}

namespace {

std::string comment_block(const std::string& stanza) {
  std::string out;
  std::istringstream in(stanza);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out += (line[0] == '#' ? "" : "# ") + line + "\n";
  }
  return out;
}

}  // namespace

std::string format_report(const std::vector<EvalReport>& reports, const std::string& stanza) {
  std::string out = comment_block(stanza);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %8s %8s %10s %10s %10s %10s %10s\n", "scenario", "correct", "total",
                "accuracy%", "mean_m", "std_m", "p50_m", "p90_m");
  out += buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-20s %8zu %8zu %10.2f %10.4f %10.4f %10.4f %10.4f\n", r.scenario.c_str(),
                  r.n_correct, r.n_total, r.accuracy_pct, r.mean_m, r.std_m, r.p50_m, r.p90_m);
    out += buf;
  }
  return out;
}

void write_report(const std::vector<EvalReport>& reports, const std::filesystem::path& path,
                  const std::string& stanza) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << format_report(reports, stanza);
  if (!out) throw IoError(path, "write failed");
}

void write_cdf(const EvalReport& report, const std::filesystem::path& path, const std::string& stanza) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << comment_block(stanza) << "error_m\tcumulative_fraction\n";
  char buf[64];
  for (const auto& [e, f] : empirical_cdf(report.errors_m)) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f\n", e, f);
    out << buf;
  }
  if (!out) throw IoError(path, "write failed");
}

}  // namespace wlanips
