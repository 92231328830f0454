#include "wlanips/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "wlanips/errors.hpp"

namespace wlanips {

double KernelSpec::operator()(const double* a, const double* b, std::size_t dim) const {
  if (type == KernelType::Linear) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
  }
  double d2 = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double auto_gamma(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) return 1.0;
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    for (double v : r) {
      sum += v;
      sum2 += v * v;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum2 / static_cast<double>(n) - mean * mean;
  const double d = static_cast<double>(rows.front().size());
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

namespace {

constexpr double kTau = 1e-12;

struct PairProblem {
  std::vector<std::uint32_t> index;  // global sample indices
  std::vector<signed char> y;
  std::vector<float> q;              // n x n, q_ij = y_i y_j K_ij
};

struct SmoResult {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
};

// Dual coordinate descent with second-order working-set selection.
SmoResult smo(const PairProblem& p, double c, double eps, std::size_t max_iter) {
  const std::size_t n = p.y.size();
  SmoResult r;
  r.alpha.assign(n, 0.0);
  std::vector<double> g(n, -1.0);
  std::vector<double> qd(n);
  for (std::size_t t = 0; t < n; ++t) qd[t] = p.q[t * n + t];
  auto& a = r.alpha;
  const auto& y = p.y;
  auto upper = [&](std::size_t t) { return a[t] >= c; };
  auto lower = [&](std::size_t t) { return a[t] <= 0.0; };

  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -g[t] >= gmax) {
          gmax = -g[t];
          i = t;
        }
      } else if (!lower(t) && g[t] >= gmax) {
        gmax = g[t];
        i = t;
      }
    }
    if (i == n) break;
    const float* qi = p.q.data() + i * n;
    double gmax2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (lower(t)) continue;
        const double diff = gmax + g[t];
        gmax2 = std::max(gmax2, g[t]);
        if (diff > 0.0) {
          const double quad = qd[i] + qd[t] - 2.0 * y[i] * qi[t];
          const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_min) {
            obj_min = obj;
            j = t;
          }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - g[t];
        gmax2 = std::max(gmax2, -g[t]);
        if (diff > 0.0) {
          const double quad = qd[i] + qd[t] + 2.0 * y[i] * qi[t];
          const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_min) {
            obj_min = obj;
            j = t;
          }
        }
      }
    }
    if (gmax + gmax2 < eps || j == n) break;

    const float* qj = p.q.data() + j * n;
    const double ai_old = a[i];
    const double aj_old = a[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else {
        if (a[i] < 0.0) {
          a[i] = 0.0;
          a[j] = -diff;
        }
        if (a[j] > c) {
          a[j] = c;
          a[i] = c + diff;
        }
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = sum;
        }
        if (a[i] < 0.0) {
          a[i] = 0.0;
          a[j] = sum;
        }
      }
    }
    const double di = a[i] - ai_old;
    const double dj = a[j] - aj_old;
    for (std::size_t t = 0; t < n; ++t) g[t] += qi[t] * di + qj[t] * dj;
  }
  r.iterations = iter;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  r.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  return r;
}

}  // namespace

SvmModel svm_train(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                   const SvmParams& params) {
  if (rows.size() != labels.size()) throw std::invalid_argument("rows and labels differ in length");
  if (rows.empty()) throw std::invalid_argument("empty training set");
  if (!(params.c > 0.0)) throw std::invalid_argument("C must be positive");
  const std::size_t dim = rows.front().size();
  std::vector<double> x(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw std::invalid_argument("training rows differ in dimension");
    for (std::size_t k = 0; k < dim; ++k) {
      if (!std::isfinite(rows[i][k])) throw std::invalid_argument("non-finite training feature");
      x[i * dim + k] = rows[i][k];
    }
  }

  SvmModel model;
  model.c = params.c;
  model.kernel.type = params.kernel;
  model.kernel.gamma = params.gamma > 0.0 ? params.gamma : auto_gamma(rows);
  model.classes = labels;
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  const std::size_t k_classes = model.classes.size();
  if (k_classes < 2) throw std::invalid_argument("training needs at least two classes");

  std::vector<std::vector<std::uint32_t>> members(k_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(
        std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) - model.classes.begin());
    members[c].push_back(static_cast<std::uint32_t>(i));
  }
  const KernelSpec kernel = model.kernel;
  auto kval = [&](std::uint32_t a, std::uint32_t b) {
    return static_cast<float>(kernel(x.data() + a * dim, x.data() + b * dim, dim));
  };

  // Within-class kernel blocks are shared by K-1 pair problems.
  std::vector<std::vector<float>> self(k_classes);
  detail::parallel_for(k_classes, params.threads, [&](std::size_t c, unsigned) {
    const auto& m = members[c];
    auto& blk = self[c];
    blk.assign(m.size() * m.size(), 0.0F);
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j <= i; ++j) blk[i * m.size() + j] = blk[j * m.size() + i] = kval(m[i], m[j]);
    }
  });

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t a = 0; a < k_classes; ++a) {
    for (std::size_t b = a + 1; b < k_classes; ++b) jobs.emplace_back(a, b);
  }
  struct Trained {
    std::vector<std::uint32_t> sv;
    std::vector<double> coef;
    double bias = 0.0;
    std::size_t iterations = 0;
  };
  std::vector<Trained> trained(jobs.size());
  const unsigned workers = detail::worker_count(params.threads, jobs.size());
  std::vector<PairProblem> scratch(workers);

  detail::parallel_for(jobs.size(), params.threads, [&](std::size_t job, unsigned w) {
    const auto [ca, cb] = jobs[job];
    const auto& ma = members[ca];
    const auto& mb = members[cb];
    const std::size_t na = ma.size();
    const std::size_t n = na + mb.size();
    PairProblem& p = scratch[w];
    p.index.assign(ma.begin(), ma.end());
    p.index.insert(p.index.end(), mb.begin(), mb.end());
    p.y.assign(n, -1);
    std::fill_n(p.y.begin(), na, static_cast<signed char>(1));
    p.q.resize(n * n);
    const auto& sa = self[ca];
    const auto& sb = self[cb];
    for (std::size_t i = 0; i < na; ++i) {
      std::copy_n(sa.data() + i * na, na, p.q.data() + i * n);
      for (std::size_t j = 0; j < mb.size(); ++j) {
        const float v = -kval(ma[i], mb[j]);
        p.q[i * n + na + j] = v;
        p.q[(na + j) * n + i] = v;
      }
    }
    for (std::size_t j = 0; j < mb.size(); ++j) {
      std::copy_n(sb.data() + j * mb.size(), mb.size(), p.q.data() + (na + j) * n + na);
    }
    const SmoResult r = smo(p, params.c, params.tolerance, params.max_iterations);
    Trained& t = trained[job];
    t.bias = -r.rho;
    t.iterations = r.iterations;
    for (std::size_t i = 0; i < n; ++i) {
      if (r.alpha[i] > 0.0) {
        t.sv.push_back(p.index[i]);
        t.coef.push_back(r.alpha[i] * p.y[i]);
      }
    }
  });

  // Support vectors shared across pairs are stored once.
  std::vector<std::uint32_t> used;
  for (const auto& t : trained) used.insert(used.end(), t.sv.begin(), t.sv.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  model.support_vectors.reserve(used.size());
  for (std::uint32_t g : used) model.support_vectors.emplace_back(x.begin() + g * dim, x.begin() + (g + 1) * dim);

  model.pairs.reserve(jobs.size());
  for (std::size_t job = 0; job < jobs.size(); ++job) {
    PairClassifier pc;
    pc.positive = model.classes[jobs[job].first];
    pc.negative = model.classes[jobs[job].second];
    pc.bias = trained[job].bias;
    pc.coef = std::move(trained[job].coef);
    pc.iterations = trained[job].iterations;
    for (std::uint32_t g : trained[job].sv) {
      pc.sv.push_back(static_cast<std::uint32_t>(std::lower_bound(used.begin(), used.end(), g) - used.begin()));
    }
    if (kernel.type == KernelType::Linear) {
      pc.weights.assign(dim, 0.0);
      for (std::size_t s = 0; s < pc.sv.size(); ++s) {
        for (std::size_t k = 0; k < dim; ++k) pc.weights[k] += pc.coef[s] * model.support_vectors[pc.sv[s]][k];
      }
    }
    model.pairs.push_back(std::move(pc));
  }
  model.norm.min.assign(dim, 0.0);
  model.norm.max.assign(dim, 1.0);
  return model;
}

SvmModel svm_train(const RadioMap& train, const SvmParams& params) {
  train.validate();
  std::vector<int> labels;
  labels.reserve(train.samples.size());
  for (const auto& s : train.samples) labels.push_back(s.rp_id);
  SvmModel m = svm_train(train.normalized(), labels, params);
  m.norm = train.norm;
  m.feature_set = train.feature_set;
  m.feature_names = train.feature_names;
  return m;
}

namespace {

VoteResult tally(const SvmModel& m, const std::vector<double>& ksv) {
  VoteResult v;
  const std::size_t k = m.classes.size();
  v.votes.assign(k, 0);
  v.margins.assign(k, 0.0);
  auto cls = [&](int id) {
    return static_cast<std::size_t>(std::lower_bound(m.classes.begin(), m.classes.end(), id) - m.classes.begin());
  };
  for (const auto& p : m.pairs) {
    double f = p.bias;
    for (std::size_t s = 0; s < p.sv.size(); ++s) f += p.coef[s] * ksv[p.sv[s]];
    const std::size_t a = cls(p.positive);
    const std::size_t b = cls(p.negative);
    ++v.votes[f > 0.0 ? a : b];
    v.margins[a] += f;
    v.margins[b] -= f;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (v.votes[c] > v.votes[best] || (v.votes[c] == v.votes[best] && v.margins[c] > v.margins[best])) best = c;
  }
  v.rp_id = m.classes[best];
  return v;
}

std::vector<double> kernel_row(const SvmModel& m, const std::vector<double>& x) {
  std::vector<double> row(m.support_vectors.size());
  for (std::size_t s = 0; s < row.size(); ++s) row[s] = m.kernel(m.support_vectors[s].data(), x.data(), x.size());
  return row;
}

}  // namespace

VoteResult SvmModel::vote(std::span<const double> raw) const {
  if (raw.size() != dimension()) throw std::invalid_argument("feature dimension does not match the model");
  return tally(*this, kernel_row(*this, norm.applied(raw)));
}

int SvmModel::predict(std::span<const double> raw) const { return vote(raw).rp_id; }

std::vector<int> SvmModel::predict_batch(const std::vector<std::vector<double>>& raw_rows) const {
  std::vector<int> out(raw_rows.size());
  detail::parallel_for(raw_rows.size(), 0, [&](std::size_t i, unsigned) { out[i] = predict(raw_rows[i]); });
  return out;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void SvmModel::save(const std::filesystem::path& path, const std::string& stanza) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "# wlanips svm-model\n";
  std::istringstream st(stanza);
  for (std::string line; std::getline(st, line);) {
    if (!line.empty()) out << (line[0] == '#' ? "" : "# ") << line << "\n";
  }
  out << "scheme one-vs-one\n";
  out << "kernel " << (kernel.type == KernelType::Rbf ? "rbf" : "linear") << ' ' << g17(kernel.gamma) << '\n';
  out << "C " << g17(c) << '\n';
  out << "feature_set " << to_string(feature_set) << '\n';
  out << "features";
  for (const auto& n : feature_names) out << ' ' << n;
  out << "\nnorm_min";
  for (double v : norm.min) out << ' ' << g17(v);
  out << "\nnorm_max";
  for (double v : norm.max) out << ' ' << g17(v);
  out << "\nclasses " << classes.size();
  for (int c : classes) out << ' ' << c;
  out << "\nsupport_vectors " << support_vectors.size() << ' ' << dimension() << '\n';
  for (const auto& sv : support_vectors) {
    for (std::size_t k = 0; k < sv.size(); ++k) out << (k ? " " : "") << g17(sv[k]);
    out << '\n';
  }
  out << "pairs " << pairs.size() << '\n';
  for (const auto& p : pairs) {
    out << "pair " << p.positive << ' ' << p.negative << ' ' << g17(p.bias) << ' ' << p.sv.size() << '\n';
    for (std::size_t s = 0; s < p.sv.size(); ++s) out << (s ? " " : "") << p.sv[s] << ' ' << g17(p.coef[s]);
    out << '\n';
  }
  if (!out) throw IoError(path, "write failed");
}

SvmModel SvmModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open model");
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') return std::istringstream(line);
    }
    throw FormatError(path.string() + ": unexpected end of model file");
  };
  auto expect = [&](std::istringstream& ss, const std::string& key) {
    std::string k;
    ss >> k;
    if (k != key) throw FormatError(path.string() + ": expected '" + key + "', found '" + k + "'");
  };
  SvmModel m;
  {
    auto ss = next_line();
    expect(ss, "scheme");
    std::string scheme;
    ss >> scheme;
    if (scheme != "one-vs-one") throw FormatError(path.string() + ": unsupported scheme " + scheme);
  }
  {
    auto ss = next_line();
    expect(ss, "kernel");
    std::string type;
    ss >> type >> m.kernel.gamma;
    if (type == "rbf") m.kernel.type = KernelType::Rbf;
    else if (type == "linear") m.kernel.type = KernelType::Linear;
    else throw FormatError(path.string() + ": unknown kernel " + type);
  }
  {
    auto ss = next_line();
    expect(ss, "C");
    ss >> m.c;
  }
  {
    auto ss = next_line();
    expect(ss, "feature_set");
    std::string fs;
    ss >> fs;
    try {
      m.feature_set = parse_feature_set(fs);
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  {
    auto ss = next_line();
    expect(ss, "features");
    for (std::string n; ss >> n;) m.feature_names.push_back(n);
  }
  {
    auto ss = next_line();
    expect(ss, "norm_min");
    for (double v; ss >> v;) m.norm.min.push_back(v);
  }
  {
    auto ss = next_line();
    expect(ss, "norm_max");
    for (double v; ss >> v;) m.norm.max.push_back(v);
  }
  {
    auto ss = next_line();
    expect(ss, "classes");
    std::size_t k = 0;
    ss >> k;
    m.classes.resize(k);
    for (auto& c : m.classes) ss >> c;
    if (!ss) throw FormatError(path.string() + ": truncated class list");
  }
  std::size_t n_sv = 0;
  std::size_t dim = 0;
  {
    auto ss = next_line();
    expect(ss, "support_vectors");
    ss >> n_sv >> dim;
    if (dim != m.norm.min.size() || dim != m.norm.max.size()) {
      throw FormatError(path.string() + ": support vector dimension disagrees with normalization");
    }
  }
  m.support_vectors.resize(n_sv, std::vector<double>(dim));
  for (auto& sv : m.support_vectors) {
    auto ss = next_line();
    for (auto& v : sv) ss >> v;
    if (!ss) throw FormatError(path.string() + ": malformed support vector");
  }
  std::size_t n_pairs = 0;
  {
    auto ss = next_line();
    expect(ss, "pairs");
    ss >> n_pairs;
  }
  if (n_pairs != m.classes.size() * (m.classes.size() - 1) / 2) {
    throw FormatError(path.string() + ": pair count does not match K(K-1)/2");
  }
  m.pairs.resize(n_pairs);
  for (auto& p : m.pairs) {
    auto ss = next_line();
    expect(ss, "pair");
    std::size_t count = 0;
    ss >> p.positive >> p.negative >> p.bias >> count;
    if (!ss) throw FormatError(path.string() + ": malformed pair header");
    auto body = count > 0 ? next_line() : std::istringstream{};
    p.sv.resize(count);
    p.coef.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
      body >> p.sv[s] >> p.coef[s];
      if (p.sv[s] >= n_sv) throw FormatError(path.string() + ": support vector index out of range");
    }
    if (count > 0 && !body) throw FormatError(path.string() + ": malformed pair body");
    if (m.kernel.type == KernelType::Linear) {
      p.weights.assign(dim, 0.0);
      for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t k = 0; k < dim; ++k) p.weights[k] += p.coef[s] * m.support_vectors[p.sv[s]][k];
      }
    }
  }
  return m;
}

}  // namespace wlanips
