/*
 * Copyright 2026 The Paxconnect Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "paxconnect/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "paxconnect/errors.h"

namespace paxconnect::gmm {
namespace {

using nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kFormatVersion = 1;

double LogSumExp(std::span<const double> values) {
  double max = kNegInf;
  for (const double v : values) max = std::max(max, v);
  if (max == kNegInf) return kNegInf;
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

// k-means++ seeding: the first center uniformly, the next ones with
// probability proportional to the squared distance to the closest center.
Matrix SeedMeans(const Matrix& data, int k, std::mt19937_64& rng) {
  const std::size_t n = data.rows();
  Matrix means(k, data.cols());
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (int c = 0; c < k; ++c) {
    std::copy(data.row(pick).begin(), data.row(pick).end(), means.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], SquaredDistance(data.row(i), means.row(c)));
      total += closest[i];
    }
    if (c + 1 == k) break;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= closest[i];
        if (target < 0.0 && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (closest[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
  }
  return means;
}

}  // namespace

GmmModel::GmmModel(std::vector<double> weights, Matrix means, Matrix variances,
                   double variance_floor)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
  if (weights_.empty() || means_.rows() != weights_.size() ||
      variances_.rows() != weights_.size() ||
      variances_.cols() != means_.cols() || means_.cols() == 0) {
    throw ConfigError("GmmModel: inconsistent parameter shapes");
  }
  double total = 0.0;
  for (const double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("GmmModel: weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("GmmModel: weights sum to zero");
  for (double& w : weights_) w /= total;
  for (std::size_t k = 0; k < variances_.rows(); ++k) {
    for (double& v : variances_.row(k)) {
      if (!std::isfinite(v)) throw ConfigError("GmmModel: non-finite variance");
      v = std::max(v, variance_floor);
    }
  }
  CacheNormalizers();
}

void GmmModel::CacheNormalizers() {
  const int k_count = num_components();
  log_weights_.resize(k_count);
  log_normalizers_.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    log_weights_[k] = weights_[k] > 0.0 ? std::log(weights_[k]) : kNegInf;
    double s = 0.0;
    for (const double v : variances_.row(k)) {
      s += std::log(2.0 * std::numbers::pi * v);
    }
    log_normalizers_[k] = -0.5 * s;
  }
}

void GmmModel::ComponentLogJoint(std::span<const double> x,
                                 std::span<double> out) const {
  const int d = dim();
  for (int k = 0; k < num_components(); ++k) {
    if (log_weights_[k] == kNegInf) {
      out[k] = kNegInf;
      continue;
    }
    const double* mu = means_.row(k).data();
    const double* var = variances_.row(k).data();
    double q = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = x[j] - mu[j];
      q += diff * diff / var[j];
    }
    out[k] = log_weights_[k] + log_normalizers_[k] - 0.5 * q;
  }
}

double GmmModel::LogDensity(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw ConfigError("GmmModel::LogDensity: dimension mismatch");
  }
  std::vector<double> joint(num_components());
  ComponentLogJoint(x, joint);
  return LogSumExp(joint);
}

std::vector<double> GmmModel::Mean() const {
  std::vector<double> mean(dim(), 0.0);
  for (int k = 0; k < num_components(); ++k) {
    for (int j = 0; j < dim(); ++j) mean[j] += weights_[k] * means_(k, j);
  }
  return mean;
}

std::vector<double> GmmModel::Variance() const {
  const auto mean = Mean();
  std::vector<double> second(dim(), 0.0);
  for (int k = 0; k < num_components(); ++k) {
    for (int j = 0; j < dim(); ++j) {
      second[j] += weights_[k] * (variances_(k, j) + means_(k, j) * means_(k, j));
    }
  }
  for (int j = 0; j < dim(); ++j) second[j] -= mean[j] * mean[j];
  return second;
}

Matrix GmmModel::Sample(std::size_t n, std::mt19937_64& rng,
                        std::vector<int>* components) const {
  std::discrete_distribution<int> pick(weights_.begin(), weights_.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, dim());
  if (components) components->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = pick(rng);
    if (components) (*components)[i] = k;
    for (int j = 0; j < dim(); ++j) {
      out(i, j) = means_(k, j) + std::sqrt(variances_(k, j)) * normal(rng);
    }
  }
  return out;
}

std::size_t GmmModel::NumFreeParameters() const {
  return static_cast<std::size_t>(num_components()) * (2 * dim() + 1) - 1;
}

double GmmModel::log_likelihood() const {
  if (!fit_) throw StateError("GmmModel has no fit statistics");
  return fit_->log_likelihood;
}

std::size_t GmmModel::num_fit_samples() const {
  if (!fit_) throw StateError("GmmModel has no fit statistics");
  return fit_->num_samples;
}

void GmmModel::SetFitStatistics(double log_likelihood, std::size_t num_samples) {
  fit_ = FitStatistics{log_likelihood, num_samples};
}

json GmmModel::ToJson() const {
  json means = json::array();
  json variances = json::array();
  for (int k = 0; k < num_components(); ++k) {
    means.push_back(std::vector<double>(means_.row(k).begin(), means_.row(k).end()));
    variances.push_back(
        std::vector<double>(variances_.row(k).begin(), variances_.row(k).end()));
  }
  json out = {{"version", kFormatVersion},
              {"covariance", "diagonal"},
              {"components", num_components()},
              {"dim", dim()},
              {"weights", weights_},
              {"means", std::move(means)},
              {"variances", std::move(variances)}};
  if (fit_) {
    out["log_likelihood"] = fit_->log_likelihood;
    out["num_fit_samples"] = fit_->num_samples;
  }
  return out;
}

GmmModel GmmModel::FromJson(const json& in) {
  try {
    if (in.at("version").get<int>() != kFormatVersion) {
      throw VersionError("unsupported GMM format version " +
                         in.at("version").dump());
    }
    const auto weights = in.at("weights").get<std::vector<double>>();
    const int d = in.at("dim").get<int>();
    Matrix means(0, 0);
    Matrix variances(0, 0);
    for (const auto& row : in.at("means")) {
      means.AppendRow(row.get<std::vector<double>>());
    }
    for (const auto& row : in.at("variances")) {
      variances.AppendRow(row.get<std::vector<double>>());
    }
    if (static_cast<int>(means.cols()) != d) {
      throw ParseError("GMM means do not match dim");
    }
    // Variances were floored when the model was built; keep them bit-exact.
    GmmModel model(weights, std::move(means), std::move(variances), 0.0);
    if (in.contains("log_likelihood")) {
      model.SetFitStatistics(in.at("log_likelihood").get<double>(),
                             in.at("num_fit_samples").get<std::size_t>());
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("GMM model: ") + e.what());
  }
}

GmmModel FitEm(const Matrix& data, const EmConfig& config, EmTrace* trace) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const int k_count = config.num_components;
  if (n == 0 || d == 0) throw DataError("FitEm: empty data");
  if (k_count < 1) throw ConfigError("FitEm: num_components must be >= 1");
  if (static_cast<std::size_t>(k_count) > n) {
    throw DataError("FitEm: more components (" + std::to_string(k_count) +
                    ") than samples (" + std::to_string(n) + ")");
  }
  const double floor = config.variance_floor;

  std::mt19937_64 rng(config.seed);
  Matrix means = SeedMeans(data, k_count, rng);
  std::vector<double> data_mean(d, 0.0);
  std::vector<double> data_var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data_mean[j] += data(i, j);
  }
  for (auto& m : data_mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      data_var[j] += (data(i, j) - data_mean[j]) * (data(i, j) - data_mean[j]);
    }
  }
  Matrix variances(k_count, d);
  for (int k = 0; k < k_count; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      variances(k, j) = std::max(data_var[j] / static_cast<double>(n), floor);
    }
  }
  GmmModel model(std::vector<double>(k_count, 1.0 / k_count), means, variances,
                 floor);

  Matrix resp(n, k_count);
  std::vector<double> mass(k_count);
  double previous = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  if (trace) *trace = EmTrace{};

  for (int iter = 0; iter < config.max_iter; ++iter) {
    // E-step.
    log_likelihood = 0.0;
    double max_error = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = resp.row(i);
      model.ComponentLogJoint(data.row(i), r);
      const double lse = LogSumExp(r);
      log_likelihood += lse;
      double sum = 0.0;
      for (auto& v : r) {
        v = std::exp(v - lse);
        sum += v;
      }
      max_error = std::max(max_error, std::abs(sum - 1.0));
    }
    if (trace) {
      trace->log_likelihood.push_back(log_likelihood);
      trace->max_responsibility_error =
          std::max(trace->max_responsibility_error, max_error);
    }
    if (iter > 0 &&
        std::abs(log_likelihood - previous) / static_cast<double>(n) < config.tol) {
      converged = true;
      break;
    }
    previous = log_likelihood;
    if (iter + 1 == config.max_iter) break;

    // M-step. Components without mass keep their parameters.
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < k_count; ++k) mass[k] += resp(i, k);
    }
    Matrix new_means = model.means();
    Matrix new_vars = model.variances();
    for (int k = 0; k < k_count; ++k) {
      if (!(mass[k] > 1e-10)) continue;
      auto mu = new_means.row(k);
      std::fill(mu.begin(), mu.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resp(i, k);
        if (w == 0.0) continue;
        const auto x = data.row(i);
        for (std::size_t j = 0; j < d; ++j) mu[j] += w * x[j];
      }
      for (auto& m : mu) m /= mass[k];
      auto var = new_vars.row(k);
      std::fill(var.begin(), var.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resp(i, k);
        if (w == 0.0) continue;
        const auto x = data.row(i);
        for (std::size_t j = 0; j < d; ++j) {
          var[j] += w * (x[j] - mu[j]) * (x[j] - mu[j]);
        }
      }
      for (auto& v : var) v = std::max(v / mass[k], floor);
    }
    std::vector<double> weights(k_count);
    for (int k = 0; k < k_count; ++k) {
      weights[k] = mass[k] / static_cast<double>(n);
    }
    model = GmmModel(std::move(weights), std::move(new_means),
                     std::move(new_vars), floor);
  }
  if (trace) trace->converged = converged;
  model.SetFitStatistics(log_likelihood, n);
  return model;
}

InformationCriteria ComputeCriteria(double log_likelihood, double n_params,
                                    double n_samples, bool standard_bic) {
  InformationCriteria out;
  out.aic = -2.0 * log_likelihood + 2.0 * n_params;
  const double penalty = standard_bic ? 1.0 : 2.0;
  out.bic = -2.0 * log_likelihood + penalty * n_params * std::log(n_samples);
  out.n_params = static_cast<std::size_t>(n_params);
  return out;
}

InformationCriteria ComputeCriteria(const GmmModel& model, bool standard_bic) {
  if (!model.fitted()) {
    throw StateError("information criteria need a fitted model");
  }
  return ComputeCriteria(model.log_likelihood(),
                         static_cast<double>(model.NumFreeParameters()),
                         static_cast<double>(model.num_fit_samples()),
                         standard_bic);
}

std::size_t BestCandidate(std::span<const CandidateScore> scores) {
  if (scores.empty()) throw ConfigError("no candidate to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.score < b.score ||
        (a.score == b.score && a.num_components < b.num_components)) {
      best = i;
    }
  }
  return best;
}

GmmModel SelectModel(const Matrix& data, std::span<const int> candidates,
                     Criterion criterion, const EmConfig& base,
                     std::vector<CandidateScore>* scores) {
  if (candidates.empty()) throw ConfigError("SelectModel: empty candidate list");
  std::vector<CandidateScore> all;
  std::vector<GmmModel> fits;
  for (const int k : candidates) {
    EmConfig config = base;
    config.num_components = k;
    GmmModel model = FitEm(data, config);
    const auto ic = ComputeCriteria(model, criterion == Criterion::kBicStandard);
    all.push_back({k, criterion == Criterion::kAic ? ic.aic : ic.bic});
    fits.push_back(std::move(model));
  }
  const std::size_t best = BestCandidate(all);
  if (scores) *scores = std::move(all);
  return std::move(fits[best]);
}

std::size_t SyntheticRowsNeeded(std::size_t minority, std::size_t majority,
                                double target_ratio) {
  const auto wanted = static_cast<long long>(
      std::llround(target_ratio * static_cast<double>(majority)));
  return wanted > static_cast<long long>(minority)
             ? static_cast<std::size_t>(wanted) - minority
             : 0;
}

namespace {

// Nearest element of a sorted, non-empty vector; ties go to the smaller one.
double NearestOf(const std::vector<double>& sorted, double x) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.begin()) return *it;
  if (it == sorted.end()) return sorted.back();
  const double above = *it;
  const double below = *(it - 1);
  return (x - below <= above - x) ? below : above;
}

}  // namespace

OversampleResult OversampleMinority(const Dataset& train,
                                    const OversampleConfig& config,
                                    std::uint64_t seed) {
  if (!(config.target_ratio > 0.0 && config.target_ratio <= 1.0)) {
    throw ConfigError("oversampling target_ratio must be in (0, 1]");
  }
  std::vector<std::size_t> minority_rows;
  for (std::size_t r = 0; r < train.num_rows(); ++r) {
    if (train.labels[r]) minority_rows.push_back(r);
  }
  if (minority_rows.empty()) throw DataError("oversampling: no minority rows");
  const std::size_t majority = train.num_rows() - minority_rows.size();

  OversampleResult result;
  result.augmented = train;
  result.synthetic_rows =
      SyntheticRowsNeeded(minority_rows.size(), majority, config.target_ratio);
  if (result.synthetic_rows == 0) return result;

  const int cap = std::max<int>(
      1, static_cast<int>(minority_rows.size() /
                          std::max(1, config.min_rows_per_component)));
  result.components_used = std::min(config.num_components, cap);
  if (result.components_used < config.num_components) {
    result.warnings.push_back(
        "oversampling: " + std::to_string(minority_rows.size()) +
        " minority rows support at most " + std::to_string(cap) +
        " components; using " + std::to_string(result.components_used) +
        " instead of " + std::to_string(config.num_components));
  }

  Matrix minority(minority_rows.size(), train.num_features());
  for (std::size_t i = 0; i < minority_rows.size(); ++i) {
    for (std::size_t c = 0; c < train.num_features(); ++c) {
      minority(i, c) = train.values[c][minority_rows[i]];
    }
  }
  EmConfig em;
  em.num_components = result.components_used;
  em.seed = seed;
  em.max_iter = config.max_iter;
  em.tol = config.tol;
  result.model = FitEm(minority, em);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Matrix samples = result.model->Sample(result.synthetic_rows, rng);
  if (config.snap_to_observed) {
    for (std::size_t c = 0; c < train.num_features(); ++c) {
      std::vector<double> observed(minority.rows());
      for (std::size_t i = 0; i < minority.rows(); ++i) observed[i] = minority(i, c);
      std::sort(observed.begin(), observed.end());
      observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
      for (std::size_t i = 0; i < samples.rows(); ++i) {
        samples(i, c) = NearestOf(observed, samples(i, c));
      }
    }
  }
  for (std::size_t c = 0; c < train.num_features(); ++c) {
    result.augmented.values[c].reserve(train.num_rows() + result.synthetic_rows);
  }
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    result.augmented.AppendRow(samples.row(i), 1,
                               -static_cast<std::int64_t>(i) - 1);
  }
  return result;
}

}  // namespace paxconnect::gmm
