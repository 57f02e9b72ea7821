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

// Diagonal-covariance Gaussian mixture: EM fitting, information criteria,
// model selection and minority-class oversampling.

#ifndef PAXCONNECT_GMM_H_
#define PAXCONNECT_GMM_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "paxconnect/dataset.h"

namespace paxconnect::gmm {

inline constexpr double kVarianceFloor = 1e-6;

class GmmModel {
 public:
  GmmModel() = default;
  // Weights are renormalized to sum to one. Variances below `variance_floor`
  // are raised to it. Throws ConfigError on inconsistent shapes.
  GmmModel(std::vector<double> weights, Matrix means, Matrix variances,
           double variance_floor = kVarianceFloor);

  int num_components() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const std::vector<double>& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const Matrix& variances() const { return variances_; }

  // log p(x), evaluated with log-sum-exp over components.
  double LogDensity(std::span<const double> x) const;
  // log(pi_k) + log N(x; mu_k, diag(var_k)) for every k.
  void ComponentLogJoint(std::span<const double> x, std::span<double> out) const;

  // Mixture mean sum_k pi_k mu_k.
  std::vector<double> Mean() const;
  // Per-dimension mixture variance.
  std::vector<double> Variance() const;

  // Draws a component by its weight, then a diagonal Gaussian sample.
  Matrix Sample(std::size_t n, std::mt19937_64& rng,
                std::vector<int>* components = nullptr) const;

  // Free parameters: K * (2d + 1) - 1.
  std::size_t NumFreeParameters() const;

  // Fit statistics, set by FitEm().
  bool fitted() const { return fit_.has_value(); }
  double log_likelihood() const;
  std::size_t num_fit_samples() const;
  void SetFitStatistics(double log_likelihood, std::size_t num_samples);

  nlohmann::json ToJson() const;
  static GmmModel FromJson(const nlohmann::json& json);

 private:
  struct FitStatistics {
    double log_likelihood;
    std::size_t num_samples;
  };

  void CacheNormalizers();

  std::vector<double> weights_;
  Matrix means_;
  Matrix variances_;
  std::vector<double> log_weights_;
  std::vector<double> log_normalizers_;  // -0.5 * sum_j log(2 pi var_kj)
  std::optional<FitStatistics> fit_;
};

struct EmConfig {
  int num_components = 1;
  std::uint64_t seed = 0;
  int max_iter = 100;
  // Convergence threshold on the change of the per-sample mean
  // log-likelihood between two iterations.
  double tol = 1e-4;
  double variance_floor = kVarianceFloor;
};

struct EmTrace {
  // Log-likelihood of the parameters entering each E-step.
  std::vector<double> log_likelihood;
  // Largest row-sum deviation of the responsibilities from 1.
  double max_responsibility_error = 0.0;
  bool converged = false;
};

// k-means++ seeded means, uniform weights, per-feature data variance. Throws
// DataError when K > N or the data is empty.
GmmModel FitEm(const Matrix& data, const EmConfig& config,
               EmTrace* trace = nullptr);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_params = 0;
};

// AIC = -2 log L + 2 k. BIC = -2 log L + 2 k log N as the default form, or
// -2 log L + k log N with `standard_bic`.
InformationCriteria ComputeCriteria(double log_likelihood, double n_params,
                                    double n_samples, bool standard_bic = false);
// Throws StateError on a model without fit statistics.
InformationCriteria ComputeCriteria(const GmmModel& model,
                                    bool standard_bic = false);

enum class Criterion { kAic, kBic, kBicStandard };

struct CandidateScore {
  int num_components;
  double score;
};

// Index of the lowest score; ties go to the smaller component count.
std::size_t BestCandidate(std::span<const CandidateScore> scores);

// Fits every candidate K with `base` (num_components overridden) and returns
// the fit with the lowest criterion.
GmmModel SelectModel(const Matrix& data, std::span<const int> candidates,
                     Criterion criterion, const EmConfig& base,
                     std::vector<CandidateScore>* scores = nullptr);

struct OversampleConfig {
  int num_components = 200;
  // K is capped at floor(minority_rows / min_rows_per_component).
  int min_rows_per_component = 10;
  // Minority:majority count ratio to reach.
  double target_ratio = 1.0;
  int max_iter = 100;
  double tol = 1e-4;
  // Moves every sampled value to the nearest value observed in the same
  // column of the minority rows, so encoded categories and integer fields
  // stay on their training lattice.
  bool snap_to_observed = true;
};

struct OversampleResult {
  // Training rows followed by the synthetic positives. Synthetic rows carry
  // negative row ids (-1, -2, ...).
  Dataset augmented;
  std::size_t synthetic_rows = 0;
  int components_used = 0;
  std::optional<GmmModel> model;  // empty when nothing had to be sampled
  std::vector<std::string> warnings;
};

// Number of synthetic positives needed to reach `target_ratio`.
std::size_t SyntheticRowsNeeded(std::size_t minority, std::size_t majority,
                                double target_ratio);

OversampleResult OversampleMinority(const Dataset& train,
                                    const OversampleConfig& config,
                                    std::uint64_t seed);

}  // namespace paxconnect::gmm

#endif  // PAXCONNECT_GMM_H_
