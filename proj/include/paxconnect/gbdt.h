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

// Second-order gradient boosted regression trees with logistic loss.
//
// margin(x) = base_score + learning_rate * sum_t tree_t(x)
// probability = sigmoid(margin)
//
// Trees are grown depth first. A node is split on the (feature, threshold)
// maximizing
//
//   gain = 1/2 [G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda)
//               - (G_L + G_R)^2 / (H_L + H_R + lambda)]
//
// and a leaf holds -G / (H + lambda). Rows go left iff x < threshold; missing
// values (NaN) follow the learned default direction.

#ifndef PAXCONNECT_GBDT_H_
#define PAXCONNECT_GBDT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "paxconnect/dataset.h"

namespace paxconnect::gbdt {

struct BoostConfig {
  int n_rounds = 200;
  double learning_rate = 0.4;
  int max_depth = 15;
  double l2_leaf_regularization = 1.0;  // lambda
  double min_child_hessian = 1.0;
  // Histogram bins per feature. 0 selects exact mode: one bin per distinct
  // training value (at most 65535).
  int max_bins = 256;
  std::uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static BoostConfig FromJson(const nlohmann::json& json);
};

struct GradHess {
  double grad;
  double hess;
};

// p = sigmoid(margin); g = p - y; h = p (1 - p).
GradHess LogisticGradHess(int label, double margin);
double Sigmoid(double margin);
// Mean binary cross-entropy of labels under margins.
double LogLoss(std::span<const std::uint8_t> labels,
               std::span<const double> margins);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  bool default_left = true;
  double value = 0.0;  // leaf weight, before the learning rate
  double cover = 0.0;  // training rows reaching the node

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Node 0 is the root.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_[id]; }

  // Index of the leaf reached by `row`.
  int Leaf(std::span<const double> row) const;
  double Predict(std::span<const double> row) const {
    return nodes_[Leaf(row)].value;
  }
  int Depth() const;
  int NumLeaves() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

class TreeEnsemble {
 public:
  TreeEnsemble() = default;
  TreeEnsemble(double base_score, double learning_rate,
               std::vector<std::string> feature_names,
               std::vector<Tree> trees = {}, BoostConfig config = {});

  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::size_t num_features() const { return feature_names_.size(); }
  const std::vector<Tree>& trees() const { return trees_; }
  const BoostConfig& config() const { return config_; }
  void AddTree(Tree tree) { trees_.push_back(std::move(tree)); }

  // Throws ConfigError when the row width differs from num_features().
  double PredictMargin(std::span<const double> row) const;
  // Margin of the first `num_trees` trees.
  double PredictMargin(std::span<const double> row, std::size_t num_trees) const;
  double PredictProba(std::span<const double> row) const;
  std::vector<double> PredictMargins(const Dataset& data) const;
  std::vector<double> PredictProba(const Dataset& data) const;

  // True when every node carries a positive cover.
  bool HasCovers() const;

  nlohmann::json ToJson() const;
  // Throws ParseError on malformed input, VersionError on a format mismatch.
  static TreeEnsemble FromJson(const nlohmann::json& json);
  std::string Serialize() const;
  static TreeEnsemble Deserialize(std::string_view text);

 private:
  double base_score_ = 0.0;
  double learning_rate_ = 0.4;
  std::vector<std::string> feature_names_;
  std::vector<Tree> trees_;
  BoostConfig config_;
};

inline constexpr int kModelFormatVersion = 1;

// Per-feature split candidates learned from training data.
class FeatureBins {
 public:
  // Exact mode when max_bins == 0.
  static FeatureBins Fit(const Dataset& data, int max_bins);

  std::size_t num_features() const { return cuts_.size(); }
  // Candidate thresholds of feature f, ascending. Bin b holds the values in
  // [cuts[b-1], cuts[b]); the last bin is reserved for missing values.
  const std::vector<double>& cuts(std::size_t f) const { return cuts_[f]; }
  std::uint16_t BinOf(std::size_t f, double value) const;
  std::uint16_t MissingBin(std::size_t f) const {
    return static_cast<std::uint16_t>(cuts_[f].size() + 1);
  }

 private:
  std::vector<std::vector<double>> cuts_;
};

struct TrainTrace {
  // Training log-loss before any tree (index 0) and after every round.
  std::vector<double> train_loss;
  std::vector<int> tree_leaves;
};

// Fits one tree to the given gradients. Leaves hold -G / (H + lambda).
// Exposed for tests; Train() calls it once per round.
Tree FitTree(const Dataset& data, std::span<const double> gradients,
             std::span<const double> hessians, const BoostConfig& config);

// Throws DataError with fewer than 2 rows or a single class.
TreeEnsemble Train(const Dataset& train, const BoostConfig& config,
                   TrainTrace* trace = nullptr);

}  // namespace paxconnect::gbdt

#endif  // PAXCONNECT_GBDT_H_
