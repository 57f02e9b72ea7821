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

#include "paxconnect/shap.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>

#include "paxconnect/errors.h"

namespace paxconnect::shap {
namespace {

using gbdt::Tree;
using gbdt::TreeNode;

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void ExtendPath(PathElement* path, int depth, double zero_fraction,
                double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / (depth + 1.0);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / (depth + 1.0);
  }
}

void UnwindPath(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
      next_one_portion =
          tmp - path[i].weight * zero_fraction * (depth - i) / (depth + 1.0);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero_fraction * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total permutation weight of the path with element `index` removed.
double UnwoundPathSum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
      total += tmp;
      next_one_portion =
          path[i].weight - tmp * zero_fraction * (depth - i) / (depth + 1.0);
    } else if (zero_fraction != 0.0) {
      total += path[i].weight / zero_fraction / ((depth - i) / (depth + 1.0));
    }
  }
  return total;
}

int HotChild(const TreeNode& node, std::span<const double> row) {
  const double x = row[node.feature];
  if (std::isnan(x)) return node.default_left ? node.left : node.right;
  return x < node.threshold ? node.left : node.right;
}

struct Recursion {
  const Tree& tree;
  std::span<const double> row;
  double scale;
  std::span<double> phi;

  void Run(int node_id, PathElement* parent_path, int depth,
           double parent_zero_fraction, double parent_one_fraction,
           int parent_feature) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    ExtendPath(path, depth, parent_zero_fraction, parent_one_fraction,
               parent_feature);

    const TreeNode& node = tree.node(node_id);
    if (node.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = UnwoundPathSum(path, depth, i);
        const PathElement& el = path[i];
        phi[el.feature] +=
            w * (el.one_fraction - el.zero_fraction) * node.value * scale;
      }
      return;
    }

    const int hot = HotChild(node, row);
    const int cold = hot == node.left ? node.right : node.left;
    const double hot_zero_fraction = tree.node(hot).cover / node.cover;
    const double cold_zero_fraction = tree.node(cold).cover / node.cover;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // A feature already on the path is unwound and re-entered with the
    // product of its fractions.
    int index = 0;
    for (; index <= depth; ++index) {
      if (path[index].feature == node.feature) break;
    }
    if (index != depth + 1) {
      incoming_zero_fraction = path[index].zero_fraction;
      incoming_one_fraction = path[index].one_fraction;
      UnwindPath(path, depth, index);
      --depth;
    }

    Run(hot, path, depth + 1, hot_zero_fraction * incoming_zero_fraction,
        incoming_one_fraction, node.feature);
    Run(cold, path, depth + 1, cold_zero_fraction * incoming_zero_fraction, 0.0,
        node.feature);
  }
};

double ExpectedFrom(const Tree& tree, int id) {
  const TreeNode& node = tree.node(id);
  if (node.is_leaf()) return node.value;
  const TreeNode& left = tree.node(node.left);
  const TreeNode& right = tree.node(node.right);
  return (left.cover * ExpectedFrom(tree, node.left) +
          right.cover * ExpectedFrom(tree, node.right)) /
         node.cover;
}

double ConditionalFrom(const Tree& tree, int id, std::span<const double> row,
                       std::uint32_t subset) {
  const TreeNode& node = tree.node(id);
  if (node.is_leaf()) return node.value;
  if (subset & (1u << node.feature)) {
    return ConditionalFrom(tree, HotChild(node, row), row, subset);
  }
  const TreeNode& left = tree.node(node.left);
  const TreeNode& right = tree.node(node.right);
  return (left.cover * ConditionalFrom(tree, node.left, row, subset) +
          right.cover * ConditionalFrom(tree, node.right, row, subset)) /
         node.cover;
}

}  // namespace

double ShapExplanation::LocalAccuracyError() const {
  const double sum = std::accumulate(values.begin(), values.end(), base_value);
  return std::abs(sum - margin);
}

double ExpectedValue(const Tree& tree) { return ExpectedFrom(tree, 0); }

void TreeShap(const Tree& tree, std::span<const double> row, double scale,
              std::span<double> phi) {
  const int max_depth = tree.Depth() + 2;
  std::vector<PathElement> buffer((max_depth * (max_depth + 1)) / 2 + 1);
  Recursion recursion{tree, row, scale, phi};
  recursion.Run(0, buffer.data(), 0, 1.0, 1.0, -1);
}

double ConditionalExpectation(const Tree& tree, std::span<const double> row,
                              std::uint32_t subset) {
  return ConditionalFrom(tree, 0, row, subset);
}

std::vector<double> BruteForceShap(const Tree& tree, std::span<const double> row) {
  const int n = static_cast<int>(row.size());
  if (n > 16) throw ConfigError("brute-force Shapley supports at most 16 features");
  const std::uint32_t full = 1u << n;
  std::vector<double> value(full);
  for (std::uint32_t s = 0; s < full; ++s) {
    value[s] = ConditionalExpectation(tree, row, s);
  }
  // weight[k] = k! (n - k - 1)! / n!
  std::vector<double> weight(n);
  for (int k = 0; k < n; ++k) {
    double w = 1.0 / n;
    for (int i = 1; i <= k; ++i) w *= static_cast<double>(i) / (n - i);
    weight[k] = w;
  }
  std::vector<double> phi(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const std::uint32_t bit = 1u << j;
    for (std::uint32_t s = 0; s < full; ++s) {
      if (s & bit) continue;
      phi[j] += weight[std::popcount(s)] * (value[s | bit] - value[s]);
    }
  }
  return phi;
}

Explainer::Explainer(const gbdt::TreeEnsemble& ensemble) : ensemble_(ensemble) {
  if (!ensemble.HasCovers()) {
    throw StateError(
        "model has no node cover statistics; retrain it to enable explanations");
  }
  base_value_ = ensemble.base_score();
  for (const auto& tree : ensemble.trees()) {
    base_value_ += ensemble.learning_rate() * ExpectedValue(tree);
  }
}

ShapExplanation Explainer::Explain(std::span<const double> row) const {
  ShapExplanation out;
  out.margin = ensemble_.PredictMargin(row);
  out.base_value = base_value_;
  out.values.assign(row.size(), 0.0);
  for (const auto& tree : ensemble_.trees()) {
    TreeShap(tree, row, ensemble_.learning_rate(), out.values);
  }
  return out;
}

ShapExplanation Explain(const gbdt::TreeEnsemble& ensemble,
                        std::span<const double> row) {
  return Explainer(ensemble).Explain(row);
}

int ShapSummary::RankOf(const std::string& feature) const {
  for (const auto& item : importance) {
    if (item.feature == feature) return item.rank;
  }
  return 0;
}

double ShapSummary::MaxLocalAccuracyError() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < shap_values.rows(); ++r) {
    const auto phi = shap_values.row(r);
    const double sum = std::accumulate(phi.begin(), phi.end(), base_value);
    worst = std::max(worst, std::abs(sum - margins[r]));
  }
  return worst;
}

void ShapSummary::WriteCsv(std::ostream& out) const {
  out.precision(17);
  out << "feature,row_id,shap_value,feature_value,rank\n";
  for (const auto& item : importance) {
    const auto col = static_cast<std::size_t>(
        std::find(feature_names.begin(), feature_names.end(), item.feature) -
        feature_names.begin());
    for (std::size_t r = 0; r < shap_values.rows(); ++r) {
      out << '"' << item.feature << "\"," << row_ids[r] << ','
          << shap_values(r, col) << ',' << feature_values(r, col) << ','
          << item.rank << '\n';
    }
  }
}

nlohmann::json ShapSummary::ToJson() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& item : importance) {
    features.push_back({{"feature", item.feature},
                        {"mean_abs_shap", item.mean_abs_shap},
                        {"rank", item.rank}});
  }
  return {{"base_value", base_value},
          {"num_rows", shap_values.rows()},
          {"importance", std::move(features)}};
}

ShapSummary Summarize(const gbdt::TreeEnsemble& ensemble, const Dataset& rows) {
  if (rows.num_features() != ensemble.num_features()) {
    throw ConfigError("summary rows do not match the model's feature count");
  }
  const Explainer explainer(ensemble);
  const std::size_t n = rows.num_rows();
  const std::size_t d = rows.num_features();
  ShapSummary out;
  out.feature_names = ensemble.feature_names();
  out.row_ids = rows.row_ids;
  out.base_value = explainer.base_value();
  out.shap_values = Matrix(n, d);
  out.feature_values = Matrix(n, d);
  out.margins.assign(n, 0.0);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto r = static_cast<std::size_t>(i);
    const std::vector<double> row = rows.Row(r);
    const ShapExplanation e = explainer.Explain(row);
    std::copy(e.values.begin(), e.values.end(), out.shap_values.row(r).begin());
    std::copy(row.begin(), row.end(), out.feature_values.row(r).begin());
    out.margins[r] = e.margin;
  }

  std::vector<double> mean_abs(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) mean_abs[c] += std::abs(out.shap_values(r, c));
  }
  if (n > 0) {
    for (auto& v : mean_abs) v /= static_cast<double>(n);
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mean_abs[a] > mean_abs[b];
  });
  for (std::size_t i = 0; i < d; ++i) {
    out.importance.push_back(
        {out.feature_names[order[i]], mean_abs[order[i]], static_cast<int>(i) + 1});
  }
  return out;
}

}  // namespace paxconnect::shap
