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

#include "paxconnect/gbdt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "paxconnect/errors.h"

namespace paxconnect::gbdt {
namespace {

using nlohmann::json;

constexpr double kMinSplitGain = 1e-12;
constexpr std::size_t kMaxExactBins = 65534;

struct Bin {
  double g = 0.0;
  double h = 0.0;
};

struct SplitCandidate {
  bool found = false;
  int feature = -1;
  int cut = -1;  // bins <= cut go left
  bool default_left = true;
  double gain = kMinSplitGain;
};

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double LeafWeight(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

double Score(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? g * g / denom : 0.0;
}

// Grows one tree on a row-major binned matrix.
class Grower {
 public:
  Grower(const FeatureBins& bins, std::span<const std::uint16_t> binned,
         std::size_t num_rows, const BoostConfig& config)
      : bins_(bins),
        binned_(binned),
        num_rows_(num_rows),
        num_features_(bins.num_features()),
        config_(config) {
    offsets_.resize(num_features_ + 1, 0);
    for (std::size_t f = 0; f < num_features_; ++f) {
      offsets_[f + 1] = offsets_[f] + bins_.cuts(f).size() + 2;
    }
  }

  // When `margins` is set, the rows of each new leaf get `step * leaf` added.
  Tree Grow(std::span<const double> gradients, std::span<const double> hessians,
            std::vector<double>* margins, double step) {
    gradients_ = gradients;
    hessians_ = hessians;
    margins_ = margins;
    step_ = step;
    rows_.resize(num_rows_);
    for (std::size_t i = 0; i < num_rows_; ++i) {
      rows_[i] = static_cast<std::uint32_t>(i);
    }
    nodes_.clear();
    GrowNode(0, num_rows_, 0, std::nullopt);
    return Tree(std::move(nodes_));
  }

 private:
  std::vector<Bin> BuildHistogram(std::size_t begin, std::size_t end) const {
    std::vector<Bin> hist(offsets_.back());
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = rows_[i];
      const std::uint16_t* row_bins = binned_.data() + r * num_features_;
      const double g = gradients_[r];
      const double h = hessians_[r];
      for (std::size_t f = 0; f < num_features_; ++f) {
        Bin& bin = hist[offsets_[f] + row_bins[f]];
        bin.g += g;
        bin.h += h;
      }
    }
    return hist;
  }

  SplitCandidate BestSplitForFeature(const std::vector<Bin>& hist,
                                     std::size_t f) const {
    const double lambda = config_.l2_leaf_regularization;
    const double min_h = config_.min_child_hessian;
    const Bin* hb = hist.data() + offsets_[f];
    const std::size_t value_bins = bins_.cuts(f).size() + 1;
    const Bin missing = hb[value_bins];
    double tg = 0.0;
    double th = 0.0;
    for (std::size_t b = 0; b < value_bins; ++b) {
      tg += hb[b].g;
      th += hb[b].h;
    }
    const double parent = Score(tg + missing.g, th + missing.h, lambda);

    SplitCandidate best;
    best.feature = static_cast<int>(f);
    double lg = 0.0;
    double lh = 0.0;
    for (std::size_t b = 0; b + 1 < value_bins; ++b) {
      lg += hb[b].g;
      lh += hb[b].h;
      const double rg = tg - lg;
      const double rh = th - lh;
      for (const bool missing_left : {true, false}) {
        const double left_g = missing_left ? lg + missing.g : lg;
        const double left_h = missing_left ? lh + missing.h : lh;
        const double right_g = missing_left ? rg : rg + missing.g;
        const double right_h = missing_left ? rh : rh + missing.h;
        if (left_h < min_h || right_h < min_h) continue;
        const double gain = 0.5 * (Score(left_g, left_h, lambda) +
                                   Score(right_g, right_h, lambda) - parent);
        if (gain > best.gain) {
          best.found = true;
          best.cut = static_cast<int>(b);
          best.default_left = missing_left;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  SplitCandidate FindBestSplit(const std::vector<Bin>& hist) const {
    std::vector<SplitCandidate> per_feature(num_features_);
#pragma omp parallel for schedule(dynamic) if (num_features_ > 1)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(num_features_);
         ++f) {
      per_feature[f] = BestSplitForFeature(hist, static_cast<std::size_t>(f));
    }
    SplitCandidate best;
    for (const auto& candidate : per_feature) {
      if (candidate.found && candidate.gain > best.gain) best = candidate;
    }
    return best;
  }

  int GrowNode(std::size_t begin, std::size_t end, int depth,
               std::optional<std::vector<Bin>> hist) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double g = 0.0;
    double h = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      g += gradients_[rows_[i]];
      h += hessians_[rows_[i]];
    }
    const std::size_t count = end - begin;
    nodes_[id].cover = static_cast<double>(count);

    SplitCandidate split;
    if (depth < config_.max_depth && count >= 2 &&
        h >= 2.0 * config_.min_child_hessian) {
      if (!hist) hist = BuildHistogram(begin, end);
      split = FindBestSplit(*hist);
    }
    if (!split.found) {
      const double value = LeafWeight(g, h, config_.l2_leaf_regularization);
      nodes_[id].value = value;
      if (margins_) {
        for (std::size_t i = begin; i < end; ++i) {
          (*margins_)[rows_[i]] += step_ * value;
        }
      }
      return id;
    }

    const std::size_t f = static_cast<std::size_t>(split.feature);
    const std::uint16_t missing_bin = bins_.MissingBin(f);
    const auto goes_left = [&](std::uint32_t r) {
      const std::uint16_t bin = binned_[r * num_features_ + f];
      if (bin == missing_bin) return split.default_left;
      return bin <= split.cut;
    };
    const auto mid_it = std::stable_partition(
        rows_.begin() + begin, rows_.begin() + end, goes_left);
    const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());

    // Histogram of the smaller child; the larger one by subtraction.
    const bool left_smaller = (mid - begin) <= (end - mid);
    std::vector<Bin> small = left_smaller ? BuildHistogram(begin, mid)
                                          : BuildHistogram(mid, end);
    std::vector<Bin> large = std::move(*hist);
    for (std::size_t i = 0; i < large.size(); ++i) {
      large[i].g -= small[i].g;
      large[i].h -= small[i].h;
    }
    hist.reset();
    std::optional<std::vector<Bin>> left_hist =
        left_smaller ? std::move(small) : std::move(large);
    std::optional<std::vector<Bin>> right_hist =
        left_smaller ? std::move(large) : std::move(small);

    const int left = GrowNode(begin, mid, depth + 1, std::move(left_hist));
    const int right = GrowNode(mid, end, depth + 1, std::move(right_hist));
    TreeNode& node = nodes_[id];
    node.feature = split.feature;
    node.threshold = bins_.cuts(f)[split.cut];
    node.default_left = split.default_left;
    node.left = left;
    node.right = right;
    return id;
  }

  const FeatureBins& bins_;
  std::span<const std::uint16_t> binned_;
  std::size_t num_rows_;
  std::size_t num_features_;
  BoostConfig config_;
  std::vector<std::size_t> offsets_;

  std::span<const double> gradients_;
  std::span<const double> hessians_;
  std::vector<double>* margins_ = nullptr;
  double step_ = 0.0;
  std::vector<std::uint32_t> rows_;
  std::vector<TreeNode> nodes_;
};

std::vector<std::uint16_t> BinRows(const Dataset& data, const FeatureBins& bins) {
  const std::size_t n = data.num_rows();
  const std::size_t f_count = data.num_features();
  std::vector<std::uint16_t> binned(n * f_count);
  for (std::size_t f = 0; f < f_count; ++f) {
    const auto& column = data.values[f];
    for (std::size_t r = 0; r < n; ++r) {
      binned[r * f_count + f] = bins.BinOf(f, column[r]);
    }
  }
  return binned;
}

json NodeToJson(const Tree& tree, int id) {
  const TreeNode& node = tree.node(id);
  if (node.is_leaf()) return {{"leaf", node.value}, {"cover", node.cover}};
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"default_left", node.default_left},
          {"cover", node.cover},
          {"left", NodeToJson(tree, node.left)},
          {"right", NodeToJson(tree, node.right)}};
}

int NodeFromJson(const json& in, std::size_t num_features,
                 std::vector<TreeNode>& nodes, int depth) {
  if (depth > 256) throw ParseError("model: tree too deep");
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (in.contains("leaf")) {
    nodes[id].value = in.at("leaf").get<double>();
    nodes[id].cover = in.value("cover", 0.0);
    return id;
  }
  TreeNode node;
  node.feature = in.at("feature").get<int>();
  if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= num_features) {
    throw ParseError("model: split feature index out of range");
  }
  node.threshold = in.at("threshold").get<double>();
  if (!std::isfinite(node.threshold)) throw ParseError("model: non-finite threshold");
  node.default_left = in.at("default_left").get<bool>();
  node.cover = in.value("cover", 0.0);
  node.left = NodeFromJson(in.at("left"), num_features, nodes, depth + 1);
  node.right = NodeFromJson(in.at("right"), num_features, nodes, depth + 1);
  nodes[id] = node;
  return id;
}

}  // namespace

void BoostConfig::Validate() const {
  if (n_rounds < 0) throw ConfigError("boost: n_rounds must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("boost: learning_rate must be > 0");
  if (max_depth < 0) throw ConfigError("boost: max_depth must be >= 0");
  if (!(l2_leaf_regularization >= 0.0)) {
    throw ConfigError("boost: l2_leaf_regularization must be >= 0");
  }
  if (!(min_child_hessian >= 0.0)) {
    throw ConfigError("boost: min_child_hessian must be >= 0");
  }
  if (max_bins < 0 || max_bins == 1 || max_bins > static_cast<int>(kMaxExactBins)) {
    throw ConfigError("boost: max_bins must be 0 (exact) or in [2, 65534]");
  }
}

json BoostConfig::ToJson() const {
  return {{"n_rounds", n_rounds},
          {"learning_rate", learning_rate},
          {"max_depth", max_depth},
          {"l2_leaf_regularization", l2_leaf_regularization},
          {"min_child_hessian", min_child_hessian},
          {"max_bins", max_bins},
          {"seed", seed}};
}

BoostConfig BoostConfig::FromJson(const json& in) {
  BoostConfig config;
  config.n_rounds = in.value("n_rounds", config.n_rounds);
  config.learning_rate = in.value("learning_rate", config.learning_rate);
  config.max_depth = in.value("max_depth", config.max_depth);
  config.l2_leaf_regularization =
      in.value("l2_leaf_regularization", config.l2_leaf_regularization);
  config.min_child_hessian = in.value("min_child_hessian", config.min_child_hessian);
  config.max_bins = in.value("max_bins", config.max_bins);
  config.seed = in.value("seed", config.seed);
  return config;
}

double Sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

GradHess LogisticGradHess(int label, double margin) {
  const double p = Sigmoid(margin);
  return {p - label, p * (1.0 - p)};
}

double LogLoss(std::span<const std::uint8_t> labels,
               std::span<const double> margins) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += labels[i] ? Softplus(-margins[i]) : Softplus(margins[i]);
  }
  return labels.empty() ? 0.0 : total / static_cast<double>(labels.size());
}

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) nodes_.emplace_back();
}

int Tree::Leaf(std::span<const double> row) const {
  int id = 0;
  while (!nodes_[id].is_leaf()) {
    const TreeNode& node = nodes_[id];
    const double x = row[node.feature];
    if (std::isnan(x)) {
      id = node.default_left ? node.left : node.right;
    } else {
      id = x < node.threshold ? node.left : node.right;
    }
  }
  return id;
}

int Tree::Depth() const {
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (!nodes_[id].is_leaf()) {
      stack.push_back({nodes_[id].left, d + 1});
      stack.push_back({nodes_[id].right, d + 1});
    }
  }
  return depth;
}

int Tree::NumLeaves() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeEnsemble::TreeEnsemble(double base_score, double learning_rate,
                           std::vector<std::string> feature_names,
                           std::vector<Tree> trees, BoostConfig config)
    : base_score_(base_score),
      learning_rate_(learning_rate),
      feature_names_(std::move(feature_names)),
      trees_(std::move(trees)),
      config_(config) {}

double TreeEnsemble::PredictMargin(std::span<const double> row) const {
  return PredictMargin(row, trees_.size());
}

double TreeEnsemble::PredictMargin(std::span<const double> row,
                                   std::size_t num_trees) const {
  if (row.size() != feature_names_.size()) {
    throw ConfigError("expected " + std::to_string(feature_names_.size()) +
                      " features, got " + std::to_string(row.size()));
  }
  double sum = 0.0;
  num_trees = std::min(num_trees, trees_.size());
  for (std::size_t t = 0; t < num_trees; ++t) sum += trees_[t].Predict(row);
  return base_score_ + learning_rate_ * sum;
}

double TreeEnsemble::PredictProba(std::span<const double> row) const {
  return Sigmoid(PredictMargin(row));
}

std::vector<double> TreeEnsemble::PredictMargins(const Dataset& data) const {
  std::vector<double> margins(data.num_rows());
  std::vector<double> row(data.num_features());
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = data.values[c][r];
    margins[r] = PredictMargin(row);
  }
  return margins;
}

std::vector<double> TreeEnsemble::PredictProba(const Dataset& data) const {
  auto out = PredictMargins(data);
  for (auto& m : out) m = Sigmoid(m);
  return out;
}

bool TreeEnsemble::HasCovers() const {
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes()) {
      if (!(node.cover > 0.0)) return false;
    }
  }
  return true;
}

json TreeEnsemble::ToJson() const {
  json trees = json::array();
  for (const auto& tree : trees_) trees.push_back(NodeToJson(tree, 0));
  return {{"version", kModelFormatVersion},
          {"base_score", base_score_},
          {"learning_rate", learning_rate_},
          {"feature_names", feature_names_},
          {"config", config_.ToJson()},
          {"trees", std::move(trees)}};
}

TreeEnsemble TreeEnsemble::FromJson(const json& in) {
  try {
    if (!in.is_object() || !in.contains("version")) {
      throw ParseError("model: missing version field");
    }
    const int version = in.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw VersionError("model: format version " + std::to_string(version) +
                         " is not supported (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    }
    TreeEnsemble out(in.at("base_score").get<double>(),
                     in.at("learning_rate").get<double>(),
                     in.at("feature_names").get<std::vector<std::string>>());
    if (in.contains("config")) out.config_ = BoostConfig::FromJson(in.at("config"));
    for (const auto& tree : in.at("trees")) {
      std::vector<TreeNode> nodes;
      NodeFromJson(tree, out.num_features(), nodes, 0);
      out.trees_.emplace_back(std::move(nodes));
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

std::string TreeEnsemble::Serialize() const { return ToJson().dump(); }

TreeEnsemble TreeEnsemble::Deserialize(std::string_view text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  return FromJson(parsed);
}

FeatureBins FeatureBins::Fit(const Dataset& data, int max_bins) {
  FeatureBins out;
  out.cuts_.resize(data.num_features());
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    std::vector<double> values;
    values.reserve(data.num_rows());
    for (const double v : data.values[f]) {
      if (!std::isnan(v)) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, std::size_t>> distinct;
    for (const double v : values) {
      if (distinct.empty() || distinct.back().first != v) {
        distinct.push_back({v, 0});
      }
      ++distinct.back().second;
    }
    auto& cuts = out.cuts_[f];
    if (max_bins == 0 || distinct.size() <= static_cast<std::size_t>(max_bins)) {
      if (distinct.size() > kMaxExactBins) {
        throw ConfigError("exact mode supports at most 65534 distinct values");
      }
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        cuts.push_back(0.5 * (distinct[i].first + distinct[i + 1].first));
      }
      continue;
    }
    // Quantile cuts: one cut each time the cumulative count crosses a
    // multiple of n / max_bins.
    const double step = static_cast<double>(values.size()) / max_bins;
    double boundary = step;
    double accumulated = 0.0;
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      accumulated += static_cast<double>(distinct[i].second);
      if (accumulated >= boundary) {
        cuts.push_back(0.5 * (distinct[i].first + distinct[i + 1].first));
        while (boundary <= accumulated) boundary += step;
      }
    }
  }
  return out;
}

std::uint16_t FeatureBins::BinOf(std::size_t f, double value) const {
  if (std::isnan(value)) return MissingBin(f);
  const auto& cuts = cuts_[f];
  return static_cast<std::uint16_t>(
      std::upper_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

Tree FitTree(const Dataset& data, std::span<const double> gradients,
             std::span<const double> hessians, const BoostConfig& config) {
  config.Validate();
  if (gradients.size() != data.num_rows() || hessians.size() != data.num_rows()) {
    throw ConfigError("FitTree: gradient length mismatch");
  }
  const FeatureBins bins = FeatureBins::Fit(data, config.max_bins);
  const auto binned = BinRows(data, bins);
  Grower grower(bins, binned, data.num_rows(), config);
  return grower.Grow(gradients, hessians, nullptr, 0.0);
}

TreeEnsemble Train(const Dataset& train, const BoostConfig& config,
                   TrainTrace* trace) {
  config.Validate();
  const std::size_t n = train.num_rows();
  if (n < 2) throw DataError("training needs at least 2 rows");
  const std::size_t positives = train.CountPositives();
  if (positives == 0 || positives == n) {
    throw DataError("training data contains a single class");
  }
  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  const double base_score = std::log(rate / (1.0 - rate));

  std::vector<std::string> names;
  for (const auto& column : train.columns) names.push_back(column.name);
  TreeEnsemble ensemble(base_score, config.learning_rate, std::move(names), {},
                        config);

  const FeatureBins bins = FeatureBins::Fit(train, config.max_bins);
  const auto binned = BinRows(train, bins);
  Grower grower(bins, binned, n, config);

  std::vector<double> margins(n, base_score);
  std::vector<double> gradients(n);
  std::vector<double> hessians(n);
  if (trace) {
    *trace = TrainTrace{};
    trace->train_loss.push_back(LogLoss(train.labels, margins));
  }
  for (int round = 0; round < config.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = LogisticGradHess(train.labels[i], margins[i]);
      gradients[i] = gh.grad;
      hessians[i] = gh.hess;
    }
    Tree tree = grower.Grow(gradients, hessians, &margins, config.learning_rate);
    if (trace) {
      trace->train_loss.push_back(LogLoss(train.labels, margins));
      trace->tree_leaves.push_back(tree.NumLeaves());
    }
    ensemble.AddTree(std::move(tree));
  }
  return ensemble;
}

}  // namespace paxconnect::gbdt
