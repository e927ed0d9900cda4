#include "sdnshield/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdnshield/rng.hpp"

namespace sdnshield::pipeline {

namespace {

double entropy(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

int majority(const std::vector<std::size_t>& counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = static_cast<int>(c);
  return best;
}

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  std::span<const int> labels;
  int class_count;
  int max_depth;
  int features_per_split;
  Rng& rng;
  std::vector<RandomForest::Node>& nodes;

  int build(std::vector<std::size_t>& rows, int depth) {
    std::vector<std::size_t> counts(class_count, 0);
    for (std::size_t r : rows) counts[labels[r]]++;
    const double parent_entropy = entropy(counts, rows.size());

    const int node_index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_index].leaf_class = majority(counts);
    if (depth >= max_depth || rows.size() < 2 || parent_entropy == 0.0)
      return node_index;

    // Candidate features: a seeded partial shuffle of the feature indices.
    const int d = static_cast<int>(x.cols());
    std::vector<int> features(d);
    for (int i = 0; i < d; ++i) features[i] = i;
    for (int i = 0; i < features_per_split && i < d; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
      std::swap(features[i], features[j]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 1e-12;  // require a real improvement
    std::vector<std::size_t> order;
    for (int fi = 0; fi < features_per_split && fi < d; ++fi) {
      const int f = features[fi];
      order = rows;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(a, f) < x(b, f);
      });

      // Sweep candidate cuts left to right, shifting one row at a time.
      std::vector<std::size_t> lc(class_count, 0);
      std::vector<std::size_t> rc = counts;
      const std::size_t total = order.size();
      for (std::size_t k = 0; k + 1 < total; ++k) {
        const int cls = labels[order[k]];
        lc[cls]++;
        rc[cls]--;
        const double lo = x(order[k], f);
        const double hi = x(order[k + 1], f);
        if (lo == hi) continue;  // not a valid cut point
        const std::size_t ln = k + 1;
        const std::size_t rn = total - ln;
        const double child =
            (static_cast<double>(ln) * entropy(lc, ln) +
             static_cast<double>(rn) * entropy(rc, rn)) /
            static_cast<double>(total);
        const double gain = parent_entropy - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (lo + hi);
        }
      }
    }
    if (best_feature < 0) return node_index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      if (x(r, best_feature) <= best_threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes[node_index].feature = best_feature;
    nodes[node_index].threshold = best_threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    nodes[node_index].left = l;
    nodes[node_index].right = r;
    return node_index;
  }
};

}  // namespace

int RandomForest::predict_row(const Eigen::RowVectorXd& row) const {
  std::vector<std::size_t> votes(class_count, 0);
  for (const std::vector<Node>& tree : trees) {
    int i = 0;
    while (tree[i].feature >= 0)
      i = row(tree[i].feature) <= tree[i].threshold ? tree[i].left : tree[i].right;
    votes[tree[i].leaf_class]++;
  }
  return majority(votes);
}

RandomForest train_random_forest(const Eigen::MatrixXd& x,
                                 std::span<const int> labels,
                                 const std::vector<std::uint8_t>& train_mask,
                                 int class_count,
                                 const RandomForestConfig& config) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() ||
      labels.size() != train_mask.size())
    throw std::invalid_argument("train_random_forest: length mismatch");
  if (config.n_trees < 1) throw std::invalid_argument("n_trees < 1");
  if (config.max_depth < 0) throw std::invalid_argument("max_depth < 0");

  std::vector<std::size_t> train_rows;
  for (std::size_t i = 0; i < train_mask.size(); ++i)
    if (train_mask[i]) train_rows.push_back(i);
  if (train_rows.empty())
    throw std::invalid_argument("train_random_forest: empty train mask");

  RandomForest forest;
  forest.class_count = class_count;
  forest.trees.resize(config.n_trees);

  const int features_per_split = std::max(
      1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));

  Rng base(derive_seed(config.seed, "forest"));
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng = base.substream("tree:" + std::to_string(t));
    std::vector<std::size_t> sample(train_rows.size());
    for (std::size_t i = 0; i < sample.size(); ++i)
      sample[i] = train_rows[rng.below(train_rows.size())];

    forest.trees[t].reserve(2u << std::min(config.max_depth, 16));
    TreeBuilder builder{x,        labels,           class_count,
                        config.max_depth, features_per_split, rng,
                        forest.trees[t]};
    builder.build(sample, 0);
  }
  return forest;
}

std::vector<int> predict_random_forest(const RandomForest& forest,
                                       const Eigen::MatrixXd& x) {
  std::vector<int> out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out[i] = forest.predict_row(x.row(i));
  return out;
}

RfResult baseline_random_forest(const Eigen::MatrixXd& x,
                                std::span<const int> labels,
                                const SplitMasks& split, int class_count,
                                const RandomForestConfig& config,
                                Averaging averaging, int positive_class) {
  RfResult result;
  const RandomForest forest =
      train_random_forest(x, labels, split.train, class_count, config);
  result.predictions = predict_random_forest(forest, x);

  std::vector<int> test_pred;
  std::vector<int> test_truth;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!split.test[i]) continue;
    test_pred.push_back(result.predictions[i]);
    test_truth.push_back(labels[i]);
  }
  result.metrics =
      evaluate(test_pred, test_truth, class_count, averaging, positive_class);
  return result;
}

}  // namespace sdnshield::pipeline
