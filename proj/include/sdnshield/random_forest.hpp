#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sdnshield/metrics.hpp"
#include "sdnshield/split.hpp"

namespace sdnshield::pipeline {

struct RandomForestConfig {
  int n_trees = 100;
  int max_depth = 3;
  std::uint64_t seed = 32;
};

struct RandomForest {
  struct Node {
    int feature = -1;      // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 0;
  };
  std::vector<std::vector<Node>> trees;
  int class_count = 0;

  int predict_row(const Eigen::RowVectorXd& row) const;
};

// From-scratch forest: per tree a bootstrap sample of the train rows,
// entropy (information-gain) splits over floor(sqrt(d)) randomly chosen
// candidate features with midpoint thresholds, growth to max_depth, leaves
// voting by majority. Vote ties and leaf-majority ties resolve to the
// lowest class index.
RandomForest train_random_forest(const Eigen::MatrixXd& x,
                                 std::span<const int> labels,
                                 const std::vector<std::uint8_t>& train_mask,
                                 int class_count,
                                 const RandomForestConfig& config);

std::vector<int> predict_random_forest(const RandomForest& forest,
                                       const Eigen::MatrixXd& x);

struct RfResult {
  std::vector<int> predictions;  // all rows
  Metrics metrics;               // test rows only
};

// Convenience wrapper used as the comparison baseline: trains on the split's
// train rows and evaluates on its test rows with the given averaging.
RfResult baseline_random_forest(const Eigen::MatrixXd& x,
                                std::span<const int> labels,
                                const SplitMasks& split, int class_count,
                                const RandomForestConfig& config,
                                Averaging averaging, int positive_class = 1);

}  // namespace sdnshield::pipeline
