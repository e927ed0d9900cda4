#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sdnshield::pipeline {

struct SplitSpec {
  enum class Mode { kFixedSampling, kRatio, kSmallTrain };
  Mode mode = Mode::kFixedSampling;
  std::size_t per_class_train = 20000;  // kFixedSampling
  double train_fraction = 0.8;          // kRatio
  double small_train_fraction = 0.05;   // kSmallTrain
  std::uint64_t seed = 0;
};

struct SplitMasks {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> test;
  std::vector<std::string> warnings;

  std::size_t train_count() const;
  std::size_t test_count() const;
};

// Stratified train/test masks over class indices. Per class, a seeded
// shuffle picks the train rows: the configured count for kFixedSampling, or
// round(fraction * population) clamped to [1, population-1] for the ratio
// modes; everything else is test. A class with fewer rows than a fixed
// request contributes population-1 rows with a warning (all rows when the
// population is 1). Masks are disjoint by construction and cover all rows.
SplitMasks make_split(std::span<const int> labels, int class_count,
                      const SplitSpec& spec);

// Z-scores every column using mean/stddev computed over the train rows;
// a zero-variance column keeps scale 1. Throws on an empty train mask.
void standardize_features(Eigen::MatrixXd& x,
                          const std::vector<std::uint8_t>& train_mask);

}  // namespace sdnshield::pipeline
