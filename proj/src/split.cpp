#include "sdnshield/split.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdnshield/rng.hpp"

namespace sdnshield::pipeline {

std::size_t SplitMasks::train_count() const {
  std::size_t n = 0;
  for (auto b : train) n += b != 0;
  return n;
}

std::size_t SplitMasks::test_count() const {
  std::size_t n = 0;
  for (auto b : test) n += b != 0;
  return n;
}

SplitMasks make_split(std::span<const int> labels, int class_count,
                      const SplitSpec& spec) {
  const std::size_t n = labels.size();
  SplitMasks masks;
  masks.train.assign(n, 0);
  masks.test.assign(n, 0);

  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = labels[i];
    if (c < 0 || c >= class_count)
      throw std::invalid_argument("make_split: label out of range");
    by_class[c].push_back(i);
  }

  Rng rng(derive_seed(spec.seed, "split"));
  for (int c = 0; c < class_count; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    // Fisher-Yates with the shared stream; class order is fixed, so the
    // draw sequence (and thus the split) is reproducible.
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[rng.below(i)]);

    const std::size_t pop = rows.size();
    std::size_t want = 0;
    switch (spec.mode) {
      case SplitSpec::Mode::kFixedSampling:
        want = spec.per_class_train;
        break;
      case SplitSpec::Mode::kRatio:
        want = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(pop)));
        break;
      case SplitSpec::Mode::kSmallTrain:
        want = static_cast<std::size_t>(
            std::llround(spec.small_train_fraction * static_cast<double>(pop)));
        break;
    }
    std::size_t take = want;
    if (pop == 1) {
      take = 1;
      if (spec.mode == SplitSpec::Mode::kFixedSampling && want > pop)
        masks.warnings.push_back("class " + std::to_string(c) +
                                 ": population 1, no test rows");
    } else if (spec.mode == SplitSpec::Mode::kFixedSampling) {
      if (want > pop - 1) {
        take = pop - 1;
        masks.warnings.push_back("class " + std::to_string(c) +
                                 ": requested " + std::to_string(want) +
                                 " train rows, population " +
                                 std::to_string(pop));
      }
    } else {
      take = std::clamp<std::size_t>(take, 1, pop - 1);
    }
    for (std::size_t i = 0; i < pop; ++i)
      (i < take ? masks.train : masks.test)[rows[i]] = 1;
  }
  return masks;
}

void standardize_features(Eigen::MatrixXd& x,
                          const std::vector<std::uint8_t>& train_mask) {
  if (static_cast<std::size_t>(x.rows()) != train_mask.size())
    throw std::invalid_argument("standardize_features: mask length mismatch");
  std::size_t m = 0;
  for (auto b : train_mask) m += b != 0;
  if (m == 0) throw std::invalid_argument("standardize_features: empty train mask");

  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (train_mask[i]) mean += x(i, col);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (train_mask[i]) {
        const double d = x(i, col) - mean;
        var += d * d;
      }
    var /= static_cast<double>(m);
    const double sd = std::sqrt(var);
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      x(i, col) = (x(i, col) - mean) * scale;
  }
}

}  // namespace sdnshield::pipeline
