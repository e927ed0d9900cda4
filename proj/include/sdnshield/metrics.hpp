#pragma once

#include <span>
#include <vector>

namespace sdnshield::pipeline {

enum class Averaging { kBinary, kMacro };

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;  // binary F1 (positive class) or macro-F1
  std::vector<std::vector<long long>> confusion;  // [truth][pred]
  std::vector<double> per_class_f1;

  long long total() const;
};

// Confusion-matrix evaluation over class indices in [0, class_count).
// kBinary reports F1 of `positive_class`; kMacro averages per-class F1
// across all class_count classes, counting a class absent from both truth
// and prediction as 0. Accuracy is trace/total. Throws on empty input or
// out-of-range labels.
Metrics evaluate(std::span<const int> pred, std::span<const int> truth,
                 int class_count, Averaging averaging, int positive_class = 1);

}  // namespace sdnshield::pipeline
