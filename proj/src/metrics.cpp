#include "sdnshield/metrics.hpp"

#include <stdexcept>

namespace sdnshield::pipeline {

long long Metrics::total() const {
  long long t = 0;
  for (const auto& row : confusion)
    for (long long v : row) t += v;
  return t;
}

Metrics evaluate(std::span<const int> pred, std::span<const int> truth,
                 int class_count, Averaging averaging, int positive_class) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("evaluate: length mismatch");
  if (pred.empty()) throw std::invalid_argument("evaluate: empty input");
  if (class_count < 1) throw std::invalid_argument("evaluate: class_count < 1");

  Metrics m;
  m.confusion.assign(class_count, std::vector<long long>(class_count, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int t = truth[i];
    const int p = pred[i];
    if (t < 0 || t >= class_count || p < 0 || p >= class_count)
      throw std::invalid_argument("evaluate: label out of range");
    m.confusion[t][p]++;
  }

  long long trace = 0;
  for (int c = 0; c < class_count; ++c) trace += m.confusion[c][c];
  m.accuracy = static_cast<double>(trace) / static_cast<double>(pred.size());

  m.per_class_f1.resize(class_count);
  for (int c = 0; c < class_count; ++c) {
    long long tp = m.confusion[c][c];
    long long fp = 0;
    long long fn = 0;
    for (int o = 0; o < class_count; ++o) {
      if (o == c) continue;
      fp += m.confusion[o][c];
      fn += m.confusion[c][o];
    }
    const long long denom = 2 * tp + fp + fn;
    m.per_class_f1[c] =
        denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }

  if (averaging == Averaging::kBinary) {
    if (positive_class < 0 || positive_class >= class_count)
      throw std::invalid_argument("evaluate: bad positive class");
    m.f1 = m.per_class_f1[positive_class];
  } else {
    double sum = 0.0;
    for (double v : m.per_class_f1) sum += v;
    m.f1 = sum / static_cast<double>(class_count);
  }
  return m;
}

}  // namespace sdnshield::pipeline
