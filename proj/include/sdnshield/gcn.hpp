#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sdnshield/rng.hpp"

namespace sdnshield::gcn {

struct Hyperparams {
  double learning_rate = 0.15;
  int layers = 2;
  int hidden_width = 128;
  double weight_decay = 0.0005;
  double dropout = 0.5;  // in [0, 1)
  int epochs = 200;
  std::uint64_t seed = 0;
};

// Stacked propagation layers without bias terms. weights[0] maps the input
// width to the hidden width, the last matrix maps to class scores, and any
// matrices in between are hidden-to-hidden.
struct Model {
  std::vector<Eigen::MatrixXd> weights;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().rows()); }
  int class_count() const { return static_cast<int>(weights.back().cols()); }
};

// Glorot-uniform initialization, entries in ±sqrt(6/(fan_in+fan_out)),
// reproducible per seed.
Model init_weights(int d, int h, int c, std::uint64_t seed, int layers = 2);

// Row-wise softmax with max-subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// One propagation step per layer: H <- ReLU(A_hat H W) with dropout applied
// to the hidden activations, then class scores softmax(A_hat H W_last).
// dropout_masks, when given, holds one factor matrix per hidden layer with
// entries 0 or 1/(1-p); inference passes nullptr.
Eigen::MatrixXd forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat,
                        const Model& model,
                        const std::vector<Eigen::MatrixXd>* dropout_masks = nullptr);

// Mean cross-entropy over the masked nodes (log clamped at 1e-12) plus
// weight_decay/2 times the summed squared Frobenius norms of all weight
// matrices. Throws std::invalid_argument on an empty mask.
double loss(const Eigen::MatrixXd& z, const std::vector<int>& labels,
            const std::vector<std::uint8_t>& train_mask, const Model& model,
            double weight_decay);

// Analytic gradient of `loss(forward(...))` with respect to every weight
// matrix, under the same dropout masks as the corresponding forward pass.
std::vector<Eigen::MatrixXd> loss_gradients(
    const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat, const Model& model,
    const std::vector<int>& labels, const std::vector<std::uint8_t>& train_mask,
    double weight_decay,
    const std::vector<Eigen::MatrixXd>* dropout_masks = nullptr);

// One 0/rescale factor matrix per hidden layer (layer_count-1 of them).
std::vector<Eigen::MatrixXd> make_dropout_masks(int n, const Model& model,
                                                double dropout, Rng& rng);

struct TrainResult {
  Model model;
  std::vector<double> loss_history;  // one entry per epoch, post-step loss
};

// Full-batch gradient descent for hp.epochs steps with a fresh seeded
// dropout mask per epoch. Aborts with a diagnostic when the loss turns
// non-finite. class_count fixes the output width even when some classes are
// absent from the data.
TrainResult train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat,
                  const std::vector<int>& labels,
                  const std::vector<std::uint8_t>& train_mask, int class_count,
                  const Hyperparams& hp);

// Argmax per row, ties to the lowest class index. No dropout.
std::vector<int> predict(const Model& model, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& a_hat);

struct Checkpoint {
  Model model;
  Hyperparams hp;
};

// Binary container; load followed by predict is bit-identical to the
// pre-save model.
void save_checkpoint(const std::string& path, const Model& model,
                     const Hyperparams& hp);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sdnshield::gcn
