#include "sdnshield/gcn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sdnshield/errors.hpp"

namespace sdnshield::gcn {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr char kCheckpointMagic[8] = {'S', 'D', 'N', 'G', 'C', 'N', '0', '1'};

void check_shapes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat,
                  const Model& model) {
  if (a_hat.rows() != a_hat.cols())
    throw std::invalid_argument("forward: A_hat not square");
  if (a_hat.rows() != x.rows())
    throw std::invalid_argument("forward: A_hat and X row mismatch");
  if (x.cols() != model.weights.front().rows())
    throw std::invalid_argument("forward: X width does not match W0");
  for (int l = 0; l + 1 < model.layer_count(); ++l)
    if (model.weights[l].cols() != model.weights[l + 1].rows())
      throw std::invalid_argument("forward: weight chain mismatch");
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels,
                        const std::vector<std::uint8_t>& mask, int classes,
                        Eigen::Index n) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const int c = labels[i];
    if (c < 0 || c >= classes)
      throw std::invalid_argument("label out of range on train mask");
    y(i, c) = 1.0;
  }
  return y;
}

std::size_t mask_count(const std::vector<std::uint8_t>& mask) {
  std::size_t m = 0;
  for (std::uint8_t b : mask) m += b != 0;
  return m;
}

}  // namespace

Model init_weights(int d, int h, int c, std::uint64_t seed, int layers) {
  if (d < 1 || h < 1 || c < 1)
    throw std::invalid_argument("init_weights: dimensions must be >= 1");
  if (layers < 1) throw std::invalid_argument("init_weights: layers must be >= 1");

  Rng rng(derive_seed(seed, "init"));
  Model model;
  for (int l = 0; l < layers; ++l) {
    const int rows = l == 0 ? d : h;
    const int cols = l == layers - 1 ? c : h;
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
  }
  return model;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd z(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
    z.row(i) = e / e.sum();
  }
  return z;
}

Eigen::MatrixXd forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat,
                        const Model& model,
                        const std::vector<Eigen::MatrixXd>* dropout_masks) {
  check_shapes(x, a_hat, model);
  const int layers = model.layer_count();
  if (dropout_masks &&
      static_cast<int>(dropout_masks->size()) != layers - 1)
    throw std::invalid_argument("forward: need one dropout mask per hidden layer");

  Eigen::MatrixXd h = x;
  for (int l = 0; l + 1 < layers; ++l) {
    h = (a_hat * h * model.weights[l]).cwiseMax(0.0);
    if (dropout_masks) h = h.cwiseProduct((*dropout_masks)[l]);
  }
  return softmax_rows(a_hat * h * model.weights.back());
}

double loss(const Eigen::MatrixXd& z, const std::vector<int>& labels,
            const std::vector<std::uint8_t>& train_mask, const Model& model,
            double weight_decay) {
  if (static_cast<Eigen::Index>(labels.size()) != z.rows() ||
      static_cast<Eigen::Index>(train_mask.size()) != z.rows())
    throw std::invalid_argument("loss: label/mask length mismatch");
  const std::size_t m = mask_count(train_mask);
  if (m == 0) throw std::invalid_argument("loss: empty train mask");

  double ce = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (!train_mask[i]) continue;
    const int c = labels[i];
    if (c < 0 || c >= z.cols())
      throw std::invalid_argument("loss: label out of range");
    ce -= std::log(std::max(z(i, c), kLogFloor));
  }
  ce /= static_cast<double>(m);

  double reg = 0.0;
  for (const Eigen::MatrixXd& w : model.weights) reg += w.squaredNorm();
  return ce + 0.5 * weight_decay * reg;
}

std::vector<Eigen::MatrixXd> loss_gradients(
    const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat, const Model& model,
    const std::vector<int>& labels, const std::vector<std::uint8_t>& train_mask,
    double weight_decay, const std::vector<Eigen::MatrixXd>* dropout_masks) {
  check_shapes(x, a_hat, model);
  const int layers = model.layer_count();
  const Eigen::Index n = x.rows();
  const std::size_t m = mask_count(train_mask);
  if (m == 0) throw std::invalid_argument("loss_gradients: empty train mask");

  // Forward pass, keeping pre-activations and post-dropout activations.
  std::vector<Eigen::MatrixXd> pre(layers - 1);   // S_l before ReLU
  std::vector<Eigen::MatrixXd> act(layers);       // H_0 = X, then hidden
  act[0] = x;
  for (int l = 0; l + 1 < layers; ++l) {
    pre[l] = a_hat * act[l] * model.weights[l];
    Eigen::MatrixXd h = pre[l].cwiseMax(0.0);
    if (dropout_masks) h = h.cwiseProduct((*dropout_masks)[l]);
    act[l + 1] = std::move(h);
  }
  const Eigen::MatrixXd z = softmax_rows(a_hat * act[layers - 1] * model.weights.back());

  // Softmax cross-entropy over the mask: dL/dlogits = (Z - Y) / m on masked
  // rows, zero elsewhere.
  Eigen::MatrixXd delta = z - one_hot(labels, train_mask, static_cast<int>(z.cols()), n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!train_mask[i]) delta.row(i).setZero();
  delta /= static_cast<double>(m);

  std::vector<Eigen::MatrixXd> grads(layers);
  // A_hat is symmetric, so (A_hat M)^T = M^T A_hat.
  grads[layers - 1] =
      (a_hat * act[layers - 1]).transpose() * delta + weight_decay * model.weights.back();

  Eigen::MatrixXd dh = a_hat * (delta * model.weights.back().transpose());
  for (int l = layers - 2; l >= 0; --l) {
    if (dropout_masks) dh = dh.cwiseProduct((*dropout_masks)[l]);
    // ReLU gate on the pre-activation sign.
    Eigen::MatrixXd ds =
        (pre[l].array() > 0.0).cast<double>().matrix().cwiseProduct(dh);
    grads[l] = (a_hat * act[l]).transpose() * ds + weight_decay * model.weights[l];
    if (l > 0) dh = a_hat * (ds * model.weights[l].transpose());
  }
  return grads;
}

std::vector<Eigen::MatrixXd> make_dropout_masks(int n, const Model& model,
                                                double dropout, Rng& rng) {
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("dropout must be in [0, 1)");
  std::vector<Eigen::MatrixXd> masks;
  const double keep = 1.0 - dropout;
  for (int l = 0; l + 1 < model.layer_count(); ++l) {
    const Eigen::Index width = model.weights[l].cols();
    Eigen::MatrixXd mask(n, width);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < width; ++j)
        mask(i, j) = rng.next_double() < dropout ? 0.0 : 1.0 / keep;
    masks.push_back(std::move(mask));
  }
  return masks;
}

TrainResult train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a_hat,
                  const std::vector<int>& labels,
                  const std::vector<std::uint8_t>& train_mask, int class_count,
                  const Hyperparams& hp) {
  if (hp.epochs < 0) throw std::invalid_argument("train: negative epochs");
  if (mask_count(train_mask) == 0)
    throw std::invalid_argument("train: empty train mask");

  TrainResult result;
  result.model = init_weights(static_cast<int>(x.cols()), hp.hidden_width,
                              class_count, hp.seed, hp.layers);
  result.loss_history.reserve(hp.epochs);

  Rng dropout_rng(derive_seed(hp.seed, "dropout"));
  const int n = static_cast<int>(x.rows());
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::vector<Eigen::MatrixXd> masks;
    const std::vector<Eigen::MatrixXd>* masks_ptr = nullptr;
    if (hp.dropout > 0.0 && hp.layers > 1) {
      masks = make_dropout_masks(n, result.model, hp.dropout, dropout_rng);
      masks_ptr = &masks;
    }
    const std::vector<Eigen::MatrixXd> grads =
        loss_gradients(x, a_hat, result.model, labels, train_mask,
                       hp.weight_decay, masks_ptr);
    for (int l = 0; l < result.model.layer_count(); ++l)
      result.model.weights[l] -= hp.learning_rate * grads[l];

    const Eigen::MatrixXd z = forward(x, a_hat, result.model, masks_ptr);
    const double value = loss(z, labels, train_mask, result.model, hp.weight_decay);
    if (!std::isfinite(value))
      throw std::runtime_error("training diverged at epoch " +
                               std::to_string(epoch) + ": loss " +
                               std::to_string(value));
    result.loss_history.push_back(value);
  }
  return result;
}

std::vector<int> predict(const Model& model, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& a_hat) {
  const Eigen::MatrixXd z = forward(x, a_hat, model, nullptr);
  std::vector<int> out(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < z.cols(); ++c)
      if (z(i, c) > z(i, best)) best = static_cast<int>(c);
    out[i] = best;
  }
  return out;
}

void save_checkpoint(const std::string& path, const Model& model,
                     const Hyperparams& hp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write '" + path + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));

  auto put_u64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  auto put_f64 = [&](double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };

  put_u64(static_cast<std::uint64_t>(model.layer_count()));
  put_f64(hp.learning_rate);
  put_u64(static_cast<std::uint64_t>(hp.layers));
  put_u64(static_cast<std::uint64_t>(hp.hidden_width));
  put_f64(hp.weight_decay);
  put_f64(hp.dropout);
  put_u64(static_cast<std::uint64_t>(hp.epochs));
  put_u64(hp.seed);

  for (const Eigen::MatrixXd& w : model.weights) {
    put_u64(static_cast<std::uint64_t>(w.rows()));
    put_u64(static_cast<std::uint64_t>(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) put_f64(w(i, j));
  }
  if (!out) throw UserError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open '" + path + "'");

  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw UserError(path + ": not a model checkpoint");

  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };

  Checkpoint cp;
  const std::uint64_t layers = get_u64();
  cp.hp.learning_rate = get_f64();
  cp.hp.layers = static_cast<int>(get_u64());
  cp.hp.hidden_width = static_cast<int>(get_u64());
  cp.hp.weight_decay = get_f64();
  cp.hp.dropout = get_f64();
  cp.hp.epochs = static_cast<int>(get_u64());
  cp.hp.seed = get_u64();
  if (!in || layers == 0 || layers > 64)
    throw UserError(path + ": corrupt checkpoint header");

  for (std::uint64_t l = 0; l < layers; ++l) {
    const std::uint64_t rows = get_u64();
    const std::uint64_t cols = get_u64();
    if (!in || rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
      throw UserError(path + ": corrupt weight shape");
    Eigen::MatrixXd w(rows, cols);
    for (std::uint64_t i = 0; i < rows; ++i)
      for (std::uint64_t j = 0; j < cols; ++j) w(i, j) = get_f64();
    cp.model.weights.push_back(std::move(w));
  }
  if (!in) throw UserError(path + ": truncated checkpoint");
  return cp;
}

}  // namespace sdnshield::gcn
