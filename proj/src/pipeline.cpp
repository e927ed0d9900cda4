#include "sdnshield/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "sdnshield/errors.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::pipeline {

namespace {

// Stage annotation keeps the failing phase visible in CLI error output.
template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const UserError& e) {
    throw UserError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

std::size_t count_edges(const Eigen::MatrixXd& a) {
  std::size_t edges = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) ++edges;
  return edges;
}

}  // namespace

std::vector<int> project_binary_labels(std::span<const flowkit::Label> labels) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = flowkit::is_attack(labels[i]) ? kDetectAttack : kDetectBenign;
  return out;
}

DetectResult detect(const netgraph::TrafficGraph& graph,
                    const gcn::Hyperparams& hp, const SplitSpec& split,
                    const Eigen::MatrixXd* base_adjacency) {
  if (graph.size() == 0) throw std::invalid_argument("detect: empty graph");

  std::vector<flowkit::Label> labels(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    labels[i] = graph.nodes[i].label;
  const std::vector<int> binary = project_binary_labels(labels);

  DetectResult result;
  result.split = make_split(binary, 2, split);

  bool train_has[2] = {false, false};
  for (std::size_t i = 0; i < binary.size(); ++i)
    if (result.split.train[i]) train_has[binary[i]] = true;
  if (!train_has[kDetectBenign] || !train_has[kDetectAttack])
    throw UserError("detect: a class is absent from the train mask");

  Eigen::MatrixXd x = graph.x;
  standardize_features(x, result.split.train);
  const Eigen::MatrixXd a_hat = netgraph::normalized_adjacency(
      base_adjacency ? *base_adjacency : graph.adjacency);

  gcn::TrainResult trained = gcn::train(x, a_hat, binary, result.split.train, 2, hp);
  result.loss_history = std::move(trained.loss_history);
  result.predictions = gcn::predict(trained.model, x, a_hat);

  std::vector<int> test_pred;
  std::vector<int> test_truth;
  for (std::size_t i = 0; i < binary.size(); ++i) {
    if (!result.split.test[i]) continue;
    test_pred.push_back(result.predictions[i]);
    test_truth.push_back(binary[i]);
  }
  if (test_pred.empty()) throw UserError("detect: empty test set");
  result.metrics =
      evaluate(test_pred, test_truth, 2, Averaging::kBinary, kDetectAttack);
  return result;
}

IdentifyResult identify(const netgraph::TrafficGraph& graph,
                        std::span<const int> detected_malicious,
                        const gcn::Hyperparams& hp, const SplitSpec& split,
                        const Eigen::MatrixXd* base_adjacency) {
  if (detected_malicious.empty())
    throw UserError("identify: no detected nodes");

  IdentifyResult result;
  result.node_indices.assign(detected_malicious.begin(), detected_malicious.end());
  std::sort(result.node_indices.begin(), result.node_indices.end());
  result.node_indices.erase(
      std::unique(result.node_indices.begin(), result.node_indices.end()),
      result.node_indices.end());
  for (int idx : result.node_indices)
    if (idx < 0 || idx >= graph.size())
      throw std::invalid_argument("identify: node index out of range");

  const std::size_t m = result.node_indices.size();

  // Class universe: attack classes present in the detected nodes' truth.
  std::set<flowkit::Label> present;
  for (int idx : result.node_indices)
    if (flowkit::is_attack(graph.nodes[idx].label))
      present.insert(graph.nodes[idx].label);
  result.class_universe.assign(present.begin(), present.end());

  if (result.class_universe.empty()) {
    // Nothing but false positives; no attack class to learn.
    result.predicted.assign(m, flowkit::Label::kDDoS);
    result.degenerate = true;
    return result;
  }

  std::map<flowkit::Label, int> to_compact;
  for (std::size_t c = 0; c < result.class_universe.size(); ++c)
    to_compact[result.class_universe[c]] = static_cast<int>(c);
  const int class_count = static_cast<int>(result.class_universe.size());

  // Compact labels: attack truth mapped to its class; benign truth (false
  // positives) marked -1 and kept out of training and metrics.
  std::vector<int> compact(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const flowkit::Label l = graph.nodes[result.node_indices[i]].label;
    if (flowkit::is_attack(l)) compact[i] = to_compact[l];
  }

  if (class_count == 1) {
    result.predicted.assign(m, result.class_universe[0]);
    result.degenerate = true;
    return result;
  }

  // Split over the attack-truth rows only.
  std::vector<int> attack_rows;
  std::vector<int> attack_labels;
  for (std::size_t i = 0; i < m; ++i) {
    if (compact[i] < 0) continue;
    attack_rows.push_back(static_cast<int>(i));
    attack_labels.push_back(compact[i]);
  }
  const SplitMasks attack_split = make_split(attack_labels, class_count, split);

  std::vector<std::uint8_t> train_mask(m, 0);
  std::vector<std::uint8_t> test_mask(m, 0);
  for (std::size_t k = 0; k < attack_rows.size(); ++k) {
    train_mask[attack_rows[k]] = attack_split.train[k];
    test_mask[attack_rows[k]] = attack_split.test[k];
  }
  for (int c = 0; c < class_count; ++c) {
    bool found = false;
    for (std::size_t k = 0; k < attack_rows.size(); ++k)
      if (attack_split.train[k] && attack_labels[k] == c) found = true;
    if (!found)
      throw UserError("identify: class " +
                      std::string(flowkit::label_name(result.class_universe[c])) +
                      " absent from the train mask");
  }

  // Induced subgraph on the detected nodes, renormalized.
  const Eigen::MatrixXd& base =
      base_adjacency ? *base_adjacency : graph.adjacency;
  Eigen::MatrixXd sub(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      sub(i, j) = base(result.node_indices[i], result.node_indices[j]);
  sub.diagonal().setZero();
  const Eigen::MatrixXd a_hat = netgraph::normalized_adjacency(sub);

  Eigen::MatrixXd x(m, graph.x.cols());
  for (std::size_t i = 0; i < m; ++i) x.row(i) = graph.x.row(result.node_indices[i]);
  standardize_features(x, train_mask);
  // The train rows are all attack sessions, so some columns have tiny
  // variance there; a benign false-positive row can then standardize to
  // z-values in the thousands and blow up the first gradient step through
  // the shared-victim hub edges. Those rows carry no training signal, so
  // compressing the tails is safe.
  x = x.cwiseMax(-10.0).cwiseMin(10.0);

  std::vector<int> train_labels(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (compact[i] >= 0) train_labels[i] = compact[i];

  gcn::TrainResult trained =
      gcn::train(x, a_hat, train_labels, train_mask, class_count, hp);
  result.loss_history = std::move(trained.loss_history);
  const std::vector<int> pred = gcn::predict(trained.model, x, a_hat);

  result.predicted.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    result.predicted[i] = result.class_universe[pred[i]];

  std::vector<int> test_pred;
  std::vector<int> test_truth;
  for (std::size_t i = 0; i < m; ++i) {
    if (!test_mask[i] || compact[i] < 0) continue;
    test_pred.push_back(pred[i]);
    test_truth.push_back(compact[i]);
  }
  if (test_pred.empty()) {
    result.degenerate = true;
    return result;
  }
  result.metrics =
      evaluate(test_pred, test_truth, class_count, Averaging::kMacro);
  return result;
}

namespace {

using Echo = std::vector<std::pair<std::string, std::string>>;

const char* split_mode_name(SplitSpec::Mode mode) {
  switch (mode) {
    case SplitSpec::Mode::kFixedSampling: return "fixed";
    case SplitSpec::Mode::kRatio: return "ratio";
    case SplitSpec::Mode::kSmallTrain: return "small";
  }
  return "?";
}

Echo echo_config(const PipelineConfig& config) {
  Echo echo;
  echo.emplace_back("model", config.use_hypergraph ? "hypergcn" : "gcn");
  echo.emplace_back("noflow",
                    config.noflow_mode == flowkit::NoflowMode::kZeros
                        ? "zeros"
                        : "sample");
  echo.emplace_back("seed", std::to_string(config.seed));
  echo.emplace_back("detect_split", split_mode_name(config.detect_split.mode));
  echo.emplace_back("detect_per_class_train",
                    std::to_string(config.detect_split.per_class_train));
  echo.emplace_back("detect_train_fraction",
                    format_double(config.detect_split.train_fraction));
  echo.emplace_back("detect_small_fraction",
                    format_double(config.detect_split.small_train_fraction));
  echo.emplace_back("identify_split",
                    split_mode_name(config.identify_split.mode));
  echo.emplace_back("identify_train_fraction",
                    format_double(config.identify_split.train_fraction));
  const auto hp_echo = [&echo](const std::string& prefix,
                               const gcn::Hyperparams& hp) {
    echo.emplace_back(prefix + "_learning_rate",
                      format_double(hp.learning_rate));
    echo.emplace_back(prefix + "_layers", std::to_string(hp.layers));
    echo.emplace_back(prefix + "_hidden", std::to_string(hp.hidden_width));
    echo.emplace_back(prefix + "_weight_decay",
                      format_double(hp.weight_decay));
    echo.emplace_back(prefix + "_dropout", format_double(hp.dropout));
    echo.emplace_back(prefix + "_epochs", std::to_string(hp.epochs));
  };
  hp_echo("detect", config.detect_hp);
  hp_echo("identify", config.identify_hp);
  if (config.run_rf_baseline) {
    echo.emplace_back("baseline", "rf");
    echo.emplace_back("rf_trees", std::to_string(config.rf.n_trees));
    echo.emplace_back("rf_max_depth", std::to_string(config.rf.max_depth));
    echo.emplace_back("rf_seed", std::to_string(config.rf.seed));
  }
  if (!config.train_sizes.empty()) {
    std::string sizes;
    for (std::size_t s : config.train_sizes) {
      if (!sizes.empty()) sizes += ",";
      sizes += std::to_string(s);
    }
    echo.emplace_back("train_sizes", sizes);
  }
  return echo;
}

ExperimentReport run_pipeline(std::vector<flowkit::BasicFlow> basic,
                              std::size_t packet_count,
                              const PipelineConfig& config) {
  ExperimentReport report;
  report.config_echo = echo_config(config);
  report.packet_count = packet_count;

  basic = stage("characterize", [&] {
    return flowkit::dedupe_mixed_attackers(std::move(basic));
  });
  report.basic_flow_count = basic.size();

  netgraph::TrafficGraph graph = stage("graph", [&] {
    std::vector<flowkit::ActivityFlow> activity =
        flowkit::group_activity_flows(basic);
    const std::vector<flowkit::Endpoint> endpoints =
        flowkit::collect_endpoints(basic);
    flowkit::NoflowResult noflow = flowkit::synthesize_noflow_nodes(
        endpoints, activity, config.noflow_mode,
        derive_seed(config.seed, "noflow"));
    report.noflow_count = noflow.nodes.size();
    report.noflow_fell_back = noflow.fell_back_to_zeros;
    if (noflow.fell_back_to_zeros)
      report.warnings.push_back(
          "noflow synthesis fell back to zeros (no low-profile benign donor)");
    activity.insert(activity.end(),
                    std::make_move_iterator(noflow.nodes.begin()),
                    std::make_move_iterator(noflow.nodes.end()));
    return netgraph::build_graph(std::move(activity), basic);
  });
  report.node_count = graph.nodes.size();

  Eigen::MatrixXd base_adjacency;
  const Eigen::MatrixXd* base_ptr = nullptr;
  if (config.use_hypergraph) {
    base_adjacency = stage("hypergraph", [&] {
      const netgraph::Hypergraph h = netgraph::build_hypergraph(
          graph, basic, netgraph::HyperedgeGrouping::kByDestination);
      return netgraph::hypergraph_expand(h, graph.x);
    });
    base_ptr = &base_adjacency;
  }
  report.edge_count =
      count_edges(base_ptr ? base_adjacency : graph.adjacency);

  gcn::Hyperparams detect_hp = config.detect_hp;
  detect_hp.seed = derive_seed(config.seed, "detect");
  SplitSpec detect_split = config.detect_split;
  detect_split.seed = derive_seed(config.seed, "detect_split");
  report.detection = stage("detect", [&] {
    return detect(graph, detect_hp, detect_split, base_ptr);
  });
  for (const std::string& w : report.detection.split.warnings)
    report.warnings.push_back("detect split: " + w);

  if (config.run_rf_baseline) {
    report.rf_baseline = stage("baseline", [&] {
      std::vector<flowkit::Label> labels(graph.nodes.size());
      for (std::size_t i = 0; i < graph.nodes.size(); ++i)
        labels[i] = graph.nodes[i].label;
      const std::vector<int> binary = project_binary_labels(labels);
      return baseline_random_forest(graph.x, binary, report.detection.split, 2,
                                    config.rf, Averaging::kBinary,
                                    kDetectAttack);
    });
  }

  std::vector<int> detected;
  for (std::size_t i = 0; i < report.detection.predictions.size(); ++i)
    if (report.detection.predictions[i] == kDetectAttack)
      detected.push_back(static_cast<int>(i));

  if (!detected.empty()) {
    gcn::Hyperparams identify_hp = config.identify_hp;
    identify_hp.seed = derive_seed(config.seed, "identify");
    SplitSpec identify_split = config.identify_split;
    identify_split.seed = derive_seed(config.seed, "identify_split");
    report.identification = stage("identify", [&] {
      return identify(graph, detected, identify_hp, identify_split, base_ptr);
    });
    for (std::size_t k = 0; k < report.identification->node_indices.size(); ++k)
      report.suspicious.emplace_back(
          graph.nodes[report.identification->node_indices[k]].source,
          report.identification->predicted[k]);
  } else {
    report.warnings.push_back("layer 1 flagged no nodes; identification skipped");
  }

  if (!config.train_sizes.empty()) {
    gcn::Hyperparams size_hp = config.detect_hp;
    size_hp.seed = derive_seed(config.seed, "size_sweep");
    report.size_rows = stage("size_sweep", [&] {
      return vary_training_size(graph, config.train_sizes, size_hp,
                                derive_seed(config.seed, "size_split"),
                                base_ptr);
    });
  }
  return report;
}

}  // namespace

ExperimentReport run_two_layer(std::span<const flowkit::PacketRecord> packets,
                               const PipelineConfig& config) {
  std::vector<flowkit::BasicFlow> basic = stage("characterize", [&] {
    return flowkit::group_basic_flows(packets);
  });
  return run_pipeline(std::move(basic), packets.size(), config);
}

ExperimentReport run_two_layer_flows(std::vector<flowkit::BasicFlow> basic,
                                     const PipelineConfig& config) {
  std::size_t packets = 0;
  for (const flowkit::BasicFlow& f : basic) packets += f.packet_count;
  return run_pipeline(std::move(basic), packets, config);
}

std::vector<SizeRow> vary_training_size(const netgraph::TrafficGraph& graph,
                                        std::span<const std::size_t> sizes,
                                        const gcn::Hyperparams& hp,
                                        std::uint64_t seed,
                                        const Eigen::MatrixXd* base_adjacency) {
  std::vector<flowkit::Label> labels(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    labels[i] = graph.nodes[i].label;
  const std::vector<int> binary = project_binary_labels(labels);
  std::size_t population[2] = {0, 0};
  for (int b : binary) population[b]++;

  std::vector<SizeRow> rows;
  for (std::size_t size : sizes) {
    SizeRow row;
    row.size = size;
    if (size == 0) {
      row.skipped = true;
      row.warning = "size 0 skipped";
    } else if (size > population[kDetectBenign] ||
               size > population[kDetectAttack]) {
      row.skipped = true;
      row.warning = "size " + std::to_string(size) +
                    " exceeds a class population (benign " +
                    std::to_string(population[kDetectBenign]) + ", attack " +
                    std::to_string(population[kDetectAttack]) + ")";
    } else {
      SplitSpec split;
      split.mode = SplitSpec::Mode::kFixedSampling;
      split.per_class_train = size;
      split.seed = derive_seed(seed, "size:" + std::to_string(size));
      const DetectResult r = detect(graph, hp, split, base_adjacency);
      row.metrics = r.metrics;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sdnshield::pipeline
