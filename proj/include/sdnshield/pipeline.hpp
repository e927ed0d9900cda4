#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdnshield/flowkit.hpp"
#include "sdnshield/gcn.hpp"
#include "sdnshield/metrics.hpp"
#include "sdnshield/netgraph.hpp"
#include "sdnshield/random_forest.hpp"
#include "sdnshield/split.hpp"

namespace sdnshield::pipeline {

// Node classes for layer 1: 0 benign, 1 attack.
inline constexpr int kDetectBenign = 0;
inline constexpr int kDetectAttack = 1;

std::vector<int> project_binary_labels(std::span<const flowkit::Label> labels);

struct DetectResult {
  std::vector<int> predictions;  // per node: kDetectBenign / kDetectAttack
  Metrics metrics;               // test nodes
  SplitMasks split;
  std::vector<double> loss_history;
};

// Layer 1. Trains a binary GCN on the benign/attack projection of the node
// labels and predicts every node; metrics cover the test mask. The features
// are z-scored over the train mask internally. base_adjacency, when given,
// replaces the graph's own adjacency (e.g. a hypergraph expansion) before
// renormalization. A projected class absent from the train mask is an error.
DetectResult detect(const netgraph::TrafficGraph& graph,
                    const gcn::Hyperparams& hp, const SplitSpec& split,
                    const Eigen::MatrixXd* base_adjacency = nullptr);

struct IdentifyResult {
  std::vector<int> node_indices;  // graph indices of the classified nodes
  std::vector<flowkit::Label> predicted;        // parallel to node_indices
  std::vector<flowkit::Label> class_universe;   // attack classes in play
  Metrics metrics;      // test nodes with attack ground truth
  bool degenerate = false;  // single class: constant output, metrics skipped
  std::vector<double> loss_history;
};

// Layer 2. Classifies the detected nodes among the attack classes present
// in their ground truth, on the induced subgraph with renormalized
// adjacency. Benign-truth nodes inside the detected set (layer-1 false
// positives) still receive a predicted class but are excluded from training
// and metrics. Throws on an empty detected set.
IdentifyResult identify(const netgraph::TrafficGraph& graph,
                        std::span<const int> detected_malicious,
                        const gcn::Hyperparams& hp, const SplitSpec& split,
                        const Eigen::MatrixXd* base_adjacency = nullptr);

struct PipelineConfig {
  gcn::Hyperparams detect_hp;
  gcn::Hyperparams identify_hp;
  SplitSpec detect_split;
  SplitSpec identify_split;
  bool use_hypergraph = false;
  flowkit::NoflowMode noflow_mode = flowkit::NoflowMode::kSampleBenign;
  bool run_rf_baseline = false;
  RandomForestConfig rf;
  std::vector<std::size_t> train_sizes;  // optional detection size sweep
  std::uint64_t seed = 0;

  PipelineConfig() {
    identify_hp.layers = 3;
    identify_split.mode = SplitSpec::Mode::kRatio;
  }
};

struct SizeRow {
  std::size_t size = 0;
  bool skipped = false;
  std::string warning;
  Metrics metrics;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::size_t packet_count = 0;
  std::size_t basic_flow_count = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t noflow_count = 0;
  bool noflow_fell_back = false;

  DetectResult detection;
  std::optional<RfResult> rf_baseline;
  std::optional<IdentifyResult> identification;
  // Nodes layer 1 flagged as attack, with their layer-2 class.
  std::vector<std::pair<flowkit::Endpoint, flowkit::Label>> suspicious;
  std::vector<SizeRow> size_rows;
  std::vector<std::string> warnings;
};

// Characterize -> graph -> detect -> identify over a packet trace.
ExperimentReport run_two_layer(std::span<const flowkit::PacketRecord> packets,
                               const PipelineConfig& config);

// Same pipeline entered at the basic-flow level (external flow CSVs).
ExperimentReport run_two_layer_flows(std::vector<flowkit::BasicFlow> basic,
                                     const PipelineConfig& config);

// Detection repeated at several per-class train counts; a size of 0 or one
// exceeding a projected-class population is skipped with a warning row.
std::vector<SizeRow> vary_training_size(const netgraph::TrafficGraph& graph,
                                        std::span<const std::size_t> sizes,
                                        const gcn::Hyperparams& hp,
                                        std::uint64_t seed,
                                        const Eigen::MatrixXd* base_adjacency = nullptr);

}  // namespace sdnshield::pipeline
