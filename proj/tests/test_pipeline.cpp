#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "sdnshield/errors.hpp"
#include "sdnshield/flowkit.hpp"
#include "sdnshield/netgraph.hpp"
#include "sdnshield/pipeline.hpp"
#include "sdnshield/rng.hpp"

using namespace sdnshield;
using namespace sdnshield::pipeline;

namespace {

flowkit::Endpoint ep(int i) {
  return {"10.0." + std::to_string(i / 250) + "." + std::to_string(i % 250 + 1),
          5000};
}

// Nodes in well-separated feature clusters, one cluster per (label, count)
// group. Each group forms its own ring; one bridge edge joins consecutive
// groups so the graph stays connected without smearing clusters together.
// IPs increase with the creation index, so build_graph keeps the order.
netgraph::TrafficGraph cluster_graph(
    const std::vector<std::pair<flowkit::Label, int>>& groups,
    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<flowkit::ActivityFlow> nodes;
  std::vector<flowkit::BasicFlow> basic;
  auto link = [&basic, &nodes](int i, int j) {
    flowkit::BasicFlow b;
    b.key.src = ep(i);
    b.key.dst = ep(j);
    b.label = nodes[i].label;
    b.packet_count = 1;
    basic.push_back(b);
  };
  int idx = 0;
  int group_no = 0;
  int prev_start = -1;
  for (const auto& [label, count] : groups) {
    const double center = -6.0 + 6.0 * group_no++;
    const int start = idx;
    for (int k = 0; k < count; ++k, ++idx) {
      flowkit::ActivityFlow f;
      f.source = ep(idx);
      f.label = label;
      f.basic_flow_count = 1;
      for (int c = 0; c < flowkit::kFeatureCount; ++c)
        f.features[c] = center + rng.uniform(-0.5, 0.5);
      nodes.push_back(f);
      if (k > 0) link(idx - 1, idx);
    }
    if (count > 2) link(idx - 1, start);
    if (prev_start >= 0) link(prev_start, start);
    prev_start = start;
  }
  return netgraph::build_graph(std::move(nodes), basic);
}

gcn::Hyperparams fast_hp() {
  gcn::Hyperparams hp;
  hp.hidden_width = 16;
  hp.epochs = 80;
  return hp;
}

}  // namespace

TEST_CASE("binary evaluation matches a hand-built confusion matrix") {
  const std::vector<int> pred = {1, 1, 1, 0, 0, 0, 1, 0};
  const std::vector<int> truth = {1, 1, 0, 0, 0, 1, 1, 0};
  const Metrics m = evaluate(pred, truth, 2, Averaging::kBinary, 1);
  CHECK(m.accuracy == doctest::Approx(0.75));
  CHECK(m.f1 == doctest::Approx(0.75));  // P = R = 3/4
  REQUIRE(m.confusion.size() == 2);
  CHECK(m.confusion[1][1] == 3);
  CHECK(m.confusion[0][1] == 1);
  CHECK(m.confusion[1][0] == 1);
  CHECK(m.confusion[0][0] == 3);
  CHECK(m.total() == 8);
}

TEST_CASE("macro evaluation averages per-class F1 and scores absent classes 0") {
  const std::vector<int> pred = {0, 1, 1, 1};
  const std::vector<int> truth = {0, 0, 1, 1};
  const Metrics m = evaluate(pred, truth, 3, Averaging::kMacro);
  REQUIRE(m.per_class_f1.size() == 3);
  CHECK(m.per_class_f1[0] == doctest::Approx(2.0 / 3.0));
  CHECK(m.per_class_f1[1] == doctest::Approx(0.8));
  CHECK(m.per_class_f1[2] == doctest::Approx(0.0));
  CHECK(m.f1 == doctest::Approx((2.0 / 3.0 + 0.8) / 3.0));
  CHECK(m.accuracy == doctest::Approx(0.75));
}

TEST_CASE("evaluation rejects bad inputs") {
  CHECK_THROWS_AS(evaluate(std::vector<int>{}, std::vector<int>{}, 2,
                           Averaging::kBinary),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate(std::vector<int>{0, 1}, std::vector<int>{0}, 2,
                           Averaging::kBinary),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate(std::vector<int>{2}, std::vector<int>{0}, 2,
                           Averaging::kBinary),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate(std::vector<int>{0}, std::vector<int>{5}, 2,
                           Averaging::kBinary),
                  std::invalid_argument);
}

TEST_CASE("binary projection folds both benign kinds to 0 and attacks to 1") {
  using flowkit::Label;
  const std::vector<Label> labels = {
      Label::kBenign,   Label::kNoflowBenign, Label::kDDoS,
      Label::kPortScan, Label::kSlowDDoS,     Label::kFastDDoS,
      Label::kSlowDcDDoS, Label::kFastDcDDoS};
  CHECK(project_binary_labels(labels) ==
        std::vector<int>{0, 0, 1, 1, 1, 1, 1, 1});
}

TEST_CASE("ratio split takes the rounded fraction per class") {
  std::vector<int> labels(10, 0);
  labels.insert(labels.end(), 4, 1);
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  spec.train_fraction = 0.8;
  spec.seed = 5;
  const SplitMasks m = make_split(labels, 2, spec);
  REQUIRE(m.train.size() == 14);
  std::size_t train0 = 0, train1 = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CHECK(m.train[i] + m.test[i] == 1);  // disjoint and covering
    if (m.train[i]) (labels[i] == 0 ? train0 : train1)++;
  }
  CHECK(train0 == 8);
  CHECK(train1 == 3);  // round(0.8 * 4)
  CHECK(m.warnings.empty());
  CHECK(m.train_count() == 11);
  CHECK(m.test_count() == 3);
}

TEST_CASE("fixed sampling caps oversized requests and warns") {
  std::vector<int> labels(5, 0);
  labels.push_back(1);  // population 1
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kFixedSampling;
  spec.per_class_train = 20000;
  const SplitMasks m = make_split(labels, 2, spec);
  std::size_t train0 = 0;
  for (int i = 0; i < 5; ++i) train0 += m.train[i];
  CHECK(train0 == 4);  // population - 1 keeps a test row
  CHECK(m.train[5] == 1);
  CHECK(m.test[5] == 0);
  REQUIRE(m.warnings.size() == 2);
  CHECK(m.warnings[0].find("requested 20000") != std::string::npos);
  CHECK(m.warnings[1].find("population 1") != std::string::npos);

  spec.per_class_train = 3;
  const SplitMasks exact = make_split(std::vector<int>(5, 0), 1, spec);
  CHECK(exact.train_count() == 3);
  CHECK(exact.test_count() == 2);
  CHECK(exact.warnings.empty());
}

TEST_CASE("small-train split keeps at least one row on each side") {
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kSmallTrain;
  spec.small_train_fraction = 0.05;
  const SplitMasks m = make_split(std::vector<int>(40, 0), 1, spec);
  CHECK(m.train_count() == 2);  // round(0.05 * 40)
  CHECK(m.test_count() == 38);

  const SplitMasks tiny = make_split(std::vector<int>(2, 0), 1, spec);
  CHECK(tiny.train_count() == 1);  // clamped up from round(0.1) = 0
  CHECK(tiny.test_count() == 1);
}

TEST_CASE("splits are reproducible per seed and move with it") {
  std::vector<int> labels(30, 0);
  for (int i = 0; i < 30; i += 3) labels[i] = 1;
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  spec.train_fraction = 0.5;
  spec.seed = 41;
  const SplitMasks a = make_split(labels, 2, spec);
  const SplitMasks b = make_split(labels, 2, spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  spec.seed = 42;
  const SplitMasks c = make_split(labels, 2, spec);
  CHECK(a.train != c.train);
}

TEST_CASE("split rejects out-of-range labels") {
  SplitSpec spec;
  CHECK_THROWS_AS(make_split(std::vector<int>{0, 2}, 2, spec),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_split(std::vector<int>{-1}, 2, spec),
                  std::invalid_argument);
}

TEST_CASE("standardization uses train-row statistics only") {
  Eigen::MatrixXd x(4, 2);
  x << 1.0, 5.0, 3.0, 5.0, 100.0, 5.0, -7.0, 9.0;
  const std::vector<std::uint8_t> mask = {1, 1, 0, 0};
  standardize_features(x, mask);
  // Column 0 train stats: mean 2, population sd 1.
  CHECK(x(0, 0) == doctest::Approx(-1.0));
  CHECK(x(1, 0) == doctest::Approx(1.0));
  CHECK(x(2, 0) == doctest::Approx(98.0));  // scaled with train stats
  // Column 1 has zero train variance: centered, scale kept at 1.
  CHECK(x(0, 1) == doctest::Approx(0.0));
  CHECK(x(3, 1) == doctest::Approx(4.0));
}

TEST_CASE("standardization rejects bad masks") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  std::vector<std::uint8_t> empty = {0, 0};
  CHECK_THROWS_AS(standardize_features(x, empty), std::invalid_argument);
  std::vector<std::uint8_t> short_mask = {1};
  CHECK_THROWS_AS(standardize_features(x, short_mask), std::invalid_argument);
}

TEST_CASE("random forest separates clustered data deterministically") {
  Rng rng(31);
  const int n = 90;
  Eigen::MatrixXd x(n, 3);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 3;
    for (int j = 0; j < 3; ++j)
      x(i, j) = 4.0 * labels[i] + rng.uniform(-0.5, 0.5);
  }
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  spec.train_fraction = 0.7;
  spec.seed = 8;
  const SplitMasks split = make_split(labels, 3, spec);

  RandomForestConfig config;
  config.n_trees = 30;
  const RfResult a =
      baseline_random_forest(x, labels, split, 3, config, Averaging::kMacro);
  CHECK(a.predictions.size() == static_cast<std::size_t>(n));
  CHECK(a.metrics.accuracy == doctest::Approx(1.0));
  CHECK(a.metrics.f1 == doctest::Approx(1.0));

  const RfResult b =
      baseline_random_forest(x, labels, split, 3, config, Averaging::kMacro);
  CHECK(a.predictions == b.predictions);
}

TEST_CASE("random forest config is validated") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  const std::vector<int> labels = {0, 1};
  const std::vector<std::uint8_t> mask = {1, 1};
  RandomForestConfig bad;
  bad.n_trees = 0;
  CHECK_THROWS_AS(train_random_forest(x, labels, mask, 2, bad),
                  std::invalid_argument);
  RandomForestConfig ok;
  const std::vector<std::uint8_t> none = {0, 0};
  CHECK_THROWS_AS(train_random_forest(x, labels, none, 2, ok),
                  std::invalid_argument);
}

TEST_CASE("detection learns a separable benign/attack graph") {
  const auto graph = cluster_graph(
      {{flowkit::Label::kBenign, 30}, {flowkit::Label::kFastDDoS, 30}}, 900);
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  spec.train_fraction = 0.7;
  spec.seed = 2;
  const DetectResult r = detect(graph, fast_hp(), spec);
  CHECK(r.predictions.size() == 60);
  CHECK(r.loss_history.size() == 80);
  CHECK(r.metrics.f1 >= 0.95);
  CHECK(r.split.train_count() + r.split.test_count() == 60);

  // Explicitly passing the graph's own adjacency changes nothing.
  const DetectResult same = detect(graph, fast_hp(), spec, &graph.adjacency);
  CHECK(same.predictions == r.predictions);
}

TEST_CASE("detection refuses a graph with a one-sided train mask") {
  const auto graph = cluster_graph({{flowkit::Label::kBenign, 10}}, 901);
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  CHECK_THROWS_AS(detect(graph, fast_hp(), spec), UserError);
}

TEST_CASE("identification classifies attack variants and tolerates false positives") {
  const auto graph = cluster_graph({{flowkit::Label::kBenign, 20},
                                    {flowkit::Label::kSlowDDoS, 14},
                                    {flowkit::Label::kFastDDoS, 14},
                                    {flowkit::Label::kPortScan, 14}},
                                   902);
  std::vector<int> detected;
  detected.push_back(3);  // benign false positive
  for (int i = 20; i < 62; ++i) detected.push_back(i);

  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  spec.train_fraction = 0.75;
  spec.seed = 6;
  gcn::Hyperparams hp = fast_hp();
  hp.layers = 3;
  hp.epochs = 400;  // three near-1D clusters converge slowly
  const IdentifyResult r = identify(graph, detected, hp, spec);

  REQUIRE(r.node_indices.size() == 43);
  CHECK(std::is_sorted(r.node_indices.begin(), r.node_indices.end()));
  REQUIRE(r.predicted.size() == 43);
  CHECK(r.class_universe ==
        std::vector<flowkit::Label>{flowkit::Label::kPortScan,
                                    flowkit::Label::kSlowDDoS,
                                    flowkit::Label::kFastDDoS});
  CHECK(!r.degenerate);
  CHECK(r.metrics.f1 >= 0.9);
  // The false positive still gets a verdict, drawn from the universe.
  const auto it = std::find(r.node_indices.begin(), r.node_indices.end(), 3);
  REQUIRE(it != r.node_indices.end());
  const flowkit::Label fp_label = r.predicted[it - r.node_indices.begin()];
  CHECK(flowkit::is_attack(fp_label));
}

TEST_CASE("class universe holds only classes present in the detected truth") {
  const auto graph = cluster_graph({{flowkit::Label::kSlowDDoS, 6},
                                    {flowkit::Label::kFastDDoS, 6}},
                                   903);
  std::vector<int> detected(12);
  for (int i = 0; i < 12; ++i) detected[i] = i;
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::kRatio;
  const IdentifyResult r = identify(graph, detected, fast_hp(), spec);
  CHECK(r.class_universe ==
        std::vector<flowkit::Label>{flowkit::Label::kSlowDDoS,
                                    flowkit::Label::kFastDDoS});
}

TEST_CASE("identification degenerates gracefully on a single class") {
  const auto graph = cluster_graph({{flowkit::Label::kBenign, 5},
                                    {flowkit::Label::kPortScan, 8}},
                                   904);
  std::vector<int> detected;
  for (int i = 5; i < 13; ++i) detected.push_back(i);
  SplitSpec spec;
  const IdentifyResult r = identify(graph, detected, fast_hp(), spec);
  CHECK(r.degenerate);
  CHECK(r.loss_history.empty());
  for (flowkit::Label l : r.predicted) CHECK(l == flowkit::Label::kPortScan);
}

TEST_CASE("identification over only false positives marks itself degenerate") {
  const auto graph = cluster_graph({{flowkit::Label::kBenign, 6}}, 905);
  const std::vector<int> detected = {0, 1};
  SplitSpec spec;
  const IdentifyResult r = identify(graph, detected, fast_hp(), spec);
  CHECK(r.degenerate);
  CHECK(r.class_universe.empty());
  CHECK(r.predicted.size() == 2);
}

TEST_CASE("identification validates its inputs") {
  const auto graph = cluster_graph({{flowkit::Label::kSlowDDoS, 4}}, 906);
  SplitSpec spec;
  CHECK_THROWS_AS(identify(graph, std::vector<int>{}, fast_hp(), spec),
                  UserError);
  CHECK_THROWS_AS(identify(graph, std::vector<int>{99}, fast_hp(), spec),
                  std::invalid_argument);
}

TEST_CASE("training-size sweep skips impossible sizes with a warning") {
  const auto graph = cluster_graph(
      {{flowkit::Label::kBenign, 30}, {flowkit::Label::kSlowDDoS, 30}}, 907);
  const std::vector<std::size_t> sizes = {0, 5, 31};
  const auto rows = vary_training_size(graph, sizes, fast_hp(), 77);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].skipped);
  CHECK(rows[0].warning.find("size 0") != std::string::npos);
  CHECK(!rows[1].skipped);
  CHECK(rows[1].metrics.f1 >= 0.9);
  CHECK(rows[2].skipped);
  CHECK(rows[2].warning.find("exceeds") != std::string::npos);
}

namespace {

std::vector<flowkit::PacketRecord> smoke_trace() {
  std::vector<flowkit::PacketRecord> packets;
  auto push = [&packets](double t, const std::string& src, std::uint16_t sp,
                         const std::string& dst, std::uint16_t dp,
                         std::uint64_t bytes, flowkit::Label label) {
    flowkit::PacketRecord p;
    p.timestamp = t;
    p.src_ip = src;
    p.src_port = sp;
    p.dst_ip = dst;
    p.dst_port = dp;
    p.payload_bytes = bytes;
    p.label = label;
    packets.push_back(p);
  };

  // Six benign hosts chat with their neighbors in short flows.
  for (int h = 0; h < 6; ++h) {
    const std::string ip = "10.0.1." + std::to_string(h + 1);
    const std::string peer = "10.0.1." + std::to_string((h + 1) % 6 + 1);
    for (int f = 0; f < 2; ++f)
      for (int k = 0; k < 5; ++k)
        push(h + 10.0 * f + 0.4 * k, ip, static_cast<std::uint16_t>(20000 + f),
             peer, 80, 600, flowkit::Label::kBenign);
  }
  // Six attackers flood the silent victim.
  for (int a = 0; a < 6; ++a) {
    const std::string ip = "10.0.2." + std::to_string(a + 1);
    const auto label = a < 3 ? flowkit::Label::kSlowDDoS
                             : flowkit::Label::kFastDDoS;
    const double gap = a < 3 ? 0.05 : 0.001;
    for (int k = 0; k < 200; ++k)
      push(1.0 + gap * k, ip, 40000, "10.0.3.1", 80, 40, label);
  }
  std::stable_sort(packets.begin(), packets.end(),
                   [](const auto& a, const auto& b) {
                     return a.timestamp < b.timestamp;
                   });
  return packets;
}

}  // namespace

TEST_CASE("the two-layer pipeline runs end to end on a packet trace") {
  const auto packets = smoke_trace();

  PipelineConfig config;
  config.detect_hp = fast_hp();
  config.identify_hp = fast_hp();
  config.identify_hp.layers = 3;
  config.detect_split.mode = SplitSpec::Mode::kRatio;
  config.detect_split.train_fraction = 0.7;
  config.run_rf_baseline = true;
  config.rf.n_trees = 20;
  config.seed = 12;

  const ExperimentReport report = run_two_layer(packets, config);
  CHECK(report.packet_count == packets.size());
  CHECK(report.basic_flow_count > 0);
  CHECK(report.node_count > 12);
  CHECK(report.edge_count > 0);
  CHECK(report.noflow_count > 0);  // the victim never answers

  REQUIRE(!report.config_echo.empty());
  CHECK(report.config_echo.front().first == "model");
  CHECK(report.config_echo.front().second == "gcn");

  CHECK(report.detection.metrics.f1 >= 0.9);
  REQUIRE(report.rf_baseline.has_value());
  CHECK(report.rf_baseline->metrics.accuracy >= 0.9);
  REQUIRE(report.identification.has_value());
  REQUIRE(!report.suspicious.empty());
  bool attacker_flagged = false;
  for (const auto& [endpoint, label] : report.suspicious)
    attacker_flagged = attacker_flagged || endpoint.ip == "10.0.2.1";
  CHECK(attacker_flagged);

  // Same trace, same config: identical verdicts.
  const ExperimentReport again = run_two_layer(packets, config);
  CHECK(again.detection.predictions == report.detection.predictions);

  // Entering at the flow level is the same pipeline.
  const auto basic = flowkit::group_basic_flows(packets);
  const ExperimentReport flows = run_two_layer_flows(basic, config);
  CHECK(flows.detection.predictions == report.detection.predictions);
  CHECK(flows.packet_count == packets.size());
}
