#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdnshield/csv.hpp"
#include "sdnshield/errors.hpp"
#include "sdnshield/flow_csv.hpp"
#include "sdnshield/flowkit.hpp"
#include "sdnshield/pipeline.hpp"
#include "sdnshield/report.hpp"
#include "sdnshield/sdnsim.hpp"
#include "sdnshield/strings.hpp"
#include "sdnshield/trafficgen.hpp"

namespace fs = std::filesystem;

using sdnshield::UserError;
using sdnshield::format_double;
namespace flowkit = sdnshield::flowkit;
namespace pipeline = sdnshield::pipeline;
namespace sdnsim = sdnshield::sdnsim;
namespace trafficgen = sdnshield::trafficgen;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw UserError("cannot create directory '" + dir + "': " + ec.message());
}

using Echo = std::vector<std::pair<std::string, std::string>>;

void write_config_echo(const std::string& dir, const Echo& kv,
                       const std::string& trailer = {}) {
  const std::string path = dir + "/config_echo.txt";
  std::ofstream out(path);
  if (!out) throw UserError("cannot write '" + path + "'");
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
  if (!trailer.empty()) out << "\n" << trailer;
  if (!out) throw UserError("write failed for '" + path + "'");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Star topology: s1 is the core and the gateway; hosts attach round-robin
// across all switches with per-switch port numbering from 1.
sdnsim::TopologySpec star_topology(
    const std::vector<trafficgen::HostInfo>& hosts, int n_switches) {
  const int n = std::max(1, n_switches);
  sdnsim::TopologySpec spec;
  for (int i = 1; i <= n; ++i) spec.switches.push_back("s" + std::to_string(i));
  for (int i = 2; i <= n; ++i) spec.links.emplace_back("s1", spec.switches[i - 1]);
  std::vector<int> next_port(static_cast<std::size_t>(n), 1);
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    const std::size_t sw = i % static_cast<std::size_t>(n);
    spec.hosts.push_back({hosts[i].ip, hosts[i].mac,
                          spec.switches[sw] + ":" +
                              std::to_string(next_port[sw]++)});
  }
  spec.gateway = "s1";
  return spec;
}

struct GenerateArgs {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& args) {
  const trafficgen::ScenarioConfig config =
      trafficgen::ScenarioConfig::load(args.scenario);
  const trafficgen::Scenario scenario =
      trafficgen::gen_scenario(config, args.seed);

  ensure_dir(args.out);
  flowkit::write_packet_csv(args.out + "/trace.csv", scenario.packets, true);
  trafficgen::write_truth_csv(args.out + "/truth.csv", scenario.truth);
  sdnsim::write_topology_file(args.out + "/topology.cfg",
                              star_topology(scenario.hosts, config.switches));

  Echo echo{{"command", "generate"},
            {"scenario", args.scenario},
            {"seed", std::to_string(args.seed)},
            {"packets", std::to_string(scenario.packets.size())},
            {"hosts", std::to_string(scenario.hosts.size())}};
  write_config_echo(args.out, echo,
                    "[scenario file]\n" + slurp(args.scenario));

  std::cout << "wrote " << scenario.packets.size() << " packets for "
            << scenario.hosts.size() << " hosts into " << args.out << "\n";
  return 0;
}

struct DetectArgs {
  std::string packets;
  std::string flows;
  std::string mapping;
  std::string out;
  std::uint64_t seed = 0;
  std::string model = "gcn";
  std::string baseline;
  std::string noflow = "sample";
  std::string split = "fixed";
  std::size_t per_class_train = 20000;
  double train_fraction = 0.8;
  double small_fraction = 0.05;
  double lr = 0.15;
  int hidden = 128;
  double weight_decay = 0.0005;
  double dropout = 0.5;
  int epochs = 200;
  int layers = 2;
  int identify_layers = 3;
  std::string train_sizes;
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> sizes;
  for (const std::string& part : sdnshield::split(text, ',')) {
    const std::string token = sdnshield::trim(part);
    if (token.empty()) continue;
    const std::int64_t v = sdnshield::parse_int(token, "--train-sizes");
    if (v < 0) throw UserError("--train-sizes: negative size " + token);
    sizes.push_back(static_cast<std::size_t>(v));
  }
  return sizes;
}

int cmd_detect(const DetectArgs& args) {
  if (args.packets.empty() == args.flows.empty())
    throw UserError("pass exactly one of --packets or --flows");
  if (!args.flows.empty() && args.mapping.empty())
    throw UserError("--flows requires --mapping");
  if (!args.packets.empty() && !args.mapping.empty())
    throw UserError("--mapping only applies to --flows input");

  pipeline::PipelineConfig pc;
  pc.detect_hp.learning_rate = args.lr;
  pc.detect_hp.layers = args.layers;
  pc.detect_hp.hidden_width = args.hidden;
  pc.detect_hp.weight_decay = args.weight_decay;
  pc.detect_hp.dropout = args.dropout;
  pc.detect_hp.epochs = args.epochs;
  pc.identify_hp = pc.detect_hp;
  pc.identify_hp.layers = args.identify_layers;
  if (args.split == "fixed")
    pc.detect_split.mode = pipeline::SplitSpec::Mode::kFixedSampling;
  else if (args.split == "ratio")
    pc.detect_split.mode = pipeline::SplitSpec::Mode::kRatio;
  else
    pc.detect_split.mode = pipeline::SplitSpec::Mode::kSmallTrain;
  pc.detect_split.per_class_train = args.per_class_train;
  pc.detect_split.train_fraction = args.train_fraction;
  pc.detect_split.small_train_fraction = args.small_fraction;
  pc.identify_split.train_fraction = args.train_fraction;
  pc.use_hypergraph = args.model == "hypergcn";
  pc.noflow_mode = args.noflow == "zeros" ? flowkit::NoflowMode::kZeros
                                          : flowkit::NoflowMode::kSampleBenign;
  pc.run_rf_baseline = args.baseline == "rf";
  pc.train_sizes = parse_size_list(args.train_sizes);
  pc.seed = args.seed;

  pipeline::ExperimentReport report;
  if (!args.packets.empty()) {
    const std::vector<flowkit::PacketRecord> trace =
        flowkit::read_packet_csv(args.packets);
    report = pipeline::run_two_layer(trace, pc);
  } else {
    const flowkit::ColumnMapping mapping =
        flowkit::ColumnMapping::load(args.mapping);
    flowkit::ExternalFlows ext =
        flowkit::read_external_flow_csv(args.flows, mapping);
    if (ext.skipped_rows > 0)
      report.warnings.push_back("skipped " + std::to_string(ext.skipped_rows) +
                                " unparseable flow rows");
    pipeline::ExperimentReport run =
        pipeline::run_two_layer_flows(std::move(ext.flows), pc);
    run.warnings.insert(run.warnings.begin(), report.warnings.begin(),
                        report.warnings.end());
    report = std::move(run);
  }

  ensure_dir(args.out);
  pipeline::write_report(args.out, report);

  Echo echo{{"command", "detect"}};
  if (!args.packets.empty()) echo.emplace_back("packets", args.packets);
  if (!args.flows.empty()) {
    echo.emplace_back("flows", args.flows);
    echo.emplace_back("mapping", args.mapping);
  }
  echo.emplace_back("seed", std::to_string(args.seed));
  echo.emplace_back("model", args.model);
  if (!args.baseline.empty()) echo.emplace_back("baseline", args.baseline);
  echo.emplace_back("noflow", args.noflow);
  echo.emplace_back("split", args.split);
  echo.emplace_back("per_class_train", std::to_string(args.per_class_train));
  echo.emplace_back("train_fraction", format_double(args.train_fraction));
  echo.emplace_back("small_fraction", format_double(args.small_fraction));
  echo.emplace_back("learning_rate", format_double(args.lr));
  echo.emplace_back("hidden", std::to_string(args.hidden));
  echo.emplace_back("weight_decay", format_double(args.weight_decay));
  echo.emplace_back("dropout", format_double(args.dropout));
  echo.emplace_back("epochs", std::to_string(args.epochs));
  echo.emplace_back("layers", std::to_string(args.layers));
  echo.emplace_back("identify_layers", std::to_string(args.identify_layers));
  if (!args.train_sizes.empty())
    echo.emplace_back("train_sizes", args.train_sizes);
  write_config_echo(args.out, echo);

  std::cout << "detection f1 = " << format_double(report.detection.metrics.f1)
            << " accuracy = "
            << format_double(report.detection.metrics.accuracy) << " over "
            << report.node_count << " nodes\n";
  if (report.rf_baseline)
    std::cout << "rf baseline f1 = "
              << format_double(report.rf_baseline->metrics.f1) << "\n";
  if (report.identification && !report.identification->degenerate)
    std::cout << "identification macro f1 = "
              << format_double(report.identification->metrics.f1) << "\n";
  std::cout << "suspicious nodes = " << report.suspicious.size() << "\n";
  return 0;
}

struct SimulateArgs {
  std::string topology;
  std::string trace;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string mitigation = "off";
  std::string detector_feed;
  double feed_time = 0.0;
  std::optional<double> idle_timeout;
  int rate_limit = 600;
  std::size_t capacity = 55000;
  std::string out;
};

std::vector<sdnsim::HostTuple> load_feed(const std::string& path,
                                         const sdnsim::Network& network) {
  const sdnshield::CsvTable table = sdnshield::read_csv(path);
  const int ip_col = table.column("src_ip");
  if (ip_col < 0) throw UserError(path + ": missing column src_ip");
  std::vector<sdnsim::HostTuple> feed;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    const std::string& ip = row[static_cast<std::size_t>(ip_col)];
    if (!seen.insert(ip).second) continue;
    const sdnsim::HostTuple* host = network.find_host(ip);
    if (!host)
      throw UserError(path + ": feed host " + ip + " not in the topology");
    feed.push_back(*host);
  }
  return feed;
}

int cmd_simulate(const SimulateArgs& args) {
  if (args.trace.empty() == args.scenario.empty())
    throw UserError("pass exactly one of --trace or --scenario");
  if (!args.trace.empty() && args.topology.empty())
    throw UserError("--trace requires --topology");

  sdnsim::TopologySpec spec;
  std::vector<flowkit::PacketRecord> trace;
  if (!args.scenario.empty()) {
    const trafficgen::ScenarioConfig config =
        trafficgen::ScenarioConfig::load(args.scenario);
    trafficgen::Scenario scenario = trafficgen::gen_scenario(config, args.seed);
    trace = std::move(scenario.packets);
    spec = args.topology.empty()
               ? star_topology(scenario.hosts, config.switches)
               : sdnsim::parse_topology_file(args.topology);
  } else {
    spec = sdnsim::parse_topology_file(args.topology);
    trace = flowkit::read_packet_csv(args.trace);
  }
  const sdnsim::Network network = sdnsim::build_topology(spec);

  sdnsim::SimConfig config;
  config.mitigation = args.mitigation == "on";
  config.rule_idle_timeout = args.idle_timeout;
  config.packet_in_rate_limit = args.rate_limit;
  config.switch_capacity = args.capacity;
  if (!args.detector_feed.empty()) {
    config.detector_feed = load_feed(args.detector_feed, network);
    config.feed_time = args.feed_time;
  }

  const sdnsim::SimReport report = sdnsim::run_scenario(network, trace, config);
  ensure_dir(args.out);
  sdnsim::write_sim_report(args.out, report);

  Echo echo{{"command", "simulate"}};
  if (!args.topology.empty()) echo.emplace_back("topology", args.topology);
  if (!args.trace.empty()) echo.emplace_back("trace", args.trace);
  if (!args.scenario.empty()) {
    echo.emplace_back("scenario", args.scenario);
    echo.emplace_back("seed", std::to_string(args.seed));
  }
  echo.emplace_back("mitigation", args.mitigation);
  if (!args.detector_feed.empty()) {
    echo.emplace_back("detector_feed", args.detector_feed);
    echo.emplace_back("feed_time", format_double(args.feed_time));
  }
  if (args.idle_timeout)
    echo.emplace_back("idle_timeout", format_double(*args.idle_timeout));
  echo.emplace_back("rate_limit", std::to_string(args.rate_limit));
  echo.emplace_back("capacity", std::to_string(args.capacity));
  write_config_echo(args.out, echo);

  std::cout << "packets = " << report.total_packets
            << " forwarded = " << report.total_forwarded
            << " dropped = " << report.total_dropped
            << " packet_ins = " << report.total_packet_ins << "\n";
  std::cout << "overload = " << (report.overload_flag ? "true" : "false")
            << " blocked_sources = " << report.controller.block_list.size()
            << "\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
};

std::string run_id(const std::string& dir) {
  fs::path p(dir);
  if (p.filename().empty()) p = p.parent_path();
  const std::string name = p.filename().string();
  return name.empty() ? dir : name;
}

int cmd_report(const ReportArgs& args) {
  struct MetricRow {
    std::string stage;
    std::string algorithm;
    std::string metric;
    std::string value;
  };
  struct Run {
    std::string id;
    std::vector<MetricRow> rows;
  };

  std::vector<Run> runs;
  std::vector<std::string> skipped;
  for (const std::string& dir : args.runs) {
    const std::string path = dir + "/metrics.csv";
    if (!fs::exists(path)) {
      skipped.push_back(dir + ": no metrics.csv");
      continue;
    }
    const sdnshield::CsvTable table = sdnshield::read_csv(path);
    const int stage = table.column("stage");
    const int algorithm = table.column("algorithm");
    const int metric = table.column("metric");
    const int value = table.column("value");
    if (stage < 0 || algorithm < 0 || metric < 0 || value < 0) {
      skipped.push_back(dir + ": metrics.csv missing expected columns");
      continue;
    }
    Run run;
    run.id = run_id(dir);
    for (const auto& row : table.rows)
      run.rows.push_back({row[static_cast<std::size_t>(stage)],
                          row[static_cast<std::size_t>(algorithm)],
                          row[static_cast<std::size_t>(metric)],
                          row[static_cast<std::size_t>(value)]});
    runs.push_back(std::move(run));
  }

  for (const std::string& s : skipped) std::cout << "skipped " << s << "\n";
  if (runs.empty()) throw UserError("no usable metrics.csv among the run dirs");

  ensure_dir(args.out);

  {
    const std::string path = args.out + "/per_algorithm.csv";
    std::ofstream out(path);
    if (!out) throw UserError("cannot write '" + path + "'");
    out << "run,stage,algorithm,accuracy,f1\n";
    for (const Run& run : runs) {
      std::vector<std::pair<std::string, std::string>> order;
      std::map<std::pair<std::string, std::string>,
               std::pair<std::string, std::string>>
          cells;
      for (const MetricRow& row : run.rows) {
        if (row.stage != "detect" && row.stage != "identify") continue;
        if (row.metric != "accuracy" && row.metric != "f1") continue;
        const auto key = std::make_pair(row.stage, row.algorithm);
        if (!cells.contains(key)) order.push_back(key);
        if (row.metric == "accuracy") cells[key].first = row.value;
        else cells[key].second = row.value;
      }
      for (const auto& key : order)
        out << run.id << ',' << key.first << ',' << key.second << ','
            << cells[key].first << ',' << cells[key].second << "\n";
    }
    if (!out) throw UserError("write failed for '" + path + "'");
  }

  {
    const std::string path = args.out + "/per_variant.csv";
    std::ofstream out(path);
    if (!out) throw UserError("cannot write '" + path + "'");
    out << "run,variant,f1\n";
    for (const Run& run : runs)
      for (const MetricRow& row : run.rows)
        if (row.stage == "identify" && row.metric.starts_with("f1_"))
          out << run.id << ',' << row.metric.substr(3) << ',' << row.value
              << "\n";
    if (!out) throw UserError("write failed for '" + path + "'");
  }

  {
    const std::string path = args.out + "/per_training_size.csv";
    std::ofstream out(path);
    if (!out) throw UserError("cannot write '" + path + "'");
    out << "run,size,f1,accuracy\n";
    for (const Run& run : runs) {
      std::map<long long, std::pair<std::string, std::string>> by_size;
      for (const MetricRow& row : run.rows) {
        if (!row.stage.starts_with("detect_size_")) continue;
        const long long size = sdnshield::parse_int(
            row.stage.substr(std::string("detect_size_").size()),
            "metrics.csv stage");
        if (row.metric == "f1") by_size[size].first = row.value;
        else if (row.metric == "accuracy") by_size[size].second = row.value;
      }
      for (const auto& [size, cells] : by_size)
        out << run.id << ',' << size << ',' << cells.first << ','
            << cells.second << "\n";
    }
    if (!out) throw UserError("write failed for '" + path + "'");
  }

  Echo echo{{"command", "report"}};
  for (const std::string& dir : args.runs) echo.emplace_back("run", dir);
  write_config_echo(args.out, echo);

  std::cout << "merged " << runs.size() << " runs into " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDN packet-injection defense toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("generate", "Generate a labeled traffic scenario");
  gen_cmd->add_option("--scenario", gen.scenario, "Scenario config file")
      ->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Random seed");

  DetectArgs det;
  CLI::App* det_cmd = app.add_subcommand(
      "detect", "Run two-layer detection and identification over traffic");
  det_cmd->add_option("--packets", det.packets, "Packet trace CSV");
  det_cmd->add_option("--flows", det.flows, "External flow CSV");
  det_cmd->add_option("--mapping", det.mapping,
                      "Column mapping config for --flows");
  det_cmd->add_option("--out", det.out, "Output directory")->required();
  det_cmd->add_option("--seed", det.seed, "Random seed");
  det_cmd->add_option("--model", det.model, "Graph model")
      ->check(CLI::IsMember({"gcn", "hypergcn"}));
  det_cmd->add_option("--baseline", det.baseline, "Comparison baseline")
      ->check(CLI::IsMember({"rf"}));
  det_cmd->add_option("--noflow", det.noflow, "No-flow node features")
      ->check(CLI::IsMember({"sample", "zeros"}));
  det_cmd->add_option("--split", det.split, "Train/test split mode")
      ->check(CLI::IsMember({"fixed", "ratio", "small"}));
  det_cmd->add_option("--per-class-train", det.per_class_train,
                      "Train rows per class for --split fixed");
  det_cmd->add_option("--train-fraction", det.train_fraction,
                      "Train fraction for --split ratio");
  det_cmd->add_option("--small-fraction", det.small_fraction,
                      "Train fraction for --split small");
  det_cmd->add_option("--lr", det.lr, "Learning rate");
  det_cmd->add_option("--hidden", det.hidden, "Hidden layer width");
  det_cmd->add_option("--weight-decay", det.weight_decay, "L2 penalty");
  det_cmd->add_option("--dropout", det.dropout, "Dropout probability");
  det_cmd->add_option("--epochs", det.epochs, "Training epochs");
  det_cmd->add_option("--layers", det.layers, "Detection model depth");
  det_cmd->add_option("--identify-layers", det.identify_layers,
                      "Identification model depth");
  det_cmd->add_option("--train-sizes", det.train_sizes,
                      "Comma list of per-class train counts to sweep");

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Replay a trace through the switch/controller model");
  sim_cmd->add_option("--topology", sim.topology, "Topology file");
  sim_cmd->add_option("--trace", sim.trace, "Packet trace CSV");
  sim_cmd->add_option("--scenario", sim.scenario,
                      "Generate the trace inline from a scenario config");
  sim_cmd->add_option("--seed", sim.seed, "Random seed for --scenario");
  sim_cmd->add_option("--mitigation", sim.mitigation, "Mitigation switch")
      ->check(CLI::IsMember({"on", "off"}));
  sim_cmd->add_option("--detector-feed", sim.detector_feed,
                      "suspicious.csv from a detect run");
  sim_cmd->add_option("--feed-time", sim.feed_time,
                      "Sim time at which the feed reaches the controller");
  sim_cmd->add_option("--idle-timeout", sim.idle_timeout,
                      "Flow-rule idle timeout in seconds");
  sim_cmd->add_option("--rate-limit", sim.rate_limit,
                      "Controller Packet-In budget per second");
  sim_cmd->add_option("--capacity", sim.capacity, "Switch rule capacity");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();

  ReportArgs rep;
  CLI::App* rep_cmd =
      app.add_subcommand("report", "Merge detect runs into comparison tables");
  rep_cmd->add_option("runs", rep.runs, "Run directories")->expected(-1);
  rep_cmd->add_option("--out", rep.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return cmd_generate(gen);
    if (det_cmd->parsed()) return cmd_detect(det);
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (rep_cmd->parsed()) {
      if (rep.runs.empty()) throw UserError("report needs at least one run dir");
      return cmd_report(rep);
    }
    throw UserError("no command given");
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
