#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdnshield/flowkit.hpp"

namespace sdnshield::trafficgen {

enum class Variant {
  kSlowDDoS,
  kFastDDoS,
  kSlowDcDDoS,
  kFastDcDDoS,
  kPortScan,
  kHybrid,
};

const char* variant_name(Variant v);
Variant parse_variant(std::string_view s);
flowkit::Label variant_label(Variant v);

enum class Pacing { kPoisson, kFixed };

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// One attacker's emission schedule. Flood variants emit bursts back to
// back, each burst at a rate drawn from rate_range; discontinuous variants
// insert sleeps from sleep_range after every burst. The source port
// rotates per attack session so each session becomes its own activity
// node; a discontinuous session spans cycles_range bursts, keeping the
// sleep gaps inside one node's packet span.
struct VariantSpec {
  Variant variant = Variant::kSlowDDoS;
  Range rate_range{5.0, 100.0};
  std::optional<Range> sleep_range;
  Range burst_range{2.0, 5.0};
  Range payload_range{32.0, 64.0};
  double start = 0.0;
  double duration = 60.0;
  std::string src_ip;
  std::string src_mac;
  std::uint16_t src_port_base = 40000;
  std::string target_ip;
  std::string target_mac;
  std::uint16_t target_port = 80;
  bool spoof_dst_mac = true;
  Pacing pacing = Pacing::kPoisson;
  int cycles_min = 2;  // discontinuous: bursts per session
  int cycles_max = 3;
  std::uint16_t scan_port_lo = 1;  // PortScan sweep
  std::uint16_t scan_port_hi = 100;
  double scan_rate = 100.0;
  std::optional<Variant> hybrid_first;  // kHybrid: halves of the duration
  std::optional<Variant> hybrid_second;
  std::uint64_t seed = 0;

  static VariantSpec defaults(Variant v);
};

std::vector<flowkit::PacketRecord> gen_attack(const VariantSpec& spec);

struct BenignConfig {
  std::vector<std::pair<std::string, std::string>> hosts;  // (ip, mac)
  double start = 0.0;
  double duration = 60.0;
  double flow_rate = 0.2;  // flow arrivals per host per second
  Range flow_packets{5.0, 50.0};
  Range packet_rate{1.0, 20.0};
  Range payload_range{100.0, 1200.0};
  std::uint64_t seed = 0;
};

// Request/response-like background traffic: per host a Poisson stream of
// flows, each to a uniformly drawn peer's service port from an ephemeral
// source port, truncated at the duration end.
std::vector<flowkit::PacketRecord> gen_benign(const BenignConfig& config);
std::vector<flowkit::PacketRecord> gen_benign(int n_hosts, double duration,
                                              std::uint64_t seed);

struct HostInfo {
  enum class Role { kBenign, kAttacker, kVictim };
  std::string ip;
  std::string mac;
  Role role = Role::kBenign;
  flowkit::Label label = flowkit::Label::kBenign;
};

struct AttackGroup {
  Variant variant = Variant::kSlowDDoS;
  int hosts = 1;
  int target = 0;  // victim index
  std::optional<Range> rate_range;
  std::optional<Range> sleep_range;
  std::optional<Range> burst_range;
  std::optional<double> start;
  std::optional<double> active;
  bool spoof_dst_mac = true;
  std::vector<std::string> explicit_ips;  // overrides auto-assignment
  std::uint16_t scan_port_lo = 1;
  std::uint16_t scan_port_hi = 100;
  double scan_rate = 100.0;
  std::optional<Variant> hybrid_first;
  std::optional<Variant> hybrid_second;
};

struct ScenarioConfig {
  double duration = 60.0;
  int benign_hosts = 10;
  int victims = 1;
  double benign_flow_rate = 0.2;
  int switches = 6;
  std::vector<AttackGroup> attacks;

  // Declarative text file: top-level `key = value` lines, then one
  // [attack] section per group. Unknown keys are errors.
  static ScenarioConfig load(const std::string& path);
};

struct Scenario {
  std::vector<flowkit::PacketRecord> packets;  // time-sorted, MACs set
  std::vector<HostInfo> hosts;                 // benign, attackers, victims
  std::map<std::string, flowkit::Label> truth;  // source ip -> label
};

// Assigns addresses by role (10.0.1.x benign, 10.0.2.x attackers, 10.0.3.x
// victims), runs each generator on its own substream, merges by timestamp
// (stable, so equal stamps keep generator order). A host landing in two
// roles through explicit_ips is a hard error.
Scenario gen_scenario(const ScenarioConfig& config, std::uint64_t seed);

void write_truth_csv(const std::string& path,
                     const std::map<std::string, flowkit::Label>& truth);

}  // namespace sdnshield::trafficgen
