#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdnshield/flowkit.hpp"

namespace sdnshield::sdnsim {

// Host identity as the controller tracks it. Partial matching counts equal
// fields, so a crafted packet that fakes one field still gives itself away
// on the others.
struct HostTuple {
  std::string ip;
  std::string mac;
  std::string attach;  // "switch:port"

  bool operator==(const HostTuple&) const = default;
};

int match_count(const HostTuple& a, const HostTuple& b);

struct TopologySpec {
  std::vector<std::string> switches;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<HostTuple> hosts;
  std::string gateway;
};

// Text format: sections [switches], [links], [hosts], [gateway]; hosts rows
// are `ip mac switch:port`, links rows `switch switch`. '#' comments.
TopologySpec parse_topology_file(const std::string& path);
void write_topology_file(const std::string& path, const TopologySpec& spec);

struct Network {
  TopologySpec spec;
  std::map<std::string, int> switch_index;
  std::map<std::string, int> host_by_ip;
  std::vector<int> host_switch;            // per host: attach switch index
  std::vector<std::vector<int>> next_hop;  // [from][to] switch index
  int gateway = 0;

  const HostTuple* find_host(const std::string& ip) const;
};

// Validates the topology (known switch references, unique host IPs and attach
// points, connectivity, gateway present) and precomputes shortest-path
// next hops with breadth-first search in declaration order.
Network build_topology(const TopologySpec& spec);

struct Rule {
  enum class Kind { kAllow, kBlock };
  Kind kind = Kind::kAllow;
  HostTuple src;
  HostTuple dst;  // kAllow only; kBlock matches on src alone
  double install_time = 0.0;
  double last_hit = 0.0;
};

struct SwitchState {
  std::string id;
  std::size_t capacity = 55000;
  std::vector<Rule> rules;
  std::uint64_t packet_in_count = 0;
  std::uint64_t drop_count = 0;

  // Hash indexes over the rule vector; rebuilt after expiry sweeps.
  std::unordered_map<std::string, std::size_t> allow_index;
  std::unordered_map<std::string, std::size_t> block_index;
};

struct PacketInMessage {
  HostTuple src;
  HostTuple dest;
  std::string switch_id;
  double time = 0.0;
};

struct ControllerState {
  std::vector<HostTuple> network_list;
  std::vector<HostTuple> observing_list;
  std::vector<HostTuple> block_list;
  int packet_in_rate_limit = 600;
  bool overload_flag = false;
  // Scan counters backing the complexity checks: entries examined in the
  // observing list and match_count evaluations over the network list.
  std::uint64_t observing_comparisons = 0;
  std::uint64_t network_comparisons = 0;
};

enum class ActionKind {
  kInstallPktBlocking,
  kAppendBlockList,
  kAppendObservingList,
  kDropPending,
  kInstallAllow,
  kForwardPending,
};

struct Action {
  ActionKind kind = ActionKind::kDropPending;
  HostTuple src;
  HostTuple dest;

  bool operator==(const Action&) const = default;
};

// Mitigation decision for one Packet-In. Mutates only the comparison
// counters; list updates happen in apply_mitigation_actions so that
// alternative implementations can be compared on identical states.
// Decision order: a source fully matching an observing entry is blocked and
// black-listed; otherwise a destination whose best network-list match is not
// all 3 fields marks the source suspicious and drops the pending packet;
// otherwise the flow is allowed and the pending packet released.
std::vector<Action> controller_mitigate(const PacketInMessage& msg,
                                        ControllerState& state);

// Applies the list-updating actions (duplicate appends are no-ops). Rule
// installation is the simulator's job.
void apply_mitigation_actions(ControllerState& state,
                              std::span<const Action> actions);

struct SimConfig {
  bool mitigation = false;
  std::optional<double> rule_idle_timeout;
  int packet_in_rate_limit = 600;
  std::size_t switch_capacity = 55000;
  std::optional<double> feed_time;
  std::vector<HostTuple> detector_feed;
};

struct SecondRow {
  double t = 0.0;
  std::uint64_t packet_in_rate = 0;  // messages arriving at the controller
  std::uint64_t rule_count = 0;      // all switches, end of window
  std::uint64_t drops = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t observing_len = 0;
  std::uint64_t block_len = 0;
  bool overload = false;
  std::uint64_t processed = 0;  // controller-load proxy
};

struct SourceStats {
  std::uint64_t packets = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t dropped = 0;
  std::uint64_t packet_ins = 0;
};

struct BlockEvent {
  double time = 0.0;
  std::string switch_id;
  HostTuple src;
};

struct PacketInEvent {
  double time = 0.0;
  std::string switch_id;
  std::string src_ip;
};

struct SimReport {
  std::vector<SecondRow> rows;
  std::map<std::string, SourceStats> by_source;  // keyed by source IP
  std::vector<BlockEvent> block_events;
  std::vector<PacketInEvent> packet_in_events;
  std::map<std::string, std::uint64_t> switch_rule_counts;  // final
  std::uint64_t total_packets = 0;
  std::uint64_t total_forwarded = 0;
  std::uint64_t total_dropped = 0;
  std::uint64_t total_packet_ins = 0;
  std::uint64_t processed_messages = 0;
  std::uint64_t overload_dropped = 0;
  std::uint64_t rule_overflow_events = 0;
  bool overload_flag = false;
  ControllerState controller;  // final snapshot
};

// Deterministic event loop over a time-sorted trace (ties keep input
// order). Every packet enters at its source host's attach switch (gateway
// for unknown sources) and is forwarded, dropped by a blocking rule, or
// held pending a Packet-In verdict. The controller processes at most
// packet_in_rate_limit messages per 1-second window; excess messages set
// the overload flag and their packets are dropped when the window closes.
// With mitigation off every processed message installs an Allow rule; with
// it on the verdict comes from controller_mitigate. detector_feed tuples
// merge into the observing list once sim time reaches feed_time.
SimReport run_scenario(const Network& network,
                       std::span<const flowkit::PacketRecord> trace,
                       const SimConfig& config);

// Copies the packets with t0 <= timestamp < t1; the detection pipeline's
// tap. Pure.
std::vector<flowkit::PacketRecord> mirror_flows(
    std::span<const flowkit::PacketRecord> trace, double t0, double t1);

// timeseries.csv plus summary.txt in the directory.
void write_sim_report(const std::string& dir, const SimReport& report);

}  // namespace sdnshield::sdnsim
