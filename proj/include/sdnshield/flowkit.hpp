#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sdnshield::flowkit {

enum class Protocol : std::uint8_t { kTcp, kUdp, kIcmp };

const char* protocol_name(Protocol p);
Protocol parse_protocol(std::string_view s);

// Traffic classes. The numeric order matters: ties in majority votes and in
// classifier argmax resolve toward the lower value, so attack classes keep a
// stable priority order.
enum class Label : std::uint8_t {
  kBenign = 0,
  kNoflowBenign = 1,
  kDDoS = 2,
  kPortScan = 3,
  kSlowDDoS = 4,
  kFastDDoS = 5,
  kSlowDcDDoS = 6,
  kFastDcDDoS = 7,
};

inline constexpr int kLabelCount = 8;

const char* label_name(Label l);
Label parse_label(std::string_view s);
std::optional<Label> try_parse_label(std::string_view s);
bool is_attack(Label l);

struct PacketRecord {
  double timestamp = 0.0;  // seconds
  std::string src_ip;
  std::uint16_t src_port = 0;
  std::string dst_ip;
  std::uint16_t dst_port = 0;
  Protocol protocol = Protocol::kUdp;
  std::uint64_t payload_bytes = 0;
  Label label = Label::kBenign;
  // Only present in switch-level traces; empty in plain packet captures.
  std::string src_mac;
  std::string dst_mac;
};

// Transport endpoint. Ordering is numeric on the address when it parses as
// IPv4 (so "10.0.0.9" < "10.0.0.10"), lexicographic otherwise, then by port.
struct Endpoint {
  std::string ip;
  std::uint16_t port = 0;

  bool operator==(const Endpoint&) const = default;
  bool operator<(const Endpoint& other) const;
  std::string str() const;
};

struct FlowKey {
  Endpoint src;
  Endpoint dst;

  bool operator==(const FlowKey&) const = default;
  bool operator<(const FlowKey& other) const;
};

inline constexpr int kFeatureCount = 8;

enum Feature : int {
  kFlowDuration = 0,
  kPacketsPerSecond = 1,
  kBytesPerSecond = 2,
  kMeanPacketSize = 3,
  kMeanInterArrival = 4,
  kStdInterArrival = 5,
  kTotalPackets = 6,
  kDistinctDstPorts = 7,
};

using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string, kFeatureCount>& feature_names();

// One directed src-endpoint -> dst-endpoint conversation.
struct BasicFlow {
  FlowKey key;
  FeatureVector features{};
  std::size_t packet_count = 0;
  Label label = Label::kBenign;
};

// All traffic originated by one source endpoint; one graph node.
struct ActivityFlow {
  Endpoint source;
  FeatureVector features{};
  std::size_t basic_flow_count = 0;
  Label label = Label::kBenign;
};

// Groups packets into basic flows keyed by (src endpoint, dst endpoint).
// Per-flow statistics: duration is last minus first timestamp; rates divide
// by the duration floored at 1 microsecond; inter-arrival statistics are the
// mean and population standard deviation of consecutive timestamp deltas and
// are zero for single-packet flows. distinct_dst_ports is 1 at this level.
// The flow label is the majority packet label, ties resolved toward the
// lowest Label value. Output is sorted by flow key.
std::vector<BasicFlow> group_basic_flows(std::span<const PacketRecord> packets);

// Groups basic flows into activity flows keyed by source endpoint. Features
// are unweighted means over the member flows, except total_packets (sum) and
// distinct_dst_ports (count of distinct destination endpoints). Labels
// aggregate by the same majority rule. Output is sorted by source endpoint.
std::vector<ActivityFlow> group_activity_flows(std::span<const BasicFlow> flows);

// A source that emits both DDoS and PortScan flows keeps only the PortScan
// ones, so every attacker maps to a single attack class. Other label mixes
// pass through untouched.
std::vector<BasicFlow> dedupe_mixed_attackers(std::vector<BasicFlow> flows);

enum class NoflowMode { kSampleBenign, kZeros };

struct NoflowResult {
  std::vector<ActivityFlow> nodes;
  // True when kSampleBenign found no low-profile benign donor and zero
  // features were used instead.
  bool fell_back_to_zeros = false;
};

// Synthesizes nodes for endpoints that appear in traffic only as
// destinations (servers, scan targets) and therefore have no activity flow
// of their own. kZeros gives them all-zero features; kSampleBenign draws
// each feature independently from the empirical distribution of that
// feature over benign activity flows with at most `low_profile_threshold`
// basic flows. Synthesized nodes carry kNoflowBenign. Output is sorted by
// endpoint and contains only the synthesized nodes.
NoflowResult synthesize_noflow_nodes(const std::vector<Endpoint>& endpoints,
                                     std::span<const ActivityFlow> flows,
                                     NoflowMode mode, std::uint64_t seed,
                                     std::size_t low_profile_threshold = 2);

// Every endpoint seen in the flows, as source or destination, sorted and
// deduplicated.
std::vector<Endpoint> collect_endpoints(std::span<const BasicFlow> flows);

}  // namespace sdnshield::flowkit
