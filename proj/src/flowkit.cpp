#include "sdnshield/flowkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sdnshield/errors.hpp"
#include "sdnshield/rng.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::flowkit {

namespace {

constexpr double kMinDuration = 1e-6;  // rate denominator floor, seconds

Label majority_label(const std::array<std::size_t, kLabelCount>& counts) {
  int best = 0;
  for (int i = 1; i < kLabelCount; ++i)
    if (counts[i] > counts[best]) best = i;
  // On ties the scan above keeps the lowest index, which is the intended
  // preference order.
  return static_cast<Label>(best);
}

}  // namespace

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kTcp: return "tcp";
    case Protocol::kUdp: return "udp";
    case Protocol::kIcmp: return "icmp";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  const std::string t = to_lower(trim(s));
  if (t == "tcp" || t == "6") return Protocol::kTcp;
  if (t == "udp" || t == "17") return Protocol::kUdp;
  if (t == "icmp" || t == "1") return Protocol::kIcmp;
  throw UserError("unknown protocol '" + std::string(s) + "'");
}

const char* label_name(Label l) {
  switch (l) {
    case Label::kBenign: return "benign";
    case Label::kNoflowBenign: return "noflow_benign";
    case Label::kDDoS: return "ddos";
    case Label::kPortScan: return "portscan";
    case Label::kSlowDDoS: return "slow_ddos";
    case Label::kFastDDoS: return "fast_ddos";
    case Label::kSlowDcDDoS: return "slow_dc_ddos";
    case Label::kFastDcDDoS: return "fast_dc_ddos";
  }
  return "?";
}

std::optional<Label> try_parse_label(std::string_view s) {
  std::string t = to_lower(trim(s));
  std::erase_if(t, [](char c) { return c == ' ' || c == '-' || c == '_'; });
  if (t == "benign") return Label::kBenign;
  if (t == "noflowbenign" || t == "noflow") return Label::kNoflowBenign;
  if (t == "ddos") return Label::kDDoS;
  if (t == "portscan") return Label::kPortScan;
  if (t == "slowddos") return Label::kSlowDDoS;
  if (t == "fastddos") return Label::kFastDDoS;
  if (t == "slowdcddos") return Label::kSlowDcDDoS;
  if (t == "fastdcddos") return Label::kFastDcDDoS;
  return std::nullopt;
}

Label parse_label(std::string_view s) {
  if (auto l = try_parse_label(s)) return *l;
  throw UserError("unknown label '" + std::string(s) + "'");
}

bool is_attack(Label l) {
  return l != Label::kBenign && l != Label::kNoflowBenign;
}

bool Endpoint::operator<(const Endpoint& other) const {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  const bool pa = ipv4_to_u32(ip, a);
  const bool pb = ipv4_to_u32(other.ip, b);
  if (pa && pb) {
    if (a != b) return a < b;
  } else if (pa != pb) {
    return pa;  // numeric addresses sort before anything unparsable
  } else if (ip != other.ip) {
    return ip < other.ip;
  }
  return port < other.port;
}

std::string Endpoint::str() const { return ip + ":" + std::to_string(port); }

bool FlowKey::operator<(const FlowKey& other) const {
  if (src < other.src) return true;
  if (other.src < src) return false;
  return dst < other.dst;
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "flow_duration",     "packets_per_second", "bytes_per_second",
      "mean_packet_size",  "mean_inter_arrival", "std_inter_arrival",
      "total_packets",     "distinct_dst_ports",
  };
  return names;
}

std::vector<BasicFlow> group_basic_flows(std::span<const PacketRecord> packets) {
  struct Accum {
    std::vector<double> times;
    double bytes = 0.0;
    std::array<std::size_t, kLabelCount> label_counts{};
  };
  std::map<FlowKey, Accum> groups;
  for (const PacketRecord& p : packets) {
    FlowKey key{{p.src_ip, p.src_port}, {p.dst_ip, p.dst_port}};
    Accum& acc = groups[std::move(key)];
    acc.times.push_back(p.timestamp);
    acc.bytes += static_cast<double>(p.payload_bytes);
    acc.label_counts[static_cast<int>(p.label)]++;
  }

  std::vector<BasicFlow> out;
  out.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    std::sort(acc.times.begin(), acc.times.end());
    const std::size_t n = acc.times.size();
    const double duration = acc.times.back() - acc.times.front();
    const double denom = std::max(duration, kMinDuration);

    double iat_mean = 0.0;
    double iat_std = 0.0;
    if (n >= 2) {
      double sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) sum += acc.times[i] - acc.times[i - 1];
      iat_mean = sum / static_cast<double>(n - 1);
      double sq = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double d = acc.times[i] - acc.times[i - 1] - iat_mean;
        sq += d * d;
      }
      iat_std = std::sqrt(sq / static_cast<double>(n - 1));
    }

    BasicFlow flow;
    flow.key = key;
    flow.packet_count = n;
    flow.label = majority_label(acc.label_counts);
    flow.features[kFlowDuration] = duration;
    flow.features[kPacketsPerSecond] = static_cast<double>(n) / denom;
    flow.features[kBytesPerSecond] = acc.bytes / denom;
    flow.features[kMeanPacketSize] = acc.bytes / static_cast<double>(n);
    flow.features[kMeanInterArrival] = iat_mean;
    flow.features[kStdInterArrival] = iat_std;
    flow.features[kTotalPackets] = static_cast<double>(n);
    flow.features[kDistinctDstPorts] = 1.0;
    out.push_back(std::move(flow));
  }
  return out;
}

std::vector<ActivityFlow> group_activity_flows(std::span<const BasicFlow> flows) {
  struct Accum {
    FeatureVector sum{};
    double total_packets = 0.0;
    std::set<Endpoint> destinations;
    std::size_t count = 0;
    std::array<std::size_t, kLabelCount> label_counts{};
  };
  std::map<Endpoint, Accum> groups;
  for (const BasicFlow& f : flows) {
    Accum& acc = groups[f.key.src];
    for (int i = 0; i < kFeatureCount; ++i) acc.sum[i] += f.features[i];
    acc.total_packets += f.features[kTotalPackets];
    acc.destinations.insert(f.key.dst);
    acc.count++;
    acc.label_counts[static_cast<int>(f.label)]++;
  }

  std::vector<ActivityFlow> out;
  out.reserve(groups.size());
  for (auto& [src, acc] : groups) {
    ActivityFlow node;
    node.source = src;
    node.basic_flow_count = acc.count;
    node.label = majority_label(acc.label_counts);
    const double n = static_cast<double>(acc.count);
    for (int i = 0; i < kFeatureCount; ++i) node.features[i] = acc.sum[i] / n;
    node.features[kTotalPackets] = acc.total_packets;
    node.features[kDistinctDstPorts] = static_cast<double>(acc.destinations.size());
    out.push_back(std::move(node));
  }
  return out;
}

std::vector<BasicFlow> dedupe_mixed_attackers(std::vector<BasicFlow> flows) {
  std::map<Endpoint, std::pair<bool, bool>> seen;  // source -> (ddos, portscan)
  for (const BasicFlow& f : flows) {
    auto& [ddos, scan] = seen[f.key.src];
    ddos = ddos || f.label == Label::kDDoS;
    scan = scan || f.label == Label::kPortScan;
  }
  std::erase_if(flows, [&](const BasicFlow& f) {
    const auto& [ddos, scan] = seen[f.key.src];
    return ddos && scan && f.label == Label::kDDoS;
  });
  return flows;
}

NoflowResult synthesize_noflow_nodes(const std::vector<Endpoint>& endpoints,
                                     std::span<const ActivityFlow> flows,
                                     NoflowMode mode, std::uint64_t seed,
                                     std::size_t low_profile_threshold) {
  std::set<Endpoint> sources;
  for (const ActivityFlow& f : flows) sources.insert(f.source);

  std::vector<Endpoint> missing;
  for (const Endpoint& e : endpoints)
    if (!sources.count(e)) missing.push_back(e);
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());

  std::vector<const ActivityFlow*> pool;
  if (mode == NoflowMode::kSampleBenign) {
    for (const ActivityFlow& f : flows)
      if (!is_attack(f.label) && f.basic_flow_count <= low_profile_threshold)
        pool.push_back(&f);
  }

  NoflowResult result;
  if (mode == NoflowMode::kSampleBenign && pool.empty() && !missing.empty()) {
    result.fell_back_to_zeros = true;
  }

  Rng rng(derive_seed(seed, "noflow"));
  for (const Endpoint& e : missing) {
    ActivityFlow node;
    node.source = e;
    node.basic_flow_count = 0;
    node.label = Label::kNoflowBenign;
    node.features.fill(0.0);
    if (mode == NoflowMode::kSampleBenign && !pool.empty()) {
      for (int i = 0; i < kFeatureCount; ++i) {
        const ActivityFlow* donor = pool[rng.below(pool.size())];
        node.features[i] = donor->features[i];
      }
    }
    result.nodes.push_back(std::move(node));
  }
  return result;
}

std::vector<Endpoint> collect_endpoints(std::span<const BasicFlow> flows) {
  std::set<Endpoint> set;
  for (const BasicFlow& f : flows) {
    set.insert(f.key.src);
    set.insert(f.key.dst);
  }
  return {set.begin(), set.end()};
}

}  // namespace sdnshield::flowkit
