#include "sdnshield/trafficgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "sdnshield/errors.hpp"
#include "sdnshield/rng.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::trafficgen {

namespace {

constexpr std::uint16_t kPortRotation = 20000;  // sessions before reuse

void check_range(const Range& r, double min_lo, const char* what) {
  if (r.lo > r.hi)
    throw UserError(std::string(what) + ": empty range [" +
                    format_double(r.lo) + ", " + format_double(r.hi) + "]");
  if (r.lo < min_lo)
    throw UserError(std::string(what) + ": lower bound below " +
                    format_double(min_lo));
}

std::string random_mac(Rng& rng) {
  // Locally administered prefix distinct from any assigned host MAC.
  char buf[18];
  std::snprintf(buf, sizeof(buf), "0a:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>(rng.below(256)),
                static_cast<unsigned>(rng.below(256)),
                static_cast<unsigned>(rng.below(256)),
                static_cast<unsigned>(rng.below(256)),
                static_cast<unsigned>(rng.below(256)));
  return buf;
}

double next_gap(Rng& rng, double rate, Pacing pacing) {
  return pacing == Pacing::kPoisson ? rng.exponential(rate) : 1.0 / rate;
}

struct Emitter {
  const VariantSpec& spec;
  Rng& rng;
  std::vector<flowkit::PacketRecord>& out;

  void packet(double t, std::uint16_t src_port, std::uint16_t dst_port,
              flowkit::Label label) {
    flowkit::PacketRecord p;
    p.timestamp = t;
    p.src_ip = spec.src_ip;
    p.src_port = src_port;
    p.dst_ip = spec.target_ip;
    p.dst_port = dst_port;
    p.protocol = spec.variant == Variant::kPortScan ? flowkit::Protocol::kTcp
                                                    : flowkit::Protocol::kUdp;
    p.payload_bytes = static_cast<std::uint64_t>(
        rng.uniform(spec.payload_range.lo, spec.payload_range.hi));
    p.label = label;
    p.src_mac = spec.src_mac;
    p.dst_mac = spec.spoof_dst_mac ? random_mac(rng) : spec.target_mac;
    out.push_back(std::move(p));
  }

  // Emits one burst starting at t, returns the burst end time.
  double burst(double t, double end, std::uint16_t src_port,
               flowkit::Label label) {
    const double len = rng.uniform(spec.burst_range.lo, spec.burst_range.hi);
    const double rate = rng.uniform(spec.rate_range.lo, spec.rate_range.hi);
    const double stop = std::min(t + len, end);
    double tau = t + next_gap(rng, rate, spec.pacing);
    while (tau < stop) {
      packet(tau, src_port, spec.target_port, label);
      tau += next_gap(rng, rate, spec.pacing);
    }
    return stop;
  }
};

void gen_flood(const VariantSpec& spec, Rng& rng,
               std::vector<flowkit::PacketRecord>& out) {
  const bool discontinuous = spec.sleep_range.has_value();
  const flowkit::Label label = variant_label(spec.variant);
  const double end = spec.start + spec.duration;
  Emitter emit{spec, rng, out};

  double t = spec.start;
  std::uint32_t session = 0;
  while (t < end) {
    const std::uint16_t src_port = static_cast<std::uint16_t>(
        spec.src_port_base + session % kPortRotation);
    if (!discontinuous) {
      t = emit.burst(t, end, src_port, label);
    } else {
      const int cycles =
          spec.cycles_min +
          static_cast<int>(rng.below(
              static_cast<std::uint64_t>(spec.cycles_max - spec.cycles_min + 1)));
      for (int c = 0; c < cycles && t < end; ++c) {
        t = emit.burst(t, end, src_port, label);
        if (t >= end) break;
        t += rng.uniform(spec.sleep_range->lo, spec.sleep_range->hi);
      }
    }
    session++;
  }
}

void gen_scan(const VariantSpec& spec, Rng& rng,
              std::vector<flowkit::PacketRecord>& out) {
  if (spec.scan_port_lo > spec.scan_port_hi)
    throw UserError("portscan: empty port range");
  if (spec.scan_rate <= 0.0) throw UserError("portscan: rate must be positive");
  Emitter emit{spec, rng, out};
  const double end = spec.start + spec.duration;
  double t = spec.start;
  for (std::uint32_t port = spec.scan_port_lo; port <= spec.scan_port_hi;
       ++port) {
    if (t >= end) break;
    emit.packet(t, spec.src_port_base, static_cast<std::uint16_t>(port),
                flowkit::Label::kPortScan);
    t += next_gap(rng, spec.scan_rate, spec.pacing);
  }
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kSlowDDoS: return "slow_ddos";
    case Variant::kFastDDoS: return "fast_ddos";
    case Variant::kSlowDcDDoS: return "slow_dc_ddos";
    case Variant::kFastDcDDoS: return "fast_dc_ddos";
    case Variant::kPortScan: return "portscan";
    case Variant::kHybrid: return "hybrid";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  std::string t = to_lower(trim(s));
  std::erase_if(t, [](char c) { return c == ' ' || c == '-' || c == '_'; });
  if (t == "slowddos") return Variant::kSlowDDoS;
  if (t == "fastddos") return Variant::kFastDDoS;
  if (t == "slowdcddos") return Variant::kSlowDcDDoS;
  if (t == "fastdcddos") return Variant::kFastDcDDoS;
  if (t == "portscan") return Variant::kPortScan;
  if (t == "hybrid") return Variant::kHybrid;
  throw UserError("unknown attack variant '" + std::string(s) + "'");
}

flowkit::Label variant_label(Variant v) {
  switch (v) {
    case Variant::kSlowDDoS: return flowkit::Label::kSlowDDoS;
    case Variant::kFastDDoS: return flowkit::Label::kFastDDoS;
    case Variant::kSlowDcDDoS: return flowkit::Label::kSlowDcDDoS;
    case Variant::kFastDcDDoS: return flowkit::Label::kFastDcDDoS;
    case Variant::kPortScan: return flowkit::Label::kPortScan;
    case Variant::kHybrid: return flowkit::Label::kDDoS;
  }
  return flowkit::Label::kDDoS;
}

VariantSpec VariantSpec::defaults(Variant v) {
  VariantSpec spec;
  spec.variant = v;
  switch (v) {
    case Variant::kSlowDDoS:
      spec.rate_range = {5.0, 100.0};
      break;
    case Variant::kFastDDoS:
      spec.rate_range = {1000.0, 20000.0};
      break;
    case Variant::kSlowDcDDoS:
      spec.rate_range = {5.0, 50.0};
      spec.sleep_range = Range{3.0, 7.0};
      break;
    case Variant::kFastDcDDoS:
      spec.rate_range = {1000.0, 20000.0};
      spec.sleep_range = Range{3.0, 10.0};
      break;
    case Variant::kPortScan:
    case Variant::kHybrid:
      break;
  }
  return spec;
}

std::vector<flowkit::PacketRecord> gen_attack(const VariantSpec& spec) {
  if (spec.duration <= 0.0) throw UserError("gen_attack: duration must be > 0");
  if (spec.src_ip.empty() || spec.target_ip.empty())
    throw UserError("gen_attack: source and target required");

  std::vector<flowkit::PacketRecord> out;
  Rng rng(spec.seed);
  switch (spec.variant) {
    case Variant::kPortScan:
      gen_scan(spec, rng, out);
      break;
    case Variant::kHybrid: {
      if (!spec.hybrid_first || !spec.hybrid_second)
        throw UserError("hybrid: both component variants required");
      if (*spec.hybrid_first == Variant::kHybrid ||
          *spec.hybrid_second == Variant::kHybrid)
        throw UserError("hybrid: components must be concrete variants");
      VariantSpec first = VariantSpec::defaults(*spec.hybrid_first);
      VariantSpec second = VariantSpec::defaults(*spec.hybrid_second);
      for (VariantSpec* part : {&first, &second}) {
        part->start = spec.start;
        part->duration = spec.duration / 2.0;
        part->src_ip = spec.src_ip;
        part->src_mac = spec.src_mac;
        part->src_port_base = spec.src_port_base;
        part->target_ip = spec.target_ip;
        part->target_mac = spec.target_mac;
        part->target_port = spec.target_port;
        part->spoof_dst_mac = spec.spoof_dst_mac;
        part->pacing = spec.pacing;
      }
      second.start = spec.start + spec.duration / 2.0;
      second.src_port_base =
          static_cast<std::uint16_t>(spec.src_port_base + kPortRotation);
      first.seed = derive_seed(spec.seed, "hybrid:first");
      second.seed = derive_seed(spec.seed, "hybrid:second");
      out = gen_attack(first);
      std::vector<flowkit::PacketRecord> tail = gen_attack(second);
      out.insert(out.end(), std::make_move_iterator(tail.begin()),
                 std::make_move_iterator(tail.end()));
      break;
    }
    default: {
      check_range(spec.rate_range, 1e-9, "rate_range");
      check_range(spec.burst_range, 1e-9, "burst_range");
      if (spec.sleep_range) check_range(*spec.sleep_range, 0.0, "sleep_range");
      if (spec.cycles_min < 1 || spec.cycles_max < spec.cycles_min)
        throw UserError("gen_attack: bad cycle range");
      gen_flood(spec, rng, out);
      break;
    }
  }
  return out;
}

std::vector<flowkit::PacketRecord> gen_benign(const BenignConfig& config) {
  if (config.hosts.size() < 2)
    throw UserError("gen_benign: need at least 2 hosts");
  check_range(config.flow_packets, 1.0, "flow_packets");
  check_range(config.packet_rate, 1e-9, "packet_rate");
  if (config.flow_rate <= 0.0)
    throw UserError("gen_benign: flow_rate must be positive");

  static const std::uint16_t kServicePorts[] = {80, 443, 22, 53, 8080};
  const double end = config.start + config.duration;

  std::vector<flowkit::PacketRecord> out;
  Rng base(config.seed);
  for (std::size_t h = 0; h < config.hosts.size(); ++h) {
    const auto& [ip, mac] = config.hosts[h];
    Rng rng = base.substream("benign:" + ip);
    std::uint32_t flow_counter = 0;
    double t = config.start + rng.exponential(config.flow_rate);
    while (t < end) {
      std::size_t peer = rng.below(config.hosts.size() - 1);
      if (peer >= h) peer++;
      const auto& [peer_ip, peer_mac] = config.hosts[peer];
      const std::uint16_t src_port =
          static_cast<std::uint16_t>(20000 + flow_counter % kPortRotation);
      const std::uint16_t dst_port = kServicePorts[rng.below(5)];
      const int packets = static_cast<int>(
          rng.uniform(config.flow_packets.lo, config.flow_packets.hi + 1.0));
      const double rate =
          rng.uniform(config.packet_rate.lo, config.packet_rate.hi);

      double tau = t;
      for (int k = 0; k < packets && tau < end; ++k) {
        flowkit::PacketRecord p;
        p.timestamp = tau;
        p.src_ip = ip;
        p.src_port = src_port;
        p.dst_ip = peer_ip;
        p.dst_port = dst_port;
        p.protocol = flowkit::Protocol::kTcp;
        p.payload_bytes = static_cast<std::uint64_t>(
            rng.uniform(config.payload_range.lo, config.payload_range.hi));
        p.label = flowkit::Label::kBenign;
        p.src_mac = mac;
        p.dst_mac = peer_mac;
        out.push_back(std::move(p));
        tau += rng.exponential(rate);
      }
      flow_counter++;
      t += rng.exponential(config.flow_rate);
    }
  }
  return out;
}

std::vector<flowkit::PacketRecord> gen_benign(int n_hosts, double duration,
                                              std::uint64_t seed) {
  if (n_hosts < 2) throw UserError("gen_benign: need at least 2 hosts");
  BenignConfig config;
  config.duration = duration;
  config.seed = seed;
  for (int i = 0; i < n_hosts; ++i) {
    char ip[32];
    char mac[18];
    std::snprintf(ip, sizeof(ip), "10.0.1.%d", i + 1);
    std::snprintf(mac, sizeof(mac), "02:00:01:00:%02x:%02x",
                  (static_cast<unsigned>(i + 1) >> 8) & 0xffu,
                  static_cast<unsigned>(i + 1) & 0xffu);
    config.hosts.emplace_back(ip, mac);
  }
  return gen_benign(config);
}

namespace {

HostInfo make_host(const std::string& ip, int group, int index,
                   HostInfo::Role role, flowkit::Label label) {
  char mac[18];
  std::snprintf(mac, sizeof(mac), "02:00:%02x:00:%02x:%02x",
                static_cast<unsigned>(group) & 0xffu,
                (static_cast<unsigned>(index + 1) >> 8) & 0xffu,
                static_cast<unsigned>(index + 1) & 0xffu);
  return {ip, mac, role, label};
}

Range parse_range_value(const std::string& value, const std::string& ctx) {
  std::vector<std::string> parts;
  for (const std::string& p : split(value, ' '))
    if (!trim(p).empty()) parts.push_back(trim(p));
  if (parts.size() != 2)
    throw UserError(ctx + ": expected 'lo hi', got '" + value + "'");
  return {parse_double(parts[0], ctx), parse_double(parts[1], ctx)};
}

bool parse_bool(const std::string& value, const std::string& ctx) {
  const std::string v = to_lower(value);
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw UserError(ctx + ": expected a boolean, got '" + value + "'");
}

}  // namespace

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path + "'");

  ScenarioConfig config;
  AttackGroup* group = nullptr;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (s == "[attack]") {
      config.attacks.emplace_back();
      group = &config.attacks.back();
      continue;
    }
    if (s.front() == '[') throw UserError(where + ": unknown section " + s);
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw UserError(where + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (value.empty()) throw UserError(where + ": empty value for " + key);

    if (!group) {
      if (key == "duration") config.duration = parse_double(value, where);
      else if (key == "benign_hosts")
        config.benign_hosts = static_cast<int>(parse_int(value, where));
      else if (key == "victims")
        config.victims = static_cast<int>(parse_int(value, where));
      else if (key == "benign_flow_rate")
        config.benign_flow_rate = parse_double(value, where);
      else if (key == "switches")
        config.switches = static_cast<int>(parse_int(value, where));
      else
        throw UserError(where + ": unknown key '" + key + "'");
      continue;
    }

    if (key == "variant") group->variant = parse_variant(value);
    else if (key == "hosts")
      group->hosts = static_cast<int>(parse_int(value, where));
    else if (key == "target")
      group->target = static_cast<int>(parse_int(value, where));
    else if (key == "rate") group->rate_range = parse_range_value(value, where);
    else if (key == "sleep") group->sleep_range = parse_range_value(value, where);
    else if (key == "burst") group->burst_range = parse_range_value(value, where);
    else if (key == "start") group->start = parse_double(value, where);
    else if (key == "active") group->active = parse_double(value, where);
    else if (key == "spoof_dst_mac")
      group->spoof_dst_mac = parse_bool(value, where);
    else if (key == "ips") {
      for (const std::string& ip : split(value, ','))
        if (!trim(ip).empty()) group->explicit_ips.push_back(trim(ip));
    } else if (key == "scan_ports") {
      const Range r = parse_range_value(value, where);
      group->scan_port_lo = static_cast<std::uint16_t>(r.lo);
      group->scan_port_hi = static_cast<std::uint16_t>(r.hi);
    } else if (key == "scan_rate")
      group->scan_rate = parse_double(value, where);
    else if (key == "hybrid_first")
      group->hybrid_first = parse_variant(value);
    else if (key == "hybrid_second")
      group->hybrid_second = parse_variant(value);
    else
      throw UserError(where + ": unknown key '" + key + "'");
  }

  if (config.duration <= 0.0) throw UserError(path + ": duration must be > 0");
  if (config.benign_hosts < 2)
    throw UserError(path + ": need at least 2 benign hosts");
  if (config.victims < 1 && !config.attacks.empty())
    throw UserError(path + ": attacks need at least one victim");
  for (const AttackGroup& g : config.attacks) {
    if (g.hosts < 1 && g.explicit_ips.empty())
      throw UserError(path + ": attack group needs hosts");
    if (g.target < 0 || g.target >= config.victims)
      throw UserError(path + ": attack target out of range");
  }
  return config;
}

Scenario gen_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  Scenario scenario;
  Rng rng(seed);

  for (int i = 0; i < config.benign_hosts; ++i) {
    char ip[32];
    std::snprintf(ip, sizeof(ip), "10.0.1.%d", i + 1);
    scenario.hosts.push_back(make_host(ip, 1, i, HostInfo::Role::kBenign,
                                       flowkit::Label::kBenign));
  }
  std::vector<HostInfo> victims;
  for (int i = 0; i < config.victims; ++i) {
    char ip[32];
    std::snprintf(ip, sizeof(ip), "10.0.3.%d", i + 1);
    victims.push_back(make_host(ip, 3, i, HostInfo::Role::kVictim,
                                flowkit::Label::kBenign));
  }

  std::set<std::string> used;
  for (const HostInfo& h : scenario.hosts) used.insert(h.ip);
  for (const HostInfo& h : victims) used.insert(h.ip);

  struct PlannedAttacker {
    HostInfo host;
    const AttackGroup* group;
  };
  std::vector<PlannedAttacker> attackers;
  int auto_ip = 0;
  int ordinal = 0;
  for (const AttackGroup& group : config.attacks) {
    const int count = group.explicit_ips.empty()
                          ? group.hosts
                          : static_cast<int>(group.explicit_ips.size());
    for (int k = 0; k < count; ++k) {
      std::string ip;
      if (!group.explicit_ips.empty()) {
        ip = group.explicit_ips[k];
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "10.0.2.%d", ++auto_ip);
        ip = buf;
      }
      if (!used.insert(ip).second)
        throw UserError("scenario: host " + ip + " appears in two roles");
      attackers.push_back({make_host(ip, 2, ordinal++,
                                     HostInfo::Role::kAttacker,
                                     variant_label(group.variant)),
                           &group});
    }
  }

  BenignConfig benign;
  for (const HostInfo& h : scenario.hosts) benign.hosts.emplace_back(h.ip, h.mac);
  benign.duration = config.duration;
  benign.flow_rate = config.benign_flow_rate;
  benign.seed = derive_seed(seed, "benign");
  scenario.packets = gen_benign(benign);

  for (const PlannedAttacker& planned : attackers) {
    const AttackGroup& g = *planned.group;
    VariantSpec spec = VariantSpec::defaults(g.variant);
    if (g.rate_range) spec.rate_range = *g.rate_range;
    if (g.sleep_range) spec.sleep_range = g.sleep_range;
    if (g.burst_range) spec.burst_range = *g.burst_range;
    spec.start = g.start.value_or(0.0);
    const double remaining = std::max(0.0, config.duration - spec.start);
    spec.duration = std::min(g.active.value_or(remaining), remaining);
    if (spec.duration <= 0.0)
      throw UserError("scenario: attack group starts at or after the end");
    spec.src_ip = planned.host.ip;
    spec.src_mac = planned.host.mac;
    const HostInfo& victim = victims[g.target];
    spec.target_ip = victim.ip;
    spec.target_mac = victim.mac;
    spec.spoof_dst_mac = g.spoof_dst_mac;
    spec.scan_port_lo = g.scan_port_lo;
    spec.scan_port_hi = g.scan_port_hi;
    spec.scan_rate = g.scan_rate;
    spec.hybrid_first = g.hybrid_first;
    spec.hybrid_second = g.hybrid_second;
    spec.seed = derive_seed(seed, "attack:" + planned.host.ip);

    std::vector<flowkit::PacketRecord> pkts = gen_attack(spec);
    scenario.packets.insert(scenario.packets.end(),
                            std::make_move_iterator(pkts.begin()),
                            std::make_move_iterator(pkts.end()));
  }

  for (const PlannedAttacker& planned : attackers)
    scenario.hosts.push_back(planned.host);
  scenario.hosts.insert(scenario.hosts.end(), victims.begin(), victims.end());

  std::stable_sort(scenario.packets.begin(), scenario.packets.end(),
                   [](const flowkit::PacketRecord& a,
                      const flowkit::PacketRecord& b) {
                     return a.timestamp < b.timestamp;
                   });

  for (const HostInfo& h : scenario.hosts) scenario.truth[h.ip] = h.label;
  return scenario;
}

void write_truth_csv(const std::string& path,
                     const std::map<std::string, flowkit::Label>& truth) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write '" + path + "'");
  out << "ip,label\n";

  std::vector<std::pair<std::string, flowkit::Label>> rows(truth.begin(),
                                                           truth.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    std::uint32_t ua = 0;
    std::uint32_t ub = 0;
    const bool pa = ipv4_to_u32(a.first, ua);
    const bool pb = ipv4_to_u32(b.first, ub);
    if (pa && pb && ua != ub) return ua < ub;
    if (pa != pb) return pa;
    return a.first < b.first;
  });
  for (const auto& [ip, label] : rows)
    out << ip << ',' << flowkit::label_name(label) << "\n";
  if (!out) throw UserError("write failed for '" + path + "'");
}

}  // namespace sdnshield::trafficgen
