#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sdnshield/errors.hpp"
#include "sdnshield/trafficgen.hpp"

using namespace sdnshield;
using namespace sdnshield::trafficgen;

namespace {

bool packets_equal(const std::vector<flowkit::PacketRecord>& a,
                   const std::vector<flowkit::PacketRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.timestamp != y.timestamp || x.src_ip != y.src_ip ||
        x.src_port != y.src_port || x.dst_ip != y.dst_ip ||
        x.dst_port != y.dst_port || x.protocol != y.protocol ||
        x.payload_bytes != y.payload_bytes || x.label != y.label ||
        x.src_mac != y.src_mac || x.dst_mac != y.dst_mac)
      return false;
  }
  return true;
}

VariantSpec addressed(VariantSpec spec) {
  spec.src_ip = "10.0.2.1";
  spec.src_mac = "02:00:02:00:00:01";
  spec.target_ip = "10.0.3.1";
  spec.target_mac = "02:00:03:00:00:01";
  return spec;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("variant names round-trip and parse leniently") {
  for (Variant v : {Variant::kSlowDDoS, Variant::kFastDDoS,
                    Variant::kSlowDcDDoS, Variant::kFastDcDDoS,
                    Variant::kPortScan, Variant::kHybrid})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK(parse_variant("Slow DDoS") == Variant::kSlowDDoS);
  CHECK(parse_variant("FAST-DDOS") == Variant::kFastDDoS);
  CHECK(parse_variant("slow_dc_ddos") == Variant::kSlowDcDDoS);
  CHECK(parse_variant("Fast DC DDoS") == Variant::kFastDcDDoS);
  CHECK(parse_variant("portscan") == Variant::kPortScan);
  CHECK_THROWS_WITH_AS(parse_variant("teardrop"),
                       doctest::Contains("unknown attack variant"), UserError);
}

TEST_CASE("each variant maps to its traffic label") {
  CHECK(variant_label(Variant::kSlowDDoS) == flowkit::Label::kSlowDDoS);
  CHECK(variant_label(Variant::kFastDDoS) == flowkit::Label::kFastDDoS);
  CHECK(variant_label(Variant::kSlowDcDDoS) == flowkit::Label::kSlowDcDDoS);
  CHECK(variant_label(Variant::kFastDcDDoS) == flowkit::Label::kFastDcDDoS);
  CHECK(variant_label(Variant::kPortScan) == flowkit::Label::kPortScan);
  CHECK(variant_label(Variant::kHybrid) == flowkit::Label::kDDoS);
}

TEST_CASE("variant defaults carry the published rate and sleep windows") {
  const VariantSpec slow = VariantSpec::defaults(Variant::kSlowDDoS);
  CHECK(slow.rate_range.lo == 5.0);
  CHECK(slow.rate_range.hi == 100.0);
  CHECK(!slow.sleep_range);
  CHECK(slow.burst_range.lo == 2.0);
  CHECK(slow.burst_range.hi == 5.0);
  CHECK(slow.payload_range.lo == 32.0);
  CHECK(slow.payload_range.hi == 64.0);

  const VariantSpec fast = VariantSpec::defaults(Variant::kFastDDoS);
  CHECK(fast.rate_range.lo == 1000.0);
  CHECK(fast.rate_range.hi == 20000.0);
  CHECK(!fast.sleep_range);

  const VariantSpec slow_dc = VariantSpec::defaults(Variant::kSlowDcDDoS);
  CHECK(slow_dc.rate_range.lo == 5.0);
  CHECK(slow_dc.rate_range.hi == 50.0);
  REQUIRE(slow_dc.sleep_range);
  CHECK(slow_dc.sleep_range->lo == 3.0);
  CHECK(slow_dc.sleep_range->hi == 7.0);

  const VariantSpec fast_dc = VariantSpec::defaults(Variant::kFastDcDDoS);
  CHECK(fast_dc.rate_range.lo == 1000.0);
  CHECK(fast_dc.rate_range.hi == 20000.0);
  REQUIRE(fast_dc.sleep_range);
  CHECK(fast_dc.sleep_range->lo == 3.0);
  CHECK(fast_dc.sleep_range->hi == 10.0);
}

TEST_CASE("continuous floods hold the configured rate and rotate ports") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kSlowDDoS));
  spec.rate_range = {50.0, 50.0};
  spec.burst_range = {2.0, 2.0};
  spec.duration = 20.0;
  spec.pacing = Pacing::kFixed;
  spec.spoof_dst_mac = false;
  spec.seed = 17;

  const auto packets = gen_attack(spec);
  // Ten 2-second bursts at 50 pps, minus the leading gap of each burst.
  CHECK(packets.size() >= 950);
  CHECK(packets.size() <= 1010);

  std::set<std::uint16_t> ports;
  for (const auto& p : packets) {
    CHECK(p.timestamp >= 0.0);
    CHECK(p.timestamp < 20.0);
    CHECK(p.src_ip == "10.0.2.1");
    CHECK(p.dst_ip == "10.0.3.1");
    CHECK(p.dst_port == 80);
    CHECK(p.protocol == flowkit::Protocol::kUdp);
    CHECK(p.payload_bytes >= 32);
    CHECK(p.payload_bytes < 64);
    CHECK(p.label == flowkit::Label::kSlowDDoS);
    CHECK(p.dst_mac == "02:00:03:00:00:01");
    ports.insert(p.src_port);
  }
  // One session (and source port) per burst.
  CHECK(ports.size() == 10);
  CHECK(*ports.begin() == 40000);
  CHECK(*ports.rbegin() == 40009);
  CHECK(std::is_sorted(packets.begin(), packets.end(),
                       [](const auto& a, const auto& b) {
                         return a.timestamp < b.timestamp;
                       }));
}

TEST_CASE("spoofed destination macs are random and locally administered") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kFastDDoS));
  spec.rate_range = {500.0, 500.0};
  spec.burst_range = {1.0, 1.0};
  spec.duration = 2.0;
  spec.pacing = Pacing::kFixed;
  spec.seed = 3;

  const auto packets = gen_attack(spec);
  REQUIRE(packets.size() > 500);
  std::set<std::string> macs;
  for (const auto& p : packets) {
    CHECK(p.dst_mac.rfind("0a:", 0) == 0);
    CHECK(p.dst_mac != "02:00:03:00:00:01");
    macs.insert(p.dst_mac);
  }
  // Effectively every packet forges a fresh address.
  CHECK(macs.size() > packets.size() * 9 / 10);
}

TEST_CASE("discontinuous floods sleep inside a session") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kSlowDcDDoS));
  spec.rate_range = {20.0, 20.0};
  spec.burst_range = {1.0, 1.0};
  spec.sleep_range = Range{3.0, 3.0};
  spec.cycles_min = 2;
  spec.cycles_max = 2;
  spec.duration = 30.0;
  spec.pacing = Pacing::kFixed;
  spec.seed = 99;

  const auto packets = gen_attack(spec);
  REQUIRE(!packets.empty());
  std::map<std::uint16_t, std::vector<double>> sessions;
  for (const auto& p : packets) {
    CHECK(p.timestamp < 30.0);
    CHECK(p.label == flowkit::Label::kSlowDcDDoS);
    sessions[p.src_port].push_back(p.timestamp);
  }
  CHECK(sessions.size() >= 3);
  std::size_t with_gap = 0;
  for (auto& [port, times] : sessions) {
    std::sort(times.begin(), times.end());
    double max_gap = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i)
      max_gap = std::max(max_gap, times[i] - times[i - 1]);
    // Two one-second bursts separated by a three-second sleep; the final
    // session may be truncated by the end of the attack window.
    if (max_gap >= 2.9) with_gap++;
    CHECK(times.back() - times.front() < 5.1);
  }
  CHECK(with_gap >= sessions.size() - 1);
}

TEST_CASE("a port scan probes every port once at the scan rate") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kPortScan));
  spec.duration = 10.0;
  spec.pacing = Pacing::kFixed;
  spec.scan_rate = 100.0;
  spec.seed = 8;

  const auto packets = gen_attack(spec);
  REQUIRE(packets.size() == 100);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const auto& p = packets[i];
    CHECK(p.dst_port == i + 1);  // ascending sweep over 1..100
    CHECK(p.timestamp == doctest::Approx(0.01 * i));
    CHECK(p.protocol == flowkit::Protocol::kTcp);
    CHECK(p.src_port == 40000);  // scans keep one source port
    CHECK(p.label == flowkit::Label::kPortScan);
  }
}

TEST_CASE("a short window truncates the scan") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kPortScan));
  spec.duration = 0.5;
  spec.pacing = Pacing::kFixed;
  spec.scan_rate = 100.0;
  const auto packets = gen_attack(spec);
  CHECK(packets.size() == 50);
  CHECK(packets.back().dst_port == 50);
}

TEST_CASE("a hybrid attack runs its components over the two halves") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kHybrid));
  spec.variant = Variant::kHybrid;
  spec.hybrid_first = Variant::kSlowDDoS;
  spec.hybrid_second = Variant::kFastDDoS;
  spec.duration = 40.0;
  spec.seed = 5;

  const auto packets = gen_attack(spec);
  REQUIRE(!packets.empty());
  bool saw_first = false;
  bool saw_second = false;
  for (const auto& p : packets) {
    if (p.timestamp < 20.0) {
      CHECK(p.label == flowkit::Label::kSlowDDoS);
      CHECK(p.src_port >= 40000);
      CHECK(p.src_port < 60000);
      saw_first = true;
    } else {
      CHECK(p.label == flowkit::Label::kFastDDoS);
      CHECK(p.src_port >= 60000);  // second half rotates into its own band
      saw_second = true;
    }
  }
  CHECK(saw_first);
  CHECK(saw_second);
}

TEST_CASE("attack validation rejects broken specs") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kSlowDDoS));
  spec.duration = 0.0;
  CHECK_THROWS_WITH_AS(gen_attack(spec), doctest::Contains("duration"),
                       UserError);

  VariantSpec blank = VariantSpec::defaults(Variant::kSlowDDoS);
  CHECK_THROWS_WITH_AS(gen_attack(blank),
                       doctest::Contains("source and target required"),
                       UserError);

  VariantSpec inverted = addressed(VariantSpec::defaults(Variant::kSlowDDoS));
  inverted.rate_range = {100.0, 5.0};
  CHECK_THROWS_WITH_AS(gen_attack(inverted), doctest::Contains("empty range"),
                       UserError);

  VariantSpec cycles = addressed(VariantSpec::defaults(Variant::kSlowDcDDoS));
  cycles.cycles_min = 3;
  cycles.cycles_max = 2;
  CHECK_THROWS_WITH_AS(gen_attack(cycles), doctest::Contains("cycle range"),
                       UserError);

  VariantSpec hybrid = addressed(VariantSpec::defaults(Variant::kHybrid));
  hybrid.variant = Variant::kHybrid;
  CHECK_THROWS_WITH_AS(gen_attack(hybrid),
                       doctest::Contains("both component variants"), UserError);
  hybrid.hybrid_first = Variant::kSlowDDoS;
  hybrid.hybrid_second = Variant::kHybrid;
  CHECK_THROWS_WITH_AS(gen_attack(hybrid),
                       doctest::Contains("concrete variants"), UserError);

  VariantSpec scan = addressed(VariantSpec::defaults(Variant::kPortScan));
  scan.scan_port_lo = 50;
  scan.scan_port_hi = 10;
  CHECK_THROWS_WITH_AS(gen_attack(scan), doctest::Contains("port range"),
                       UserError);
}

TEST_CASE("attack generation is reproducible per seed") {
  VariantSpec spec = addressed(VariantSpec::defaults(Variant::kSlowDDoS));
  spec.duration = 10.0;
  spec.seed = 404;
  const auto a = gen_attack(spec);
  const auto b = gen_attack(spec);
  CHECK(packets_equal(a, b));
  spec.seed = 405;
  const auto c = gen_attack(spec);
  CHECK(!packets_equal(a, c));
}

TEST_CASE("benign traffic stays inside the host set and the service ports") {
  BenignConfig config;
  config.hosts = {{"10.0.1.1", "02:00:01:00:00:01"},
                  {"10.0.1.2", "02:00:01:00:00:02"},
                  {"10.0.1.3", "02:00:01:00:00:03"},
                  {"10.0.1.4", "02:00:01:00:00:04"}};
  config.duration = 30.0;
  config.flow_rate = 0.5;
  config.seed = 21;

  const auto packets = gen_benign(config);
  REQUIRE(!packets.empty());
  std::map<std::string, std::string> mac_of;
  for (const auto& [ip, mac] : config.hosts) mac_of[ip] = mac;
  const std::set<std::uint16_t> services = {80, 443, 22, 53, 8080};
  for (const auto& p : packets) {
    CHECK(p.timestamp >= 0.0);
    CHECK(p.timestamp < 30.0);
    REQUIRE(mac_of.count(p.src_ip) == 1);
    REQUIRE(mac_of.count(p.dst_ip) == 1);
    CHECK(p.src_ip != p.dst_ip);
    CHECK(p.src_mac == mac_of[p.src_ip]);
    CHECK(p.dst_mac == mac_of[p.dst_ip]);
    CHECK(services.count(p.dst_port) == 1);
    CHECK(p.src_port >= 20000);
    CHECK(p.payload_bytes >= 100);
    CHECK(p.payload_bytes < 1200);
    CHECK(p.protocol == flowkit::Protocol::kTcp);
    CHECK(p.label == flowkit::Label::kBenign);
  }

  const auto again = gen_benign(config);
  CHECK(packets_equal(packets, again));

  BenignConfig lonely = config;
  lonely.hosts.resize(1);
  CHECK_THROWS_WITH_AS(gen_benign(lonely), doctest::Contains("at least 2"),
                       UserError);
}

TEST_CASE("scenarios assign addresses by role and merge time-sorted") {
  ScenarioConfig config;
  config.duration = 20.0;
  config.benign_hosts = 3;
  config.victims = 1;
  config.benign_flow_rate = 0.3;
  AttackGroup slow;
  slow.variant = Variant::kSlowDDoS;
  slow.hosts = 1;
  AttackGroup scan;
  scan.variant = Variant::kPortScan;
  scan.hosts = 1;
  config.attacks = {slow, scan};

  const Scenario s = gen_scenario(config, 7);
  REQUIRE(s.hosts.size() == 6);
  CHECK(s.hosts[0].ip == "10.0.1.1");
  CHECK(s.hosts[0].role == HostInfo::Role::kBenign);
  CHECK(s.hosts[3].ip == "10.0.2.1");
  CHECK(s.hosts[3].role == HostInfo::Role::kAttacker);
  CHECK(s.hosts[3].label == flowkit::Label::kSlowDDoS);
  CHECK(s.hosts[4].ip == "10.0.2.2");
  CHECK(s.hosts[4].label == flowkit::Label::kPortScan);
  CHECK(s.hosts[5].ip == "10.0.3.1");
  CHECK(s.hosts[5].role == HostInfo::Role::kVictim);

  std::set<std::string> macs;
  for (const HostInfo& h : s.hosts) {
    CHECK(!h.mac.empty());
    macs.insert(h.mac);
  }
  CHECK(macs.size() == s.hosts.size());

  CHECK(s.truth.at("10.0.1.2") == flowkit::Label::kBenign);
  CHECK(s.truth.at("10.0.2.1") == flowkit::Label::kSlowDDoS);
  CHECK(s.truth.at("10.0.2.2") == flowkit::Label::kPortScan);
  CHECK(s.truth.at("10.0.3.1") == flowkit::Label::kBenign);

  REQUIRE(!s.packets.empty());
  CHECK(std::is_sorted(s.packets.begin(), s.packets.end(),
                       [](const auto& a, const auto& b) {
                         return a.timestamp < b.timestamp;
                       }));
  bool saw_attack = false;
  for (const auto& p : s.packets) {
    CHECK(!p.src_mac.empty());
    CHECK(!p.dst_mac.empty());
    if (p.src_ip.rfind("10.0.2.", 0) == 0) {
      CHECK(p.dst_ip == "10.0.3.1");
      saw_attack = true;
    }
  }
  CHECK(saw_attack);

  const Scenario t = gen_scenario(config, 7);
  CHECK(packets_equal(s.packets, t.packets));
  const Scenario u = gen_scenario(config, 8);
  CHECK(!packets_equal(s.packets, u.packets));
}

TEST_CASE("a host claimed by two roles is rejected") {
  ScenarioConfig config;
  config.benign_hosts = 2;
  config.victims = 1;
  AttackGroup group;
  group.explicit_ips = {"10.0.1.1"};
  config.attacks = {group};
  CHECK_THROWS_WITH_AS(gen_scenario(config, 1),
                       doctest::Contains("appears in two roles"), UserError);
}

TEST_CASE("scenario files parse into groups with overrides") {
  const std::string path = temp_path("scenario_parse.cfg");
  {
    std::ofstream out(path);
    out << "# demo\n"
           "duration = 45\n"
           "benign_hosts = 8\n"
           "victims = 2\n"
           "benign_flow_rate = 0.4\n"
           "switches = 5\n"
           "\n"
           "[attack]\n"
           "variant = slow_dc_ddos\n"
           "hosts = 3\n"
           "target = 1\n"
           "rate = 10 30\n"
           "sleep = 4 6\n"
           "burst = 1 2\n"
           "start = 5\n"
           "active = 30\n"
           "spoof_dst_mac = false\n"
           "\n"
           "[attack]\n"
           "variant = portscan\n"
           "ips = 172.16.0.1, 172.16.0.2\n"
           "scan_ports = 1 200\n"
           "scan_rate = 50\n";
  }
  const ScenarioConfig config = ScenarioConfig::load(path);
  CHECK(config.duration == 45.0);
  CHECK(config.benign_hosts == 8);
  CHECK(config.victims == 2);
  CHECK(config.benign_flow_rate == 0.4);
  CHECK(config.switches == 5);
  REQUIRE(config.attacks.size() == 2);

  const AttackGroup& g0 = config.attacks[0];
  CHECK(g0.variant == Variant::kSlowDcDDoS);
  CHECK(g0.hosts == 3);
  CHECK(g0.target == 1);
  REQUIRE(g0.rate_range);
  CHECK(g0.rate_range->lo == 10.0);
  CHECK(g0.rate_range->hi == 30.0);
  REQUIRE(g0.sleep_range);
  CHECK(g0.sleep_range->lo == 4.0);
  REQUIRE(g0.burst_range);
  CHECK(g0.start == 5.0);
  CHECK(g0.active == 30.0);
  CHECK(!g0.spoof_dst_mac);

  const AttackGroup& g1 = config.attacks[1];
  CHECK(g1.variant == Variant::kPortScan);
  CHECK(g1.explicit_ips ==
        std::vector<std::string>{"172.16.0.1", "172.16.0.2"});
  CHECK(g1.scan_port_lo == 1);
  CHECK(g1.scan_port_hi == 200);
  CHECK(g1.scan_rate == 50.0);
}

TEST_CASE("scenario files report errors with their line") {
  auto write_cfg = [](const std::string& name, const std::string& content) {
    const std::string path = temp_path(name);
    std::ofstream out(path);
    out << content;
    return path;
  };

  const std::string unknown =
      write_cfg("scn_unknown.cfg", "duration = 10\nbananas = 4\n");
  try {
    ScenarioConfig::load(unknown);
    FAIL("expected a parse error");
  } catch (const UserError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
    CHECK(std::string(e.what()).find("unknown key 'bananas'") !=
          std::string::npos);
  }

  CHECK_THROWS_WITH_AS(
      ScenarioConfig::load(write_cfg("scn_section.cfg", "[defense]\n")),
      doctest::Contains("unknown section"), UserError);
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::load(write_cfg("scn_noeq.cfg", "duration 10\n")),
      doctest::Contains("expected 'key = value'"), UserError);
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::load(write_cfg("scn_empty.cfg", "duration =\n")),
      doctest::Contains("empty value"), UserError);
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::load(
          write_cfg("scn_target.cfg",
                    "victims = 1\n[attack]\nvariant = portscan\ntarget = 3\n")),
      doctest::Contains("target out of range"), UserError);
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::load(write_cfg("scn_dur.cfg", "duration = 0\n")),
      doctest::Contains("duration must be > 0"), UserError);
  CHECK_THROWS_AS(ScenarioConfig::load(temp_path("scn_missing.cfg")),
                  UserError);
}

TEST_CASE("truth files sort addresses numerically") {
  std::map<std::string, flowkit::Label> truth;
  truth["10.0.0.10"] = flowkit::Label::kFastDDoS;
  truth["10.0.0.2"] = flowkit::Label::kBenign;
  truth["10.0.0.1"] = flowkit::Label::kPortScan;
  const std::string path = temp_path("truth_sorted.csv");
  write_truth_csv(path, truth);

  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() ==
        "ip,label\n"
        "10.0.0.1,portscan\n"
        "10.0.0.2,benign\n"
        "10.0.0.10,fast_ddos\n");
}
