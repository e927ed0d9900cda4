#include "sdnshield/sdnsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sdnshield/errors.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::sdnsim {

namespace {

std::string tuple_key(const HostTuple& t) {
  return t.ip + '|' + t.mac + '|' + t.attach;
}

std::string flow_key(const HostTuple& src, const HostTuple& dst) {
  return tuple_key(src) + '>' + tuple_key(dst);
}

bool list_contains(const std::vector<HostTuple>& list, const HostTuple& t) {
  return std::find(list.begin(), list.end(), t) != list.end();
}

}  // namespace

std::vector<Action> controller_mitigate(const PacketInMessage& msg,
                                        ControllerState& state) {
  // Observing scan stops at the first full match, as the source is already
  // confirmed suspicious.
  for (const HostTuple& entry : state.observing_list) {
    state.observing_comparisons++;
    if (entry == msg.src)
      return {{ActionKind::kInstallPktBlocking, msg.src, msg.dest},
              {ActionKind::kAppendBlockList, msg.src, msg.dest}};
  }

  // Full scan for the best-matching network entry; no early exit, so the
  // cost (and the comparison counter) is exactly the list length.
  int best = 0;
  for (const HostTuple& entry : state.network_list) {
    state.network_comparisons++;
    best = std::max(best, match_count(msg.dest, entry));
  }
  if (best != 3)
    return {{ActionKind::kAppendObservingList, msg.src, msg.dest},
            {ActionKind::kDropPending, msg.src, msg.dest}};
  return {{ActionKind::kInstallAllow, msg.src, msg.dest},
          {ActionKind::kForwardPending, msg.src, msg.dest}};
}

void apply_mitigation_actions(ControllerState& state,
                              std::span<const Action> actions) {
  for (const Action& action : actions) {
    switch (action.kind) {
      case ActionKind::kAppendBlockList:
        if (!list_contains(state.block_list, action.src))
          state.block_list.push_back(action.src);
        break;
      case ActionKind::kAppendObservingList:
        if (!list_contains(state.observing_list, action.src))
          state.observing_list.push_back(action.src);
        break;
      default:
        break;  // rule and packet handling belong to the simulator
    }
  }
}

namespace {

struct WindowAccum {
  std::uint64_t arrivals = 0;
  std::uint64_t processed = 0;
  std::uint64_t drops = 0;
  std::uint64_t forwarded = 0;
  bool overload = false;
};

class Simulator {
 public:
  Simulator(const Network& network, const SimConfig& config)
      : network_(network), config_(config) {
    controller_.packet_in_rate_limit = config.packet_in_rate_limit;
    controller_.network_list = network.spec.hosts;
    switches_.resize(network.spec.switches.size());
    for (std::size_t i = 0; i < switches_.size(); ++i) {
      switches_[i].id = network.spec.switches[i];
      switches_[i].capacity = config.switch_capacity;
    }
  }

  SimReport run(std::span<const flowkit::PacketRecord> trace) {
    double prev_time = -1.0;
    for (const flowkit::PacketRecord& p : trace) {
      if (p.timestamp < prev_time)
        throw UserError("trace not time-sorted at t=" +
                        format_double(p.timestamp));
      prev_time = p.timestamp;
      advance_to(p.timestamp);
      handle_packet(p);
      report_.total_packets++;
    }
    close_window();
    finalize();
    return std::move(report_);
  }

 private:
  void advance_to(double t) {
    maybe_feed(t);
    const std::int64_t w = static_cast<std::int64_t>(std::floor(t));
    if (!window_open_) {
      window_ = w;
      window_open_ = true;
      return;
    }
    while (window_ < w) {
      close_window();
      window_++;
      accum_ = WindowAccum{};
    }
  }

  void maybe_feed(double t) {
    if (fed_ || !config_.feed_time || t < *config_.feed_time) return;
    fed_ = true;
    for (const HostTuple& tuple : config_.detector_feed)
      if (!list_contains(controller_.observing_list, tuple))
        controller_.observing_list.push_back(tuple);
  }

  void close_window() {
    if (!window_open_) return;
    maybe_expire_rules(static_cast<double>(window_ + 1));
    SecondRow row;
    row.t = static_cast<double>(window_);
    row.packet_in_rate = accum_.arrivals;
    row.rule_count = total_rules();
    row.drops = accum_.drops;
    row.forwarded = accum_.forwarded;
    row.observing_len = controller_.observing_list.size();
    row.block_len = controller_.block_list.size();
    row.overload = accum_.overload;
    row.processed = accum_.processed;
    report_.rows.push_back(row);
  }

  std::uint64_t total_rules() const {
    std::uint64_t n = 0;
    for (const SwitchState& sw : switches_) n += sw.rules.size();
    return n;
  }

  void maybe_expire_rules(double now) {
    if (!config_.rule_idle_timeout) return;
    const double timeout = *config_.rule_idle_timeout;
    for (SwitchState& sw : switches_) {
      const std::size_t before = sw.rules.size();
      std::erase_if(sw.rules, [&](const Rule& r) {
        return now - r.last_hit > timeout;
      });
      if (sw.rules.size() == before) continue;
      sw.allow_index.clear();
      sw.block_index.clear();
      for (std::size_t i = 0; i < sw.rules.size(); ++i) {
        const Rule& r = sw.rules[i];
        if (r.kind == Rule::Kind::kBlock)
          sw.block_index[tuple_key(r.src)] = i;
        else
          sw.allow_index[flow_key(r.src, r.dst)] = i;
      }
    }
  }

  HostTuple resolve_src(const flowkit::PacketRecord& p) const {
    const HostTuple* host = network_.find_host(p.src_ip);
    HostTuple t;
    t.ip = p.src_ip;
    t.mac = !p.src_mac.empty() ? p.src_mac : (host ? host->mac : "?");
    t.attach = host ? host->attach
                    : network_.spec.switches[network_.gateway] + ":0";
    return t;
  }

  HostTuple resolve_dest(const flowkit::PacketRecord& p) const {
    const HostTuple* host = network_.find_host(p.dst_ip);
    HostTuple t;
    t.ip = p.dst_ip;
    t.mac = !p.dst_mac.empty() ? p.dst_mac : (host ? host->mac : "?");
    t.attach = host ? host->attach : "?";
    return t;
  }

  bool install_rule(SwitchState& sw, Rule rule) {
    if (sw.rules.size() >= sw.capacity) {
      report_.rule_overflow_events++;
      return false;
    }
    const std::size_t idx = sw.rules.size();
    if (rule.kind == Rule::Kind::kBlock)
      sw.block_index[tuple_key(rule.src)] = idx;
    else
      sw.allow_index[flow_key(rule.src, rule.dst)] = idx;
    sw.rules.push_back(std::move(rule));
    return true;
  }

  void forward(const flowkit::PacketRecord& p) {
    accum_.forwarded++;
    report_.total_forwarded++;
    report_.by_source[p.src_ip].forwarded++;
  }

  void drop(const flowkit::PacketRecord& p) {
    accum_.drops++;
    report_.total_dropped++;
    report_.by_source[p.src_ip].dropped++;
  }

  void handle_packet(const flowkit::PacketRecord& p) {
    const HostTuple src = resolve_src(p);
    const HostTuple dest = resolve_dest(p);
    const int sw_idx = network_.find_host(p.src_ip)
                           ? network_.host_switch[network_.host_by_ip.at(p.src_ip)]
                           : network_.gateway;
    SwitchState& sw = switches_[sw_idx];
    report_.by_source[p.src_ip].packets++;

    // Blocking rules take precedence: discard with no controller signal.
    if (const auto it = sw.block_index.find(tuple_key(src));
        it != sw.block_index.end()) {
      sw.rules[it->second].last_hit = p.timestamp;
      sw.drop_count++;
      drop(p);
      return;
    }
    if (const auto it = sw.allow_index.find(flow_key(src, dest));
        it != sw.allow_index.end()) {
      sw.rules[it->second].last_hit = p.timestamp;
      forward(p);
      return;
    }

    // Unknown flow: Packet-In, packet held pending the verdict.
    sw.packet_in_count++;
    report_.total_packet_ins++;
    report_.by_source[p.src_ip].packet_ins++;
    report_.packet_in_events.push_back({p.timestamp, sw.id, p.src_ip});
    accum_.arrivals++;

    if (accum_.processed >=
        static_cast<std::uint64_t>(controller_.packet_in_rate_limit)) {
      // Over budget for this window: the message sits in the queue until
      // the window closes and is then discarded with its packet.
      accum_.overload = true;
      controller_.overload_flag = true;
      report_.overload_dropped++;
      drop(p);
      return;
    }
    accum_.processed++;
    report_.processed_messages++;

    if (!config_.mitigation) {
      install_rule(sw, {Rule::Kind::kAllow, src, dest, p.timestamp, p.timestamp});
      forward(p);
      return;
    }

    const PacketInMessage msg{src, dest, sw.id, p.timestamp};
    const std::vector<Action> actions = controller_mitigate(msg, controller_);
    apply_mitigation_actions(controller_, actions);
    bool forwarded = false;
    for (const Action& action : actions) {
      switch (action.kind) {
        case ActionKind::kInstallPktBlocking:
          if (install_rule(sw, {Rule::Kind::kBlock, action.src, {},
                                p.timestamp, p.timestamp}))
            report_.block_events.push_back({p.timestamp, sw.id, action.src});
          break;
        case ActionKind::kInstallAllow:
          install_rule(sw, {Rule::Kind::kAllow, action.src, action.dest,
                            p.timestamp, p.timestamp});
          break;
        case ActionKind::kForwardPending:
          forward(p);
          forwarded = true;
          break;
        case ActionKind::kAppendBlockList:
        case ActionKind::kAppendObservingList:
        case ActionKind::kDropPending:
          break;
      }
    }
    if (!forwarded) drop(p);
  }

  void finalize() {
    for (const SwitchState& sw : switches_)
      report_.switch_rule_counts[sw.id] = sw.rules.size();
    report_.overload_flag = controller_.overload_flag;
    report_.controller = controller_;
  }

  const Network& network_;
  const SimConfig& config_;
  ControllerState controller_;
  std::vector<SwitchState> switches_;
  SimReport report_;
  WindowAccum accum_;
  std::int64_t window_ = 0;
  bool window_open_ = false;
  bool fed_ = false;
};

}  // namespace

SimReport run_scenario(const Network& network,
                       std::span<const flowkit::PacketRecord> trace,
                       const SimConfig& config) {
  Simulator sim(network, config);
  return sim.run(trace);
}

std::vector<flowkit::PacketRecord> mirror_flows(
    std::span<const flowkit::PacketRecord> trace, double t0, double t1) {
  std::vector<flowkit::PacketRecord> out;
  for (const flowkit::PacketRecord& p : trace)
    if (p.timestamp >= t0 && p.timestamp < t1) out.push_back(p);
  return out;
}

void write_sim_report(const std::string& dir, const SimReport& report) {
  const std::string ts_path = dir + "/timeseries.csv";
  std::ofstream ts(ts_path);
  if (!ts) throw UserError("cannot write '" + ts_path + "'");
  ts << "t,packet_in_rate,rule_count,drops,forwarded,observing_len,block_len,overload\n";
  for (const SecondRow& row : report.rows)
    ts << format_double(row.t) << ',' << row.packet_in_rate << ','
       << row.rule_count << ',' << row.drops << ',' << row.forwarded << ','
       << row.observing_len << ',' << row.block_len << ','
       << (row.overload ? 1 : 0) << "\n";
  if (!ts) throw UserError("write failed for '" + ts_path + "'");

  const std::string sum_path = dir + "/summary.txt";
  std::ofstream out(sum_path);
  if (!out) throw UserError("cannot write '" + sum_path + "'");
  out << "== totals ==\n";
  out << "packets = " << report.total_packets << "\n";
  out << "forwarded = " << report.total_forwarded << "\n";
  out << "dropped = " << report.total_dropped << "\n";
  out << "packet_ins = " << report.total_packet_ins << "\n";
  out << "processed_messages = " << report.processed_messages << "\n";
  out << "overload_dropped = " << report.overload_dropped << "\n";
  out << "rule_overflow_events = " << report.rule_overflow_events << "\n";
  out << "overload = " << (report.overload_flag ? "true" : "false") << "\n";

  out << "\n== controller ==\n";
  out << "network_list = " << report.controller.network_list.size() << "\n";
  out << "observing_list = " << report.controller.observing_list.size() << "\n";
  out << "block_list = " << report.controller.block_list.size() << "\n";
  out << "observing_comparisons = " << report.controller.observing_comparisons
      << "\n";
  out << "network_comparisons = " << report.controller.network_comparisons
      << "\n";
  for (const HostTuple& t : report.controller.block_list)
    out << "blocked: " << t.ip << ' ' << t.mac << ' ' << t.attach << "\n";

  out << "\n== switches ==\n";
  for (const auto& [id, rules] : report.switch_rule_counts)
    out << id << " rules = " << rules << "\n";

  out << "\n== block events ==\n";
  for (const BlockEvent& e : report.block_events)
    out << format_double(e.time) << ' ' << e.switch_id << ' ' << e.src.ip
        << "\n";

  out << "\n== per-source ==\n";
  out << "ip packets forwarded dropped packet_ins\n";
  for (const auto& [ip, stats] : report.by_source)
    out << ip << ' ' << stats.packets << ' ' << stats.forwarded << ' '
        << stats.dropped << ' ' << stats.packet_ins << "\n";
  if (!out) throw UserError("write failed for '" + sum_path + "'");
}

}  // namespace sdnshield::sdnsim
