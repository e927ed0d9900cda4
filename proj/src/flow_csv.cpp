#include "sdnshield/flow_csv.hpp"

#include <cmath>
#include <fstream>

#include "sdnshield/csv.hpp"
#include "sdnshield/errors.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::flowkit {

namespace {

int require_column(const CsvTable& t, const std::string& path,
                   const std::string& name) {
  const int idx = t.column(name);
  if (idx < 0) throw UserError(path + ": missing column '" + name + "'");
  return idx;
}

}  // namespace

std::vector<PacketRecord> read_packet_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int c_ts = require_column(t, path, "timestamp");
  const int c_sip = require_column(t, path, "src_ip");
  const int c_sport = require_column(t, path, "src_port");
  const int c_dip = require_column(t, path, "dst_ip");
  const int c_dport = require_column(t, path, "dst_port");
  const int c_proto = require_column(t, path, "protocol");
  const int c_bytes = require_column(t, path, "payload_bytes");
  const int c_label = require_column(t, path, "label");
  const int c_smac = t.column("src_mac");
  const int c_dmac = t.column("dst_mac");

  std::vector<PacketRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = path + " row " + std::to_string(r + 1);
    PacketRecord p;
    p.timestamp = parse_double(row[c_ts], ctx);
    p.src_ip = row[c_sip];
    p.src_port = parse_port(row[c_sport], ctx);
    p.dst_ip = row[c_dip];
    p.dst_port = parse_port(row[c_dport], ctx);
    p.protocol = parse_protocol(row[c_proto]);
    const std::int64_t bytes = parse_int(row[c_bytes], ctx);
    if (bytes < 0) throw UserError(ctx + ": negative payload_bytes");
    p.payload_bytes = static_cast<std::uint64_t>(bytes);
    p.label = parse_label(row[c_label]);
    if (c_smac >= 0) p.src_mac = row[c_smac];
    if (c_dmac >= 0) p.dst_mac = row[c_dmac];
    out.push_back(std::move(p));
  }
  return out;
}

void write_packet_csv(const std::string& path,
                      std::span<const PacketRecord> packets, bool with_mac) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write '" + path + "'");
  out << "timestamp,src_ip,src_port,dst_ip,dst_port,protocol,payload_bytes,label";
  if (with_mac) out << ",src_mac,dst_mac";
  out << "\n";
  for (const PacketRecord& p : packets) {
    out << format_double(p.timestamp) << ',' << p.src_ip << ',' << p.src_port
        << ',' << p.dst_ip << ',' << p.dst_port << ','
        << protocol_name(p.protocol) << ',' << p.payload_bytes << ','
        << label_name(p.label);
    if (with_mac) out << ',' << p.src_mac << ',' << p.dst_mac;
    out << "\n";
  }
  if (!out) throw UserError("write failed for '" + path + "'");
}

void write_activity_csv(const std::string& path,
                        std::span<const ActivityFlow> flows) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write '" + path + "'");
  for (const std::string& name : feature_names()) out << name << ',';
  out << "src_ip,src_port,label\n";
  for (const ActivityFlow& f : flows) {
    for (double v : f.features) out << format_double(v) << ',';
    out << f.source.ip << ',' << f.source.port << ',' << label_name(f.label)
        << "\n";
  }
  if (!out) throw UserError("write failed for '" + path + "'");
}

ColumnMapping ColumnMapping::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path + "'");
  ColumnMapping m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.rfind('=');
    if (eq == std::string::npos)
      throw UserError(path + ":" + std::to_string(lineno) +
                      ": expected 'column = target'");
    const std::string source = trim(s.substr(0, eq));
    const std::string target = trim(s.substr(eq + 1));
    if (source.empty() || target.empty())
      throw UserError(path + ":" + std::to_string(lineno) + ": empty side");
    m.source_to_target[source] = target;
  }
  return m;
}

ExternalFlows read_external_flow_csv(const std::string& path,
                                     const ColumnMapping& mapping) {
  const CsvTable t = read_csv(path);

  int c_sip = -1, c_sport = -1, c_dip = -1, c_dport = -1, c_label = -1;
  struct FeatureCol {
    int column;
    int slot;
    double scale;
  };
  std::vector<FeatureCol> features;

  const auto& names = feature_names();
  for (const auto& [source, target] : mapping.source_to_target) {
    const int col = t.column(source);
    if (col < 0) throw UserError(path + ": missing column '" + source + "'");
    if (target == "src_ip") { c_sip = col; continue; }
    if (target == "src_port") { c_sport = col; continue; }
    if (target == "dst_ip") { c_dip = col; continue; }
    if (target == "dst_port") { c_dport = col; continue; }
    if (target == "label") { c_label = col; continue; }
    if (target == "flow_duration_us") {
      features.push_back({col, kFlowDuration, 1e-6});
      continue;
    }
    bool found = false;
    for (int i = 0; i < kFeatureCount; ++i) {
      if (target == names[i]) {
        features.push_back({col, i, 1.0});
        found = true;
        break;
      }
    }
    if (!found)
      throw UserError("mapping: unknown target '" + target + "'");
  }
  for (const auto& [name, col] :
       std::initializer_list<std::pair<const char*, int>>{
           {"src_ip", c_sip}, {"src_port", c_sport}, {"dst_ip", c_dip},
           {"dst_port", c_dport}, {"label", c_label}}) {
    if (col < 0)
      throw UserError("mapping: no column mapped to required target '" +
                      std::string(name) + "'");
  }

  ExternalFlows out;
  for (const auto& row : t.rows) {
    const auto label = try_parse_label(row[c_label]);
    if (!label) {
      out.skipped_rows++;
      continue;
    }
    BasicFlow flow;
    flow.label = *label;
    bool ok = true;
    try {
      flow.key.src = {row[c_sip], parse_port(row[c_sport], path)};
      flow.key.dst = {row[c_dip], parse_port(row[c_dport], path)};
      for (const FeatureCol& fc : features) {
        const double v = parse_double(row[fc.column], path) * fc.scale;
        if (!std::isfinite(v)) { ok = false; break; }
        flow.features[fc.slot] = v;
      }
    } catch (const UserError&) {
      ok = false;
    }
    if (!ok) {
      out.skipped_rows++;
      continue;
    }
    flow.packet_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(
               std::max(0.0, flow.features[kTotalPackets]))));
    if (flow.features[kDistinctDstPorts] == 0.0)
      flow.features[kDistinctDstPorts] = 1.0;
    out.flows.push_back(std::move(flow));
  }
  return out;
}

}  // namespace sdnshield::flowkit
