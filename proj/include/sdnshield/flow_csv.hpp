#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdnshield/flowkit.hpp"

namespace sdnshield::flowkit {

// Packet trace files. The base header is
//   timestamp,src_ip,src_port,dst_ip,dst_port,protocol,payload_bytes,label
// and switch-level traces append src_mac,dst_mac. read accepts both layouts.
std::vector<PacketRecord> read_packet_csv(const std::string& path);
void write_packet_csv(const std::string& path,
                      std::span<const PacketRecord> packets, bool with_mac);

// Activity-flow export: feature columns in schema order, then
// src_ip,src_port,label.
void write_activity_csv(const std::string& path,
                        std::span<const ActivityFlow> flows);

// Maps columns of a foreign flow CSV (e.g. a CICIDS2017 export) onto the
// feature schema. The config file holds `source column = target` lines;
// targets are the FeatureSchema names plus src_ip, src_port, dst_ip,
// dst_port, label. Lines starting with '#' are comments.
struct ColumnMapping {
  std::map<std::string, std::string> source_to_target;

  static ColumnMapping load(const std::string& path);
};

struct ExternalFlows {
  std::vector<BasicFlow> flows;
  std::size_t skipped_rows = 0;  // unknown labels or non-finite numbers
};

// Reads a foreign flow CSV through a mapping. Each row becomes one
// BasicFlow; unmapped feature slots stay 0. Rows whose label does not parse
// or whose mapped numbers are not finite are skipped and counted. Feature
// durations given in microseconds must be converted by the mapping target
// suffix "flow_duration_us".
ExternalFlows read_external_flow_csv(const std::string& path,
                                     const ColumnMapping& mapping);

}  // namespace sdnshield::flowkit
