#pragma once

#include <string>

#include "sdnshield/pipeline.hpp"

namespace sdnshield::pipeline {

// Writes report.txt (key-value blocks plus confusion matrices),
// metrics.csv (stage,algorithm,metric,value), and suspicious.csv
// (src_ip,src_port,label) into the directory. Content is a pure function of
// the report, so reruns with the same config are byte-identical.
void write_report(const std::string& dir, const ExperimentReport& report);

}  // namespace sdnshield::pipeline
