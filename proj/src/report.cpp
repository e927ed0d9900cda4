#include "sdnshield/report.hpp"

#include <fstream>

#include "sdnshield/errors.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::pipeline {

namespace {

void print_confusion(std::ofstream& out, const Metrics& m,
                     const std::vector<std::string>& class_names) {
  out << "confusion matrix (rows = truth, cols = predicted):\n";
  for (std::size_t c = 0; c < m.confusion.size(); ++c) {
    out << "  " << class_names[c] << ":";
    for (long long v : m.confusion[c]) out << ' ' << v;
    out << "\n";
  }
}

void metric_rows(std::ofstream& csv, const std::string& stage,
                 const std::string& algorithm, const Metrics& m,
                 const std::vector<std::string>& class_names) {
  csv << stage << ',' << algorithm << ",accuracy," << format_double(m.accuracy)
      << "\n";
  csv << stage << ',' << algorithm << ",f1," << format_double(m.f1) << "\n";
  for (std::size_t c = 0; c < m.per_class_f1.size(); ++c)
    csv << stage << ',' << algorithm << ",f1_" << class_names[c] << ','
        << format_double(m.per_class_f1[c]) << "\n";
}

}  // namespace

void write_report(const std::string& dir, const ExperimentReport& report) {
  const std::string txt_path = dir + "/report.txt";
  std::ofstream txt(txt_path);
  if (!txt) throw UserError("cannot write '" + txt_path + "'");

  txt << "== run configuration ==\n";
  for (const auto& [key, value] : report.config_echo)
    txt << key << " = " << value << "\n";
  txt << "\n== dataset ==\n";
  txt << "packets = " << report.packet_count << "\n";
  txt << "basic_flows = " << report.basic_flow_count << "\n";
  txt << "nodes = " << report.node_count << "\n";
  txt << "edges = " << report.edge_count << "\n";
  txt << "noflow_nodes = " << report.noflow_count << "\n";

  const std::vector<std::string> binary_names = {"benign", "attack"};
  txt << "\n== layer 1: detection (gcn) ==\n";
  txt << "train_nodes = " << report.detection.split.train_count() << "\n";
  txt << "test_nodes = " << report.detection.split.test_count() << "\n";
  txt << "accuracy = " << format_double(report.detection.metrics.accuracy) << "\n";
  txt << "f1 = " << format_double(report.detection.metrics.f1) << "\n";
  print_confusion(txt, report.detection.metrics, binary_names);
  if (!report.detection.loss_history.empty())
    txt << "final_training_loss = "
        << format_double(report.detection.loss_history.back()) << "\n";

  if (report.rf_baseline) {
    txt << "\n== layer 1: detection (random forest baseline) ==\n";
    txt << "accuracy = " << format_double(report.rf_baseline->metrics.accuracy)
        << "\n";
    txt << "f1 = " << format_double(report.rf_baseline->metrics.f1) << "\n";
    print_confusion(txt, report.rf_baseline->metrics, binary_names);
  }

  std::vector<std::string> id_names;
  if (report.identification) {
    const IdentifyResult& id = *report.identification;
    for (flowkit::Label l : id.class_universe)
      id_names.push_back(flowkit::label_name(l));
    txt << "\n== layer 2: identification (gcn) ==\n";
    txt << "classified_nodes = " << id.node_indices.size() << "\n";
    txt << "classes =";
    for (const std::string& n : id_names) txt << ' ' << n;
    txt << "\n";
    if (id.degenerate) {
      txt << "degenerate = true (constant labels, metrics skipped)\n";
    } else {
      txt << "accuracy = " << format_double(id.metrics.accuracy) << "\n";
      txt << "macro_f1 = " << format_double(id.metrics.f1) << "\n";
      for (std::size_t c = 0; c < id.metrics.per_class_f1.size(); ++c)
        txt << "f1_" << id_names[c] << " = "
            << format_double(id.metrics.per_class_f1[c]) << "\n";
      print_confusion(txt, id.metrics, id_names);
    }
  }

  if (!report.size_rows.empty()) {
    txt << "\n== detection f1 by training size ==\n";
    for (const SizeRow& row : report.size_rows) {
      txt << "size " << row.size << ": ";
      if (row.skipped)
        txt << "skipped (" << row.warning << ")\n";
      else
        txt << "f1 = " << format_double(row.metrics.f1)
            << ", accuracy = " << format_double(row.metrics.accuracy) << "\n";
    }
  }

  txt << "\n== suspicious nodes = " << report.suspicious.size() << " ==\n";
  txt << "(full list in suspicious.csv)\n";
  if (!report.warnings.empty()) {
    txt << "\n== warnings ==\n";
    for (const std::string& w : report.warnings) txt << w << "\n";
  }
  if (!txt) throw UserError("write failed for '" + txt_path + "'");

  const std::string csv_path = dir + "/metrics.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw UserError("cannot write '" + csv_path + "'");
  csv << "stage,algorithm,metric,value\n";
  metric_rows(csv, "detect", "gcn", report.detection.metrics, binary_names);
  if (report.rf_baseline)
    metric_rows(csv, "detect", "rf", report.rf_baseline->metrics, binary_names);
  if (report.identification && !report.identification->degenerate)
    metric_rows(csv, "identify", "gcn", report.identification->metrics,
                id_names);
  for (const SizeRow& row : report.size_rows) {
    if (row.skipped) continue;
    csv << "detect_size_" << row.size << ",gcn,f1,"
        << format_double(row.metrics.f1) << "\n";
    csv << "detect_size_" << row.size << ",gcn,accuracy,"
        << format_double(row.metrics.accuracy) << "\n";
  }
  if (!csv) throw UserError("write failed for '" + csv_path + "'");

  const std::string sus_path = dir + "/suspicious.csv";
  std::ofstream sus(sus_path);
  if (!sus) throw UserError("cannot write '" + sus_path + "'");
  sus << "src_ip,src_port,label\n";
  for (const auto& [endpoint, label] : report.suspicious)
    sus << endpoint.ip << ',' << endpoint.port << ','
        << flowkit::label_name(label) << "\n";
  if (!sus) throw UserError("write failed for '" + sus_path + "'");
}

}  // namespace sdnshield::pipeline
