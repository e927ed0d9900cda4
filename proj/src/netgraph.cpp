#include "sdnshield/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "sdnshield/errors.hpp"
#include "sdnshield/flow_csv.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::netgraph {

int TrafficGraph::index_of(const flowkit::Endpoint& e) const {
  auto it = std::lower_bound(
      nodes.begin(), nodes.end(), e,
      [](const flowkit::ActivityFlow& f, const flowkit::Endpoint& ep) {
        return f.source < ep;
      });
  if (it == nodes.end() || !(it->source == e)) return -1;
  return static_cast<int>(it - nodes.begin());
}

std::vector<int> TrafficGraph::labels_as_int() const {
  std::vector<int> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out[i] = static_cast<int>(nodes[i].label);
  return out;
}

TrafficGraph build_graph(std::vector<flowkit::ActivityFlow> nodes,
                         std::span<const flowkit::BasicFlow> basic) {
  TrafficGraph g;
  g.nodes = std::move(nodes);
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const flowkit::ActivityFlow& a, const flowkit::ActivityFlow& b) {
              return a.source < b.source;
            });
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (g.nodes[i].source == g.nodes[i - 1].source)
      throw UserError("duplicate graph node " + g.nodes[i].source.str());

  const int n = g.size();
  g.x.resize(n, flowkit::kFeatureCount);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < flowkit::kFeatureCount; ++f)
      g.x(i, f) = g.nodes[i].features[f];

  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const flowkit::BasicFlow& f : basic) {
    const int i = g.index_of(f.key.src);
    if (i < 0)
      throw UserError("flow endpoint " + f.key.src.str() + " has no node");
    const int j = g.index_of(f.key.dst);
    if (j < 0)
      throw UserError("flow endpoint " + f.key.dst.str() + " has no node");
    if (i == j) continue;  // self-talk carries no edge
    g.adjacency(i, j) = 1.0;
    g.adjacency(j, i) = 1.0;
  }
  return g;
}

Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("normalized_adjacency: matrix not square");
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i, i) != 0.0)
      throw std::invalid_argument("normalized_adjacency: nonzero diagonal");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (a(i, j) != a(j, i))
        throw std::invalid_argument("normalized_adjacency: not symmetric");
      if (a(i, j) < 0.0)
        throw std::invalid_argument("normalized_adjacency: negative weight");
    }
  }
  Eigen::MatrixXd tilde = a + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd d_inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d_inv_sqrt(i) = 1.0 / std::sqrt(tilde.row(i).sum());
  return d_inv_sqrt.asDiagonal() * tilde * d_inv_sqrt.asDiagonal();
}

Hypergraph build_hypergraph(const TrafficGraph& graph,
                            std::span<const flowkit::BasicFlow> basic,
                            HyperedgeGrouping grouping) {
  if (grouping != HyperedgeGrouping::kByDestination)
    throw std::invalid_argument("unknown hyperedge grouping");

  std::map<flowkit::Endpoint, std::set<int>> by_dest;
  for (const flowkit::BasicFlow& f : basic) {
    const int i = graph.index_of(f.key.src);
    const int j = graph.index_of(f.key.dst);
    if (i < 0 || j < 0)
      throw UserError("hypergraph: flow endpoint without node");
    by_dest[f.key.dst].insert(i);
    by_dest[f.key.dst].insert(j);
  }

  Hypergraph h;
  for (auto& [dest, members] : by_dest) {
    if (members.size() < 2) continue;
    h.hyperedges.emplace_back(members.begin(), members.end());
  }
  return h;
}

Eigen::MatrixXd hypergraph_expand(const Hypergraph& h, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const std::vector<int>& edge : h.hyperedges) {
    if (edge.size() < 2)
      throw std::invalid_argument("hypergraph_expand: hyperedge below size 2");
    for (int idx : edge)
      if (idx < 0 || idx >= n)
        throw std::invalid_argument("hypergraph_expand: index out of range");

    // Farthest pair in feature space; the strict > under an i<j scan keeps
    // the lexicographically smallest pair on distance ties.
    int best_u = edge[0];
    int best_v = edge[1];
    double best_d = -1.0;
    for (std::size_t i = 0; i + 1 < edge.size(); ++i) {
      for (std::size_t j = i + 1; j < edge.size(); ++j) {
        const double d = (x.row(edge[i]) - x.row(edge[j])).norm();
        if (d > best_d) {
          best_d = d;
          best_u = edge[i];
          best_v = edge[j];
        }
      }
    }

    const double w = 1.0 / (2.0 * static_cast<double>(edge.size()) - 3.0);
    auto add = [&](int u, int v) {
      if (u == v) return;
      a(u, v) += w;
      a(v, u) += w;
    };
    add(best_u, best_v);
    for (int m : edge) {
      if (m == best_u || m == best_v) continue;
      add(best_u, m);
      add(best_v, m);
    }
  }
  return a;
}

void write_graph_dump(const std::string& edge_path,
                      const std::string& node_path, const TrafficGraph& graph) {
  std::ofstream edges(edge_path);
  if (!edges) throw UserError("cannot write '" + edge_path + "'");
  const int n = graph.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (graph.adjacency(i, j) != 0.0)
        edges << i << ' ' << j << ' ' << format_double(graph.adjacency(i, j))
              << "\n";
  if (!edges) throw UserError("write failed for '" + edge_path + "'");
  flowkit::write_activity_csv(node_path, graph.nodes);
}

}  // namespace sdnshield::netgraph
