#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "sdnshield/flowkit.hpp"

namespace sdnshield::netgraph {

// Node-level view of the traffic: one node per endpoint that sends or
// receives flows, features from its ActivityFlow, adjacency from flow
// presence. Nodes are ordered by endpoint, so a given set of flows always
// produces the same matrix layout.
struct TrafficGraph {
  std::vector<flowkit::ActivityFlow> nodes;
  Eigen::MatrixXd x;          // n x feature_count
  Eigen::MatrixXd adjacency;  // n x n, symmetric, zero diagonal

  int size() const { return static_cast<int>(nodes.size()); }
  int index_of(const flowkit::Endpoint& e) const;  // -1 when absent
  std::vector<int> labels_as_int() const;
};

// Builds the graph over the given activity flows (real and synthesized).
// Every endpoint referenced by a basic flow must have a node; a missing one
// is a hard error naming the endpoint. Edges are binary: weight 1 when any
// basic flow connects the two endpoints in either direction.
TrafficGraph build_graph(std::vector<flowkit::ActivityFlow> nodes,
                         std::span<const flowkit::BasicFlow> basic);

// Self-loop renormalization: with A~ = A + I and D~ its degree matrix,
// returns D~^{-1/2} A~ D~^{-1/2}. Requires a square, symmetric, non-negative
// A with zero diagonal.
Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& a);

struct Hypergraph {
  std::vector<std::vector<int>> hyperedges;  // node index sets, size >= 2
};

enum class HyperedgeGrouping { kByDestination };

// kByDestination: one hyperedge per destination endpoint, containing the
// destination's node and every source node with a basic flow into it.
// Hyperedges with fewer than two members are dropped.
Hypergraph build_hypergraph(const TrafficGraph& graph,
                            std::span<const flowkit::BasicFlow> basic,
                            HyperedgeGrouping grouping);

// Clique-lite expansion of a hypergraph into a plain weighted adjacency.
// Per hyperedge e: find the pair of member nodes with maximum Euclidean
// distance in feature space (ties resolved to the lexicographically
// smallest index pair), connect that pair, and connect each of the two to
// every other member; each added edge carries weight 1/(2|e|-3).
// Contributions from different hyperedges add; the result is symmetric with
// zero diagonal.
Eigen::MatrixXd hypergraph_expand(const Hypergraph& h, const Eigen::MatrixXd& x);

// Debug/test dump: edge list `i j weight` (i < j, in index order) and a node
// table CSV matching the activity-flow export.
void write_graph_dump(const std::string& edge_path,
                      const std::string& node_path, const TrafficGraph& graph);

}  // namespace sdnshield::netgraph
