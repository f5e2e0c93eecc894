#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "netreg/estimation.hpp"
#include "netreg/graphs.hpp"

namespace netreg {

struct EdgeRecord {
  long long group;
  long long src;
  long long dst;
  double weight;
};

/// Edge list with header: group_id,src,dst,weight (weight optional, default 1).
std::vector<EdgeRecord> read_edges_csv(std::istream& in);
std::vector<EdgeRecord> read_edges_csv(const std::string& path);

/// Node table with header: group_id,node_id, then columns whose names start
/// with "x1" (own regressors) or "x2" (contextual regressors), and y.
/// Rows are sorted by (group_id, node_id).
struct NodeTable {
  std::vector<std::pair<long long, long long>> ids;
  PanelData data;
  bool has_y = false;
};
NodeTable read_nodes_csv(std::istream& in);
NodeTable read_nodes_csv(const std::string& path);

enum class MMode { RowNormalized, SameAsW };

/// Assembles block-diagonal W (and M) with nodes ordered by (group_id,
/// node_id). When `nodes` is empty the node set is taken from the edges.
/// Duplicate edges add their weights; self-links and edges to unknown nodes
/// are rejected.
GroupedNetwork assemble_network(const std::vector<EdgeRecord>& edges,
                                const std::vector<std::pair<long long, long long>>& nodes,
                                MMode m_mode = MMode::RowNormalized);

void write_edges_csv(std::ostream& os, const GroupedNetwork& net);
void write_nodes_csv(std::ostream& os, const GroupedNetwork& net, const PanelData& data);

}  // namespace netreg
