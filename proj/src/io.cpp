#include "netreg/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "netreg/errors.hpp"

namespace netreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string t = s.substr(b, e - b + 1);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool blank(const std::string& line) { return trim(line).empty() || trim(line)[0] == '#'; }

long long to_int(const std::string& s, std::size_t line, const char* col) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("line " + std::to_string(line) + ": column " + col + " is not an integer: '" + s + "'");
}

double to_double(const std::string& s, std::size_t line, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("line " + std::to_string(line) + ": column " + col + " is not a number: '" + s + "'");
}

std::ifstream open(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  return f;
}

}  // namespace

std::vector<EdgeRecord> read_edges_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line)) {
      header = split(line);
      break;
    }
  }
  if (header.size() < 3 || header[0] != "group_id" || header[1] != "src" || header[2] != "dst") {
    throw InputError("edge file header must start with group_id,src,dst");
  }
  const bool weighted = header.size() >= 4 && header[3] == "weight";
  std::vector<EdgeRecord> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto f = split(line);
    if (f.size() < (weighted ? 4u : 3u)) {
      throw InputError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(weighted ? 4 : 3) + " fields");
    }
    EdgeRecord e{to_int(f[0], lineno, "group_id"), to_int(f[1], lineno, "src"),
                 to_int(f[2], lineno, "dst"), weighted ? to_double(f[3], lineno, "weight") : 1.0};
    edges.push_back(e);
  }
  return edges;
}

std::vector<EdgeRecord> read_edges_csv(const std::string& path) {
  auto f = open(path);
  return read_edges_csv(f);
}

NodeTable read_nodes_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line)) {
      header = split(line);
      break;
    }
  }
  if (header.size() < 2 || header[0] != "group_id" || header[1] != "node_id") {
    throw InputError("node file header must start with group_id,node_id");
  }
  std::vector<std::size_t> x1c, x2c;
  std::ptrdiff_t yc = -1;
  for (std::size_t j = 2; j < header.size(); ++j) {
    const std::string& h = header[j];
    if (h.rfind("x1", 0) == 0) x1c.push_back(j);
    else if (h.rfind("x2", 0) == 0) x2c.push_back(j);
    else if (h == "y") yc = static_cast<std::ptrdiff_t>(j);
    else throw InputError("unknown node column '" + h + "'");
  }

  struct Row {
    long long g, id;
    std::vector<double> x1, x2;
    double y;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw InputError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    }
    Row r{to_int(f[0], lineno, "group_id"), to_int(f[1], lineno, "node_id"), {}, {}, 0.0};
    for (auto j : x1c) r.x1.push_back(to_double(f[j], lineno, header[j]));
    for (auto j : x2c) r.x2.push_back(to_double(f[j], lineno, header[j]));
    if (yc >= 0) r.y = to_double(f[static_cast<std::size_t>(yc)], lineno, "y");
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return std::tie(a.g, a.id) < std::tie(b.g, b.id); });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].g == rows[i - 1].g && rows[i].id == rows[i - 1].id) {
      throw InputError("duplicate node (" + std::to_string(rows[i].g) + ", " +
                       std::to_string(rows[i].id) + ")");
    }
  }
  NodeTable t;
  const Index n = static_cast<Index>(rows.size());
  t.has_y = yc >= 0;
  t.data.y.resize(n);
  t.data.x1.resize(n, static_cast<Index>(x1c.size()));
  t.data.x2.resize(n, static_cast<Index>(x2c.size()));
  for (auto j : x1c) t.data.x1_names.push_back(header[j]);
  for (auto j : x2c) t.data.x2_names.push_back(header[j]);
  for (Index i = 0; i < n; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    t.ids.emplace_back(r.g, r.id);
    for (std::size_t j = 0; j < r.x1.size(); ++j) t.data.x1(i, static_cast<Index>(j)) = r.x1[j];
    for (std::size_t j = 0; j < r.x2.size(); ++j) t.data.x2(i, static_cast<Index>(j)) = r.x2[j];
    t.data.y(i) = r.y;
  }
  return t;
}

NodeTable read_nodes_csv(const std::string& path) {
  auto f = open(path);
  return read_nodes_csv(f);
}

GroupedNetwork assemble_network(const std::vector<EdgeRecord>& edges,
                                const std::vector<std::pair<long long, long long>>& nodes,
                                MMode m_mode) {
  std::vector<std::pair<long long, long long>> ids = nodes;
  if (ids.empty()) {
    for (const auto& e : edges) {
      ids.emplace_back(e.group, e.src);
      ids.emplace_back(e.group, e.dst);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  } else if (!std::is_sorted(ids.begin(), ids.end())) {
    throw InputError("node ids must be sorted by (group_id, node_id)");
  }
  if (ids.empty()) throw InputError("network has no nodes");

  // Group boundaries and within-group positions.
  std::vector<Index> sizes;
  std::map<std::pair<long long, long long>, std::pair<std::size_t, Index>> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i == 0 || ids[i].first != ids[i - 1].first) sizes.push_back(0);
    pos[ids[i]] = {sizes.size() - 1, sizes.back()};
    ++sizes.back();
  }
  std::vector<MatrixXd> blocks;
  for (Index m : sizes) blocks.push_back(MatrixXd::Zero(m, m));
  for (const auto& e : edges) {
    const auto s = pos.find({e.group, e.src});
    const auto d = pos.find({e.group, e.dst});
    if (s == pos.end() || d == pos.end()) {
      throw InputError("edge (" + std::to_string(e.group) + ": " + std::to_string(e.src) + " -> " +
                       std::to_string(e.dst) + ") references an unknown node");
    }
    if (e.src == e.dst) {
      throw InputError("self-link at node " + std::to_string(e.src) + " in group " +
                       std::to_string(e.group));
    }
    blocks[s->second.first](s->second.second, d->second.second) += e.weight;
  }
  BlockDiagonal W(std::move(blocks));
  return m_mode == MMode::RowNormalized ? GroupedNetwork::with_row_normalized_m(std::move(W))
                                        : GroupedNetwork::with_m_equal_w(std::move(W));
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_edges_csv(std::ostream& os, const GroupedNetwork& net) {
  os << "group_id,src,dst,weight\n";
  for (std::size_t r = 0; r < net.W.block_count(); ++r) {
    const MatrixXd& b = net.W.block(r);
    for (Index i = 0; i < b.rows(); ++i) {
      for (Index j = 0; j < b.cols(); ++j) {
        if (b(i, j) != 0.0) os << r << "," << i << "," << j << "," << num(b(i, j)) << "\n";
      }
    }
  }
}

void write_nodes_csv(std::ostream& os, const GroupedNetwork& net, const PanelData& data) {
  os << "group_id,node_id";
  for (Index j = 0; j < data.x1.cols(); ++j) os << ",x1_" << j + 1;
  for (Index j = 0; j < data.x2.cols(); ++j) os << ",x2_" << j + 1;
  os << ",y\n";
  for (std::size_t r = 0; r < net.W.block_count(); ++r) {
    const Index off = net.W.offset(r);
    for (Index i = 0; i < net.group_sizes[r]; ++i) {
      os << r << "," << i;
      for (Index j = 0; j < data.x1.cols(); ++j) os << "," << num(data.x1(off + i, j));
      for (Index j = 0; j < data.x2.cols(); ++j) os << "," << num(data.x2(off + i, j));
      os << "," << num(data.y(off + i)) << "\n";
    }
  }
}

}  // namespace netreg
