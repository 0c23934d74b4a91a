#include "geosep/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace geosep {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw IoError("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw IoError("bad number '" + s + "'");
  }
}

template <class T>
T parse_unsigned(const std::string& s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("bad integer '" + s + "'");
  return v;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string meta_comment(const OutputMeta& meta) {
  return "# config_hash=" + meta.config_hash + ",version=" + meta.version;
}

void stamp(nlohmann::json& j, const OutputMeta& meta) {
  j["config_hash"] = meta.config_hash;
  j["version"] = meta.version;
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud, const OutputMeta& meta) {
  const Manifold& m = cloud.manifold;
  out << "# manifold=" << m.name() << ",n=" << m.dim() << ",seed=" << cloud.seed << '\n';
  out << meta_comment(meta) << '\n';
  const int cd = m.coord_dim();
  for (const auto& p : cloud.points) {
    for (int c = 0; c < cd; ++c) {
      if (c) out << ',';
      out << format_double(p.x[static_cast<std::size_t>(c)]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write_cloud_csv: stream failure");
}

PointCloud read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# manifold=", 0) != 0)
    throw IoError("read_cloud_csv: missing '# manifold=' header");
  PointCloud cloud;
  cloud.provenance = CloudProvenance::File;
  int dim = -1;
  std::string kind;
  for (const auto& field : split(line.substr(2), ',')) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw IoError("read_cloud_csv: bad header field '" + field + "'");
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "manifold") kind = value;
    else if (key == "n") dim = parse_unsigned<int>(value);
    else if (key == "seed") cloud.seed = parse_unsigned<std::uint64_t>(value);
  }
  try {
    cloud.manifold = Manifold::parse(kind);
  } catch (const std::exception& e) {
    throw IoError(std::string("read_cloud_csv: ") + e.what());
  }
  if (dim != cloud.manifold.dim()) throw IoError("read_cloud_csv: dimension does not match manifold");
  const auto cd = static_cast<std::size_t>(cloud.manifold.coord_dim());
  while (next_data_line(in, line)) {
    auto cols = split(line, ',');
    if (cols.size() != cd) throw IoError("read_cloud_csv: expected " + std::to_string(cd) + " columns");
    Point p;
    for (std::size_t c = 0; c < cd; ++c) p.x[c] = parse_double(cols[c]);
    if (!cloud.manifold.contains(p, 1e-9)) throw IoError("read_cloud_csv: point off the manifold");
    cloud.points.push_back(p);
  }
  return cloud;
}

void write_edges_csv(std::ostream& out, const WeightedGrid& g, const OutputMeta& meta) {
  out << meta_comment(meta) << "\ni,j,w\n";
  for (const auto& e : g.edges) out << e.i << ',' << e.j << ',' << format_double(e.w) << '\n';
  if (!out) throw IoError("write_edges_csv: stream failure");
}

std::vector<Edge> read_edges_csv(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  bool header = false;
  while (next_data_line(in, line)) {
    if (!header) {
      if (line != "i,j,w") throw IoError("read_edges_csv: expected header 'i,j,w'");
      header = true;
      continue;
    }
    auto cols = split(line, ',');
    if (cols.size() != 3) throw IoError("read_edges_csv: expected 3 columns");
    Edge e{parse_unsigned<std::uint32_t>(cols[0]), parse_unsigned<std::uint32_t>(cols[1]),
           parse_double(cols[2])};
    if (e.i >= e.j) throw IoError("read_edges_csv: edge with i >= j");
    edges.push_back(e);
  }
  if (!header) throw IoError("read_edges_csv: empty file");
  return edges;
}

nlohmann::json grid_sidecar(const WeightedGrid& g, const OutputMeta& meta) {
  nlohmann::json j;
  j["N"] = g.size();
  j["epsilon"] = g.epsilon;
  j["a"] = g.a_scaling;
  j["C"] = g.limiting_constant;
  j["normalized"] = g.normalized;
  j["kernel_id"] = g.kernel_id;
  j["metric_scale"] = g.metric_scale;
  stamp(j, meta);
  return j;
}

WeightedGrid grid_from_parts(PointCloud cloud, std::vector<Edge> edges, const nlohmann::json& sidecar) {
  WeightedGrid g;
  try {
    if (sidecar.at("N").get<std::size_t>() != cloud.size())
      throw IoError("grid sidecar: N does not match the cloud");
    g.epsilon = sidecar.at("epsilon").get<double>();
    g.a_scaling = sidecar.at("a").get<double>();
    g.limiting_constant = sidecar.at("C").get<double>();
    g.normalized = sidecar.at("normalized").get<bool>();
    g.kernel_id = sidecar.at("kernel_id").get<std::string>();
    g.metric_scale = sidecar.value("metric_scale", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("grid sidecar: ") + e.what());
  }
  for (const auto& e : edges)
    if (e.j >= cloud.size()) throw IoError("grid edges: index out of range");
  g.cloud = std::move(cloud);
  g.edges = std::move(edges);
  return g;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows, const OutputMeta& meta) {
  out << meta_comment(meta) << "\nt,phi_id,value,replica\n";
  for (const auto& r : rows)
    out << format_double(r.t) << ',' << csv_field(r.phi_id) << ',' << format_double(r.value) << ',' << r.replica
        << '\n';
  if (!out) throw IoError("write_trace_csv: stream failure");
}

nlohmann::json to_json(const MartingaleReport& r) {
  return {{"phi_id", r.phi_id}, {"N", r.N},           {"T", r.T},         {"var_MT", r.var_MT},
          {"qv_bound", r.qv_bound}, {"mean_MT", r.mean_MT}, {"stderr", r.stderr_MT}};
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed for " + p.string());
  }
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw IoError("cannot rename onto " + p.string() + ": " + ec.message());
}

}  // namespace geosep
