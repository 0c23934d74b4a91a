#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "geosep/grid.hpp"

namespace geosep {

/// Unreadable, unwritable or malformed file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stamp carried by every output file.
struct OutputMeta {
  std::string config_hash;
  std::string version;
};

/// `# config_hash=<hex>,version=<v>`
std::string meta_comment(const OutputMeta& meta);
/// Adds "config_hash" and "version" keys.
void stamp(nlohmann::json& j, const OutputMeta& meta);

/// `# manifold=<kind>,n=<dim>,seed=<u64>`, the meta line, then one point per
/// row in canonical coordinates (%.17g).
void write_cloud_csv(std::ostream& out, const PointCloud& cloud, const OutputMeta& meta);
/// Reads what write_cloud_csv writes; provenance becomes File. Throws IoError.
PointCloud read_cloud_csv(std::istream& in);

/// Meta line, header `i,j,w`, one row per stored edge (i < j).
void write_edges_csv(std::ostream& out, const WeightedGrid& g, const OutputMeta& meta);
std::vector<Edge> read_edges_csv(std::istream& in);

/// {N, epsilon, a, C, normalized, kernel_id, metric_scale} plus the stamp.
nlohmann::json grid_sidecar(const WeightedGrid& g, const OutputMeta& meta);
/// Rebuilds a grid from a cloud, its edges and the sidecar. Throws IoError on
/// size mismatches or missing keys.
WeightedGrid grid_from_parts(PointCloud cloud, std::vector<Edge> edges, const nlohmann::json& sidecar);

struct TraceRow {
  double t;
  std::string phi_id;
  double value;
  std::size_t replica;
};

/// Meta line, header `t,phi_id,value,replica`.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows, const OutputMeta& meta);

struct MartingaleReport {
  std::string phi_id;
  std::size_t N = 0;
  double T = 0.0;
  double var_MT = 0.0;
  double qv_bound = 0.0;
  double mean_MT = 0.0;
  double stderr_MT = 0.0;
};

/// {phi_id, N, T, var_MT, qv_bound, mean_MT, stderr}.
nlohmann::json to_json(const MartingaleReport& r);

/// %.17g
std::string format_double(double x);
/// Quotes a CSV field that contains a comma or a quote.
std::string csv_field(const std::string& s);

std::string read_text(const std::filesystem::path& p);
/// Writes through a temporary file and renames it. Throws IoError.
void write_text(const std::filesystem::path& p, const std::string& text);

}  // namespace geosep
