#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "geosep/grid.hpp"
#include "geosep/io.hpp"
#include "geosep/transport.hpp"

namespace geosep {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitGateFailed = 2;
inline constexpr int kExitIoError = 3;

struct KernelConfig {
  std::string id = "hat";
  double scale = 1.0;
  double dilation = 1.0;
};

struct GridConfig {
  /// "iid" or "regular" (regular circle grid; circle only).
  std::string mode = "iid";
  /// Replaces the bandwidth schedule when set.
  std::optional<double> epsilon;
  std::size_t w1_cell_factor = 16;
};

struct WalkConfig {
  double scale = 200.0;
  /// "uniform" or "product".
  std::string step = "uniform";
  /// Canonical coordinates; the manifold's default start when empty.
  std::vector<double> start;
  double allowance = 0.02;
};

struct SepConfig {
  /// "cosine" is (1 + c)/2 with c = cos(theta) on the circle, z on the
  /// sphere and cos(2 pi x_1) on the torus; "constant:<v>" is flat.
  std::string profile = "cosine";
  double allowance = 0.02;
};

/// Parsed experiment file. Unknown keys are rejected.
struct ExperimentConfig {
  std::string manifold = "circle";
  std::vector<std::size_t> sizes;
  KernelConfig kernel;
  std::uint64_t seed = 1;
  std::size_t replicas = 100;
  double t_end = 1.0;
  std::vector<double> record_times;
  std::vector<std::string> observables;
  std::string output_dir = "out";
  /// Spectral truncation of the oracle.
  int truncation = 64;
  GridConfig grid;
  WalkConfig walk;
  SepConfig sep;
};

/// Throws ConfigError when an invariant fails: sizes positive, strictly
/// increasing and dyadic, replicas >= 1, record times increasing within
/// [0, t_end], known manifold, kernel, observables and modes.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& p);
void validate(const ExperimentConfig& c);

/// Canonical JSON without output_dir (so relocating outputs keeps the hash).
nlohmann::json to_json(const ExperimentConfig& c);
/// FNV-1a 64 of the canonical JSON, 16 hex digits.
std::string config_hash(const ExperimentConfig& c);
OutputMeta output_meta(const ExperimentConfig& c);

/// Record times with 0 and t_end added if missing; 0, 0.1 t_end, ..., t_end
/// when none are given.
std::vector<double> effective_record_times(const ExperimentConfig& c);
/// Configured observables, or the first three non-constant library functions.
std::vector<TestFunction> effective_observables(const ExperimentConfig& c);
/// Initial density profile named by sep.profile.
std::function<double(const Point&)> initial_profile(const ExperimentConfig& c);

struct GridRow {
  std::size_t N = 0;
  W1Estimate w1;
  WeightedGrid grid;
  Connectivity connectivity;
};

/// Clouds, W1 estimates, bandwidths and normalized grids for every size.
std::vector<GridRow> build_grids(const ExperimentConfig& c, std::ostream& log);

/// Each command writes its files under output_dir plus `<command>_status.json`
/// and returns an exit code. IoError and ConfigError propagate.
int cmd_grid(const ExperimentConfig& c, std::ostream& log);
int cmd_laplacian(const ExperimentConfig& c, std::ostream& log);
int cmd_walk(const ExperimentConfig& c, std::ostream& log);
int cmd_sep(const ExperimentConfig& c, std::ostream& log);
/// Collects the status files into report.json.
int cmd_report(const ExperimentConfig& c, std::ostream& log);

/// Entry point of the `geosep` tool.
int cli_main(int argc, char** argv);

}  // namespace geosep
