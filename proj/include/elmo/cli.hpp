#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "elmo/control.hpp"
#include "elmo/plant.hpp"
#include "elmo/synthesis.hpp"

namespace elmo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSynthesis = 3;
inline constexpr int kExitMismatch = 4;

std::string version();

enum class Disturbance { tip_torque, tip_force };

/// Tip load ramped up over `ramp`, held until `on_duration`, released, and
/// simulated up to `total`. Times in s, magnitude in N·m or N.
struct ScenarioSpec {
  Disturbance type = Disturbance::tip_torque;
  double magnitude = 4.0;
  double ramp = 5.0;
  double on_duration = 600.0;
  double total = 800.0;
  double dt = 0.05;

  void validate() const;
};

struct ProjectConfig {
  plant::PlantSpec plant;
  synthesis::Weights weights;
  std::string strategy = "all";  // I, II, III, IV or all
  bool per_piezo = false;
  double tau = control::kDefaultTau;
  synthesis::OptimizerOptions optimizer;
  ScenarioSpec scenario;

  void validate() const;
  std::vector<control::Strategy> strategies() const;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// `[section]` headers and `key = value` lines; `#` and `;` start comments.
/// Throws ConfigError naming the source line and key.
ProjectConfig parse_config(std::istream& in, const std::string& source = "config");
ProjectConfig load_config(const std::string& path);

/// One `section.key = value` line per field in a fixed order, every value
/// printed round-trip exact.
std::string canonical(const ProjectConfig& c);

/// FNV-1a of the canonical text without the strategy selection and the seed,
/// which are recorded on their own.
std::uint64_t config_hash(const ProjectConfig& c);
std::string hash_hex(std::uint64_t h);

synthesis::SynthesisProblem make_problem(const ProjectConfig& c, const plant::PlantLfr& lfr, control::Strategy s);

/// Stored design: everything needed to rebuild the controller.
struct Design {
  control::Strategy strategy = control::Strategy::I;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  control::ControllerStructure gains;
  double delta = 0.0;
  double gamma = 0.0;
  double payload_mass = 0.0;
  std::vector<synthesis::ChannelNorm> channel_norms;
};

Design read_design(const std::string& path);

/// Unweighted, normalized closed-loop curves next to their templates:
/// |W_z⁻¹| for hub, payload and tip, |W_C⁻¹| for roll-off.
struct BodeTable {
  std::vector<double> omega;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // one per name
};

inline constexpr int kBodePoints = 400;
BodeTable bode_table(const synthesis::SynthesisProblem& p, const control::ControllerStructure& gains, double delta);

struct Trajectory {
  lti::Signal signal;              // rows: θ arcsec, y mm, M_G, v_i
  std::vector<std::string> names;  // column names after t
  double peak_y_mm = 0.0;
  double steady_y_mm = 0.0;        // mean |y| over the last 10 % of the load window
  double peak_theta_arcsec = 0.0;
};

Trajectory simulate_design(const ProjectConfig& c, const synthesis::SynthesisProblem& p,
                           const control::ControllerStructure& gains, double delta);

struct RunOptions {
  std::string out_dir = ".";
  std::string result;  // simulate: explicit result file instead of <out>/result_<S>.csv
};

int cmd_modes(const ProjectConfig& c, const RunOptions& o, std::ostream& out);
int cmd_synth(const ProjectConfig& c, const RunOptions& o, std::ostream& out);
int cmd_simulate(const ProjectConfig& c, const RunOptions& o, std::ostream& out);

/// Full command line; returns the exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace elmo::cli
