#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <numbers>
#include <sstream>

#include "elmo/cli.hpp"

namespace elmo::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

struct Field {
  std::string section, key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
  bool hashed = true;

  std::string name() const { return section + "." + key; }
};

Field real(std::string sec, std::string key, double& v) {
  return {std::move(sec), std::move(key), [&v](const std::string& s) { v = to_double(s); }, [&v] { return fmt(v); }};
}

Field integer(std::string sec, std::string key, int& v) {
  return {std::move(sec), std::move(key),
          [&v](const std::string& s) {
            const long long x = to_int(s);
            if (x < -1'000'000'000 || x > 1'000'000'000) throw ConfigError("integer out of range: " + s);
            v = static_cast<int>(x);
          },
          [&v] { return std::to_string(v); }};
}

Field flag(std::string sec, std::string key, bool& v) {
  return {std::move(sec), std::move(key), [&v](const std::string& s) { v = to_bool(s); },
          [&v] { return std::string(v ? "true" : "false"); }};
}

// Bound to one config instance; order fixes the canonical text.
std::vector<Field> fields(ProjectConfig& c) {
  auto& h = c.plant.hub;
  auto& m = c.plant.payload;
  auto& s = c.plant.segment;
  auto& z = c.plant.piezo;
  auto& w = c.weights;
  auto& o = c.optimizer;
  auto& sc = c.scenario;
  std::vector<Field> f{
      real("hub", "mass", h.mass),
      real("hub", "inertia", h.inertia),
      real("hub", "attachment_offset", h.attachment_offset),
      real("payload", "mass_lo", m.mass_lo),
      real("payload", "mass_hi", m.mass_hi),
      real("payload", "rotary_inertia", m.rotary_inertia),
      real("segment", "length", s.length),
      real("segment", "mass", s.mass),
      real("segment", "thickness", s.thickness),
      real("segment", "diameter", s.diameter),
      real("segment", "elastic_modulus", s.elastic_modulus),
      real("segment", "modal_damping", s.modal_damping),
      integer("segment", "n_elements", s.n_elements),
      flag("piezo", "enabled", c.plant.with_piezo),
      real("piezo", "length", z.length),
      real("piezo", "thickness", z.thickness),
      real("piezo", "width", z.width),
      real("piezo", "density", z.density),
      real("piezo", "modulus", z.modulus),
      real("piezo", "d31", z.d31),
      real("piezo", "eps33", z.eps33),
      integer("piezo", "host_element_index", z.host_element_index),
      integer("structure", "n_segments", c.plant.n_segments),
      integer("structure", "modes_per_segment", c.plant.modes_per_segment),
      {"structure", "damping",
       [&c](const std::string& v) {
         if (v == "assembled") c.plant.damping = plant::DampingModel::assembled;
         else if (v == "substructure") c.plant.damping = plant::DampingModel::substructure;
         else throw ConfigError("expected assembled or substructure, got '" + v + "'");
       },
       [&c] { return std::string(c.plant.damping == plant::DampingModel::assembled ? "assembled" : "substructure"); }},
      {"weights", "omega_req_hz", [&w](const std::string& v) { w.omega_req = 2 * std::numbers::pi * to_double(v); },
       [&w] { return fmt(w.omega_req / (2 * std::numbers::pi)); }},
      real("weights", "xi_req", w.xi_req),
      real("weights", "eps_ratio", w.eps_ratio),
      real("weights", "rolloff_gain", w.rolloff_gain),
      real("weights", "rolloff_corner", w.rolloff_corner),
      real("weights", "rolloff_span", w.rolloff_span),
      real("weights", "alpha", w.alpha),
      {"controller", "strategy", [&c](const std::string& v) { c.strategy = v; }, [&c] { return c.strategy; }, false},
      real("controller", "tau", c.tau),
      flag("controller", "per_piezo", c.per_piezo),
      integer("optimizer", "starts", o.starts),
      {"optimizer", "seed",
       [&o](const std::string& v) {
         const long long x = to_int(v);
         if (x < 0) throw ConfigError("seed must be non-negative");
         o.seed = static_cast<std::uint64_t>(x);
       },
       [&o] { return std::to_string(o.seed); }, false},
      real("optimizer", "initial_step", o.initial_step),
      real("optimizer", "min_step", o.min_step),
      integer("optimizer", "max_evaluations", o.max_evaluations),
      integer("optimizer", "start_attempts", o.start_attempts),
      real("optimizer", "tie_tolerance", o.tie_tolerance),
      real("optimizer", "hinf_tol", o.hinf_tol),
      {"scenario", "type",
       [&sc](const std::string& v) {
         if (v == "tip_torque") sc.type = Disturbance::tip_torque;
         else if (v == "tip_force") sc.type = Disturbance::tip_force;
         else throw ConfigError("expected tip_torque or tip_force, got '" + v + "'");
       },
       [&sc] { return std::string(sc.type == Disturbance::tip_torque ? "tip_torque" : "tip_force"); }},
      real("scenario", "magnitude", sc.magnitude),
      real("scenario", "ramp", sc.ramp),
      real("scenario", "on_duration", sc.on_duration),
      real("scenario", "total", sc.total),
      real("scenario", "dt", sc.dt),
  };
  return f;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (!std::isfinite(magnitude)) throw ConfigError("scenario.magnitude must be finite");
  if (!(ramp >= 0 && on_duration > 0 && total > 0 && dt > 0)) throw ConfigError("scenario durations must be positive");
  if (ramp > on_duration) throw ConfigError("scenario.ramp exceeds scenario.on_duration");
  if (dt > total / 1000) throw ConfigError("scenario.dt must not exceed scenario.total/1000");
}

void ProjectConfig::validate() const {
  try {
    plant.validate();
    weights.validate();
    optimizer.validate();
    scenario.validate();
    strategies();
    if (!(tau > 0 && std::isfinite(tau))) throw ConfigError("controller.tau must be positive");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<control::Strategy> ProjectConfig::strategies() const {
  using control::Strategy;
  if (strategy == "all") return {Strategy::I, Strategy::II, Strategy::III, Strategy::IV};
  try {
    return {control::strategy_from_string(strategy)};
  } catch (const Error&) {
    throw ConfigError("controller.strategy: expected I, II, III, IV or all, got '" + strategy + "'");
  }
}

ProjectConfig parse_config(std::istream& in, const std::string& source) {
  ProjectConfig c;
  auto table = fields(c);
  std::string section, line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto where = source + ":" + std::to_string(n) + ": ";
    const auto cut = line.find_first_of("#;");
    line = trim(cut == std::string::npos ? line : line.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto full = section.empty() ? key : section + "." + key;
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.name() == full; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + full + "'");
    try {
      it->set(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + full + ": " + e.what());
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

namespace {

std::string render(const ProjectConfig& c, bool hashed_only) {
  ProjectConfig copy = c;
  std::ostringstream os;
  for (const auto& f : fields(copy))
    if (!hashed_only || f.hashed) os << f.name() << " = " << f.get() << "\n";
  return os.str();
}

}  // namespace

std::string canonical(const ProjectConfig& c) { return render(c, false); }

std::uint64_t config_hash(const ProjectConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : render(c, true)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace elmo::cli
