#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "elmo/cli.hpp"
#include "svg.hpp"

namespace elmo::cli {

namespace fs = std::filesystem;
using control::Strategy;

namespace {

constexpr double kArcsecPerRad = 180.0 / std::numbers::pi * 3600.0;

std::string fmt(const char* spec, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
std::string g10(double v) { return fmt("%.10g", v); }
std::string g17(double v) { return fmt("%.17g", v); }

std::string header(const ProjectConfig& c, std::uint64_t seed, const std::string& what) {
  std::ostringstream os;
  os << "# elmo " << version() << "\n# " << what << "\n# config_hash " << hash_hex(config_hash(c)) << "\n# seed "
     << seed << "\n";
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

fs::path out_dir(const RunOptions& o) {
  fs::path d(o.out_dir);
  fs::create_directories(d);
  return d;
}

bool has(const Labels& l, const std::string& s) { return std::find(l.begin(), l.end(), s) != l.end(); }

}  // namespace

std::string version() { return ELMO_VERSION; }

synthesis::SynthesisProblem make_problem(const ProjectConfig& c, const plant::PlantLfr& lfr, Strategy s) {
  auto p = synthesis::make_problem(lfr, s, c.per_piezo);
  p.structure.tau = c.tau;
  p.weights = c.weights;
  p.options = c.optimizer;
  return p;
}

// ---------------------------------------------------------------- curves

BodeTable bode_table(const synthesis::SynthesisProblem& p, const control::ControllerStructure& gains, double delta) {
  using synthesis::Channel;
  BodeTable t;
  t.omega = lti::logspace(-3, 2, kBodePoints);
  const auto& w = p.weights;
  const double eps = w.eps_ratio * w.omega_req, wc = w.rolloff_corner * w.omega_req;
  std::vector<double> tz, tc;
  for (double om : t.omega) {
    const std::complex<double> s(0.0, om);
    tz.push_back(std::abs((s + eps) * (s + eps) / (s * s + 2.0 * w.xi_req * w.omega_req * s + w.omega_req * w.omega_req)));
    tc.push_back(std::abs((1.0 + s / (w.rolloff_span * wc)) / (w.rolloff_gain * (1.0 + s / wc))));
  }
  t.names = {"template_z", "template_c"};
  t.columns = {tz, tc};

  const bool tip_side = std::any_of(p.channels.begin(), p.channels.end(), [](Channel c) {
    return c == Channel::tip || c == Channel::rolloff;
  });
  Labels ins{plant::port::kHubTorque};
  if (tip_side) ins.push_back(plant::port::kTipForce);
  Labels outs{plant::port::kThetaDd, plant::port::kTorque};
  if (has(p.plant.output_labels(), plant::port::kTipAccRel)) outs.push_back(plant::port::kTipAccRel);
  const auto loop = lti::transfer_select(synthesis::closed_loop(p, gains, delta, outs), ins, outs);
  const auto resp = lti::freq_response(loop, t.omega);
  const double j = synthesis::compute_scalings(p).hub_inertia_hf, d = p.tip_distance;

  for (Channel c : p.channels) {
    if (c == Channel::parameter) continue;
    int row = 0, col = 0;
    double scale = 1.0;
    switch (c) {
      case Channel::hub: row = 0, col = 0, scale = j; break;
      case Channel::payload: row = 2, col = 0, scale = j / d; break;
      case Channel::tip: row = 0, col = 1, scale = j / d; break;
      case Channel::rolloff: row = 1, col = 1, scale = 1.0 / d; break;
      case Channel::parameter: break;
    }
    std::vector<double> v;
    for (const auto& g : resp) v.push_back(scale * std::abs(g(row, col)));
    t.names.push_back(synthesis::to_string(c));
    t.columns.push_back(std::move(v));
  }
  return t;
}

// ------------------------------------------------------------ simulation

Trajectory simulate_design(const ProjectConfig& c, const synthesis::SynthesisProblem& p,
                           const control::ControllerStructure& gains, double delta) {
  const auto& sc = c.scenario;
  const std::string in = sc.type == Disturbance::tip_torque ? plant::port::kTipTorque : plant::port::kTipForce;
  const bool with_y = has(p.plant.output_labels(), plant::port::kTipDef);
  const auto k = control::make_controller(gains);
  Labels outs{plant::port::kTheta, plant::port::kTorque};
  if (with_y) outs.push_back(plant::port::kTipDef);
  std::vector<int> v_rows;  // -1: patch not driven by this strategy
  for (int i = 1; i <= gains.n_piezo; ++i) {
    const auto v = control::port::voltage(i);
    v_rows.push_back(has(k.output_labels(), v) ? static_cast<int>(outs.size()) : -1);
    if (v_rows.back() >= 0) outs.push_back(v);
  }
  const auto loop = lti::transfer_select(synthesis::closed_loop(p, gains, delta, outs), {in}, outs);

  const int n = static_cast<int>(std::llround(sc.total / sc.dt)) + 1;
  lti::Signal u{0.0, sc.dt, Matrix::Zero(1, n)};
  for (int i = 0; i < n; ++i) {
    const double t = u.time(i);
    double f = 0.0;
    if (t < sc.ramp) f = t / sc.ramp;
    else if (t <= sc.on_duration) f = 1.0;
    else if (sc.ramp > 0 && t < sc.on_duration + sc.ramp) f = 1.0 - (t - sc.on_duration) / sc.ramp;
    u.values(0, i) = sc.magnitude * f;
  }
  const auto y = lti::simulate(loop, u);

  Trajectory tr;
  tr.names = {"theta_arcsec", "y_mm", "M_G_Nm"};
  for (int i = 1; i <= gains.n_piezo; ++i) tr.names.push_back(control::port::voltage(i) + "_V");
  tr.signal = {0.0, sc.dt, Matrix::Zero(static_cast<Eigen::Index>(tr.names.size()), n)};
  tr.signal.values.row(0) = y.values.row(0) * kArcsecPerRad;
  if (with_y) tr.signal.values.row(1) = y.values.row(2) * 1e3;
  tr.signal.values.row(2) = y.values.row(1);
  for (std::size_t i = 0; i < v_rows.size(); ++i)
    if (v_rows[i] >= 0) tr.signal.values.row(3 + static_cast<Eigen::Index>(i)) = y.values.row(v_rows[i]);

  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const double t = u.time(i), ay = std::abs(tr.signal.values(1, i));
    tr.peak_y_mm = std::max(tr.peak_y_mm, ay);
    tr.peak_theta_arcsec = std::max(tr.peak_theta_arcsec, std::abs(tr.signal.values(0, i)));
    if (t >= 0.9 * sc.on_duration && t <= sc.on_duration) {
      sum += ay;
      ++count;
    }
  }
  tr.steady_y_mm = count ? sum / count : 0.0;
  return tr;
}

// ---------------------------------------------------------------- design

namespace {

std::string design_csv(const ProjectConfig& c, const synthesis::SynthesisResult& r, Strategy s) {
  std::ostringstream os;
  os << header(c, c.optimizer.seed, "synthesis result") << "# strategy " << control::to_string(s) << "\nkey,value\n";
  os << "strategy," << control::to_string(s) << "\n";
  os << "gamma," << g17(r.gamma) << "\n";
  os << "delta," << g17(r.delta) << "\n";
  os << "payload_mass_kg," << g17(r.payload_mass) << "\n";
  os << "spectral_abscissa," << g17(r.spectral_abscissa) << "\n";
  os << "best_start," << r.best_start << "\n";
  for (const auto& cn : r.channel_norms) os << "norm." << synthesis::to_string(cn.channel) << "," << g17(cn.norm) << "\n";
  os << "n_piezo," << r.gains.n_piezo << "\n";
  os << "per_piezo," << (r.gains.per_piezo ? 1 : 0) << "\n";
  os << "tau," << g17(r.gains.tau) << "\n";
  os << "charge_scale," << g17(r.gains.charge_scale) << "\n";
  const auto names = r.gains.gain_names();
  const Vector g = r.gains.gains();
  for (std::size_t i = 0; i < names.size(); ++i) os << "gain." << names[i] << "," << g17(g(static_cast<Eigen::Index>(i))) << "\n";
  return os.str();
}

std::string starts_csv(const ProjectConfig& c, const synthesis::SynthesisResult& r, Strategy s) {
  std::ostringstream os;
  os << header(c, c.optimizer.seed, "restart log") << "# strategy " << control::to_string(s)
     << "\nstart,initial,local,gamma,best_so_far,evaluations,sweeps\n";
  for (const auto& l : r.log)
    os << l.start << "," << g10(l.initial) << "," << g10(l.local) << "," << g10(l.gamma) << "," << g10(l.best_so_far)
       << "," << l.evaluations << "," << l.sweeps << "\n";
  return os.str();
}

std::string bode_csv(const ProjectConfig& c, const BodeTable& t, Strategy s) {
  std::ostringstream os;
  os << header(c, c.optimizer.seed, "closed-loop magnitudes, normalized channels, rad/s") << "# strategy "
     << control::to_string(s) << "\nomega";
  for (const auto& n : t.names) os << "," << n;
  os << "\n";
  for (std::size_t i = 0; i < t.omega.size(); ++i) {
    os << fmt("%.15g", t.omega[i]);
    for (const auto& col : t.columns) os << "," << fmt("%.15g", col[i]);
    os << "\n";
  }
  return os.str();
}

std::string bode_svg(const BodeTable& t, Strategy s, double gamma) {
  svg::Panel a{"Strategy " + control::to_string(s) + " acceleration channels vs template (gamma " + g10(gamma) + ")",
               "omega [rad/s]", "magnitude", true, true, {}};
  svg::Panel b{"Control torque roll-off", "omega [rad/s]", "magnitude", true, true, {}};
  for (std::size_t k = 0; k < t.names.size(); ++k) {
    const auto& n = t.names[k];
    svg::Series series{n, t.omega, t.columns[k], n.rfind("template", 0) == 0};
    if (n == "template_c" || n == "rolloff") b.series.push_back(std::move(series));
    else a.series.push_back(std::move(series));
  }
  std::vector<svg::Panel> panels{a};
  if (b.series.size() > 1) panels.push_back(b);
  return svg::render(panels);
}

}  // namespace

Design read_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open result file '" + path + "'");
  std::map<std::string, std::string> kv;
  Design d;
  bool have_hash = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string key, value;
      is >> key >> value;
      if (key == "config_hash") {
        d.config_hash = std::stoull(value, nullptr, 16);
        have_hash = true;
      } else if (key == "seed") {
        d.seed = std::stoull(value);
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(path + ": malformed line '" + line + "'");
    kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error(path + ": missing '" + k + "'");
    return it->second;
  };
  if (!have_hash) throw Error(path + ": no config_hash header");
  try {
    d.strategy = control::strategy_from_string(get("strategy"));
    d.gamma = std::stod(get("gamma"));
    d.delta = std::stod(get("delta"));
    d.payload_mass = std::stod(get("payload_mass_kg"));
    d.gains = control::make_structure(d.strategy, std::stoi(get("n_piezo")), get("per_piezo") == "1",
                                      std::stod(get("tau")));
    d.gains.charge_scale = std::stod(get("charge_scale"));
    const auto names = d.gains.gain_names();
    Vector g(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) g(static_cast<Eigen::Index>(i)) = std::stod(get("gain." + names[i]));
    d.gains.set_gains(g);
    for (auto c : synthesis::default_channels()) {
      auto it = kv.find("norm." + synthesis::to_string(c));
      if (it != kv.end()) d.channel_norms.push_back({c, std::stod(it->second)});
    }
  } catch (const std::logic_error& e) {
    throw Error(path + ": bad value (" + e.what() + ")");
  }
  return d;
}

// -------------------------------------------------------------- commands

int cmd_modes(const ProjectConfig& c, const RunOptions& o, std::ostream& out) {
  const auto lfr = plant::assemble(c.plant);
  const std::vector<double> deltas = c.plant.n_segments == 0 ? std::vector<double>{0.0} : std::vector<double>{-1, 0, 1};
  std::ostringstream facts, modes;
  facts << header(c, c.optimizer.seed, "plant facts about G")
        << "delta,payload_mass_kg,total_mass_kg,inertia_kgm2,rigid_modes,flexible_modes,first_flexible_hz\n";
  modes << header(c, c.optimizer.seed, "flexible modes") << "delta,index,frequency_hz,damping\n";
  out << "  delta  payload[kg]  mass[kg]  inertia[kg m^2]  rigid  f1[Hz]\n";
  for (double d : deltas) {
    const auto f = plant::plant_facts(lfr, d);
    const double f1 = f.flexible.empty() ? 0.0 : f.flexible.front().frequency_hz;
    facts << g10(d) << "," << g10(f.payload_mass) << "," << g10(f.total_mass) << "," << g10(f.total_inertia) << ","
          << f.rigid_modes << "," << f.flexible.size() << "," << (f.flexible.empty() ? "" : g10(f1)) << "\n";
    for (std::size_t i = 0; i < f.flexible.size(); ++i)
      modes << g10(d) << "," << i + 1 << "," << g10(f.flexible[i].frequency_hz) << "," << g10(f.flexible[i].damping)
            << "\n";
    out << fmt("%7.0f", d) << fmt("%13.2f", f.payload_mass) << fmt("%10.2f", f.total_mass)
        << fmt("%17.1f", f.total_inertia) << fmt("%7.0f", f.rigid_modes)
        << (f.flexible.empty() ? std::string("       -") : fmt("%8.4f", f1)) << "\n";
  }
  const auto dir = out_dir(o);
  write_file(dir / "facts.csv", facts.str());
  write_file(dir / "modes.csv", modes.str());
  return kExitOk;
}

int cmd_synth(const ProjectConfig& c, const RunOptions& o, std::ostream& out) {
  const auto lfr = plant::assemble(c.plant);
  const auto dir = out_dir(o);
  std::ostringstream summary;
  summary << header(c, c.optimizer.seed, "synthesis summary") << "strategy,gamma,payload_mass_kg,delta,best_start\n";
  int code = kExitOk;
  for (Strategy s : c.strategies()) {
    const auto name = control::to_string(s);
    const auto p = make_problem(c, lfr, s);
    synthesis::SynthesisResult r;
    try {
      r = synthesis::codesign(p);
    } catch (const synthesis::SynthesisFailure& e) {
      out << "strategy " << name << ": synthesis failed: " << e.what() << "\n";
      code = kExitSynthesis;
      continue;
    }
    const auto bode = bode_table(p, r.gains, r.delta);
    write_file(dir / ("result_" + name + ".csv"), design_csv(c, r, s));
    write_file(dir / ("starts_" + name + ".csv"), starts_csv(c, r, s));
    write_file(dir / ("bode_" + name + ".csv"), bode_csv(c, bode, s));
    write_file(dir / ("bode_" + name + ".svg"), bode_svg(bode, s, r.gamma));
    summary << name << "," << g10(r.gamma) << "," << g10(r.payload_mass) << "," << g10(r.delta) << "," << r.best_start
            << "\n";
    out << "strategy " << name << ": gamma " << fmt("%.4f", r.gamma) << "  Mt " << fmt("%.2f", r.payload_mass)
        << " kg  (";
    for (std::size_t k = 0; k < r.channel_norms.size(); ++k)
      out << (k ? ", " : "") << synthesis::to_string(r.channel_norms[k].channel) << " "
          << fmt("%.4f", r.channel_norms[k].norm);
    out << ")\n";
  }
  if (c.strategies().size() > 1) write_file(dir / "summary.csv", summary.str());
  return code;
}

int cmd_simulate(const ProjectConfig& c, const RunOptions& o, std::ostream& out) {
  const auto lfr = plant::assemble(c.plant);
  const auto dir = out_dir(o);
  std::vector<std::string> files;
  if (!o.result.empty()) files.push_back(o.result);
  else
    for (Strategy s : c.strategies()) files.push_back((dir / ("result_" + control::to_string(s) + ".csv")).string());
  for (const auto& file : files) {
    const auto d = read_design(file);
    if (d.config_hash != config_hash(c)) {
      out << file << ": config hash " << hash_hex(d.config_hash) << " does not match " << hash_hex(config_hash(c))
          << "\n";
      return kExitMismatch;
    }
    const auto name = control::to_string(d.strategy);
    const auto p = make_problem(c, lfr, d.strategy);
    const auto tr = simulate_design(c, p, d.gains, d.delta);

    std::ostringstream csv;
    csv << header(c, d.seed, "simulation") << "# strategy " << name << "\n# disturbance "
        << (c.scenario.type == Disturbance::tip_torque ? "tip_torque N*m " : "tip_force N ") << g17(c.scenario.magnitude)
        << "\n# payload_mass_kg " << g17(d.payload_mass) << "\n# peak_y_mm " << g10(tr.peak_y_mm) << "\n# steady_y_mm "
        << g10(tr.steady_y_mm) << "\n# peak_theta_arcsec " << g10(tr.peak_theta_arcsec) << "\nt";
    for (const auto& n : tr.names) csv << "," << n;
    csv << "\n";
    for (int i = 0; i < tr.signal.samples(); ++i) {
      csv << g10(tr.signal.time(i));
      for (Eigen::Index r = 0; r < tr.signal.values.rows(); ++r) csv << "," << g10(tr.signal.values(r, i));
      csv << "\n";
    }
    write_file(dir / ("sim_" + name + ".csv"), csv.str());

    const int stride = std::max(1, tr.signal.samples() / 2000);  // plotted points only
    std::vector<double> t;
    for (int i = 0; i < tr.signal.samples(); i += stride) t.push_back(tr.signal.time(i));
    auto row = [&](Eigen::Index r) {
      std::vector<double> v;
      for (int i = 0; i < tr.signal.samples(); i += stride) v.push_back(tr.signal.values(r, i));
      return v;
    };
    std::vector<svg::Panel> panels{
        {"Strategy " + name + ": payload misalignment", "t [s]", "y [mm]", false, false, {{"y", t, row(1)}}},
        {"Hub pointing error", "t [s]", "theta [arcsec]", false, false, {{"theta", t, row(0)}}},
        {"Hub torque", "t [s]", "M_G [N m]", false, false, {{"M_G", t, row(2)}}}};
    if (tr.names.size() > 3) {
      svg::Panel v{"Patch voltages", "t [s]", "v [V]", false, false, {}};
      for (std::size_t k = 3; k < tr.names.size(); ++k)
        v.series.push_back({tr.names[k], t, row(static_cast<Eigen::Index>(k))});
      panels.push_back(std::move(v));
    }
    write_file(dir / ("sim_" + name + ".svg"), svg::render(panels));
    out << "strategy " << name << ": peak |y| " << fmt("%.2f", tr.peak_y_mm) << " mm, steady |y| "
        << fmt("%.2f", tr.steady_y_mm) << " mm, peak |theta| " << fmt("%.2f", tr.peak_theta_arcsec) << " arcsec\n";
  }
  return kExitOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Integrated attitude, vibration and payload co-design for a flexible spacecraft"};
  app.require_subcommand(1);
  std::string config_path, strategy, result;
  RunOptions o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--strategy", strategy, "I, II, III, IV or all (overrides the config)");
    sub->add_option("--seed", seed, "optimizer seed (overrides the config)");
    sub->add_option("--out", o.out_dir, "output directory");
  };
  auto* modes = app.add_subcommand("modes", "modal facts of the assembled plant");
  auto* synth = app.add_subcommand("synth", "controller and payload co-design");
  auto* sim = app.add_subcommand("simulate", "time response of a stored design to the tip disturbance");
  for (auto* s : {modes, synth, sim}) add_common(s);
  sim->add_option("--result", o.result, "result file (default <out>/result_<S>.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  ProjectConfig c;
  try {
    c = load_config(config_path);
    auto* active = app.get_subcommands().front();
    if (active->count("--strategy")) c.strategy = strategy;
    if (active->count("--seed")) c.optimizer.seed = seed;
    c.strategies();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (modes->parsed()) return cmd_modes(c, o, out);
    if (synth->parsed()) return cmd_synth(c, o, out);
    return cmd_simulate(c, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace elmo::cli
