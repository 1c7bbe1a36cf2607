#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "elmo/control.hpp"
#include "elmo/lti.hpp"
#include "elmo/plant.hpp"

namespace elmo::synthesis {

/// (s² + 2ξω s + ω²)/(s + ε)² with ε = eps_ratio·ω. Throws on
/// non-positive parameters.
lti::StateSpace sotas_weight(double omega_req, double xi_req, double eps_ratio = 1e-4);

/// k (1 + s/ω_c)/(1 + s/(span·ω_c)).
lti::StateSpace rolloff_weight(double omega_c, double gain, double span = 100.0);

struct Weights {
  double omega_req = 2.0 * std::numbers::pi * 0.173;  // rad/s
  double xi_req = 0.7;
  double eps_ratio = 1e-4;
  double rolloff_gain = 0.5;
  double rolloff_corner = 10.0;  // ω_c / ω_req
  double rolloff_span = 100.0;
  double alpha = 1.0;  // parameter channel scale

  void validate() const;
};

/// Disturbances are acceleration-level: a hub disturbance w is the torque
/// J_hub w, a payload disturbance w the force J_hub w / d_GT, where J_hub is
/// the high-frequency hub inertia 1/D(θ̈ <- M_G). Channels: (a) w_hub -> W_z θ̈;
/// (b) w_hub -> W_z a_rel/d_GT, payload acceleration relative to G read as a
/// rotation; (c) w_tip -> W_z θ̈; (d) w_tip -> W_C M_G/J_hub (spillover of the
/// flexible modes into the torque); (e) α(1 - Δ). On a rigid structure (a),
/// (b) and (c) coincide.
enum class Channel { hub, payload, tip, rolloff, parameter };

std::string to_string(Channel c);
std::vector<Channel> default_channels();

/// Port labels of the generalized plant.
namespace port {
inline const std::string kHubIn = "w_hub";
inline const std::string kTipIn = "w_tip";
inline const std::string kParamIn = "w_e";
inline const std::string kHubOut = "z_hub";
inline const std::string kTipOut = "z_tip";
inline const std::string kAttOut = "z_att";
inline const std::string kCtrlOut = "z_ctrl";
inline const std::string kParamOut = "z_e";
}  // namespace port

struct ChannelPorts {
  std::string input, output;
};
ChannelPorts channel_ports(Channel c);

struct OptimizerOptions {
  int starts = 10;
  std::uint64_t seed = 1;
  double initial_step = 0.5;    // log10 units
  double min_step = 1e-3;
  int max_evaluations = 4000;   // per start
  int start_attempts = 200;     // random draws per start before giving up
  double tie_tolerance = 1e-6;  // relative; ties on the max are broken by the channel sum
  double penalty = 1e3;
  double hinf_tol = 1e-5;

  void validate() const;
};

/// Open-loop plant with named ports. Must expose M_G, w_hub_torque, theta,
/// theta_dd; the payload channels need w_tip_force and tip_acc_rel, Δ needs
/// w_delta/z_delta, strategies II and IV need y, III and IV need v_i/gc_i.
struct SynthesisProblem {
  lti::StateSpace plant;
  double tip_distance = 1.0;
  int rigid_modes = 2;
  /// Physical payload mass m(Δ) = nominal + scale·Δ (reporting only).
  plant::DeltaEntry payload{"payload_mass", 0.0, 0.0};
  bool tune_delta = true;
  double delta = 0.0;  // used when tune_delta is false
  control::ControllerStructure structure;
  Weights weights;
  std::vector<Channel> channels = default_channels();
  OptimizerOptions options;

  void validate() const;
};

/// Problem on an assembled plant with its payload map and tip distance.
SynthesisProblem make_problem(const plant::PlantLfr& p, control::Strategy s, bool per_piezo = false);

/// Scalings fixed once per problem.
struct Scalings {
  double hub_inertia_hf = 1.0;  // 1/D(θ̈ <- M_G)
  double total_inertia = 1.0;   // low-frequency 1/|θ̈/M_G| at Δ = 0
  double charge_scale = 1.0;    // n_g
  double tip_per_volt = 1.0;    // |Σ_i y/v_i| at 0.01 ω_req, sizes the y PI start
};
Scalings compute_scalings(const SynthesisProblem& problem);

/// Plant with Δ closed and the controller wired in. Keeps the plant inputs
/// not driven by the controller and exposes the requested outputs (plant or
/// controller).
lti::StateSpace closed_loop(const SynthesisProblem& problem, const control::ControllerStructure& gains, double delta,
                            const Labels& outputs);

/// Weighted multi-channel closed loop; inputs and outputs per channel_ports
/// for the channels in the problem.
lti::StateSpace build_generalized_plant(const SynthesisProblem& problem, const control::ControllerStructure& gains,
                                        double delta);

struct ChannelNorm {
  Channel channel;
  double norm = 0.0;
};

struct Evaluation {
  double value = 0.0;  // max channel norm, or penalty + spectral abscissa
  double sum = 0.0;    // tie-break
  bool stable = false;
  double spectral_abscissa = 0.0;
  std::vector<ChannelNorm> breakdown;
};

/// Flat vector: packed log10 gains then, if Δ is tuned, x_Δ with Δ = tanh(x_Δ).
/// Gain signs come from problem.structure.
struct Point {
  control::ControllerStructure gains;
  double delta = 0.0;
};
Point unpack(const SynthesisProblem& problem, const Vector& x);
Vector pack(const SynthesisProblem& problem, const Point& p);
int parameter_count(const SynthesisProblem& problem);

enum class NormMethod { exact, surrogate };

/// Surrogate: peak over a log grid plus the closed-loop pole frequencies.
Evaluation evaluate_objective(const SynthesisProblem& problem, const Vector& x,
                              NormMethod method = NormMethod::exact);
Evaluation evaluate_point(const SynthesisProblem& problem, const Point& p, NormMethod method = NormMethod::exact);

/// (max, sum) lexicographic with relative tie tolerance.
bool better(const Evaluation& a, const Evaluation& b, double tie_tolerance);

struct StartLog {
  int start = 0;
  Vector x0;
  double initial = 0.0;     // surrogate
  double local = 0.0;       // surrogate at convergence
  double gamma = 0.0;       // exact
  double best_so_far = 0.0; // exact, over starts 0..start
  int evaluations = 0;
  int sweeps = 0;
  Point point;
  Evaluation exact;
};

struct SynthesisResult {
  double gamma = 0.0;
  std::vector<ChannelNorm> channel_norms;
  control::ControllerStructure gains;
  double delta = 0.0;
  double payload_mass = 0.0;
  double spectral_abscissa = 0.0;
  int rigid_modes = 0;
  std::vector<StartLog> log;
  Scalings scalings;
  int best_start = 0;
};

class SynthesisFailure : public Error {
 public:
  using Error::Error;
};

SynthesisResult codesign(const SynthesisProblem& problem);

}  // namespace elmo::synthesis
