#pragma once

#include <string>
#include <vector>

#include "elmo/fem.hpp"
#include "elmo/lti.hpp"
#include "elmo/titop.hpp"

namespace elmo::plant {

/// External port labels of the assembled plant.
namespace port {
inline const std::string kTorque = "M_G";           // hub control torque, N·m
inline const std::string kHubForce = "w_hub_force";  // transverse disturbance force at G, N
inline const std::string kHubTorque = "w_hub_torque";
inline const std::string kTipForce = "w_tip_force";  // transverse disturbance force on the payload, N
inline const std::string kTipTorque = "w_tip_torque";
inline const std::string kDeltaIn = "w_delta";
inline const std::string kTheta = "theta";            // hub attitude, rad
inline const std::string kThetaD = "theta_d";         // rad/s
inline const std::string kThetaDd = "theta_dd";       // rad/s²
inline const std::string kHubAcc = "a_G";             // transverse acceleration of G, m/s²
inline const std::string kTipAccRel = "tip_acc_rel";  // payload transverse acceleration minus a_G
inline const std::string kTipDef = "y";               // payload misalignment w.r.t. the rigid line of sight, m
inline const std::string kDeltaOut = "z_delta";
std::string voltage(int segment);  // "v1", ...
std::string charge(int segment);   // "gc1", ...
}  // namespace port

struct HubSpec {
  double mass = 500.0;            // kg
  double inertia = 250.0;         // kg·m² about G
  double attachment_offset = 1.0; // m, G to the first mast port P

  void validate() const;
};

struct PayloadSpec {
  double mass_lo = 60.0;  // kg
  double mass_hi = 70.0;
  double rotary_inertia = 0.0;  // kg·m²

  void validate() const;
  double mid() const { return 0.5 * (mass_hi + mass_lo); }
  double half_range() const { return 0.5 * (mass_hi - mass_lo); }
  /// m(Δ) = mid + half_range·Δ
  double mass(double delta) const { return mid() + half_range() * delta; }
};

/// Where structural damping is applied. `assembled`: modal damping ξ_s on
/// every flexible mode of the assembled structure (payload at mid mass).
/// `substructure`: ξ_s on each segment's P-clamped modes, which leaves
/// low system modes far less damped than ξ_s.
enum class DampingModel { assembled, substructure };

struct PlantSpec {
  HubSpec hub;
  PayloadSpec payload;
  fem::BeamSegmentSpec segment;
  fem::PiezoSpec piezo;
  bool with_piezo = true;
  int n_segments = 3;
  int modes_per_segment = fem::kDefaultModesPerSegment;
  DampingModel damping = DampingModel::assembled;

  void validate() const;
};

struct DeltaEntry {
  std::string name;
  double nominal = 0.0;  // physical value at Δ = 0
  double scale = 0.0;    // physical change per unit Δ
};

/// Plant with the payload mass pulled out as w_delta = Δ·z_delta.
struct PlantLfr {
  lti::StateSpace model;
  PlantSpec spec;
  std::vector<DeltaEntry> delta_map;
  /// G to payload distance, m.
  double tip_distance = 0.0;
  /// Mass of everything except the payload, kg.
  double structural_mass = 0.0;
};

/// Planar rigid hub. Inputs: M_G, w_hub_force, w_hub_torque, hub.FP.f,
/// hub.FP.m (load from the mast at P). Outputs: a_G, hub.aP.t, hub.aP.r,
/// theta, theta_dd, theta_d. States: θ, θ̇ (translation is cyclic and carries no
/// state).
lti::StateSpace hub_block(const HubSpec& spec);

/// Hub + chained segments + payload. With n_segments = 0 the hub stands
/// alone: the Δ ports remain but carry no dynamics.
PlantLfr assemble(const PlantSpec& spec);

/// Closes the Δ loop with Δ in [-1, 1].
lti::StateSpace close_delta(const PlantLfr& plant, double delta);

struct Mode {
  double frequency_hz = 0.0;
  double damping = 0.0;
};

struct PlantFacts {
  std::vector<Mode> flexible;  // ascending frequency
  int rigid_modes = 0;
  double total_mass = 0.0;      // kg
  double total_inertia = 0.0;   // kg·m², 1/|θ̈/M_G| in the low-frequency limit
  double payload_mass = 0.0;
  /// Low-frequency rigid mass matrix at G, inverse of (w_hub_force,
  /// w_hub_torque) -> (a_G, theta_dd).
  Eigen::Matrix2d rigid_mass_at_g = Eigen::Matrix2d::Zero();
};

inline constexpr double kInertiaProbeOmega = 1e-5;

PlantFacts plant_facts(const PlantLfr& plant, double delta);

/// Modal summary of any closed model: eigenvalues with |λ| below
/// `rigid_tol` count as rigid.
PlantFacts modal_facts(const lti::StateSpace& sys, double rigid_tol = 1e-7);

}  // namespace elmo::plant
