#pragma once

#include <Eigen/Dense>

#include "elmo/fem.hpp"
#include "elmo/lti.hpp"

namespace elmo::titop {

/// Port labels. Planar ports carry (transverse, rotation) components.
namespace port {
inline const std::string kAccPt = "aP.t";  // ü_P transverse, m/s²
inline const std::string kAccPr = "aP.r";  // ü_P angular, rad/s²
inline const std::string kFQf = "FQ.f";    // load by the segment on its child at Q, N
inline const std::string kFQm = "FQ.m";    // N·m
inline const std::string kVolt = "v";
inline const std::string kFPf = "FP.f";    // load by the segment on its parent at P, N
inline const std::string kFPm = "FP.m";
inline const std::string kAccQt = "aQ.t";
inline const std::string kAccQr = "aQ.r";
inline const std::string kDefQt = "dQ.t";  // elastic displacement of Q relative to the rigid line through P
inline const std::string kDefQr = "dQ.r";
inline const std::string kCharge = "gc";
std::string modal_force(int k);     // "q1", ...: generalized force on modal coordinate k
std::string modal_velocity(int k);  // "pd1", ...
}  // namespace port

struct TitopOptions {
  /// Diagonal 2ξω damping on the P-clamped modes.
  bool modal_damping = true;
  /// Expose generalized forces and rates of the modal coordinates, used to
  /// add damping at the assembled-structure level.
  bool modal_ports = false;
};

/// Double-port segment model.
///
/// Sign convention: F_P is the load applied BY the segment ON its parent
/// and F_Q the load applied BY the segment ON its child. Static equilibrium
/// then gives F_P = -φ(L)ᵀ F_Q, and a chain is wired with
/// child.F_P -> parent.F_Q at gain -1.
struct TitopBlock {
  lti::StateSpace model;
  double length = 0.0;
  double mass = 0.0;
  /// Natural frequencies (rad/s) with P clamped, one per modal state pair.
  Vector clamped_omega;
  bool actuated = false;
};

/// φ = [[1, d], [0, 1]]: ü_P = φ ü_G, F_G = φᵀ F_P.
Eigen::Matrix2d transport(double d);

TitopBlock build_titop(const fem::CmsModel& cms, const TitopOptions& opts = {});
TitopBlock build_actuated_titop(const fem::CmsModel& cms, const TitopOptions& opts = {});

}  // namespace elmo::titop
