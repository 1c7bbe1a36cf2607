#pragma once

#include <optional>
#include <vector>

#include "elmo/lti.hpp"

namespace elmo::fem {

/// Uniform thin-walled tube mast segment. SI units throughout.
struct BeamSegmentSpec {
  double length = 4.060;           // m
  double mass = 2.737;             // kg
  double thickness = 9.53e-3;      // m, tube wall
  double diameter = 0.141;         // m, outer
  double elastic_modulus = 1.13e9; // Pa
  double modal_damping = 0.005;
  int n_elements = 10;

  void validate() const;
  /// π(φ⁴ - (φ-2t)⁴)/64
  double area_moment() const;
  double bending_stiffness() const { return elastic_modulus * area_moment(); }
  double mass_per_length() const { return mass / length; }
};

/// Surface-bonded piezoelectric patch. The patch starts at the root of the
/// host element and runs `length` along the axis (it may cover several
/// elements).
struct PiezoSpec {
  double length = 0.080;     // m
  double thickness = 2e-3;   // m
  double width = 0.030;      // m
  double density = 7600.0;   // kg/m³
  double modulus = 50e9;     // Pa
  double d31 = -150e-12;     // m/V
  double eps33 = 1.59e-12;   // F/m
  int host_element_index = 0;

  void validate() const;
  double capacitance() const { return eps33 * length * width / thickness; }
  double mass() const { return density * length * width * thickness; }
  /// Induced bending moment per volt; `host_depth` is the section depth of
  /// the host (the tube diameter), so the arm is (depth + t_p)/2.
  double moment_per_volt(double host_depth) const;
};

/// Planar bending model, 2 DOF per node: (transverse displacement, rotation).
struct FemModel {
  BeamSegmentSpec spec;
  Matrix mass;
  Matrix stiffness;
  /// Nodal loads per volt; empty without a piezo patch.
  Vector piezo_column;
  double capacitance = 0.0;
  double added_mass = 0.0;

  int nodes() const { return spec.n_elements + 1; }
  int dofs() const { return 2 * nodes(); }
  static int transverse_dof(int node) { return 2 * node; }
  static int rotation_dof(int node) { return 2 * node + 1; }
  bool has_piezo() const { return piezo_column.size() > 0; }
  double element_length() const { return spec.length / spec.n_elements; }
};

FemModel beam_matrices(const BeamSegmentSpec& spec);

/// Slope-interpolation row: rotation at axial position x as a linear form
/// of the nodal DOFs (cubic Hermite shape functions).
Vector slope_interpolation(const FemModel& fem, double x);

/// Adds the patch: coupling column b_p = m_p (slope(x_b) - slope(x_a)) per
/// volt, patch mass and bending stiffness over the covered span, and the
/// capacitance. The charge output is g_c = b_pᵀq + C_p v.
FemModel piezo_coupling(FemModel fem, const PiezoSpec& piezo);

/// Craig-Bampton reduction with boundary = both end nodes.
/// Coordinates: (u_P transverse, u_P rotation, u_Q transverse, u_Q rotation,
/// η_1..η_k).
struct CmsModel {
  BeamSegmentSpec spec;
  Matrix mass;       // (4+k)²
  Matrix stiffness;  // (4+k)², block-diagonal: condensed boundary + Ω²
  Vector fixed_interface_omega;  // rad/s, ascending
  Vector fixed_interface_damping;
  Vector piezo_column;  // (4+k) or empty
  double capacitance = 0.0;
  double added_mass = 0.0;

  int modes() const { return static_cast<int>(fixed_interface_omega.size()); }
  bool has_piezo() const { return piezo_column.size() > 0; }
  Matrix boundary_mass() const { return mass.topLeftCorner(4, 4); }
  Matrix boundary_stiffness() const { return stiffness.topLeftCorner(4, 4); }
  Matrix coupling_mass() const { return mass.topRightCorner(4, modes()); }
};

inline constexpr int kDefaultModesPerSegment = 4;

CmsModel craig_bampton(const FemModel& fem, int n_modes);

/// Generalized eigenfrequencies (rad/s, ascending) of (K, M).
Vector natural_frequencies(const Matrix& stiffness, const Matrix& mass);

/// Remove the listed DOFs (clamp them).
Matrix clamp(const Matrix& m, const std::vector<int>& fixed);

}  // namespace elmo::fem
