#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "elmo/fem.hpp"

using namespace elmo;
using namespace elmo::fem;

namespace {

// Euler-Bernoulli eigenvalue roots (β L) for the first modes.
constexpr double kCantileverBetaL1 = 1.8751040687;
constexpr double kClampedClampedBetaL1 = 4.7300407449;
constexpr double kFreeFreeBetaL[] = {4.7300407449, 7.8532046241, 10.9956078380};

double analytic_omega(const BeamSegmentSpec& s, double beta_l) {
  return beta_l * beta_l * std::sqrt(s.bending_stiffness() / (s.mass_per_length() * std::pow(s.length, 4)));
}

Vector flexible_free_free(const BeamSegmentSpec& s) {
  auto fem = beam_matrices(s);
  Vector w = natural_frequencies(fem.stiffness, fem.mass);
  return w.segment(2, 3);
}

double asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff() / m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(BeamMatrices, TubeSectionProperties) {
  BeamSegmentSpec s;
  const double inner = s.diameter - 2 * s.thickness;
  const double i_ref = std::numbers::pi / 64 * (std::pow(s.diameter, 4) - std::pow(inner, 4));
  EXPECT_NEAR(s.area_moment(), i_ref, 1e-18);
  EXPECT_NEAR(s.area_moment(), 8.55e-6, 0.01e-6);
  EXPECT_NEAR(s.bending_stiffness(), 9.66e3, 0.01e3);
}

TEST(BeamMatrices, RigidTranslationMassIsSegmentMass) {
  auto fem = beam_matrices(BeamSegmentSpec{});
  Vector r = Vector::Zero(fem.dofs());
  for (int i = 0; i < fem.nodes(); ++i) r(FemModel::transverse_dof(i)) = 1.0;
  EXPECT_NEAR(r.dot(fem.mass * r), 2.737, 1e-12);
}

TEST(BeamMatrices, ClampedFreeFirstBendingMatchesAnalytic) {
  BeamSegmentSpec s;
  s.n_elements = 20;
  auto fem = beam_matrices(s);
  const Vector w = natural_frequencies(clamp(fem.stiffness, {0, 1}), clamp(fem.mass, {0, 1}));
  const double ref = analytic_omega(s, kCantileverBetaL1);
  EXPECT_NEAR(w(0) / ref, 1.0, 5e-3);
  EXPECT_NEAR(ref / (2 * std::numbers::pi), 4.06, 0.01);
}

TEST(BeamMatrices, FreeFreeHasTwoRigidModesAndIsSymmetric) {
  auto fem = beam_matrices(BeamSegmentSpec{});
  EXPECT_LT(asymmetry(fem.mass), 1e-14);
  EXPECT_LT(asymmetry(fem.stiffness), 1e-14);
  Eigen::SelfAdjointEigenSolver<Matrix> es(fem.mass);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  Vector w = natural_frequencies(fem.stiffness, fem.mass);
  EXPECT_LT(w(1), 1e-5 * w(2));
  EXPECT_GT(w(2), 1.0);
}

TEST(BeamMatrices, FreeFreeMatchesAnalyticAndConverges) {
  BeamSegmentSpec s;
  const Vector coarse = flexible_free_free(s);
  s.n_elements *= 2;
  const Vector fine = flexible_free_free(s);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT(std::abs(fine(i) / coarse(i) - 1.0), 5e-3) << "mode " << i;
    EXPECT_NEAR(fine(i) / analytic_omega(s, kFreeFreeBetaL[i]), 1.0, 5e-3);
  }
}

TEST(BeamMatrices, RejectsThickWall) {
  BeamSegmentSpec s;
  s.thickness = s.diameter / 2;
  EXPECT_THROW(beam_matrices(s), Error);
  s = BeamSegmentSpec{};
  s.n_elements = 1;
  EXPECT_THROW(beam_matrices(s), Error);
}

TEST(PiezoCoupling, CapacitanceFromPatchGeometry) {
  PiezoSpec p;
  EXPECT_NEAR(p.capacitance(), 1.59e-12 * 0.08 * 0.03 / 0.002, 1e-25);
  EXPECT_NEAR(p.capacitance(), 1.908e-12, 1e-15);
  auto fem = piezo_coupling(beam_matrices(BeamSegmentSpec{}), p);
  EXPECT_NEAR(fem.capacitance, 1.908e-12, 1e-15);
  EXPECT_NEAR(fem.added_mass, 7600 * 0.08 * 0.03 * 0.002, 1e-12);
}

TEST(PiezoCoupling, ZeroD31GivesZeroColumn) {
  PiezoSpec p;
  p.d31 = 0.0;
  auto fem = piezo_coupling(beam_matrices(BeamSegmentSpec{}), p);
  EXPECT_EQ(fem.piezo_column.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PiezoCoupling, LinearInD31) {
  PiezoSpec neg, pos;
  pos.d31 = -neg.d31;
  auto base = beam_matrices(BeamSegmentSpec{});
  auto a = piezo_coupling(base, neg), b = piezo_coupling(base, pos);
  EXPECT_LT((a.piezo_column + b.piezo_column).norm(), 1e-15 * a.piezo_column.norm());
  // nodal moment pair: equal and opposite for a patch ending on a node
  PiezoSpec full;
  full.length = base.element_length();
  auto c = piezo_coupling(base, full);
  EXPECT_NEAR(c.piezo_column(1) / c.piezo_column(3), -1.0, 1e-14);
  EXPECT_NEAR(c.piezo_column(3) / full.moment_per_volt(0.141), 1.0, 1e-14);
}

// Blocked force E_p d31 w_p = 0.225 N/V acting at (φ + t_p)/2 from the axis.
TEST(PiezoCoupling, MomentPerVoltFromBlockedForce) {
  PiezoSpec p;
  EXPECT_NEAR(p.moment_per_volt(0.141) / (-0.225 * 0.143 / 2), 1.0, 1e-12);
}

// Sensing row equals the actuation column: for a quadratic deflection
// w = κx²/2 the charge must be m_p κ (x_b - x_a).
TEST(PiezoCoupling, ReciprocityUnderUniformCurvature) {
  PiezoSpec p;
  p.host_element_index = 3;
  auto fem = piezo_coupling(beam_matrices(BeamSegmentSpec{}), p);
  const double kappa = 1e-3;
  Vector q(fem.dofs());
  for (int i = 0; i < fem.nodes(); ++i) {
    const double x = i * fem.element_length();
    q(FemModel::transverse_dof(i)) = 0.5 * kappa * x * x;
    q(FemModel::rotation_dof(i)) = kappa * x;
  }
  const double expected = p.moment_per_volt(0.141) * kappa * p.length;
  EXPECT_NEAR(fem.piezo_column.dot(q) / expected, 1.0, 1e-10);
  // rigid motion produces no charge
  Vector rigid(fem.dofs());
  for (int i = 0; i < fem.nodes(); ++i) {
    rigid(FemModel::transverse_dof(i)) = 0.3 + 0.7 * i * fem.element_length();
    rigid(FemModel::rotation_dof(i)) = 0.7;
  }
  EXPECT_NEAR(fem.piezo_column.dot(rigid), 0.0, 1e-14 * fem.piezo_column.norm());
}

TEST(PiezoCoupling, HostOutOfRange) {
  PiezoSpec p;
  p.host_element_index = 10;
  EXPECT_THROW(piezo_coupling(beam_matrices(BeamSegmentSpec{}), p), Error);
  p.host_element_index = 9;
  p.length = 1.0;
  EXPECT_THROW(piezo_coupling(beam_matrices(BeamSegmentSpec{}), p), Error);
}

TEST(CraigBampton, FullBasisReproducesFreeFreeSpectrum) {
  auto fem = beam_matrices(BeamSegmentSpec{});
  const int interior = fem.dofs() - 4;
  auto cms = craig_bampton(fem, interior);
  const Vector ref = natural_frequencies(fem.stiffness, fem.mass);
  const Vector red = natural_frequencies(cms.stiffness, cms.mass);
  ASSERT_EQ(ref.size(), red.size());
  for (Eigen::Index i = 2; i < ref.size(); ++i) EXPECT_NEAR(red(i) / ref(i), 1.0, 1e-6) << i;
}

TEST(CraigBampton, FixedInterfaceFirstModeMatchesClampedClamped) {
  BeamSegmentSpec s;
  auto cms = craig_bampton(beam_matrices(s), 4);
  const double ref = analytic_omega(s, kClampedClampedBetaL1);
  EXPECT_NEAR(cms.fixed_interface_omega(0) / ref, 1.0, 1e-2);
  EXPECT_NEAR(ref / (2 * std::numbers::pi), 25.9, 0.1);
}

TEST(CraigBampton, RetainedModesAreExactFixedInterfaceModes) {
  auto fem = beam_matrices(BeamSegmentSpec{});
  const int last = fem.nodes() - 1;
  const std::vector<int> fixed{0, 1, 2 * last, 2 * last + 1};
  const Vector full = natural_frequencies(clamp(fem.stiffness, fixed), clamp(fem.mass, fixed));
  auto cms = craig_bampton(fem, 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(cms.fixed_interface_omega(i) / full(i), 1.0, 1e-8);
  const Vector red = natural_frequencies(clamp(cms.stiffness, {0, 1, 2, 3}), clamp(cms.mass, {0, 1, 2, 3}));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(red(i) / full(i), 1.0, 1e-8);
}

TEST(CraigBampton, CondensedBoundaryGivesCantileverFlexibility) {
  BeamSegmentSpec s;
  auto cms = craig_bampton(beam_matrices(s), 4);
  const Matrix kqq = cms.boundary_stiffness().bottomRightCorner(2, 2);
  const Matrix flex = kqq.inverse();
  const double l = s.length, ei = s.bending_stiffness();
  Eigen::Matrix2d ref;
  ref << l * l * l / (3 * ei), l * l / (2 * ei), l * l / (2 * ei), l / ei;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(flex(i, j) / ref(i, j), 1.0, 1e-3);
}

TEST(CraigBampton, SymmetryPreserved) {
  auto fem = piezo_coupling(beam_matrices(BeamSegmentSpec{}), PiezoSpec{});
  auto cms = craig_bampton(fem, 4);
  EXPECT_LT(asymmetry(cms.mass), 1e-10);
  EXPECT_LT(asymmetry(cms.stiffness), 1e-10);
  EXPECT_EQ(cms.piezo_column.size(), 8);
  for (int i = 1; i < cms.modes(); ++i) EXPECT_GT(cms.fixed_interface_omega(i), cms.fixed_interface_omega(i - 1));
}

TEST(CraigBampton, ModeCountValidated) {
  auto fem = beam_matrices(BeamSegmentSpec{});
  EXPECT_THROW(craig_bampton(fem, 0), Error);
  EXPECT_THROW(craig_bampton(fem, fem.dofs() - 3), Error);
}
