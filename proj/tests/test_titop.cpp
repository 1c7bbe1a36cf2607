#include <gtest/gtest.h>

#include <cmath>

#include "elmo/titop.hpp"

using namespace elmo;
using namespace elmo::titop;

namespace {

fem::CmsModel segment_cms(fem::BeamSegmentSpec s = {}, int modes = fem::kDefaultModesPerSegment) {
  return fem::craig_bampton(fem::beam_matrices(s), modes);
}

fem::CmsModel actuated_cms(fem::PiezoSpec p = {}, fem::BeamSegmentSpec s = {}) {
  return fem::craig_bampton(fem::piezo_coupling(fem::beam_matrices(s), p), fem::kDefaultModesPerSegment);
}

Matrix dc(const TitopBlock& b, const Labels& in, const Labels& out) {
  return lti::dc_gain(lti::transfer_select(b.model, in, out));
}

const Labels kAccP{port::kAccPt, port::kAccPr};
const Labels kFQ{port::kFQf, port::kFQm};
const Labels kFP{port::kFPf, port::kFPm};
const Labels kAccQ{port::kAccQt, port::kAccQr};
const Labels kDefQ{port::kDefQt, port::kDefQr};

// Mirror x -> L - x: P and Q swap, rotations change sign.
fem::CmsModel mirrored(const fem::CmsModel& cms) {
  const int n = static_cast<int>(cms.mass.rows());
  Matrix s = Matrix::Identity(n, n);
  s.topLeftCorner(4, 4) << 0, 0, 1, 0,
                           0, 0, 0, -1,
                           1, 0, 0, 0,
                           0, -1, 0, 0;
  fem::CmsModel out = cms;
  out.mass = s.transpose() * cms.mass * s;
  out.stiffness = s.transpose() * cms.stiffness * s;
  if (cms.has_piezo()) out.piezo_column = s.transpose() * cms.piezo_column;
  return out;
}

}  // namespace

TEST(Transport, Examples) {
  EXPECT_EQ(transport(0.0), Eigen::Matrix2d::Identity());
  const Eigen::Vector2d at_p = transport(1.0) * Eigen::Vector2d(0.0, 1.0);
  EXPECT_DOUBLE_EQ(at_p(0), 1.0);
  EXPECT_DOUBLE_EQ(at_p(1), 1.0);
  EXPECT_TRUE((transport(0.7) * transport(-2.2)).isApprox(transport(-1.5), 1e-15));
  EXPECT_DOUBLE_EQ(transport(3.3).determinant(), 1.0);
  EXPECT_THROW(transport(std::nan("")), Error);
}

TEST(BuildTitop, PortGroups) {
  auto blk = build_titop(segment_cms());
  EXPECT_EQ(blk.model.inputs(), 4);
  EXPECT_EQ(blk.model.outputs(), 6);
  EXPECT_EQ(blk.model.states(), 2 * (2 + fem::kDefaultModesPerSegment));
  EXPECT_FALSE(blk.model.has_input(port::kVolt));
  auto act = build_actuated_titop(actuated_cms());
  EXPECT_TRUE(act.model.has_input(port::kVolt));
  EXPECT_TRUE(act.model.has_output(port::kCharge));
  EXPECT_TRUE(lti::is_stable(blk.model).stable);
}

TEST(BuildTitop, RejectsBadPartition) {
  auto cms = segment_cms();
  cms.mass.conservativeResize(5, 5);
  EXPECT_THROW(build_titop(cms), Error);
  EXPECT_THROW(build_actuated_titop(segment_cms()), Error);
}

TEST(BuildTitop, StaticEquilibrium) {
  fem::BeamSegmentSpec s;
  auto blk = build_titop(segment_cms(s));
  const Matrix fp = dc(blk, kFQ, kFP);
  // F_P = -φ(L)ᵀ F_Q: force row is -I, the moment picks up the lever arm.
  EXPECT_TRUE(fp.isApprox(-transport(s.length).transpose(), 1e-9)) << fp;
  EXPECT_NEAR(fp(0, 0), -1.0, 1e-9);
  EXPECT_NEAR(fp(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(fp(1, 1), -1.0, 1e-9);
  EXPECT_LT(dc(blk, kFQ, kAccQ).norm(), 1e-9);
}

TEST(BuildTitop, RigidLimitGivesRigidMassAtP) {
  fem::BeamSegmentSpec s;
  s.elastic_modulus *= 1e6;
  auto blk = build_titop(segment_cms(s));
  const double m = s.mass, l = s.length;
  Eigen::Matrix2d rigid;
  rigid << m, m * l / 2, m * l / 2, m * l * l / 3;
  const Matrix g = dc(blk, kAccP, kFP);
  EXPECT_TRUE(g.isApprox(-rigid, 1e-6)) << g;
  // rigid body: Q follows P through the transport map
  EXPECT_TRUE(dc(blk, kAccP, kAccQ).isApprox(transport(l), 1e-6));
  EXPECT_NEAR(blk.mass, m, 1e-9);
}

TEST(BuildTitop, CantileverCompliance) {
  fem::BeamSegmentSpec s;
  auto blk = build_titop(segment_cms(s));
  const Matrix flex = -dc(blk, kFQ, kDefQ);
  const double l = s.length, ei = s.bending_stiffness();
  Eigen::Matrix2d ref;
  ref << l * l * l / (3 * ei), l * l / (2 * ei), l * l / (2 * ei), l / ei;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(flex(i, j) / ref(i, j), 1.0, 1e-2);
}

TEST(BuildTitop, ClampedFreeFrequenciesMatchFem) {
  fem::BeamSegmentSpec s;
  auto fm = fem::beam_matrices(s);
  const Vector ref = fem::natural_frequencies(fem::clamp(fm.stiffness, {0, 1}), fem::clamp(fm.mass, {0, 1}));
  auto blk = build_titop(fem::craig_bampton(fm, fm.dofs() - 4));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(blk.clamped_omega(i) / ref(i), 1.0, 1e-9);
  auto reduced = build_titop(segment_cms(s));
  EXPECT_NEAR(reduced.clamped_omega(0) / ref(0), 1.0, 1e-4);
}

TEST(ActuatedTitop, ZeroVoltageMatchesMechanicalBlock) {
  auto cms = actuated_cms();
  auto mech = build_titop(cms);
  auto act = build_actuated_titop(cms);
  const Labels in{port::kAccPt, port::kAccPr, port::kFQf, port::kFQm};
  auto sub = lti::transfer_select(act.model, in, mech.model.output_labels());
  EXPECT_EQ(sub.a(), mech.model.a());
  EXPECT_EQ(sub.b(), mech.model.b());
  EXPECT_EQ(sub.c(), mech.model.c());
  EXPECT_EQ(sub.d(), mech.model.d());
}

// Full-length patch: the induced moments sit on the clamped boundary DOFs,
// so no elastic motion is excited and only the capacitive charge remains.
TEST(ActuatedTitop, BothEndsClampedChargeIsCapacitive) {
  fem::BeamSegmentSpec s;
  fem::PiezoSpec p;
  p.length = s.length;
  auto blk = build_actuated_titop(actuated_cms(p, s));
  const Labels in{port::kFQf, port::kFQm, port::kVolt};
  const Labels out{port::kDefQt, port::kDefQr, port::kCharge};
  const Matrix g = dc(blk, in, out);
  // F_Q keeps u_Qe = 0
  const Eigen::Vector2d f = -g.topLeftCorner(2, 2).lu().solve(g.topRightCorner(2, 1));
  const double charge = g.bottomLeftCorner(1, 2).row(0).dot(f) + g(2, 2);
  EXPECT_NEAR(charge / p.capacitance(), 1.0, 1e-9);
}

TEST(ActuatedTitop, TipRotationMatchesStaticFem) {
  fem::BeamSegmentSpec s;
  fem::PiezoSpec p;
  auto fm = fem::piezo_coupling(fem::beam_matrices(s), p);
  const Vector q = fem::clamp(fm.stiffness, {0, 1}).ldlt().solve(fm.piezo_column.tail(fm.dofs() - 2));
  const double tip_rot = q(q.size() - 1), tip_def = q(q.size() - 2);
  auto blk = build_actuated_titop(fem::craig_bampton(fm, fem::kDefaultModesPerSegment));
  const Matrix g = dc(blk, {port::kVolt}, kDefQ);
  EXPECT_LT(p.d31, 0.0);
  EXPECT_LT(g(1, 0), 0.0);
  EXPECT_NEAR(g(1, 0) / tip_rot, 1.0, 1e-9);
  EXPECT_NEAR(g(0, 0) / tip_def, 1.0, 1e-9);
}

TEST(TitopProperties, CollocatedMobilityIsPositiveReal) {
  auto blk = build_titop(segment_cms());
  lti::FrequencyEvaluator ev(lti::transfer_select(blk.model, kFQ, kDefQ));
  CMatrix g;
  for (double w : lti::logspace(-3, 3, 400)) {
    ASSERT_TRUE(ev.eval(w, g));
    // load applied on the segment is -F_Q, velocity is jω u_Qe
    const CMatrix z = -std::complex<double>(0, w) * g;
    const Eigen::Matrix2d herm = 0.5 * (z + z.adjoint()).real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(herm);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * z.norm()) << "omega " << w;
  }
}

TEST(TitopProperties, PortSymmetryOfUniformSegment) {
  auto cms = segment_cms();
  auto fwd = build_titop(cms);
  auto rev = build_titop(mirrored(cms));
  const auto omega = lti::logspace(-2, 3, 60);
  auto gf = lti::freq_response(lti::transfer_select(fwd.model, kFQ, kDefQ), omega);
  auto gr = lti::freq_response(lti::transfer_select(rev.model, kFQ, kDefQ), omega);
  for (std::size_t i = 0; i < omega.size(); ++i)
    EXPECT_LT((gf[i].cwiseAbs() - gr[i].cwiseAbs()).norm(), 1e-6 * gf[i].norm());
}

TEST(TitopProperties, TwoHalfSegmentsMatchOneSegment) {
  fem::BeamSegmentSpec full;
  fem::BeamSegmentSpec half = full;
  half.length /= 2;
  half.mass /= 2;
  auto one = build_titop(segment_cms(full));
  auto a = lti::prefixed(build_titop(segment_cms(half)).model, "a.");
  auto b = lti::prefixed(build_titop(segment_cms(half)).model, "b.");
  const std::vector<lti::StateSpace> blocks{a, b};
  const std::vector<lti::Connection> wires{
      {"a." + port::kAccQt, "b." + port::kAccPt}, {"a." + port::kAccQr, "b." + port::kAccPr},
      {"b." + port::kFPf, "a." + port::kFQf, -1.0}, {"b." + port::kFPm, "a." + port::kFQm, -1.0}};
  auto chain = lti::interconnect(blocks, wires);
  auto freqs = [](const lti::StateSpace& sys) {
    std::vector<double> w;
    for (auto p : lti::poles(sys)) if (p.imag() > 0) w.push_back(std::abs(p));
    std::sort(w.begin(), w.end());
    return w;
  };
  auto wc = freqs(chain), wo = freqs(one.model);
  ASSERT_GE(wc.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(wc[i] / wo[i], 1.0, 1e-2) << i;
  // the chain's P-side DC mass is the full segment's rigid mass
  Matrix g = lti::dc_gain(lti::transfer_select(chain, {"a." + port::kAccPt, "a." + port::kAccPr},
                                                {"a." + port::kFPf, "a." + port::kFPm}));
  EXPECT_NEAR(-g(0, 0), full.mass, 1e-9);
  EXPECT_NEAR(-g(1, 1), full.mass * full.length * full.length / 3, 1e-8);
}
