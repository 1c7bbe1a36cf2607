#include "elmo/titop.hpp"

#include <cmath>

namespace elmo::titop {

Eigen::Matrix2d transport(double d) {
  if (!std::isfinite(d)) throw Error("transport: offset must be finite");
  Eigen::Matrix2d phi;
  phi << 1.0, d, 0.0, 1.0;
  return phi;
}

namespace port {
std::string modal_force(int k) { return "q" + std::to_string(k); }
std::string modal_velocity(int k) { return "pd" + std::to_string(k); }
}  // namespace port

namespace {

TitopBlock build(const fem::CmsModel& cms, bool actuated, const TitopOptions& opts) {
  const int k = cms.modes();
  const int nq = 4 + k;
  if (k < 1 || cms.mass.rows() != nq || cms.mass.cols() != nq || cms.stiffness.rows() != nq ||
      cms.stiffness.cols() != nq || cms.fixed_interface_damping.size() != k)
    throw Error("titop: inconsistent Craig-Bampton partition dimensions");
  if (actuated && (!cms.has_piezo() || cms.piezo_column.size() != nq))
    throw Error("titop: actuated block requires piezo coupling data");

  const double len = cms.spec.length;
  const Eigen::Matrix2d tau = transport(len);
  const double xi = opts.modal_damping ? cms.spec.modal_damping : 0.0;

  // q = Tr u_P + Te e, e = (elastic Q displacement, η).
  const int ne = 2 + k;
  Matrix tr = Matrix::Zero(nq, 2);
  tr.topRows(2).setIdentity();
  tr.middleRows(2, 2) = tau;
  Matrix te = Matrix::Zero(nq, ne);
  te.bottomRows(ne).setIdentity();

  const Matrix mrr = tr.transpose() * cms.mass * tr;
  const Matrix mer = te.transpose() * cms.mass * tr;
  Matrix mee = te.transpose() * cms.mass * te;
  Matrix kee = te.transpose() * cms.stiffness * te;
  mee = 0.5 * (mee + mee.transpose()).eval();
  kee = 0.5 * (kee + kee.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(kee, mee);
  if (ges.info() != Eigen::Success) throw Error("titop: clamped eigenproblem failed");
  const Matrix psi = ges.eigenvectors();
  const Vector w2 = ges.eigenvalues();
  if (w2.minCoeff() <= 0.0) throw Error("titop: clamped segment is not positive definite");
  const Vector w = w2.cwiseSqrt();

  const Matrix lr = psi.transpose() * mer;                 // ne x 2
  const Matrix lq = psi.transpose().leftCols(2);           // ne x 2
  Vector lv = Vector::Zero(ne), br = Vector::Zero(2);
  if (actuated) {
    lv = psi.transpose() * (te.transpose() * cms.piezo_column);
    br = tr.transpose() * cms.piezo_column;
  }

  const Matrix omega2 = w2.asDiagonal();
  const Matrix damp = (2.0 * xi * w).asDiagonal();
  const int ni0 = actuated ? 5 : 4;
  const int no0 = actuated ? 7 : 6;
  const int ni = ni0 + (opts.modal_ports ? ne : 0);
  const int no = no0 + (opts.modal_ports ? ne : 0);

  Matrix a = Matrix::Zero(2 * ne, 2 * ne);
  a.topRightCorner(ne, ne).setIdentity();
  a.bottomLeftCorner(ne, ne) = -omega2;
  a.bottomRightCorner(ne, ne) = -damp;

  // p̈ = -Ω²p - 2ξΩṗ - L_r ü_P - L_Q F_Q + L_v v
  Matrix b = Matrix::Zero(2 * ne, ni);
  b.block(ne, 0, ne, 2) = -lr;
  b.block(ne, 2, ne, 2) = -lq;
  if (actuated) b.block(ne, 4, ne, 1) = lv;

  Matrix c = Matrix::Zero(no, 2 * ne);
  Matrix d = Matrix::Zero(no, ni);
  // F_P = -M_rr ü_P - τᵀF_Q + b_r v - L_rᵀ p̈
  c.block(0, 0, 2, ne) = lr.transpose() * omega2;
  c.block(0, ne, 2, ne) = lr.transpose() * damp;
  d.block(0, 0, 2, 2) = -(mrr - lr.transpose() * lr);
  d.block(0, 2, 2, 2) = lr.transpose() * lq - tau.transpose();
  // ü_Q = τ ü_P + L_Qᵀ p̈
  c.block(2, 0, 2, ne) = -lq.transpose() * omega2;
  c.block(2, ne, 2, ne) = -lq.transpose() * damp;
  d.block(2, 0, 2, 2) = tau - lq.transpose() * lr;
  d.block(2, 2, 2, 2) = -lq.transpose() * lq;
  // u_Qe = L_Qᵀ p
  c.block(4, 0, 2, ne) = lq.transpose();
  if (actuated) {
    d.block(0, 4, 2, 1) = br - lr.transpose() * lv;
    d.block(2, 4, 2, 1) = lq.transpose() * lv;
    c.block(6, 0, 1, ne) = lv.transpose();
    d(6, 4) = cms.capacitance;
  }

  if (opts.modal_ports) {
    // p̈ += f
    b.block(ne, ni0, ne, ne).setIdentity();
    d.block(0, ni0, 2, ne) = -lr.transpose();
    d.block(2, ni0, 2, ne) = lq.transpose();
    c.block(no0, ne, ne, ne).setIdentity();
  }

  Labels in{port::kAccPt, port::kAccPr, port::kFQf, port::kFQm};
  Labels out{port::kFPf, port::kFPm, port::kAccQt, port::kAccQr, port::kDefQt, port::kDefQr};
  if (actuated) {
    in.push_back(port::kVolt);
    out.push_back(port::kCharge);
  }
  if (opts.modal_ports)
    for (int j = 1; j <= ne; ++j) {
      in.push_back(port::modal_force(j));
      out.push_back(port::modal_velocity(j));
    }

  TitopBlock blk;
  blk.model = lti::make_ss(std::move(a), std::move(b), std::move(c), std::move(d), std::move(in), std::move(out));
  blk.length = len;
  blk.mass = mrr(0, 0);
  blk.clamped_omega = w;
  blk.actuated = actuated;
  return blk;
}

}  // namespace

TitopBlock build_titop(const fem::CmsModel& cms, const TitopOptions& opts) { return build(cms, false, opts); }

TitopBlock build_actuated_titop(const fem::CmsModel& cms, const TitopOptions& opts) {
  return build(cms, true, opts);
}

}  // namespace elmo::titop
