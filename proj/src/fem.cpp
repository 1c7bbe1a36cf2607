#include "elmo/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elmo::fem {

void BeamSegmentSpec::validate() const {
  if (!(length > 0 && mass > 0 && thickness > 0 && diameter > 0 && elastic_modulus > 0))
    throw Error("beam segment: all physical parameters must be positive");
  if (!(thickness < diameter / 2)) throw Error("beam segment: non-physical section (wall thickness >= radius)");
  if (!(modal_damping > 0 && modal_damping <= 0.2)) throw Error("beam segment: modal damping must lie in (0, 0.2]");
  if (n_elements < 2) throw Error("beam segment: need at least 2 elements");
}

double BeamSegmentSpec::area_moment() const {
  const double inner = diameter - 2 * thickness;
  return std::numbers::pi * (std::pow(diameter, 4) - std::pow(inner, 4)) / 64.0;
}

void PiezoSpec::validate() const {
  if (!(length > 0 && thickness > 0 && width > 0 && density > 0 && modulus > 0 && eps33 > 0))
    throw Error("piezo: physical parameters must be positive");
  if (!std::isfinite(d31)) throw Error("piezo: d31 must be finite");
  if (host_element_index < 0) throw Error("piezo: host element index out of range");
}

double PiezoSpec::moment_per_volt(double host_depth) const {
  // blocked force E_p d31 w_p times the arm to the host neutral axis
  return modulus * d31 * width * (host_depth + thickness) / 2.0;
}

namespace {

Eigen::Matrix4d element_stiffness(double ei, double l) {
  Eigen::Matrix4d k;
  k << 12, 6 * l, -12, 6 * l,
       6 * l, 4 * l * l, -6 * l, 2 * l * l,
       -12, -6 * l, 12, -6 * l,
       6 * l, 2 * l * l, -6 * l, 4 * l * l;
  return k * (ei / (l * l * l));
}

Eigen::Matrix4d element_mass(double rho_a, double l) {
  Eigen::Matrix4d m;
  m << 156, 22 * l, 54, -13 * l,
       22 * l, 4 * l * l, 13 * l, -3 * l * l,
       54, 13 * l, 156, -22 * l,
       -13 * l, -3 * l * l, -22 * l, 4 * l * l;
  return m * (rho_a * l / 420.0);
}

void scatter(Matrix& global, const Eigen::Matrix4d& local, int element) {
  const int o = 2 * element;
  global.block(o, o, 4, 4) += local;
}

}  // namespace

FemModel beam_matrices(const BeamSegmentSpec& spec) {
  spec.validate();
  FemModel fem;
  fem.spec = spec;
  const int n = fem.dofs();
  const double l = fem.element_length();
  fem.mass = Matrix::Zero(n, n);
  fem.stiffness = Matrix::Zero(n, n);
  const Eigen::Matrix4d ke = element_stiffness(spec.bending_stiffness(), l);
  const Eigen::Matrix4d me = element_mass(spec.mass_per_length(), l);
  for (int e = 0; e < spec.n_elements; ++e) {
    scatter(fem.stiffness, ke, e);
    scatter(fem.mass, me, e);
  }
  return fem;
}

Vector slope_interpolation(const FemModel& fem, double x) {
  const double l = fem.element_length();
  const int ne = fem.spec.n_elements;
  if (x < -1e-12 * fem.spec.length || x > fem.spec.length * (1 + 1e-12)) throw Error("slope_interpolation: position off the beam");
  int e = std::clamp(static_cast<int>(std::floor(x / l)), 0, ne - 1);
  const double xi = std::clamp((x - e * l) / l, 0.0, 1.0);
  Vector row = Vector::Zero(fem.dofs());
  row(2 * e + 0) = (-6 * xi + 6 * xi * xi) / l;
  row(2 * e + 1) = 1 - 4 * xi + 3 * xi * xi;
  row(2 * e + 2) = (6 * xi - 6 * xi * xi) / l;
  row(2 * e + 3) = -2 * xi + 3 * xi * xi;
  return row;
}

FemModel piezo_coupling(FemModel fem, const PiezoSpec& piezo) {
  piezo.validate();
  const int ne = fem.spec.n_elements;
  if (piezo.host_element_index >= ne) throw Error("piezo: host element index out of range");
  const double l = fem.element_length();
  const double xa = piezo.host_element_index * l;
  const double xb = xa + piezo.length;
  if (xb > fem.spec.length * (1 + 1e-12)) throw Error("piezo: patch does not fit on the segment");

  const double mp = piezo.moment_per_volt(fem.spec.diameter);
  fem.piezo_column = mp * (slope_interpolation(fem, std::min(xb, fem.spec.length)) - slope_interpolation(fem, xa));
  fem.capacitance = piezo.capacitance();

  // Patch mass (lumped at element nodes) and bending stiffness, in proportion
  // to the covered length of each element.
  const double arm = (fem.spec.diameter + piezo.thickness) / 2.0;
  const double ei_patch = piezo.modulus * piezo.width * piezo.thickness * arm * arm;
  const Eigen::Matrix4d ke_unit = element_stiffness(1.0, l);
  for (int e = 0; e < ne; ++e) {
    const double lo = std::max(xa, e * l), hi = std::min(xb, (e + 1) * l);
    if (hi <= lo) continue;
    const double frac = (hi - lo) / l;
    const double m = frac * l / piezo.length * piezo.mass();
    fem.mass(FemModel::transverse_dof(e), FemModel::transverse_dof(e)) += m / 2;
    fem.mass(FemModel::transverse_dof(e + 1), FemModel::transverse_dof(e + 1)) += m / 2;
    scatter(fem.stiffness, ke_unit * (frac * ei_patch), e);
  }
  fem.added_mass = piezo.mass();
  return fem;
}

Vector natural_frequencies(const Matrix& stiffness, const Matrix& mass) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(stiffness, mass);
  if (ges.info() != Eigen::Success) throw Error("generalized eigenproblem failed");
  Vector w = ges.eigenvalues();
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::sqrt(std::max(0.0, w(i)));
  return w;
}

Matrix clamp(const Matrix& m, const std::vector<int>& fixed) {
  std::vector<int> keep;
  for (int i = 0; i < m.rows(); ++i)
    if (std::find(fixed.begin(), fixed.end(), i) == fixed.end()) keep.push_back(i);
  Matrix out(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(keep[i], keep[j]);
  return out;
}

CmsModel craig_bampton(const FemModel& fem, int n_modes) {
  const int n = fem.dofs();
  const int last = fem.nodes() - 1;
  const std::vector<int> boundary{FemModel::transverse_dof(0), FemModel::rotation_dof(0), FemModel::transverse_dof(last),
                                  FemModel::rotation_dof(last)};
  std::vector<int> interior;
  for (int i = 0; i < n; ++i)
    if (std::find(boundary.begin(), boundary.end(), i) == boundary.end()) interior.push_back(i);
  const int ni = static_cast<int>(interior.size());
  if (n_modes < 1 || n_modes > ni)
    throw Error("craig_bampton: n_modes must lie in [1, " + std::to_string(ni) + "], got " + std::to_string(n_modes));

  // Permutation to (boundary, interior) ordering.
  Matrix perm = Matrix::Zero(n, n);
  for (int k = 0; k < 4; ++k) perm(boundary[k], k) = 1.0;
  for (int k = 0; k < ni; ++k) perm(interior[k], 4 + k) = 1.0;
  const Matrix m = perm.transpose() * fem.mass * perm;
  const Matrix k = perm.transpose() * fem.stiffness * perm;

  const Matrix kii = k.bottomRightCorner(ni, ni);
  const Matrix mii = m.bottomRightCorner(ni, ni);
  const Matrix static_modes = -kii.ldlt().solve(k.bottomLeftCorner(ni, 4));

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(kii, mii);
  if (ges.info() != Eigen::Success) throw Error("craig_bampton: fixed-interface eigenproblem failed");
  const Matrix phi = ges.eigenvectors().leftCols(n_modes);  // mass-normalized

  Matrix t = Matrix::Zero(n, 4 + n_modes);
  t.topLeftCorner(4, 4).setIdentity();
  t.bottomLeftCorner(ni, 4) = static_modes;
  t.bottomRightCorner(ni, n_modes) = phi;

  CmsModel cms;
  cms.spec = fem.spec;
  cms.mass = t.transpose() * m * t;
  cms.stiffness = t.transpose() * k * t;
  cms.mass = 0.5 * (cms.mass + cms.mass.transpose()).eval();
  cms.stiffness = 0.5 * (cms.stiffness + cms.stiffness.transpose()).eval();
  // η coordinates are mass- and stiffness-orthonormal by construction.
  cms.fixed_interface_omega = ges.eigenvalues().head(n_modes).cwiseMax(0.0).cwiseSqrt();
  cms.fixed_interface_damping = Vector::Constant(n_modes, fem.spec.modal_damping);
  if (fem.has_piezo()) cms.piezo_column = t.transpose() * (perm.transpose() * fem.piezo_column);
  cms.capacitance = fem.capacitance;
  cms.added_mass = fem.added_mass;
  return cms;
}

}  // namespace elmo::fem
