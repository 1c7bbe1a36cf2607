#include "elmo/lti.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace elmo::lti {

namespace {

bool all_finite(const Matrix& m) { return m.size() == 0 || m.allFinite(); }

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

int find_label(const Labels& labels, const std::string& name) {
  auto it = std::find(labels.begin(), labels.end(), name);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

}  // namespace

int StateSpace::input_index(const std::string& name) const {
  int i = find_label(in_, name);
  if (i < 0) throw Error("unknown input port '" + name + "'");
  return i;
}

int StateSpace::output_index(const std::string& name) const {
  int i = find_label(out_, name);
  if (i < 0) throw Error("unknown output port '" + name + "'");
  return i;
}

bool StateSpace::has_input(const std::string& name) const { return find_label(in_, name) >= 0; }
bool StateSpace::has_output(const std::string& name) const { return find_label(out_, name) >= 0; }

StateSpace make_ss(Matrix a, Matrix b, Matrix c, Matrix d, Labels inputs, Labels outputs) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error("state matrix must be square, got " + dims(a));
  const Eigen::Index m = d.cols();
  const Eigen::Index p = d.rows();
  if (n == 0) {
    if (b.size() != 0 || c.size() != 0) {
      if (b.rows() != 0 || c.cols() != 0) throw Error("B/C given for a model without states");
    }
    b.resize(0, m);
    c.resize(p, 0);
  }
  if (b.rows() != n || b.cols() != m) throw Error("input map is " + dims(b) + ", expected " + std::to_string(n) + "x" + std::to_string(m));
  if (c.rows() != p || c.cols() != n) throw Error("output map is " + dims(c) + ", expected " + std::to_string(p) + "x" + std::to_string(n));
  if (static_cast<Eigen::Index>(inputs.size()) != m)
    throw Error("got " + std::to_string(inputs.size()) + " input labels for " + std::to_string(m) + " inputs");
  if (static_cast<Eigen::Index>(outputs.size()) != p)
    throw Error("got " + std::to_string(outputs.size()) + " output labels for " + std::to_string(p) + " outputs");
  if (!all_finite(a) || !all_finite(b) || !all_finite(c) || !all_finite(d)) throw Error("non-finite entry in state-space data");
  StateSpace s;
  s.a_ = std::move(a);
  s.b_ = std::move(b);
  s.c_ = std::move(c);
  s.d_ = std::move(d);
  s.in_ = std::move(inputs);
  s.out_ = std::move(outputs);
  return s;
}

StateSpace gain(const Matrix& d, Labels inputs, Labels outputs) {
  return make_ss(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d, std::move(inputs), std::move(outputs));
}

StateSpace prefixed(const StateSpace& sys, const std::string& prefix) {
  Labels in = sys.input_labels(), out = sys.output_labels();
  for (auto& l : in) l = prefix + l;
  for (auto& l : out) l = prefix + l;
  return relabeled(sys, std::move(in), std::move(out));
}

StateSpace relabeled(const StateSpace& sys, Labels inputs, Labels outputs) {
  return make_ss(sys.a(), sys.b(), sys.c(), sys.d(), std::move(inputs), std::move(outputs));
}

StateSpace interconnect(std::span<const StateSpace> blocks, std::span<const Connection> connections,
                        const std::optional<Labels>& outputs) {
  int n = 0;
  Labels in_labels, out_labels;
  std::map<std::string, int> in_index;
  for (const auto& blk : blocks) {
    n += blk.states();
    for (const auto& l : blk.input_labels()) {
      if (!in_index.count(l)) {
        in_index[l] = static_cast<int>(in_labels.size());
        in_labels.push_back(l);
      }
    }
    for (const auto& l : blk.output_labels()) {
      if (find_label(out_labels, l) >= 0) throw Error("duplicate output label '" + l + "'");
      out_labels.push_back(l);
    }
  }
  const int nu = static_cast<int>(in_labels.size());
  const int ny = static_cast<int>(out_labels.size());

  Matrix a = Matrix::Zero(n, n), b = Matrix::Zero(n, nu), c = Matrix::Zero(ny, n), d = Matrix::Zero(ny, nu);
  int xo = 0, yo = 0;
  for (const auto& blk : blocks) {
    const int ni = blk.states();
    a.block(xo, xo, ni, ni) = blk.a();
    c.block(yo, xo, blk.outputs(), ni) = blk.c();
    for (int j = 0; j < blk.inputs(); ++j) {
      const int col = in_index[blk.input_labels()[j]];
      b.block(xo, col, ni, 1) += blk.b().col(j);
      d.block(yo, col, blk.outputs(), 1) += blk.d().col(j);
    }
    xo += ni;
    yo += blk.outputs();
  }

  Matrix route = Matrix::Zero(nu, ny);
  std::vector<bool> in_connected(nu, false), out_connected(ny, false);
  for (const auto& con : connections) {
    const int yi = find_label(out_labels, con.from);
    if (yi < 0) throw Error("connection source '" + con.from + "' is not an output of any block");
    auto it = in_index.find(con.to);
    if (it == in_index.end()) throw Error("connection target '" + con.to + "' is not an input of any block");
    route(it->second, yi) += con.gain;
    in_connected[it->second] = true;
    out_connected[yi] = true;
  }

  std::vector<int> ext_in;
  for (int j = 0; j < nu; ++j)
    if (!in_connected[j]) ext_in.push_back(j);
  Matrix sel = Matrix::Zero(nu, static_cast<Eigen::Index>(ext_in.size()));
  for (std::size_t k = 0; k < ext_in.size(); ++k) sel(ext_in[k], static_cast<Eigen::Index>(k)) = 1.0;

  // (I - D P) y = C x + D E u
  Matrix loop = Matrix::Identity(ny, ny) - d * route;
  Matrix cy, dy;
  if (ny > 0) {
    // Row/column equilibration first: port units can differ by many
    // decades, which would make a well-posed loop look ill-conditioned.
    Vector rs(ny), cs(ny);
    for (int i = 0; i < ny; ++i) {
      const double m = loop.row(i).cwiseAbs().maxCoeff();
      rs(i) = m > 0 ? 1.0 / m : 1.0;
    }
    Matrix scaled = rs.asDiagonal() * loop;
    for (int j = 0; j < ny; ++j) {
      const double m = scaled.col(j).cwiseAbs().maxCoeff();
      cs(j) = m > 0 ? 1.0 / m : 1.0;
    }
    scaled = scaled * cs.asDiagonal();
    Eigen::PartialPivLU<Matrix> lu(scaled);
    const double rc = lu.rcond();
    if (!(rc > 1e-12)) throw Error("algebraic loop is singular (I - D_loop not invertible)");
    cy = cs.asDiagonal() * lu.solve(rs.asDiagonal() * c);
    dy = cs.asDiagonal() * lu.solve(rs.asDiagonal() * (d * sel));
  } else {
    cy = c;
    dy = d * sel;
  }
  Matrix acl = a + b * route * cy;
  Matrix bcl = b * sel + b * route * dy;

  std::vector<int> keep;
  if (outputs) {
    for (const auto& l : *outputs) {
      const int yi = find_label(out_labels, l);
      if (yi < 0) throw Error("requested output '" + l + "' does not exist");
      keep.push_back(yi);
    }
  } else {
    for (int i = 0; i < ny; ++i)
      if (!out_connected[i]) keep.push_back(i);
  }
  Matrix ccl(static_cast<Eigen::Index>(keep.size()), n), dcl(static_cast<Eigen::Index>(keep.size()), bcl.cols());
  Labels out_kept;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    ccl.row(static_cast<Eigen::Index>(k)) = cy.row(keep[k]);
    dcl.row(static_cast<Eigen::Index>(k)) = dy.row(keep[k]);
    out_kept.push_back(out_labels[keep[k]]);
  }
  Labels in_kept;
  for (int j : ext_in) in_kept.push_back(in_labels[j]);
  return make_ss(std::move(acl), std::move(bcl), std::move(ccl), std::move(dcl), std::move(in_kept), std::move(out_kept));
}

StateSpace transfer_select(const StateSpace& sys, const Labels& inputs, const Labels& outputs) {
  const int n = sys.states();
  Matrix b(n, static_cast<Eigen::Index>(inputs.size()));
  Matrix c(static_cast<Eigen::Index>(outputs.size()), n);
  Matrix d(static_cast<Eigen::Index>(outputs.size()), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t j = 0; j < inputs.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = sys.b().col(sys.input_index(inputs[j]));
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const int oi = sys.output_index(outputs[i]);
    c.row(static_cast<Eigen::Index>(i)) = sys.c().row(oi);
    for (std::size_t j = 0; j < inputs.size(); ++j)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sys.d()(oi, sys.input_index(inputs[j]));
  }
  return make_ss(sys.a(), std::move(b), std::move(c), std::move(d), inputs, outputs);
}

namespace {

// Parlett-Reinsch diagonal balancing with power-of-two factors.
Vector balancing_scales(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Vector s = Vector::Ones(n);
  if (n == 0) return s;
  Matrix w = a.cwiseAbs();
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = 0.0, row = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i) continue;
        col += w(k, i);
        row += w(i, k);
      }
      if (col == 0.0 || row == 0.0) continue;
      double f = 1.0;
      const double total = col + row;
      while (col < row / 2.0) {
        col *= 2.0;
        row /= 2.0;
        f *= 2.0;
      }
      while (col >= row * 2.0) {
        col /= 2.0;
        row *= 2.0;
        f /= 2.0;
      }
      if ((col + row) < 0.95 * total) {
        converged = false;
        s(i) *= f;
        w.row(i) /= f;
        w.col(i) *= f;
      }
    }
  }
  return s;
}

}  // namespace

StateSpace balanced(const StateSpace& sys) {
  if (sys.states() == 0) return sys;
  const Vector s = balancing_scales(sys.a());
  const Vector inv = s.cwiseInverse();
  Matrix a = inv.asDiagonal() * sys.a() * s.asDiagonal();
  Matrix b = inv.asDiagonal() * sys.b();
  Matrix c = sys.c() * s.asDiagonal();
  return make_ss(std::move(a), std::move(b), std::move(c), sys.d(), sys.input_labels(), sys.output_labels());
}

std::vector<std::complex<double>> poles(const StateSpace& sys) {
  std::vector<std::complex<double>> out;
  if (sys.states() == 0) return out;
  const StateSpace bal = balanced(sys);
  Eigen::EigenSolver<Matrix> es(bal.a(), false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue iteration failed");
  const auto& ev = es.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  return out;
}

Stability is_stable(const StateSpace& sys, int rigid_modes, double margin) {
  auto ev = poles(sys);
  std::sort(ev.begin(), ev.end(), [](auto x, auto y) { return std::abs(x) < std::abs(y); });
  std::size_t skip = 0;
  while (skip < ev.size() && static_cast<int>(skip) < rigid_modes && std::abs(ev[skip]) < 1e-9) ++skip;
  Stability st;
  for (std::size_t i = skip; i < ev.size(); ++i) st.spectral_abscissa = std::max(st.spectral_abscissa, ev[i].real());
  st.stable = st.spectral_abscissa < -margin;
  return st;
}

FrequencyEvaluator::FrequencyEvaluator(const StateSpace& sys) {
  const StateSpace bal = balanced(sys);
  d_ = bal.d();
  if (bal.states() == 0) {
    qb_ = bal.b();
    cq_ = bal.c();
    return;
  }
  Eigen::HessenbergDecomposition<Matrix> hd(bal.a());
  h_ = hd.matrixH();
  const Matrix q = hd.matrixQ();
  qb_ = q.transpose() * bal.b();
  cq_ = bal.c() * q;
}

bool FrequencyEvaluator::solve(double omega, const Eigen::MatrixXcd& rhs, Eigen::MatrixXcd& x) const {
  const Eigen::Index n = h_.rows();
  Eigen::MatrixXcd m = -h_.cast<std::complex<double>>();
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) += std::complex<double>(0.0, omega);
  x = rhs;
  const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff() + std::abs(omega));
  // Gaussian elimination on an upper-Hessenberg matrix: one subdiagonal.
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (std::abs(m(k + 1, k)) > std::abs(m(k, k))) {
      m.row(k).tail(n - k).swap(m.row(k + 1).tail(n - k));
      x.row(k).swap(x.row(k + 1));
    }
    if (std::abs(m(k, k)) <= 1e-300) return false;
    const std::complex<double> l = m(k + 1, k) / m(k, k);
    if (l != 0.0) {
      m.row(k + 1).tail(n - k - 1) -= l * m.row(k).tail(n - k - 1);
      x.row(k + 1) -= l * x.row(k);
    }
    m(k + 1, k) = 0.0;
  }
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (std::abs(m(k, k)) <= 1e-14 * scale) return false;
    if (k + 1 < n) x.row(k) -= m.row(k).tail(n - k - 1) * x.bottomRows(n - k - 1);
    x.row(k) /= m(k, k);
  }
  return true;
}

bool FrequencyEvaluator::eval(double omega, CMatrix& out) const {
  if (h_.rows() == 0) {
    out = d_.cast<std::complex<double>>();
    return true;
  }
  Eigen::MatrixXcd x;
  if (!solve(omega, qb_.cast<std::complex<double>>(), x)) return false;
  out = cq_.cast<std::complex<double>>() * x + d_.cast<std::complex<double>>();
  return true;
}

bool FrequencyEvaluator::eval_column(double omega, int input, Eigen::VectorXcd& out) const {
  if (h_.rows() == 0) {
    out = d_.col(input).cast<std::complex<double>>();
    return true;
  }
  Eigen::MatrixXcd x;
  if (!solve(omega, qb_.col(input).cast<std::complex<double>>(), x)) return false;
  out = cq_.cast<std::complex<double>>() * x.col(0) + d_.col(input).cast<std::complex<double>>();
  return true;
}

std::vector<CMatrix> freq_response(const StateSpace& sys, std::span<const double> omega) {
  FrequencyEvaluator fe(sys);
  std::vector<CMatrix> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (!fe.eval(omega[k], out[k])) {
      std::ostringstream os;
      os << "singular resolvent at omega = " << omega[k] << " rad/s (undamped pole)";
      throw Error(os.str());
    }
  }
  return out;
}

Matrix dc_gain(const StateSpace& sys) {
  if (sys.states() == 0) return sys.d();
  const StateSpace bal = balanced(sys);
  Eigen::PartialPivLU<Matrix> lu(bal.a());
  const double rc = lu.rcond();
  if (!(rc > 1e-13)) throw Error("dc_gain: state matrix is singular (rcond " + std::to_string(rc) + ")");
  return bal.d() - bal.c() * lu.solve(bal.b());
}

double sigma_max(const CMatrix& g) {
  if (g.size() == 0) return 0.0;
  if (g.rows() == 1 || g.cols() == 1) return g.norm();
  Eigen::JacobiSVD<CMatrix> svd(g);
  return svd.singularValues()(0);
}

std::vector<double> logspace(double lo_exp10, double hi_exp10, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    w[static_cast<std::size_t>(i)] = std::pow(10.0, lo_exp10 + (hi_exp10 - lo_exp10) * t);
  }
  return w;
}

namespace {

double gain_at(const FrequencyEvaluator& fe, double w) {
  CMatrix g;
  if (!fe.eval(w, g)) return std::numeric_limits<double>::infinity();
  return sigma_max(g);
}

// Golden-section refinement of a local maximum bracketed by [lo, hi] (log ω).
double refine_peak(const FrequencyEvaluator& fe, double lo, double hi, double& best_w) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo), b = std::log(hi);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = gain_at(fe, std::exp(x1)), f2 = gain_at(fe, std::exp(x2));
  for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = gain_at(fe, std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = gain_at(fe, std::exp(x2));
    }
  }
  best_w = f1 > f2 ? std::exp(x1) : std::exp(x2);
  return std::max(f1, f2);
}

}  // namespace

double grid_peak_gain(const StateSpace& sys, std::span<const double> omega, double* peak_omega) {
  FrequencyEvaluator fe(sys);
  double best = sigma_max(sys.d().cast<std::complex<double>>());
  double best_w = std::numeric_limits<double>::infinity();
  for (double w : omega) {
    const double g = gain_at(fe, w);
    if (g > best) {
      best = g;
      best_w = w;
    }
  }
  if (peak_omega) *peak_omega = best_w;
  return best;
}

namespace {

Matrix hamiltonian(const StateSpace& s, double gamma) {
  const Matrix& a = s.a();
  const Matrix& b = s.b();
  const Matrix& c = s.c();
  const Matrix& d = s.d();
  const Eigen::Index m = d.cols(), p = d.rows(), n = a.rows();
  const Matrix r = d.transpose() * d - gamma * gamma * Matrix::Identity(m, m);
  const Matrix sm = d * d.transpose() - gamma * gamma * Matrix::Identity(p, p);
  const Matrix rinv = r.inverse();
  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a - b * rinv * d.transpose() * c;
  h.topRightCorner(n, n) = -gamma * b * rinv * b.transpose();
  h.bottomLeftCorner(n, n) = gamma * c.transpose() * sm.inverse() * c;
  h.bottomRightCorner(n, n) = -a.transpose() + c.transpose() * d * rinv * b.transpose();
  return h;
}

}  // namespace

double hinf_norm(const StateSpace& sys, double rel_tol, double* peak_omega, double omega_min) {
  if (!(rel_tol > 0.0 && rel_tol <= 0.1)) throw Error("hinf_norm: rel_tol must lie in (0, 0.1]");
  if (!(omega_min >= 0.0) || !std::isfinite(omega_min)) throw Error("hinf_norm: omega_min must be finite and >= 0");
  const StateSpace s = balanced(sys);
  const double dnorm = sigma_max(s.d().cast<std::complex<double>>());
  if (s.states() == 0) {
    if (peak_omega) *peak_omega = omega_min;
    return dnorm;
  }
  auto ev = poles(s);
  double abscissa = -std::numeric_limits<double>::infinity();
  for (auto& l : ev) abscissa = std::max(abscissa, l.real());
  if (!(abscissa < 0.0)) throw Error("hinf_norm: system is not stable (spectral abscissa >= 0)");

  FrequencyEvaluator fe(s);
  double lb = dnorm, lb_w = std::numeric_limits<double>::infinity();
  auto probe = [&](double w) {
    w = std::max(w, omega_min);
    const double g = gain_at(fe, w);
    if (g > lb) {
      lb = g;
      lb_w = w;
    }
  };
  probe(omega_min);
  double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
  for (auto& l : ev) {
    const double mag = std::abs(l);
    wmin = std::min(wmin, mag);
    wmax = std::max(wmax, mag);
    probe(std::abs(l.imag()) > 0 ? std::abs(l.imag()) : mag);
    probe(mag);
  }
  for (double w : logspace(std::log10(wmin) - 1.0, std::log10(wmax) + 1.0, 60)) probe(w);
  if (lb == 0.0) {
    if (peak_omega) *peak_omega = 0.0;
    return 0.0;
  }

  for (int iter = 0; iter < 60; ++iter) {
    const double gamma = (1.0 + 2.0 * rel_tol) * lb;
    Eigen::EigenSolver<Matrix> es(hamiltonian(s, gamma), false);
    if (es.info() != Eigen::Success) break;
    std::vector<double> crossings;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const auto l = es.eigenvalues()(i);
      if (l.imag() > 0.0 && l.imag() >= omega_min && std::abs(l.real()) <= 1e-7 * std::max(1.0, std::abs(l))) crossings.push_back(l.imag());
    }
    if (crossings.empty()) {
      // Certified: lb <= norm < gamma. Polish the lower bound locally.
      if (std::isfinite(lb_w) && lb_w > 0.0) {
        double bw = lb_w;
        const double g = refine_peak(fe, std::max(lb_w / 1.05, omega_min), lb_w * 1.05, bw);
        if (g > lb) {
          lb = std::min(g, gamma);
          lb_w = bw;
        }
      }
      if (peak_omega) *peak_omega = lb_w;
      return lb;
    }
    std::sort(crossings.begin(), crossings.end());
    const double before = lb;
    for (std::size_t k = 0; k < crossings.size(); ++k) {
      probe(crossings[k]);
      if (k + 1 < crossings.size()) probe(std::sqrt(crossings[k] * crossings[k + 1]));
    }
    if (lb <= before * (1.0 + 1e-12)) {
      // No singular value exceeds the level at the reported crossings: the
      // imaginary-axis eigenvalues are spurious. Refine around them.
      for (double w : crossings) {
        double bw = w;
        const double g = refine_peak(fe, std::max(w / 1.05, omega_min), w * 1.05, bw);
        if (g > lb) {
          lb = g;
          lb_w = bw;
        }
      }
      if (lb <= before * (1.0 + 1e-12)) break;
    }
  }

  // Dense-grid fallback.
  double w0 = 0.0;
  const double lo = std::log10(wmin) - 2.0, hi = std::log10(wmax) + 2.0;
  auto grid = logspace(omega_min > 0.0 ? std::max(lo, std::log10(omega_min)) : lo, std::max(hi, lo + 1.0), 4000);
  if (omega_min > 0.0) grid.push_back(omega_min);
  double g = grid_peak_gain(s, grid, &w0);
  if (std::isfinite(w0) && w0 > 0.0) {
    double bw = w0;
    g = std::max(g, refine_peak(fe, std::max(w0 / 1.01, omega_min), w0 * 1.01, bw));
    w0 = bw;
  }
  if (g >= lb) {
    lb = g;
    lb_w = w0;
  }
  if (peak_omega) *peak_omega = lb_w;
  return lb;
}

Signal simulate(const StateSpace& sys, const Signal& input, const Vector& x0) {
  if (input.values.rows() != sys.inputs())
    throw Error("simulate: input has " + std::to_string(input.values.rows()) + " channels, model expects " +
                std::to_string(sys.inputs()));
  if (!(input.dt > 0.0)) throw Error("simulate: time step must be positive");
  const int n = sys.states(), m = sys.inputs();
  Vector x = x0.size() == 0 ? Vector::Zero(n) : x0;
  if (x.size() != n) throw Error("simulate: initial state has wrong dimension");

  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = sys.a() * input.dt;
  aug.topRightCorner(n, m) = sys.b() * input.dt;
  const Matrix phi = n > 0 ? Matrix(aug.exp()) : Matrix::Identity(n + m, n + m);
  const Matrix ad = phi.topLeftCorner(n, n);
  const Matrix bd = phi.topRightCorner(n, m);

  Signal out;
  out.t0 = input.t0;
  out.dt = input.dt;
  out.values.resize(sys.outputs(), input.samples());
  for (int k = 0; k < input.samples(); ++k) {
    const Vector u = input.values.col(k);
    out.values.col(k) = sys.c() * x + sys.d() * u;
    x = ad * x + bd * u;
  }
  return out;
}

}  // namespace elmo::lti
