#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace elmo {

/// Base error type for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Labels = std::vector<std::string>;

namespace lti {

/// Continuous-time state-space model x' = Ax + Bu, y = Cx + Du with named
/// input and output ports. Immutable once constructed.
class StateSpace {
 public:
  StateSpace() = default;

  int states() const { return static_cast<int>(a_.rows()); }
  int inputs() const { return static_cast<int>(d_.cols()); }
  int outputs() const { return static_cast<int>(d_.rows()); }

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Matrix& d() const { return d_; }
  const Labels& input_labels() const { return in_; }
  const Labels& output_labels() const { return out_; }

  int input_index(const std::string& name) const;
  int output_index(const std::string& name) const;
  bool has_input(const std::string& name) const;
  bool has_output(const std::string& name) const;

 private:
  friend StateSpace make_ss(Matrix, Matrix, Matrix, Matrix, Labels, Labels);
  Matrix a_, b_, c_, d_;
  Labels in_, out_;
};

/// Validating constructor. Any of A, B, C may be empty (0 states); D fixes
/// the port counts.
StateSpace make_ss(Matrix a, Matrix b, Matrix c, Matrix d, Labels inputs, Labels outputs);

/// Static gain block.
StateSpace gain(const Matrix& d, Labels inputs, Labels outputs);

/// Same model with every label prefixed, e.g. "s1." + "FP.f".
StateSpace prefixed(const StateSpace& sys, const std::string& prefix);
StateSpace relabeled(const StateSpace& sys, Labels inputs, Labels outputs);

/// Wire an output port (`from`) into an input port (`to`), scaled by `gain`.
/// Several connections into one input are summed.
struct Connection {
  std::string from;
  std::string to;
  double gain = 1.0;
};

/// Block-diagonal append of `blocks` followed by closing `connections`.
/// Inputs carrying the same label in several blocks are merged into one
/// external input. Connected inputs disappear; outputs that feed a
/// connection disappear too unless `outputs` lists the external outputs
/// explicitly (in which case exactly those are kept, in that order).
StateSpace interconnect(std::span<const StateSpace> blocks, std::span<const Connection> connections,
                        const std::optional<Labels>& outputs = std::nullopt);

/// Sub-system from the named ports; states unchanged.
StateSpace transfer_select(const StateSpace& sys, const Labels& inputs, const Labels& outputs);

struct Stability {
  bool stable = true;
  double spectral_abscissa = -std::numeric_limits<double>::infinity();
};

inline constexpr double kStabilityMargin = 1e-8;

std::vector<std::complex<double>> poles(const StateSpace& sys);

/// Stable when every eigenvalue has real part below -margin, ignoring the
/// `rigid_modes` eigenvalues of smallest magnitude if they satisfy |λ| < 1e-9.
Stability is_stable(const StateSpace& sys, int rigid_modes = 0, double margin = kStabilityMargin);

/// C (jωI - A)^{-1} B + D at each ω. Throws if the resolvent is singular at
/// some grid point; the message names the offending frequency.
std::vector<CMatrix> freq_response(const StateSpace& sys, std::span<const double> omega);

/// Precomputed Hessenberg form for repeated frequency-response evaluation.
class FrequencyEvaluator {
 public:
  explicit FrequencyEvaluator(const StateSpace& sys);
  /// Response at s = jω. Returns false when the resolvent is singular.
  bool eval(double omega, CMatrix& out) const;
  /// Only column `input` of the response.
  bool eval_column(double omega, int input, Eigen::VectorXcd& out) const;

 private:
  bool solve(double omega, const Eigen::MatrixXcd& rhs, Eigen::MatrixXcd& x) const;
  Matrix h_, qb_, cq_, d_;
};

/// Static gain D - C A^{-1} B. Throws when A is singular.
Matrix dc_gain(const StateSpace& sys);

/// Largest singular value.
double sigma_max(const CMatrix& g);

std::vector<double> logspace(double lo_exp10, double hi_exp10, int n);

/// Similarity-balanced copy (diagonal scaling of the states). Transfer is
/// unchanged; improves eigenvalue conditioning.
StateSpace balanced(const StateSpace& sys);

inline constexpr double kDefaultHinfTol = 1e-4;

/// H-infinity norm by level-set bisection on the Hamiltonian imaginary-axis
/// test, refined with singular-value evaluations at the crossing
/// frequencies. Falls back to a dense grid search when the Hamiltonian
/// eigenproblem misbehaves. Throws on unstable systems. Only ω >= omega_min
/// is searched.
double hinf_norm(const StateSpace& sys, double rel_tol = kDefaultHinfTol, double* peak_omega = nullptr,
                 double omega_min = 0.0);

/// max over a log grid of σ_max(G(jω)); reference/fallback.
double grid_peak_gain(const StateSpace& sys, std::span<const double> omega, double* peak_omega = nullptr);

/// Uniformly sampled multichannel signal, one row per channel.
struct Signal {
  double t0 = 0.0;
  double dt = 0.01;
  Matrix values;  // channels x samples

  int samples() const { return static_cast<int>(values.cols()); }
  double time(int k) const { return t0 + dt * k; }
};

inline constexpr double kDefaultDt = 0.01;

/// Exact zero-order-hold stepping; output k is sampled at t_k with the input
/// held over [t_k, t_{k+1}).
Signal simulate(const StateSpace& sys, const Signal& input, const Vector& x0 = Vector());

}  // namespace lti
}  // namespace elmo
