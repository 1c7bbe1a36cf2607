#pragma once

#include <string>
#include <vector>

#include "elmo/lti.hpp"

namespace elmo::control {

/// I: PID on θ. II: PID on θ + PD on y, both to M_G. III: PID on θ to M_G
/// and PD on each normalized charge to its own patch. IV: II plus PD on
/// charges and PI on y to every patch.
enum class Strategy { I, II, III, IV };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
bool uses_y(Strategy s);
bool uses_piezo(Strategy s);

struct Pid {
  double kp = 0.0, ki = 0.0, kd = 0.0;
};

/// Controller port labels.
namespace port {
inline const std::string kTheta = "theta";
inline const std::string kY = "y";
inline const std::string kTorque = "M_G";
std::string charge(int i);   // "gc1", ...
std::string voltage(int i);  // "v1", ...
}  // namespace port

inline constexpr double kDefaultTau = 0.01;
/// Optimizer scaling bounds on log10 |gain|.
inline constexpr double kLogGainBound = 8.0;

/// Negative feedback: M_G = -[PID(θ) + PD(y)], v_i = -[PD_i(n_g g_ci) + PI(y)]
/// with PID = Kp + Ki/s + Kd s/(1+τs). Terms absent from a strategy are
/// ignored; zero Ki or Kd adds no state.
struct ControllerStructure {
  Strategy strategy = Strategy::I;
  int n_piezo = 0;
  bool per_piezo = false;  // one PD pair per patch instead of a shared pair
  double tau = kDefaultTau;
  double charge_scale = 1.0;  // n_g, C⁻¹

  Pid theta;                // kp, ki, kd
  Pid y_pd;                 // kp, kd (II, IV)
  std::vector<Pid> piezo;   // kp, kd; 1 shared or n_piezo entries (III, IV)
  Pid y_pi;                 // kp, ki (IV)

  void validate() const;
  int gain_count() const;
  /// Flat signed gains in optimizer order: θ (Kp, Ki, Kd), y PD (Kp, Kd),
  /// piezo PD (Kp, Kd) per pair, y PI (Kp, Ki).
  Vector gains() const;
  void set_gains(const Vector& g);
  std::vector<std::string> gain_names() const;
};

/// Structure with the right number of gain slots (all zero) for a strategy.
ControllerStructure make_structure(Strategy s, int n_piezo, bool per_piezo = false, double tau = kDefaultTau);

/// x_i = log10 |g_i|. Throws on zero or non-finite gains.
Vector pack_gains(const ControllerStructure& s);
/// Magnitudes 10^x_i with the signs currently held by `s` (zero counts as
/// positive). Throws on length mismatch, non-finite or out-of-bound entries.
ControllerStructure unpack_gains(const ControllerStructure& s, const Vector& x, double bound = kLogGainBound);

lti::StateSpace make_controller(const ControllerStructure& s);

}  // namespace elmo::control
