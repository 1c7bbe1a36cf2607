#include "elmo/control.hpp"

#include <cmath>

namespace elmo::control {

namespace port {
std::string charge(int i) { return "gc" + std::to_string(i); }
std::string voltage(int i) { return "v" + std::to_string(i); }
}  // namespace port

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::I: return "I";
    case Strategy::II: return "II";
    case Strategy::III: return "III";
    case Strategy::IV: return "IV";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "I") return Strategy::I;
  if (s == "II") return Strategy::II;
  if (s == "III") return Strategy::III;
  if (s == "IV") return Strategy::IV;
  throw Error("unknown strategy '" + s + "' (expected I, II, III or IV)");
}

bool uses_y(Strategy s) { return s == Strategy::II || s == Strategy::IV; }
bool uses_piezo(Strategy s) { return s == Strategy::III || s == Strategy::IV; }

void ControllerStructure::validate() const {
  if (!(tau > 0) || !std::isfinite(tau)) throw Error("controller: derivative filter constant must be positive");
  if (!(charge_scale > 0) || !std::isfinite(charge_scale)) throw Error("controller: charge scale must be positive");
  if (uses_piezo(strategy)) {
    if (n_piezo < 1) throw Error("controller: strategy " + to_string(strategy) + " needs at least one piezo");
    const std::size_t want = per_piezo ? static_cast<std::size_t>(n_piezo) : 1u;
    if (piezo.size() != want)
      throw Error("controller: expected " + std::to_string(want) + " piezo gain pairs, got " + std::to_string(piezo.size()));
  }
  const Vector g = gains();
  if (!g.allFinite()) throw Error("controller: non-finite gain");
}

int ControllerStructure::gain_count() const {
  int n = 3;
  if (uses_y(strategy)) n += 2;
  if (uses_piezo(strategy)) n += 2 * static_cast<int>(piezo.size());
  if (strategy == Strategy::IV) n += 2;
  return n;
}

Vector ControllerStructure::gains() const {
  std::vector<double> g{theta.kp, theta.ki, theta.kd};
  if (uses_y(strategy)) {
    g.push_back(y_pd.kp);
    g.push_back(y_pd.kd);
  }
  if (uses_piezo(strategy))
    for (const auto& p : piezo) {
      g.push_back(p.kp);
      g.push_back(p.kd);
    }
  if (strategy == Strategy::IV) {
    g.push_back(y_pi.kp);
    g.push_back(y_pi.ki);
  }
  return Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
}

void ControllerStructure::set_gains(const Vector& g) {
  if (g.size() != gain_count())
    throw Error("controller: expected " + std::to_string(gain_count()) + " gains, got " + std::to_string(g.size()));
  int k = 0;
  theta = {g(0), g(1), g(2)};
  k = 3;
  if (uses_y(strategy)) {
    y_pd = {g(k), 0.0, g(k + 1)};
    k += 2;
  }
  if (uses_piezo(strategy))
    for (auto& p : piezo) {
      p = {g(k), 0.0, g(k + 1)};
      k += 2;
    }
  if (strategy == Strategy::IV) y_pi = {g(k), g(k + 1), 0.0};
}

std::vector<std::string> ControllerStructure::gain_names() const {
  std::vector<std::string> n{"theta.kp", "theta.ki", "theta.kd"};
  if (uses_y(strategy)) {
    n.push_back("y_pd.kp");
    n.push_back("y_pd.kd");
  }
  if (uses_piezo(strategy)) {
    for (std::size_t i = 0; i < piezo.size(); ++i) {
      const std::string tag = per_piezo ? "piezo" + std::to_string(i + 1) : "piezo";
      n.push_back(tag + ".kp");
      n.push_back(tag + ".kd");
    }
  }
  if (strategy == Strategy::IV) {
    n.push_back("y_pi.kp");
    n.push_back("y_pi.ki");
  }
  return n;
}

ControllerStructure make_structure(Strategy s, int n_piezo, bool per_piezo, double tau) {
  ControllerStructure c;
  c.strategy = s;
  c.n_piezo = n_piezo;
  c.per_piezo = per_piezo;
  c.tau = tau;
  if (uses_piezo(s)) c.piezo.assign(per_piezo ? static_cast<std::size_t>(std::max(n_piezo, 0)) : 1u, Pid{});
  return c;
}

Vector pack_gains(const ControllerStructure& s) {
  const Vector g = s.gains();
  Vector x(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g(i)) || g(i) == 0.0)
      throw Error("pack_gains: gain '" + s.gain_names()[static_cast<std::size_t>(i)] + "' must be finite and nonzero");
    x(i) = std::log10(std::abs(g(i)));
  }
  return x;
}

ControllerStructure unpack_gains(const ControllerStructure& s, const Vector& x, double bound) {
  const Vector g0 = s.gains();
  if (x.size() != g0.size())
    throw Error("unpack_gains: expected " + std::to_string(g0.size()) + " entries, got " + std::to_string(x.size()));
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i))) throw Error("unpack_gains: non-finite entry " + std::to_string(i));
    if (std::abs(x(i)) > bound)
      throw Error("unpack_gains: entry " + std::to_string(i) + " = " + std::to_string(x(i)) + " outside [-" +
                  std::to_string(bound) + ", " + std::to_string(bound) + "]");
    g(i) = (g0(i) < 0 ? -1.0 : 1.0) * std::pow(10.0, x(i));
  }
  ControllerStructure out = s;
  out.set_gains(g);
  return out;
}

namespace {

// Accumulates SISO terms into one MIMO realization.
class Builder {
 public:
  Builder(int inputs, int outputs) : d_(Matrix::Zero(outputs, inputs)) {}

  // out += sign·(kp + ki/s + kd s/(1+τs))·scale·in for every out; the
  // states are shared between the outputs
  void term(int in, std::vector<int> outs, Pid g, double tau, double scale, double sign) {
    const double kp = sign * g.kp * scale, ki = sign * g.ki * scale, kd = sign * g.kd * scale;
    for (int o : outs) d_(o, in) += kp + (kd != 0.0 ? kd / tau : 0.0);
    if (ki != 0.0) add_state(in, outs, 0.0, 1.0, ki);
    // kd s/(1+τs) = kd/τ - (kd/τ)/(1+τs)
    if (kd != 0.0) add_state(in, std::move(outs), -1.0 / tau, 1.0 / tau, -kd / tau);
  }

  lti::StateSpace build(Labels in, Labels out) const {
    const auto n = static_cast<Eigen::Index>(states_.size());
    Matrix a = Matrix::Zero(n, n), b = Matrix::Zero(n, d_.cols()), c = Matrix::Zero(d_.rows(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const State& s = states_[static_cast<std::size_t>(k)];
      a(k, k) = s.pole;
      b(k, s.in) = s.b;
      for (int o : s.outs) c(o, k) = s.c;
    }
    return lti::make_ss(a, b, c, d_, std::move(in), std::move(out));
  }

 private:
  struct State {
    int in;
    std::vector<int> outs;
    double pole, b, c;
  };
  void add_state(int in, std::vector<int> outs, double pole, double b, double c) {
    states_.push_back({in, std::move(outs), pole, b, c});
  }

  Matrix d_;
  std::vector<State> states_;
};

}  // namespace

lti::StateSpace make_controller(const ControllerStructure& s) {
  s.validate();
  const Strategy st = s.strategy;
  Labels in{port::kTheta}, out{port::kTorque};
  const int y_in = uses_y(st) ? 1 : -1;
  if (uses_y(st)) in.push_back(port::kY);
  const int gc0 = static_cast<int>(in.size());
  if (uses_piezo(st))
    for (int i = 1; i <= s.n_piezo; ++i) {
      in.push_back(port::charge(i));
      out.push_back(port::voltage(i));
    }

  Builder b(static_cast<int>(in.size()), static_cast<int>(out.size()));
  b.term(0, {0}, s.theta, s.tau, 1.0, -1.0);
  if (uses_y(st)) b.term(y_in, {0}, {s.y_pd.kp, 0.0, s.y_pd.kd}, s.tau, 1.0, -1.0);
  if (uses_piezo(st)) {
    std::vector<int> volts;
    for (int i = 0; i < s.n_piezo; ++i) {
      const Pid& g = s.piezo[s.per_piezo ? static_cast<std::size_t>(i) : 0u];
      b.term(gc0 + i, {1 + i}, {g.kp, 0.0, g.kd}, s.tau, s.charge_scale, -1.0);
      volts.push_back(1 + i);
    }
    // one integrator drives every patch
    if (st == Strategy::IV) b.term(y_in, volts, {s.y_pi.kp, s.y_pi.ki, 0.0}, s.tau, 1.0, -1.0);
  }
  return b.build(std::move(in), std::move(out));
}

}  // namespace elmo::control
