#include "elmo/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elmo::plant {

namespace port {
std::string voltage(int segment) { return "v" + std::to_string(segment); }
std::string charge(int segment) { return "gc" + std::to_string(segment); }
}  // namespace port

namespace {
const std::string kHubFPf = "hub.FP.f", kHubFPm = "hub.FP.m";
const std::string kHubAPt = "hub.aP.t", kHubAPr = "hub.aP.r";

std::string seg(int i, const std::string& name) { return "s" + std::to_string(i) + "." + name; }

// Damping matrix C (generalized forces = -C ż) giving modal damping ξ on
// every flexible mode of the undamped model `raw`, whose states are
// (θ, θ̇, then p_i, ṗ_i per segment) in block order. Uses the Δ = 0 payload.
Matrix assembled_modal_damping(const lti::StateSpace& raw, const Labels& forces, const Labels& rates, int n, int ne,
                               double xi) {
  const int nz = static_cast<int>(forces.size());
  const int nx = raw.states();
  Matrix cv(nz, nx), bq(nx, nz);
  for (int k = 0; k < nz; ++k) {
    cv.row(k) = raw.c().row(raw.output_index(rates[k]));
    bq.col(k) = raw.b().col(raw.input_index(forces[k]));
  }
  Matrix pos = Matrix::Zero(nx, nz);
  pos(0, 0) = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < ne; ++j) pos(2 + i * 2 * ne + j, 1 + i * ne + j) = 1.0;
  if (!(pos.transpose() * raw.a() * cv.transpose()).isIdentity(1e-9))
    throw Error("plant: unexpected state layout in the assembled model");

  const Matrix minv = cv * bq;
  Matrix mz = minv.inverse();
  mz = 0.5 * (mz + mz.transpose()).eval();
  Matrix kz = -mz * (cv * raw.a() * pos);
  kz = 0.5 * (kz + kz.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(kz, mz);
  if (ges.info() != Eigen::Success) throw Error("plant: assembled eigenproblem failed");
  const Vector lam = ges.eigenvalues();
  const double floor = 1e-9 * lam.cwiseAbs().maxCoeff();
  Vector c2 = Vector::Zero(nz);
  for (int k = 0; k < nz; ++k)
    if (lam(k) > floor) c2(k) = 2.0 * xi * std::sqrt(lam(k));
  const Matrix mphi = mz * ges.eigenvectors();
  return mphi * c2.asDiagonal() * mphi.transpose();
}
}  // namespace

void HubSpec::validate() const {
  if (!(mass > 0 && inertia > 0)) throw Error("hub: mass and inertia must be positive");
  if (!std::isfinite(attachment_offset) || attachment_offset < 0) throw Error("hub: attachment offset must be finite and >= 0");
}

void PayloadSpec::validate() const {
  if (!(mass_lo > 0 && mass_lo <= mass_hi && std::isfinite(mass_hi))) throw Error("payload: need 0 < mass_lo <= mass_hi");
  if (!(rotary_inertia >= 0)) throw Error("payload: rotary inertia must be >= 0");
}

void PlantSpec::validate() const {
  hub.validate();
  payload.validate();
  if (n_segments < 0) throw Error("plant: n_segments must be >= 0");
  if (n_segments > 0) {
    segment.validate();
    if (with_piezo) piezo.validate();
    if (modes_per_segment < 1) throw Error("plant: modes_per_segment must be >= 1");
  }
}

lti::StateSpace hub_block(const HubSpec& spec) {
  spec.validate();
  const Eigen::Matrix2d phi = titop::transport(spec.attachment_offset);
  // generalized load at G per input column: M_G, w_f, w_t, FP.f, FP.m
  Matrix load = Matrix::Zero(2, 5);
  load(1, 0) = 1.0;
  load(0, 1) = 1.0;
  load(1, 2) = 1.0;
  load.rightCols(2) = phi.transpose();
  const Matrix acc = Eigen::Vector2d(1.0 / spec.mass, 1.0 / spec.inertia).asDiagonal() * load;

  Matrix a(2, 2);
  a << 0, 1, 0, 0;
  Matrix b = Matrix::Zero(2, 5);
  b.row(1) = acc.row(1);
  Matrix c = Matrix::Zero(6, 2);
  Matrix d = Matrix::Zero(6, 5);
  d.row(0) = acc.row(0);
  d.middleRows(1, 2) = phi * acc;
  c(3, 0) = 1.0;
  d.row(4) = acc.row(1);
  c(5, 1) = 1.0;
  return lti::make_ss(a, b, c, d, {port::kTorque, port::kHubForce, port::kHubTorque, kHubFPf, kHubFPm},
                      {port::kHubAcc, kHubAPt, kHubAPr, port::kTheta, port::kThetaDd, port::kThetaD});
}

PlantLfr assemble(const PlantSpec& spec) {
  spec.validate();
  const int n = spec.n_segments;
  PlantLfr out;
  out.spec = spec;
  out.delta_map = {{"payload_mass", spec.payload.mid(), spec.payload.half_range()}};

  const lti::StateSpace hub = hub_block(spec.hub);
  if (n == 0) {
    const auto core = lti::transfer_select(hub, {port::kTorque, port::kHubForce, port::kHubTorque},
                                           {port::kTheta, port::kThetaDd, port::kHubAcc});
    const auto idle = lti::gain(Matrix::Zero(3, 3), {port::kTipForce, port::kTipTorque, port::kDeltaIn},
                                {port::kTipAccRel, port::kTipDef, port::kDeltaOut});
    const std::vector<lti::StateSpace> blocks{core, idle};
    out.model = lti::interconnect(blocks, std::span<const lti::Connection>{});
    out.tip_distance = spec.hub.attachment_offset;
    out.structural_mass = spec.hub.mass;
    return out;
  }

  const bool assembled_damping = spec.damping == DampingModel::assembled;
  fem::FemModel fm = fem::beam_matrices(spec.segment);
  if (spec.with_piezo) fm = fem::piezo_coupling(std::move(fm), spec.piezo);
  const fem::CmsModel cms = fem::craig_bampton(fm, spec.modes_per_segment);
  titop::TitopOptions topts;
  topts.modal_damping = !assembled_damping;
  topts.modal_ports = assembled_damping;
  const titop::TitopBlock segment =
      spec.with_piezo ? titop::build_actuated_titop(cms, topts) : titop::build_titop(cms, topts);
  const int ne = static_cast<int>(segment.clamped_omega.size());
  const double len = spec.segment.length;

  std::vector<lti::StateSpace> blocks;
  std::vector<lti::Connection> wires;
  if (assembled_damping) {
    // hub torque = M_G + damping torque
    Labels hin = hub.input_labels();
    hin[0] = "hub.torque";
    blocks.push_back(lti::relabeled(hub, hin, hub.output_labels()));
    blocks.push_back(lti::gain(Matrix::Ones(1, 2), {port::kTorque, "damp.theta"}, {"hub.torque.sum"}));
    wires.push_back({"hub.torque.sum", "hub.torque"});
  } else {
    blocks.push_back(hub);
  }
  namespace tp = titop::port;
  for (int i = 1; i <= n; ++i) {
    blocks.push_back(lti::prefixed(segment.model, "s" + std::to_string(i) + "."));
    if (i == 1) {
      wires.push_back({kHubAPt, seg(1, tp::kAccPt)});
      wires.push_back({kHubAPr, seg(1, tp::kAccPr)});
      wires.push_back({seg(1, tp::kFPf), kHubFPf});
      wires.push_back({seg(1, tp::kFPm), kHubFPm});
    } else {
      wires.push_back({seg(i - 1, tp::kAccQt), seg(i, tp::kAccPt)});
      wires.push_back({seg(i - 1, tp::kAccQr), seg(i, tp::kAccPr)});
      wires.push_back({seg(i, tp::kFPf), seg(i - 1, tp::kFQf), -1.0});
      wires.push_back({seg(i, tp::kFPm), seg(i - 1, tp::kFQm), -1.0});
    }
  }

  // Payload: F_Q = m(Δ) ü_Q - w_tip with m(Δ) = mid + r Δ pulled out as
  // w_delta = Δ z_delta, z_delta = transverse payload acceleration.
  const PayloadSpec& pl = spec.payload;
  Matrix dp = Matrix::Zero(3, 5);
  dp(0, 0) = pl.mid();
  dp(0, 2) = -1.0;
  dp(0, 4) = pl.half_range();
  dp(1, 1) = pl.rotary_inertia;
  dp(1, 3) = -1.0;
  dp(2, 0) = 1.0;
  blocks.push_back(lti::gain(dp, {"pl.a.t", "pl.a.r", port::kTipForce, port::kTipTorque, port::kDeltaIn},
                             {"pl.F.f", "pl.F.m", port::kDeltaOut}));
  wires.push_back({seg(n, tp::kAccQt), "pl.a.t"});
  wires.push_back({seg(n, tp::kAccQr), "pl.a.r"});
  wires.push_back({"pl.F.f", seg(n, tp::kFQf)});
  wires.push_back({"pl.F.m", seg(n, tp::kFQm)});

  // Misalignment: elastic deflections of every Q port carried rigidly to the tip.
  Matrix dy(1, 2 * n);
  Labels y_in;
  for (int i = 1; i <= n; ++i) {
    dy(0, 2 * (i - 1)) = 1.0;
    dy(0, 2 * (i - 1) + 1) = (n - i) * len;
    y_in.push_back("y." + std::to_string(i) + ".t");
    y_in.push_back("y." + std::to_string(i) + ".r");
    wires.push_back({seg(i, tp::kDefQt), y_in[y_in.size() - 2]});
    wires.push_back({seg(i, tp::kDefQr), y_in.back()});
  }
  blocks.push_back(lti::gain(dy, y_in, {port::kTipDef}));

  Matrix dt(1, 2);
  dt << 1.0, -1.0;
  blocks.push_back(lti::gain(dt, {"tacc.q", "tacc.g"}, {port::kTipAccRel}));
  wires.push_back({seg(n, tp::kAccQt), "tacc.q"});
  wires.push_back({port::kHubAcc, "tacc.g"});

  Labels outputs{port::kTheta, port::kThetaDd, port::kHubAcc, port::kTipAccRel, port::kTipDef};
  if (spec.with_piezo)
    for (int i = 1; i <= n; ++i) outputs.push_back(seg(i, tp::kCharge));
  outputs.push_back(port::kDeltaOut);

  lti::StateSpace sys;
  if (!assembled_damping) {
    sys = lti::interconnect(blocks, wires, outputs);
  } else {
    // Generalized coordinates z = (θ, modal coordinates of each segment).
    Labels forces{"damp.theta"}, rates{port::kThetaD};
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= ne; ++j) {
        forces.push_back(seg(i, tp::modal_force(j)));
        rates.push_back(seg(i, tp::modal_velocity(j)));
      }
    Labels with_rates = outputs;
    with_rates.insert(with_rates.end(), rates.begin(), rates.end());
    const lti::StateSpace raw = lti::interconnect(blocks, wires, with_rates);
    const Matrix damping = assembled_modal_damping(raw, forces, rates, n, ne, spec.segment.modal_damping);
    std::vector<lti::Connection> loop;
    for (std::size_t r = 0; r < forces.size(); ++r)
      for (std::size_t c = 0; c < rates.size(); ++c)
        if (damping(r, c) != 0.0) loop.push_back({rates[c], forces[r], -damping(r, c)});
    const std::vector<lti::StateSpace> one{raw};
    sys = lti::interconnect(one, loop, outputs);
  }

  Labels in = sys.input_labels(), outl = sys.output_labels();
  for (int i = 1; i <= n; ++i) {
    std::replace(in.begin(), in.end(), seg(i, tp::kVolt), port::voltage(i));
    std::replace(outl.begin(), outl.end(), seg(i, tp::kCharge), port::charge(i));
  }
  out.model = lti::relabeled(sys, in, outl);
  out.tip_distance = spec.hub.attachment_offset + n * len;
  out.structural_mass = spec.hub.mass + n * (spec.segment.mass + (spec.with_piezo ? spec.piezo.mass() : 0.0));
  return out;
}

lti::StateSpace close_delta(const PlantLfr& plant, double delta) {
  if (!(delta >= -1.0 && delta <= 1.0)) throw Error("close_delta: delta must lie in [-1, 1], got " + std::to_string(delta));
  Labels outs;
  for (const auto& o : plant.model.output_labels())
    if (o != port::kDeltaOut) outs.push_back(o);
  const std::vector<lti::StateSpace> blocks{plant.model};
  const std::vector<lti::Connection> wires{{port::kDeltaOut, port::kDeltaIn, delta}};
  return lti::interconnect(blocks, wires, outs);
}

PlantFacts modal_facts(const lti::StateSpace& sys, double rigid_tol) {
  PlantFacts f;
  for (const auto& p : lti::poles(sys)) {
    const double mag = std::abs(p);
    if (mag < rigid_tol) {
      ++f.rigid_modes;
    } else if (p.imag() > 0) {
      f.flexible.push_back({mag / (2 * std::numbers::pi), -p.real() / mag});
    }
  }
  std::sort(f.flexible.begin(), f.flexible.end(),
            [](const Mode& a, const Mode& b) { return a.frequency_hz < b.frequency_hz; });
  return f;
}

PlantFacts plant_facts(const PlantLfr& plant, double delta) {
  const lti::StateSpace sys = close_delta(plant, delta);
  PlantFacts f = modal_facts(sys);
  const double w = kInertiaProbeOmega;
  const auto g = lti::freq_response(
      lti::transfer_select(sys, {port::kHubForce, port::kHubTorque, port::kTorque}, {port::kHubAcc, port::kThetaDd}),
      std::span<const double>(&w, 1))[0];
  f.total_inertia = 1.0 / std::abs(g(1, 2));
  f.rigid_mass_at_g = g.leftCols(2).real().inverse();
  f.total_mass = f.rigid_mass_at_g(0, 0);
  f.payload_mass = plant.spec.n_segments > 0 ? plant.spec.payload.mass(delta) : 0.0;
  return f;
}

}  // namespace elmo::plant
