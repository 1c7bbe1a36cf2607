#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "elmo/lti.hpp"

using namespace elmo;
using namespace elmo::lti;

namespace {

StateSpace first_order_lag() {
  return make_ss(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                 Matrix::Zero(1, 1), {"u"}, {"y"});
}

// ω²/(s² + 2ξω s + ω²) in companion form.
StateSpace second_order(double wn, double xi, double num) {
  Matrix a(2, 2);
  a << 0, 1, -wn * wn, -2 * xi * wn;
  Matrix b(2, 1);
  b << 0, 1;
  Matrix c(1, 2);
  c << num, 0;
  return make_ss(a, b, c, Matrix::Zero(1, 1), {"u"}, {"y"});
}

StateSpace random_stable(std::mt19937& rng, int n, int m, int p) {
  std::normal_distribution<double> nd;
  Matrix a(n, n), b(n, m), c(p, n), d(p, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) b(i, j) = nd(rng);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = nd(rng);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < m; ++j) d(i, j) = 0.3 * nd(rng);
  Eigen::EigenSolver<Matrix> es(a);
  const double shift = es.eigenvalues().real().maxCoeff() + 0.1 + 0.5 * std::uniform_real_distribution<double>()(rng);
  a -= shift * Matrix::Identity(n, n);
  Labels in, out;
  for (int j = 0; j < m; ++j) in.push_back("u" + std::to_string(j));
  for (int i = 0; i < p; ++i) out.push_back("y" + std::to_string(i));
  return make_ss(a, b, c, d, in, out);
}

}  // namespace

TEST(MakeSs, StaticGainHasNoStates) {
  auto g = make_ss(Matrix(), Matrix(), Matrix(), Matrix::Constant(1, 1, 2.0), {"u"}, {"y"});
  EXPECT_EQ(g.states(), 0);
  const std::vector<double> w{0.1, 10.0};
  for (auto& r : freq_response(g, w)) EXPECT_NEAR(std::abs(r(0, 0)), 2.0, 1e-15);
}

TEST(MakeSs, RejectsLabelCountMismatch) {
  EXPECT_THROW(make_ss(Matrix::Constant(1, 1, -1), Matrix::Ones(1, 2), Matrix::Ones(1, 1), Matrix::Zero(1, 2), {"u"}, {"y"}),
               Error);
}

TEST(MakeSs, RejectsNonFinite) {
  EXPECT_THROW(make_ss(Matrix::Constant(1, 1, NAN), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1), {"u"}, {"y"}),
               Error);
  EXPECT_THROW(make_ss(Matrix::Ones(2, 3), Matrix::Ones(2, 1), Matrix::Ones(1, 2), Matrix::Zero(1, 1), {"u"}, {"y"}), Error);
}

TEST(Interconnect, SeriesLagAndGain) {
  auto lag = first_order_lag();
  auto two = gain(Matrix::Constant(1, 1, 2.0), {"v"}, {"z"});
  std::vector<StateSpace> blocks{lag, two};
  std::vector<Connection> cons{{"y", "v"}};
  auto s = interconnect(blocks, cons);
  EXPECT_EQ(s.states(), 1);
  ASSERT_EQ(s.input_labels(), Labels{"u"});
  ASSERT_EQ(s.output_labels(), Labels{"z"});
  const std::vector<double> w{1e-9};
  EXPECT_NEAR(freq_response(s, w)[0](0, 0).real(), 2.0, 1e-8);
}

TEST(Interconnect, UnitNegativeFeedbackAroundUnitGain) {
  // e = r - y, y = e  ->  y = r/2
  auto sum = gain((Matrix(1, 2) << 1.0, -1.0).finished(), {"r", "fb"}, {"e"});
  auto plant = gain(Matrix::Constant(1, 1, 1.0), {"e_in"}, {"y"});
  std::vector<StateSpace> blocks{sum, plant};
  std::vector<Connection> cons{{"e", "e_in"}, {"y", "fb"}};
  auto s = interconnect(blocks, cons, Labels{"y"});
  EXPECT_NEAR(s.d()(0, 0), 0.5, 1e-15);
}

TEST(Interconnect, SingularAlgebraicLoop) {
  auto sum = gain((Matrix(1, 2) << 1.0, 1.0).finished(), {"r", "fb"}, {"e"});
  auto plant = gain(Matrix::Constant(1, 1, -1.0), {"e_in"}, {"y"});
  std::vector<StateSpace> blocks{sum, plant};
  std::vector<Connection> cons{{"e", "e_in"}, {"y", "fb", -1.0}};
  EXPECT_THROW(interconnect(blocks, cons), Error);
}

TEST(Interconnect, DanglingName) {
  std::vector<StateSpace> blocks{first_order_lag()};
  std::vector<Connection> cons{{"nope", "u"}};
  EXPECT_THROW(interconnect(blocks, cons), Error);
  std::vector<Connection> cons2{{"y", "nope"}};
  EXPECT_THROW(interconnect(blocks, cons2), Error);
}

TEST(Interconnect, AssociativeInBehavior) {
  std::mt19937 rng(7);
  auto g1 = relabeled(random_stable(rng, 3, 1, 1), {"a_in"}, {"a_out"});
  auto g2 = relabeled(random_stable(rng, 2, 1, 1), {"b_in"}, {"b_out"});
  auto g3 = relabeled(random_stable(rng, 4, 1, 1), {"c_in"}, {"c_out"});
  std::vector<StateSpace> all{g1, g2, g3};
  std::vector<Connection> c12{{"a_out", "b_in"}}, c23{{"b_out", "c_in"}};
  std::vector<Connection> c_all{{"a_out", "b_in"}, {"b_out", "c_in"}};
  auto flat = interconnect(all, c_all);
  std::vector<StateSpace> first{g1, g2};
  auto inner = interconnect(first, c12);
  std::vector<StateSpace> second{inner, g3};
  auto nested = interconnect(second, c23);
  EXPECT_EQ(flat.states(), 9);
  const auto w = logspace(-2, 2, 50);
  auto f1 = freq_response(flat, w), f2 = freq_response(nested, w);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto ref = f1[k](0, 0);
    EXPECT_LE(std::abs(ref - f2[k](0, 0)), 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Stability, Examples) {
  auto s1 = is_stable(first_order_lag());
  EXPECT_TRUE(s1.stable);
  EXPECT_NEAR(s1.spectral_abscissa, -1.0, 1e-12);

  Matrix dbl(2, 2);
  dbl << 0, 1, 0, 0;
  auto di = make_ss(dbl, Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1), {"u"}, {"y"});
  auto s2 = is_stable(di);
  EXPECT_FALSE(s2.stable);
  EXPECT_NEAR(s2.spectral_abscissa, 0.0, 1e-12);
  // declared rigid modes are exempt
  EXPECT_TRUE(is_stable(di, 2).stable);

  Matrix osc(2, 2);
  osc << 0, 1, -4, -0.4;
  auto s3 = is_stable(make_ss(osc, Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1), {"u"}, {"y"}));
  EXPECT_TRUE(s3.stable);
  EXPECT_NEAR(s3.spectral_abscissa, -0.2, 1e-12);
}

TEST(FreqResponse, Examples) {
  const std::vector<double> w{1.0};
  EXPECT_NEAR(std::abs(freq_response(first_order_lag(), w)[0](0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  const double wn = 3.0, xi = 0.05;
  const std::vector<double> wr{wn};
  EXPECT_NEAR(std::abs(freq_response(second_order(wn, xi, wn * wn), wr)[0](0, 0)), 1.0 / (2 * xi), 1e-10);
}

TEST(FreqResponse, SingularResolventReported) {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  auto s = make_ss(a, (Matrix(2, 1) << 0, 1).finished(), (Matrix(1, 2) << 1, 0).finished(), Matrix::Zero(1, 1), {"u"}, {"y"});
  const std::vector<double> w{0.5, 1.0};
  EXPECT_THROW(freq_response(s, w), Error);
}

TEST(FreqResponse, HessenbergMatchesDirectResolvent) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_stable(rng, 6, 2, 3);
    const auto w = logspace(-2, 2, 17);
    auto fr = freq_response(s, w);
    for (std::size_t k = 0; k < w.size(); ++k) {
      CMatrix res = (std::complex<double>(0, w[k]) * CMatrix::Identity(6, 6) - s.a().cast<std::complex<double>>())
                        .lu()
                        .solve(s.b().cast<std::complex<double>>());
      CMatrix ref = s.c().cast<std::complex<double>>() * res + s.d().cast<std::complex<double>>();
      EXPECT_LT((ref - fr[k]).norm(), 1e-10 * std::max(1.0, ref.norm()));
    }
  }
}

TEST(TransferSelect, Examples) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  auto g = gain(d, {"u1", "u2"}, {"y1", "y2"});
  auto sub = transfer_select(g, {"u2"}, {"y2"});
  EXPECT_DOUBLE_EQ(sub.d()(0, 0), 2.0);
  EXPECT_THROW(transfer_select(g, {"u3"}, {"y1"}), Error);
}

TEST(TransferSelect, SubmatrixOfParentResponse) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto s = random_stable(rng, 5, 3, 3);
    auto sub = transfer_select(s, {"u2", "u0"}, {"y1"});
    const auto w = logspace(-1, 1, 9);
    auto full = freq_response(s, w), part = freq_response(sub, w);
    for (std::size_t k = 0; k < w.size(); ++k) {
      EXPECT_LT(std::abs(part[k](0, 0) - full[k](1, 2)), 1e-12 * (1 + std::abs(full[k](1, 2))));
      EXPECT_LT(std::abs(part[k](0, 1) - full[k](1, 0)), 1e-12 * (1 + std::abs(full[k](1, 0))));
    }
  }
}

TEST(HinfNorm, Examples) {
  EXPECT_NEAR(hinf_norm(gain(Matrix::Constant(1, 1, 3.0), {"u"}, {"y"})), 3.0, 1e-12);
  EXPECT_NEAR(hinf_norm(first_order_lag()), 1.0, 1e-4);
  const double xi = 0.05;
  const double exact = 1.0 / (2 * xi * std::sqrt(1 - xi * xi));
  EXPECT_NEAR(hinf_norm(second_order(1.0, xi, 1.0)) / exact, 1.0, 1e-3);
  EXPECT_NEAR(exact, 10.0125, 1e-4);
}

// Above the resonance the low-pass only falls, so the band-limited peak sits
// at the band edge.
TEST(HinfNorm, BandLimitedSkipsLowFrequencies) {
  const auto g = second_order(1.0, 0.05, 1.0);
  double w = 0.0;
  const double h = hinf_norm(g, 1e-6, &w, 2.0);
  EXPECT_NEAR(h, 1.0 / std::sqrt(9.0 + 0.04), 1e-6);
  EXPECT_NEAR(w, 2.0, 1e-9);
  EXPECT_NEAR(hinf_norm(g, 1e-6, nullptr, 0.5), hinf_norm(g, 1e-6), 1e-5);
  EXPECT_THROW(hinf_norm(g, 1e-4, nullptr, -1.0), Error);
}

TEST(HinfNorm, RejectsUnstable) {
  Matrix a = Matrix::Constant(1, 1, 0.5);
  EXPECT_THROW(hinf_norm(make_ss(a, Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1), {"u"}, {"y"})), Error);
}

// Property: Hamiltonian-based norm agrees with the dense-grid peak.
TEST(HinfNorm, AgreesWithDenseGridOnRandomSystems) {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> dim(1, 8), port(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_stable(rng, dim(rng), port(rng), port(rng));
    const double h = hinf_norm(s, 1e-4);
    auto poles_ = poles(s);
    double lo = 1e300, hi = 0;
    for (auto p : poles_) {
      lo = std::min(lo, std::abs(p));
      hi = std::max(hi, std::abs(p));
    }
    const auto w = logspace(std::log10(lo) - 2, std::log10(hi) + 2, 2000);
    const double g = grid_peak_gain(s, w);
    EXPECT_GE(h, g * (1 - 1e-9)) << "trial " << trial;
    EXPECT_LE((h - g) / g, 2e-4) << "trial " << trial;
  }
}

TEST(Simulate, IntegratorRamp) {
  auto integ = make_ss(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1), {"u"}, {"y"});
  Signal u;
  u.dt = 0.01;
  u.values = Matrix::Ones(1, 101);
  auto y = simulate(integ, u);
  EXPECT_NEAR(y.values(0, 100), 1.0, 1e-9);
}

TEST(Simulate, ZeroInputZeroOutput) {
  std::mt19937 rng(5);
  auto s = random_stable(rng, 4, 2, 2);
  Signal u;
  u.values = Matrix::Zero(2, 200);
  EXPECT_EQ(simulate(s, u).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulate, FirstOrderStep) {
  Signal u;
  u.dt = 0.01;
  u.values = Matrix::Ones(1, 501);
  auto y = simulate(first_order_lag(), u);
  EXPECT_NEAR(y.values(0, 500), 1.0 - std::exp(-5.0), 1e-9);
}

TEST(Simulate, FreeResponseDecays) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto r = random_stable(rng, 5, 1, 1);
    Labels out;
    for (int i = 0; i < 5; ++i) out.push_back("x" + std::to_string(i));
    auto s = make_ss(r.a(), r.b(), Matrix::Identity(5, 5), Matrix::Zero(5, 1), {"u"}, out);
    const double sa = -is_stable(s).spectral_abscissa;
    Signal u;
    u.dt = 0.01;
    const int steps = static_cast<int>(std::ceil(12.0 / sa / u.dt)) + 1;
    u.values = Matrix::Zero(1, steps);
    const Vector x0 = Vector::Ones(5);
    auto y = simulate(s, u, x0);
    EXPECT_LT(y.values.col(steps - 1).norm(), x0.norm());
    EXPECT_TRUE(y.values.allFinite());
  }
}

TEST(Simulate, DimensionMismatch) {
  Signal u;
  u.values = Matrix::Zero(2, 10);
  EXPECT_THROW(simulate(first_order_lag(), u), Error);
}
