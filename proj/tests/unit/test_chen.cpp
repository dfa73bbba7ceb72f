#include <gtest/gtest.h>

#include <cmath>

#include "eqloop/chen.hpp"
#include "eqloop/errors.hpp"
#include "eqloop/random.hpp"

using namespace eqloop;

namespace {

// The "winding" test loop on T² and its analytic velocity.
Eigen::Vector2d winding_theta(double s) {
  const double w = kTwoPi * s;
  return {s + 0.1 * std::sin(w), 0.3 + 0.15 * std::cos(w) + 0.05 * std::sin(2 * w)};
}
Eigen::Vector2d winding_rate(double s) {
  const double w = kTwoPi * s;
  return {1.0 + 0.2 * kPi * std::cos(w), -0.3 * kPi * std::sin(w) + 0.2 * kPi * std::cos(2 * w)};
}

// ∮ ω along the analytic winding loop by composite Simpson.
double analytic_line_integral(const Torus& T, const DifferentialForm& w) {
  const int panels = 20000;
  auto f = [&](double s) {
    const Eigen::Vector2d th = winding_theta(s);
    return w.eval(T.from_coordinates(th), {T.coordinate_vector(th, winding_rate(s))});
  };
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) / panels);
  return acc / (3.0 * panels);
}

PlotSpec t2_plot(const Torus& T) { return exp_deform_plot({field_catalog(T, "wave1"), field_catalog(T, "twist")}); }

Eigen::VectorXd u0() {
  Eigen::VectorXd u(2);
  u << 0.1, -0.2;
  return u;
}

}  // namespace

TEST(LineIntegral, WindingNumberAndExactForms) {
  Torus T;
  const Loop g = smooth_test_loop(T, "winding", 128);
  const PolygonalLoop p(T, g, 128);
  EXPECT_NEAR(line_integral(T, form_catalog(T, "dtheta1"), p, 0.0, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(line_integral(T, form_catalog(T, "dtheta2"), p, 0.0, 1.0), 0.0, 1e-12);
  const DifferentialForm f = form_catalog(T, "f_t2");
  EXPECT_NEAR(line_integral(T, d(f), p, 0.0, 1.0), 0.0, 1e-6);
  EXPECT_NEAR(line_integral(T, d(f), p, 0.25, 0.75), f.eval(g[96]) - f.eval(g[32]), 1e-6);
}

TEST(LineIntegral, ConvergesToSmoothValue) {
  Torus T;
  const DifferentialForm w = form_catalog(T, "omega_t2");
  const double want = analytic_line_integral(T, w);
  double prev = INFINITY;
  for (int n : {64, 128, 256}) {
    const Loop g = smooth_test_loop(T, "winding", n);
    const double err = std::abs(line_integral(T, w, PolygonalLoop(T, g, n), 0.0, 1.0) - want);
    EXPECT_LT(err, prev / 3.0);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(IteratedIntegral, ShuffleRelation) {
  Sphere S;
  const Loop g = smooth_test_loop(S, "tilted", 64);
  const PolygonalLoop p(S, g, 64);
  const DifferentialForm a = form_catalog(S, "omega_s2"), b = form_catalog(S, "killing_s2");
  for (double t : {0.3, 1.0}) {
    const double ab = iterated_integral(S, {a, b}, p, t), ba = iterated_integral(S, {b, a}, p, t);
    const double ia = iterated_integral(S, {a}, p, t), ib = iterated_integral(S, {b}, p, t);
    EXPECT_NEAR(ab + ba, ia * ib, 1e-12);
    EXPECT_NEAR(ia, line_integral(S, a, p, 0.0, t), 1e-12);
  }
  // I(a,a) = I(a)²/2
  const double aa = iterated_integral(S, {a, a}, p, 1.0), ia = iterated_integral(S, {a}, p, 1.0);
  EXPECT_NEAR(aa, 0.5 * ia * ia, 1e-12);
}

// Σ(ω)(X) = ∫ ω(γ(s))(X(s)) ds for a one-slot word; the grid mean at n = 4096
// is spectrally accurate for this smooth periodic integrand.
TEST(Sigma, SingleFormIsFieldAverage) {
  Sphere S;
  const DifferentialForm w = form_catalog(S, "omega_s2");
  auto killing_along = [&](const Loop& g) {
    LoopField X;
    for (long j = 0; j < g.size(); ++j) X.push_back(S.killing_field(g[j]));
    return X;
  };
  const Loop fine = smooth_test_loop(S, "tilted", 4096);
  const LoopField Xf = killing_along(fine);
  double want = 0.0;
  for (long j = 0; j < fine.size(); ++j) want += w.eval(fine[j], {Xf[j]}) / 4096.0;
  double prev = INFINITY;
  for (int n : {256, 512}) {
    const Loop g = smooth_test_loop(S, "tilted", n);
    const double err = std::abs(sigma_eval(S, FormWord({w}), g, {killing_along(g)}) - want);
    EXPECT_LT(err, prev / 3.0);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

// Σ(f ⊗ ω) = ∫ f(γ(t)) dt · ∮ω: the inner window is the whole loop for every t.
TEST(Sigma, FunctionTimesFormFactorizes) {
  Torus T;
  const Loop g = smooth_test_loop(T, "winding", 256);
  const DifferentialForm f = form_catalog(T, "f_t2"), w = form_catalog(T, "omega_t2");
  const PolygonalLoop p(T, g, 256);
  double mean_f = 0.0;
  for (int j = 0; j < 256; ++j) mean_f += f.eval(p.eval((j + 0.5) / 256).first) / 256;
  EXPECT_NEAR(sigma_eval(T, FormWord({f, w}), g, {}), mean_f * line_integral(T, w, p, 0.0, 1.0), 1e-12);
}

TEST(Sigma, RotationInvariant) {
  Torus T;
  const Loop g = smooth_test_loop(T, "winding", 128);
  const FormWord w({form_catalog(T, "f_t2"), form_catalog(T, "omega_t2"), form_catalog(T, "eta_t2")});
  const double a = sigma_eval(T, w, g, {});
  for (long k : {1, 17, 64}) EXPECT_NEAR(sigma_eval(T, w, rotate_index(g, k), {}), a, 1e-12);
}

TEST(Sigma, WrongNumberOfFieldsThrows) {
  Torus T;
  const Loop g = smooth_test_loop(T, "winding", 64);
  const FormWord w({form_catalog(T, "omega_t2"), form_catalog(T, "area_t2")});
  ASSERT_EQ(word_degree(w), 2);
  EXPECT_THROW(sigma_eval(T, w, g, {}), DegreeMismatch);
}

TEST(Sigma, MonteCarloIsSeeded) {
  Torus T;
  const FormWord w({form_catalog(T, "f_t2"), form_catalog(T, "omega_t2")});
  const McValue a = pullback_sigma_mc(T, w, t2_plot(T), u0(), {}, 256, 8, 5);
  const McValue b = pullback_sigma_mc(T, w, t2_plot(T), u0(), {}, 256, 8, 5);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.replicas, 8);
  EXPECT_GT(a.stderr_, 0.0);
}

class ChainMap : public ::testing::TestWithParam<std::vector<std::string>> {};

TEST_P(ChainMap, ResidualSmallAndDecreasing) {
  Torus T;
  FormWord w;
  for (const auto& n : GetParam()) w.slots.push_back(form_catalog(T, n));
  const Chain c(w);
  const double r256 = chain_map_residual(T, c, t2_plot(T), u0(), smooth_test_loop(T, "winding", 256));
  const double r1024 = chain_map_residual(T, c, t2_plot(T), u0(), smooth_test_loop(T, "winding", 1024));
  EXPECT_LT(r1024, 1e-3);
  EXPECT_LT(r1024, r256 / 4.0);  // order ≥ 1 over two doublings
}

INSTANTIATE_TEST_SUITE_P(Words, ChainMap,
                         ::testing::Values(std::vector<std::string>{"f_t2", "omega_t2"},
                                           std::vector<std::string>{"omega_t2", "eta_t2"},
                                           std::vector<std::string>{"f_t2", "omega_t2", "eta_t2"}));

TEST(Cartan, SmallLoopResidual) {
  Torus T;
  const Chain c(FormWord({form_catalog(T, "f_t2"), form_catalog(T, "omega_t2")}));
  const CartanTerms t = cartan_terms(T, c, t2_plot(T), u0(), smooth_test_loop(T, "small", 64));
  EXPECT_LT(t.residual().max_abs(), 1e-2);
  EXPECT_GT(t.sigma.max_abs(), 1e-3);  // the identity is not trivially 0 = 0
}

TEST(Convolution, ApproachesLineIntegral) {
  Torus T;
  const int n = 2048;
  const Loop g = smooth_test_loop(T, "winding", n);
  const DifferentialForm w = form_catalog(T, "omega_t2");
  const double want = analytic_line_integral(T, w);
  const double e32 = std::abs(convolution_iterated({w}, g.points, 32).value - want);
  const double e128 = std::abs(convolution_iterated({w}, g.points, 128).value - want);
  EXPECT_LT(e128, e32);
  EXPECT_LT(e128, 1e-2);
  EXPECT_NEAR(symmetrized_pairing(w, g.points, 64), convolution_iterated({w}, g.points, 64).value, 1e-10);
}

TEST(Convergence, StudyTableShape) {
  Torus T;
  ConvergenceSpec s;
  s.Ns = {32, 64};
  s.n = 512;
  s.replicas = 4;
  s.poly_reference = 512;
  s.conv_reference = 128;
  const auto rows = convergence_study(T, s, 3);
  int refs = 0;
  for (const auto& r : rows) {
    EXPECT_EQ(r.replicas, 4);
    if (r.l2_gap == 0.0) ++refs;
  }
  // sigma, dsigma, d2sigma and iter, each with a polygonal and a convolution scheme
  EXPECT_EQ(rows.size(), 8u * 3u);
  EXPECT_EQ(refs, 8);
  EXPECT_EQ(rows[3].quantity, "sigma_conv");
  EXPECT_EQ(rows[6].quantity, "dsigma_poly");
  EXPECT_EQ(rows[23].quantity, "iter_conv");
  const auto again = convergence_study(T, s, 3);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].mean, again[i].mean);
  s.Ns = {2, 4};
  s.n = 64;
  s.poly_reference = 64;
  s.conv_reference = 16;
  EXPECT_THROW(convergence_study(T, s, 3), ConvergenceError);
}
