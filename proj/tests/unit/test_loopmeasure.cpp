#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "eqloop/diffeology.hpp"
#include "eqloop/errors.hpp"
#include "eqloop/loop_io.hpp"
#include "eqloop/loopmeasure.hpp"
#include "eqloop/random.hpp"
#include "eqloop/stats.hpp"

using namespace eqloop;

namespace {

double max_gap(const Loop& a, const Loop& b) {
  double e = 0.0;
  for (long j = 0; j < a.size(); ++j) e = std::max(e, (a[j] - b[j]).norm());
  return e;
}

Loop pure_winding(const Torus& T, int n) {
  Loop g;
  for (int i = 0; i < n; ++i) g.points.push_back(T.from_coordinates({static_cast<double>(i) / n, 0.25}));
  return g;
}

}  // namespace

TEST(Bridge, PinnedAtBasepoint) {
  for (const char* name : {"t2", "s2"}) {
    const ManifoldPtr m = make_manifold(name);
    auto rng = make_rng(11);
    const Ambient x = m->random_point(rng);
    const Loop g = sample_bridge(*m, x, 64, rng);
    ASSERT_EQ(g.size(), 64);
    EXPECT_EQ(g[0], x);
    EXPECT_EQ(g[64], x);  // the grid wraps back to the basepoint
    for (long j = 0; j < g.size(); ++j) EXPECT_LT(m->distance_to_manifold(g[j]), 1e-12);
  }
}

TEST(Bridge, SameSeedSameLoop) {
  for (const char* name : {"t2", "s2"}) {
    const ManifoldPtr m = make_manifold(name);
    auto r1 = make_rng(99), r2 = make_rng(99);
    EXPECT_EQ(max_gap(sample_loop(*m, 32, r1), sample_loop(*m, 32, r2)), 0.0);
  }
}

// E Σ|Δ|² = 2(1 − 1/n) + E|k|²/n per loop, and the winding k has E k² ≈ 1 per axis.
TEST(Bridge, TorusQuadraticVariation) {
  Torus T;
  std::vector<double> qv;
  for (int r = 0; r < 2000; ++r) {
    auto rng = make_rng(replica_seed(5, static_cast<std::uint64_t>(r)));
    qv.push_back(quadratic_variation(T, sample_loop(T, 256, rng)));
  }
  EXPECT_LT(std::abs(mean(qv) - 2.0), 3.0 * standard_error(qv));
}

TEST(Bridge, AcceptanceFloorIsEnforced) {
  Sphere S;
  auto rng = make_rng(3);
  BridgeOptions opt;
  opt.acceptance_floor = 1.01;
  EXPECT_THROW(sample_bridge(S, S.random_point(rng), 32, rng, opt), ConvergenceError);
}

TEST(Basepoint, TorusUniform) {
  Torus T;
  auto rng = make_rng(8);
  std::vector<double> a, b;
  for (int i = 0; i < 4000; ++i) {
    int trials = 0;
    const Eigen::Vector2d q = T.coordinates(sample_basepoint(T, rng, &trials));
    EXPECT_EQ(trials, 1);
    a.push_back(q[0]);
    b.push_back(q[1]);
  }
  EXPECT_GT(ks_one_sample(a, [](double x) { return x; }).p_value, 0.01);
  EXPECT_GT(ks_one_sample(b, [](double x) { return x; }).p_value, 0.01);
}

TEST(Basepoint, SphereHeightHasZeroMean) {
  Sphere S;
  auto rng = make_rng(12);
  std::vector<double> z;
  for (int i = 0; i < 100000; ++i) z.push_back(sample_basepoint(S, rng)[2]);
  EXPECT_LT(std::abs(mean(z)), 3.0 * standard_error(z));
  // uniform on S² makes the height uniform on [−1, 1]
  z.resize(5000);
  EXPECT_GT(ks_one_sample(z, [](double x) { return 0.5 * (x + 1.0); }).p_value, 0.01);
}

TEST(Rotation, GridAndOffGrid) {
  Torus T;
  const Loop g = smooth_test_loop(T, "winding", 64);
  bool off = true;
  const Loop r = rotate_loop(T, 0.25, g, &off);
  EXPECT_FALSE(off);
  EXPECT_EQ(max_gap(r, rotate_index(g, 16)), 0.0);
  EXPECT_EQ(r[0], g[16]);
  rotate_loop(T, 0.3 / 64, g, &off);
  EXPECT_TRUE(off);
  EXPECT_EQ(max_gap(rotate_loop(T, 1.0, g), g), 0.0);
}

TEST(Rotation, CylindricalFunctionalsAreInvariantInLaw) {
  Torus T;
  std::vector<double> a, b;
  for (int r = 0; r < 1000; ++r) {
    auto r1 = make_rng(replica_seed(21, static_cast<std::uint64_t>(r)));
    auto r2 = make_rng(replica_seed(22, static_cast<std::uint64_t>(r)));
    const Loop g = sample_loop(T, 64, r1);
    const Loop h = rotate_index(sample_loop(T, 64, r2), 23);
    a.push_back(T.coordinates(g[5])[0] + T.geodesic_distance(g[5], g[20]));
    b.push_back(T.coordinates(h[5])[0] + T.geodesic_distance(h[5], h[20]));
  }
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
}

TEST(Polygon, InterpolatesKnots) {
  Sphere S;
  const Loop g = smooth_test_loop(S, "tilted", 128);
  const PolygonalLoop p = polygonal(S, g, 16);
  ASSERT_EQ(p.knots(), 16);
  for (int j = 0; j < 16; ++j) {
    EXPECT_EQ(p.knot(j), g[8 * j]);
    EXPECT_LT((p.eval(j / 16.0).first - g[8 * j]).norm(), 1e-12);
    EXPECT_LT((p.chord(j) - S.log_map(g[8 * j], g[8 * j + 8])).norm(), 1e-14);
  }
  // the broken geodesic moves at constant speed N·|chord| on each piece
  const auto [x, v] = p.eval(0.5 / 16.0);
  EXPECT_NEAR(v.norm(), 16.0 * p.chord(0).norm(), 1e-10);
  EXPECT_LT(S.distance_to_manifold(x), 1e-14);
}

TEST(Kernel, MassAndWeights) {
  const PlateauKernel K{4, 2};
  // plateau 2(1/N − 1/N^k) plus the step band, which carries half its width on each side
  const int panels = 400000;
  const double a = -1.0 / K.N, b = 1.0 / K.N, h = (b - a) / panels;
  double s = K.unnormalized(a) + K.unnormalized(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * K.unnormalized(a + i * h);
  EXPECT_NEAR(s * h / 3.0, K.unnormalized_mass(), 1e-9);
  EXPECT_DOUBLE_EQ(K.unnormalized(0.0), 1.0);
  EXPECT_EQ(K.unnormalized(0.3), 0.0);

  for (int N : {8, 16, 64}) {
    const auto w = convolution_weights(1024, N, 4);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      sum += w[i];
      EXPECT_NEAR(w[i], w[w.size() - 1 - i], 1e-15);
      EXPECT_GE(w[i], 0.0);
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    const KernelWeights split = convolution_weight_split(1024, N, 4);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(split.plateau[i] + split.transition[i], w[i], 1e-16);
  }
}

TEST(Convolution, ConstantAndPureWindingAreFixed) {
  Torus T;
  const Loop c = smooth_test_loop(T, "constant", 256);
  EXPECT_LT(max_gap(convolve(T, c, 16).projected, c), 1e-15);
  const Loop w = pure_winding(T, 256);
  EXPECT_LT(max_gap(convolve(T, w, 16).projected, w), 1e-12);
}

TEST(Convolution, CommutesWithRotationAndConverges) {
  Sphere S;
  const Loop g = smooth_test_loop(S, "tilted", 512);
  EXPECT_LT(max_gap(convolve(S, rotate_index(g, 37), 32).projected, rotate_index(convolve(S, g, 32).projected, 37)),
            1e-14);
  const double e16 = max_gap(convolve(S, g, 16).projected, g);
  const double e32 = max_gap(convolve(S, g, 32).projected, g);
  EXPECT_LT(e32, e16 / 3.0);  // second order in 1/N
}

TEST(Convolution, RoughLoopLeavesTube) {
  Torus T;
  Loop g;
  for (int i = 0; i < 64; ++i) g.points.push_back(T.from_coordinates({i % 2 ? 0.5 : 0.0, i % 2 ? 0.5 : 0.0}));
  EXPECT_THROW(convolve(T, g, 8), TubeError);
}

TEST(LoopSets, ModulusDiameterAndMembership) {
  Torus T;
  const Loop c = smooth_test_loop(T, "constant", 64);
  EXPECT_EQ(loop_diameter(T, c), 0.0);
  EXPECT_TRUE(in_T_eps(T, c, 0.1));
  EXPECT_FALSE(in_O_eps(T, c, 0.1));
  const Loop w = pure_winding(T, 64);
  EXPECT_NEAR(modulus(T, w, 2), 1.0 / 64, 1e-14);
  EXPECT_NEAR(loop_diameter(T, w), 0.5, 1e-14);
  EXPECT_TRUE(in_omega_N(T, w, 32, 0.05));
  EXPECT_FALSE(in_omega_N(T, w, 2, 0.05));
}

TEST(LoopIo, RoundTripIsExact) {
  Sphere S;
  auto rng = make_rng(4);
  const LoopRecord rec{"s2", 77, sample_loop(S, 32, rng)};
  std::stringstream ss;
  write_loop(ss, rec);
  const LoopRecord back = read_loop(ss);
  EXPECT_EQ(back.manifold, "s2");
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(max_gap(back.loop, rec.loop), 0.0);
}

TEST(Stats, KolmogorovTailMatchesCriticalValues) {
  // asymptotic critical values at the 5% and 1% levels
  EXPECT_NEAR(kolmogorov_tail(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_tail(1.6276), 0.01, 1e-4);
  EXPECT_NEAR(kolmogorov_tail(0.0), 1.0, 1e-12);
}

TEST(Stats, TwoSampleStatistic) {
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {4, 5, 6}).statistic, 1.0);
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 3, 5, 7}, {2, 4, 6, 8}).statistic, 0.25);
}
