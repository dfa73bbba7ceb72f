#include <gtest/gtest.h>

#include <cmath>

#include "eqloop/errors.hpp"
#include "eqloop/forms.hpp"
#include "eqloop/geometry.hpp"
#include "eqloop/random.hpp"

using namespace eqloop;

namespace {

Ambient vec(std::initializer_list<double> xs) {
  Ambient v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Σ (2l+1)/(4π) e^{−l(l+1)t/2} P_l(cos θ), truncated once terms are negligible.
double sphere_kernel_series(double t, double cos_theta) {
  double s = 0.0;
  for (unsigned l = 0; l < 400; ++l) {
    const double w = std::exp(-0.5 * l * (l + 1.0) * t);
    if (w < 1e-18) break;
    s += (2.0 * l + 1.0) / (4.0 * kPi) * w * std::legendre(l, cos_theta);
  }
  return s;
}

// 1 + 2 Σ e^{−2π²k²t} cos(2πkδ) on the unit circle.
double circle_kernel_fourier(double t, double delta) {
  double s = 1.0;
  for (int k = 1; k < 200; ++k) s += 2.0 * std::exp(-2.0 * kPi * kPi * k * k * t) * std::cos(kTwoPi * k * delta);
  return s;
}

}  // namespace

TEST(Sphere, HeatKernelMatchesLegendreSeries) {
  Sphere s;
  const Ambient x = vec({0, 0, 1});
  for (double t : {0.01, 0.1, 0.5, 1.0, 3.0}) {
    for (double theta : {0.0, 0.3, 1.2, 2.5, kPi}) {
      const Ambient y = vec({std::sin(theta), 0, std::cos(theta)});
      const double want = sphere_kernel_series(t, std::cos(theta));
      EXPECT_NEAR(s.heat_kernel(t, x, y), want, 1e-9 * std::max(1.0, want)) << t << " " << theta;
    }
  }
}

TEST(Sphere, HeatKernelHasUnitMass) {
  Sphere s;
  const Ambient x = vec({0.6, 0, 0.8});
  for (double t : {0.05, 0.5, 2.0}) {
    const double mass = integrate_density(s, [&](const Ambient& y, const Ambient&, const Ambient&) {
      return s.heat_kernel(t, x, y);
    });
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(Sphere, HeatKernelRejectsTinyTimes) {
  Sphere s;
  EXPECT_THROW(s.heat_kernel(1e-4, vec({0, 0, 1}), vec({0, 0, 1})), PrecisionError);
}

TEST(Sphere, ExpLogAndDistance) {
  Sphere s;
  auto rng = make_rng(3);
  for (int i = 0; i < 200; ++i) {
    const Ambient x = s.random_point(rng);
    const Ambient v = s.random_tangent(x, 0.8, rng);
    const double r = v.norm();
    const Ambient want = std::cos(r) * x + std::sin(r) / r * v;
    const Ambient y = s.exp_map(x, v);
    EXPECT_LT((y - want).norm(), 1e-13);
    EXPECT_NEAR(s.geodesic_distance(x, y), std::acos(std::clamp(x.dot(y), -1.0, 1.0)), 1e-7);
    EXPECT_LT((s.log_map(x, y) - v).norm(), 1e-10);
    EXPECT_NEAR(x.dot(v), 0.0, 1e-14);
  }
}

TEST(Sphere, ProjectionAndAction) {
  Sphere s;
  const Ambient y = vec({0.3, -1.2, 0.4});
  EXPECT_LT((s.project(y) - y / y.norm()).norm(), 1e-15);
  const Ambient x = vec({1, 0, 0});
  EXPECT_LT((s.act(0.25, x) - vec({0, 1, 0})).norm(), 1e-15);
  EXPECT_LT((s.act(1.0, x) - x).norm(), 1e-14);
  EXPECT_LT((s.act_differential(0.3) * x - s.act(0.3, x)).norm(), 1e-15);
  // Killing field = d/dt act at t = 0
  const double h = 1e-6;
  const Ambient fd = (s.act(h, y) - s.act(-h, y)) / (2 * h);
  EXPECT_LT((s.killing_field(y) - fd).norm(), 1e-8);
}

TEST(Torus, HeatKernelMatchesFourierSeries) {
  Torus T;
  auto rng = make_rng(5);
  for (double t : {0.002, 0.05, 0.3, 2.0}) {
    const Ambient x = T.random_point(rng), y = T.random_point(rng);
    const Eigen::Vector2d d = T.coordinates(y) - T.coordinates(x);
    const double want = circle_kernel_fourier(t, d[0]) * circle_kernel_fourier(t, d[1]);
    EXPECT_NEAR(T.heat_kernel(t, x, y), want, 1e-10 * std::max(1.0, want));
  }
}

TEST(Torus, EmbeddingIsIsometric) {
  Torus T;
  const Eigen::Vector2d q(0.2, 0.7);
  const Ambient x = T.from_coordinates(q);
  EXPECT_NEAR(x.head(2).norm(), Torus::kRadius, 1e-15);
  EXPECT_NEAR(x.tail(2).norm(), Torus::kRadius, 1e-15);
  EXPECT_NEAR(Torus::e1(x).norm(), 1.0, 1e-15);
  EXPECT_NEAR(Torus::e1(x).dot(Torus::e2(x)), 0.0, 1e-15);
  const Eigen::Vector2d back = T.coordinates(x);
  EXPECT_NEAR(back[0], q[0], 1e-14);
  EXPECT_NEAR(back[1], q[1], 1e-14);
}

TEST(Torus, GeodesicsAreStraightLines) {
  Torus T;
  const Eigen::Vector2d q(0.9, 0.05);
  const Ambient x = T.from_coordinates(q);
  const Ambient v = T.coordinate_vector(q, Eigen::Vector2d(0.3, -0.2));
  const Ambient y = T.exp_map(x, v);
  const Eigen::Vector2d got = T.coordinates(y);
  EXPECT_NEAR(wrap_half(got[0] - 0.2), 0.0, 1e-13);
  EXPECT_NEAR(wrap_half(got[1] - 0.85), 0.0, 1e-13);
  EXPECT_NEAR(T.geodesic_distance(x, y), std::hypot(0.3, 0.2), 1e-13);
  EXPECT_LT((T.log_map(x, y) - v).norm(), 1e-13);
}

TEST(Torus, LogMapThrowsOnCutLocus) {
  Torus T;
  const Ambient x = T.from_coordinates({0.0, 0.0});
  EXPECT_THROW(T.log_map(x, T.from_coordinates({0.5, 0.0})), CutLocusError);
  EXPECT_THROW(T.log_map(x, T.from_coordinates({0.36, 0.36})), CutLocusError);
  EXPECT_NO_THROW(T.log_map(x, T.from_coordinates({0.3, 0.3})));
}

TEST(Torus, ProjectionFlagsPointsOutsideTube) {
  Torus T;
  const Ambient x = T.from_coordinates({0.1, 0.4});
  bool out = true;
  const Ambient near = x + 0.2 * Torus::kRadius * vec({1, 0, 0, 0});
  T.project(near, &out);
  EXPECT_FALSE(out);
  EXPECT_NEAR(T.distance_to_manifold(T.project(near)), 0.0, 1e-15);
  T.project(vec({0, 0, 0, 0.1}), &out);
  EXPECT_TRUE(out);
}

TEST(Manifolds, Factory) {
  EXPECT_EQ(make_manifold("s2")->name(), "s2");
  EXPECT_EQ(make_manifold("t2")->name(), "t2");
  EXPECT_THROW(make_manifold("k3"), ConfigError);
  EXPECT_DOUBLE_EQ(wrap_half(0.75), -0.25);
  EXPECT_DOUBLE_EQ(wrap_half(-0.5), -0.5);
}

TEST(Manifolds, ProjectionDerivativeMatchesDifferences) {
  for (const char* name : {"s2", "t2"}) {
    const ManifoldPtr m = make_manifold(name);
    auto rng = make_rng(9);
    const Ambient x = m->random_point(rng);
    Ambient y = x;
    for (int i = 0; i < m->ambient_dim(); ++i) y[i] += 0.01 * m->tube_radius() * (i + 1);
    const AmbientMatrix J = m->project_derivative(y);
    const double h = 1e-6;
    for (int i = 0; i < m->ambient_dim(); ++i) {
      Ambient e = Ambient::Zero(m->ambient_dim());
      e[i] = h;
      const Ambient col = (m->project(y + e) - m->project(y - e)) / (2 * h);
      EXPECT_LT((J.col(i) - col).norm(), 1e-7) << name;
    }
  }
}
