#include <gtest/gtest.h>

#include <cmath>

#include "eqloop/diffeology.hpp"
#include "eqloop/errors.hpp"

using namespace eqloop;

namespace {

double max_gap(const LoopField& a, const LoopField& b) {
  double e = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, (a[j] - b[j]).norm());
  return e;
}

double max_gap(const Loop& a, const Loop& b) { return max_gap(a.points, b.points); }

double max_norm(const LoopField& a) {
  double e = 0.0;
  for (const auto& v : a) e = std::max(e, v.norm());
  return e;
}

// Central difference of the plot in parameter direction j, taken in R^d.
LoopField fd_direction(const Manifold& m, const PlotSpec& p, Eigen::VectorXd u, int j, const Loop& g, double h) {
  Eigen::VectorXd up = u, dn = u;
  up[j] += h;
  dn[j] -= h;
  const Loop a = apply_plot(m, p, up, g), b = apply_plot(m, p, dn, g);
  LoopField out(a.points.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a.points[i] - b.points[i]) / (2 * h);
  return out;
}

PlotSpec t2_plot(const Torus& T) { return exp_deform_plot({field_catalog(T, "wave1"), field_catalog(T, "twist")}); }

}  // namespace

TEST(Plot, ZeroParameterIsIdentity) {
  for (const char* name : {"t2", "s2"}) {
    const ManifoldPtr m = make_manifold(name);
    const auto fields = std::string(name) == "t2"
                            ? std::vector<NamedField>{field_catalog(*m, "wave1"), field_catalog(*m, "twist")}
                            : std::vector<NamedField>{field_catalog(*m, "rot_x"), field_catalog(*m, "wave_s2")};
    const PlotSpec p = exp_deform_plot(fields);
    const Loop g = smooth_test_loop(*m, std::string(name) == "t2" ? "winding" : "tilted", 64);
    EXPECT_LT(max_gap(apply_plot(*m, p, Eigen::VectorXd::Zero(2), g), g), 1e-15);
  }
}

TEST(Plot, ExpDeformMatchesDefinition) {
  Torus T;
  const PlotSpec p = t2_plot(T);
  const Loop g = smooth_test_loop(T, "winding", 64);
  Eigen::VectorXd u(2);
  u << 0.2, -0.1;
  const Loop out = apply_plot(T, p, u, g);
  const NamedField a = field_catalog(T, "wave1"), b = field_catalog(T, "twist");
  for (long j = 0; j < g.size(); ++j) {
    const double s = static_cast<double>(j) / g.size();
    const Ambient v = T.tangent_project(g[j], u[0] * a(s, g[j]) + u[1] * b(s, g[j]));
    EXPECT_LT((out[j] - T.exp_map(g[j], v)).norm(), 1e-14);
  }
}

TEST(Plot, DerivativeMatchesDifferences) {
  Sphere S;
  const PlotSpec p = exp_deform_plot({field_catalog(S, "rot_x"), field_catalog(S, "wave_s2")});
  const Loop g = smooth_test_loop(S, "tilted", 64);
  Eigen::VectorXd u(2);
  u << 0.1, 0.25;
  for (int j = 0; j < 2; ++j) EXPECT_LT(max_gap(plot_derivative(S, p, u, j, g), fd_direction(S, p, u, j, g, 1e-5)), 1e-8);
}

TEST(Plot, ExtendedDirectionIsLoopVelocity) {
  Torus T;
  const PlotSpec p = extended_plot(t2_plot(T));
  ASSERT_EQ(p.dimension(), 3);
  const Loop g = smooth_test_loop(T, "winding", 128);
  Eigen::VectorXd u(3);
  u << 0.1, 0.1, 0.25;
  const Loop moved = apply_plot(T, p, u, g);
  EXPECT_LT(max_gap(plot_derivative(T, p, u, 2, g), loop_velocity(T, moved)), 1e-15);
  // parameter directions at an on-grid rotation are rotated fields
  const LoopField d0 = plot_derivative(T, p, u, 0, g);
  const LoopField ref = plot_derivative(T, t2_plot(T), u.head(2), 0, g);
  for (long j = 0; j < g.size(); ++j) EXPECT_LT((d0[j] - ref[(j + 32) % 128]).norm(), 1e-15);
}

TEST(Plot, BoxAndValidation) {
  Torus T;
  PlotSpec p = t2_plot(T);
  EXPECT_NO_THROW(p.validate());
  Eigen::VectorXd u(2);
  u << 0.7, 0.0;
  EXPECT_THROW(apply_plot(T, p, u, smooth_test_loop(T, "small", 32)), BoundaryError);
  PlotSpec deep = p;
  deep.pieces[0].stages.assign(9, deep.pieces[0].stages[0]);
  EXPECT_THROW(deep.validate(), ConfigError);
  PlotSpec tag = p;
  tag.tag = 3;
  EXPECT_THROW(tag.validate(), ConfigError);
  PlotSpec retract = p;
  retract.pieces[0].stages.push_back(Retract{0.5, -1});
  EXPECT_THROW(retract.validate(), ConfigError);
  retract.tag = 2;
  EXPECT_NO_THROW(retract.validate());
  PlotSpec aug = p;
  aug.augmented = true;
  EXPECT_THROW(aug.validate(), ConfigError);
}

TEST(Plot, PieceSelection) {
  Torus T;
  PlotSpec p = t2_plot(T);
  PlotPiece other = p.pieces[0];
  p.pieces[0].predicate.clauses = {{2, 0.2, false}};
  other.predicate.clauses = {{2, 0.2, true}};
  p.pieces.push_back(other);
  EXPECT_EQ(select_piece(T, p, smooth_test_loop(T, "small", 64)), 0);
  EXPECT_EQ(select_piece(T, p, smooth_test_loop(T, "winding", 64)), 1);
  p.pieces[1].predicate.clauses.clear();
  EXPECT_THROW(select_piece(T, p, smooth_test_loop(T, "small", 64)), PartitionError);
}

TEST(Plot, DumpIsDeterministic) {
  Torus T;
  const PlotSpec p = extended_plot(t2_plot(T));
  const std::string a = dump_plot(p);
  EXPECT_EQ(a, dump_plot(p));
  EXPECT_NE(a.find("wave1"), std::string::npos);
  EXPECT_NE(a.find("twist"), std::string::npos);
  EXPECT_NE(a.find("extended"), std::string::npos);
}

// θ₁ = s + 0.1 sin 2πs, θ₂ = 0.3 + 0.15 cos 2πs + 0.05 sin 4πs
TEST(Velocity, MatchesAnalyticDerivative) {
  Torus T;
  const int n = 256;
  const Loop g = smooth_test_loop(T, "winding", n);
  const LoopField v = loop_velocity(T, g);
  for (int j = 0; j < n; ++j) {
    const double w = kTwoPi * j / n;
    const Eigen::Vector2d th = T.coordinates(g[j]);
    const Eigen::Vector2d rate(1.0 + 0.2 * kPi * std::cos(w), -0.3 * kPi * std::sin(w) + 0.2 * kPi * std::cos(2 * w));
    EXPECT_LT((v[j] - T.coordinate_vector(th, rate)).norm(), 1e-6);
  }
}

TEST(Retraction, EndpointsAndEquivariance) {
  for (const char* name : {"t2", "s2"}) {
    const ManifoldPtr m = make_manifold(name);
    const Loop g = smooth_test_loop(*m, "small", 128);
    EXPECT_LT(max_gap(retraction(*m, 1.0, g), g), 1e-12);
    const Loop h0 = retraction(*m, 0.0, g);
    for (long j = 1; j < h0.size(); ++j) EXPECT_LT((h0[j] - h0[0]).norm(), 1e-14);
    for (double r : {0.3, 0.8}) {
      const Loop a = retraction(*m, r, rotate_index(g, 19)), b = rotate_index(retraction(*m, r, g), 19);
      EXPECT_LT(max_gap(a, b), 1e-12);
      for (long j = 0; j < a.size(); ++j) EXPECT_LT(m->distance_to_manifold(a[j]), 1e-14);
    }
  }
}

TEST(Retraction, ChordEndpoints) {
  Sphere S;
  const Loop g = smooth_test_loop(S, "tilted", 8);
  EXPECT_LT((chord(S, 0.0, g[0], g[3]) - g[0]).norm(), 1e-15);
  EXPECT_LT((chord(S, 1.0, g[0], g[3]) - g[3]).norm(), 1e-14);
  EXPECT_NEAR(S.geodesic_distance(g[0], chord(S, 0.25, g[0], g[3])), 0.25 * S.geodesic_distance(g[0], g[3]), 1e-13);
}

TEST(Retraction, RadialFieldMatchesDifferences) {
  Torus T;
  const Loop g = smooth_test_loop(T, "small", 128);
  for (double r : {0.2, 0.6}) {
    const double h = 1e-5;
    const Loop a = retraction(T, r + h, g), b = retraction(T, r - h, g);
    LoopField fd(g.points.size());
    for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = (a.points[i] - b.points[i]) / (2 * h);
    const LoopField X = radial_field(T, r, g);
    EXPECT_LT(max_gap(X, fd), 1e-7 * std::max(1.0, max_norm(fd)));
  }
}
