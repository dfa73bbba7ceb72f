#include <gtest/gtest.h>

#include <cmath>

#include "eqloop/errors.hpp"
#include "eqloop/forms.hpp"
#include "eqloop/random.hpp"

using namespace eqloop;

namespace {

std::vector<Ambient> random_vectors(const Manifold& m, const Ambient& x, int k, std::mt19937_64& rng) {
  std::vector<Ambient> v;
  for (int i = 0; i < k; ++i) v.push_back(m.random_tangent(x, 1.0, rng));
  return v;
}

// Composite Simpson on [a, b] with an even number of panels.
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Forms, ExteriorDerivativeMatchesDirectionalDifference) {
  for (const char* name : {"t2", "s2"}) {
    const ManifoldPtr m = make_manifold(name);
    const DifferentialForm f = form_catalog(*m, std::string("f_") + name);
    const DifferentialForm df = d(f);
    auto rng = make_rng(1);
    for (int i = 0; i < 20; ++i) {
      const Ambient x = m->random_point(rng);
      const Ambient v = m->random_tangent(x, 1.0, rng);
      const double h = 1e-5;
      const double fd = (f.eval(x + h * v) - f.eval(x - h * v)) / (2 * h);
      EXPECT_NEAR(df.eval(x, {v}), fd, 1e-7);
    }
  }
}

TEST(Forms, DSquaredVanishes) {
  for (const char* name : {"t2", "s2"}) {
    const ManifoldPtr m = make_manifold(name);
    auto rng = make_rng(2);
    for (const auto& n : form_catalog_names(*m)) {
      const DifferentialForm w = form_catalog(*m, n);
      if (w.degree() + 2 > m->ambient_dim()) continue;
      const DifferentialForm dd = d(d(w));
      const Ambient x = m->random_point(rng);
      Ambient y = x;
      for (int i = 0; i < y.size(); ++i) y[i] += 0.1 * (i + 1);  // off the manifold as well
      std::vector<Ambient> v;
      for (int i = 0; i < w.degree() + 2; ++i) {
        Ambient e = Ambient::Zero(m->ambient_dim());
        e[i % m->ambient_dim()] = 1.0;
        e[(i + 1) % m->ambient_dim()] += 0.5;
        v.push_back(e);
      }
      EXPECT_NEAR(dd.eval(y, v), 0.0, 1e-9) << n;
    }
  }
}

TEST(Forms, WedgeAndInteriorOnOneForms) {
  Torus T;
  const DifferentialForm a = form_catalog(T, "omega_t2"), b = form_catalog(T, "eta_t2");
  ASSERT_EQ(a.degree(), 1);
  ASSERT_EQ(b.degree(), 1);
  const DifferentialForm ab = wedge(a, b);
  auto rng = make_rng(4);
  for (int i = 0; i < 20; ++i) {
    const Ambient x = T.random_point(rng);
    const auto v = random_vectors(T, x, 2, rng);
    const double want = a.eval(x, {v[0]}) * b.eval(x, {v[1]}) - a.eval(x, {v[1]}) * b.eval(x, {v[0]});
    EXPECT_NEAR(ab.eval(x, v), want, 1e-12);
    const VectorField X = killing_vector_field(T);
    const Ambient Xx = T.killing_field(x);
    EXPECT_NEAR(interior(X, ab).eval(x, {v[0]}), ab.eval(x, {Xx, v[0]}), 1e-12);
    EXPECT_NEAR(interior(X, a).eval(x), a.eval(x, {Xx}), 1e-12);
  }
  EXPECT_THROW(interior(killing_vector_field(T), form_catalog(T, "f_t2")), DegreeError);
}

TEST(Forms, MergeSign) {
  EXPECT_EQ(merge_sign(0b01, 0b10), 1);
  EXPECT_EQ(merge_sign(0b10, 0b01), -1);
  EXPECT_EQ(merge_sign(0b101, 0b010), -1);
  EXPECT_EQ(popcount(0b1011), 3);
}

TEST(Integration, AreasAndMoments) {
  Sphere S;
  Torus T;
  EXPECT_NEAR(integrate(S, form_catalog(S, "area_s2")), 4.0 * kPi, 1e-12);
  EXPECT_NEAR(integrate(T, form_catalog(T, "area_t2")), 1.0, 1e-12);
  const ScalarField z = ScalarField::coordinate(2);
  EXPECT_NEAR(integrate(S, (z * z) * form_catalog(S, "area_s2")), 4.0 * kPi / 3.0, 1e-12);
  // Stokes on a closed surface
  EXPECT_NEAR(integrate(S, d(form_catalog(S, "omega_s2"))), 0.0, 1e-12);
  EXPECT_NEAR(integrate(T, d(form_catalog(T, "eta_t2"))), 0.0, 1e-12);
}

TEST(Equivariant, HeightPlusAreaIsClosed) {
  Sphere S;
  const EquivariantForm mu({form_catalog(S, "height_s2"), form_catalog(S, "area_s2")});
  EXPECT_EQ(mu.parity(), 0);
  EXPECT_LT(max_abs_on_samples(S, equivariant_d(S, mu), 200, 7), 1e-12);
  const EquivariantForm area_only({form_catalog(S, "area_s2")});
  EXPECT_GT(max_abs_on_samples(S, equivariant_d(S, area_only), 200, 7), 1.0);
  EXPECT_THROW(EquivariantForm({form_catalog(S, "height_s2"), form_catalog(S, "omega_s2")}).parity(), ParityError);
}

// On the unit sphere |X|² = 4π²(1 − z²) and dX♭ = 4π z·area, so the
// integrand reduces to 2π ∫ (1 + 8π²λz²) e^{−4π²λ(1−z²)} dz.
TEST(DuistermaatHeckman, SphereMatchesOneDimensionalOracle) {
  Sphere S;
  const EquivariantForm mu({form_catalog(S, "height_s2"), form_catalog(S, "area_s2")});
  for (double lambda : {0.25, 1.0, 4.0}) {
    const double oracle = kTwoPi * simpson([&](double z) {
      return (1.0 + 8.0 * kPi * kPi * lambda * z * z) * std::exp(-4.0 * kPi * kPi * lambda * (1.0 - z * z));
    }, -1.0, 1.0, 200000);
    EXPECT_NEAR(oracle, 4.0 * kPi, 1e-9);
    EXPECT_NEAR(dh_integral(S, lambda, mu), oracle, 1e-6) << lambda;
  }
}

TEST(DuistermaatHeckman, BumpAwayFromPolesDecays) {
  Sphere S;
  const ScalarField bump = ScalarField::from_function([](const Ambient& y) {
    const double z = y[2];
    return z * z < 0.81 ? std::exp(-1.0 / (0.81 - z * z)) : 0.0;
  });
  const EquivariantForm mu({bump * form_catalog(S, "area_s2")});
  EXPECT_THROW(dh_integral(S, 1.0, mu), NotClosedError);
  double prev = dh_integral(S, 2.0, mu, ClosednessCheck::Skip);
  EXPECT_GT(prev, 0.0);
  for (double lambda : {4.0, 8.0}) {
    const double v = dh_integral(S, lambda, mu, ClosednessCheck::Skip);
    EXPECT_LE(v, prev / 2.0);
    prev = v;
  }
}

TEST(DuistermaatHeckman, TorusWithoutFixedPointsGivesZero) {
  Torus T;
  const EquivariantForm mu({form_catalog(T, "one"), DifferentialForm(T.ambient_dim(), 2)});
  for (double lambda : {0.25, 1.0, 4.0}) EXPECT_NEAR(dh_integral(T, lambda, mu), 0.0, 1e-12);
}
