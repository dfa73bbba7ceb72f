#include <gtest/gtest.h>

#include "eqloop/cyclic.hpp"
#include "eqloop/errors.hpp"
#include "eqloop/random.hpp"

using namespace eqloop;

namespace {

double residual(const Manifold& m, const Chain& c) { return c.empty() ? 0.0 : pointwise_residual(m, c, 100, 17); }

}  // namespace

class CyclicIdentities : public ::testing::TestWithParam<const char*> {};

TEST_P(CyclicIdentities, SquaresVanishOnRandomChains) {
  const ManifoldPtr m = make_manifold(GetParam());
  for (int i = 0; i < 25; ++i) {
    auto rng = make_rng(replica_seed(42, static_cast<std::uint64_t>(i)));
    const Chain c = random_chain(*m, rng, 4, 3);
    EXPECT_LT(residual(*m, hochschild_b(hochschild_b(c))), 1e-7);
    EXPECT_LT(residual(*m, connes_B(connes_B(c))), 1e-7);
    Chain anti = hochschild_b(connes_B(c));
    anti.add(connes_B(hochschild_b(c)));
    EXPECT_LT(residual(*m, anti), 1e-7);
    EXPECT_LT(residual(*m, cyclic_d(cyclic_d(c))), 1e-7);
  }
}

TEST_P(CyclicIdentities, DegreeShifts) {
  const ManifoldPtr m = make_manifold(GetParam());
  for (int i = 0; i < 25; ++i) {
    auto rng = make_rng(replica_seed(43, static_cast<std::uint64_t>(i)));
    const Chain c = random_chain(*m, rng, 4, 3);
    for (const auto& [coef, w] : c.terms()) {
      const int deg = word_degree(w);
      const Chain b = hochschild_b(Chain(w)), B = connes_B(Chain(w));
      for (const auto& t : b.terms()) EXPECT_EQ(word_degree(t.second), deg + 1);
      for (const auto& t : B.terms()) EXPECT_EQ(word_degree(t.second), deg - 1);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Manifolds, CyclicIdentities, ::testing::Values("t2", "s2"));

TEST(Cyclic, WordDegree) {
  Torus T;
  FormWord w({form_catalog(T, "f_t2"), form_catalog(T, "omega_t2"), form_catalog(T, "area_t2")});
  EXPECT_EQ(word_degree(w), 0 + 0 + 1);
  EXPECT_EQ(w.degrees(), (std::vector<int>{0, 1, 2}));
  EXPECT_FALSE(w.is_degenerate());
  FormWord deg({form_catalog(T, "f_t2"), form_catalog(T, "one")});
  EXPECT_TRUE(deg.is_degenerate());
}

TEST(Cyclic, BoundaryOfSingleSlotIsExteriorDerivative) {
  Torus T;
  const DifferentialForm f = form_catalog(T, "f_t2");
  Chain diff = hochschild_b(Chain(FormWord({f})));
  diff.add(-1.0, FormWord({d(f)}));
  EXPECT_LT(residual(T, diff), 1e-12);
}

TEST(Cyclic, ConnesOperatorOnTwoSlots) {
  Torus T;
  const DifferentialForm a = form_catalog(T, "omega_t2"), b = form_catalog(T, "area_t2");
  const DifferentialForm one = form_catalog(T, "one");
  // B(a ⊗ b) = 1⊗a⊗b + (−1)^{(|a|−1)(|b|−1)} 1⊗b⊗a
  Chain diff = connes_B(Chain(FormWord({a, b})));
  diff.add(-1.0, FormWord({one, a, b}));
  diff.add(-1.0, FormWord({one, b, a}));  // (|a|−1)(|b|−1) = 0
  EXPECT_LT(residual(T, diff), 1e-12);
  // (2−1)(2−1) is odd: the two rotations of e ⊗ e cancel
  EXPECT_LT(residual(T, connes_B(Chain(FormWord({b, b})))), 1e-12);
}

TEST(Cyclic, MixedParityChainThrows) {
  Torus T;
  Chain c(FormWord({form_catalog(T, "f_t2")}));
  c.add(1.0, FormWord({form_catalog(T, "omega_t2")}));
  EXPECT_THROW(c.parity(), ParityError);
  EXPECT_EQ(Chain().parity(), 0);
}
