#include <cmath>

#include "eqloop/chen.hpp"
#include "eqloop/errors.hpp"
#include "eqloop/localization.hpp"
#include "eqloop/parallel.hpp"
#include "eqloop/random.hpp"
#include "eqloop/stats.hpp"
#include "studies.hpp"

namespace eqloop::tools {
namespace {

double chain_max(const Manifold& m, const Chain& c, std::uint64_t seed) {
  return c.empty() ? 0.0 : pointwise_residual(m, c, 100, seed);
}

void algebra(StudyResult& r, std::uint64_t seed) {
  for (const std::string name : {"t2", "s2"}) {
    const ManifoldPtr mp = make_manifold(name);
    double bb = 0.0, BB = 0.0, anti = 0.0, total = 0.0;
    for (int i = 0; i < 10; ++i) {
      auto rng = make_rng(replica_seed(seed, static_cast<std::uint64_t>(i), 11));
      const Chain c = random_chain(*mp, rng, 4, 3);
      const std::uint64_t s = replica_seed(seed, static_cast<std::uint64_t>(i), 12);
      bb = std::max(bb, chain_max(*mp, hochschild_b(hochschild_b(c)), s));
      BB = std::max(BB, chain_max(*mp, connes_B(connes_B(c)), s));
      Chain a = hochschild_b(connes_B(c));
      a.add(connes_B(hochschild_b(c)));
      anti = std::max(anti, chain_max(*mp, a, s));
      total = std::max(total, chain_max(*mp, cyclic_d(cyclic_d(c)), s));
    }
    r.checks.push_back({name + ".b_squared", bb, 1e-7});
    r.checks.push_back({name + ".B_squared", BB, 1e-7});
    r.checks.push_back({name + ".bB_plus_Bb", anti, 1e-7});
    r.checks.push_back({name + ".total_squared", total, 1e-7});
  }
  const ManifoldPtr mp = make_manifold("t2");
  const Manifold& m = *mp;
  const PlotSpec p = exp_deform_plot({field_catalog(m, "wave1"), field_catalog(m, "twist")});
  Eigen::VectorXd u(2);
  u << 0.1, -0.2;
  const Loop g = smooth_test_loop(m, "winding", 512);
  const FormWord w({form_catalog(m, "f_t2"), form_catalog(m, "omega_t2")});
  r.checks.push_back({"t2.chain_map", chain_map_residual(m, Chain(w), p, u, g), 1e-3});
  UForm id = wedge(pulled_beta(m, 8, p, g), equivariant_d(pulled_alpha(m, 8, p, g), p))(u).without(2);
  id[0] -= 1.0;
  r.checks.push_back({"t2.beta_identity", id.max_abs(), 1e-4});

  std::vector<CoverIndex> universe = {{8, 0}, {8, 1}, {16, 0}, {16, 2}, {32, 1}};
  FormalCochain c;
  for (const auto& I : index_sets(universe, 2)) c[I] = {{"s" + format_index_set(I), 1}};
  long terms = 0;
  for (const auto& [I, v] : formal_delta(formal_delta(c, universe, 3), universe, 4)) terms += static_cast<long>(v.size());
  r.checks.push_back({"cech.delta_delta_terms", static_cast<double>(terms), 0.0});
}

void geometry(StudyResult& r, std::uint64_t seed) {
  for (const std::string name : {"t2", "s2"}) {
    const ManifoldPtr mp = make_manifold(name);
    const Manifold& m = *mp;
    auto rng = make_rng(replica_seed(seed, 0, 21));
    std::normal_distribution<double> z;
    double round = 0.0, proj = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Ambient x = m.random_point(rng);
      const Ambient v = m.random_tangent(x, 0.1, rng);
      round = std::max(round, (m.log_map(x, m.exp_map(x, v)) - v).norm());
      Ambient y = x;
      for (int k = 0; k < m.ambient_dim(); ++k) y[k] += 0.05 * m.tube_radius() * z(rng);
      proj = std::max(proj, (m.project(m.project(y)) - m.project(y)).norm());
    }
    r.checks.push_back({name + ".exp_log_roundtrip", round, 1e-10});
    r.checks.push_back({name + ".projection_idempotent", proj, 1e-12});

    const Loop g = smooth_test_loop(m, "small", 128);
    const Loop h = retraction(m, 1.0, g);
    double id = 0.0, eq = 0.0;
    for (long j = 0; j < g.size(); ++j) id = std::max(id, (h[j] - g[j]).norm());
    const Loop a = retraction(m, 0.4, rotate_index(g, 16)), b = rotate_index(retraction(m, 0.4, g), 16);
    for (long j = 0; j < g.size(); ++j) eq = std::max(eq, (a[j] - b[j]).norm());
    r.checks.push_back({name + ".retraction_identity", id, 1e-12});
    r.checks.push_back({name + ".retraction_equivariance", eq, 1e-12});
  }
  const ManifoldPtr s2 = make_manifold("s2");
  r.checks.push_back({"s2.area", std::abs(integrate(*s2, form_catalog(*s2, "area_s2")) - 4.0 * kPi), 1e-10});
  const EquivariantForm mu({form_catalog(*s2, "height_s2"), form_catalog(*s2, "area_s2")});
  double worst = 0.0;
  for (double l : {0.25, 1.0, 4.0}) worst = std::max(worst, std::abs(dh_integral(*s2, l, mu) - 4.0 * kPi));
  r.checks.push_back({"s2.duistermaat_heckman", worst, 1e-6});
}

void stochastic(StudyResult& r, std::uint64_t seed, int threads) {
  const ManifoldPtr mp = make_manifold("t2");
  const Manifold& m = *mp;
  const int R = 400, n = 128;
  std::vector<Loop> loops(R), others(R);
  parallel_for(R, threads, [&](int i) {
    auto rng = make_rng(replica_seed(seed, static_cast<std::uint64_t>(i), 31));
    loops[i] = sample_loop(m, n, rng);
    auto rng2 = make_rng(replica_seed(seed, static_cast<std::uint64_t>(i), 32));
    others[i] = sample_loop(m, n, rng2);
  });
  std::vector<double> qv(R), base(R), f0(R), f1(R);
  for (int i = 0; i < R; ++i) {
    qv[i] = quadratic_variation(m, loops[i]);
    base[i] = m.coordinates(loops[i][0])[0];
    // cylindrical functional of a loop and of an independent rotated loop
    f0[i] = std::cos(kTwoPi * m.coordinates(loops[i][32])[1]) + m.geodesic_distance(loops[i][0], loops[i][40]);
    const Loop rot = rotate_index(others[i], 45);
    f1[i] = std::cos(kTwoPi * m.coordinates(rot[32])[1]) + m.geodesic_distance(rot[0], rot[40]);
  }
  r.checks.push_back({"t2.quadratic_variation_in_se", std::abs(mean(qv) - 2.0) / standard_error(qv), 3.0});
  r.checks.push_back({"t2.basepoint_uniform_p", ks_one_sample(base, [](double x) { return x; }).p_value, 0.01, true});
  r.checks.push_back({"t2.rotation_invariance_p", ks_two_sample(f0, f1).p_value, 0.01, true});
}

}  // namespace

StudyResult verify_suite(const std::string& name, std::uint64_t seed, int threads) {
  StudyResult r;
  r.kind = "verify_" + name;
  r.columns = {"test", "residual", "tolerance", "status"};
  if (name == "algebra")
    algebra(r, seed);
  else if (name == "geometry")
    geometry(r, seed);
  else if (name == "stochastic")
    stochastic(r, seed, threads);
  else
    throw ConfigError("verify: suite must be algebra, geometry or stochastic (got '" + name + "')");
  for (const auto& c : r.checks)
    r.rows.push_back({c.test, format_number(c.residual), format_number(c.tolerance), c.pass() ? "pass" : "fail"});
  return r;
}

}  // namespace eqloop::tools
