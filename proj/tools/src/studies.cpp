#include "studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eqloop/chen.hpp"
#include "eqloop/errors.hpp"
#include "eqloop/localization.hpp"
#include "eqloop/parallel.hpp"
#include "eqloop/random.hpp"
#include "eqloop/stats.hpp"

namespace eqloop::tools {

bool StudyResult::pass() const {
  for (const auto& c : checks)
    if (!c.pass()) return false;
  return true;
}

nlohmann::json StudyResult::summary() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j;
    j["test"] = kind + "." + c.test;
    j["status"] = c.pass() ? "pass" : "fail";
    j["residual"] = std::isfinite(c.residual) ? nlohmann::json(c.residual) : nlohmann::json(nullptr);
    j["tolerance"] = c.tolerance;
    if (c.lower_bound) j["bound"] = "lower";
    arr.push_back(j);
  }
  return arr;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const StudyResult& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

StudyResult parse_csv(const std::string& text) {
  StudyResult r;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      r.columns = cells;
      header = false;
    } else {
      if (cells.size() != r.columns.size()) throw ConfigError("csv: row width differs from header");
      r.rows.push_back(cells);
    }
  }
  return r;
}

void write_outputs(const StudyResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base = std::filesystem::path(dir) / r.kind;
  {
    std::ofstream f(base.string() + ".csv", std::ios::binary);
    f << to_csv(r);
  }
  {
    std::ofstream f(base.string() + ".json", std::ios::binary);
    f << r.summary().dump(2) << "\n";
  }
}

// ------------------------------------------------------------ shared helpers

namespace {

using Row = std::vector<std::string>;

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

bool is_t2(const Manifold& m) { return m.kind() == ManifoldKind::Torus; }

FormWord parse_word(const Manifold& m, const std::string& spec) {
  FormWord w;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, '|')) {
    w.slots.push_back(form_catalog(m, item));
    w.labels.push_back(item);
  }
  if (w.slots.empty()) throw ConfigError("word: empty");
  return w;
}

std::string default_word(const Manifold& m) { return is_t2(m) ? "f_t2|omega_t2" : "f_s2|omega_s2"; }

PlotSpec make_plot(const Manifold& m, const StudyConfig& cfg) {
  const auto names =
      cfg.strings("fields", is_t2(m) ? std::vector<std::string>{"wave1", "twist"} : std::vector<std::string>{"rot_x", "wave_s2"});
  std::vector<NamedField> fields;
  for (const auto& n : names) fields.push_back(field_catalog(m, n));
  return exp_deform_plot(fields, 0.5);
}

Eigen::VectorXd make_u(const StudyConfig& cfg, int dim) {
  std::vector<double> def(dim, 0.0);
  if (dim >= 1) def[0] = 0.1;
  if (dim >= 2) def[1] = -0.2;
  const auto v = cfg.reals("u", def);
  if (static_cast<int>(v.size()) != dim) throw ConfigError("u: expects one value per plot field");
  Eigen::VectorXd u(dim);
  for (int i = 0; i < dim; ++i) u[i] = v[i];
  return u;
}

Loop make_loop(const Manifold& m, const StudyConfig& cfg, const std::string& def, int n) {
  const std::string name = cfg.str("loop", def);
  if (name == "brownian") {
    auto rng = make_rng(replica_seed(cfg.u64("seed", 0), 0, 7));
    return sample_loop(m, n, rng);
  }
  return smooth_test_loop(m, name, n);
}

/// Regularized Brownian loop in O_ε (redrawn from the next stream until the
/// diameter exceeds ε). Short bridges keep the energy near the cover scale.
Loop regular_loop(const Manifold& m, int n, int N, double eps, double duration, std::uint64_t seed, int index) {
  BridgeOptions opt;
  opt.duration = duration;
  for (std::uint64_t attempt = 0;; ++attempt) {
    auto rng = make_rng(replica_seed(seed, static_cast<std::uint64_t>(index), attempt));
    const Loop raw = sample_loop(m, n, rng, opt);
    try {
      Loop g = convolve(m, raw, N).projected;
      if (in_O_eps(m, g, eps)) return g;
    } catch (const TubeError&) {
    }
    if (attempt > 1000) throw ConvergenceError("could not draw a regularized loop in O_eps");
  }
}

// ------------------------------------------------------------ studies

StudyResult study_sample(const Manifold& m, const StudyConfig& cfg) {
  const int n = cfg.integer("n", 256), R = cfg.integer("replicas", 100);
  BridgeOptions opt;
  opt.duration = cfg.real("duration", 1.0);
  std::vector<double> qv(R), diam(R), acc(R);
  parallel_for(R, cfg.integer("threads", 1), [&](int r) {
    auto rng = make_rng(replica_seed(cfg.u64("seed", 0), static_cast<std::uint64_t>(r)));
    const Ambient x = sample_basepoint(m, rng);
    double a = 1.0;
    const Loop g = sample_bridge(m, x, n, rng, opt, &a);
    qv[r] = quadratic_variation(m, g);
    diam[r] = loop_diameter(m, g);
    acc[r] = a;
  });
  StudyResult res;
  res.kind = "sample";
  res.columns = {"replica", "quadratic_variation", "diameter", "acceptance"};
  for (int r = 0; r < R; ++r) res.rows.push_back({num(r), num(qv[r]), num(diam[r]), num(acc[r])});
  const double expected = 2.0 * opt.duration;
  res.checks.push_back({"quadratic_variation_in_se", std::abs(mean(qv) - expected) / standard_error(qv), 3.0});
  return res;
}

StudyResult study_dh(const Manifold& m, const StudyConfig& cfg) {
  const std::string mu0 = cfg.str("mu0", is_t2(m) ? "one" : "height_s2");
  const std::string mu2 = cfg.str("mu2", is_t2(m) ? "zero" : "area_s2");
  DifferentialForm f0 = form_catalog(m, mu0);
  DifferentialForm f2 = mu2 == "zero" ? DifferentialForm(m.ambient_dim(), 2) : form_catalog(m, mu2);
  if (f0.degree() != 0 || f2.degree() != 2) throw ConfigError("dh: mu0 must be a 0-form and mu2 a 2-form");
  const EquivariantForm mu({f0, f2});
  const auto lambdas = cfg.reals("lambdas", {0.25, 1.0, 4.0});
  const std::string check = cfg.str("check", "enforce");
  if (check != "enforce" && check != "skip") throw ConfigError("dh: check must be enforce or skip");
  const double expected = cfg.real("expected", is_t2(m) ? 0.0 : 4.0 * kPi);
  const double tol = cfg.real("tolerance", 1e-6);
  StudyResult res;
  res.kind = "dh";
  res.columns = {"lambda", "value"};
  double worst = 0.0, lo = 1e300, hi = -1e300;
  for (double l : lambdas) {
    const double v =
        dh_integral(m, l, mu, check == "enforce" ? ClosednessCheck::Enforce : ClosednessCheck::Skip);
    res.rows.push_back({num(l), num(v)});
    worst = std::max(worst, std::abs(v - expected));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (cfg.has("expected") || check == "enforce") res.checks.push_back({"value", worst, tol});
  res.checks.push_back({"constancy", hi - lo, check == "enforce" ? tol : 1e300});
  return res;
}

StudyResult study_chen(const Manifold& m, const StudyConfig& cfg) {
  const int n = cfg.integer("n", 256);
  const FormWord w = parse_word(m, cfg.str("word", default_word(m)));
  const PlotSpec p = make_plot(m, cfg);
  const Eigen::VectorXd u = make_u(cfg, p.m);
  std::vector<int> dirs = cfg.integers("dirs", {});
  if (!cfg.has("dirs"))
    for (int j = 0; j < word_degree(w); ++j) dirs.push_back(j);
  SigmaSettings s;
  s.knots = cfg.integer("knots", 0);
  StudyResult res;
  res.kind = "chen";
  res.columns = {"quantity", "value"};
  double v = 0.0, se = 0.0;
  if (cfg.str("loop", "brownian") == "brownian") {
    const McValue mc = pullback_sigma_mc(m, w, p, u, dirs, n, cfg.integer("replicas", 50), cfg.u64("seed", 0), s);
    v = mc.mean;
    se = mc.stderr_;
  } else {
    v = pullback_sigma(m, w, p, u, dirs, make_loop(m, cfg, "", n), s);
  }
  res.rows.push_back({"sigma", num(v)});
  res.rows.push_back({"stderr", num(se)});
  res.checks.push_back({"finite", std::isfinite(v) ? 0.0 : INFINITY, 0.0});
  return res;
}

StudyResult study_chainmap(const Manifold& m, const StudyConfig& cfg) {
  const FormWord w = parse_word(m, cfg.str("word", default_word(m)));
  const PlotSpec p = make_plot(m, cfg);
  const Eigen::VectorXd u = make_u(cfg, p.m);
  const auto grids = cfg.integers("grids", {256, 512, 1024});
  StudyResult res;
  res.kind = "chainmap";
  res.columns = {"n", "residual"};
  std::vector<double> r;
  for (int n : grids) {
    r.push_back(chain_map_residual(m, Chain(w), p, u, make_loop(m, cfg, is_t2(m) ? "winding" : "tilted", n)));
    res.rows.push_back({num(n), num(r.back())});
  }
  res.checks.push_back({"residual", r.back(), cfg.real("tolerance", 1e-3)});
  double order = INFINITY;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i - 1] > 1e-13) order = std::min(order, std::log2(r[i - 1] / r[i]) / std::log2(double(grids[i]) / grids[i - 1]));
  res.checks.push_back({"order", std::isfinite(order) ? order : 1.0, 1.0, true});
  return res;
}

StudyResult study_cartan(const Manifold& m, const StudyConfig& cfg) {
  const int n = cfg.integer("n", 128);
  const FormWord w = parse_word(m, cfg.str("word", default_word(m)));
  const PlotSpec p = make_plot(m, cfg);
  const Eigen::VectorXd u = make_u(cfg, p.m);
  const Loop g = make_loop(m, cfg, "small", n);
  const CartanTerms t = cartan_terms(m, Chain(w), p, u, g, {cfg.integer("nodes", 33)});
  StudyResult res;
  res.kind = "cartan";
  res.columns = {"term", "max_abs"};
  res.rows = {{"sigma", num(t.sigma.max_abs())},
              {"h0", num(t.h0.max_abs())},
              {"d_integral", num(t.dG.max_abs())},
              {"equivariant_integral", num(t.equivariant.max_abs())},
              {"double_interior_integral", num(t.double_interior.max_abs())},
              {"residual", num(t.residual().max_abs())}};
  res.checks.push_back({"residual", t.residual().max_abs(), cfg.real("tolerance", 1e-2)});
  return res;
}

StudyResult study_partition(const Manifold& m, const StudyConfig& cfg) {
  const int n = cfg.integer("n", 256), L = cfg.integer("loops", 100);
  const double eps = cfg.real("eps", 0.2);
  const PartitionProfile prof = PartitionProfile::from_epsilon(eps, cfg.integer("n_max", 64));
  const int reg = cfg.integer("regularize", n / 16);
  std::vector<PartitionState> states(L);
  parallel_for(L, cfg.integer("threads", 1), [&](int i) {
    states[i] = partition(m, regular_loop(m, n, reg, eps, cfg.real("duration", 2.0 * eps * eps), cfg.u64("seed", 0), i), prof);
  });
  StudyResult res;
  res.kind = "partition";
  res.columns = {"loop", "N", "k", "weight"};
  double worst = 0.0, range = 0.0;
  std::size_t most = 0;
  for (int i = 0; i < L; ++i) {
    for (const auto& [a, w] : states[i].weight) {
      res.rows.push_back({num(i), num(a.first), num(a.second), num(w)});
      range = std::max(range, std::max(w - 1.0, -w));
    }
    worst = std::max(worst, std::abs(states[i].sum() - 1.0));
    most = std::max(most, states[i].weight.size());
  }
  res.checks.push_back({"sum_to_one", worst, cfg.real("tolerance", 1e-8)});
  res.checks.push_back({"weights_in_unit_interval", range, 0.0});
  res.checks.push_back({"max_active_terms", static_cast<double>(most), 64.0});
  return res;
}

StudyResult study_homotopy(const Manifold& m, const StudyConfig& cfg) {
  const int n = cfg.integer("n", 128), N1 = cfg.integer("n1", 8);
  const FormWord tau = parse_word(m, cfg.str("word", is_t2(m) ? "omega_t2|eta_t2" : "omega_s2|omega_s2"));
  const PlotSpec p = make_plot(m, cfg);
  const Eigen::VectorXd u = make_u(cfg, p.m);
  const Loop g = make_loop(m, cfg, is_t2(m) ? "winding" : "tilted", n);
  const PulledForm alpha = pulled_alpha(m, N1, p, g), beta = pulled_beta(m, N1, p, g);
  UForm id = wedge(beta, equivariant_d(alpha, p))(u).without(p.m);
  id[0] -= 1.0;
  const double dbeta = equivariant_d(beta, p)(u).without(p.m).max_abs();
  const PulledForm sigma = equivariant_d(pulled_sigma(m, Chain(tau), p, g), p);
  const double h = homotopy_residual(sigma, m, N1, p, u, g);
  StudyResult res;
  res.kind = "homotopy";
  res.columns = {"quantity", "value"};
  res.rows = {{"ix_alpha", num(ix_alpha(m, N1, apply_plot(m, p, u, g)))},
              {"beta_identity", num(id.max_abs())},
              {"d_beta", num(dbeta)},
              {"homotopy", num(h)}};
  res.checks.push_back({"beta_identity", id.max_abs(), 1e-4});
  res.checks.push_back({"d_beta", dbeta, 1e-3});
  res.checks.push_back({"homotopy", h, cfg.real("tolerance", 1e-2)});
  return res;
}

StudyResult study_cech(const Manifold& m, const StudyConfig& cfg) {
  const int n = cfg.integer("n", 256), L = cfg.integer("loops", 20);
  const double eps = cfg.real("eps", 0.2);
  const PartitionProfile prof = PartitionProfile::from_epsilon(eps, cfg.integer("n_max", 64));
  const int reg = cfg.integer("regularize", n / 16);
  const std::uint64_t seed = cfg.u64("seed", 0);
  StudyResult res;
  res.kind = "cech";
  res.columns = {"loop", "active", "cocycle_residual", "global_residual"};
  std::vector<CoverIndex> universe;
  double worst = 0.0;
  for (int i = 0; i < L; ++i) {
    const PartitionState st = partition(m, regular_loop(m, n, reg, eps, cfg.real("duration", 2.0 * eps * eps), seed, i), prof);
    const auto act = st.active();
    for (const auto& a : act)
      if (std::find(universe.begin(), universe.end(), a) == universe.end()) universe.push_back(a);
    // cocycle σ = δτ from a random 0-cochain; global form restricted to the cover
    auto rng = make_rng(replica_seed(seed, static_cast<std::uint64_t>(i), 99));
    std::normal_distribution<double> z;
    NumericCochain tau, global;
    const double omega = z(rng);
    for (const auto& a : act) {
      tau[{a}] = UForm::scalar(0, z(rng));
      global[{a}] = UForm::scalar(0, omega);
    }
    NumericCochain sigma;
    for (const auto& I : index_sets(act, 2)) sigma[I] = cech_delta(tau, I);
    const NumericCochain k1 = cech_contract(sigma, st.weight, index_sets(act, 1));
    double r1 = 0.0;
    for (const auto& I : index_sets(act, 2)) r1 = std::max(r1, (cech_delta(k1, I) - sigma[I]).max_abs());
    NumericCochain k0 = cech_contract(global, st.weight, index_sets(act, 0));
    double r0 = 0.0;
    for (const auto& I : index_sets(act, 1)) r0 = std::max(r0, (cech_delta(k0, I) - global[I]).max_abs());
    res.rows.push_back({num(i), num(static_cast<int>(act.size())), num(r1), num(r0)});
    worst = std::max({worst, r0, r1});
  }
  // δδ = 0 on a formal cochain over the union of active indices
  FormalCochain c;
  for (const auto& I : index_sets(universe, 1)) c[I] = {{"t" + format_index_set(I), 1}};
  for (const auto& I : index_sets(universe, 2)) c[I] = {{"s" + format_index_set(I), 1}};
  long nonzero = 0;
  for (int size = 3; size <= 4; ++size)
    for (const auto& [I, v] : formal_delta(formal_delta(c, universe, size - 1), universe, size))
      nonzero += static_cast<long>(v.size());
  res.checks.push_back({"delta_delta_terms", static_cast<double>(nonzero), 0.0});
  res.checks.push_back({"contraction", worst, cfg.real("tolerance", 1e-6)});
  return res;
}

StudyResult study_convergence(const Manifold& m, const StudyConfig& cfg) {
  ConvergenceSpec s;
  s.n = cfg.integer("n", 8192);
  s.Ns = cfg.integers("ns", s.Ns);
  s.replicas = cfg.integer("replicas", s.replicas);
  s.poly_reference = cfg.integer("poly_reference", s.n);
  s.conv_reference = cfg.integer("conv_reference", std::min(s.conv_reference, s.n / 4));
  s.kernel_k = cfg.integer("kernel_k", s.kernel_k);
  s.threads = cfg.integer("threads", 1);
  s.function = cfg.str("function", s.function);
  s.form1 = cfg.str("form1", s.form1);
  s.form2 = cfg.str("form2", s.form2);
  s.fields = cfg.strings("fields", s.fields);
  s.u = cfg.reals("u", s.u);
  s.fd_step = cfg.real("fd_step", s.fd_step);
  int rejected = 0;
  const auto rows = convergence_study(m, s, cfg.u64("seed", 0), &rejected);
  StudyResult res;
  res.kind = "convergence";
  res.columns = {"quantity", "N", "replicas", "mean", "L2_gap", "stderr"};
  for (const auto& r : rows)
    res.rows.push_back({r.quantity, num(r.N), num(r.replicas), num(r.mean), num(r.l2_gap), num(r.stderr_)});
  std::vector<std::string> quantities;
  for (const auto& r : rows)
    if (std::find(quantities.begin(), quantities.end(), r.quantity) == quantities.end()) quantities.push_back(r.quantity);
  for (const auto& q : quantities) {
    std::vector<double> med;
    for (const auto& r : rows)
      if (r.quantity == q && r.l2_gap > 0) med.push_back(r.median_gap);
    double worst = 0.0;
    for (std::size_t i = 1; i < med.size(); ++i) worst = std::max(worst, med[i] / med[i - 1]);
    res.checks.push_back({"median_ratio_" + q, worst, 0.75});
  }
  auto ref = [&](const std::string& q) {
    const ConvergenceRow* out = nullptr;
    for (const auto& r : rows)
      if (r.quantity == q && r.l2_gap == 0.0) out = &r;
    return *out;
  };
  for (const auto& qp : quantities) {
    if (qp.size() < 5 || qp.compare(qp.size() - 5, 5, "_poly") != 0) continue;
    const std::string q = qp.substr(0, qp.size() - 5);
    const auto a = ref(q + "_poly"), b = ref(q + "_conv");
    const double comb = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
    res.checks.push_back({"limit_agreement_" + q, std::abs(a.mean - b.mean) / comb, 2.0});
  }
  res.checks.push_back({"redrawn_loops", static_cast<double>(rejected), static_cast<double>(s.replicas)});
  return res;
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  const ManifoldPtr mp = make_manifold(cfg.str("manifold", "t2"));
  const Manifold& m = *mp;
  const std::string k = cfg.kind();
  if (k == "sample") return study_sample(m, cfg);
  if (k == "dh") return study_dh(m, cfg);
  if (k == "chen") return study_chen(m, cfg);
  if (k == "chainmap") return study_chainmap(m, cfg);
  if (k == "cartan") return study_cartan(m, cfg);
  if (k == "partition") return study_partition(m, cfg);
  if (k == "homotopy") return study_homotopy(m, cfg);
  if (k == "cech") return study_cech(m, cfg);
  if (k == "convergence") return study_convergence(m, cfg);
  throw ConfigError("unknown study kind '" + k + "'");
}

std::string plot_program(const StudyConfig& cfg) {
  const ManifoldPtr mp = make_manifold(cfg.str("manifold", "t2"));
  return dump_plot(make_plot(*mp, cfg));
}

}  // namespace eqloop::tools
