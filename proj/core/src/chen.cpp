#include "eqloop/chen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "eqloop/errors.hpp"
#include "eqloop/parallel.hpp"
#include "eqloop/quadrature.hpp"
#include "eqloop/random.hpp"
#include "eqloop/stats.hpp"

namespace eqloop {

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2√3)

using Mat = Eigen::MatrixXd;

/// exp of the nilpotent matrix with superdiagonal c (size c.size() + 1), times scale.
Mat unipotent_exp(const std::vector<double>& c, double scale = 1.0) {
  const int L = static_cast<int>(c.size()) + 1;
  Mat e = Mat::Identity(L, L);
  for (int a = 0; a < L; ++a) {
    double prod = 1.0;
    for (int b = a + 1; b < L; ++b) {
      prod *= scale * c[b - 1] / (b - a);
      e(a, b) = prod;
    }
  }
  return e;
}

/// Loop geometry prepared once for many Σ evaluations: polygon through
/// the knots, segment midpoints, Gauss points and velocities, and tangent
/// fields interpolated to those points.
struct Prepared {
  int N = 0;
  std::vector<Ambient> mid;
  std::vector<Ambient> gp[2], gv[2];
  std::vector<std::vector<Ambient>> fmid, fg[2];
};

Ambient interpolate_field(const Manifold& m, const LoopField& X, double s, const Ambient& at) {
  const long n = static_cast<long>(X.size());
  double pos = s * n;
  pos -= std::floor(pos / n) * n;
  const long i0 = static_cast<long>(std::floor(pos));
  const double f = pos - i0;
  const Ambient v = (1.0 - f) * X[static_cast<std::size_t>(i0 % n)] + f * X[static_cast<std::size_t>((i0 + 1) % n)];
  return m.tangent_project(at, v);
}

Prepared prepare(const Manifold& m, const Loop& g, const std::vector<LoopField>& fields, int knots) {
  const long n = g.size();
  const int N = knots > 0 ? knots : static_cast<int>(n);
  if (n % N != 0) throw std::invalid_argument("sigma: knots must divide the loop grid");
  for (const auto& X : fields)
    if (static_cast<long>(X.size()) != n) throw std::invalid_argument("sigma: field length differs from loop grid");
  const PolygonalLoop poly(m, g, N);
  Prepared p;
  p.N = N;
  p.mid.resize(N);
  for (int q = 0; q < 2; ++q) {
    p.gp[q].resize(N);
    p.gv[q].resize(N);
  }
  const double tau[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
  for (int j = 0; j < N; ++j) {
    p.mid[j] = m.geodesic(poly.knot(j), poly.chord(j), 0.5).first;
    for (int q = 0; q < 2; ++q) {
      auto [pt, vel] = m.geodesic(poly.knot(j), poly.chord(j), tau[q]);
      p.gp[q][j] = pt;
      p.gv[q][j] = vel;
    }
  }
  p.fmid.assign(fields.size(), std::vector<Ambient>(N));
  for (int q = 0; q < 2; ++q) p.fg[q].assign(fields.size(), std::vector<Ambient>(N));
  for (std::size_t f = 0; f < fields.size(); ++f)
    for (int j = 0; j < N; ++j) {
      p.fmid[f][j] = interpolate_field(m, fields[f], (j + 0.5) / N, p.mid[j]);
      for (int q = 0; q < 2; ++q) p.fg[q][f][j] = interpolate_field(m, fields[f], (j + tau[q]) / N, p.gp[q][j]);
    }
  return p;
}

/// (1/N) Σ_j a_j · W_j[0, L−1], W_j the Chen product over the window from the
/// midpoint of segment j to the midpoint of segment j + N.
double window_sum(const std::vector<double>& a, const std::vector<std::vector<double>>& inc) {
  const int N = static_cast<int>(a.size());
  const int L = static_cast<int>(inc.size()) + 1;
  if (L == 1) return pairwise_sum(a) / N;
  if (L == 2) return pairwise_sum(a) / N * pairwise_sum(inc[0]);  // every window is the whole loop
  std::vector<double> c(L - 1);
  auto seg = [&](int j, double scale) {
    for (int i = 0; i < L - 1; ++i) c[i] = inc[i][j % N];
    return unipotent_exp(c, scale);
  };
  std::vector<Mat> S(N), Sinv(N);
  for (int j = 0; j < N; ++j) {
    S[j] = seg(j, 1.0);
    Sinv[j] = seg(j, -1.0);
  }
  // A_k = S_0⋯S_{k−1}, Ainv_k = A_k^{-1}, k = 0..2N
  std::vector<Mat> A(2 * N + 1), Ainv(2 * N + 1);
  A[0] = Mat::Identity(L, L);
  Ainv[0] = A[0];
  for (int k = 0; k < 2 * N; ++k) {
    A[k + 1] = A[k] * S[k % N];
    Ainv[k + 1] = Sinv[k % N] * Ainv[k];
  }
  std::vector<double> terms(N);
  for (int j = 0; j < N; ++j) {
    if (a[j] == 0.0) continue;
    const Mat half = seg(j, 0.5);
    const Mat W = half * (Ainv[j + 1] * A[j + N]) * half;
    terms[j] = a[j] * W(0, L - 1);
  }
  return pairwise_sum(terms) / N;
}

/// Enumerate assignments of fields {0..k−1} to consecutive blocks of the given
/// sizes (each block increasing), with the sign of the concatenated permutation.
void for_each_assignment(const std::vector<int>& sizes, int k,
                         const std::function<void(const std::vector<std::vector<int>>&, int)>& fn) {
  std::vector<std::vector<int>> blocks(sizes.size());
  std::vector<int> order;
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t b, unsigned used) {
    if (b == sizes.size()) {
      int inv = 0;
      for (std::size_t x = 0; x < order.size(); ++x)
        for (std::size_t y = x + 1; y < order.size(); ++y)
          if (order[x] > order[y]) ++inv;
      fn(blocks, inv % 2 ? -1 : 1);
      return;
    }
    const int want = sizes[b];
    std::vector<int> pick;
    std::function<void(int)> choose = [&](int start) {
      if (static_cast<int>(pick.size()) == want) {
        blocks[b] = pick;
        unsigned mask = used;
        for (int i : pick) mask |= 1u << i;
        const std::size_t before = order.size();
        order.insert(order.end(), pick.begin(), pick.end());
        rec(b + 1, mask);
        order.resize(before);
        return;
      }
      for (int i = start; i < k; ++i)
        if (!(used >> i & 1u)) {
          pick.push_back(i);
          choose(i + 1);
          pick.pop_back();
        }
    };
    choose(0);
  };
  rec(0, 0u);
}

/// Σ(w) on the fields with indices `sel` of a prepared loop.
double sigma_prepared(const Prepared& P, const FormWord& w, const std::vector<int>& sel) {
  const std::vector<int> deg = w.degrees();
  for (std::size_t i = 1; i < deg.size(); ++i)
    if (deg[i] == 0) return 0.0;
  if (static_cast<int>(sel.size()) != word_degree(w))
    throw DegreeMismatch("sigma: " + std::to_string(sel.size()) + " fields for a word of degree " +
                         std::to_string(word_degree(w)));
  const int N = P.N;
  const std::size_t L = w.size();
  std::vector<int> sizes(L);
  sizes[0] = deg[0];
  for (std::size_t i = 1; i < L; ++i) sizes[i] = deg[i] - 1;

  // frozen coefficients per slot and point
  std::vector<std::vector<DifferentialForm::Frozen>> fmid(1), fg0(L), fg1(L);
  fmid[0].resize(N);
  for (int j = 0; j < N; ++j) fmid[0][j] = w.slots[0].freeze(P.mid[j]);
  for (std::size_t i = 1; i < L; ++i) {
    fg0[i].resize(N);
    fg1[i].resize(N);
    for (int j = 0; j < N; ++j) {
      fg0[i][j] = w.slots[i].freeze(P.gp[0][j]);
      fg1[i][j] = w.slots[i].freeze(P.gp[1][j]);
    }
  }

  double total = 0.0;
  for_each_assignment(sizes, static_cast<int>(sel.size()), [&](const std::vector<std::vector<int>>& blocks, int sign) {
    std::vector<double> a(N);
    std::vector<Ambient> vec(kMaxAmbientDim);
    for (int j = 0; j < N; ++j) {
      for (std::size_t q = 0; q < blocks[0].size(); ++q) vec[q] = P.fmid[sel[blocks[0][q]]][j];
      a[j] = fmid[0][j].apply(vec.data());
    }
    std::vector<std::vector<double>> inc(L - 1, std::vector<double>(N));
    for (std::size_t i = 1; i < L; ++i)
      for (int j = 0; j < N; ++j) {
        double acc = 0.0;
        for (int q = 0; q < 2; ++q) {
          vec[0] = P.gv[q][j];
          for (std::size_t b = 0; b < blocks[i].size(); ++b) vec[b + 1] = P.fg[q][sel[blocks[i][b]]][j];
          acc += 0.5 * (q == 0 ? fg0[i][j] : fg1[i][j]).apply(vec.data());
        }
        inc[i - 1][j] = acc;
      }
    total += sign * window_sum(a, inc);
  });
  return total;
}

}  // namespace

// ------------------------------------------------------------ line integrals

double line_integral(const Manifold& m, const DifferentialForm& w, const PolygonalLoop& p, double a, double b) {
  if (w.degree() != 1) throw DegreeError("line_integral: expects a 1-form");
  const int N = p.knots();
  double acc = 0.0;
  double s = a;
  while (s < b - 1e-15) {
    const double seg = std::floor(s * N + 1e-12);
    const double end = std::min(b, (seg + 1) / N);
    const long j = static_cast<long>(seg);
    const long jj = ((j % N) + N) % N;
    const double t0 = s * N - seg, t1 = end * N - seg;
    const double c = 0.5 * (t0 + t1), h = (t1 - t0);
    for (double off : {-kGaussOffset, kGaussOffset}) {
      auto [pt, vel] = m.geodesic(p.knot(jj), p.chord(jj), c + off * h);
      acc += 0.5 * h * w.eval(pt, {vel});
    }
    s = end;
  }
  return acc;
}

double iterated_integral(const Manifold& m, const std::vector<DifferentialForm>& ws, const PolygonalLoop& p,
                         double t) {
  for (const auto& w : ws)
    if (w.degree() != 1) throw DegreeError("iterated_integral: expects 1-forms");
  if (ws.empty()) return 1.0;
  const int N = p.knots();
  const int k = static_cast<int>(ws.size());
  Mat A = Mat::Identity(k + 1, k + 1);
  std::vector<double> c(k);
  auto piece = [&](long j, double t0, double t1) {
    const double mid = 0.5 * (t0 + t1), h = t1 - t0;
    std::fill(c.begin(), c.end(), 0.0);
    for (double off : {-kGaussOffset, kGaussOffset}) {
      auto [pt, vel] = m.geodesic(p.knot(j), p.chord(j), mid + off * h);
      for (int i = 0; i < k; ++i) c[i] += 0.5 * h * ws[i].eval(pt, {vel});
    }
    A = A * unipotent_exp(c);
  };
  const double pos = t * N;
  const long full = static_cast<long>(std::floor(pos + 1e-12));
  for (long j = 0; j < std::min<long>(full, N); ++j) piece(j, 0.0, 1.0);
  const double frac = pos - full;
  if (full < N && frac > 1e-12) piece(full, 0.0, frac);
  return A(0, k);
}

// ------------------------------------------------------------ Σ

double sigma_eval(const Manifold& m, const FormWord& w, const Loop& g, const std::vector<LoopField>& fields,
                  const SigmaSettings& s) {
  const Prepared P = prepare(m, g, fields, s.knots);
  std::vector<int> sel(fields.size());
  std::iota(sel.begin(), sel.end(), 0);
  return sigma_prepared(P, w, sel);
}

UForm sigma_all(const Manifold& m, const Chain& c, const Loop& g, const std::vector<LoopField>& basis,
                const SigmaSettings& s) {
  const int D = static_cast<int>(basis.size());
  UForm out(D);
  if (c.empty()) return out;
  const Prepared P = prepare(m, g, basis, s.knots);
  for (const auto& [coeff, w] : c.terms()) {
    const int k = word_degree(w);
    if (k < 0 || k > D) continue;
    for (unsigned mask = 0; mask < (1u << D); ++mask) {
      if (popcount(mask) != k) continue;
      std::vector<int> sel;
      for (int i = 0; i < D; ++i)
        if (mask >> i & 1u) sel.push_back(i);
      out[mask] += coeff * sigma_prepared(P, w, sel);
    }
  }
  return out;
}

// ------------------------------------------------------------ pullbacks

double pullback_sigma(const Manifold& m, const FormWord& w, const PlotSpec& p, const Eigen::VectorXd& u,
                      const std::vector<int>& dirs, const Loop& g, const SigmaSettings& s) {
  const Loop img = apply_plot(m, p, u, g);
  std::vector<LoopField> fields;
  for (int j : dirs) fields.push_back(plot_derivative(m, p, u, j, g));
  return sigma_eval(m, w, img, fields, s);
}

McValue pullback_sigma_mc(const Manifold& m, const FormWord& w, const PlotSpec& p, const Eigen::VectorXd& u,
                          const std::vector<int>& dirs, int n, int replicas, std::uint64_t seed,
                          const SigmaSettings& s) {
  std::vector<double> v(replicas);
  for (int i = 0; i < replicas; ++i) {
    auto rng = make_rng(replica_seed(seed, static_cast<std::uint64_t>(i)));
    v[i] = pullback_sigma(m, w, p, u, dirs, sample_loop(m, n, rng), s);
  }
  return {mean(v), standard_error(v), replicas};
}

namespace {

double fd_step(const PlotSpec& p) {
  double width = 1e300;
  for (int j = 0; j < p.m; ++j) width = std::min(width, p.box[j].second - p.box[j].first);
  return p.fd_scale * width;
}

/// Copy a UForm into a larger exterior algebra (same low bits).
UForm embed(const UForm& a, int dim) {
  UForm out(dim);
  for (unsigned mask = 0; mask < a.size(); ++mask) out[mask] = a[mask];
  return out;
}

int max_word_degree(const Chain& c) {
  int k = -1;
  for (const auto& t : c.terms()) k = std::max(k, word_degree(t.second));
  return k;
}

}  // namespace

PulledForm pulled_sigma(const Manifold& m, const Chain& c, const PlotSpec& p, const Loop& g, const SigmaSettings& s) {
  return [&m, c, p, g, s](const Eigen::VectorXd& u) {
    const Loop img = apply_plot(m, p, u, g);
    std::vector<LoopField> basis;
    for (int j = 0; j < p.m; ++j) basis.push_back(plot_derivative(m, p, u, j, g));
    basis.push_back(loop_velocity(m, img));
    return sigma_all(m, c, img, basis, s);
  };
}

PulledForm pulled_d(const PulledForm& f, const PlotSpec& p) {
  const int dim = p.m;
  const double h = fd_step(p);
  return [f, dim, h](const Eigen::VectorXd& u) {
    UForm r = fd_exterior_derivative(f, u, dim, h);
    return r.size() ? r : UForm(dim + 1);
  };
}

PulledForm interior_killing(const PulledForm& f, const PlotSpec& p) {
  const int t = p.m;
  return [f, t](const Eigen::VectorXd& u) { return interior(t, f(u)); };
}

PulledForm equivariant_d(const PulledForm& f, const PlotSpec& p) {
  return pulled_d(f, p) + interior_killing(f, p);
}

PulledForm wedge(const PulledForm& a, const PulledForm& b) {
  return [a, b](const Eigen::VectorXd& u) { return wedge(a(u), b(u)); };
}

PulledForm operator+(const PulledForm& a, const PulledForm& b) {
  return [a, b](const Eigen::VectorXd& u) { return a(u) + b(u); };
}

double chain_map_residual(const Manifold& m, const Chain& w, const PlotSpec& p, const Eigen::VectorXd& u,
                          const Loop& g, const SigmaSettings& s) {
  const UForm lhs = equivariant_d(pulled_sigma(m, w, p, g, s), p)(u).without(p.m);
  const UForm rhs = pulled_sigma(m, cyclic_d(w), p, g, s)(u).without(p.m);
  return (lhs - rhs).max_abs();
}

// ------------------------------------------------------------ Cartan formula

CartanTerms cartan_terms(const Manifold& m, const Chain& w, const PlotSpec& p, const Eigen::VectorXd& u,
                         const Loop& g, const CartanSettings& cs, const SigmaSettings& s) {
  const PlotSpec pa = augmented_plot(p);
  const int M = p.m, r_idx = M, t_idx = M + 1, D = M + 2;
  const Chain dw = cyclic_d(w);
  const QuadratureRule rule = composite_simpson(cs.simpson_nodes, 0.0, 1.0);

  auto at_r = [&](const Eigen::VectorXd& uu, double r, bool with_dw, UForm* A, UForm* B) {
    Eigen::VectorXd ur(M + 1);
    ur << uu, r;
    const Loop img = apply_plot(m, pa, ur, g);
    std::vector<LoopField> basis;
    for (int j = 0; j <= M; ++j) basis.push_back(plot_derivative(m, pa, ur, j, g));
    basis.push_back(loop_velocity(m, img));
    if (A) *A = sigma_all(m, w, img, basis, s);
    if (B && with_dw) *B = sigma_all(m, dw, img, basis, s);
  };

  CartanTerms out;
  out.sigma = embed(pulled_sigma(m, w, p, g, s)(u).without(M), D);

  {
    Eigen::VectorXd ur(M + 1);
    ur << u, 0.0;
    const Loop img = apply_plot(m, pa, ur, g);
    std::vector<LoopField> basis;
    for (int j = 0; j < M; ++j) basis.push_back(plot_derivative(m, pa, ur, j, g));
    out.h0 = embed(sigma_all(m, w, img, basis, s), D);
  }

  out.equivariant = UForm(D);
  out.double_interior = UForm(D);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    UForm A, B;
    at_r(u, rule.nodes[q], true, &A, &B);
    out.equivariant += rule.weights[q] * interior(r_idx, B).without(t_idx);
    out.double_interior += rule.weights[q] * interior(r_idx, interior(t_idx, A));
  }

  out.dG = UForm(D);
  if (max_word_degree(w) >= 1) {
    auto G = [&](const Eigen::VectorXd& uu) {
      UForm acc(D);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        UForm A;
        at_r(uu, rule.nodes[q], false, &A, nullptr);
        acc += rule.weights[q] * interior(r_idx, A).without(t_idx);
      }
      return acc;
    };
    out.dG = fd_exterior_derivative(G, u, M, fd_step(p));
  }
  return out;
}

double cartan_residual(const Manifold& m, const Chain& w, const PlotSpec& p, const Eigen::VectorXd& u,
                       const Loop& g, const CartanSettings& cs, const SigmaSettings& s) {
  return cartan_terms(m, w, p, u, g, cs, s).residual().max_abs();
}

// ------------------------------------------------------------ convolution scheme

namespace {

/// Nested iterated integral of ambient 1-forms along the path with grid
/// values Z and increments dZ (dZ_j from Z_j to Z_{j+1}), symmetric rule.
/// Returns the final level as a function of the grid index.
std::vector<double> nested_levels(const std::vector<DifferentialForm>& ws, const std::vector<Ambient>& Z,
                                  const std::vector<Ambient>& dZ, long steps) {
  std::vector<double> prev(steps + 1, 1.0), cur(steps + 1);
  for (const auto& w : ws) {
    cur[0] = 0.0;
    for (long j = 0; j < steps; ++j) {
      const Ambient mid = Z[j] + 0.5 * dZ[j];
      cur[j + 1] = cur[j] + 0.5 * (prev[j] + prev[j + 1]) * w.eval(mid, {dZ[j]});
    }
    std::swap(prev, cur);
  }
  return prev;
}

double convolution_value(const std::vector<DifferentialForm>& ws, const std::vector<Ambient>& Y,
                         const std::vector<double>& wts, double t) {
  const long n = static_cast<long>(Y.size());
  const long half = static_cast<long>(wts.size() / 2);
  auto at = [&](long j) -> const Ambient& { return Y[static_cast<std::size_t>(((j % n) + n) % n)]; };
  const long steps = std::lround(t * n);
  std::vector<Ambient> Z(steps + 1), dZ(steps);
  for (long j = 0; j <= steps; ++j) {
    Ambient acc = Ambient::Zero(Y[0].size());
    for (long i = -half; i <= half; ++i) acc += wts[i + half] * at(j - i);
    Z[j] = acc;
  }
  // windowed increment average of the raw path
  for (long j = 0; j < steps; ++j) {
    Ambient acc = Ambient::Zero(Y[0].size());
    for (long i = -half; i <= half; ++i) acc += wts[i + half] * (at(j + 1 - i) - at(j - i));
    dZ[j] = acc;
  }
  return nested_levels(ws, Z, dZ, steps).back();
}

}  // namespace

ConvolutionIterated convolution_iterated(const std::vector<DifferentialForm>& ws, const std::vector<Ambient>& Y,
                                         int N, int k, double t) {
  for (const auto& w : ws)
    if (w.degree() != 1) throw DegreeError("convolution_iterated: expects 1-forms");
  const long n = static_cast<long>(Y.size());
  const KernelWeights split = convolution_weight_split(static_cast<int>(n), N, k);
  std::vector<double> full(split.plateau.size());
  for (std::size_t i = 0; i < full.size(); ++i) full[i] = split.plateau[i] + split.transition[i];
  ConvolutionIterated out;
  out.value = convolution_value(ws, Y, full, t);
  out.tail = out.value - convolution_value(ws, Y, split.plateau, t);
  return out;
}

double symmetrized_pairing(const DifferentialForm& w, const std::vector<Ambient>& Y, int N, int k) {
  const long n = static_cast<long>(Y.size());
  const std::vector<double> wts = convolution_weights(static_cast<int>(n), N, k);
  const long half = static_cast<long>(wts.size() / 2);
  auto at = [&](long j) -> const Ambient& { return Y[static_cast<std::size_t>(((j % n) + n) % n)]; };
  std::vector<Ambient> Z(n + 1);
  for (long j = 0; j <= n; ++j) {
    Ambient acc = Ambient::Zero(Y[0].size());
    for (long i = -half; i <= half; ++i) acc += wts[i + half] * at(j - i);
    Z[j] = acc;
  }
  // H_j = coefficient vector of ω at the midpoint of step j of Yᴺ
  const int d = static_cast<int>(Y[0].size());
  std::vector<Ambient> H(n, Ambient::Zero(d));
  for (long j = 0; j < n; ++j) {
    const Ambient mid = 0.5 * (Z[j] + Z[j + 1]);
    for (int a = 0; a < d; ++a) H[j][a] = w.eval(mid, {Ambient::Unit(d, a)});
  }
  std::vector<double> terms(n);
  for (long l = 0; l < n; ++l) {
    Ambient sym = wts[half] * H[l];
    for (long i = 1; i <= half; ++i) sym += wts[half + i] * (H[(l + i) % n] + H[((l - i) % n + n) % n]);
    terms[l] = sym.dot(at(l + 1) - at(l));
  }
  return pairwise_sum(terms);
}

// ------------------------------------------------------------ convergence study

std::vector<ConvergenceRow> convergence_study(const Manifold& m, const ConvergenceSpec& spec, std::uint64_t seed,
                                              int* rejected) {
  for (std::size_t i = 0; i < spec.Ns.size(); ++i) {
    if (spec.n % spec.Ns[i] != 0) throw ConfigError("convergence: N must divide the grid size");
    if (i && spec.Ns[i] <= spec.Ns[i - 1]) throw ConfigError("convergence: N list must increase");
  }
  if (spec.n % spec.poly_reference || spec.n % spec.conv_reference)
    throw ConfigError("convergence: reference N must divide the grid size");
  const DifferentialForm f = form_catalog(m, spec.function);
  const DifferentialForm w1 = form_catalog(m, spec.form1);
  const DifferentialForm w2 = form_catalog(m, spec.form2);
  const FormWord word({f, w1});
  const std::vector<DifferentialForm> iter{w1, w2};
  if (spec.u.size() != spec.fields.size()) throw ConfigError("convergence: need one u entry per field");
  std::vector<NamedField> fields;
  for (const auto& name : spec.fields) fields.push_back(field_catalog(m, name));
  const PlotSpec plot = exp_deform_plot(fields);
  const double h = spec.fd_step;
  const std::size_t K = spec.Ns.size();
  constexpr int Q = 8;
  const char* names[Q] = {"sigma_poly", "sigma_conv", "dsigma_poly", "dsigma_conv",
                          "d2sigma_poly", "d2sigma_conv", "iter_poly", "iter_conv"};
  // values[q][replica][level], level K is the reference
  std::vector<std::vector<std::vector<double>>> values(Q, std::vector<std::vector<double>>(
                                                              spec.replicas, std::vector<double>(K + 1)));
  constexpr int kMaxRedraws = 1000;
  std::vector<int> redraws(spec.replicas, 0);
  parallel_for(spec.replicas, spec.threads, [&](int r) {
    // Condition on the piece Ωᴺ of the smallest N (knots within the
    // injectivity radius), redrawing with the next stream of this replica.
    Loop g;
    std::array<Loop, 5> G;
    for (std::uint64_t attempt = 0;; ++attempt) {
      auto rng = make_rng(replica_seed(seed, static_cast<std::uint64_t>(r), attempt));
      g = sample_loop(m, spec.n, rng);
      bool ok = in_omega_N(m, g, spec.Ns.front(), m.injectivity_radius());
      for (int o = 0; ok && o < 5; ++o) {
        Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(spec.u.data(), static_cast<long>(spec.u.size()));
        u[0] += (o - 2) * h;
        G[o] = apply_plot(m, plot, u, g);
        ok = in_omega_N(m, G[o], spec.Ns.front(), m.injectivity_radius());
      }
      if (ok) break;
      if (++redraws[r] >= kMaxRedraws) throw ConvergenceError("convergence_study: loops almost never satisfy the modulus condition; raise the smallest N");
    }
    const std::vector<Ambient>& Y = g.points;
    for (std::size_t lvl = 0; lvl <= K; ++lvl) {
      const int Np = lvl < K ? spec.Ns[lvl] : spec.poly_reference;
      const int Nc = lvl < K ? spec.Ns[lvl] : spec.conv_reference;
      std::array<double, 5> sp, sc;
      for (int o = 0; o < 5; ++o) {
        sp[o] = sigma_eval(m, word, G[o], {}, {Np});
        sc[o] = sigma_eval(m, word, convolve(m, G[o], Nc, spec.kernel_k).projected, {});
      }
      auto d1 = [&](const std::array<double, 5>& s) { return (s[0] - 8.0 * s[1] + 8.0 * s[3] - s[4]) / (12.0 * h); };
      auto d2 = [&](const std::array<double, 5>& s) {
        return (-s[0] + 16.0 * s[1] - 30.0 * s[2] + 16.0 * s[3] - s[4]) / (12.0 * h * h);
      };
      values[0][r][lvl] = sp[2];
      values[1][r][lvl] = sc[2];
      values[2][r][lvl] = d1(sp);
      values[3][r][lvl] = d1(sc);
      values[4][r][lvl] = d2(sp);
      values[5][r][lvl] = d2(sc);
      values[6][r][lvl] = iterated_integral(m, iter, polygonal(m, g, Np), 1.0);
      values[7][r][lvl] = convolution_iterated(iter, Y, Nc, spec.kernel_k).value;
    }
  });
  if (rejected) *rejected = std::accumulate(redraws.begin(), redraws.end(), 0);
  std::vector<ConvergenceRow> rows;
  for (int q = 0; q < Q; ++q)
    for (std::size_t lvl = 0; lvl <= K; ++lvl) {
      std::vector<double> v(spec.replicas), gap2(spec.replicas), gap(spec.replicas);
      for (int r = 0; r < spec.replicas; ++r) {
        v[r] = values[q][r][lvl];
        const double e = v[r] - values[q][r][K];
        gap2[r] = e * e;
        gap[r] = std::abs(e);
      }
      ConvergenceRow row;
      row.quantity = names[q];
      row.N = lvl < K ? spec.Ns[lvl] : (q % 2 == 0 ? spec.poly_reference : spec.conv_reference);
      row.replicas = spec.replicas;
      row.mean = mean(v);
      row.stderr_ = spec.replicas > 1 ? standard_error(v) : 0.0;
      row.l2_gap = std::sqrt(mean(gap2));
      row.median_gap = median(gap);
      rows.push_back(row);
    }
  return rows;
}

}  // namespace eqloop
