#include "eqloop/loopmeasure.hpp"
#include "eqloop/quadrature.hpp"

#include <cmath>

#include "eqloop/errors.hpp"

namespace eqloop {

double sphere_short_time_kernel(double t, double theta) {
  const double ratio = theta < 1e-8 ? 1.0 : theta / std::sin(theta);
  return std::sqrt(ratio) * std::exp(-theta * theta / (2.0 * t)) / (kTwoPi * t);
}

Ambient sample_basepoint(const Manifold& m, std::mt19937_64& rng, int* trials) {
  const Ambient ref = m.random_point(rng);
  const double bound = m.heat_kernel(1.0, ref, ref) * (1.0 + 1e-9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int count = 1;; ++count) {
    const Ambient x = m.random_point(rng);
    if (u(rng) * bound <= m.heat_kernel(1.0, x, x)) {
      if (trials) *trials = count;
      return x;
    }
  }
}

namespace {

Loop torus_bridge(const Torus& t, const Ambient& x, int n, std::mt19937_64& rng, double T) {
  const Eigen::Vector2d th0 = t.coordinates(x);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Vector2d winding;
  // k ∈ ℤ with weight ∝ exp(−k²/(2T)), truncated where the weight is negligible
  const int kmax = 8 + static_cast<int>(std::ceil(10.0 * std::sqrt(T)));
  for (int c = 0; c < 2; ++c) {
    std::vector<double> w;
    double total = 0.0;
    for (int k = -kmax; k <= kmax; ++k) {
      w.push_back(std::exp(-k * k / (2.0 * T)));
      total += w.back();
    }
    double r = u(rng) * total;
    int k = -kmax;
    for (std::size_t i = 0; i < w.size(); ++i, ++k) {
      if (r < w[i]) break;
      r -= w[i];
    }
    winding[c] = std::min(k, kmax);
  }
  // free Brownian paths, then pinned: B_s = W_s − s W_1 + s k
  std::vector<Eigen::Vector2d> walk(n + 1, Eigen::Vector2d::Zero());
  const double sd = std::sqrt(T / n);
  for (int j = 1; j <= n; ++j) {
    const double a = g(rng), b = g(rng);
    walk[j] = walk[j - 1] + sd * Eigen::Vector2d(a, b);
  }
  Loop out;
  out.points.reserve(n);
  out.points.push_back(x);
  for (int j = 1; j < n; ++j) {
    const double s = static_cast<double>(j) / n;
    const Eigen::Vector2d th = th0 + walk[j] - s * walk[n] + s * winding;
    out.points.push_back(t.from_coordinates(th));
  }
  return out;
}

Loop sphere_bridge(const Sphere& sp, const Ambient& x, int n, std::mt19937_64& rng,
                   const BridgeOptions& opt, double* acceptance) {
  const double dt = opt.duration / n;
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto kernel = [&](double t, const Ambient& a, const Ambient& b) {
    if (t >= opt.spectral_threshold) return sp.heat_kernel(t, a, b);
    return sphere_short_time_kernel(t, sp.geodesic_distance(a, b));
  };
  Loop out;
  out.points.reserve(n);
  out.points.push_back(x);
  Ambient y = x;
  long accepted = 0, attempted = 0;
  for (int j = 1; j < n; ++j) {
    const double remaining = opt.duration - (j - 1) * dt;  // time left before returning to x
    Ambient drift = Ambient::Zero(3);
    try {
      drift = (dt / remaining) * sp.log_map(y, x);
    } catch (const CutLocusError&) {
    }
    auto [e1, e2] = sp.tangent_frame(y);
    const double sd = std::sqrt(dt);
    auto propose = [&]() {
      const Ambient v = drift + sd * (g(rng) * e1 + g(rng) * e2);
      return sp.exp_map(y, v);
    };
    auto log_weight = [&](const Ambient& z) {
      Ambient l;
      try {
        l = sp.log_map(y, z);
      } catch (const CutLocusError&) {
        return -1e300;
      }
      const double r = l.norm();
      const double jac = r < 1e-8 ? 1.0 : std::sin(r) / r;
      const double q = std::exp(-(l - drift).squaredNorm() / (2.0 * dt)) / (kTwoPi * dt) / jac;
      const double target = sphere_short_time_kernel(dt, r) * kernel(remaining - dt, z, x);
      if (!(q > 0.0) || !(target > 0.0)) return -1e300;
      return std::log(target) - std::log(q);
    };
    Ambient cur = propose();
    double lw = log_weight(cur);
    for (int it = 1; it < opt.mh_iterations; ++it) {
      const Ambient cand = propose();
      const double lc = log_weight(cand);
      ++attempted;
      if (std::log(u(rng)) < lc - lw) {
        cur = cand;
        lw = lc;
        ++accepted;
      }
    }
    out.points.push_back(cur);
    y = cur;
  }
  const double rate = attempted ? static_cast<double>(accepted) / attempted : 1.0;
  if (acceptance) *acceptance = rate;
  if (rate < opt.acceptance_floor)
    throw ConvergenceError("sample_bridge: Metropolis acceptance " + std::to_string(rate) + " below floor");
  return out;
}

}  // namespace

Loop sample_bridge(const Manifold& m, const Ambient& x, int n, std::mt19937_64& rng,
                   const BridgeOptions& opt, double* acceptance) {
  if (n < 8) throw std::invalid_argument("sample_bridge: grid size must be at least 8");
  if (m.kind() == ManifoldKind::Torus) {
    if (acceptance) *acceptance = 1.0;
    return torus_bridge(static_cast<const Torus&>(m), x, n, rng, opt.duration);
  }
  return sphere_bridge(static_cast<const Sphere&>(m), x, n, rng, opt, acceptance);
}

Loop sample_loop(const Manifold& m, int n, std::mt19937_64& rng, const BridgeOptions& opt) {
  const Ambient x = sample_basepoint(m, rng);
  return sample_bridge(m, x, n, rng, opt);
}

Loop rotate_index(const Loop& g, long shift) {
  Loop out;
  out.points.reserve(g.points.size());
  for (long j = 0; j < g.size(); ++j) out.points.push_back(g[j + shift]);
  return out;
}

Loop rotate_loop(const Manifold& m, double t, const Loop& g, bool* off_grid) {
  const double steps = t * g.size();
  const double whole = std::floor(steps);
  const double frac = steps - whole;
  const bool on_grid = frac < 1e-9 || frac > 1.0 - 1e-9;
  if (off_grid) *off_grid = !on_grid;
  if (on_grid) return rotate_index(g, static_cast<long>(std::llround(steps)));
  const long base = static_cast<long>(whole);
  Loop out;
  out.points.reserve(g.points.size());
  for (long j = 0; j < g.size(); ++j) {
    const Ambient& a = g[j + base];
    out.points.push_back(m.geodesic(a, m.log_map(a, g[j + base + 1]), frac).first);
  }
  return out;
}

// ------------------------------------------------------------ polygonal

PolygonalLoop::PolygonalLoop(const Manifold& m, const Loop& g, int N) : m_(&m) {
  if (N <= 0 || g.size() % N != 0) throw std::invalid_argument("polygonal: N must divide the grid size");
  const long stride = g.size() / N;
  for (int j = 0; j < N; ++j) knots_.push_back(g[j * stride]);
  for (int j = 0; j < N; ++j) chords_.push_back(m.log_map(knots_[j], knots_[(j + 1) % N]));
}

const Ambient& PolygonalLoop::knot(long j) const {
  const long n = knots();
  return knots_[static_cast<std::size_t>(((j % n) + n) % n)];
}

const Ambient& PolygonalLoop::chord(long j) const {
  const long n = knots();
  return chords_[static_cast<std::size_t>(((j % n) + n) % n)];
}

std::pair<Ambient, Ambient> PolygonalLoop::eval(double s) const {
  const int N = knots();
  double x = (s - std::floor(s)) * N;
  long j = static_cast<long>(std::floor(x));
  if (j >= N) j = N - 1;
  auto [p, v] = m_->geodesic(knot(j), chord(j), x - j);
  return {p, static_cast<double>(N) * v};
}

Loop PolygonalLoop::sample(int n) const {
  Loop out;
  out.points.reserve(n);
  for (int j = 0; j < n; ++j) out.points.push_back(eval(static_cast<double>(j) / n).first);
  return out;
}

PolygonalLoop polygonal(const Manifold& m, const Loop& g, int N) { return PolygonalLoop(m, g, N); }

// ---------------------------------------------------------- convolution

double PlateauKernel::unnormalized(double s) const {
  const double a = std::abs(s);
  const double outer = 1.0 / N;
  const double width = std::pow(static_cast<double>(N), -k);
  const double inner = outer - width;
  if (a <= inner) return 1.0;
  if (a >= outer) return 0.0;
  const double x = (a - inner) / width;  // smooth step from 1 to 0 on (0,1)
  const double p = std::exp(-1.0 / x), q = std::exp(-1.0 / (1.0 - x));
  return q / (p + q);
}

KernelWeights convolution_weight_split(int n, int N, int k) {
  if (n / N < 4 || n % N != 0) throw std::invalid_argument("convolve: need n/N >= 4 grid steps");
  const PlateauKernel kern{N, k};
  const double outer = 1.0 / N;
  const double inner = outer - std::pow(static_cast<double>(N), -k);
  const QuadratureRule gl = gauss_legendre(24, 0.0, 1.0);
  // ∫ of the unnormalized kernel over [lo, hi] ∩ (transition band inner < |s| < outer), s ≥ 0 side
  auto transition = [&](double lo, double hi) {
    lo = std::max(lo, inner);
    hi = std::min(hi, outer);
    if (hi <= lo) return 0.0;
    double acc = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q)
      acc += gl.weights[q] * kern.unnormalized(lo + (hi - lo) * gl.nodes[q]);
    return acc * (hi - lo);
  };
  const int half = n / N;
  KernelWeights out;
  out.plateau.assign(2 * half + 1, 0.0);
  out.transition.assign(2 * half + 1, 0.0);
  double total = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double lo = (i - 0.5) / n, hi = (i + 0.5) / n;
    const double flat = std::max(0.0, std::min(hi, inner) - std::max(lo, -inner));
    const double tr = transition(lo, hi) + transition(-hi, -lo);
    out.plateau[i + half] = flat;
    out.transition[i + half] = tr;
    total += flat + tr;
  }
  for (int i = 0; i <= 2 * half; ++i) {
    out.plateau[i] /= total;
    out.transition[i] /= total;
  }
  return out;
}

std::vector<double> convolution_weights(int n, int N, int k) {
  const KernelWeights s = convolution_weight_split(n, N, k);
  std::vector<double> w(s.plateau.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = s.plateau[i] + s.transition[i];
  return w;
}

ConvolvedLoop convolve(const Manifold& m, const Loop& g, int N, int k) {
  const long n = g.size();
  const std::vector<double> w = convolution_weights(static_cast<int>(n), N, k);
  const long half = static_cast<long>(w.size() / 2);
  ConvolvedLoop out;
  out.N = N;
  out.k = k;
  out.ambient.reserve(n);
  out.projected.points.reserve(n);
  // column c of E is γ(c − half), so the window of output j is columns j..j+2·half
  const long width = 2 * half + 1;
  Eigen::MatrixXd E(m.ambient_dim(), n + 2 * half);
  for (long c = 0; c < n + 2 * half; ++c) E.col(c) = g[c - half];
  Eigen::VectorXd wr(width);
  for (long i = 0; i < width; ++i) wr[i] = w[static_cast<std::size_t>(width - 1 - i)];
  for (long j = 0; j < n; ++j) {
    const Ambient acc = E.middleCols(j, width) * wr;
    if (m.distance_to_manifold(acc) >= m.tube_radius())
      throw TubeError("convolve: averaged loop leaves the projection tube; reduce N");
    out.ambient.push_back(acc);
    out.projected.points.push_back(m.project(acc));
  }
  return out;
}

// ------------------------------------------------------------ predicates

double modulus(const Manifold& m, const Loop& g, long window) {
  const long n = g.size();
  double sup = 0.0;
  for (long i = 0; i < n; ++i)
    for (long k = 1; k < std::min(window, n); ++k) sup = std::max(sup, m.geodesic_distance(g[i], g[i + k]));
  return sup;
}

double loop_diameter(const Manifold& m, const Loop& g) {
  const long n = g.size();
  double sup = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) sup = std::max(sup, m.geodesic_distance(g[i], g[j]));
  return sup;
}

bool in_omega_N(const Manifold& m, const Loop& g, int N, double r) {
  // pairs exactly 1/N apart are included: the sup over the open window of a
  // continuous loop equals the sup over its closure
  const long window = (g.size() + N - 1) / N + 1;
  return modulus(m, g, window) < r;
}

bool in_T_eps(const Manifold& m, const Loop& g, double eps) { return loop_diameter(m, g) < eps; }
bool in_O_eps(const Manifold& m, const Loop& g, double eps) { return loop_diameter(m, g) > eps; }

double quadratic_variation(const Manifold& m, const Loop& g) {
  double s = 0.0;
  for (long j = 0; j < g.size(); ++j) {
    const double d = m.geodesic_distance(g[j], g[j + 1]);
    s += d * d;
  }
  return s;
}

}  // namespace eqloop
