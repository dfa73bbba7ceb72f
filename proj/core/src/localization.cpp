#include "eqloop/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eqloop/errors.hpp"
#include "eqloop/quadrature.hpp"

namespace eqloop {

namespace {

/// Sum independent of the order of the terms (sorted first), so functionals
/// built from it are exactly invariant under grid rotations.
double invariant_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return pairwise_sum(v);
}

int dyadic_check(long n, int N) {
  if (N < 1 || n % N != 0) throw std::invalid_argument("pairing: N must divide the loop grid");
  return static_cast<int>(n / N);
}

/// Σ over offsets o and grid points i of term(velocity of the offset-o
/// broken geodesic at grid time i + shift, i), shift ∈ {0, ½}.
template <class Term>
std::vector<double> polygon_terms(const Manifold& m, const Loop& g, int N, double shift, Term term) {
  const long n = g.size();
  const int step = dyadic_check(n, N);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * step);
  for (int o = 0; o < step; ++o)
    for (int j = 0; j < N; ++j) {
      const long base = o + static_cast<long>(j) * step;
      const Ambient& K = g[base];
      const Ambient chord = m.log_map(K, g[base + step]);
      for (int q = 0; q < step; ++q) {
        const double tau = (q + shift) / step;
        const Ambient vel = m.geodesic(K, chord, tau).second * static_cast<double>(N);
        out.push_back(term(vel, base + q));
      }
    }
  return out;
}

}  // namespace

// ------------------------------------------------------------ cutoff

double CutoffProfile::g(double h) const {
  if (h <= r1) return 1.0;
  if (h >= r2) return std::numeric_limits<double>::infinity();
  return 1.0 + smooth_step((h - r1) / (r2 - r1)) * std::pow(r2 - h, -k);
}

double CutoffProfile::f(double x) const {
  if (!(x < 2.0)) return 0.0;
  if (x <= 1.0) return 1.0;
  const double y = x - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

double cutoff_H(const Manifold& m, const Loop& g, const CutoffProfile& prof) {
  const long n = g.size();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n * n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const double d = m.geodesic_distance(g[i], g[j]);
      const double gv = prof.g(std::min(d * d, 1.0));
      if (std::isinf(gv)) return 1.0;
      vals.push_back(gv);
    }
  const double integral = invariant_sum(std::move(vals)) / (static_cast<double>(n) * n);
  return 1.0 - prof.f(integral);
}

// ------------------------------------------------------------ partition

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double p = std::exp(-1.0 / x), q = std::exp(-1.0 / (1.0 - x));
  return p / (p + q);
}

double energy_pairing(const Manifold& m, const Loop& g, int N) {
  const int step = dyadic_check(g.size(), N);
  auto terms = polygon_terms(m, g, N, 0.5, [&](const Ambient& vel, long i) {
    return vel.dot(m.log_map(g[i], g[i + 1]));
  });
  return invariant_sum(std::move(terms)) / step;
}

std::pair<double, double> band(double a, int k) {
  if (k < 0) throw std::invalid_argument("band: k >= 0");
  const double hi = k == 0 ? std::numeric_limits<double>::infinity() : a / (4.0 * k);
  return {a / (8.0 * (k + 1)), hi};
}

namespace {

// θ_k rises from 0 to 1 on [a/8(k+1)·2^{1/4}, a/8(k+1)·2^{3/4}] in log scale;
// that interval lies in the overlap of bands k and k+1.
double theta(double a, int k, double x) {
  if (x <= 0.0) return 0.0;
  const double lo = a / (8.0 * (k + 1)) * std::pow(2.0, 0.25);
  return smooth_step((std::log(x) - std::log(lo)) / (0.5 * std::log(2.0)));
}

}  // namespace

double band_weight(double a, int k, double x) {
  if (k == 0) return theta(a, 0, x);
  return theta(a, k, x) - theta(a, k - 1, x);
}

double gate(double a, double x) { return 1.0 - smooth_step(x / (0.5 * a)); }

std::vector<CoverIndex> PartitionState::active() const {
  std::vector<CoverIndex> out;
  for (const auto& [alpha, w] : weight) out.push_back(alpha);
  return out;
}

double PartitionState::sum() const {
  std::vector<double> v;
  for (const auto& [alpha, w] : weight) v.push_back(w);
  return pairwise_sum(v);
}

PartitionState partition(const Manifold& m, const Loop& g, const PartitionProfile& prof) {
  PartitionState st;
  std::map<CoverIndex, double> raw;
  double G = 1.0;
  for (int N = 1; N <= prof.n_max && G > 0.0; N *= 2) {
    double P = 0.0;
    try {
      P = energy_pairing(m, g, N);
    } catch (const CutLocusError&) {
      continue;  // γᴺ undefined: knots too far apart for a broken geodesic
    }
    st.pairing[N] = P;
    if (P > 0.0) {
      for (int k = 0;; ++k) {
        const double lo = band(prof.a, k).first;
        const double w = band_weight(prof.a, k, P);
        if (w > 0.0) raw[{N, k}] = G * w;
        if (P > 2.0 * lo) break;  // bands beyond k lie entirely below P
      }
    }
    G *= gate(prof.a, P);
  }
  std::vector<double> ws;
  for (const auto& [alpha, w] : raw) ws.push_back(w);
  st.xi = pairwise_sum(ws);
  if (!(st.xi > 0.0)) {
    std::ostringstream os;
    os << "partition: no cover index activates (pairings:";
    for (const auto& [N, P] : st.pairing) os << " P" << N << "=" << P;
    os << ")";
    throw EmptyCoverError(os.str());
  }
  for (const auto& [alpha, w] : raw)
    if (w > 0.0) st.weight[alpha] = w / st.xi;
  return st;
}

double partition_member(const Manifold& m, const CoverIndex& alpha, const Loop& g, const PartitionProfile& prof) {
  const PartitionState st = partition(m, g, prof);
  auto it = st.weight.find(alpha);
  return it == st.weight.end() ? 0.0 : it->second;
}

double partition_sum(const Manifold& m, const Loop& g, const PartitionProfile& prof) {
  return partition(m, g, prof).sum();
}

bool in_cover(const Manifold& m, const CoverIndex& alpha, const Loop& g, const PartitionProfile& prof) {
  const double P = energy_pairing(m, g, alpha.first);
  const auto [lo, hi] = band(prof.a, alpha.second);
  return P > lo && P <= hi;
}

// ------------------------------------------------------------ α and β

double alpha_on_field(const Manifold& m, int N1, const Loop& g, const LoopField& V) {
  const long n = g.size();
  const int step = dyadic_check(n, N1);
  auto terms = polygon_terms(m, g, N1, 0.0, [&](const Ambient& vel, long i) {
    return vel.dot(V[static_cast<std::size_t>(((i % n) + n) % n)]);
  });
  return invariant_sum(std::move(terms)) / (static_cast<double>(step) * n);
}

double alpha_pullback(const Manifold& m, int N1, const PlotSpec& p, const Eigen::VectorXd& u, int j, const Loop& g) {
  return alpha_on_field(m, N1, apply_plot(m, p, u, g), plot_derivative(m, p, u, j, g));
}

double ix_alpha(const Manifold& m, int N1, const Loop& g) { return energy_pairing(m, g, N1); }

PulledForm pulled_alpha(const Manifold& m, int N1, const PlotSpec& p, const Loop& g) {
  return [&m, N1, p, g](const Eigen::VectorXd& u) {
    const Loop img = apply_plot(m, p, u, g);
    UForm a(p.m + 1);
    for (int j = 0; j < p.m; ++j) a[1u << j] = alpha_on_field(m, N1, img, plot_derivative(m, p, u, j, g));
    a[1u << p.m] = alpha_on_field(m, N1, img, loop_velocity(m, img));
    return a;
  };
}

PulledForm pulled_beta(const Manifold& m, int N1, const PlotSpec& p, const Loop& g, double floor) {
  const PulledForm alpha = pulled_alpha(m, N1, p, g);
  const PulledForm dalpha = pulled_d(alpha, p);
  const int t = p.m;
  return [alpha, dalpha, t, floor](const Eigen::VectorXd& u) {
    const double f = alpha(u)[1u << t];
    if (!(std::abs(f) >= floor))
      throw SingularError("beta: i_X alpha = " + std::to_string(f) + " below the floor; loop left the cover");
    const UForm da = dalpha(u);
    UForm out = UForm::scalar(da.dim(), 1.0 / f);
    UForm power = UForm::scalar(da.dim(), 1.0);
    for (int j = 1;; ++j) {
      power = wedge(power, da);
      if (power.max_abs() == 0.0) break;
      out += (((j % 2) ? -1.0 : 1.0) / std::pow(f, j + 1)) * power;
    }
    return out;
  };
}

double beta_pullback(const Manifold& m, int N1, const PlotSpec& p, const Eigen::VectorXd& u,
                     const std::vector<int>& dirs, const Loop& g) {
  std::vector<int> d = dirs;
  int sign = 1;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (d[i] == d[j]) return 0.0;
      if (d[i] > d[j]) {
        std::swap(d[i], d[j]);
        sign = -sign;
      }
    }
  unsigned mask = 0;
  for (int j : d) mask |= 1u << j;
  return sign * pulled_beta(m, N1, p, g)(u)[mask];
}

double homotopy_residual(const PulledForm& sigma, const Manifold& m, int N1, const PlotSpec& p,
                         const Eigen::VectorXd& u, const Loop& g, double closed_tol) {
  const int t = p.m;
  const double closed = equivariant_d(sigma, p)(u).without(t).max_abs();
  if (closed > closed_tol)
    throw NotClosedError("homotopy: (d + i_X) sigma = " + std::to_string(closed) + " exceeds tolerance");
  const PulledForm prod = wedge(wedge(pulled_alpha(m, N1, p, g), pulled_beta(m, N1, p, g)), sigma);
  const UForm lhs = sigma(u).without(t);
  const UForm rhs = equivariant_d(prod, p)(u).without(t);
  return (lhs - rhs).max_abs();
}

// ------------------------------------------------------------ Čech

std::string format_index_set(const IndexSet& I) {
  if (I.empty()) return "()";
  std::string s;
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (i) s += "+";
    s += std::to_string(I[i].first) + "." + std::to_string(I[i].second);
  }
  return s;
}

IndexSet parse_index_set(const std::string& s) {
  IndexSet out;
  if (s.empty() || s == "()") return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, '+')) {
    const auto dot = item.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == item.size())
      throw ConfigError("index set: expected N.k, got '" + item + "'");
    std::size_t used = 0;
    int N = 0, k = 0;
    try {
      N = std::stoi(item.substr(0, dot), &used);
      if (used != dot) throw std::invalid_argument("");
      k = std::stoi(item.substr(dot + 1), &used);
      if (used != item.size() - dot - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("index set: expected integers in '" + item + "'");
    }
    if (N < 1 || k < 0) throw ConfigError("index set: need N >= 1, k >= 0 in '" + item + "'");
    if (!out.empty() && !(out.back() < CoverIndex{N, k}))
      throw ConfigError("index set: indices must be strictly increasing in '" + s + "'");
    out.push_back({N, k});
  }
  return out;
}

std::vector<IndexSet> index_sets(const std::vector<CoverIndex>& universe, int size) {
  std::vector<CoverIndex> u = universe;
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<IndexSet> out;
  IndexSet cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (static_cast<int>(cur.size()) == size) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < u.size(); ++i) {
      cur.push_back(u[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  if (size >= 0) rec(0);
  return out;
}

namespace {

IndexSet remove_at(const IndexSet& I, std::size_t j) {
  IndexSet r = I;
  r.erase(r.begin() + static_cast<long>(j));
  return r;
}

}  // namespace

FormalCochain formal_delta(const FormalCochain& c, const std::vector<CoverIndex>& universe, int size) {
  FormalCochain out;
  for (const IndexSet& I : index_sets(universe, size)) {
    Formal acc;
    for (std::size_t j = 0; j < I.size(); ++j) {
      auto it = c.find(remove_at(I, j));
      if (it == c.end()) continue;
      const long sign = (j % 2) ? -1 : 1;
      for (const auto& [key, coeff] : it->second) acc[key] += sign * coeff;
    }
    for (auto it = acc.begin(); it != acc.end();) it = it->second == 0 ? acc.erase(it) : std::next(it);
    out[I] = acc;
  }
  return out;
}

namespace {

int cochain_dim(const NumericCochain& c) { return c.empty() ? 0 : c.begin()->second.dim(); }

}  // namespace

UForm cech_delta(const NumericCochain& c, const IndexSet& I) {
  UForm acc(cochain_dim(c));
  for (std::size_t j = 0; j < I.size(); ++j) {
    auto it = c.find(remove_at(I, j));
    if (it == c.end()) continue;
    if (j % 2) acc -= it->second;
    else acc += it->second;
  }
  return acc;
}

UForm cech_contract(const NumericCochain& c, const std::map<CoverIndex, double>& rho, const IndexSet& I) {
  if (rho.empty()) throw CoverError("contract: the loop lies in no cover set");
  UForm acc(cochain_dim(c));
  for (const auto& [alpha, r] : rho) {
    if (std::find(I.begin(), I.end(), alpha) != I.end()) continue;
    IndexSet J = I;
    const auto pos = std::lower_bound(J.begin(), J.end(), alpha);
    const long at = pos - J.begin();
    J.insert(pos, alpha);
    auto it = c.find(J);
    if (it == c.end()) continue;
    acc += ((at % 2) ? -r : r) * it->second;
  }
  return acc;
}

NumericCochain cech_contract(const NumericCochain& c, const std::map<CoverIndex, double>& rho,
                             const std::vector<IndexSet>& sets) {
  NumericCochain out;
  for (const auto& I : sets) out[I] = cech_contract(c, rho, I);
  return out;
}

}  // namespace eqloop
