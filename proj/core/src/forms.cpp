#include "eqloop/forms.hpp"

#include <bit>
#include <cmath>

#include "eqloop/errors.hpp"
#include "eqloop/quadrature.hpp"

namespace eqloop {

int popcount(unsigned mask) { return std::popcount(mask); }

int merge_sign(unsigned a, unsigned b) {
  int inversions = 0;
  for (unsigned rest = a; rest; rest &= rest - 1) {
    const unsigned bit = rest & (~rest + 1);
    inversions += std::popcount(b & (bit - 1));
  }
  return (inversions & 1) ? -1 : 1;
}

namespace {

int mask_indices(unsigned mask, int* idx) {
  int k = 0;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) idx[k++] = i;
  return k;
}

// det of the k×k minor [v_c[idx_r]]
double minor_det(const int* idx, int k, const Ambient* v) {
  switch (k) {
    case 0: return 1.0;
    case 1: return v[0][idx[0]];
    case 2: return v[0][idx[0]] * v[1][idx[1]] - v[1][idx[0]] * v[0][idx[1]];
    case 3: {
      auto m = [&](int r, int c) { return v[c][idx[r]]; };
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    }
    default: {
      Eigen::Matrix4d m;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = v[c][idx[r]];
      return m.determinant();
    }
  }
}

}  // namespace

DifferentialForm::DifferentialForm(int ambient_dim, int degree) : dim_(ambient_dim), degree_(degree) {}

DifferentialForm DifferentialForm::scalar(int ambient_dim, const ScalarField& f) {
  DifferentialForm r(ambient_dim, 0);
  r.add_term(0u, f);
  return r;
}

DifferentialForm DifferentialForm::basis(int ambient_dim, int i) {
  DifferentialForm r(ambient_dim, 1);
  r.add_term(1u << i, ScalarField(1.0));
  return r;
}

bool DifferentialForm::is_zero() const { return terms_.empty(); }

void DifferentialForm::add_term(unsigned mask, const ScalarField& coeff) {
  if (coeff.is_zero()) return;
  auto it = terms_.find(mask);
  if (it == terms_.end()) {
    terms_.emplace(mask, coeff);
    return;
  }
  ScalarField s = it->second + coeff;
  if (s.is_zero())
    terms_.erase(it);
  else
    it->second = s;
}

ScalarField DifferentialForm::coefficient(unsigned mask) const {
  auto it = terms_.find(mask);
  return it == terms_.end() ? ScalarField(0.0) : it->second;
}

double DifferentialForm::Frozen::apply(const Ambient* v) const {
  int idx[4];
  double s = 0.0;
  for (const auto& [mask, a] : terms) {
    const int k = mask_indices(mask, idx);
    s += a * minor_det(idx, k, v);
  }
  return s;
}

double DifferentialForm::Frozen::apply(const std::vector<Ambient>& v) const {
  if (static_cast<int>(v.size()) != degree) throw DegreeMismatch("form evaluated on the wrong number of vectors");
  return apply(v.data());
}

DifferentialForm::Frozen DifferentialForm::freeze(const Ambient& x) const {
  Frozen f;
  f.degree = degree_;
  f.terms.reserve(terms_.size());
  for (const auto& [mask, a] : terms_) f.terms.emplace_back(mask, a(x));
  return f;
}

double DifferentialForm::eval(const Ambient& x, const std::vector<Ambient>& v) const {
  return freeze(x).apply(v);
}

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.is_zero() && a.degree_ != b.degree_) return b;
  if (b.is_zero() && a.degree_ != b.degree_) return a;
  if (a.degree_ != b.degree_) throw DegreeMismatch("sum of forms of different degree");
  DifferentialForm r = a;
  r.dim_ = std::max(a.dim_, b.dim_);
  for (const auto& [m, c] : b.terms_) r.add_term(m, c);
  return r;
}

DifferentialForm operator-(const DifferentialForm& a) {
  DifferentialForm r(a.dim_, a.degree_);
  for (const auto& [m, c] : a.terms_) r.add_term(m, -c);
  return r;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) { return a + (-b); }

DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a) {
  DifferentialForm r(a.dim_, a.degree_);
  for (const auto& [m, c] : a.terms_) r.add_term(m, f * c);
  return r;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  DifferentialForm r(std::max(a.ambient_dim(), b.ambient_dim()), a.degree() + b.degree());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      if (ma & mb) continue;
      const double s = merge_sign(ma, mb);
      r.add_term(ma | mb, ScalarField(s) * ca * cb);
    }
  return r;
}

DifferentialForm d(const DifferentialForm& a) {
  DifferentialForm r(a.ambient_dim(), a.degree() + 1);
  for (const auto& [m, c] : a.terms())
    for (int j = 0; j < a.ambient_dim(); ++j) {
      if (m & (1u << j)) continue;
      ScalarField dc = c.derivative(j);
      if (dc.is_zero()) continue;
      r.add_term(m | (1u << j), ScalarField(static_cast<double>(merge_sign(1u << j, m))) * dc);
    }
  return r;
}

DifferentialForm interior(const VectorField& x, const DifferentialForm& a) {
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
  DifferentialForm r(a.ambient_dim(), a.degree() - 1);
  int idx[4];
  for (const auto& [m, c] : a.terms()) {
    const int k = mask_indices(m, idx);
    for (int p = 0; p < k; ++p) {
      const double sign = (p % 2) ? -1.0 : 1.0;
      r.add_term(m & ~(1u << idx[p]), ScalarField(sign) * x[idx[p]] * c);
    }
  }
  return r;
}

VectorField killing_vector_field(const Manifold& m) {
  const int n = m.ambient_dim();
  VectorField x(n, ScalarField(0.0));
  x[0] = ScalarField(-kTwoPi) * ScalarField::coordinate(1);
  x[1] = ScalarField(kTwoPi) * ScalarField::coordinate(0);
  return x;
}

// --------------------------------------------------------- equivariant

EquivariantForm::EquivariantForm(std::vector<DifferentialForm> components) {
  for (auto& c : components) {
    dim_ = std::max(dim_, c.ambient_dim());
    bool merged = false;
    for (auto& e : components_)
      if (e.degree() == c.degree()) {
        e = e + c;
        merged = true;
      }
    if (!merged) components_.push_back(std::move(c));
  }
  std::erase_if(components_, [](const DifferentialForm& f) { return f.is_zero(); });
}

int EquivariantForm::parity() const {
  if (components_.empty()) return 0;
  const int p = components_.front().degree() % 2;
  for (const auto& c : components_)
    if (c.degree() % 2 != p) throw ParityError("equivariant form mixes even and odd degrees");
  return p;
}

DifferentialForm EquivariantForm::component(int degree) const {
  for (const auto& c : components_)
    if (c.degree() == degree) return c;
  return DifferentialForm(dim_, degree);
}

bool EquivariantForm::is_zero() const { return components_.empty(); }

EquivariantForm equivariant_d(const Manifold& m, const EquivariantForm& mu) {
  mu.parity();
  const VectorField x = killing_vector_field(m);
  std::vector<DifferentialForm> out;
  for (const auto& c : mu.components()) {
    out.push_back(d(c));
    if (c.degree() > 0) out.push_back(interior(x, c));
  }
  return EquivariantForm(std::move(out));
}

double max_abs_on_samples(const Manifold& m, const EquivariantForm& mu, int samples,
                          unsigned long long seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Ambient x = m.random_point(rng);
    auto [e1, e2] = m.tangent_frame(x);
    for (const auto& c : mu.components()) {
      double v = 0.0;
      if (c.degree() == 0)
        v = c.eval(x);
      else if (c.degree() == 1)
        v = std::max(std::abs(c.eval(x, {e1})), std::abs(c.eval(x, {e2})));
      else if (c.degree() == 2)
        v = c.eval(x, {e1, e2});
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

// --------------------------------------------------------- integration

double integrate_density(const Manifold& m,
                         const std::function<double(const Ambient&, const Ambient&, const Ambient&)>& f,
                         const IntegrationSettings& s) {
  std::vector<double> partial;
  if (m.kind() == ManifoldKind::Sphere) {
    const QuadratureRule gl = gauss_legendre(s.n_polar, -1.0, 1.0);
    const double dphi = kTwoPi / s.n_azimuth;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double c = gl.nodes[i], sn = std::sqrt(std::max(0.0, 1.0 - c * c));
      double row = 0.0;
      for (int j = 0; j < s.n_azimuth; ++j) {
        const double phi = j * dphi;
        const double cp = std::cos(phi), sp = std::sin(phi);
        Ambient x(3), et(3), ep(3);
        x << sn * cp, sn * sp, c;
        et << c * cp, c * sp, -sn;
        ep << -sp, cp, 0.0;
        row += f(x, et, ep);
      }
      partial.push_back(gl.weights[i] * row * dphi);
    }
  } else {
    const auto& t = static_cast<const Torus&>(m);
    const int n = s.n_torus;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) {
        const Ambient x = t.from_coordinates({static_cast<double>(i) / n, static_cast<double>(j) / n});
        row += f(x, Torus::e1(x), Torus::e2(x));
      }
      partial.push_back(row / (static_cast<double>(n) * n));
    }
  }
  return pairwise_sum(partial);
}

double integrate(const Manifold& m, const DifferentialForm& top, const IntegrationSettings& s) {
  if (top.degree() != m.intrinsic_dim()) throw DegreeError("integrate: form is not of top degree");
  return integrate_density(
      m, [&](const Ambient& x, const Ambient& a, const Ambient& b) { return top.eval(x, {a, b}); }, s);
}

double dh_integral(const Manifold& m, double lambda, const EquivariantForm& mu, ClosednessCheck check,
                   const IntegrationSettings& s) {
  if (check == ClosednessCheck::Enforce) {
    if (mu.parity() != 0) throw ParityError("dh_integral: form must be even");
    const double res = max_abs_on_samples(m, equivariant_d(m, mu), 200, 0x5eedULL);
    if (res > 1e-8) throw NotClosedError("dh_integral: form is not equivariantly closed (residual " + std::to_string(res) + ")");
  }
  if (mu.is_zero()) return 0.0;
  const VectorField x = killing_vector_field(m);
  ScalarField norm2(0.0);
  for (const auto& c : x) norm2 = norm2 + c * c;
  DifferentialForm xflat(m.ambient_dim(), 1);
  for (int i = 0; i < m.ambient_dim(); ++i) xflat.add_term(1u << i, x[i]);
  const DifferentialForm dx = d(xflat);
  const DifferentialForm mu0 = mu.component(0), mu2 = mu.component(2);
  return integrate_density(
      m,
      [&](const Ambient& p, const Ambient& a, const Ambient& b) {
        const double top = mu2.is_zero() ? 0.0 : mu2.eval(p, {a, b});
        const double low = mu0.is_zero() ? 0.0 : mu0.eval(p) * dx.eval(p, {a, b});
        return std::exp(-lambda * norm2(p)) * (top - lambda * low);
      },
      s);
}

// --------------------------------------------------------------- catalog

namespace {

ScalarField y(int i) { return ScalarField::coordinate(i); }

DifferentialForm one_form(int dim, const std::vector<ScalarField>& c) {
  DifferentialForm r(dim, 1);
  for (int i = 0; i < static_cast<int>(c.size()); ++i) r.add_term(1u << i, c[i]);
  return r;
}

}  // namespace

std::vector<std::string> form_catalog_names(const Manifold& m) {
  std::vector<std::string> names = {"zero", "one", "killing"};
  for (int i = 1; i <= m.ambient_dim(); ++i) names.push_back("x" + std::to_string(i));
  if (m.kind() == ManifoldKind::Sphere) {
    for (auto n : {"area_s2", "height_s2", "killing_s2", "f_s2", "omega_s2"}) names.push_back(n);
  } else {
    for (auto n : {"dtheta1", "dtheta2", "area_t2", "killing_flat", "f_t2", "g_t2", "omega_t2", "eta_t2", "beta_t2"})
      names.push_back(n);
  }
  return names;
}

DifferentialForm form_catalog(const Manifold& m, const std::string& name) {
  const int n = m.ambient_dim();
  const ScalarField tp(kTwoPi);
  if (name == "zero") return DifferentialForm(n, 0);
  if (name == "one") return DifferentialForm::scalar(n, 1.0);
  if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] - '0' <= n)
    return DifferentialForm::scalar(n, y(name[1] - '1'));
  if (name == "killing" || name == "killing_s2" || name == "killing_flat") {
    if (name == "killing_s2" && m.kind() != ManifoldKind::Sphere) throw ConfigError("killing_s2 requires manifold s2");
    if (name == "killing_flat" && m.kind() != ManifoldKind::Torus) throw ConfigError("killing_flat requires manifold t2");
    return one_form(n, killing_vector_field(m));
  }
  if (m.kind() == ManifoldKind::Sphere) {
    if (name == "area_s2") {
      DifferentialForm r(3, 2);
      r.add_term(0b110u, y(0));
      r.add_term(0b101u, -y(1));
      r.add_term(0b011u, y(2));
      return r;
    }
    if (name == "height_s2") return DifferentialForm::scalar(3, ScalarField(-kTwoPi) * y(2));
    if (name == "f_s2") return DifferentialForm::scalar(3, y(0) + ScalarField(0.5) * y(1) * y(2) + exp(ScalarField(0.3) * y(2)));
    if (name == "omega_s2") return one_form(3, {y(1) + y(2) * y(2), ScalarField(0.4) * y(0), sin(y(0))});
  } else {
    // on T², cos 2πθ₁ = 2π y₁, sin 2πθ₁ = 2π y₂, and similarly for θ₂
    const ScalarField c1 = tp * y(0), s1 = tp * y(1), c2 = tp * y(2), s2 = tp * y(3);
    const DifferentialForm dt1 = one_form(4, {-tp * y(1), tp * y(0)});
    const DifferentialForm dt2 = one_form(4, {0.0, 0.0, -tp * y(3), tp * y(2)});
    if (name == "dtheta1") return dt1;
    if (name == "dtheta2") return dt2;
    if (name == "area_t2") return wedge(dt1, dt2);
    if (name == "f_t2") return DifferentialForm::scalar(4, c1 + ScalarField(0.5) * s2 + ScalarField(0.3) * s1 * c2);
    if (name == "g_t2") return DifferentialForm::scalar(4, exp(ScalarField(0.4) * s1) * (ScalarField(1.0) + ScalarField(0.2) * c2));
    if (name == "omega_t2") return (ScalarField(1.0) + ScalarField(0.5) * s2) * dt1 + (ScalarField(0.7) * c1) * dt2;
    if (name == "eta_t2") return (ScalarField(0.4) * s1) * dt1 + (ScalarField(0.8) + ScalarField(0.3) * c2 * s1) * dt2;
    if (name == "beta_t2") return (ScalarField(1.0) + ScalarField(0.5) * c1 * s2) * wedge(dt1, dt2);
  }
  throw ConfigError("unknown form '" + name + "' for manifold " + m.name());
}

}  // namespace eqloop
