#pragma once

#include <map>
#include <string>
#include <vector>

#include "eqloop/expr.hpp"
#include "eqloop/geometry.hpp"

namespace eqloop {

/// Ambient vector field with symbolic components.
using VectorField = std::vector<ScalarField>;

/// Killing field of the manifold's circle action, extended linearly to R^d.
VectorField killing_vector_field(const Manifold& m);

/// Differential form on R^d written as Σ_I a_I(y) dy^I over increasing
/// multi-indices I (encoded as bitmasks). Restricting to tangent vectors of
/// an embedded manifold gives the form on M; d and interior products commute
/// with that restriction, so all calculus is done symbolically in R^d.
class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(int ambient_dim, int degree);

  static DifferentialForm scalar(int ambient_dim, const ScalarField& f);
  /// Basis one-form dy^i.
  static DifferentialForm basis(int ambient_dim, int i);

  int ambient_dim() const { return dim_; }
  int degree() const { return degree_; }
  bool is_zero() const;

  const std::map<unsigned, ScalarField>& terms() const { return terms_; }
  void add_term(unsigned mask, const ScalarField& coeff);
  /// Coefficient of dy^I, zero when absent.
  ScalarField coefficient(unsigned mask) const;

  /// Value at x on the vectors v₁..v_k (k = degree).
  double eval(const Ambient& x, const std::vector<Ambient>& v) const;
  double eval(const Ambient& x) const { return eval(x, {}); }

  /// Coefficients a_I(x) evaluated once, for repeated contraction.
  struct Frozen {
    int degree = 0;
    std::vector<std::pair<unsigned, double>> terms;
    double apply(const std::vector<Ambient>& v) const;
    double apply(const Ambient* v) const;
  };
  Frozen freeze(const Ambient& x) const;

  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a);
  friend DifferentialForm operator-(const DifferentialForm& a);

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::map<unsigned, ScalarField> terms_;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm d(const DifferentialForm& a);
/// Interior product; throws DegreeError on 0-forms.
DifferentialForm interior(const VectorField& x, const DifferentialForm& a);

/// Sign of the permutation sorting the concatenation of two disjoint
/// increasing index sets.
int merge_sign(unsigned a, unsigned b);
int popcount(unsigned mask);

/// Sum of forms of a single parity, stored by degree.
class EquivariantForm {
 public:
  EquivariantForm() = default;
  explicit EquivariantForm(std::vector<DifferentialForm> components);

  /// 0 for even, 1 for odd; throws ParityError on mixed components.
  int parity() const;
  const std::vector<DifferentialForm>& components() const { return components_; }
  /// Component of the given degree (zero form if absent).
  DifferentialForm component(int degree) const;
  bool is_zero() const;

 private:
  std::vector<DifferentialForm> components_;
  int dim_ = 0;
};

/// (d + i_X)μ with X the manifold's Killing field.
EquivariantForm equivariant_d(const Manifold& m, const EquivariantForm& mu);

/// Largest |value| of every component of μ over random points and
/// orthonormal tangent frames.
double max_abs_on_samples(const Manifold& m, const EquivariantForm& mu, int samples,
                          unsigned long long seed);

struct IntegrationSettings {
  int n_polar = 64;      // S²: Gauss–Legendre nodes in cos θ
  int n_azimuth = 128;   // S²: trapezoid nodes in φ
  int n_torus = 128;     // T²: trapezoid nodes per coordinate
};

/// Integral over M of a top-degree form (positive orientation: (e_θ, e_φ)
/// on S², (e₁, e₂) on T²). Exponentially convergent for smooth integrands.
double integrate(const Manifold& m, const DifferentialForm& top, const IntegrationSettings& s = {});

/// Integral of a density given as a function of the point and an oriented
/// orthonormal frame.
double integrate_density(const Manifold& m,
                         const std::function<double(const Ambient&, const Ambient&, const Ambient&)>& f,
                         const IntegrationSettings& s = {});

enum class ClosednessCheck { Enforce, Skip };

/// ∫_M exp[−(d+i_X)(λX♭)] ∧ μ = ∫_M e^{−λ|X|²}(1 − λ dX♭) ∧ μ.
/// With ClosednessCheck::Enforce the form must be even and equivariantly
/// closed to 1e-8 on sampled points (NotClosedError otherwise).
double dh_integral(const Manifold& m, double lambda, const EquivariantForm& mu,
                   ClosednessCheck check = ClosednessCheck::Enforce,
                   const IntegrationSettings& s = {});

/// Named built-in forms. Available names depend on the manifold:
///   both: one, zero, x1..x4 (coordinate functions), killing (X♭)
///   s2:   area_s2, height_s2, killing_s2, f_s2, omega_s2
///   t2:   dtheta1, dtheta2, area_t2, killing_flat, f_t2, g_t2, omega_t2, eta_t2, beta_t2
DifferentialForm form_catalog(const Manifold& m, const std::string& name);
std::vector<std::string> form_catalog_names(const Manifold& m);

}  // namespace eqloop
