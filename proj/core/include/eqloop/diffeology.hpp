#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "eqloop/geometry.hpp"
#include "eqloop/loopmeasure.hpp"

namespace eqloop {

/// Tangent field along a grid loop, one ambient vector per grid point.
using LoopField = std::vector<Ambient>;

/// Ambient vector field depending on loop time s and position y.
struct NamedField {
  std::string name;
  double scale = 1.0;
  std::function<Ambient(double s, const Ambient& y)> f;
  Ambient operator()(double s, const Ambient& y) const { return scale * f(s, y); }
};

/// Built-in fields: t2 {e1, e2, wave1, wave2, twist}; s2 {rot_x, rot_y, rot_z, wave_s2};
/// both {killing}.
NamedField field_catalog(const Manifold& m, const std::string& name, double scale = 1.0);

/// y ↦ exp_y(Σ_j u_{p_j} · tangential part of V_j(s, y)).
struct ExpDeform {
  std::vector<NamedField> fields;
  std::vector<int> params;  // parameter index of each field; defaults to 0, 1, …
};

/// γ ↦ {s ↦ π(∫ F(u, γ(s₁), …, γ(s_a), γ(s)) ds₁…ds_a)}, a ∈ {0, 1, 2},
/// with the multi-integral done by the trapezoid rule on the loop grid.
struct Averaged {
  std::string name;
  int arity = 0;
  std::function<Ambient(const Eigen::VectorXd& u, const std::vector<Ambient>& args, const Ambient& y)> F;
};

/// The equivariant retraction H(r, ·); r is fixed or read from a parameter.
struct Retract {
  double r = 1.0;
  int param = -1;
};

using Stage = std::variant<ExpDeform, Averaged, Retract>;

/// Conjunction of modulus events {sup_{|s−t|<1/N} d(γ(s),γ(t)) < r}
/// (or their complements). Empty means "all loops".
struct PiecePredicate {
  struct Clause {
    int N = 1;
    double r = 0.0;
    bool negate = false;
  };
  std::vector<Clause> clauses;
  bool operator()(const Manifold& m, const Loop& g) const;
  std::string describe() const;
};

struct PlotPiece {
  PiecePredicate predicate;
  double rotation = 0.0;  // offset r_i, snapped to the loop grid
  std::vector<Stage> stages;
};

/// Executable stochastic plot. Tag 1 plots use only ExpDeform stages and a
/// rotation; tag 2 plots may also use Averaged and Retract stages.
/// `augmented` appends a parameter r ∈ [0,1] applying H(r,·) last;
/// `extended` then appends a parameter t applying the rotation ψ_t.
struct PlotSpec {
  int m = 0;
  std::vector<std::pair<double, double>> box;
  std::vector<PlotPiece> pieces;
  int tag = 1;
  int max_depth = 8;
  double fd_scale = 1e-4;  // FD step in units of the box width
  bool augmented = false;
  bool extended = false;

  int dimension() const { return m + (augmented ? 1 : 0) + (extended ? 1 : 0); }
  int augmented_index() const { return augmented ? m : -1; }
  int extended_index() const { return extended ? m + (augmented ? 1 : 0) : -1; }
  /// Throws ConfigError on malformed specs (depth, tag, box).
  void validate() const;
};

/// Single-piece plot on [-half_width, half_width]^k deforming along the given fields.
PlotSpec exp_deform_plot(std::vector<NamedField> fields, double half_width = 0.5);

PlotSpec extended_plot(const PlotSpec& p);
PlotSpec augmented_plot(const PlotSpec& p);

/// Index of the unique piece whose predicate holds; PartitionError otherwise.
int select_piece(const Manifold& m, const PlotSpec& p, const Loop& g);

Loop apply_plot(const Manifold& m, const PlotSpec& p, const Eigen::VectorXd& u, const Loop& g);

/// Derivative of the plot in parameter direction j, along apply_plot(p,u,γ).
/// Analytic for a single ExpDeform stage; the rotation direction of an
/// extended plot uses grid shifts with one Richardson step; the r direction
/// of an augmented plot uses radial_field; otherwise a 5-point central
/// difference with step fd_scale·(box width). BoundaryError if the stencil
/// leaves the box.
LoopField plot_derivative(const Manifold& m, const PlotSpec& p, const Eigen::VectorXd& u, int j,
                          const Loop& g);

/// Loop time-derivative X∞ by central grid differences of log maps with one
/// Richardson level.
LoopField loop_velocity(const Manifold& m, const Loop& g);

/// F(r, x, y) = exp_x(r log_x y).
Ambient chord(const Manifold& m, double r, const Ambient& x, const Ambient& y);
/// H(r,γ)(t) = π(∫ F(r, γ(s), γ(t)) ds).
Loop retraction(const Manifold& m, double r, const Loop& g);
/// X_r = ∂/∂r H(r,γ), a field along H(r,γ).
LoopField radial_field(const Manifold& m, double r, const Loop& g);

/// Normalized text form of a plot program (for --dump-plot).
std::string dump_plot(const PlotSpec& p);

/// Deterministic smooth loops used by studies and tests.
///   t2: "winding" (θ₁ winds once), "small" (inside T_ε for ε ≈ 0.25), "constant"
///   s2: "tilted" (tilted small circle), "small", "constant", "equator"
Loop smooth_test_loop(const Manifold& m, const std::string& name, int n);

}  // namespace eqloop
