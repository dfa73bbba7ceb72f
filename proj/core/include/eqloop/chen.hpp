#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eqloop/cyclic.hpp"
#include "eqloop/diffeology.hpp"
#include "eqloop/loopmeasure.hpp"
#include "eqloop/uform.hpp"

namespace eqloop {

/// ∫ ⟨ω, dγ⟩ over the window [a, b] of a broken-geodesic loop (b may exceed
/// 1; the loop is periodic). Two-point Gauss rule on each geodesic piece.
double line_integral(const Manifold& m, const DifferentialForm& w, const PolygonalLoop& p, double a, double b);

/// I(ω₁,…,ω_k)(t) = ∫_{0<s₁<…<s_k<t} ⟨ω₁,dγ(s₁)⟩…⟨ω_k,dγ(s_k)⟩ on a broken
/// geodesic, exact for the piecewise-linear path of Gauss increments (so the
/// shuffle relations hold to rounding).
double iterated_integral(const Manifold& m, const std::vector<DifferentialForm>& ws, const PolygonalLoop& p,
                         double t);

struct SigmaSettings {
  int knots = 0;  // polygon knots; 0 uses every grid point
};

/// Equivariant Chen integral Σ(w) of a word evaluated on tangent fields:
///   ∫₀¹ ds ω₁(γ(s))(X_B₁) ∫_{s<s₂<…<s_n<s+1} Π_i ω_i(γ(s_i))(γ′(s_i), X_Bᵢ) ds_i,
/// summed with signs over all assignments of the fields to slots (block
/// sizes deg ω₁, deg ω_i − 1). Base points at segment midpoints, slot
/// increments by Gauss quadrature, window integrals by products of
/// unipotent segment matrices. Throws DegreeMismatch if the number of
/// fields differs from word_degree(w).
double sigma_eval(const Manifold& m, const FormWord& w, const Loop& g, const std::vector<LoopField>& fields,
                  const SigmaSettings& s = {});

/// Σ(c) on every subset of `basis`: component I is Σ(c)(X_{i₁},…,X_{i_k})
/// over the words of degree k = |I|.
UForm sigma_all(const Manifold& m, const Chain& c, const Loop& g, const std::vector<LoopField>& basis,
                const SigmaSettings& s = {});

/// Pullback of Σ(w) through a plot at u in directions `dirs` (a multi-index).
double pullback_sigma(const Manifold& m, const FormWord& w, const PlotSpec& p, const Eigen::VectorXd& u,
                      const std::vector<int>& dirs, const Loop& g, const SigmaSettings& s = {});

/// Monte Carlo mean and standard error of pullback_sigma over bridge loops.
struct McValue {
  double mean = 0.0;
  double stderr_ = 0.0;
  int replicas = 0;
};
McValue pullback_sigma_mc(const Manifold& m, const FormWord& w, const PlotSpec& p, const Eigen::VectorXd& u,
                          const std::vector<int>& dirs, int n, int replicas, std::uint64_t seed,
                          const SigmaSettings& s = {});

/// A loop-space form pulled back through the extended plot at (u, t = 0):
/// a UForm over m + 1 coordinates whose last coordinate is the rotation t.
/// For rotation-invariant forms the t-dependence is trivial, so d acts by
/// differences in u only and i_{X∞} is the algebraic i_{∂t}.
using PulledForm = std::function<UForm(const Eigen::VectorXd& u)>;

PulledForm pulled_sigma(const Manifold& m, const Chain& c, const PlotSpec& p, const Loop& g,
                        const SigmaSettings& s = {});
/// Exterior derivative on U (5-point differences, step fd_scale·box width).
PulledForm pulled_d(const PulledForm& f, const PlotSpec& p);
/// i_{X∞}: interior product with ∂/∂t.
PulledForm interior_killing(const PulledForm& f, const PlotSpec& p);
/// d + i_{X∞}.
PulledForm equivariant_d(const PulledForm& f, const PlotSpec& p);
PulledForm wedge(const PulledForm& a, const PulledForm& b);
PulledForm operator+(const PulledForm& a, const PulledForm& b);

/// max_I |(d + i_{X∞}) φ*Σ(w) − φ*Σ((b+B)w)| over the U-components.
double chain_map_residual(const Manifold& m, const Chain& w, const PlotSpec& p, const Eigen::VectorXd& u,
                          const Loop& g, const SigmaSettings& s = {});

struct CartanSettings {
  int simpson_nodes = 33;
};

/// Terms of the retraction Cartan formula pulled back at (u, γ):
///   σ − H⁰*σ − d∫H^{r*}i_{X_r}σ dr − ∫H^{r*}i_{X_r}(d+i_{X∞})σ dr + ∫H^{r*}i_{X_r}i_{X∞}σ dr
/// with σ = Σ(w); returns the largest absolute component.
struct CartanTerms {
  UForm sigma, h0, dG, equivariant, double_interior;
  UForm residual() const { return sigma - h0 - dG - equivariant + double_interior; }
};
CartanTerms cartan_terms(const Manifold& m, const Chain& w, const PlotSpec& p, const Eigen::VectorXd& u,
                         const Loop& g, const CartanSettings& cs = {}, const SigmaSettings& s = {});
double cartan_residual(const Manifold& m, const Chain& w, const PlotSpec& p, const Eigen::VectorXd& u,
                       const Loop& g, const CartanSettings& cs = {}, const SigmaSettings& s = {});

/// Convolution approximation of an iterated integral:
///   I^{k+1,N}(t) = ∫₀ᵗ I^{k,N}(s) ⟨ω_{k+1}(Y^N(s)), dY^N(s)⟩
/// with Y^N the plateau-kernel convolution of the ambient loop Y (no
/// projection). dY^N is the kernel-weighted window increment of Y; nested
/// integrals use the symmetric (midpoint/trapezoid) rule on the grid.
struct ConvolutionIterated {
  double value = 0.0;
  double tail = 0.0;  // contribution of the kernel's transition windows (δ_N)
};
ConvolutionIterated convolution_iterated(const std::vector<DifferentialForm>& ws, const std::vector<Ambient>& Y,
                                         int N, int k = 4, double t = 1.0);

/// Σ_j ⟨ω(Yᴺ_j), dYᴺ_j⟩ over the full loop rewritten as the raw increments of
/// Y paired with the kernel-symmetrized integrand ½(H(s+v) + H(s−v)).
/// Equal to the one-level convolution_iterated at t = 1 by summation by parts.
double symmetrized_pairing(const DifferentialForm& w, const std::vector<Ambient>& Y, int N, int k = 4);

/// Empirical L² convergence study on T² Brownian bridges with common random
/// numbers across N.
struct ConvergenceRow {
  std::string quantity;
  int N = 0;
  int replicas = 0;
  double mean = 0.0;
  double l2_gap = 0.0;
  double stderr_ = 0.0;
  double median_gap = 0.0;
};
struct ConvergenceSpec {
  std::vector<int> Ns{64, 128, 256, 512};
  int n = 8192;
  int replicas = 200;
  int poly_reference = 8192;
  int conv_reference = 2048;
  int kernel_k = 4;
  int threads = 1;
  std::string function = "f_t2";
  std::string form1 = "omega_t2";
  std::string form2 = "eta_t2";
  // Σ(function ⊗ form1) is pulled back through exp_deform_plot(fields) at u;
  // first and second derivatives in u₀ by 5-point differences of step fd_step.
  std::vector<std::string> fields{"wave1", "twist"};
  std::vector<double> u{0.01, -0.02};
  double fd_step = 1e-4;
};
/// Quantities, each with a polygonal (_poly) and a convolution (_conv)
/// scheme: sigma, dsigma, d2sigma (pullback value and u₀-derivatives) and
/// iter (the iterated integral of form1, form2 on the bare loop).
/// Loops are conditioned on Ωᴺ for the smallest N with r = injectivity
/// radius, for the loop and each deformed loop of the difference stencil
/// (so every broken geodesic exists); `rejected` receives the number of
/// redrawn loops.
std::vector<ConvergenceRow> convergence_study(const Manifold& m, const ConvergenceSpec& spec, std::uint64_t seed,
                                              int* rejected = nullptr);

}  // namespace eqloop
