#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eqloop/chen.hpp"

namespace eqloop {

// ------------------------------------------------------------ cutoff

/// H(γ) = 1 − f(∬ g(h(s,t)) ds dt), h = min(d², 1).
/// g = 1 on [0, r₁], g = 1 + S·(r₂ − h)^{−k} on (r₁, r₂) with S a smooth
/// step, g = +∞ from r₂ on; f(x) = exp(1 − 1/(1 − (x−1)²)) on [1, 2), 0 after.
struct CutoffProfile {
  double r1 = 0.01;
  double r2 = 0.04;
  int k = 8;
  double g(double h) const;
  double f(double x) const;
};

double cutoff_H(const Manifold& m, const Loop& g, const CutoffProfile& prof = {});

// ------------------------------------------------------------ partition of unity

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1.
double smooth_step(double x);

/// Parameters of the dyadic partition: energy bound a (loops in O_ε have
/// energy > a), dyadic N = 1, 2, 4, …, n_max.
struct PartitionProfile {
  double a = 0.04;
  int n_max = 64;
  /// a = 4ε²: a loop of diameter > ε has length > 2ε, hence energy > 4ε².
  static PartitionProfile from_epsilon(double eps, int n_max = 64) { return {4.0 * eps * eps, n_max}; }
};

/// Pairing Pᴺ(γ) = ∫dt ∫ds ⟨d/ds ψ_tγᴺ(s), d_sψ_tγ(s)⟩: t averaged over the
/// n/N grid offsets of the knots, the loop differential taken as log
/// increments against the broken-geodesic velocity at the step midpoint.
double energy_pairing(const Manifold& m, const Loop& g, int N);

/// Band k of the cover of ]0, ∞[: ]a/8(k+1), a/4k] (k = 0: ]a/8, ∞[).
std::pair<double, double> band(double a, int k);
/// f^k: smooth partition of unity subordinate to the bands, built as
/// differences of one log-scale step shifted per band.
double band_weight(double a, int k, double x);
/// g: 1 on ]−∞, 0], 0 on [a/2, ∞[.
double gate(double a, double x);

using CoverIndex = std::pair<int, int>;  // α = (N, k)

struct PartitionState {
  std::map<int, double> pairing;                // Pᴺ for dyadic N
  std::map<CoverIndex, double> weight;          // F̃^α for the active α
  double xi = 0.0;                              // Ξ
  std::vector<CoverIndex> active() const;
  double sum() const;
};

/// All active partition members. Dyadic N whose broken geodesic γᴺ is
/// undefined (knots beyond the injectivity radius) are skipped.
/// EmptyCoverError if Ξ = 0.
PartitionState partition(const Manifold& m, const Loop& g, const PartitionProfile& prof);
double partition_member(const Manifold& m, const CoverIndex& alpha, const Loop& g, const PartitionProfile& prof);
double partition_sum(const Manifold& m, const Loop& g, const PartitionProfile& prof);
/// γ ∈ O^{N,k}: Pᴺ(γ) in band k.
bool in_cover(const Manifold& m, const CoverIndex& alpha, const Loop& g, const PartitionProfile& prof);

// ------------------------------------------------------------ α and β

/// α^{N₁}(γ)(V) = ∫dt ∫ds ⟨d/ds ψ_tγ^{N₁}(s), V(s)⟩ on a tangent field.
double alpha_on_field(const Manifold& m, int N1, const Loop& g, const LoopField& V);
/// φ*α^{N₁} in the plot direction j at u.
double alpha_pullback(const Manifold& m, int N1, const PlotSpec& p, const Eigen::VectorXd& u, int j, const Loop& g);
/// i_{X∞}α^{N₁}(γ) = P^{N₁}(γ).
double ix_alpha(const Manifold& m, int N1, const Loop& g);

/// α^{N₁} pulled back through the extended plot (components e_j and e_t).
PulledForm pulled_alpha(const Manifold& m, int N1, const PlotSpec& p, const Loop& g);
/// β = (i_Xα)^{-1} Σ_j (−1)^j (dα)^j / (i_Xα)^j, summed until (dα)^j vanishes.
/// SingularError if i_Xα falls below `floor`.
PulledForm pulled_beta(const Manifold& m, int N1, const PlotSpec& p, const Loop& g, double floor = 1e-8);
double beta_pullback(const Manifold& m, int N1, const PlotSpec& p, const Eigen::VectorXd& u,
                     const std::vector<int>& dirs, const Loop& g);

/// |σ − (d + i_{X∞})(α ∧ β ∧ σ)| over the U-components. NotClosedError when
/// (d + i_{X∞})σ exceeds `closed_tol`.
double homotopy_residual(const PulledForm& sigma, const Manifold& m, int N1, const PlotSpec& p,
                         const Eigen::VectorXd& u, const Loop& g, double closed_tol = 1e-4);

// ------------------------------------------------------------ Čech complex

/// Strictly increasing list of cover indices; the empty set is the augmentation.
using IndexSet = std::vector<CoverIndex>;

std::string format_index_set(const IndexSet& I);
/// Parses "N1.k1+N2.k2" ("" or "()" is the empty set); ConfigError when
/// malformed or not strictly increasing.
IndexSet parse_index_set(const std::string& s);

/// All index sets of the given size drawn from `universe` (sorted).
std::vector<IndexSet> index_sets(const std::vector<CoverIndex>& universe, int size);

/// Cochain with symbolic values: integer combinations of named basis terms,
/// so δδ = 0 is checked as an exact identity.
using Formal = std::map<std::string, long>;
using FormalCochain = std::map<IndexSet, Formal>;
/// (δσ)_I = Σ_j (−1)^j σ_{I − α_j} for every I of size `size` from the universe.
FormalCochain formal_delta(const FormalCochain& c, const std::vector<CoverIndex>& universe, int size);

/// Cochain of forms evaluated at one point (u, γ); missing entries are zero.
using NumericCochain = std::map<IndexSet, UForm>;
UForm cech_delta(const NumericCochain& c, const IndexSet& I);
/// (Kσ)_I = Σ_α ρ_α σ_{α I}, with σ alternating in its indices (zero when α ∈ I).
UForm cech_contract(const NumericCochain& c, const std::map<CoverIndex, double>& rho, const IndexSet& I);
NumericCochain cech_contract(const NumericCochain& c, const std::map<CoverIndex, double>& rho,
                             const std::vector<IndexSet>& sets);

}  // namespace eqloop
