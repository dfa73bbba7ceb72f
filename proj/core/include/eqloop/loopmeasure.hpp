#pragma once

#include <random>
#include <vector>

#include "eqloop/geometry.hpp"

namespace eqloop {

/// Loop sampled on the uniform grid j/n of the circle; indices wrap mod n.
struct Loop {
  std::vector<Ambient> points;

  Loop() = default;
  explicit Loop(std::vector<Ambient> p) : points(std::move(p)) {}
  long size() const { return static_cast<long>(points.size()); }
  const Ambient& operator[](long j) const {
    const long n = size();
    return points[static_cast<std::size_t>(((j % n) + n) % n)];
  }
};

struct BridgeOptions {
  double duration = 1.0;          // bridge time horizon; 1 for the loop measure
  int mh_iterations = 3;          // independence-Metropolis proposals per step (S²)
  double acceptance_floor = 0.2;  // ConvergenceError below this rate (S²)
  double spectral_threshold = 0.02;  // S²: use the spectral kernel for remaining time above this
};

/// Basepoint drawn from p₁(x,x) dx / ∫ p₁(y,y) dy by rejection from the
/// uniform law. `trials` (optional) receives the number of proposals used.
Ambient sample_basepoint(const Manifold& m, std::mt19937_64& rng, int* trials = nullptr);

/// Brownian bridge from x back to x on the grid of size n (n >= 8).
/// T²: exact (winding number, then linear-drift Gaussian bridge).
/// S²: heat-kernel-guided proposals with a Metropolis correction.
Loop sample_bridge(const Manifold& m, const Ambient& x, int n, std::mt19937_64& rng,
                   const BridgeOptions& opt = {}, double* acceptance = nullptr);

/// Basepoint and bridge: one draw of the loop measure.
Loop sample_loop(const Manifold& m, int n, std::mt19937_64& rng, const BridgeOptions& opt = {});

/// Small-time S² heat kernel approximation (2πt)^{-1} sqrt(θ/sinθ) e^{-θ²/2t}.
double sphere_short_time_kernel(double t, double theta);

/// ψ_t γ = (s ↦ γ(t+s)). Exact for t on the grid; off-grid t interpolates
/// along geodesics and sets *off_grid.
Loop rotate_loop(const Manifold& m, double t, const Loop& g, bool* off_grid = nullptr);
Loop rotate_index(const Loop& g, long shift);

/// Broken geodesic through the knots γ(j/N).
class PolygonalLoop {
 public:
  PolygonalLoop(const Manifold& m, const Loop& g, int N);

  int knots() const { return static_cast<int>(knots_.size()); }
  const Ambient& knot(long j) const;
  const Ambient& chord(long j) const;  // log_{K_j} K_{j+1}
  /// Point and s-velocity at time s (periodic).
  std::pair<Ambient, Ambient> eval(double s) const;
  Loop sample(int n) const;

 private:
  const Manifold* m_;
  std::vector<Ambient> knots_, chords_;
};

PolygonalLoop polygonal(const Manifold& m, const Loop& g, int N);

/// Plateau kernel on [−1/N, 1/N]: constant on |s| ≤ 1/N − 1/N^k with a
/// smooth step of width 1/N^k, normalized to unit mass.
struct PlateauKernel {
  int N = 64;
  int k = 4;
  double unnormalized(double s) const;
  double unnormalized_mass() const { return 2.0 / N - std::pow(static_cast<double>(N), -k); }
  double operator()(double s) const { return unnormalized(s) / unnormalized_mass(); }
};

struct ConvolvedLoop {
  std::vector<Ambient> ambient;  // γ̃ᴺ in R^d
  Loop projected;                // γᴺ = π γ̃ᴺ
  int N = 0;
  int k = 0;
};

/// Convolution of the loop with the plateau kernel (weights are the kernel
/// integrated over each grid cell, normalized to sum 1), then projection. Requires n/N >= 4.
/// Throws TubeError when an average lies outside the projection tube.
ConvolvedLoop convolve(const Manifold& m, const Loop& g, int N, int k = 4);
std::vector<double> convolution_weights(int n, int N, int k);
/// Cell weights split into the plateau part and the transition-band part.
struct KernelWeights {
  std::vector<double> plateau, transition;
};
KernelWeights convolution_weight_split(int n, int N, int k);

/// sup over grid pairs with |i−j| < window of d(γ_i, γ_j).
double modulus(const Manifold& m, const Loop& g, long window);
double loop_diameter(const Manifold& m, const Loop& g);
/// Ωᴺ: sup_{|s−t|<1/N} d(γ(s),γ(t)) < r, checked on grid pairs with |i−j| ≤ ⌈n/N⌉.
bool in_omega_N(const Manifold& m, const Loop& g, int N, double r);
/// T_ε: diameter < ε.
bool in_T_eps(const Manifold& m, const Loop& g, double eps);
/// O_ε: complement of the closure of T_ε (diameter > ε).
bool in_O_eps(const Manifold& m, const Loop& g, double eps);

/// Σ_j d(γ_j, γ_{j+1})².
double quadratic_variation(const Manifold& m, const Loop& g);

}  // namespace eqloop
