#pragma once

#include <memory>
#include <random>
#include <string>
#include <utility>

#include "eqloop/types.hpp"

namespace eqloop {

enum class ManifoldKind { Sphere, Torus };

/// Compact Riemannian surface isometrically embedded in R^d, with the
/// geometric services the loop-space calculus needs: nearest-point
/// projection, exponential and logarithm maps, an isometric circle action
/// and the heat kernel of the generator Δ/2.
///
/// Implementations are immutable and safe to share between threads.
class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual ManifoldKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual int intrinsic_dim() const { return 2; }
  virtual int ambient_dim() const = 0;
  virtual double injectivity_radius() const = 0;
  virtual double tube_radius() const = 0;

  /// Nearest point on M. Outside the tube the same formula is used
  /// (clamped along the normal ray) and `out_of_tube` is raised.
  virtual Ambient project(const Ambient& y, bool* out_of_tube = nullptr) const = 0;
  /// Jacobian of `project` at y.
  virtual AmbientMatrix project_derivative(const Ambient& y) const = 0;
  /// Orthogonal projection of an ambient vector onto T_x M.
  virtual Ambient tangent_project(const Ambient& x, const Ambient& v) const = 0;
  double distance_to_manifold(const Ambient& y) const;

  virtual Ambient exp_map(const Ambient& x, const Ambient& v) const = 0;
  /// d/dε exp_x(v + εw) for tangent v, w.
  virtual Ambient exp_derivative(const Ambient& x, const Ambient& v, const Ambient& w) const = 0;
  /// Throws CutLocusError when d(x,y) >= injectivity_radius().
  virtual Ambient log_map(const Ambient& x, const Ambient& y) const = 0;
  virtual double geodesic_distance(const Ambient& x, const Ambient& y) const = 0;

  /// Point and velocity at time τ of the geodesic τ ↦ exp_x(τ v).
  virtual std::pair<Ambient, Ambient> geodesic(const Ambient& x, const Ambient& v,
                                               double tau) const = 0;

  /// Riemannian inner product; ambient inputs are first projected onto T_x M.
  double metric(const Ambient& x, const Ambient& u, const Ambient& v) const;

  /// Circle action with period 1.
  virtual Ambient act(double t, const Ambient& x) const = 0;
  /// Ambient linear map implementing act(t) (the action is linear on R^d).
  virtual AmbientMatrix act_differential(double t) const = 0;
  virtual Ambient killing_field(const Ambient& x) const = 0;

  /// Transition density of Brownian motion with generator Δ/2 with respect
  /// to the Riemannian volume. Throws PrecisionError for t below 1e-3 on S².
  virtual double heat_kernel(double t, const Ambient& x, const Ambient& y) const = 0;
  virtual double volume() const = 0;

  /// Intrinsic coordinates: S² (polar θ, azimuth φ); T² (θ₁, θ₂) in [0,1)².
  virtual Eigen::Vector2d coordinates(const Ambient& x) const = 0;
  virtual Ambient from_coordinates(const Eigen::Vector2d& q) const = 0;

  virtual Ambient random_point(std::mt19937_64& rng) const = 0;
  /// Tangent vector at x with independent N(0, sigma²) components in an
  /// orthonormal frame.
  virtual Ambient random_tangent(const Ambient& x, double sigma, std::mt19937_64& rng) const = 0;
  /// Orthonormal frame of T_x M as two ambient vectors.
  virtual std::pair<Ambient, Ambient> tangent_frame(const Ambient& x) const = 0;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Unit sphere in R³; circle acts by rotation of angle 2πt about the x₃ axis.
class Sphere final : public Manifold {
 public:
  ManifoldKind kind() const override { return ManifoldKind::Sphere; }
  std::string name() const override { return "s2"; }
  int ambient_dim() const override { return 3; }
  double injectivity_radius() const override { return kPi; }
  double tube_radius() const override { return 1.0; }

  Ambient project(const Ambient& y, bool* out_of_tube = nullptr) const override;
  AmbientMatrix project_derivative(const Ambient& y) const override;
  Ambient tangent_project(const Ambient& x, const Ambient& v) const override;
  Ambient exp_map(const Ambient& x, const Ambient& v) const override;
  Ambient exp_derivative(const Ambient& x, const Ambient& v, const Ambient& w) const override;
  Ambient log_map(const Ambient& x, const Ambient& y) const override;
  double geodesic_distance(const Ambient& x, const Ambient& y) const override;
  std::pair<Ambient, Ambient> geodesic(const Ambient& x, const Ambient& v,
                                       double tau) const override;
  Ambient act(double t, const Ambient& x) const override;
  AmbientMatrix act_differential(double t) const override;
  Ambient killing_field(const Ambient& x) const override;
  double heat_kernel(double t, const Ambient& x, const Ambient& y) const override;
  double volume() const override { return 4.0 * kPi; }
  Eigen::Vector2d coordinates(const Ambient& x) const override;
  Ambient from_coordinates(const Eigen::Vector2d& q) const override;
  Ambient random_point(std::mt19937_64& rng) const override;
  Ambient random_tangent(const Ambient& x, double sigma, std::mt19937_64& rng) const override;
  std::pair<Ambient, Ambient> tangent_frame(const Ambient& x) const override;

  /// Number of Legendre terms used by heat_kernel at time t.
  static int spectral_cutoff(double t);
};

/// Flat square torus of side 1, embedded isometrically in R⁴ as a product of
/// two circles of radius 1/(2π); circle acts by translation in θ₁.
class Torus final : public Manifold {
 public:
  static constexpr double kRadius = 1.0 / kTwoPi;

  ManifoldKind kind() const override { return ManifoldKind::Torus; }
  std::string name() const override { return "t2"; }
  int ambient_dim() const override { return 4; }
  double injectivity_radius() const override { return 0.5; }
  double tube_radius() const override { return kRadius; }

  Ambient project(const Ambient& y, bool* out_of_tube = nullptr) const override;
  AmbientMatrix project_derivative(const Ambient& y) const override;
  Ambient tangent_project(const Ambient& x, const Ambient& v) const override;
  Ambient exp_map(const Ambient& x, const Ambient& v) const override;
  Ambient exp_derivative(const Ambient& x, const Ambient& v, const Ambient& w) const override;
  Ambient log_map(const Ambient& x, const Ambient& y) const override;
  double geodesic_distance(const Ambient& x, const Ambient& y) const override;
  std::pair<Ambient, Ambient> geodesic(const Ambient& x, const Ambient& v,
                                       double tau) const override;
  Ambient act(double t, const Ambient& x) const override;
  AmbientMatrix act_differential(double t) const override;
  Ambient killing_field(const Ambient& x) const override;
  double heat_kernel(double t, const Ambient& x, const Ambient& y) const override;
  double volume() const override { return 1.0; }
  Eigen::Vector2d coordinates(const Ambient& x) const override;
  Ambient from_coordinates(const Eigen::Vector2d& q) const override;
  Ambient random_point(std::mt19937_64& rng) const override;
  Ambient random_tangent(const Ambient& x, double sigma, std::mt19937_64& rng) const override;
  std::pair<Ambient, Ambient> tangent_frame(const Ambient& x) const override;

  /// Unit tangent vectors along θ₁ and θ₂ at x.
  static Ambient e1(const Ambient& x);
  static Ambient e2(const Ambient& x);
  /// Ambient velocity at θ of a coordinate velocity (a₁, a₂).
  Ambient coordinate_vector(const Eigen::Vector2d& theta, const Eigen::Vector2d& a) const;
  /// One-dimensional wrapped Gaussian density on the unit circle.
  static double wrapped_gaussian(double t, double delta);
};

ManifoldPtr make_manifold(const std::string& name);

/// Wrap a real number into [-1/2, 1/2).
double wrap_half(double x);

}  // namespace eqloop
