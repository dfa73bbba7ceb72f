#include "eqloop/geometry.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "eqloop/errors.hpp"

namespace eqloop {

double wrap_half(double x) { return x - std::floor(x + 0.5); }

double Manifold::distance_to_manifold(const Ambient& y) const { return (y - project(y)).norm(); }

double Manifold::metric(const Ambient& x, const Ambient& u, const Ambient& v) const {
  return tangent_project(x, u).dot(tangent_project(x, v));
}

ManifoldPtr make_manifold(const std::string& name) {
  if (name == "s2") return std::make_shared<Sphere>();
  if (name == "t2") return std::make_shared<Torus>();
  throw ConfigError("unknown manifold '" + name + "' (expected s2 or t2)");
}

// ---------------------------------------------------------------- sphere

Ambient Sphere::project(const Ambient& y, bool* out_of_tube) const {
  const double n = y.norm();
  if (out_of_tube) *out_of_tube = std::abs(n - 1.0) >= tube_radius();
  if (n < 1e-300) {
    Ambient p(3);
    p << 0.0, 0.0, 1.0;
    return p;
  }
  return y / n;
}

AmbientMatrix Sphere::project_derivative(const Ambient& y) const {
  const double n = y.norm();
  const Ambient x = y / n;
  return (AmbientMatrix::Identity(3, 3) - x * x.transpose()) / n;
}

Ambient Sphere::tangent_project(const Ambient& x, const Ambient& v) const {
  return v - x.dot(v) * x;
}

Ambient Sphere::exp_map(const Ambient& x, const Ambient& v) const {
  const Ambient w = tangent_project(x, v);
  const double r = w.norm();
  if (r < 1e-300) return x;
  Ambient p = std::cos(r) * x + (std::sin(r) / r) * w;
  return p / p.norm();
}

Ambient Sphere::exp_derivative(const Ambient& x, const Ambient& v, const Ambient& w) const {
  const Ambient vt = tangent_project(x, v);
  const Ambient wt = tangent_project(x, w);
  const double r = vt.norm();
  if (r < 1e-12) return wt - 0.5 * vt.dot(wt) * x;
  const Ambient e = vt / r;
  const double a = e.dot(wt);
  const Ambient perp = wt - a * e;
  return a * (-std::sin(r) * x + std::cos(r) * e) + (std::sin(r) / r) * perp;
}

Ambient Sphere::log_map(const Ambient& x, const Ambient& y) const {
  const double c = x.dot(y);
  const Ambient w = y - c * x;
  const double s = w.norm();
  const double d = std::atan2(s, c);
  if (d >= injectivity_radius() - 1e-9) throw CutLocusError("log_map: points are antipodal");
  if (s < 1e-300) return Ambient::Zero(3);
  return (d / s) * w;
}

double Sphere::geodesic_distance(const Ambient& x, const Ambient& y) const {
  // atan2 form is accurate for both nearby and nearly antipodal points
  Eigen::Vector3d a = x.head<3>(), b = y.head<3>();
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

std::pair<Ambient, Ambient> Sphere::geodesic(const Ambient& x, const Ambient& v,
                                             double tau) const {
  const Ambient w = tangent_project(x, v);
  const double r = w.norm();
  if (r < 1e-300) return {x, Ambient::Zero(3)};
  const Ambient e = w / r;
  const double c = std::cos(tau * r), s = std::sin(tau * r);
  return {c * x + s * e, r * (-s * x + c * e)};
}

Ambient Sphere::act(double t, const Ambient& x) const { return act_differential(t) * x; }

AmbientMatrix Sphere::act_differential(double t) const {
  const double c = std::cos(kTwoPi * t), s = std::sin(kTwoPi * t);
  AmbientMatrix r(3, 3);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Ambient Sphere::killing_field(const Ambient& x) const {
  Ambient k(3);
  k << -kTwoPi * x[1], kTwoPi * x[0], 0.0;
  return k;
}

int Sphere::spectral_cutoff(double t) {
  // bound of term l is (2l+1) e^{-l(l+1)t/2}/(4π); once terms decrease
  // geometrically with ratio q, the tail after L is at most b_{L+1}/(1-q)
  auto bound = [t](int l) { return (2.0 * l + 1.0) * std::exp(-0.5 * l * (l + 1.0) * t) / (4.0 * kPi); };
  for (int l = 1;; ++l) {
    const double b1 = bound(l + 1), b2 = bound(l + 2);
    const double q = b2 / b1;
    if (q < 1.0 && b1 / (1.0 - q) < 1e-13) return l;
    if (l > 100000) return l;
  }
}

double Sphere::heat_kernel(double t, const Ambient& x, const Ambient& y) const {
  if (!(t >= 1e-3)) throw PrecisionError("heat_kernel: t below certified floor 1e-3 on s2");
  const double z = std::cos(geodesic_distance(x, y));
  const int L = spectral_cutoff(t);
  double p0 = 1.0, p1 = z;
  double sum = 1.0 + 3.0 * std::exp(-t) * z;
  for (int l = 2; l <= L; ++l) {
    const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
    sum += (2.0 * l + 1.0) * std::exp(-0.5 * l * (l + 1.0) * t) * p2;
    p0 = p1;
    p1 = p2;
  }
  return sum / (4.0 * kPi);
}

Eigen::Vector2d Sphere::coordinates(const Ambient& x) const {
  double phi = std::atan2(x[1], x[0]);
  if (phi < 0) phi += kTwoPi;
  return {std::atan2(std::hypot(x[0], x[1]), x[2]), phi};
}

Ambient Sphere::from_coordinates(const Eigen::Vector2d& q) const {
  Ambient x(3);
  x << std::sin(q[0]) * std::cos(q[1]), std::sin(q[0]) * std::sin(q[1]), std::cos(q[0]);
  return x;
}

Ambient Sphere::random_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  Ambient y(3);
  do {
    y << g(rng), g(rng), g(rng);
  } while (y.norm() < 1e-8);
  return y / y.norm();
}

Ambient Sphere::random_tangent(const Ambient& x, double sigma, std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  auto [a, b] = tangent_frame(x);
  const double c1 = g(rng), c2 = g(rng);
  return sigma * (c1 * a + c2 * b);
}

std::pair<Ambient, Ambient> Sphere::tangent_frame(const Ambient& x) const {
  Ambient a = Ambient::Zero(3);
  a[std::abs(x[2]) < 0.9 ? 2 : 0] = 1.0;
  Ambient e1 = a - x.dot(a) * x;
  e1 /= e1.norm();
  Eigen::Vector3d c = x.head<3>().cross(e1.head<3>());
  Ambient e2(3);
  e2 << c[0], c[1], c[2];
  return {e1, e2};
}

// ----------------------------------------------------------------- torus

namespace {

Eigen::Vector2d torus_theta(const Ambient& x) {
  Eigen::Vector2d th(std::atan2(x[1], x[0]) / kTwoPi, std::atan2(x[3], x[2]) / kTwoPi);
  for (int i = 0; i < 2; ++i)
    if (th[i] < 0) th[i] += 1.0;
  return th;
}

Ambient torus_point(const Eigen::Vector2d& th) {
  Ambient x(4);
  x << std::cos(kTwoPi * th[0]), std::sin(kTwoPi * th[0]), std::cos(kTwoPi * th[1]),
      std::sin(kTwoPi * th[1]);
  return x * Torus::kRadius;
}

}  // namespace

Ambient Torus::e1(const Ambient& x) {
  const double n = std::hypot(x[0], x[1]);
  Ambient e = Ambient::Zero(4);
  if (n > 0) {
    e[0] = -x[1] / n;
    e[1] = x[0] / n;
  }
  return e;
}

Ambient Torus::e2(const Ambient& x) {
  const double n = std::hypot(x[2], x[3]);
  Ambient e = Ambient::Zero(4);
  if (n > 0) {
    e[2] = -x[3] / n;
    e[3] = x[2] / n;
  }
  return e;
}

Ambient Torus::coordinate_vector(const Eigen::Vector2d& theta, const Eigen::Vector2d& a) const {
  Ambient v(4);
  v << -std::sin(kTwoPi * theta[0]) * a[0], std::cos(kTwoPi * theta[0]) * a[0],
      -std::sin(kTwoPi * theta[1]) * a[1], std::cos(kTwoPi * theta[1]) * a[1];
  return v;
}

Ambient Torus::project(const Ambient& y, bool* out_of_tube) const {
  Ambient p(4);
  bool out = false;
  for (int k = 0; k < 2; ++k) {
    const double a = y[2 * k], b = y[2 * k + 1];
    const double n = std::hypot(a, b);
    if (n < 1e-300) {
      p[2 * k] = kRadius;
      p[2 * k + 1] = 0.0;
      out = true;
    } else {
      p[2 * k] = kRadius * a / n;
      p[2 * k + 1] = kRadius * b / n;
    }
  }
  if (out_of_tube) *out_of_tube = out || (y - p).norm() >= tube_radius();
  return p;
}

AmbientMatrix Torus::project_derivative(const Ambient& y) const {
  AmbientMatrix j = AmbientMatrix::Zero(4, 4);
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d q(y[2 * k], y[2 * k + 1]);
    const double n = q.norm();
    const Eigen::Vector2d u = q / n;
    j.block(2 * k, 2 * k, 2, 2) = (kRadius / n) * (Eigen::Matrix2d::Identity() - u * u.transpose());
  }
  return j;
}

Ambient Torus::tangent_project(const Ambient& x, const Ambient& v) const {
  const Ambient a = e1(x), b = e2(x);
  return a.dot(v) * a + b.dot(v) * b;
}

Ambient Torus::exp_map(const Ambient& x, const Ambient& v) const {
  Eigen::Vector2d th = torus_theta(x);
  th[0] += e1(x).dot(v);
  th[1] += e2(x).dot(v);
  return torus_point(th);
}

Ambient Torus::exp_derivative(const Ambient& x, const Ambient& v, const Ambient& w) const {
  Eigen::Vector2d th = torus_theta(x);
  th[0] += e1(x).dot(v);
  th[1] += e2(x).dot(v);
  return coordinate_vector(th, Eigen::Vector2d(e1(x).dot(w), e2(x).dot(w)));
}

Ambient Torus::log_map(const Ambient& x, const Ambient& y) const {
  const Eigen::Vector2d tx = torus_theta(x), ty = torus_theta(y);
  const Eigen::Vector2d d(wrap_half(ty[0] - tx[0]), wrap_half(ty[1] - tx[1]));
  if (d.norm() >= injectivity_radius()) throw CutLocusError("log_map: distance beyond injectivity radius");
  return coordinate_vector(tx, d);
}

double Torus::geodesic_distance(const Ambient& x, const Ambient& y) const {
  const Eigen::Vector2d tx = torus_theta(x), ty = torus_theta(y);
  return std::hypot(wrap_half(ty[0] - tx[0]), wrap_half(ty[1] - tx[1]));
}

std::pair<Ambient, Ambient> Torus::geodesic(const Ambient& x, const Ambient& v, double tau) const {
  Eigen::Vector2d th = torus_theta(x);
  const Eigen::Vector2d a(e1(x).dot(v), e2(x).dot(v));
  th += tau * a;
  return {torus_point(th), coordinate_vector(th, a)};
}

Ambient Torus::act(double t, const Ambient& x) const { return act_differential(t) * x; }

AmbientMatrix Torus::act_differential(double t) const {
  const double c = std::cos(kTwoPi * t), s = std::sin(kTwoPi * t);
  AmbientMatrix r = AmbientMatrix::Identity(4, 4);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

Ambient Torus::killing_field(const Ambient& x) const {
  Ambient k(4);
  k << -kTwoPi * x[1], kTwoPi * x[0], 0.0, 0.0;
  return k;
}

double Torus::wrapped_gaussian(double t, double delta) {
  const int kmax = t <= 1.0 ? 8 : 8 + static_cast<int>(std::ceil(10.0 * std::sqrt(t)));
  const double norm = 1.0 / std::sqrt(kTwoPi * t);
  const double d = wrap_half(delta);
  double s = 0.0;
  for (int k = -kmax; k <= kmax; ++k) s += std::exp(-(d + k) * (d + k) / (2.0 * t));
  return norm * s;
}

double Torus::heat_kernel(double t, const Ambient& x, const Ambient& y) const {
  if (!(t > 0)) throw PrecisionError("heat_kernel: t must be positive");
  const Eigen::Vector2d tx = torus_theta(x), ty = torus_theta(y);
  return wrapped_gaussian(t, ty[0] - tx[0]) * wrapped_gaussian(t, ty[1] - tx[1]);
}

Eigen::Vector2d Torus::coordinates(const Ambient& x) const { return torus_theta(x); }

Ambient Torus::from_coordinates(const Eigen::Vector2d& q) const { return torus_point(q); }

Ambient Torus::random_point(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng), b = u(rng);
  return torus_point({a, b});
}

Ambient Torus::random_tangent(const Ambient& x, double sigma, std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  const double c1 = g(rng), c2 = g(rng);
  return sigma * (c1 * e1(x) + c2 * e2(x));
}

std::pair<Ambient, Ambient> Torus::tangent_frame(const Ambient& x) const { return {e1(x), e2(x)}; }

}  // namespace eqloop
