#include "eqloop/diffeology.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "eqloop/errors.hpp"

namespace eqloop {

// ---------------------------------------------------------------- fields

NamedField field_catalog(const Manifold& m, const std::string& name, double scale) {
  NamedField f;
  f.name = name;
  f.scale = scale;
  const Manifold* mp = &m;
  if (name == "killing") {
    f.f = [mp](double, const Ambient& y) { return mp->killing_field(y); };
    return f;
  }
  if (m.kind() == ManifoldKind::Torus) {
    if (name == "e1") f.f = [](double, const Ambient& y) { return Torus::e1(y); };
    else if (name == "e2") f.f = [](double, const Ambient& y) { return Torus::e2(y); };
    else if (name == "wave1")
      f.f = [](double s, const Ambient& y) {
        return Ambient((std::sin(kTwoPi * s) + 0.5 * kTwoPi * y[3]) * Torus::e1(y) +
                       0.3 * std::cos(kTwoPi * s) * Torus::e2(y));
      };
    else if (name == "wave2")
      f.f = [](double s, const Ambient& y) {
        return Ambient(0.5 * std::cos(kTwoPi * s) * Torus::e1(y) +
                       (std::sin(2.0 * kTwoPi * s) + 0.4 * kTwoPi * y[0]) * Torus::e2(y));
      };
    else if (name == "twist")
      f.f = [](double, const Ambient& y) { return Ambient(kTwoPi * y[2] * Torus::e1(y)); };
    else
      throw ConfigError("unknown vector field '" + name + "' for t2");
    return f;
  }
  auto rot = [](int axis, const Ambient& y) {
    Ambient v(3);
    if (axis == 0) v << 0.0, -y[2], y[1];
    else if (axis == 1) v << y[2], 0.0, -y[0];
    else v << -y[1], y[0], 0.0;
    return v;
  };
  if (name == "rot_x") f.f = [rot](double, const Ambient& y) { return rot(0, y); };
  else if (name == "rot_y") f.f = [rot](double, const Ambient& y) { return rot(1, y); };
  else if (name == "rot_z") f.f = [rot](double, const Ambient& y) { return rot(2, y); };
  else if (name == "wave_s2")
    f.f = [rot](double s, const Ambient& y) {
      return Ambient(std::sin(kTwoPi * s) * rot(0, y) + 0.5 * std::cos(kTwoPi * s) * rot(1, y));
    };
  else
    throw ConfigError("unknown vector field '" + name + "' for s2");
  return f;
}

// ------------------------------------------------------------ predicates

bool PiecePredicate::operator()(const Manifold& m, const Loop& g) const {
  for (const auto& c : clauses)
    if (in_omega_N(m, g, c.N, c.r) == c.negate) return false;
  return true;
}

std::string PiecePredicate::describe() const {
  if (clauses.empty()) return "all";
  std::ostringstream os;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) os << " & ";
    os << (clauses[i].negate ? "!" : "") << "omega(N=" << clauses[i].N << ",r=" << clauses[i].r << ")";
  }
  return os.str();
}

// ------------------------------------------------------------ plot specs

void PlotSpec::validate() const {
  if (m < 0 || static_cast<int>(box.size()) != m) throw ConfigError("plot: box must have one interval per parameter");
  for (const auto& [a, b] : box)
    if (!(a < b)) throw ConfigError("plot: empty parameter interval");
  if (pieces.empty()) throw ConfigError("plot: no pieces");
  if (tag != 1 && tag != 2) throw ConfigError("plot: diffeology tag must be 1 or 2");
  for (const auto& piece : pieces) {
    if (static_cast<int>(piece.stages.size()) > max_depth) throw ConfigError("plot: stage depth exceeds cap");
    for (const auto& st : piece.stages) {
      if (tag == 1 && !std::holds_alternative<ExpDeform>(st))
        throw ConfigError("plot: diffeology-1 plots admit only exp-deform stages");
      if (const auto* e = std::get_if<ExpDeform>(&st)) {
        if (!e->params.empty() && e->params.size() != e->fields.size())
          throw ConfigError("plot: exp-deform parameter list does not match its fields");
        for (std::size_t k = 0; k < e->fields.size(); ++k) {
          const int p = e->params.empty() ? static_cast<int>(k) : e->params[k];
          if (p < 0 || p >= m) throw ConfigError("plot: exp-deform parameter out of range");
        }
      }
      if (const auto* a = std::get_if<Averaged>(&st))
        if (a->arity < 0 || a->arity > 2) throw ConfigError("plot: averaged-stage arity must be 0, 1 or 2");
      if (const auto* r = std::get_if<Retract>(&st))
        if (r->param >= m) throw ConfigError("plot: retract parameter out of range");
    }
  }
  if (augmented && tag != 2) throw ConfigError("plot: augmented plots belong to diffeology 2");
}

PlotSpec exp_deform_plot(std::vector<NamedField> fields, double half_width) {
  PlotSpec p;
  p.m = static_cast<int>(fields.size());
  p.box.assign(p.m, {-half_width, half_width});
  PlotPiece piece;
  ExpDeform e;
  e.fields = std::move(fields);
  piece.stages.push_back(std::move(e));
  p.pieces.push_back(std::move(piece));
  return p;
}

PlotSpec extended_plot(const PlotSpec& p) {
  PlotSpec q = p;
  q.extended = true;
  return q;
}

PlotSpec augmented_plot(const PlotSpec& p) {
  PlotSpec q = p;
  q.augmented = true;
  q.tag = 2;
  return q;
}

int select_piece(const Manifold& m, const PlotSpec& p, const Loop& g) {
  int found = -1;
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    if (!p.pieces[i].predicate(m, g)) continue;
    if (found >= 0) throw PartitionError("plot: loop matches more than one piece");
    found = static_cast<int>(i);
  }
  if (found < 0) throw PartitionError("plot: loop matches no piece");
  return found;
}

namespace {

long snap_rotation(double rotation, long n) {
  const double steps = rotation * static_cast<double>(n);
  const long k = std::lround(steps);
  if (std::abs(steps - static_cast<double>(k)) > 1e-9)
    std::clog << "eqloop: plot rotation offset " << rotation << " snapped to grid step " << k << "/" << n << "\n";
  return k;
}

Loop apply_exp_deform(const Manifold& m, const ExpDeform& e, const Eigen::VectorXd& u, const Loop& g) {
  const long n = g.size();
  Loop out;
  out.points.reserve(n);
  for (long i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / n;
    const Ambient& y = g.points[i];
    Ambient v = Ambient::Zero(y.size());
    for (std::size_t k = 0; k < e.fields.size(); ++k) {
      const int p = e.params.empty() ? static_cast<int>(k) : e.params[k];
      if (u[p] != 0.0) v += u[p] * m.tangent_project(y, e.fields[k](s, y));
    }
    out.points.push_back(m.exp_map(y, v));
  }
  return out;
}

Loop apply_averaged(const Manifold& m, const Averaged& a, const Eigen::VectorXd& u, const Loop& g) {
  const long n = g.size();
  Loop out;
  out.points.reserve(n);
  for (long i = 0; i < n; ++i) {
    const Ambient& y = g.points[i];
    Ambient acc = Ambient::Zero(y.size());
    if (a.arity == 0) {
      acc = a.F(u, {}, y);
    } else if (a.arity == 1) {
      for (long j = 0; j < n; ++j) acc += a.F(u, {g.points[j]}, y);
      acc /= static_cast<double>(n);
    } else {
      for (long j = 0; j < n; ++j)
        for (long k = 0; k < n; ++k) acc += a.F(u, {g.points[j], g.points[k]}, y);
      acc /= static_cast<double>(n) * static_cast<double>(n);
    }
    bool out_of_tube = false;
    out.points.push_back(m.project(acc, &out_of_tube));
    if (out_of_tube) throw TubeError("averaged stage left the projection tube");
  }
  return out;
}

Loop apply_core(const Manifold& m, const PlotSpec& p, const Eigen::VectorXd& u, const Loop& g) {
  const PlotPiece& piece = p.pieces[select_piece(m, p, g)];
  Loop cur = rotate_index(g, snap_rotation(piece.rotation, g.size()));
  for (const auto& st : piece.stages) {
    if (const auto* e = std::get_if<ExpDeform>(&st))
      cur = apply_exp_deform(m, *e, u, cur);
    else if (const auto* a = std::get_if<Averaged>(&st))
      cur = apply_averaged(m, *a, u, cur);
    else {
      const auto& r = std::get<Retract>(st);
      cur = retraction(m, r.param >= 0 ? u[r.param] : r.r, cur);
    }
  }
  return cur;
}

LoopField rotate_field(const LoopField& f, long shift) {
  const long n = static_cast<long>(f.size());
  LoopField out(f.size());
  for (long i = 0; i < n; ++i) out[i] = f[static_cast<std::size_t>((((i + shift) % n) + n) % n)];
  return out;
}

void check_domain(const PlotSpec& p, const Eigen::VectorXd& u) {
  if (u.size() != p.dimension()) throw std::invalid_argument("plot: parameter vector has the wrong dimension");
  for (int j = 0; j < p.m; ++j)
    if (u[j] < p.box[j].first || u[j] > p.box[j].second) throw BoundaryError("plot: parameter outside the box");
  if (p.augmented && (u[p.m] < 0.0 || u[p.m] > 1.0)) throw BoundaryError("plot: retraction parameter outside [0,1]");
}

}  // namespace

Loop apply_plot(const Manifold& m, const PlotSpec& p, const Eigen::VectorXd& u, const Loop& g) {
  check_domain(p, u);
  Loop cur = apply_core(m, p, u.head(p.m), g);
  if (p.augmented) cur = retraction(m, u[p.m], cur);
  if (p.extended) cur = rotate_loop(m, u[p.extended_index()], cur);
  return cur;
}

LoopField loop_velocity(const Manifold& m, const Loop& g) {
  const long n = g.size();
  LoopField v(n);
  const double dn = static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const Ambient& x = g[i];
    const Ambient d1 = (m.log_map(x, g[i + 1]) - m.log_map(x, g[i - 1])) * (dn / 2.0);
    const Ambient d2 = (m.log_map(x, g[i + 2]) - m.log_map(x, g[i - 2])) * (dn / 4.0);
    v[i] = (4.0 * d1 - d2) / 3.0;
  }
  return v;
}

LoopField plot_derivative(const Manifold& m, const PlotSpec& p, const Eigen::VectorXd& u, int j,
                          const Loop& g) {
  check_domain(p, u);
  if (j < 0 || j >= p.dimension()) throw std::invalid_argument("plot_derivative: direction out of range");
  if (p.extended) {
    const int e = p.extended_index();
    if (j == e) return loop_velocity(m, apply_plot(m, p, u, g));
    const double steps = u[e] * static_cast<double>(g.size());
    const long k = std::lround(steps);
    if (std::abs(steps - static_cast<double>(k)) < 1e-9) {
      PlotSpec inner = p;
      inner.extended = false;
      return rotate_field(plot_derivative(m, inner, u.head(e), j, g), k);
    }
  } else if (p.augmented && j == p.m) {
    return radial_field(m, u[p.m], apply_core(m, p, u.head(p.m), g));
  } else if (!p.augmented) {
    const PlotPiece& piece = p.pieces[select_piece(m, p, g)];
    if (piece.stages.size() == 1 && std::holds_alternative<ExpDeform>(piece.stages[0])) {
      const auto& e = std::get<ExpDeform>(piece.stages[0]);
      if (u[j] <= p.box[j].first || u[j] >= p.box[j].second) throw BoundaryError("plot_derivative: u on the boundary");
      const Loop base = rotate_index(g, snap_rotation(piece.rotation, g.size()));
      const long n = base.size();
      LoopField out(n);
      for (long i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / n;
        const Ambient& y = base.points[i];
        Ambient v = Ambient::Zero(y.size()), w = Ambient::Zero(y.size());
        for (std::size_t k = 0; k < e.fields.size(); ++k) {
          const int pk = e.params.empty() ? static_cast<int>(k) : e.params[k];
          const Ambient vk = m.tangent_project(y, e.fields[k](s, y));
          v += u[pk] * vk;
          if (pk == j) w += vk;
        }
        out[i] = m.exp_derivative(y, v, w);
      }
      return out;
    }
  }
  // five-point central difference in u_j
  const double width = j < p.m ? p.box[j].second - p.box[j].first : 1.0;
  const double h = p.fd_scale * width;
  const double lo = j < p.m ? p.box[j].first : 0.0, hi = j < p.m ? p.box[j].second : 1.0;
  if (u[j] - 2 * h < lo || u[j] + 2 * h > hi) throw BoundaryError("plot_derivative: FD stencil leaves the box");
  auto at = [&](double off) {
    Eigen::VectorXd v = u;
    v[j] += off;
    return apply_plot(m, p, v, g);
  };
  const Loop c = apply_plot(m, p, u, g);
  const Loop p1 = at(h), m1 = at(-h), p2 = at(2 * h), m2 = at(-2 * h);
  LoopField out(c.size());
  for (long i = 0; i < c.size(); ++i) {
    const Ambient d = (8.0 * (p1.points[i] - m1.points[i]) - (p2.points[i] - m2.points[i])) / (12.0 * h);
    out[i] = m.tangent_project(c.points[i], d);
  }
  return out;
}

// ------------------------------------------------------------ retraction

Ambient chord(const Manifold& m, double r, const Ambient& x, const Ambient& y) {
  return m.exp_map(x, r * m.log_map(x, y));
}

Loop retraction(const Manifold& m, double r, const Loop& g) {
  const long n = g.size();
  Loop out;
  out.points.reserve(n);
  for (long t = 0; t < n; ++t) {
    Ambient acc = Ambient::Zero(g.points[0].size());
    for (long s = 0; s < n; ++s) acc += chord(m, r, g.points[s], g.points[t]);
    acc /= static_cast<double>(n);
    bool out_of_tube = false;
    out.points.push_back(m.project(acc, &out_of_tube));
    if (out_of_tube) throw TubeError("retraction: chord average left the projection tube");
  }
  return out;
}

LoopField radial_field(const Manifold& m, double r, const Loop& g) {
  const long n = g.size();
  LoopField out(n);
  for (long t = 0; t < n; ++t) {
    Ambient acc = Ambient::Zero(g.points[0].size());
    Ambient dacc = Ambient::Zero(g.points[0].size());
    for (long s = 0; s < n; ++s) {
      const Ambient& x = g.points[s];
      const Ambient l = m.log_map(x, g.points[t]);
      acc += m.exp_map(x, r * l);
      dacc += m.exp_derivative(x, r * l, l);
    }
    acc /= static_cast<double>(n);
    dacc /= static_cast<double>(n);
    out[t] = m.project_derivative(acc) * dacc;
  }
  return out;
}

// ---------------------------------------------------------------- output

std::string dump_plot(const PlotSpec& p) {
  std::ostringstream os;
  os << "plot tag=" << p.tag << " m=" << p.m << " depth_cap=" << p.max_depth << " fd_scale=" << p.fd_scale;
  if (p.augmented) os << " augmented";
  if (p.extended) os << " extended";
  os << "\n";
  for (int j = 0; j < p.m; ++j) os << "  u" << j << " in [" << p.box[j].first << ", " << p.box[j].second << "]\n";
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    const auto& piece = p.pieces[i];
    os << "  piece " << i << ": when " << piece.predicate.describe() << ", rotate " << piece.rotation << "\n";
    for (const auto& st : piece.stages) {
      if (const auto* e = std::get_if<ExpDeform>(&st)) {
        os << "    exp_deform";
        for (std::size_t k = 0; k < e->fields.size(); ++k)
          os << " u" << (e->params.empty() ? static_cast<int>(k) : e->params[k]) << "*" << e->fields[k].scale << "*"
             << e->fields[k].name;
        os << "\n";
      } else if (const auto* a = std::get_if<Averaged>(&st)) {
        os << "    averaged " << a->name << " arity=" << a->arity << "\n";
      } else {
        const auto& r = std::get<Retract>(st);
        os << "    retract r=" << (r.param >= 0 ? "u" + std::to_string(r.param) : std::to_string(r.r)) << "\n";
      }
    }
  }
  if (p.augmented) os << "  then retract r=u" << p.m << "\n";
  if (p.extended) os << "  then rotate t=u" << p.extended_index() << "\n";
  return os.str();
}

Loop smooth_test_loop(const Manifold& m, const std::string& name, int n) {
  Loop out;
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / n, w = kTwoPi * s;
    if (m.kind() == ManifoldKind::Torus) {
      Eigen::Vector2d th;
      if (name == "winding") th = {s + 0.1 * std::sin(w), 0.3 + 0.15 * std::cos(w) + 0.05 * std::sin(2 * w)};
      else if (name == "small") th = {0.2 + 0.06 * std::cos(w) + 0.02 * std::sin(2 * w), 0.6 + 0.05 * std::sin(w)};
      else if (name == "lobed") th = {0.5 + 0.2 * std::cos(w), 0.5 + 0.15 * std::sin(2 * w)};
      else if (name == "constant") th = {0.3, 0.7};
      else throw ConfigError("unknown test loop '" + name + "' for t2");
      out.points.push_back(m.from_coordinates(th));
    } else {
      Eigen::Vector3d x;
      if (name == "equator") x = {std::cos(w), std::sin(w), 0.0};
      else if (name == "constant") x = {0.0, 0.6, 0.8};
      else {
        const double polar = name == "tilted" ? 0.8 : name == "small" ? 0.12 : -1.0;
        if (polar < 0) throw ConfigError("unknown test loop '" + name + "' for s2");
        x = {std::sin(polar) * std::cos(w), std::sin(polar) * std::sin(w), std::cos(polar)};
        const double a = 0.4;
        x = Eigen::Vector3d(x[0], std::cos(a) * x[1] - std::sin(a) * x[2], std::sin(a) * x[1] + std::cos(a) * x[2]);
      }
      Ambient p(3);
      p << x[0], x[1], x[2];
      out.points.push_back(p);
    }
  }
  return out;
}

}  // namespace eqloop
