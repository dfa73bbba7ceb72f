#include "eqloop/cyclic.hpp"

#include <map>
#include <numeric>

#include "eqloop/errors.hpp"

namespace eqloop {

std::vector<int> FormWord::degrees() const {
  std::vector<int> p;
  p.reserve(slots.size());
  for (const auto& s : slots) p.push_back(s.degree());
  return p;
}

bool FormWord::is_degenerate() const {
  for (std::size_t i = 1; i < slots.size(); ++i) {
    const auto& s = slots[i];
    if (s.is_zero()) return true;
    if (s.degree() == 0 && s.terms().size() == 1 && s.terms().begin()->second.is_constant()) return true;
  }
  return !slots.empty() && slots.front().is_zero();
}

std::string FormWord::label() const {
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i) out += "(x)";
    out += i < labels.size() && !labels[i].empty() ? labels[i] : "w" + std::to_string(slots[i].degree());
  }
  return out;
}

int word_degree(const FormWord& w) {
  if (w.slots.empty()) throw DegreeError("empty word");
  int deg = w.slots[0].degree();
  for (std::size_t i = 1; i < w.slots.size(); ++i) deg += w.slots[i].degree() - 1;
  return deg;
}

void Chain::add(double coeff, FormWord w) {
  if (coeff == 0.0 || w.slots.empty() || w.is_degenerate()) return;
  terms_.emplace_back(coeff, std::move(w));
}

void Chain::add(const Chain& other, double scale) {
  for (const auto& [c, w] : other.terms_) add(scale * c, w);
}

int Chain::parity() const {
  if (terms_.empty()) return 0;
  const int p = word_degree(terms_.front().second) & 1;
  for (const auto& [c, w] : terms_)
    if ((word_degree(w) & 1) != p) throw ParityError("chain mixes even and odd words");
  return p;
}

namespace {

double sign_of(int e) { return (e & 1) ? -1.0 : 1.0; }

FormWord with_slots(const FormWord& base, std::vector<DifferentialForm> slots, std::vector<std::string> labels) {
  FormWord w(std::move(slots));
  if (!base.labels.empty()) w.labels = std::move(labels);
  return w;
}

std::string lab(const FormWord& w, std::size_t i) { return i < w.labels.size() ? w.labels[i] : std::string(); }

}  // namespace

Chain hochschild_b(const Chain& c) {
  Chain out;
  for (const auto& [coef, w] : c.terms()) {
    const auto p = w.degrees();
    const std::size_t n = p.size();
    // s[i] = (-1)^{p_1 + Σ_{2≤j<i} (p_j - 1)} for slot i (0-based index i ≥ 1)
    std::vector<int> s_exp(n, 0);
    if (n > 1) {
      s_exp[1] = p[0];
      for (std::size_t i = 2; i < n; ++i) s_exp[i] = s_exp[i - 1] + p[i - 1] - 1;
    }
    // per-slot exterior derivative
    for (std::size_t i = 0; i < n; ++i) {
      DifferentialForm dw = d(w.slots[i]);
      if (dw.is_zero()) continue;
      auto slots = w.slots;
      slots[i] = dw;
      auto labels = w.labels;
      if (!labels.empty()) labels[i] = "d" + lab(w, i);
      const double sg = i == 0 ? 1.0 : -sign_of(s_exp[i]);
      out.add(coef * sg, with_slots(w, std::move(slots), std::move(labels)));
    }
    // adjacent products ω_i ∧ ω_{i+1}
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::vector<DifferentialForm> slots;
      std::vector<std::string> labels;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i + 1) continue;
        if (j == i) {
          slots.push_back(wedge(w.slots[i], w.slots[i + 1]));
          labels.push_back(lab(w, i) + "^" + lab(w, i + 1));
        } else {
          slots.push_back(w.slots[j]);
          labels.push_back(lab(w, j));
        }
      }
      out.add(coef * -sign_of(s_exp[i + 1]), with_slots(w, std::move(slots), std::move(labels)));
    }
    // wrap-around product ω_n ∧ ω₁
    if (n >= 2) {
      int q_mid = 0;
      for (std::size_t j = 1; j + 1 < n; ++j) q_mid += p[j] - 1;
      const int e = s_exp[n - 1] + p[n - 1] * q_mid + p[0] * p[n - 1];
      std::vector<DifferentialForm> slots{wedge(w.slots[n - 1], w.slots[0])};
      std::vector<std::string> labels{lab(w, n - 1) + "^" + lab(w, 0)};
      for (std::size_t j = 1; j + 1 < n; ++j) {
        slots.push_back(w.slots[j]);
        labels.push_back(lab(w, j));
      }
      out.add(coef * sign_of(e), with_slots(w, std::move(slots), std::move(labels)));
    }
  }
  return out;
}

Chain connes_B(const Chain& c) {
  Chain out;
  for (const auto& [coef, w] : c.terms()) {
    const std::size_t n = w.size();
    const int dim = w.slots[0].ambient_dim();
    std::vector<int> q;
    for (const auto& s : w.slots) q.push_back(s.degree() - 1);
    const int total = std::accumulate(q.begin(), q.end(), 0);
    int before = 0;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<DifferentialForm> slots{DifferentialForm::scalar(dim, 1.0)};
      std::vector<std::string> labels{"1"};
      for (std::size_t k = 0; k < n; ++k) {
        slots.push_back(w.slots[(j + k) % n]);
        labels.push_back(lab(w, (j + k) % n));
      }
      out.add(coef * sign_of(before * (total - before)), with_slots(w, std::move(slots), std::move(labels)));
      before += q[j];
    }
  }
  return out;
}

Chain cyclic_d(const Chain& c) {
  Chain out = hochschild_b(c);
  out.add(connes_B(c));
  return out;
}

double pointwise_residual(const Manifold& m, const Chain& c, int samples, unsigned long long seed) {
  std::map<std::vector<int>, std::vector<const std::pair<double, FormWord>*>> shapes;
  for (const auto& t : c.terms()) shapes[t.second.degrees()].push_back(&t);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (const auto& [shape, terms] : shapes) {
    for (int s = 0; s < samples; ++s) {
      const std::size_t n = shape.size();
      std::vector<Ambient> pts(n), alt(n);
      std::vector<std::vector<Ambient>> vecs(n);
      for (std::size_t i = 0; i < n; ++i) {
        pts[i] = m.random_point(rng);
        alt[i] = m.random_point(rng);
        for (int k = 0; k < shape[i]; ++k) vecs[i].push_back(m.random_tangent(pts[i], 1.0, rng));
      }
      double sum = 0.0;
      for (const auto* t : terms) {
        double prod = t->first;
        for (std::size_t i = 0; i < n && prod != 0.0; ++i) {
          const auto& f = t->second.slots[i];
          if (i > 0 && f.degree() == 0)
            prod *= f.eval(pts[i]) - f.eval(alt[i]);
          else
            prod *= f.eval(pts[i], vecs[i]);
        }
        sum += prod;
      }
      worst = std::max(worst, std::abs(sum));
    }
  }
  return worst;
}

Chain random_chain(const Manifold& m, std::mt19937_64& rng, int max_len, int terms) {
  std::vector<std::pair<std::string, DifferentialForm>> functions, positive;
  for (const auto& name : form_catalog_names(m)) {
    if (name == "zero" || name == "one") continue;
    DifferentialForm f = form_catalog(m, name);
    (f.degree() == 0 ? functions : positive).emplace_back(name, f);
  }
  std::vector<std::pair<std::string, DifferentialForm>> all = functions;
  all.insert(all.end(), positive.begin(), positive.end());
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::bernoulli_distribution scale(0.3);
  auto pick = [&](const auto& pool) {
    auto [name, f] = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    if (scale(rng)) {
      const auto& [gname, g] = functions[std::uniform_int_distribution<std::size_t>(0, functions.size() - 1)(rng)];
      f = g.terms().begin()->second * f;
      name = gname + "*" + name;
    }
    return std::make_pair(name, f);
  };
  Chain c;
  int parity = -1;
  while (static_cast<int>(c.terms().size()) < terms) {
    FormWord w;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      auto [name, f] = i == 0 ? pick(all) : pick(positive);
      w.slots.push_back(f);
      w.labels.push_back(name);
    }
    const int p = word_degree(w) & 1;
    if (parity < 0) parity = p;
    if (p != parity) continue;
    c.add(coef(rng), std::move(w));
  }
  return c;
}

}  // namespace eqloop
