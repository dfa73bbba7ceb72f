#pragma once

#include <random>
#include <string>
#include <vector>

#include "eqloop/forms.hpp"

namespace eqloop {

/// Tensor word ω₁ ⊗ ω₂ ⊗ … ⊗ ω_n. Slots 2..n live in forms modulo
/// constants: a constant 0-form there makes the word degenerate (zero in
/// the normalized complex).
struct FormWord {
  std::vector<DifferentialForm> slots;
  std::vector<std::string> labels;  // optional, for reports

  FormWord() = default;
  explicit FormWord(std::vector<DifferentialForm> s) : slots(std::move(s)) {}
  std::size_t size() const { return slots.size(); }
  std::vector<int> degrees() const;
  bool is_degenerate() const;
  std::string label() const;
};

/// deg ω₁ + Σ_{i≥2} (deg ω_i − 1).
int word_degree(const FormWord& w);

/// Finite real linear combination of words of one parity.
class Chain {
 public:
  Chain() = default;
  explicit Chain(FormWord w, double coeff = 1.0) { add(coeff, std::move(w)); }

  void add(double coeff, FormWord w);
  void add(const Chain& other, double scale = 1.0);
  const std::vector<std::pair<double, FormWord>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// 0 or 1; throws ParityError for mixed chains, returns 0 for the empty chain.
  int parity() const;

 private:
  std::vector<std::pair<double, FormWord>> terms_;
};

Chain hochschild_b(const Chain& c);
Chain connes_B(const Chain& c);
Chain cyclic_d(const Chain& c);

/// Largest |Σ coeff · Π_i ω_i(x_i; v_i…)| over random samples, where terms are
/// grouped by shape (word length and slot degrees) and every slot gets its
/// own random point on M and its own random tangent vectors. 0-forms in
/// slots ≥ 2 are evaluated as differences f(x_i) − f(x_i′), which is the
/// evaluation on forms modulo constants. A chain is zero as a tensor iff
/// this vanishes for all samples.
double pointwise_residual(const Manifold& m, const Chain& c, int samples, unsigned long long seed);

/// Random chain of `terms` words with lengths 1..max_len from the manifold's
/// form catalog; slots ≥ 2 hold forms of positive degree.
Chain random_chain(const Manifold& m, std::mt19937_64& rng, int max_len, int terms);

}  // namespace eqloop
