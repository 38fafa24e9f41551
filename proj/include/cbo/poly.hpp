#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "cbo/core.hpp"

namespace cbo {

/// Dense complex polynomial; coeffs[k] multiplies z^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  std::span<const cplx> coeffs() const { return c_; }
  cplx operator[](int k) const { return k <= degree() ? c_[k] : cplx{}; }
  cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }

  cplx operator()(cplx z) const {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Value and first derivative in one Horner pass.
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const {
    cplx p{}, dp{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return {p, dp};
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial{};
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.c_.empty() || q.c_.empty()) return Polynomial{};
    std::vector<cplx> r(p.c_.size() + q.c_.size() - 1);
    for (std::size_t i = 0; i < p.c_.size(); ++i)
      for (std::size_t j = 0; j < q.c_.size(); ++j) r[i + j] += p.c_[i] * q.c_[j];
    return Polynomial(std::move(r));
  }

  friend Polynomial operator-(const Polynomial& p, const Polynomial& q) {
    std::vector<cplx> r(std::max(p.c_.size(), q.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = p[static_cast<int>(i)] - q[static_cast<int>(i)];
    return Polynomial(std::move(r));
  }

  /// All roots: companion-matrix eigenvalues, each polished by a few Newton steps.
  std::vector<cplx> roots() const {
    const int n = degree();
    if (n < 1) return {};
    const cplx lead = leading();
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c_[i] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    std::vector<cplx> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    for (auto& r : out) {
      for (int it = 0; it < 4; ++it) {
        auto [p, dp] = eval_with_derivative(r);
        if (std::abs(dp) == 0.0) break;
        const cplx step = p / dp;
        if (!is_finite(step) || std::abs(step) > 1e-3 * (1.0 + std::abs(r))) break;
        r -= step;
      }
    }
    std::sort(out.begin(), out.end(), [](cplx x, cplx y) {
      return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return out;
  }

 private:
  void trim() {
    while (c_.size() > 1 && c_.back() == cplx{}) c_.pop_back();
  }

  std::vector<cplx> c_;
};

}  // namespace cbo
