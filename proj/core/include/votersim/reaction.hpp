#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "votersim/rational.hpp"

namespace votersim {

// Coefficients c[0] + c[1] u + c[2] u^2 + ...
template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

  const std::vector<T>& coeffs() const { return c_; }
  T coeff(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for the zero polynomial
  bool is_zero() const { return c_.empty(); }

  T operator()(const T& u) const {
    T r(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * u + *it;
    return r;
  }

  Polynomial derivative() const {
    std::vector<T> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * T(static_cast<int>(i)));
    return Polynomial(std::move(d));
  }

  Polynomial antiderivative() const {
    std::vector<T> a{T(0)};
    for (std::size_t i = 0; i < c_.size(); ++i) a.push_back(c_[i] / T(static_cast<int>(i + 1)));
    return Polynomial(std::move(a));
  }

  T integral(const T& a, const T& b) const {
    auto F = antiderivative();
    return F(b) - F(a);
  }

  friend Polynomial operator+(const Polynomial& x, const Polynomial& y) {
    std::vector<T> r(std::max(x.c_.size(), y.c_.size()), T(0));
    for (std::size_t i = 0; i < x.c_.size(); ++i) r[i] += x.c_[i];
    for (std::size_t i = 0; i < y.c_.size(); ++i) r[i] += y.c_[i];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator-(const Polynomial& x, const Polynomial& y) { return x + y * Polynomial({T(-1)}); }
  friend Polynomial operator*(const Polynomial& x, const Polynomial& y) {
    if (x.is_zero() || y.is_zero()) return {};
    std::vector<T> r(x.c_.size() + y.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < x.c_.size(); ++i)
      for (std::size_t j = 0; j < y.c_.size(); ++j) r[i + j] += x.c_[i] * y.c_[j];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const T& s, const Polynomial& x) { return Polynomial({s}) * x; }
  bool operator==(const Polynomial&) const = default;

 private:
  void trim() {
    while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
  }
  std::vector<T> c_;
};

using RationalPoly = Polynomial<Rational>;
using RealPoly = Polynomial<double>;

RealPoly to_real(const RationalPoly& p);
// u^a (1-u)^b
RationalPoly bernstein_monomial(int a, int b);

enum class Provenance { closed_form, monte_carlo };

struct ReactionPolynomial {
  RealPoly f;
  std::vector<double> stderrs;  // per coefficient; empty when exact
  std::optional<RationalPoly> exact;
  Provenance provenance = Provenance::closed_form;
  std::string source;

  double operator()(double u) const { return f(u); }
  double coeff(std::size_t i) const { return f.coeff(i); }
  double stderr_of(std::size_t i) const { return i < stderrs.size() ? stderrs[i] : 0.0; }
};

ReactionPolynomial exact_reaction(const RationalPoly& p, std::string source);

enum class PhaseLabel { R1, R2, R3, R4, R5, cooperators, defectors, case1, case2, case3, case4A, case4B, boundary };
std::string_view label_name(PhaseLabel l);

// f(u) = u(1-u)[θ0 p2 - θ1(p2+p3) + u p3(θ0+θ1)]
ReactionPolynomial lv_f(double theta0, double theta1, double p2, double p3, double se2 = 0, double se3 = 0);
std::optional<double> lv_ustar(double theta0, double theta1, double p2, double p3);
PhaseLabel lv_phase(double theta0, double theta1, double m0);

// Shrunken versions of R1, R2 ∪ R4 and R3 ∪ R5 in the competition
// parameters (alpha0, alpha1) near (1, 1), for eta in [0, 1).
bool lv_coexist_region(double alpha0, double alpha1, double m0, double eta);
bool lv_ones_region(double alpha0, double alpha1, double m0, double eta);
bool lv_zeros_region(double alpha0, double alpha1, double m0, double eta);

ReactionPolynomial coop_f(double alpha, double beta, double gamma, double delta, int k, double p01, double p122,
                          double p123);
PhaseLabel coop_rule(double b, double c, int k);

struct NlvCoefficients {
  Rational b1, b2;
};
NlvCoefficients nlv_b(const std::array<Rational, 4>& a);
RationalPoly nlv_f1(const std::array<Rational, 4>& a);
RationalPoly nlv_flambda(const std::array<Rational, 4>& a, const Rational& lambda);
PhaseLabel nlv_phase(const Rational& b1, const Rational& b2);
PhaseLabel nlv_phase(double b1, double b2, double tol = 1e-9);

// Number of distinct real roots in (a, b] by Sturm's theorem.
int sturm_count(const RealPoly& p, double a, double b);
// Simple roots in the open interval (0, 1), sorted. Throws IdenticallyZero
// for the zero polynomial and NonSimpleRoot for a repeated interior root.
std::vector<double> roots_in_unit_interval(const RealPoly& p, double tol = 1e-12);

}  // namespace votersim
