#include "votersim/reaction.hpp"

#include <algorithm>
#include <cmath>

#include "votersim/error.hpp"

namespace votersim {

RealPoly to_real(const RationalPoly& p) {
  std::vector<double> c;
  for (const auto& x : p.coeffs()) c.push_back(to_double(x));
  return RealPoly(std::move(c));
}

RationalPoly bernstein_monomial(int a, int b) {
  RationalPoly r({Rational(1)});
  for (int i = 0; i < a; ++i) r = r * RationalPoly({Rational(0), Rational(1)});
  for (int i = 0; i < b; ++i) r = r * RationalPoly({Rational(1), Rational(-1)});
  return r;
}

ReactionPolynomial exact_reaction(const RationalPoly& p, std::string source) {
  ReactionPolynomial r;
  r.f = to_real(p);
  r.exact = p;
  r.provenance = Provenance::closed_form;
  r.source = std::move(source);
  return r;
}

std::string_view label_name(PhaseLabel l) {
  switch (l) {
    case PhaseLabel::R1: return "R1";
    case PhaseLabel::R2: return "R2";
    case PhaseLabel::R3: return "R3";
    case PhaseLabel::R4: return "R4";
    case PhaseLabel::R5: return "R5";
    case PhaseLabel::cooperators: return "cooperators";
    case PhaseLabel::defectors: return "defectors";
    case PhaseLabel::case1: return "case1";
    case PhaseLabel::case2: return "case2";
    case PhaseLabel::case3: return "case3";
    case PhaseLabel::case4A: return "case4A";
    case PhaseLabel::case4B: return "case4B";
    case PhaseLabel::boundary: return "boundary";
  }
  return "boundary";
}

ReactionPolynomial lv_f(double theta0, double theta1, double p2, double p3, double se2, double se3) {
  const double A = theta0 * p2 - theta1 * (p2 + p3);
  const double B = p3 * (theta0 + theta1);
  ReactionPolynomial r;
  r.f = RealPoly({0.0, A, B - A, -B});
  r.provenance = (se2 > 0 || se3 > 0) ? Provenance::monte_carlo : Provenance::closed_form;
  r.source = "lv_f";
  if (r.provenance == Provenance::monte_carlo) {
    const double d = theta0 - theta1;
    r.stderrs = {0.0, std::hypot(d * se2, theta1 * se3), std::hypot(d * se2, (theta0 + 2 * theta1) * se3),
                 std::abs(theta0 + theta1) * se3};
  }
  return r;
}

std::optional<double> lv_ustar(double theta0, double theta1, double p2, double p3) {
  if (std::abs(theta0 + theta1) <= 1e-12) throw Error(Errc::DegenerateSum, "theta0 + theta1 = 0: no interior root");
  double u = (theta1 * (p2 + p3) - theta0 * p2) / (p3 * (theta0 + theta1));
  if (u > 0 && u < 1) return u;
  return std::nullopt;
}

PhaseLabel lv_phase(double theta0, double theta1, double m0) {
  constexpr double tol = 1e-9;
  if (!(m0 > 0 && m0 < 1)) throw Error(Errc::InvalidArgument, "m0 must lie in (0, 1)");
  const double left = theta1 - m0 * theta0;   // f'(0) > 0 iff left < 0
  const double right = theta0 - m0 * theta1;  // f(1-) < 0 iff right < 0
  if (std::abs(left) <= tol || std::abs(right) <= tol) return PhaseLabel::boundary;
  if (left < 0 && right < 0) return PhaseLabel::R1;
  if (left > 0 && right < 0) return PhaseLabel::R2;
  if (left < 0 && right > 0) return PhaseLabel::R3;
  if (std::abs(theta1 - theta0) <= tol) return PhaseLabel::boundary;
  return theta1 > theta0 ? PhaseLabel::R4 : PhaseLabel::R5;
}

ReactionPolynomial coop_f(double alpha, double beta, double gamma, double delta, int k, double p01, double p122,
                          double p123) {
  const double Q = k * ((beta - delta) + (gamma - delta) / k) * p01;
  const double C = k * ((alpha - beta) - (gamma - delta));
  ReactionPolynomial r;
  r.f = RealPoly({0.0, Q + C * p122, -Q - C * p122 + C * p123, -C * p123});
  r.provenance = Provenance::closed_form;
  r.source = "coop_f";
  return r;
}

namespace {

void check_region_args(double m0, double eta) {
  if (!(m0 > 0 && m0 < 1)) throw Error(Errc::InvalidArgument, "m0 must lie in (0, 1)");
  if (!(eta >= 0 && eta < 1)) throw Error(Errc::InvalidArgument, "eta must lie in [0, 1)");
}

}  // namespace

bool lv_coexist_region(double alpha0, double alpha1, double m0, double eta) {
  check_region_args(m0, eta);
  if (alpha0 < 0 || alpha0 > 1 || alpha1 < 0 || alpha1 > 1) return false;
  const double x = alpha0 - 1, y = alpha1 - 1;
  return x * (1 - eta) / m0 < y && y < m0 * x / (1 - eta);
}

bool lv_ones_region(double alpha0, double alpha1, double m0, double eta) {
  check_region_args(m0, eta);
  if (!(alpha0 > 0 && alpha1 > 0)) return false;
  const double x = alpha0 - 1, y = alpha1 - 1;
  if (alpha0 <= 1 && y < x / (m0 * (1 - eta))) return true;
  return alpha0 >= 1 && y < (1 - eta) * x;
}

bool lv_zeros_region(double alpha0, double alpha1, double m0, double eta) {
  check_region_args(m0, eta);
  if (!(alpha0 > 0 && alpha1 > 0)) return false;
  const double x = alpha0 - 1, y = alpha1 - 1;
  if (alpha0 <= 1 && m0 * (1 - eta) * x < y) return true;
  return alpha0 >= 1 && (1 + eta) * x < y;
}

PhaseLabel coop_rule(double b, double c, int k) {
  if (!(c > 0) || b < 0) throw Error(Errc::InvalidArgument, "coop_rule needs b >= 0 and c > 0");
  double lhs = b, rhs = k * c;
  if (lhs > rhs) return PhaseLabel::cooperators;
  if (lhs < rhs) return PhaseLabel::defectors;
  return PhaseLabel::boundary;
}

NlvCoefficients nlv_b(const std::array<Rational, 4>& a) {
  return {4 * a[0] - a[3], 6 * a[1] - 4 * a[2]};
}

RationalPoly nlv_f1(const std::array<Rational, 4>& a) {
  auto [b1, b2] = nlv_b(a);
  return b1 * bernstein_monomial(1, 4) + b2 * bernstein_monomial(2, 3) - b2 * bernstein_monomial(3, 2) -
         b1 * bernstein_monomial(4, 1);
}

RationalPoly nlv_flambda(const std::array<Rational, 4>& a, const Rational& lambda) {
  auto [b1, b2] = nlv_b(a);
  return Rational(b1 + 4 * lambda * a[0]) * bernstein_monomial(1, 4) +
         Rational(b2 + 6 * lambda * a[1]) * bernstein_monomial(2, 3) -
         Rational(b2 - 4 * lambda * a[2]) * bernstein_monomial(3, 2) -
         Rational(b1 - lambda * a[3]) * bernstein_monomial(4, 1);
}

namespace {

template <class T>
PhaseLabel nlv_classify(const T& b1, const T& b2, auto&& is_zero) {
  const T s3 = 3 * b1 + b2;
  const T s5 = 5 * b1 + b2;
  if (is_zero(b1) || is_zero(s3)) return PhaseLabel::boundary;
  if (b1 > 0) return s3 > 0 ? PhaseLabel::case1 : PhaseLabel::case2;
  if (s3 < 0) return PhaseLabel::case3;
  if (is_zero(s5)) return PhaseLabel::boundary;
  return s5 > 0 ? PhaseLabel::case4A : PhaseLabel::case4B;
}

using LPoly = std::vector<long double>;

void ltrim(LPoly& p, long double eps) {
  long double scale = 0;
  for (auto c : p) scale = std::max(scale, std::abs(c));
  while (!p.empty() && std::abs(p.back()) <= eps * scale) p.pop_back();
}

void normalize(LPoly& p) {
  long double scale = 0;
  for (auto c : p) scale = std::max(scale, std::abs(c));
  if (scale > 0)
    for (auto& c : p) c /= scale;
}

long double leval(const LPoly& p, long double x) {
  long double r = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

LPoly lremainder(LPoly a, const LPoly& b) {
  while (a.size() >= b.size() && !a.empty()) {
    long double q = a.back() / b.back();
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= q * b[i];
    a.pop_back();
  }
  return a;
}

std::vector<LPoly> sturm_sequence(const RealPoly& p) {
  std::vector<LPoly> seq;
  LPoly p0(p.coeffs().begin(), p.coeffs().end());
  normalize(p0);
  LPoly p1;
  for (std::size_t i = 1; i < p0.size(); ++i) p1.push_back(p0[i] * static_cast<long double>(i));
  ltrim(p1, 0);
  normalize(p1);
  seq.push_back(p0);
  if (p1.empty()) return seq;
  seq.push_back(p1);
  while (true) {
    LPoly r = lremainder(seq[seq.size() - 2], seq.back());
    for (auto& c : r) c = -c;
    ltrim(r, 0);
    long double scale = 0;
    for (auto c : r) scale = std::max(scale, std::abs(c));
    if (r.empty() || scale <= 1e-13L) break;
    normalize(r);
    seq.push_back(r);
    if (r.size() == 1) break;
  }
  return seq;
}

int variations(const std::vector<LPoly>& seq, long double x) {
  int v = 0, last = 0;
  for (const auto& q : seq) {
    long double y = leval(q, x);
    int s = (y > 0) - (y < 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++v;
    last = s;
  }
  return v;
}

}  // namespace

PhaseLabel nlv_phase(const Rational& b1, const Rational& b2) {
  return nlv_classify(b1, b2, [](const Rational& x) { return x == 0; });
}

PhaseLabel nlv_phase(double b1, double b2, double tol) {
  return nlv_classify(b1, b2, [tol](double x) { return std::abs(x) <= tol; });
}

int sturm_count(const RealPoly& p, double a, double b) {
  if (p.is_zero()) throw Error(Errc::IdenticallyZero, "zero polynomial");
  auto seq = sturm_sequence(p);
  return variations(seq, a) - variations(seq, b);
}

std::vector<double> roots_in_unit_interval(const RealPoly& p, double tol) {
  if (p.is_zero()) throw Error(Errc::IdenticallyZero, "polynomial is identically zero");
  double scale = 0;
  for (double c : p.coeffs()) scale = std::max(scale, std::abs(c));
  if (scale == 0) throw Error(Errc::IdenticallyZero, "polynomial is identically zero");
  std::vector<double> c;
  for (double x : p.coeffs()) c.push_back(x / scale);
  // factor out roots at the endpoints; they are not interior
  while (c.size() > 1 && std::abs(c[0]) <= 1e-14) c.erase(c.begin());
  while (c.size() > 1) {
    double at1 = 0;
    for (double x : c) at1 += x;
    if (std::abs(at1) > 1e-13) break;
    std::vector<double> q(c.size() - 1);
    double carry = 0;
    for (std::size_t i = c.size() - 1; i >= 1; --i) {
      carry += c[i];
      q[i - 1] = carry;
    }
    c = q;
  }
  RealPoly q(c);
  if (q.degree() < 1) return {};
  auto seq = sturm_sequence(q);
  RealPoly dq = q.derivative();
  double dscale = 0;
  for (double x : dq.coeffs()) dscale = std::max(dscale, std::abs(x));

  std::vector<double> roots;
  struct Interval {
    double a, b;
  };
  std::vector<Interval> stack{{0.0, 1.0}};
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    int n = variations(seq, a) - variations(seq, b);
    if (n <= 0) continue;
    if (n > 1) {
      if (b - a < tol) throw Error(Errc::NonSimpleRoot, "roots cannot be separated at this tolerance");
      double m = a + 0.4987654321 * (b - a);
      stack.push_back({m, b});
      stack.push_back({a, m});
      continue;
    }
    double fa = q(a), fb = q(b);
    double r;
    if (fb == 0) {
      r = b;
    } else if ((fa < 0) != (fb < 0) && fa != 0) {
      double lo = a, hi = b;
      while (hi - lo > tol) {
        double m = 0.5 * (lo + hi);
        double fm = q(m);
        if (fm == 0) {
          lo = hi = m;
          break;
        }
        if ((fm < 0) == (fa < 0)) lo = m;
        else hi = m;
      }
      r = 0.5 * (lo + hi);
    } else {
      throw Error(Errc::NonSimpleRoot, "root of even multiplicity in (0, 1)");
    }
    if (std::abs(dq(r)) <= 1e-9 * std::max(dscale, 1.0))
      throw Error(Errc::NonSimpleRoot, "root of odd multiplicity > 1 in (0, 1)");
    if (r > 0 && r < 1) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace votersim
