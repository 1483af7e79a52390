#include "votersim/rational.hpp"

#include <cmath>

#include "votersim/error.hpp"

namespace votersim {

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.empty()) throw Error(Errc::ParseError, "empty rational");
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      BigInt n(s.substr(0, slash));
      BigInt d(s.substr(slash + 1));
      if (d == 0) throw Error(Errc::ParseError, "zero denominator in '" + text + "'");
      return Rational(n, d);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(BigInt(s));
    bool neg = s[0] == '-';
    std::string digits = s.substr(neg || s[0] == '+' ? 1 : 0);
    dot = digits.find('.');
    std::string whole = digits.substr(0, dot);
    std::string frac = digits.substr(dot + 1);
    if (whole.empty()) whole = "0";
    BigInt num(whole + frac);
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    Rational r(num, den);
    return neg ? Rational(-r) : r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(Errc::ParseError, "not a rational: '" + text + "'");
  }
}

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "non-finite value");
  int exp = 0;
  double m = std::frexp(x, &exp);
  auto mant = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  Rational r{BigInt(mant)};
  if (exp > 0) r *= Rational(BigInt(1) << exp);
  else if (exp < 0) r /= Rational(BigInt(1) << -exp);
  return r;
}

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace votersim
