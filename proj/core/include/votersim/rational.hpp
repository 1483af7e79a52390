#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace votersim {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Accepts "n", "n/m", or a decimal literal such as "0.25".
Rational parse_rational(const std::string& text);

// Exact value of a finite double.
Rational exact_rational(double x);

std::string to_string(const Rational& r);

}  // namespace votersim
