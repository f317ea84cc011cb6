#pragma once

// Exact rational arithmetic used for every probability, reward and value.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aixi {

using rational = mpq_class;

/// Parses "p/q", "p" or a plain decimal such as "0.25" into a canonical rational.
inline rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    if (s.find('/') != std::string::npos) throw std::invalid_argument("bad rational literal: " + s);
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::string denom = "1" + std::string(s.size() - dot - 1, '0');
    if (digits.empty() || digits == "-") throw std::invalid_argument("bad rational literal: " + s);
    s = digits + "/" + denom;
  }
  rational r;
  if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + std::string(text));
  if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
  r.canonicalize();
  return r;
}

/// num/den in lowest terms; the two-argument mpq constructor does not reduce.
inline rational ratio(const mpz_class& num, const mpz_class& den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  rational r(num, den);
  r.canonicalize();
  return r;
}

/// Always renders as "p/q" (q = 1 for integers) so the output is unambiguous.
inline std::string format_rational(const rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Short form for human-readable output: "p" for integers, "p/q" otherwise.
inline std::string short_rational(const rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return format_rational(r);
}

inline rational pow(const rational& base, std::size_t exponent) {
  rational result = 1;
  rational b = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= b;
    b *= b;
    exponent >>= 1U;
  }
  return result;
}

/// 2^(-bits)
inline rational dyadic_weight(std::size_t bits) {
  mpz_class den = 1;
  den <<= static_cast<mp_bitcnt_t>(bits);
  return rational(mpz_class(1), den);
}

/// Rational brackets around ln 2 = 0.693147180559945309417...
inline rational ln2_lower() { return rational(mpz_class("6931471805599453"), mpz_class("10000000000000000")); }
inline rational ln2_upper() { return rational(mpz_class("6931471805599454"), mpz_class("10000000000000000")); }

/// Largest multiple of 2^-precision whose square does not exceed x (x >= 0).
inline rational sqrt_lower(const rational& x, unsigned precision = 40) {
  if (x < 0) throw std::domain_error("sqrt of negative rational");
  if (x == 0) return 0;
  mpz_class scale = 1;
  scale <<= precision;
  // floor(sqrt(x * 4^precision)) / 2^precision, computed exactly.
  rational scaled = x * rational(scale * scale);
  mpz_class floor_scaled = scaled.get_num() / scaled.get_den();
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), floor_scaled.get_mpz_t());
  return ratio(root, scale);
}

/// Smallest multiple of 2^-precision whose square is at least x (x >= 0).
inline rational sqrt_upper(const rational& x, unsigned precision = 40) {
  rational lo = sqrt_lower(x, precision);
  if (lo * lo == x) return lo;
  mpz_class scale = 1;
  scale <<= precision;
  return lo + rational(mpz_class(1), scale);
}

inline double to_double(const rational& r) { return r.get_d(); }

}  // namespace aixi
