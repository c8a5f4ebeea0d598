#include "robustnet/rational.h"

#include <cctype>
#include <cmath>

#include "robustnet/errors.h"

namespace robustnet {
namespace {

bool AllDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class ParseInteger(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!AllDigits(s)) {
    throw StructuralError("malformed rational '" + std::string(whole) + "'");
  }
  mpz_class z(std::string(s), 10);
  return negative ? mpz_class(-z) : z;
}

}  // namespace

Rational ParseRational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw StructuralError("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = ParseInteger(text.substr(0, slash), text);
    std::string_view den_text = text.substr(slash + 1);
    if (!AllDigits(den_text)) {
      throw StructuralError("malformed rational '" + std::string(text) + "'");
    }
    mpz_class den(std::string(den_text), 10);
    if (den == 0) throw StructuralError("zero denominator in '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }

  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    bool negative = !int_part.empty() && int_part.front() == '-';
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) {
      int_part.remove_prefix(1);
    }
    if ((!int_part.empty() && !AllDigits(int_part)) || (!frac_part.empty() && !AllDigits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw StructuralError("malformed rational '" + std::string(text) + "'");
    }
    mpz_class whole = int_part.empty() ? mpz_class(0) : mpz_class(std::string(int_part), 10);
    mpz_class frac = frac_part.empty() ? mpz_class(0) : mpz_class(std::string(frac_part), 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
    Rational q(whole * scale + frac, scale);
    q.canonicalize();
    return negative ? Rational(-q) : q;
  }

  return Rational(ParseInteger(text, text));
}

std::string FormatRational(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational RationalFromDouble(double x) {
  if (!std::isfinite(x)) throw StructuralError("non-finite value cannot become a rational");
  Rational q(x);
  q.canonicalize();
  return q;
}

Rational SnapToRational(double x, long max_denominator, double tolerance) {
  if (!std::isfinite(x)) throw StructuralError("non-finite value cannot become a rational");
  // Convergents h/k of the continued fraction of |x|.
  const double a = std::abs(x);
  long h_prev = 1, h = static_cast<long>(std::floor(a));
  long k_prev = 0, k = 1;
  double rest = a - std::floor(a);
  while (true) {
    if (std::abs(static_cast<double>(h) / k - a) <= tolerance) {
      return MakeRational(x < 0 ? -h : h, k);
    }
    if (rest < 1e-15) break;
    const double inv = 1.0 / rest;
    const long term = static_cast<long>(std::floor(inv));
    rest = inv - std::floor(inv);
    const long k_next = term * k + k_prev;
    if (k_next > max_denominator || term > max_denominator) break;
    const long h_next = term * h + h_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return RationalFromDouble(x);
}

}  // namespace robustnet
