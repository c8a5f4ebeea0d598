#ifndef ROBUSTNET_RATIONAL_H_
#define ROBUSTNET_RATIONAL_H_

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace robustnet {

// Exact arbitrary-precision rational. Costs and capacities live here so that
// sums like n * (1/beta) * beta stay exact.
using Rational = mpq_class;

// Accepts "p/q", an integer, or a finite decimal ("0.125", "-3.5e-2" is not
// accepted). Throws StructuralError on malformed text or a zero denominator.
Rational ParseRational(std::string_view text);

// Canonical text: "p" for integers, "p/q" otherwise.
std::string FormatRational(const Rational& value);

// Exact conversion of the binary value of x. Throws on NaN/inf.
Rational RationalFromDouble(double x);

// Continued-fraction convergent of x with denominator <= max_denominator
// that lies within `tolerance` of x; the exact binary value if none does.
// Recovers the rationals behind LP vertex values.
Rational SnapToRational(double x, long max_denominator = 1000000, double tolerance = 1e-9);

// Canonical p/q. mpq_class(p, q) alone is not reduced, and gmp comparisons
// and arithmetic require reduced operands.
inline Rational MakeRational(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline double ToDouble(const Rational& value) { return value.get_d(); }

}  // namespace robustnet

#endif  // ROBUSTNET_RATIONAL_H_
