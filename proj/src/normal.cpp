#include "quadinfer/normal.hpp"

#include <cmath>

#include "quadinfer/errors.hpp"

namespace quadinfer {

namespace {
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kSqrt2 = 1.41421356237309504880168872420970;
} // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_quantile(double q) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw DomainError("normal_quantile: q must lie strictly inside (0,1)");
  }

  // Rational initial guess (relative error ~1e-9), then one Halley polish
  // against the erfc-based CDF.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (q < p_low) {
    double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q > 1.0 - p_low) {
    double u = std::sqrt(-2.0 * std::log(1.0 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else {
    double r = q - 0.5;
    double t = r * r;
    x = r *
        (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  }

  // Halley's method: x <- x - u / (1 + x u / 2) with u = (Phi(x) - q)/phi(x).
  for (int iter = 0; iter < 2; ++iter) {
    double density = normal_pdf(x);
    if (!(density > 0.0)) break; // too deep in a tail for a useful update
    double u = (normal_cdf(x) - q) / density;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

} // namespace quadinfer
