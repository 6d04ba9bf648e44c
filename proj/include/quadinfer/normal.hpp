#pragma once

namespace quadinfer {

// Standard normal density.
double normal_pdf(double z);

// Standard normal CDF, accurate to about 1e-15 absolute (erfc based).
double normal_cdf(double z);

// Standard normal quantile for q strictly inside (0,1), accurate to better
// than 1e-9 absolute. Rational initial guess polished by one Halley step
// against the erfc-based CDF. Throws DomainError at q <= 0 or q >= 1.
double normal_quantile(double q);

} // namespace quadinfer
