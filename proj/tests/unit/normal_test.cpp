#include <doctest.h>

#include <cmath>

#include "quadinfer/errors.hpp"
#include "quadinfer/normal.hpp"

using namespace quadinfer;

// Frozen reference values computed from the complementary error function at
// double precision.
TEST_CASE("normal_cdf: frozen reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(normal_cdf(0.5) - 0.69146246127401312) < 1e-12);
  CHECK(std::abs(normal_cdf(1.0) - 0.84134474606854293) < 1e-12);
  CHECK(std::abs(normal_cdf(1.5) - 0.93319279873114191) < 1e-12);
  CHECK(std::abs(normal_cdf(2.0) - 0.97724986805182079) < 1e-12);
  CHECK(std::abs(normal_cdf(3.0) - 0.9986501019683699) < 1e-12);
  CHECK(std::abs(normal_cdf(6.0) - 0.9999999990134123) < 1e-12);
  CHECK(std::abs(normal_cdf(-1.0) - 0.15865525393145707) < 1e-12);
  CHECK(std::abs(normal_cdf(-1.96) - 0.024997895148220435) < 1e-12);
}

TEST_CASE("normal_cdf: symmetry and monotonicity") {
  for (double z = -8.0; z <= 8.0; z += 0.37) {
    CHECK(std::abs(normal_cdf(-z) - (1.0 - normal_cdf(z))) < 1e-12);
  }
  double prev = 0.0;
  for (double z = -10.0; z <= 10.0; z += 0.05) {
    double v = normal_cdf(z);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("normal_quantile: frozen reference values") {
  CHECK(std::abs(normal_quantile(0.5)) < 1e-12);
  CHECK(std::abs(normal_quantile(0.025) - -1.9599639845400545) < 1e-9);
  CHECK(std::abs(normal_quantile(0.975) - 1.9599639845400545) < 1e-9);
  CHECK(std::abs(normal_quantile(0.95) - 1.6448536269514722) < 1e-9);
  CHECK(std::abs(normal_quantile(0.05) - -1.6448536269514722) < 1e-9);
  CHECK(std::abs(normal_quantile(0.995) - 2.5758293035488968) < 1e-9);
  CHECK(std::abs(normal_quantile(1e-10) - -6.3613409024040575) < 1e-8);
}

TEST_CASE("normal_quantile: domain errors at the boundary") {
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(-0.1), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.1), DomainError);
}

TEST_CASE("normal_quantile: round trip within 1e-8 for |z| <= 6") {
  for (double z = -6.0; z <= 6.0; z += 0.0917) {
    double back = normal_quantile(normal_cdf(z));
    CHECK(std::abs(back - z) < 1e-8);
  }
}

TEST_CASE("normal_cdf vs erfc oracle on a dense grid") {
  for (double z = -12.0; z <= 12.0; z += 0.11) {
    double want = 0.5 * std::erfc(-z / std::sqrt(2.0));
    CHECK(std::abs(normal_cdf(z) - want) < 1e-12);
  }
}

TEST_CASE("normal_pdf: standard values") {
  CHECK(std::abs(normal_pdf(0.0) - 0.3989422804014327) < 1e-14);
  CHECK(std::abs(normal_pdf(1.0) - 0.24197072451914337) < 1e-14);
  CHECK(std::abs(normal_pdf(-1.0) - normal_pdf(1.0)) < 1e-16);
}
