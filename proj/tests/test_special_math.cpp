#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "rsk/special_math.hpp"

namespace {

struct Gamma2 {
  double x, value;
};
struct Beta3 {
  double a, b, value;
};
struct BesselK3 {
  double nu, x, value;
};

// Reference values computed offline at 40 decimal digits
// (tools/oracle/special_math_oracle.py).
constexpr Gamma2 kGammaTable[] = {
    {1e-3, 999.42377248459547},
    {0.5, 1.772453850905516},
    {2.75, 1.6083594219855457},
    {5.5, 52.34277778455352},
    {33.7, 3.0321626547398416e+36},
    {170, 4.2690680090047053e+304},
};

constexpr Beta3 kBetaTable[] = {
    {2.5, 3.5, 0.03681553890925539},
    {0.5, 0.5, 3.1415926535897932},
    {7, 0.001, 997.55374227496239},
    {2, 3, 0.083333333333333333},
    {4.0, 31.0, 5.3907193375884078e-6},
};

constexpr BesselK3 kBesselKTable[] = {
    {0.5, 1.0, 0.46106850444789456},
    {1.5, 2.0, 0.17990665795209217},
    {2.75, 0.3, 146.40685936023392},
    {0.5, 2.0, 0.11993777196806145},
    {1.5, 0.7, 1.8065736127788276},
    {2.5, 1.3, 1.5226914007398957},
    {5.5, 3.77, 0.38871762107397945},
    {10.5, 25.0, 2.9297424050058545e-11},
    {0.0, 0.1, 2.4270690247020166},
    {0.0, 1.0, 0.42102443824070833},
    {0.0, 100.0, 4.656628229175902e-45},
    {1.0, 0.5, 1.6564411200033009},
    {2.0, 5.0, 0.00530894371222346},
    {5.0, 1.0, 360.9605896012407},
    {5.0, 20.0, 1.0538660139974233e-9},
    {5.0, 0.003, 1580246024691691.4},
    {0.3, 1e-6, 116.16463060626913},
    {0.25, 1e-8, 215.5594459838469},
    {3.7, 0.002, 262526878486.1262},
    {0.9, 2.1, 0.11826387516695984},
    {7.3, 45.0, 9.5684975131453714e-21},
    {12.2, 100.0, 9.7563465645998779e-45},
    {33.5, 2.0, 7.3012520296718868e+35},
    {46.1, 80.0, 9.8695375536372988e-31},
    {60.0, 30.0, 46713096.235994667},
    {60.0, 90.0, 2.4800584383247093e-32},
    {60.0, 100.0, 1.7364442835366806e-37},
    {4.999, 8.0, 0.00061900877550225605},
};

double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("gamma_fn matches high-precision references") {
  for (const auto& row : kGammaTable) {
    CAPTURE(row.x);
    CHECK(rel_err(rsk::gamma_fn(row.x), row.value) < 1e-12);
  }
  CHECK(rsk::gamma_fn(1.0) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(rsk::gamma_fn(5.0) == Catch::Approx(24.0).epsilon(1e-14));
}

TEST_CASE("gamma_fn functional equation on [0.1, 80]") {
  for (double x = 0.1; x <= 80.0; x *= 1.17) {
    CAPTURE(x);
    CHECK(rel_err(rsk::gamma_fn(x + 1.0), x * rsk::gamma_fn(x)) < 1e-10);
  }
}

TEST_CASE("gamma_fn domain and overflow signalling") {
  CHECK_THROWS_AS(rsk::gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(rsk::gamma_fn(-2.5), std::domain_error);
  CHECK_THROWS_AS(rsk::gamma_fn(170.5), std::overflow_error);
}

TEST_CASE("beta_fn matches references and closed forms") {
  for (const auto& row : kBetaTable) {
    CAPTURE(row.a, row.b);
    CHECK(rel_err(rsk::beta_fn(row.a, row.b), row.value) < 1e-12);
  }
  CHECK(rsk::beta_fn(1.0, 1.0) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(rsk::beta_fn(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(rsk::beta_fn(1.0, -1.0), std::domain_error);
}

TEST_CASE("bessel_k matches high-precision references") {
  for (const auto& row : kBesselKTable) {
    CAPTURE(row.nu, row.x);
    CHECK(rel_err(rsk::bessel_k(row.nu, row.x), row.value) < 5e-9);
  }
}

TEST_CASE("bessel_k half-integer closed forms") {
  // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
  const double k_half = std::sqrt(M_PI / 2.0) * std::exp(-1.0);
  CHECK(rel_err(rsk::bessel_k(0.5, 1.0), k_half) < 1e-14);
  // K_{3/2}(x) = sqrt(pi/(2x)) e^{-x} (1 + 1/x)
  const double k_32 = std::sqrt(M_PI / 4.0) * std::exp(-2.0) * 1.5;
  CHECK(rel_err(rsk::bessel_k(1.5, 2.0), k_32) < 1e-14);
}

TEST_CASE("bessel_k is strictly decreasing in x") {
  for (double nu : {0.0, 0.3, 1.0, 2.75, 5.0, 17.2, 60.0}) {
    double prev = rsk::bessel_k(nu, 0.05);
    for (double x = 0.1; x <= 100.0; x *= 1.6) {
      const double cur = rsk::bessel_k(nu, x);
      CAPTURE(nu, x);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("bessel_k is even in the order") {
  for (double nu : {0.3, 1.7, 2.5, 6.1}) {
    for (double x : {0.2, 1.0, 7.5, 40.0}) {
      CAPTURE(nu, x);
      CHECK(rel_err(rsk::bessel_k(-nu, x), rsk::bessel_k(nu, x)) < 1e-12);
    }
  }
}

TEST_CASE("bessel_k three-term recurrence") {
  for (double nu : {0.4, 1.0, 2.75, 8.3, 30.5}) {
    for (double x : {0.3, 1.9, 12.0, 75.0}) {
      const double lhs = rsk::bessel_k(nu + 1.0, x);
      const double rhs =
          rsk::bessel_k(nu - 1.0, x) + (2.0 * nu / x) * rsk::bessel_k(nu, x);
      CAPTURE(nu, x);
      CHECK(rel_err(lhs, rhs) < 1e-7);
    }
  }
}

TEST_CASE("bessel_k overflow and domain signalling") {
  CHECK_THROWS_AS(rsk::bessel_k(60.0, 1e-8), std::overflow_error);
  CHECK_THROWS_AS(rsk::bessel_k(10.0, 1e-30), std::overflow_error);
  CHECK_THROWS_AS(rsk::bessel_k(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(rsk::bessel_k(1.0, -1.0), std::domain_error);
}
