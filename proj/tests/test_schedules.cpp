#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "rsk/schedules.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using rsk::schedule;
using rsk::ScheduleParams;
using rsk::SmoothingRegime;

TEST_CASE("gaussian regime frozen values") {
  auto p = schedule(SmoothingRegime::GaussianSmoothing, 100, 1, 1, 1.5, 2.0);
  REQUIRE_THAT(p.sigma_n, WithinRel(0.39810717055349725077, 1e-12));
  REQUIRE_THAT(p.nu, WithinRel(-0.2, 1e-15));
  REQUIRE(p.t_star == 631.0);
  REQUIRE_THAT(p.alpha_star, WithinRel(1.5848931924611134852e-5, 1e-12));
  REQUIRE_THAT(p.lambda_n, WithinRel(1.0 / 631.0, 1e-15));
  REQUIRE_THAT(p.rate_exponent, WithinRel(-0.8, 1e-15));
  REQUIRE(p.m_eps == 2.0);

  auto q = schedule(SmoothingRegime::GaussianSmoothing, 50, 3, 2, 2.5, 3.0,
                    0.7);
  REQUIRE_THAT(q.sigma_n, WithinRel(0.42926629446211274233, 1e-12));
  REQUIRE(q.t_star == 152.0);
  REQUIRE_THAT(q.alpha_star, WithinRel(6.457200618847823188e-5, 1e-12));
  REQUIRE_THAT(q.rate_exponent, WithinRel(-0.75, 1e-15));
}

TEST_CASE("polynomial regime frozen values") {
  auto p = schedule(SmoothingRegime::PolySmoothing, 100, 2, 1, 1.5, 2.0);
  REQUIRE_THAT(p.m_eps, WithinRel(85.998233533773735993, 1e-13));
  REQUIRE_THAT(p.nu, WithinRel(-0.19082135933549838272, 1e-12));
  REQUIRE_THAT(p.sigma_n, WithinRel(0.41529555360765464311, 1e-12));
  REQUIRE(p.t_star == 22771.0);
  REQUIRE_THAT(p.alpha_star, WithinRel(4.3914957465557193541e-7, 1e-11));
  REQUIRE_THAT(p.rate_exponent, WithinRel(-0.8, 1e-15));

  SECTION("positive rate gap switches the scale exponent") {
    auto a = schedule(SmoothingRegime::PolySmoothing, 100, 2, 1, 1.5, 2.0,
                      1.0, 0.1);
    REQUIRE_THAT(a.nu, WithinRel(-0.175374457224489082, 1e-12));
    REQUIRE_THAT(a.sigma_n, WithinRel(0.44591397720187668943, 1e-12));
    REQUIRE(a.t_star == 4688271069.0);
    REQUIRE_THAT(a.rate_exponent, WithinRel(-0.7, 1e-12));
    REQUIRE(a.m_eps == p.m_eps);
  }
}

TEST_CASE("polynomial regime with matching dimensions") {
  auto p = schedule(SmoothingRegime::PolySmoothing, 200, 1, 1, 1.5, 2.0);
  REQUIRE(p.nu == 0.0);
  REQUIRE(p.sigma_n == 1.0);
  REQUIRE_THAT(p.m_eps, WithinRel(56.781491032028403452, 1e-13));
  // Iteration counts at theoretical scale exceed 64-bit range by design.
  REQUIRE_THAT(p.t_star, WithinRel(4.3952504056759484153e53, 1e-12));
  REQUIRE_THAT(p.alpha_star, WithinRel(1.1375916133340409195e-56, 1e-11));
  REQUIRE_THAT(p.lambda_n, WithinRel(1.0 / p.t_star, 1e-15));
}

TEST_CASE("tensor regime frozen values") {
  auto p = schedule(SmoothingRegime::TensorPolySmoothing, 100, 2, 1, 1.5,
                    2.0);
  REQUIRE(p.m_eps == 1.0);
  REQUIRE(p.sigma_n == 1.0);
  REQUIRE(p.nu == 0.0);
  REQUIRE(p.t_star == 625.0);
  REQUIRE_THAT(p.alpha_star, WithinRel(6.2502130487634195347e-4, 1e-12));
  REQUIRE_THAT(p.rate_exponent, WithinRel(-0.8, 1e-15));

  auto q = schedule(SmoothingRegime::TensorPolySmoothing, 400, 3, 2, 2.0,
                    3.0, 2.0);
  REQUIRE(q.m_eps == 1.0);
  REQUIRE(q.sigma_n == 2.0);
  REQUIRE(q.t_star == 9448.0);
  REQUIRE_THAT(q.alpha_star, WithinRel(1.553870624480009026e-3, 1e-12));
  REQUIRE_THAT(q.rate_exponent, WithinRel(-6.0 / 7.0, 1e-15));
}

TEST_CASE("schedule invariants across a parameter grid") {
  for (long n : {2L, 10L, 100L, 1000L, 100000L}) {
    for (int D : {1, 2, 3}) {
      for (int d = 1; d <= D; ++d) {
        for (double m0 : {0.5 * D + 0.25, 2.5}) {
          for (double mf : {0.5 * D + 0.1, 3.0}) {
            for (auto reg : {SmoothingRegime::PolySmoothing,
                             SmoothingRegime::GaussianSmoothing,
                             SmoothingRegime::TensorPolySmoothing}) {
              INFO("regime " << rsk::regime_name(reg) << " n " << n << " D "
                             << D << " d " << d << " m0 " << m0 << " mf "
                             << mf);
              ScheduleParams p;
              try {
                p = schedule(reg, n, D, d, m0, mf);
              } catch (const std::domain_error& e) {
                // Theoretical-scale counts can exceed the double range;
                // that is reported, and nothing else may throw here.
                REQUIRE_THAT(e.what(),
                             Catch::Matchers::ContainsSubstring("overflows"));
                continue;
              }
              REQUIRE(p.sigma_n > 0);
              REQUIRE(p.m_eps > 0);
              REQUIRE(p.t_star >= 1.0);
              REQUIRE(p.t_star == std::round(p.t_star));
              REQUIRE(p.alpha_star > 0);
              REQUIRE(p.alpha_star < 1);
              REQUIRE(p.lambda_n > 0);
              REQUIRE(p.t_wd_floor >= 1.0);
              REQUIRE(p.nu <= 0.0);
              if (reg == SmoothingRegime::PolySmoothing && D > d)
                REQUIRE(p.nu < 0.0);
              if (reg == SmoothingRegime::TensorPolySmoothing)
                REQUIRE(p.m_eps + m0 >= mf);
              if (reg == SmoothingRegime::PolySmoothing) {
                const double me_ref =
                    2.0 / d * (2.0 * D * std::max(m0, mf) + m0 * d) *
                        std::log(static_cast<double>(n)) -
                    m0;
                REQUIRE_THAT(p.m_eps, WithinRel(me_ref, 1e-14));
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("doubling n strictly increases the iteration count") {
  for (auto reg : {SmoothingRegime::PolySmoothing,
                   SmoothingRegime::GaussianSmoothing,
                   SmoothingRegime::TensorPolySmoothing}) {
    for (long n : {10L, 50L, 200L, 5000L}) {
      auto a = schedule(reg, n, 2, 1, 1.5, 2.0);
      auto b = schedule(reg, 2 * n, 2, 1, 1.5, 2.0);
      INFO("regime " << rsk::regime_name(reg) << " n " << n);
      REQUIRE(b.t_star > a.t_star);
    }
  }
}

TEST_CASE("rate exponent is monotone increasing in intrinsic dimension") {
  double prev = -1.0;
  for (int d = 1; d <= 4; ++d) {
    auto p = schedule(SmoothingRegime::GaussianSmoothing, 100, 4, d, 2.5,
                      3.0);
    REQUIRE(p.rate_exponent > prev);
    REQUIRE(p.rate_exponent < 0);
    prev = p.rate_exponent;
    auto q = schedule(SmoothingRegime::PolySmoothing, 100, 4, d, 2.5, 3.0);
    REQUIRE_THAT(q.rate_exponent, WithinRel(p.rate_exponent, 1e-15));
  }
}

TEST_CASE("schedule preconditions") {
  using R = SmoothingRegime;
  REQUIRE_THROWS_AS(schedule(R::GaussianSmoothing, 1, 1, 1, 1.5, 2.0),
                    std::domain_error);
  REQUIRE_THROWS_AS(schedule(R::GaussianSmoothing, 100, 1, 0, 1.5, 2.0),
                    std::domain_error);
  REQUIRE_THROWS_AS(schedule(R::GaussianSmoothing, 100, 1, 2, 1.5, 2.0),
                    std::domain_error);
  REQUIRE_THROWS_AS(schedule(R::GaussianSmoothing, 100, 3, 1, 1.5, 1.5),
                    std::domain_error);
  REQUIRE_THROWS_AS(schedule(R::GaussianSmoothing, 100, 3, 1, 1.4, 2.0),
                    std::domain_error);
  REQUIRE_THROWS_AS(schedule(R::GaussianSmoothing, 100, 1, 1, 1.5, 2.0, 0.0),
                    std::domain_error);
  REQUIRE_THROWS_AS(
      schedule(R::GaussianSmoothing, 100, 1, 1, 1.5, 2.0, 1.0, -0.1),
      std::domain_error);
  // Overflow of the theoretical-scale iteration count is reported, not hidden.
  REQUIRE_THROWS_AS(schedule(R::PolySmoothing, 100000000L, 1, 1, 1.5, 2.0),
                    std::domain_error);
}

TEST_CASE("weight-decay iteration floor matches its display") {
  auto p = schedule(SmoothingRegime::GaussianSmoothing, 100, 1, 1, 1.5, 2.0);
  const double scale = 2.0 / 5.0 + 0.5;
  const double ref =
      std::ceil(scale * std::log(100.0) / -std::log1p(-p.alpha_star));
  REQUIRE(p.t_wd_floor == ref);
  REQUIRE(p.t_wd_floor >= 1.0);
}
