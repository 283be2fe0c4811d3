#include <catch2/catch_amalgamated.hpp>

#include "rsk/verify.hpp"

TEST_CASE("quick verification suite passes end to end") {
    const auto results = rsk::run_verify(true);
    REQUIRE(results.size() == 7);
    for (const auto& r : results) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.pass);
        REQUIRE(r.seconds >= 0.0);
        REQUIRE_FALSE(r.detail.empty());
    }
}

TEST_CASE("checks are deterministic in the seed") {
    const auto a = rsk::check_sup_gap_slope(true, 5);
    const auto b = rsk::check_sup_gap_slope(true, 5);
    REQUIRE(a.detail == b.detail);
    const auto c = rsk::check_noise_cf(true, 5);
    const auto d = rsk::check_noise_cf(true, 5);
    REQUIRE(c.detail == d.detail);
    const auto e = rsk::check_gram_floors(true, 5);
    const auto f = rsk::check_gram_floors(true, 5);
    REQUIRE(e.detail == f.detail);
}
