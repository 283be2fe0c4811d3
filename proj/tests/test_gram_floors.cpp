#include <catch2/catch_amalgamated.hpp>

#include "rsk/gram_floors.hpp"

namespace {

constexpr double kPhi = 0.7071067811865476;

}  // namespace

TEST_CASE("separation frequency matches its closed form and scaling") {
    // D = 1: the dimensional factor reduces to pi/6, so M(0.1) = 20 pi.
    REQUIRE(rsk::separation_frequency(0.1, 1) ==
            Catch::Approx(20.0 * 3.141592653589793).epsilon(1e-13));
    // D = 2: Gamma(2) = 1 leaves (pi/9)^(1/3).
    REQUIRE(rsk::separation_frequency(0.25, 2) ==
            Catch::Approx(48.0 * std::cbrt(3.141592653589793 / 9.0))
                .epsilon(1e-13));
    // Halving the separation doubles the frequency scale.
    REQUIRE(rsk::separation_frequency(0.05, 3) ==
            Catch::Approx(2.0 * rsk::separation_frequency(0.1, 3))
                .epsilon(1e-13));
    REQUIRE_THROWS_AS(rsk::separation_frequency(0.0, 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(rsk::separation_frequency(-1.0, 2),
                      std::invalid_argument);
}

TEST_CASE("floor shapes decay in noise scale, smoothness, and dimension") {
    using Case = rsk::GramFloorCase;
    const double q = 0.07, m0 = 1.5, me = 1.0;
    for (Case c : {Case::LaplaceRadial, Case::GaussianRadial}) {
        // The Gaussian factor decays like exp(-8 sigma^2 M^2), so probe it at
        // scales where it is still representable.
        const double lo = c == Case::GaussianRadial ? 0.002 : 0.05;
        const double hi = c == Case::GaussianRadial ? 0.01 : 0.25;
        const double weak = rsk::gram_floor_shape(c, 1, q, m0, me, lo);
        const double strong = rsk::gram_floor_shape(c, 1, q, m0, me, hi);
        REQUIRE(weak > strong);
        REQUIRE(strong > 0.0);
        REQUIRE(rsk::gram_floor_shape(c, 1, q, 2.5, me, lo) < weak);
    }
    // Tensor case: exponents scale with the dimension.
    const double t2 = rsk::gram_floor_shape(Case::LaplaceTensor, 2, q, m0, me, 0.1);
    const double r2 = rsk::gram_floor_shape(Case::LaplaceRadial, 2, q, m0, me, 0.1);
    REQUIRE(t2 < r2);
    // The Laplace factor is polynomial in sigma, the Gaussian exponential:
    // at matched scales the Gaussian floor sits below the Laplace one.
    const double lap = rsk::gram_floor_shape(Case::LaplaceRadial, 1, 0.2, m0, me, 0.05);
    const double gau = rsk::gram_floor_shape(Case::GaussianRadial, 1, 0.2, m0, me, 0.05);
    REQUIRE(gau > 0.0);
    REQUIRE(gau < lap);
}

TEST_CASE("floor constants exist exactly for the covered pairs") {
    using Case = rsk::GramFloorCase;
    REQUIRE(rsk::gram_floor_constant(Case::LaplaceRadial, 1) > 0.0);
    REQUIRE(rsk::gram_floor_constant(Case::LaplaceTensor, 2) > 0.0);
    REQUIRE(rsk::gram_floor_constant(Case::LaplaceTensor, 3) > 0.0);
    REQUIRE(rsk::gram_floor_constant(Case::GaussianRadial, 1) > 0.0);
    REQUIRE_THROWS_AS(rsk::gram_floor_constant(Case::LaplaceRadial, 2),
                      std::out_of_range);
    REQUIRE_THROWS_AS(rsk::gram_floor_constant(Case::GaussianRadial, 3),
                      std::out_of_range);
}

TEST_CASE("expected-Gram eigenvalues clear the frozen floors: 100 designs per case") {
    using Case = rsk::GramFloorCase;
    for (Case c : {Case::LaplaceRadial, Case::LaplaceTensor,
                   Case::GaussianRadial}) {
        const auto dims = rsk::floor_case_dims(c);
        const int per_dim = 100 / static_cast<int>(dims.size());
        int violations = 0;
        double min_margin = std::numeric_limits<double>::infinity();
        for (size_t di = 0; di < dims.size(); ++di) {
            rsk::Rng rng(rsk::derive_seed(424242, 7 * static_cast<int>(c) + di));
            for (int i = 0; i < per_dim; ++i) {
                const auto design =
                    rsk::sample_floor_design(c, dims[di], rng);
                const auto obs = rsk::observe_floor(design);
                const double q_x = rsk::separation_distance(design.points);
                const double floor = rsk::gram_eigen_floor(
                    c, dims[di], q_x, design.m0, design.m_eps, design.sigma_n);
                if (!(obs.eta_n >= floor)) ++violations;
                if (floor > 0.0)
                    min_margin = std::min(min_margin, obs.eta_n / floor);
            }
        }
        INFO("case " << static_cast<int>(c) << " min margin " << min_margin);
        REQUIRE(violations == 0);
    }
}

TEST_CASE("empirical Gram of ten uniform points clears the Gaussian floor") {
    rsk::Rng rng(rsk::derive_seed(990017, 3));
    Eigen::MatrixXd pts(10, 1);
    for (int i = 0; i < 10; ++i) pts(i, 0) = rng.uniform();

    const auto kernel = rsk::KernelSpec::matern(1.5, kPhi, 1);
    const auto noise = rsk::NoiseSpec::gaussian(0.1, 1);
    const auto gram = rsk::build_gram(kernel, noise, 500, pts, rng);

    const double eta_n = gram.eigenvalues(gram.n() - 1);
    const double floor = rsk::gram_eigen_floor(
        rsk::GramFloorCase::GaussianRadial, 1, gram.separation, 1.5, 1.0, 0.1);
    REQUIRE(eta_n >= floor);
    REQUIRE(eta_n > 0.0);
}
