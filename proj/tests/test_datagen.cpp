#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rsk/datagen.hpp"
#include "rsk/kernels.hpp"
#include "rsk/rng.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using rsk::KernelSpec;
using rsk::ManifoldSpec;
using rsk::Rng;

TEST_CASE("manifold samples satisfy the constraint") {
  Rng rng(101);
  SECTION("line stays in the unit interval") {
    auto X = rsk::sample_manifold(ManifoldSpec::line(), 500, rng);
    REQUIRE(X.cols() == 1);
    REQUIRE(X.minCoeff() >= 0.0);
    REQUIRE(X.maxCoeff() < 1.0);
  }
  SECTION("circle radius is exact") {
    for (double r : {1.0, 1.7}) {
      auto X = rsk::sample_manifold(ManifoldSpec::circle(r), 300, rng);
      for (int i = 0; i < X.rows(); ++i)
        REQUIRE(std::abs(X.row(i).norm() - r) < 1e-12);
    }
  }
  SECTION("sphere radius is exact") {
    auto X = rsk::sample_manifold(ManifoldSpec::sphere(0.8), 300, rng);
    for (int i = 0; i < X.rows(); ++i)
      REQUIRE(std::abs(X.row(i).norm() - 0.8) < 1e-12);
  }
}

TEST_CASE("manifold sampling distributions") {
  SECTION("sphere coordinates are centered") {
    Rng rng(555);
    auto X = rsk::sample_manifold(ManifoldSpec::sphere(), 100000, rng);
    const double band = 4.0 / std::sqrt(100000.0);
    for (int j = 0; j < 3; ++j)
      REQUIRE(std::abs(X.col(j).mean()) < band);
  }
  SECTION("line draws are uniform") {
    Rng rng(556);
    auto X = rsk::sample_manifold(ManifoldSpec::line(), 100000, rng);
    std::vector<double> v(X.col(0).data(), X.col(0).data() + X.rows());
    std::sort(v.begin(), v.end());
    double sup = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      const double cdf = (i + 1.0) / v.size();
      sup = std::max(sup, std::abs(cdf - v[i]));
    }
    REQUIRE(sup < 0.01);
  }
}

TEST_CASE("anchor grids lie on the manifold") {
  auto line = rsk::manifold_grid(ManifoldSpec::line(), 11);
  REQUIRE(line(0, 0) == 0.0);
  REQUIRE(line(10, 0) == 1.0);
  REQUIRE_THAT(line(5, 0), WithinRel(0.5, 1e-15));

  auto circle = rsk::manifold_grid(ManifoldSpec::circle(1.3), 64);
  for (int i = 0; i < 64; ++i)
    REQUIRE(std::abs(circle.row(i).norm() - 1.3) < 1e-12);

  auto sphere = rsk::manifold_grid(ManifoldSpec::sphere(), 200);
  for (int i = 0; i < 200; ++i)
    REQUIRE(std::abs(sphere.row(i).norm() - 1.0) < 1e-12);
  // lattice covers both hemispheres
  REQUIRE(sphere.col(2).minCoeff() < -0.9);
  REQUIRE(sphere.col(2).maxCoeff() > 0.9);
}

TEST_CASE("classical covariance matches its direct formula") {
  // nu = 5, rho = 1, sigma2 = 1 in D = 1:
  // K(r) = 2^{1-nu}/Gamma(nu) (sqrt(2 nu) r)^nu B_nu(sqrt(2 nu) r)
  auto cov = KernelSpec::matern_classical(5.0, 1.0, 1.0, 1);
  for (double r : {0.3, 1.0, 2.2}) {
    const double s = std::sqrt(10.0) * r;
    const double ref = std::pow(2.0, 1.0 - 5.0) / 24.0 * std::pow(s, 5.0) *
                       std::cyl_bessel_k(5.0, s);
    Eigen::VectorXd d(1);
    d << r;
    REQUIRE_THAT(rsk::kernel_eval(cov, d), WithinRel(ref, 1e-8));
  }
}

TEST_CASE("ground truths interpolate their anchor values") {
  auto cov1 = KernelSpec::matern_classical(5.0, 1.0, 1.0, 1);
  Rng rng(2024);
  auto gt = rsk::draw_ground_truth(ManifoldSpec::line(), cov1, 400, 1e-10,
                                   rng);
  REQUIRE(gt.jitter_used >= 1e-10);
  const Eigen::VectorXd replay = gt.eval(gt.anchors);
  REQUIRE((replay - gt.values).lpNorm<Eigen::Infinity>() < 1e-8);

  auto cov2 = KernelSpec::matern_classical(5.0, 1.0, 1.0, 2);
  Rng rng2(2025);
  auto gt2 = rsk::draw_ground_truth(ManifoldSpec::circle(), cov2, 300, 1e-10,
                                    rng2);
  const Eigen::VectorXd replay2 = gt2.eval(gt2.anchors);
  REQUIRE((replay2 - gt2.values).lpNorm<Eigen::Infinity>() < 1e-8);

  SECTION("single-path anchor second moment sits in the pilot band") {
    // Smooth paths on a small manifold have few effective degrees of
    // freedom; a 200-path pilot put the per-path mean square in
    // [0.16, 4.18], so a single path gets the loose band below. The sharp
    // marginal check is the across-path average in the next test case.
    Rng rng3(2026);
    auto cov3 = KernelSpec::matern_classical(5.0, 1.0, 1.0, 3);
    auto one = rsk::draw_ground_truth(ManifoldSpec::sphere(), cov3, 400,
                                      1e-10, rng3);
    const double mom = one.values.array().square().mean();
    REQUIRE(mom > 0.1);
    REQUIRE(mom < 5.0);
  }
}

TEST_CASE("gp marginal variance averages to sigma2 across paths") {
  auto cov = KernelSpec::matern_classical(5.0, 1.0, 1.0, 3);
  Rng rng(7777);
  double acc = 0;
  const int paths = 200;
  for (int p = 0; p < paths; ++p) {
    auto gt = rsk::draw_ground_truth(ManifoldSpec::sphere(), cov, 120, 1e-10,
                                     rng);
    acc += gt.values.array().square().mean();
  }
  acc /= paths;
  REQUIRE(acc > 0.95);
  REQUIRE(acc < 1.05);
}

TEST_CASE("datasets") {
  auto cov = KernelSpec::matern_classical(5.0, 1.0, 1.0, 1);
  Rng grng(31);
  auto gt = rsk::draw_ground_truth(ManifoldSpec::line(), cov, 300, 1e-10,
                                   grng);
  SECTION("split sizes follow the protocol") {
    Rng rng(32);
    auto ds = rsk::make_dataset(gt, ManifoldSpec::line(), 50, rng);
    REQUIRE(ds.train_X.rows() == 50);
    REQUIRE(ds.val_X.rows() == 25);
    REQUIRE(ds.test_X.rows() == 500);
    REQUIRE(ds.val_y.size() == 25);
    REQUIRE(ds.noise_var == 0.01);
  }
  SECTION("odd sizes round the validation count up") {
    Rng rng(33);
    auto ds = rsk::make_dataset(gt, ManifoldSpec::line(), 7, rng, 0.01, 20);
    REQUIRE(ds.val_X.rows() == 4);
    REQUIRE(ds.test_X.rows() == 20);
  }
  SECTION("test targets are noiseless and zero noise is exact") {
    Rng rng(34);
    auto ds = rsk::make_dataset(gt, ManifoldSpec::line(), 10, rng, 0.0, 50);
    REQUIRE(ds.train_y == gt.eval(ds.train_X));
    REQUIRE(ds.val_y == gt.eval(ds.val_X));
    REQUIRE(ds.test_y == gt.eval(ds.test_X));
  }
  SECTION("noisy responses differ from the truth") {
    Rng rng(35);
    auto ds = rsk::make_dataset(gt, ManifoldSpec::line(), 40, rng, 0.01, 10);
    const Eigen::VectorXd resid = ds.train_y - gt.eval(ds.train_X);
    REQUIRE(resid.norm() > 0);
    // 40 draws of sd 0.1: the sample second moment is within a wide band
    const double mom = resid.squaredNorm() / 40.0;
    REQUIRE(mom > 0.002);
    REQUIRE(mom < 0.05);
    REQUIRE(ds.test_y == gt.eval(ds.test_X));
  }
  SECTION("generation is deterministic per seed") {
    Rng a(36), b(36);
    auto da = rsk::make_dataset(gt, ManifoldSpec::line(), 12, a);
    auto db = rsk::make_dataset(gt, ManifoldSpec::line(), 12, b);
    REQUIRE(da.train_X == db.train_X);
    REQUIRE(da.train_y == db.train_y);
    REQUIRE(da.val_y == db.val_y);
    REQUIRE(da.test_y == db.test_y);
  }
}

TEST_CASE("dataset csv export") {
  auto cov = KernelSpec::matern_classical(5.0, 1.0, 1.0, 1);
  Rng grng(41);
  auto gt = rsk::draw_ground_truth(ManifoldSpec::line(), cov, 100, 1e-10,
                                   grng);
  Rng rng(42);
  auto ds = rsk::make_dataset(gt, ManifoldSpec::line(), 4, rng, 0.01, 3);
  std::ostringstream os;
  rsk::dataset_to_csv(os, ds);
  const std::string text = os.str();
  REQUIRE(text.rfind("x0,y,split\n", 0) == 0);
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 1 + 4 + 2 + 3);
  REQUIRE(text.find(",train\n") != std::string::npos);
  REQUIRE(text.find(",val\n") != std::string::npos);
  REQUIRE(text.find(",test\n") != std::string::npos);
}
