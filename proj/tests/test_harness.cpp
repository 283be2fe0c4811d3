#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "rsk/harness.hpp"

namespace fs = std::filesystem;

namespace {

// Miniature protocol: tiny nets, tiny grids, real plumbing.
rsk::ExperimentConfig mini_config() {
    rsk::ExperimentConfig c;
    c.dims = {1};
    c.noise_types = {"G", "N"};
    c.regularizers = {"early_stop", "weight_decay"};
    c.sigma_grid = {0.0, 0.1, 0.2};
    c.sizes = {10, 16};
    c.seeds = 2;
    c.n_test = 24;
    c.truth.anchors = 60;
    c.mlp.hidden1 = 8;
    c.mlp.hidden2 = 8;
    c.mlp.batch_size = 5;
    c.mlp.max_iters = 120;
    c.mlp.wd_iters = 80;
    c.mlp.eval_every = 40;
    c.mlp.patience = 3;
    c.mlp.noise_draws = 12;
    c.mlp.augment_subsample = 2;
    c.ucurve.dim = 1;
    c.ucurve.sizes = {10, 16};
    c.rate_sizes = {16, 32};
    c.kernel.noise_draws = 50;
    return c;
}

std::string slurp(const std::string& path) { return rsk::read_text_file(path); }

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("rsk_harness_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sigma zero collapses onto the no-smoothing row") {
    rsk::RunContext ctx(mini_config(), 42);
    ctx.out_dir.clear();

    rsk::ensure_rows(ctx, {{"mlp", 1, "G", "early_stop", 10, 0.0, 0},
                           {"mlp", 1, "N", "early_stop", 10, 0.0, 0}});
    REQUIRE(ctx.rows.size() == 1);

    const rsk::ResultRow& via_g =
        rsk::row_at(ctx, {"mlp", 1, "G", "early_stop", 10, 0.0, 0});
    const rsk::ResultRow& via_n =
        rsk::row_at(ctx, {"mlp", 1, "N", "early_stop", 10, 0.0, 0});
    REQUIRE(&via_g == &via_n);
    REQUIRE(via_g.type == "N");
    REQUIRE(via_g.sigma == 0.0);
    REQUIRE(via_g.test_l2 >= 0.0);
}

TEST_CASE("summary table: bytes are a function of config and master seed") {
    TempDir a("a"), b("b"), c("c");

    rsk::RunContext ctx_a(mini_config(), 7);
    ctx_a.out_dir = a.path.string();
    const rsk::Table1Result ra = rsk::run_table1(ctx_a);

    rsk::RunContext ctx_b(mini_config(), 7);
    ctx_b.out_dir = b.path.string();
    const rsk::Table1Result rb = rsk::run_table1(ctx_b);

    REQUIRE(slurp(ra.rows_csv_path) == slurp(rb.rows_csv_path));
    REQUIRE(slurp(ra.summary_csv_path) == slurp(rb.summary_csv_path));

    rsk::RunContext ctx_c(mini_config(), 8);
    ctx_c.out_dir = c.path.string();
    const rsk::Table1Result rc = rsk::run_table1(ctx_c);
    REQUIRE(slurp(ra.rows_csv_path) != slurp(rc.rows_csv_path));
}

TEST_CASE("summary table: worker count does not change the bytes") {
    TempDir a("w1"), b("w3");

    rsk::RunContext one(mini_config(), 13);
    one.workers = 1;
    one.out_dir = a.path.string();
    const auto r1 = rsk::run_table1(one);

    rsk::RunContext three(mini_config(), 13);
    three.workers = 3;
    three.out_dir = b.path.string();
    const auto r3 = rsk::run_table1(three);

    REQUIRE(slurp(r1.rows_csv_path) == slurp(r3.rows_csv_path));
    REQUIRE(slurp(r1.summary_csv_path) == slurp(r3.summary_csv_path));
}

TEST_CASE("summary table: structure, selection, and CSV schema") {
    TempDir dir("structure");
    rsk::RunContext ctx(mini_config(), 3);
    ctx.out_dir = dir.path.string();
    const rsk::Table1Result res = rsk::run_table1(ctx);

    // G rows train the positive sigma grid, N rows only sigma = 0.
    const std::size_t expected_rows = (2ull /*G sigmas*/ + 1ull /*N*/) * 2 /*reg*/ *
                                      2 /*sizes*/ * 2 /*seeds*/;
    REQUIRE(res.rows.size() == expected_rows);
    REQUIRE(res.summary.size() == 2ull * 2 * 2);  // type x reg x size
    REQUIRE(res.n_vs_g_total == 4);               // D x reg x size
    REQUIRE(res.monotone_total == 4);             // D x type x reg

    // Selection means: recompute one cell by hand from the raw rows.
    for (const rsk::CellSummary& cs : res.summary) {
        REQUIRE(cs.mean_test_l2 >= 0.0);
        if (cs.type != "G" || cs.regularizer != "early_stop" || cs.n != 16) continue;
        double acc = 0.0;
        for (int seed = 0; seed < 2; ++seed) {
            const auto& r1 = rsk::row_at(ctx, {"mlp", 1, "G", "early_stop", 16, 0.1, seed});
            const auto& r2 = rsk::row_at(ctx, {"mlp", 1, "G", "early_stop", 16, 0.2, seed});
            acc += (r1.val_l2 <= r2.val_l2 ? r1 : r2).test_l2;
        }
        REQUIRE_THAT(cs.mean_test_l2, Catch::Matchers::WithinRel(acc / 2.0, 1e-12));
    }

    const std::string rows = slurp(res.rows_csv_path);
    REQUIRE(rows.rfind("# rsk-rows-v1\nlearner,D,type,regularizer,n,sigma,seed,"
                       "test_l2,val_l2,t_used\n", 0) == 0);
    REQUIRE(slurp(res.summary_csv_path).rfind("# rsk-table1-v1\n", 0) == 0);

    // Sorted by key: seeds alternate fastest within each block.
    std::istringstream is(rows);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    std::vector<rsk::RowKey> keys;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string learner, d, type, reg, n, sigma, seed;
        std::getline(ls, learner, ',');
        std::getline(ls, d, ',');
        std::getline(ls, type, ',');
        std::getline(ls, reg, ',');
        std::getline(ls, n, ',');
        std::getline(ls, sigma, ',');
        std::getline(ls, seed, ',');
        keys.emplace_back(learner, std::stoi(d), type, reg, std::stoi(n),
                          std::stod(sigma), std::stoi(seed));
    }
    REQUIRE(keys.size() == expected_rows);
    REQUIRE(std::is_sorted(keys.begin(), keys.end()));

    // Manifest: parseable, echoes the inputs, lists outputs that exist.
    const nlohmann::json man = nlohmann::json::parse(slurp(res.manifest_path));
    REQUIRE(man.at("command") == "table1");
    REQUIRE(man.at("master_seed") == 3);
    REQUIRE(man.at("library_version") == rsk::kVersionString);
    REQUIRE(man.at("config").at("seeds") == 2);
    REQUIRE(man.at("wall_seconds").get<double>() >= 0.0);
    for (const auto& p : man.at("outputs"))
        REQUIRE(fs::exists(p.get<std::string>()));
}

TEST_CASE("validation ties break toward smaller sigma") {
    rsk::RunContext ctx(mini_config(), 1);
    ctx.out_dir.clear();
    auto put = [&](double sigma, double val) {
        rsk::ResultRow r;
        r.learner = "mlp";
        r.D = 1;
        r.type = "G";
        r.regularizer = "early_stop";
        r.n = 10;
        r.sigma = sigma;
        r.seed = 0;
        r.val_l2 = val;
        r.test_l2 = sigma;  // marker
        ctx.rows.emplace(rsk::key_of(r), r);
    };
    put(0.1, 0.5);
    put(0.2, 0.5);
    put(0.3, 0.7);
    const rsk::ResultRow* pick = rsk::detail::select_by_validation(
        ctx, {"mlp", 1, "G", "early_stop", 10, 0.0, 0}, {0.1, 0.2, 0.3});
    REQUIRE(pick->sigma == 0.1);
}

TEST_CASE("u-curve: sigma zero equals the no-smoothing run and picks are coherent") {
    TempDir dir("ucurve");
    rsk::RunContext ctx(mini_config(), 11);
    ctx.out_dir = dir.path.string();
    const rsk::UcurveResult res = rsk::run_ucurve(ctx);

    REQUIRE(res.curve.size() == 2ull * 3);  // sizes x sigma grid
    for (const rsk::UcurvePoint& p : res.curve) {
        if (p.sigma != 0.0) continue;
        // The sigma = 0 column is the N row itself.
        std::vector<double> tests;
        for (int seed = 0; seed < 2; ++seed)
            tests.push_back(
                rsk::row_at(ctx, {"mlp", 1, "N", "early_stop", p.n, 0.0, seed})
                    .test_l2);
        REQUIRE(p.mean_test_l2 == rsk::detail::mean_of(tests));
    }

    REQUIRE(res.picks.size() == 4);  // sizes x seeds
    for (const rsk::UcurvePick& p : res.picks) {
        const bool interior = p.sigma_opt != 0.0 && p.sigma_opt != 0.2;
        REQUIRE(p.interior == interior);
        // The pick really minimizes validation loss over the grid.
        for (double sg : ctx.config.sigma_grid) {
            const auto& r =
                rsk::row_at(ctx, {"mlp", 1, "G", "early_stop", p.n, sg, p.seed});
            REQUIRE(p.val_l2 <= r.val_l2);
        }
    }
    for (int n : {10, 16}) {
        REQUIRE(res.median_sigma.count(n) == 1);
        const rsk::UcurvePoint* marked = nullptr;
        for (const auto& p : res.curve)
            if (p.n == n && p.selected) marked = &p;
        REQUIRE(marked != nullptr);
        REQUIRE(marked->sigma == res.median_sigma.at(n));
    }
    REQUIRE(slurp(res.curve_csv_path).rfind("# rsk-ucurve-v1\n", 0) == 0);
    REQUIRE(slurp(res.picks_csv_path).rfind("# rsk-ucurve-picks-v1\n", 0) == 0);
}

TEST_CASE("rate study: schedule-driven kernel fits and slope bookkeeping") {
    TempDir dir("rate");
    rsk::RunContext ctx(mini_config(), 5);
    ctx.out_dir = dir.path.string();
    const rsk::RateResult res = rsk::run_rate(ctx);

    REQUIRE(res.points.size() == 2);
    for (const rsk::RatePoint& p : res.points) {
        REQUIRE(p.mean_test_l2 > 0.0);
        REQUIRE(p.sigma_n > 0.0);
        REQUIRE(p.t_star >= 1.0);
    }
    REQUIRE(res.theory == -2.0 * 5.5 / (2.0 * 5.5 + 1.0));
    REQUIRE(res.slope_unsquared == 0.5 * res.slope_squared);
    REQUIRE(std::isfinite(res.ratio));
    REQUIRE(res.points_csv_path != "");
    REQUIRE(slurp(res.fit_csv_path).rfind("# rsk-rate-fit-v1\n", 0) == 0);

    // Kernel rows follow the schedule's horizons.
    const auto sched = rsk::schedule(rsk::SmoothingRegime::GaussianSmoothing, 16, 1,
                                     1, ctx.config.kernel.m0, ctx.config.kernel.mf,
                                     ctx.config.kernel.c_prop);
    const auto& row = rsk::row_at(
        ctx, {"kernel_gd", 1, "G", "early_stop", 16, sched.sigma_n, 0});
    REQUIRE(row.t_used == sched.t_star);
}

TEST_CASE("rate study: scaling the targets by 2 scales losses by 4") {
    rsk::RunContext base(mini_config(), 9);
    base.out_dir.clear();
    const rsk::RateResult r1 = rsk::run_rate(base);

    // Scaling variance, observation noise, and jitter together by 4 scales
    // the whole data path by exactly 2 (power-of-two scaling is exact down
    // through the Cholesky), so squared losses scale by exactly 4.
    rsk::ExperimentConfig scaled_cfg = mini_config();
    scaled_cfg.truth.variance *= 4.0;
    scaled_cfg.truth.jitter *= 4.0;
    scaled_cfg.noise_var *= 4.0;
    rsk::RunContext scaled(scaled_cfg, 9);
    scaled.out_dir.clear();
    const rsk::RateResult r4 = rsk::run_rate(scaled);

    for (std::size_t i = 0; i < r1.points.size(); ++i)
        REQUIRE_THAT(r4.points[i].mean_test_l2,
                     Catch::Matchers::WithinRel(4.0 * r1.points[i].mean_test_l2, 1e-6));
    REQUIRE_THAT(r4.slope_squared,
                 Catch::Matchers::WithinAbs(r1.slope_squared, 1e-6));
}

TEST_CASE("rate study: a constant predictor has slope about zero") {
    // Same sampling protocol as the harness (truths shared across sizes),
    // with enough seeds and test points to stabilize the means.
    const rsk::ExperimentConfig cfg = mini_config();
    const rsk::ManifoldSpec mani = rsk::ManifoldSpec::line();
    const rsk::KernelSpec cov = rsk::KernelSpec::matern_classical(
        cfg.truth.nu, cfg.truth.rho, cfg.truth.variance, 1);
    const std::uint64_t master = 5;
    const int seeds = 12;

    std::vector<double> logn, logloss;
    for (int n : {16, 32, 64}) {
        std::vector<double> losses;
        for (int seed = 0; seed < seeds; ++seed) {
            rsk::Rng trng(rsk::detail::truth_seed(master, 1, seed));
            const rsk::GroundTruth gt = rsk::draw_ground_truth(
                mani, cov, cfg.truth.anchors, cfg.truth.jitter, trng);
            rsk::Rng drng(rsk::detail::dataset_seed(master, 1, seed, n));
            const rsk::Dataset ds =
                rsk::make_dataset(gt, mani, n, drng, cfg.noise_var, 500);
            const double c = ds.train_y.mean();
            losses.push_back((ds.test_y.array() - c).square().mean());
        }
        logn.push_back(std::log(static_cast<double>(n)));
        logloss.push_back(std::log(rsk::detail::mean_of(losses)));
    }
    REQUIRE(std::abs(rsk::detail::ls_slope(logn, logloss)) < 0.1);
}

TEST_CASE("simulate: artifacts for a single cell") {
    TempDir dir("simulate");
    rsk::ExperimentConfig cfg = mini_config();
    cfg.simulate.n = 10;
    cfg.simulate.sigma = 0.1;
    rsk::RunContext ctx(cfg, 21);
    ctx.out_dir = dir.path.string();
    const rsk::SimulateResult res = rsk::run_simulate(ctx);

    REQUIRE(res.row.n == 10);
    REQUIRE(res.row.sigma == 0.1);
    REQUIRE(res.row.type == "G");
    for (const auto& p : res.outputs) REQUIRE(fs::exists(p));

    // Curve has the eval cadence; snapshot reloads to the same predictor.
    const std::string curve = slurp(dir.path / "simulate_curve.csv");
    REQUIRE(curve.rfind("# rsk-curve-v1\n", 0) == 0);
    const rsk::MlpModel m = rsk::load_mlp((dir.path / "simulate_model.json").string());
    REQUIRE(m.input_dim() == 1);

    const nlohmann::json man =
        nlohmann::json::parse(slurp(dir.path / "manifest_simulate.json"));
    REQUIRE(man.at("command") == "simulate");
}

TEST_CASE("learner failures carry their grid cell") {
    rsk::ExperimentConfig cfg = mini_config();
    cfg.mlp.lr = 1e9;  // diverges immediately
    rsk::RunContext ctx(cfg, 2);
    ctx.out_dir.clear();
    REQUIRE_THROWS_WITH(
        rsk::ensure_rows(ctx, {{"mlp", 1, "G", "early_stop", 10, 0.1, 0}}),
        Catch::Matchers::ContainsSubstring("cell(mlp, D=1, type=G") &&
            Catch::Matchers::ContainsSubstring("diverged"));
}

TEST_CASE("schedule table covers dims x sizes with consistent values") {
    const rsk::ExperimentConfig cfg = mini_config();
    const std::string csv = rsk::schedule_table_csv(cfg);
    REQUIRE(csv.rfind("# rsk-schedule-v1\n", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 2 + 1 * 2);

    const auto sched = rsk::schedule(rsk::SmoothingRegime::GaussianSmoothing, 16, 1,
                                     1, cfg.kernel.m0, cfg.kernel.mf, 1.0);
    REQUIRE_THAT(csv, Catch::Matchers::ContainsSubstring(
                          "," + rsk::shortest(sched.t_star) + ","));
}

TEST_CASE("kernel rows support both regularizers") {
    rsk::ExperimentConfig cfg = mini_config();
    rsk::RunContext ctx(cfg, 17);
    ctx.out_dir.clear();
    const auto sched = rsk::schedule(rsk::SmoothingRegime::GaussianSmoothing, 10, 1,
                                     1, cfg.kernel.m0, cfg.kernel.mf, 1.0);
    rsk::ensure_rows(ctx,
                     {{"kernel_gd", 1, "G", "early_stop", 10, sched.sigma_n, 0},
                      {"kernel_gd", 1, "G", "weight_decay", 10, sched.sigma_n, 0}});
    const auto& es =
        rsk::row_at(ctx, {"kernel_gd", 1, "G", "early_stop", 10, sched.sigma_n, 0});
    const auto& wd =
        rsk::row_at(ctx, {"kernel_gd", 1, "G", "weight_decay", 10, sched.sigma_n, 0});
    REQUIRE(es.t_used == sched.t_star);
    REQUIRE(wd.t_used == sched.t_wd_floor);
    REQUIRE(es.test_l2 > 0.0);
    REQUIRE(wd.test_l2 > 0.0);
}

TEST_CASE("weight-decay candidate grid selects by validation") {
    const rsk::RowSpec spec{"mlp", 1, "G", "weight_decay", 10, 0.1, 0};

    auto row_with_grid = [&](std::vector<double> grid,
                             double fixed) -> rsk::ResultRow {
        rsk::ExperimentConfig cfg = mini_config();
        cfg.mlp.weight_decay = fixed;
        cfg.mlp.weight_decay_grid = std::move(grid);
        rsk::RunContext ctx(cfg, 99);
        ctx.out_dir.clear();
        rsk::ensure_rows(ctx, {spec});
        return rsk::row_at(ctx, spec);
    };

    const rsk::ResultRow fixed_weak = row_with_grid({}, 1e-5);
    const rsk::ResultRow single_weak = row_with_grid({1e-5}, 0.5);
    REQUIRE(fixed_weak.test_l2 == single_weak.test_l2);
    REQUIRE(fixed_weak.val_l2 == single_weak.val_l2);

    const rsk::ResultRow fixed_strong = row_with_grid({}, 0.5);
    REQUIRE(fixed_strong.val_l2 != fixed_weak.val_l2);

    const rsk::ResultRow picked = row_with_grid({0.5, 1e-5}, 0.0);
    REQUIRE(picked.val_l2 == std::min(fixed_weak.val_l2, fixed_strong.val_l2));
    const bool matches_weak = picked.test_l2 == fixed_weak.test_l2;
    const bool matches_strong = picked.test_l2 == fixed_strong.test_l2;
    REQUIRE((matches_weak || matches_strong));
}
