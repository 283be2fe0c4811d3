// Command-line front end: experiment grids (table1, ucurve, rate, simulate),
// the schedule table, and the property self-checks, all driven by a JSON
// config plus a master seed. Every run writes CSVs and a manifest into the
// output directory; (config, seed) determines every emitted byte.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "rsk/harness.hpp"
#include "rsk/verify.hpp"

namespace {

rsk::ExperimentConfig make_config(const std::string& path, bool quick,
                                  const std::string& out_override) {
    rsk::ExperimentConfig c;
    if (!path.empty()) c = rsk::load_config(path);
    if (quick) rsk::apply_quick(c);
    if (!out_override.empty()) c.out_dir = out_override;
    return c;
}

void print_summary_rows(const std::vector<rsk::CellSummary>& cells) {
    std::printf("%-9s %2s %-4s %-12s %5s %7s %12s %12s %9s\n", "learner", "D",
                "type", "regularizer", "n", "sigma", "test_l2", "stderr",
                "t_used");
    for (const auto& s : cells)
        std::printf("%-9s %2d %-4s %-12s %5d %7.3f %12.5e %12.5e %9.0f\n",
                    s.learner.c_str(), s.D, s.type.c_str(),
                    s.regularizer.c_str(), s.n, s.mean_sigma, s.mean_test_l2,
                    s.stderr_test_l2, s.mean_t_used);
}

int run_table1_cmd(rsk::RunContext& ctx) {
    const auto res = rsk::run_table1(ctx);
    print_summary_rows(res.summary);
    std::printf("\nsmoothing beats none: %d/%d cells\n", res.n_vs_g_pass,
                res.n_vs_g_total);
    std::printf("larger n beats smaller: %d/%d cells\n", res.monotone_pass,
                res.monotone_total);
    // Informational anchor for the default protocol cell; the reference value
    // is the published result this configuration reproduces at desk scale.
    constexpr double kReference = 5.8775e-4;
    for (const auto& s : res.summary)
        if (s.D == 1 && s.type == "G" && s.regularizer == "early_stop" &&
            s.n == 200) {
            const bool inside = s.mean_test_l2 >= kReference / 3.0 &&
                                s.mean_test_l2 <= kReference * 3.0;
            std::printf("reference cell (D=1 G early_stop n=200): %.5e, "
                        "factor-3 band around %.5e: %s\n",
                        s.mean_test_l2, kReference,
                        inside ? "inside" : "outside");
        }
    std::printf("rows: %s\nsummary: %s\nmanifest: %s\n",
                res.rows_csv_path.c_str(), res.summary_csv_path.c_str(),
                res.manifest_path.c_str());
    return 0;
}

int run_ucurve_cmd(rsk::RunContext& ctx) {
    const auto res = rsk::run_ucurve(ctx);
    for (const auto& [n, med] : res.median_sigma)
        std::printf("n=%d: median selected sigma %.3f, interior picks %d/%d\n",
                    n, med, res.interior_count.at(n), ctx.config.seeds);
    std::printf("curve: %s\npicks: %s\nmanifest: %s\n",
                res.curve_csv_path.c_str(), res.picks_csv_path.c_str(),
                res.manifest_path.c_str());
    return 0;
}

int run_rate_cmd(rsk::RunContext& ctx) {
    const auto res = rsk::run_rate(ctx);
    for (const auto& p : res.points)
        std::printf("n=%5d  mean loss %.5e  (sigma_n %.4f, t* %.0f)\n", p.n,
                    p.mean_test_l2, p.sigma_n, p.t_star);
    std::printf("fitted exponent %.4f (unsquared %.4f), theoretical %.4f, "
                "ratio %.3f\n",
                res.slope_squared, res.slope_unsquared, res.theory, res.ratio);
    std::printf("sign %s, band [0.4, 1.5] %s\n", res.sign_ok ? "ok" : "FAIL",
                res.band_ok ? "ok" : "FAIL");
    std::printf("points: %s\nfit: %s\nmanifest: %s\n",
                res.points_csv_path.c_str(), res.fit_csv_path.c_str(),
                res.manifest_path.c_str());
    return res.sign_ok && res.band_ok ? 0 : 1;
}

int run_schedule_cmd(rsk::RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string csv = rsk::schedule_table_csv(ctx.config);
    std::fputs(csv.c_str(), stdout);
    if (!ctx.out_dir.empty()) {
        const std::string path = ctx.out_dir + "/schedule.csv";
        rsk::write_text_file(path, csv);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        const std::string manifest =
            rsk::write_manifest(ctx, "schedule", wall, {path});
        std::printf("schedule: %s\nmanifest: %s\n", path.c_str(),
                    manifest.c_str());
    }
    return 0;
}

int run_verify_cmd(bool quick, std::uint64_t seed) {
    const auto results = rsk::run_verify(quick, seed);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%s  %-20s %s  [%.2fs]\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        all_pass = all_pass && r.pass;
    }
    std::printf("%s\n", all_pass ? "all checks passed" : "CHECKS FAILED");
    return all_pass ? 0 : 1;
}

int run_simulate_cmd(rsk::RunContext& ctx) {
    const auto res = rsk::run_simulate(ctx);
    const auto& r = res.row;
    std::printf("%s D=%d type=%s %s n=%d sigma=%.3f seed=%d\n",
                r.learner.c_str(), r.D, r.type.c_str(), r.regularizer.c_str(),
                r.n, r.sigma, r.seed);
    std::printf("test_l2 %.6e  val_l2 %.6e  t_used %.0f\n", r.test_l2,
                r.val_l2, r.t_used);
    for (const auto& o : res.outputs) std::printf("output: %s\n", o.c_str());
    std::printf("manifest: %s\n", res.manifest_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-smoothing kernel gradient descent toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_dir;
    std::uint64_t seed = 2024;
    int workers = 1;
    bool quick = false;
    app.add_option("--config", config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (default 2024)");
    app.add_option("--workers", workers, "parallel cell workers")
        ->check(CLI::PositiveNumber);
    app.add_flag("--quick", quick, "reduced grids and draw counts");
    app.add_option("--out", out_dir, "output directory (overrides config)");

    auto* t1 = app.add_subcommand(
        "table1", "loss grid across dims, noise types, regularizers");
    auto* uc = app.add_subcommand(
        "ucurve", "loss vs smoothing scale with validation picks");
    auto* rt = app.add_subcommand(
        "rate", "scheduled-kernel loss decay against training size");
    auto* sc = app.add_subcommand(
        "schedule", "theorem-driven hyperparameter schedule table");
    auto* vf =
        app.add_subcommand("verify", "property self-checks (exit 1 on failure)");
    auto* sm = app.add_subcommand(
        "simulate", "train one configured cell; dump dataset, curve, model");

    CLI11_PARSE(app, argc, argv);

    try {
        if (vf->parsed()) return run_verify_cmd(quick, seed);

        rsk::RunContext ctx(make_config(config_path, quick, out_dir), seed);
        ctx.workers = workers;
        ctx.quick = quick;

        if (t1->parsed()) return run_table1_cmd(ctx);
        if (uc->parsed()) return run_ucurve_cmd(ctx);
        if (rt->parsed()) return run_rate_cmd(ctx);
        if (sc->parsed()) return run_schedule_cmd(ctx);
        if (sm->parsed()) return run_simulate_cmd(ctx);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
