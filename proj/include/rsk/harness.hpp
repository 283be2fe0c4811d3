#pragma once

// Experiment orchestration: turns a config plus a master seed into result
// rows, summary tables, and manifests. Every cell of the study grid
// (D x noise type x regularizer x size x sigma x seed) is an independent job;
// (config, master seed) determines every emitted CSV byte regardless of the
// worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "rsk/config_io.hpp"
#include "rsk/datagen.hpp"
#include "rsk/io_util.hpp"
#include "rsk/kernel_gd.hpp"
#include "rsk/mlp.hpp"
#include "rsk/noise.hpp"
#include "rsk/quadrature.hpp"
#include "rsk/rng.hpp"
#include "rsk/schedules.hpp"
#include "rsk/smoothing.hpp"
#include "rsk/version.hpp"

namespace rsk {

// ---------------------------------------------------------------------------
// Rows and row identity.

struct ResultRow {
    std::string learner;      // mlp | kernel_gd
    int D = 1;                // ambient dimension
    std::string type = "N";   // G | L | N
    std::string regularizer = "early_stop";
    int n = 0;
    double sigma = 0.0;
    int seed = 0;
    double test_l2 = 0.0;     // vs noiseless truth
    double val_l2 = 0.0;      // vs noisy validation targets (selection metric)
    double t_used = 0.0;
};

struct RowSpec {
    std::string learner;
    int D = 1;
    std::string type = "N";
    std::string regularizer = "early_stop";
    int n = 0;
    double sigma = 0.0;
    int seed = 0;
};

using RowKey = std::tuple<std::string, int, std::string, std::string, int, double, int>;

// sigma = 0 means no augmentation whatever the nominal type, so such rows
// collapse onto the N row and the sigma = 0 grid column reproduces the
// no-smoothing run bit for bit.
inline RowSpec canonical(RowSpec s) {
    if (s.sigma == 0.0) s.type = "N";
    if (s.type == "N") s.sigma = 0.0;
    return s;
}

inline RowKey key_of(const RowSpec& s) {
    return {s.learner, s.D, s.type, s.regularizer, s.n, s.sigma, s.seed};
}

inline RowKey key_of(const ResultRow& r) {
    return {r.learner, r.D, r.type, r.regularizer, r.n, r.sigma, r.seed};
}

// ---------------------------------------------------------------------------
// Context: config, seed, caches. Truths and datasets are built serially and
// shared read-only by the worker pool; rows accumulate across calls so
// overlapping grids (summary table, U-curve, acceptance phases) train each
// cell once per process.

struct RunContext {
    ExperimentConfig config;
    std::uint64_t master_seed = 2024;
    int workers = 1;
    bool quick = false;  // recorded in manifests; grids are already applied
    std::string out_dir;

    std::map<std::pair<int, int>, std::shared_ptr<const GroundTruth>> truths;
    std::map<std::tuple<int, int, int>, std::shared_ptr<const Dataset>> datasets;
    std::map<RowKey, ResultRow> rows;
    std::mutex rows_mu;

    RunContext() = default;
    explicit RunContext(ExperimentConfig cfg, std::uint64_t seed = 2024)
        : config(std::move(cfg)), master_seed(seed), out_dir(config.out_dir) {
        config.validate();
    }
};

namespace detail {

// Seed derivation. A ground truth is pinned by (D, seed) so every size and
// learner sees the same function; datasets extend that by n; training streams
// additionally separate regularizer, noise type, and sigma.
inline std::uint64_t truth_seed(std::uint64_t master, int D, int seed) {
    return derive_seed(derive_seed(master, 0x54525554u),
                       static_cast<std::uint64_t>(D) * 1000003u +
                           static_cast<std::uint64_t>(seed));
}

inline std::uint64_t dataset_seed(std::uint64_t master, int D, int seed, int n) {
    return derive_seed(truth_seed(master, D, seed),
                       50000u + static_cast<std::uint64_t>(n));
}

inline std::uint64_t train_seed(std::uint64_t master, const RowSpec& s) {
    const std::uint64_t reg = s.regularizer == "weight_decay" ? 1 : 0;
    const std::uint64_t type = s.type == "G" ? 0 : s.type == "L" ? 1 : 2;
    const auto milli = static_cast<std::uint64_t>(std::llround(s.sigma * 1000.0));
    return derive_seed(dataset_seed(master, s.D, s.seed, s.n),
                       reg * 1000000u + type * 100000u + milli);
}

inline SmoothingRegime regime_from_string(const std::string& r) {
    if (r == "poly") return SmoothingRegime::PolySmoothing;
    if (r == "gaussian") return SmoothingRegime::GaussianSmoothing;
    if (r == "tensor_poly") return SmoothingRegime::TensorPolySmoothing;
    throw std::invalid_argument("unknown schedule regime: " + r);
}

inline std::string cell_label(const RowSpec& s) {
    std::ostringstream os;
    os << "cell(" << s.learner << ", D=" << s.D << ", type=" << s.type
       << ", reg=" << s.regularizer << ", n=" << s.n << ", sigma=" << s.sigma
       << ", seed=" << s.seed << ")";
    return os.str();
}

// Fixed-order job runner. Worker threads pull indices from a shared counter;
// results land in caller-indexed slots, so output order never depends on
// scheduling. The first failure is reported after all workers drain.
template <class Body>
inline void run_jobs(int workers, int njobs, Body&& body) {
    if (njobs <= 0) return;
    if (workers <= 1 || njobs == 1) {
        for (int i = 0; i < njobs; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::string first_err;
    auto drain = [&] {
        for (int i = next.fetch_add(1); i < njobs; i = next.fetch_add(1)) {
            try {
                body(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (first_err.empty()) first_err = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nt = std::min(workers, njobs);
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
    if (!first_err.empty()) throw std::runtime_error(first_err);
}

inline NoiseSpec noise_for(const ExperimentConfig& cfg, const std::string& type,
                           double sigma, int D, double laplace_shape) {
    if (type == "N" || sigma == 0.0) return NoiseSpec::none(D);
    if (type == "G") return NoiseSpec::gaussian(sigma, D);
    if (type == "L") return NoiseSpec::generalized_laplace(sigma, laplace_shape, D);
    (void)cfg;
    throw std::invalid_argument("unknown noise type: " + type);
}

struct MlpCellOutcome {
    MlpTrainResult train;
    double test_l2 = 0.0;
    double val_l2 = 0.0;
};

// Weight-decay rows either use the fixed strength or, when a candidate grid is
// configured, train once per strength and keep the lowest validation loss
// (ties to the smaller strength). Every candidate shares the seed, the initial
// weights, and the augmentation stream, so the comparison isolates the decay.
inline MlpCellOutcome run_mlp_cell(const ExperimentConfig& cfg, const Dataset& ds,
                                   const RowSpec& s, std::uint64_t master) {
    const bool wd = s.regularizer == "weight_decay";
    SgdConfig sgd;
    sgd.lr = cfg.mlp.lr;
    sgd.momentum = cfg.mlp.momentum;
    sgd.batch_size = cfg.mlp.batch_size;
    sgd.max_iters = wd ? cfg.mlp.wd_iters : cfg.mlp.max_iters;
    sgd.eval_every = cfg.mlp.eval_every;
    sgd.augment_subsample = cfg.mlp.augment_subsample;
    sgd.eval_draws = cfg.mlp.eval_draws;
    sgd.select = wd ? SgdConfig::Select::Final : SgdConfig::Select::BestValidation;
    if (!wd) sgd.patience = cfg.mlp.patience;
    sgd.seed = train_seed(master, s);

    Rng init_rng(derive_seed(dataset_seed(master, s.D, s.seed, s.n), 777));
    const MlpModel init =
        MlpModel::kaiming(s.D, cfg.mlp.hidden1, cfg.mlp.hidden2, init_rng);
    const NoiseSpec noise = noise_for(cfg, s.type, s.sigma, s.D, cfg.laplace_shape);

    std::vector<double> strengths;
    if (wd && !cfg.mlp.weight_decay_grid.empty())
        strengths = cfg.mlp.weight_decay_grid;
    else
        strengths = {wd ? cfg.mlp.weight_decay : 0.0};

    MlpCellOutcome out;
    double best_strength = 0.0;
    bool have = false;
    for (double strength : strengths) {
        sgd.weight_decay = strength;
        MlpCellOutcome cand;
        cand.train = train_augmented(init, ds.train_X, ds.train_y, noise,
                                     cfg.mlp.noise_draws, sgd, ds.val_X, ds.val_y);
        const auto& bank = cand.train.noise_draws;
        cand.val_l2 = mean_squared_error(
            predict_smoothed(cand.train.model, bank, ds.val_X, cfg.mlp.eval_draws),
            ds.val_y);
        cand.test_l2 = mean_squared_error(
            predict_smoothed(cand.train.model, bank, ds.test_X, cfg.mlp.eval_draws),
            ds.test_y);
        if (!have || cand.val_l2 < out.val_l2 ||
            (cand.val_l2 == out.val_l2 && strength < best_strength)) {
            out = std::move(cand);
            best_strength = strength;
            have = true;
        }
    }
    return out;
}

struct KernelCellOutcome {
    FitResult fit;
    ScheduleParams sched;
    double test_l2 = 0.0;
    double val_l2 = 0.0;
};

// Kernel cells follow the theoretical schedule for the horizon: early_stop
// runs the closed form exactly t* steps, weight_decay runs alpha* to its
// iteration floor. The noise scale is the row's sigma (the rate study passes
// the schedule's own sigma_n); polynomial regimes take the Laplace shape from
// the schedule, since that is what t* was derived for.
inline KernelCellOutcome run_kernel_cell(const ExperimentConfig& cfg,
                                         const Dataset& ds, const RowSpec& s,
                                         std::uint64_t master) {
    const ManifoldSpec mani = manifold_for_dim(s.D, cfg.radius);
    const SmoothingRegime regime = regime_from_string(cfg.kernel.regime);
    KernelCellOutcome out;
    out.sched = schedule(regime, s.n, s.D, mani.intrinsic_dim(), cfg.kernel.m0,
                         cfg.kernel.mf, cfg.kernel.c_prop);

    const double shape = regime == SmoothingRegime::GaussianSmoothing
                             ? cfg.laplace_shape
                             : out.sched.m_eps;
    const NoiseSpec noise = noise_for(cfg, s.type, s.sigma, s.D, shape);
    const KernelSpec kernel = KernelSpec::matern(cfg.kernel.m0, cfg.kernel.phi, s.D);

    Rng gram_rng(derive_seed(train_seed(master, s), 11));
    GramOptions gopts;
    if (s.D == 1) gopts.x_max_hint = 1.0;  // unit line: all differences inside
    const SmoothedGram gram = build_gram(kernel, noise, cfg.kernel.noise_draws,
                                         ds.train_X, gram_rng, gopts);

    TrainConfig tc;
    tc.beta = cfg.kernel.step_scale / static_cast<double>(s.n);
    tc.mode = FitMode::ClosedForm;
    const bool wd = s.regularizer == "weight_decay";
    const double horizon = wd ? out.sched.t_wd_floor : out.sched.t_star;
    if (!(horizon <= 4.0e18))
        throw std::runtime_error(
            "scheduled horizon exceeds a runnable iteration count; "
            "use the gaussian regime or a smaller c_prop");
    tc.alpha = wd ? out.sched.alpha_star : 0.0;
    tc.stop = StopRule::fixed(static_cast<long>(horizon));
    tc.t_max = std::max<long>(tc.t_max, static_cast<long>(horizon));

    out.fit = gd_fit(gram, ds.train_y, tc);
    out.val_l2 = mean_squared_error(predict(gram, out.fit, ds.val_X), ds.val_y);
    out.test_l2 = mean_squared_error(predict(gram, out.fit, ds.test_X), ds.test_y);
    return out;
}

}  // namespace detail

// Serial pre-build of the shared inputs, then one parallel pass over the
// missing rows. Returns only after every requested row is cached.
inline void ensure_rows(RunContext& ctx, const std::vector<RowSpec>& requests) {
    std::map<RowKey, RowSpec> todo;
    for (const RowSpec& raw : requests) {
        const RowSpec s = canonical(raw);
        const RowKey k = key_of(s);
        if (!ctx.rows.count(k)) todo.emplace(k, s);
    }
    if (todo.empty()) return;

    for (const auto& [k, s] : todo) {
        const auto tk = std::make_pair(s.D, s.seed);
        if (!ctx.truths.count(tk)) {
            const ManifoldSpec mani = manifold_for_dim(s.D, ctx.config.radius);
            const KernelSpec cov = KernelSpec::matern_classical(
                ctx.config.truth.nu, ctx.config.truth.rho,
                ctx.config.truth.variance, s.D);
            Rng rng(detail::truth_seed(ctx.master_seed, s.D, s.seed));
            ctx.truths.emplace(
                tk, std::make_shared<GroundTruth>(draw_ground_truth(
                        mani, cov, ctx.config.truth.anchors,
                        ctx.config.truth.jitter, rng)));
        }
        const auto dk = std::make_tuple(s.D, s.seed, s.n);
        if (!ctx.datasets.count(dk)) {
            const ManifoldSpec mani = manifold_for_dim(s.D, ctx.config.radius);
            Rng rng(detail::dataset_seed(ctx.master_seed, s.D, s.seed, s.n));
            ctx.datasets.emplace(
                dk, std::make_shared<Dataset>(make_dataset(
                        *ctx.truths.at(tk), mani, s.n, rng,
                        ctx.config.noise_var, ctx.config.n_test)));
        }
    }

    // Shared quadrature tables are built eagerly so worker threads only read.
    gauss_legendre_cached(16);
    gauss_legendre_cached(64);

    std::vector<RowSpec> jobs;
    jobs.reserve(todo.size());
    for (const auto& [k, s] : todo) jobs.push_back(s);
    std::vector<ResultRow> results(jobs.size());

    detail::run_jobs(ctx.workers, static_cast<int>(jobs.size()), [&](int i) {
        const RowSpec& s = jobs[static_cast<std::size_t>(i)];
        const Dataset& ds = *ctx.datasets.at({s.D, s.seed, s.n});
        ResultRow row;
        row.learner = s.learner;
        row.D = s.D;
        row.type = s.type;
        row.regularizer = s.regularizer;
        row.n = s.n;
        row.sigma = s.sigma;
        row.seed = s.seed;
        try {
            if (s.learner == "mlp") {
                const auto out = detail::run_mlp_cell(ctx.config, ds, s, ctx.master_seed);
                row.test_l2 = out.test_l2;
                row.val_l2 = out.val_l2;
                row.t_used = static_cast<double>(out.train.t_used);
            } else if (s.learner == "kernel_gd") {
                const auto out = detail::run_kernel_cell(ctx.config, ds, s, ctx.master_seed);
                row.test_l2 = out.test_l2;
                row.val_l2 = out.val_l2;
                row.t_used = static_cast<double>(out.fit.t_used);
            } else {
                throw std::invalid_argument("unknown learner: " + s.learner);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(detail::cell_label(s) + ": " + e.what());
        }
        results[static_cast<std::size_t>(i)] = std::move(row);
    });

    std::lock_guard<std::mutex> lk(ctx.rows_mu);
    for (const ResultRow& r : results) ctx.rows.emplace(key_of(r), r);
}

inline const ResultRow& row_at(const RunContext& ctx, const RowSpec& spec) {
    const auto it = ctx.rows.find(key_of(canonical(spec)));
    if (it == ctx.rows.end())
        throw std::logic_error("row not computed: " + detail::cell_label(spec));
    return it->second;
}

// ---------------------------------------------------------------------------
// Emission.

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Standard error of the mean; zero for a single observation.
inline double stderr_of(const std::vector<double>& v) {
    const auto n = v.size();
    if (n < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median that always returns an element, so a median over grid values stays
// on the grid (equals median_of for odd counts).
inline double lower_median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean_of(x), my = mean_of(y);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

inline void append_row_csv(std::string& out, const ResultRow& r) {
    out += r.learner;
    out += ',';
    out += std::to_string(r.D);
    out += ',';
    out += r.type;
    out += ',';
    out += r.regularizer;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += shortest(r.sigma);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += shortest(r.test_l2);
    out += ',';
    out += shortest(r.val_l2);
    out += ',';
    out += shortest(r.t_used);
    out += '\n';
}

inline constexpr const char* kRowsHeader =
    "learner,D,type,regularizer,n,sigma,seed,test_l2,val_l2,t_used\n";

inline std::string rows_csv(std::vector<ResultRow> rows, const char* schema) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return key_of(a) < key_of(b);
    });
    std::string out = std::string("# ") + schema + "\n" + kRowsHeader;
    for (const ResultRow& r : rows) append_row_csv(out, r);
    return out;
}

}  // namespace detail

inline std::string write_manifest(const RunContext& ctx, const std::string& command,
                                  double wall_seconds,
                                  const std::vector<std::string>& outputs,
                                  const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j;
    j["command"] = command;
    j["library_version"] = kVersionString;
    j["master_seed"] = ctx.master_seed;
    j["workers"] = ctx.workers;
    j["quick"] = ctx.quick;
    j["wall_seconds"] = wall_seconds;
    j["outputs"] = outputs;
    j["config"] = config_to_json(ctx.config);
    j.update(extra);
    const std::string path = ctx.out_dir + "/manifest_" + command + ".json";
    write_text_file(path, j.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// Summary table (the study's main comparison).

struct CellSummary {
    std::string learner;
    int D = 1;
    std::string type = "N";
    std::string regularizer = "early_stop";
    int n = 0;
    int seeds = 0;
    double mean_sigma = 0.0;
    double mean_test_l2 = 0.0;
    double stderr_test_l2 = 0.0;
    double mean_val_l2 = 0.0;
    double mean_t_used = 0.0;
};

struct Table1Result {
    std::vector<ResultRow> rows;        // every trained grid row
    std::vector<CellSummary> summary;   // selected-sigma means per cell
    int n_vs_g_pass = 0;                // cells where no smoothing loses to G
    int n_vs_g_total = 0;
    int monotone_pass = 0;              // cells where largest n beats smallest
    int monotone_total = 0;
    std::string rows_csv_path, summary_csv_path, manifest_path;
};

namespace detail {

// Per-type sigma grid for the summary table. N never smooths.
inline std::vector<double> table_sigmas(const ExperimentConfig& c,
                                        const std::string& type) {
    if (type == "N") return {0.0};
    const auto& custom = type == "G" ? c.table1_sigma_g : c.table1_sigma_l;
    if (!custom.empty()) return custom;
    std::vector<double> grid;
    for (double s : c.sigma_grid)
        if (s > 0.0) grid.push_back(s);
    if (grid.empty())
        throw std::invalid_argument("config: sigma_grid has no positive entries");
    return grid;
}

// Validation pick with ties toward smaller sigma: grids are ascending and the
// comparison is strict.
inline const ResultRow* select_by_validation(const RunContext& ctx,
                                             const RowSpec& base,
                                             const std::vector<double>& sigmas) {
    const ResultRow* best = nullptr;
    for (double sg : sigmas) {
        RowSpec s = base;
        s.sigma = sg;
        const ResultRow& r = row_at(ctx, s);
        if (!best || r.val_l2 < best->val_l2) best = &r;
    }
    return best;
}

}  // namespace detail

inline Table1Result run_table1(RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig& c = ctx.config;

    std::vector<RowSpec> wanted;
    for (int D : c.dims)
        for (const auto& type : c.noise_types)
            for (const auto& reg : c.regularizers)
                for (int n : c.sizes)
                    for (double sg : detail::table_sigmas(c, type))
                        for (int seed = 0; seed < c.seeds; ++seed)
                            wanted.push_back(canonical(
                                {c.learner, D, type, reg, n, sg, seed}));
    ensure_rows(ctx, wanted);

    Table1Result res;
    {
        std::set<RowKey> seen;
        for (const RowSpec& s : wanted)
            if (seen.insert(key_of(s)).second) res.rows.push_back(row_at(ctx, s));
    }

    // Selected-sigma summaries.
    std::map<std::tuple<int, std::string, std::string, int>, CellSummary> cells;
    for (int D : c.dims)
        for (const auto& type : c.noise_types)
            for (const auto& reg : c.regularizers)
                for (int n : c.sizes) {
                    const auto sigmas = detail::table_sigmas(c, type);
                    std::vector<double> tests, vals, sgs, ts;
                    for (int seed = 0; seed < c.seeds; ++seed) {
                        const ResultRow* pick = detail::select_by_validation(
                            ctx, {c.learner, D, type, reg, n, 0.0, seed}, sigmas);
                        tests.push_back(pick->test_l2);
                        vals.push_back(pick->val_l2);
                        sgs.push_back(pick->sigma);
                        ts.push_back(pick->t_used);
                    }
                    CellSummary cs;
                    cs.learner = c.learner;
                    cs.D = D;
                    cs.type = type;
                    cs.regularizer = reg;
                    cs.n = n;
                    cs.seeds = c.seeds;
                    cs.mean_sigma = detail::mean_of(sgs);
                    cs.mean_test_l2 = detail::mean_of(tests);
                    cs.stderr_test_l2 = detail::stderr_of(tests);
                    cs.mean_val_l2 = detail::mean_of(vals);
                    cs.mean_t_used = detail::mean_of(ts);
                    cells.emplace(std::make_tuple(D, type, reg, n), cs);
                    res.summary.push_back(cs);
                }

    // No-smoothing should lose to validated Gaussian smoothing cell by cell.
    const bool has_g = std::count(c.noise_types.begin(), c.noise_types.end(), "G");
    const bool has_n = std::count(c.noise_types.begin(), c.noise_types.end(), "N");
    if (has_g && has_n)
        for (int D : c.dims)
            for (const auto& reg : c.regularizers)
                for (int n : c.sizes) {
                    ++res.n_vs_g_total;
                    if (cells.at({D, "N", reg, n}).mean_test_l2 >
                        cells.at({D, "G", reg, n}).mean_test_l2)
                        ++res.n_vs_g_pass;
                }

    // More data should help: largest size beats smallest in every row group.
    if (c.sizes.size() >= 2)
        for (int D : c.dims)
            for (const auto& type : c.noise_types)
                for (const auto& reg : c.regularizers) {
                    ++res.monotone_total;
                    if (cells.at({D, type, reg, c.sizes.back()}).mean_test_l2 <
                        cells.at({D, type, reg, c.sizes.front()}).mean_test_l2)
                        ++res.monotone_pass;
                }

    if (!ctx.out_dir.empty()) {
        res.rows_csv_path = ctx.out_dir + "/table1_rows.csv";
        write_text_file(res.rows_csv_path, detail::rows_csv(res.rows, "rsk-rows-v1"));

        std::string out = "# rsk-table1-v1\n";
        out +=
            "learner,D,type,regularizer,n,seeds,mean_sigma,mean_test_l2,"
            "stderr_test_l2,mean_val_l2,mean_t_used\n";
        for (const CellSummary& cs : res.summary) {
            out += cs.learner + ',' + std::to_string(cs.D) + ',' + cs.type + ',' +
                   cs.regularizer + ',' + std::to_string(cs.n) + ',' +
                   std::to_string(cs.seeds) + ',' + shortest(cs.mean_sigma) + ',' +
                   shortest(cs.mean_test_l2) + ',' + shortest(cs.stderr_test_l2) +
                   ',' + shortest(cs.mean_val_l2) + ',' + shortest(cs.mean_t_used) +
                   '\n';
        }
        res.summary_csv_path = ctx.out_dir + "/table1_summary.csv";
        write_text_file(res.summary_csv_path, out);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        res.manifest_path = write_manifest(
            ctx, "table1", wall, {res.rows_csv_path, res.summary_csv_path},
            {{"n_vs_g_pass", res.n_vs_g_pass},
             {"n_vs_g_total", res.n_vs_g_total},
             {"monotone_pass", res.monotone_pass},
             {"monotone_total", res.monotone_total}});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Loss-versus-sigma curves.

struct UcurvePoint {
    int n = 0;
    double sigma = 0.0;
    int seeds = 0;
    double mean_test_l2 = 0.0;
    double stderr_test_l2 = 0.0;
    double mean_val_l2 = 0.0;
    bool selected = false;  // sigma equals the median validation pick
};

struct UcurvePick {
    int n = 0;
    int seed = 0;
    double sigma_opt = 0.0;
    bool interior = false;  // strictly inside the sigma grid
    double val_l2 = 0.0;
    double test_l2 = 0.0;
};

struct UcurveResult {
    std::vector<UcurvePoint> curve;
    std::vector<UcurvePick> picks;
    std::map<int, double> median_sigma;   // per size
    std::map<int, int> interior_count;    // per size
    std::string curve_csv_path, picks_csv_path, manifest_path;
};

inline UcurveResult run_ucurve(RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig& c = ctx.config;
    const int D = c.ucurve.dim;
    const std::string& type = c.ucurve.type;

    std::vector<RowSpec> wanted;
    for (int n : c.ucurve.sizes)
        for (double sg : c.sigma_grid)
            for (int seed = 0; seed < c.seeds; ++seed)
                wanted.push_back(
                    canonical({c.learner, D, type, "early_stop", n, sg, seed}));
    ensure_rows(ctx, wanted);

    UcurveResult res;
    for (int n : c.ucurve.sizes) {
        std::vector<double> sig_opts;
        for (int seed = 0; seed < c.seeds; ++seed) {
            const ResultRow* pick = detail::select_by_validation(
                ctx, {c.learner, D, type, "early_stop", n, 0.0, seed}, c.sigma_grid);
            UcurvePick p;
            p.n = n;
            p.seed = seed;
            p.sigma_opt = pick->sigma;
            p.interior = pick->sigma != c.sigma_grid.front() &&
                         pick->sigma != c.sigma_grid.back();
            p.val_l2 = pick->val_l2;
            p.test_l2 = pick->test_l2;
            res.picks.push_back(p);
            sig_opts.push_back(p.sigma_opt);
            res.interior_count[n] += p.interior ? 1 : 0;
        }
        res.median_sigma[n] = detail::lower_median_of(sig_opts);

        for (double sg : c.sigma_grid) {
            std::vector<double> tests, vals;
            for (int seed = 0; seed < c.seeds; ++seed) {
                const ResultRow& r =
                    row_at(ctx, {c.learner, D, type, "early_stop", n, sg, seed});
                tests.push_back(r.test_l2);
                vals.push_back(r.val_l2);
            }
            UcurvePoint pt;
            pt.n = n;
            pt.sigma = sg;
            pt.seeds = c.seeds;
            pt.mean_test_l2 = detail::mean_of(tests);
            pt.stderr_test_l2 = detail::stderr_of(tests);
            pt.mean_val_l2 = detail::mean_of(vals);
            pt.selected = sg == res.median_sigma[n];
            res.curve.push_back(pt);
        }
    }

    if (!ctx.out_dir.empty()) {
        std::string out = "# rsk-ucurve-v1\n";
        out += "learner,D,type,n,sigma,seeds,mean_test_l2,stderr_test_l2,"
               "mean_val_l2,selected\n";
        for (const UcurvePoint& p : res.curve) {
            out += c.learner + ',' + std::to_string(D) + ',' + type + ',' +
                   std::to_string(p.n) + ',' + shortest(p.sigma) + ',' +
                   std::to_string(p.seeds) + ',' + shortest(p.mean_test_l2) + ',' +
                   shortest(p.stderr_test_l2) + ',' + shortest(p.mean_val_l2) +
                   ',' + (p.selected ? "1" : "0") + '\n';
        }
        res.curve_csv_path = ctx.out_dir + "/ucurve_curve.csv";
        write_text_file(res.curve_csv_path, out);

        std::string picks = "# rsk-ucurve-picks-v1\n";
        picks += "learner,D,type,n,seed,sigma_opt,interior,val_l2,test_l2\n";
        for (const UcurvePick& p : res.picks) {
            picks += c.learner + ',' + std::to_string(D) + ',' + type + ',' +
                     std::to_string(p.n) + ',' + std::to_string(p.seed) + ',' +
                     shortest(p.sigma_opt) + ',' + (p.interior ? "1" : "0") + ',' +
                     shortest(p.val_l2) + ',' + shortest(p.test_l2) + '\n';
        }
        res.picks_csv_path = ctx.out_dir + "/ucurve_picks.csv";
        write_text_file(res.picks_csv_path, picks);

        nlohmann::json extra;
        for (const auto& [n, med] : res.median_sigma) {
            extra["median_sigma"][std::to_string(n)] = med;
            extra["interior_count"][std::to_string(n)] = res.interior_count[n];
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        res.manifest_path = write_manifest(
            ctx, "ucurve", wall, {res.curve_csv_path, res.picks_csv_path}, extra);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Convergence-rate study (kernel learner on the line).

struct RatePoint {
    int n = 0;
    int seeds = 0;
    double sigma_n = 0.0;   // schedule's smoothing scale
    double t_star = 0.0;
    double mean_test_l2 = 0.0;
};

struct RateResult {
    std::vector<RatePoint> points;
    double slope_squared = 0.0;    // d log(mean squared loss) / d log n
    double slope_unsquared = 0.0;  // same fit on the unsquared-loss convention
    double theory = 0.0;           // -2 mf / (2 mf + d)
    double ratio = 0.0;            // slope_squared / theory
    bool sign_ok = false;
    bool band_ok = false;          // ratio within [0.4, 1.5]
    std::string points_csv_path, fit_csv_path, manifest_path;
};

inline RateResult run_rate(RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig& c = ctx.config;
    const SmoothingRegime regime = detail::regime_from_string(c.kernel.regime);
    const std::string type =
        regime == SmoothingRegime::GaussianSmoothing ? "G" : "L";

    RateResult res;
    std::vector<RowSpec> wanted;
    std::map<int, ScheduleParams> scheds;
    for (int n : c.rate_sizes) {
        scheds.emplace(n, schedule(regime, n, 1, 1, c.kernel.m0, c.kernel.mf,
                                   c.kernel.c_prop));
        for (int seed = 0; seed < c.seeds; ++seed)
            wanted.push_back(canonical({"kernel_gd", 1, type, "early_stop", n,
                                        scheds.at(n).sigma_n, seed}));
    }
    ensure_rows(ctx, wanted);

    std::vector<double> logn, logloss;
    for (int n : c.rate_sizes) {
        std::vector<double> tests;
        for (int seed = 0; seed < c.seeds; ++seed)
            tests.push_back(row_at(ctx, {"kernel_gd", 1, type, "early_stop", n,
                                         scheds.at(n).sigma_n, seed})
                                .test_l2);
        RatePoint p;
        p.n = n;
        p.seeds = c.seeds;
        p.sigma_n = scheds.at(n).sigma_n;
        p.t_star = scheds.at(n).t_star;
        p.mean_test_l2 = detail::mean_of(tests);
        res.points.push_back(p);
        logn.push_back(std::log(static_cast<double>(n)));
        logloss.push_back(std::log(p.mean_test_l2));
    }

    res.slope_squared = detail::ls_slope(logn, logloss);
    res.slope_unsquared = 0.5 * res.slope_squared;
    res.theory = scheds.begin()->second.rate_exponent;
    res.ratio = res.slope_squared / res.theory;
    res.sign_ok = res.slope_squared < 0.0;
    res.band_ok = res.ratio >= 0.4 && res.ratio <= 1.5;

    if (!ctx.out_dir.empty()) {
        std::string pts = "# rsk-rate-v1\n";
        pts += "n,seeds,sigma_n,t_star,mean_test_l2,log_n,log_mean_test_l2\n";
        for (std::size_t i = 0; i < res.points.size(); ++i) {
            const RatePoint& p = res.points[i];
            pts += std::to_string(p.n) + ',' + std::to_string(p.seeds) + ',' +
                   shortest(p.sigma_n) + ',' + shortest(p.t_star) + ',' +
                   shortest(p.mean_test_l2) + ',' + shortest(logn[i]) + ',' +
                   shortest(logloss[i]) + '\n';
        }
        res.points_csv_path = ctx.out_dir + "/rate_points.csv";
        write_text_file(res.points_csv_path, pts);

        std::string fitcsv = "# rsk-rate-fit-v1\n";
        fitcsv += "slope_squared,slope_unsquared,theory_exponent,ratio,sign_ok,band_ok\n";
        fitcsv += shortest(res.slope_squared) + ',' + shortest(res.slope_unsquared) +
                  ',' + shortest(res.theory) + ',' + shortest(res.ratio) + ',' +
                  (res.sign_ok ? "1" : "0") + ',' + (res.band_ok ? "1" : "0") + '\n';
        res.fit_csv_path = ctx.out_dir + "/rate_fit.csv";
        write_text_file(res.fit_csv_path, fitcsv);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        res.manifest_path = write_manifest(
            ctx, "rate", wall, {res.points_csv_path, res.fit_csv_path},
            {{"slope_squared", res.slope_squared},
             {"theory_exponent", res.theory},
             {"ratio", res.ratio},
             {"sign_ok", res.sign_ok},
             {"band_ok", res.band_ok}});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Single-cell walkthrough: dataset, training curve, snapshot, row.

struct SimulateResult {
    ResultRow row;
    std::vector<std::string> outputs;
    std::string manifest_path;
};

inline SimulateResult run_simulate(RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig& c = ctx.config;
    const RowSpec spec = canonical({c.learner, c.simulate.dim, c.simulate.type,
                                    c.simulate.regularizer, c.simulate.n,
                                    c.simulate.sigma, c.simulate.seed});
    ensure_rows(ctx, {spec});

    SimulateResult res;
    res.row = row_at(ctx, spec);
    if (ctx.out_dir.empty()) return res;

    const Dataset& ds = *ctx.datasets.at({spec.D, spec.seed, spec.n});
    {
        std::ostringstream os;
        dataset_to_csv(os, ds);
        const std::string path = ctx.out_dir + "/simulate_dataset.csv";
        write_text_file(path, os.str());
        res.outputs.push_back(path);
    }

    std::string curve = "# rsk-curve-v1\niter,train_loss,val_loss\n";
    if (spec.learner == "mlp") {
        const auto out = detail::run_mlp_cell(c, ds, spec, ctx.master_seed);
        for (const TrainCurvePoint& p : out.train.curve)
            curve += std::to_string(p.iter) + ',' + shortest(p.train_loss) + ',' +
                     shortest(p.val_loss) + '\n';
        const std::string snap = ctx.out_dir + "/simulate_model.json";
        save_mlp(out.train.model, snap);
        res.outputs.push_back(snap);
    } else {
        const auto out = detail::run_kernel_cell(c, ds, spec, ctx.master_seed);
        for (std::size_t i = 0; i < out.fit.loss_trajectory.size(); ++i)
            curve += std::to_string(i) + ',' +
                     shortest(out.fit.loss_trajectory[i]) + ",nan\n";
    }
    const std::string curve_path = ctx.out_dir + "/simulate_curve.csv";
    write_text_file(curve_path, curve);
    res.outputs.push_back(curve_path);

    const std::string row_path = ctx.out_dir + "/simulate_row.csv";
    write_text_file(row_path, detail::rows_csv({res.row}, "rsk-rows-v1"));
    res.outputs.push_back(row_path);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.manifest_path = write_manifest(ctx, "simulate", wall, res.outputs);
    return res;
}

// ---------------------------------------------------------------------------
// Schedule table for the configured regime across the configured sizes.

inline std::string schedule_table_csv(const ExperimentConfig& c) {
    const SmoothingRegime regime = detail::regime_from_string(c.kernel.regime);
    std::string out = "# rsk-schedule-v1\n";
    out += "regime,n,D,d,m0,mf,sigma_n,m_eps,nu,t_star,alpha_star,lambda_n,"
           "t_wd_floor,rate_exponent\n";
    for (int D : c.dims) {
        const ManifoldSpec mani = manifold_for_dim(D, c.radius);
        for (int n : c.sizes) {
            const ScheduleParams sp = schedule(regime, n, D, mani.intrinsic_dim(),
                                               c.kernel.m0, c.kernel.mf,
                                               c.kernel.c_prop);
            out += std::string(regime_name(regime)) + ',' + std::to_string(n) +
                   ',' + std::to_string(D) + ',' +
                   std::to_string(mani.intrinsic_dim()) + ',' +
                   shortest(c.kernel.m0) + ',' + shortest(c.kernel.mf) + ',' +
                   shortest(sp.sigma_n) + ',' + shortest(sp.m_eps) + ',' +
                   shortest(sp.nu) + ',' + shortest(sp.t_star) + ',' +
                   shortest(sp.alpha_star) + ',' + shortest(sp.lambda_n) + ',' +
                   shortest(sp.t_wd_floor) + ',' + shortest(sp.rate_exponent) +
                   '\n';
        }
    }
    return out;
}

}  // namespace rsk
