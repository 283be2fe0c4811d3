#pragma once

// Experiment configuration: one human-readable JSON file with every protocol
// default pre-filled, so `table1` with no arguments runs the reference study
// at desk scale. Parsing is strict: unknown keys are errors, and present keys
// override defaults field by field.

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsk/datagen.hpp"
#include "rsk/io_util.hpp"
#include "rsk/mlp.hpp"

namespace rsk {

struct TruthConfig {
    double nu = 5.0;        // classical Matern smoothness of the sampled paths
    double rho = 1.0;       // lengthscale
    double variance = 1.0;
    int anchors = 2000;     // dense grid the path is interpolated from
    double jitter = 1e-10;
};

struct MlpTrainingConfig {
    int hidden1 = 100;
    int hidden2 = 100;
    double lr = 0.01;
    double momentum = 0.9;
    int batch_size = 10;
    double weight_decay = 1e-4;  // coupled decay used by the weight_decay rows
    // Non-empty: weight_decay rows train once per listed strength and keep the
    // one with the lowest validation loss; empty: fixed weight_decay above.
    std::vector<double> weight_decay_grid = {};
    int max_iters = 100000;      // early-stopping rows: iteration budget
    int wd_iters = 10000;        // weight-decay rows: fixed iteration count
    int eval_every = 200;
    int patience = 50;           // evaluation periods without improvement
    int noise_draws = 1000;      // size of the shared augmentation bank
    int augment_subsample = 8;   // draws paired with each minibatch column
    int eval_draws = 0;          // 0 = average over the whole bank at eval time
};

struct KernelLearnerConfig {
    // m0 also controls the spectral-table size on the line: the tail cutoff
    // grows like tol^{-1/(2 m0 - 1)}, so rougher kernels make every
    // cross-kernel evaluation proportionally slower.
    double m0 = 2.5;                      // learner kernel smoothness
    double phi = 0.7071067811865476;      // learner kernel inverse lengthscale
    double mf = 5.5;                      // assumed truth smoothness for schedules
    std::string regime = "gaussian";      // poly | gaussian | tensor_poly
    double c_prop = 1.0;                  // proportionality constant in t*
    double step_scale = 0.9;              // step size beta = step_scale / n
    int noise_draws = 1000;               // empirical smoothing draws
};

struct UcurveConfig {
    int dim = 1;
    std::string type = "G";
    std::vector<int> sizes = {50, 200};
};

struct SimulateConfig {
    int dim = 1;
    std::string type = "G";
    std::string regularizer = "early_stop";
    int n = 200;
    double sigma = 0.1;
    int seed = 0;
};

namespace detail {
inline std::vector<double> default_sigma_grid() {
    std::vector<double> g(13);
    for (int i = 0; i < 13; ++i) g[i] = i / 20.0;  // 0.00, 0.05, ..., 0.60
    return g;
}
}  // namespace detail

struct ExperimentConfig {
    std::string learner = "mlp";  // mlp | kernel_gd
    std::vector<int> dims = {1, 2, 3};
    std::vector<std::string> noise_types = {"G", "L", "N"};
    std::vector<std::string> regularizers = {"early_stop", "weight_decay"};
    std::vector<double> sigma_grid = detail::default_sigma_grid();
    // Per-type smoothing grids for the summary table. Empty means "use the
    // positive part of sigma_grid"; the quick preset narrows them.
    std::vector<double> table1_sigma_g = {};
    std::vector<double> table1_sigma_l = {};
    std::vector<int> sizes = {50, 100, 200};
    int seeds = 15;
    int n_test = 500;
    double noise_var = 0.01;
    double laplace_shape = 2.0;  // shape of the generalized-Laplace smoothing noise
    double radius = 1.0;         // circle/sphere radius; the line ignores it
    TruthConfig truth;
    MlpTrainingConfig mlp;
    KernelLearnerConfig kernel;
    std::vector<int> rate_sizes = {25, 50, 100, 200, 400};
    UcurveConfig ucurve;
    SimulateConfig simulate;
    std::string out_dir = "results";

    void validate() const;
};

// Reduced grids and budgets for the --quick path. Seed counts are left alone:
// the protocol's statistical claims are about seed medians and means.
inline void apply_quick(ExperimentConfig& c) {
    c.sigma_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.3};
    c.table1_sigma_g = {0.1, 0.25};
    c.table1_sigma_l = {0.05, 0.15};
    c.truth.anchors = 800;
    c.mlp.max_iters = 4000;
    c.mlp.wd_iters = 2500;
    c.mlp.patience = 6;
    c.mlp.noise_draws = 200;
    c.mlp.augment_subsample = 4;
    c.mlp.eval_draws = 64;
    c.kernel.noise_draws = 400;
}

inline ManifoldSpec manifold_for_dim(int D, double radius) {
    switch (D) {
        case 1: return ManifoldSpec::line();
        case 2: return ManifoldSpec::circle(radius);
        case 3: return ManifoldSpec::sphere(radius);
        default: throw std::invalid_argument("ambient dimension must be 1, 2, or 3");
    }
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("config: " + msg);
}

template <class T>
inline bool sorted_strict(const std::vector<T>& v) {
    return std::is_sorted(v.begin(), v.end()) &&
           std::adjacent_find(v.begin(), v.end()) == v.end();
}

template <class T>
inline bool subset_of(const std::vector<T>& v, const std::set<T>& allowed) {
    return std::all_of(v.begin(), v.end(),
                       [&](const T& x) { return allowed.count(x) > 0; });
}

// Strict object reader: every key present in the JSON must be consumed.
class KeyGuard {
  public:
    KeyGuard(const nlohmann::json& j, std::string scope)
        : j_(j), scope_(std::move(scope)) {
        if (!j_.is_object())
            throw std::invalid_argument("config: " + scope_ + " must be a JSON object");
    }

    template <class T>
    void take(const char* key, T& field) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            j_.at(key).get_to(field);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config: bad value for " + scoped(key) + ": " + e.what());
        }
    }

    template <class Fn>
    void take_object(const char* key, Fn&& parse) {
        seen_.insert(key);
        if (j_.contains(key)) parse(j_.at(key));
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw std::invalid_argument("config: unknown key " + scoped(item.key()));
    }

  private:
    std::string scoped(const std::string& key) const {
        return scope_.empty() ? key : scope_ + "." + key;
    }
    const nlohmann::json& j_;
    std::string scope_;
    std::set<std::string> seen_;
};

}  // namespace detail

inline void ExperimentConfig::validate() const {
    using detail::require;
    require(learner == "mlp" || learner == "kernel_gd",
            "learner must be mlp or kernel_gd");
    require(!dims.empty() && detail::sorted_strict(dims) &&
                detail::subset_of(dims, std::set<int>{1, 2, 3}),
            "dims must be a sorted subset of {1,2,3}");
    require(!noise_types.empty() && detail::sorted_strict(noise_types) &&
                detail::subset_of(noise_types, std::set<std::string>{"G", "L", "N"}),
            "noise_types must be a sorted subset of {G,L,N}");
    require(!regularizers.empty() && detail::sorted_strict(regularizers) &&
                detail::subset_of(regularizers,
                                  std::set<std::string>{"early_stop", "weight_decay"}),
            "regularizers must be a sorted subset of {early_stop,weight_decay}");
    require(!sigma_grid.empty() && detail::sorted_strict(sigma_grid) &&
                sigma_grid.front() >= 0.0,
            "sigma_grid must be sorted strictly ascending and nonnegative");
    for (const auto* grid : {&table1_sigma_g, &table1_sigma_l})
        require(grid->empty() || (detail::sorted_strict(*grid) && grid->front() > 0.0),
                "table1 sigma grids must be sorted ascending and positive");
    require(!sizes.empty() && detail::sorted_strict(sizes) && sizes.front() >= 8,
            "sizes must be sorted ascending with every entry >= 8");
    require(seeds >= 1, "seeds must be >= 1");
    require(n_test >= 1, "n_test must be >= 1");
    require(noise_var >= 0.0, "noise_var must be >= 0");
    if (std::find(noise_types.begin(), noise_types.end(), "L") != noise_types.end())
        require(laplace_shape > dims.back() / 2.0,
                "laplace_shape must exceed half the largest ambient dimension");
    require(radius > 0.0, "radius must be positive");
    require(truth.nu > 0.0 && truth.rho > 0.0 && truth.variance > 0.0,
            "truth covariance parameters must be positive");
    require(truth.anchors >= 16, "truth.anchors must be >= 16");
    require(truth.jitter > 0.0, "truth.jitter must be positive");
    require(mlp.hidden1 >= 1 && mlp.hidden2 >= 1, "mlp hidden widths must be >= 1");
    require(mlp.lr > 0.0, "mlp.lr must be positive");
    require(mlp.momentum >= 0.0 && mlp.momentum < 1.0, "mlp.momentum must be in [0,1)");
    require(mlp.batch_size >= 1, "mlp.batch_size must be >= 1");
    require(mlp.weight_decay >= 0.0, "mlp.weight_decay must be >= 0");
    for (double wd : mlp.weight_decay_grid)
        require(std::isfinite(wd) && wd >= 0.0,
                "mlp.weight_decay_grid entries must be finite and >= 0");
    require(mlp.max_iters >= 1 && mlp.wd_iters >= 1, "mlp iteration budgets must be >= 1");
    require(mlp.eval_every >= 1, "mlp.eval_every must be >= 1");
    require(mlp.patience >= 1, "mlp.patience must be >= 1");
    require(mlp.noise_draws >= 1, "mlp.noise_draws must be >= 1");
    require(mlp.augment_subsample >= 1, "mlp.augment_subsample must be >= 1");
    require(mlp.eval_draws >= 0, "mlp.eval_draws must be >= 0");
    require(kernel.m0 > 0.5, "kernel.m0 must exceed 1/2 on the line");
    require(kernel.phi > 0.0, "kernel.phi must be positive");
    require(kernel.mf > 0.5, "kernel.mf must exceed 1/2 on the line");
    require(kernel.regime == "poly" || kernel.regime == "gaussian" ||
                kernel.regime == "tensor_poly",
            "kernel.regime must be poly, gaussian, or tensor_poly");
    require(kernel.c_prop > 0.0, "kernel.c_prop must be positive");
    require(kernel.step_scale > 0.0 && kernel.step_scale < 1.0,
            "kernel.step_scale must lie in (0,1)");
    require(kernel.noise_draws >= 1, "kernel.noise_draws must be >= 1");
    require(rate_sizes.size() >= 2 && detail::sorted_strict(rate_sizes) &&
                rate_sizes.front() >= 8,
            "rate_sizes must be >= 2 sorted entries, each >= 8");
    require(ucurve.dim >= 1 && ucurve.dim <= 3, "ucurve.dim must be 1, 2, or 3");
    require(ucurve.type == "G" || ucurve.type == "L", "ucurve.type must be G or L");
    require(!ucurve.sizes.empty() && detail::sorted_strict(ucurve.sizes) &&
                ucurve.sizes.front() >= 8,
            "ucurve.sizes must be sorted ascending with every entry >= 8");
    require(simulate.dim >= 1 && simulate.dim <= 3, "simulate.dim must be 1, 2, or 3");
    require(simulate.type == "G" || simulate.type == "L" || simulate.type == "N",
            "simulate.type must be G, L, or N");
    require(simulate.regularizer == "early_stop" || simulate.regularizer == "weight_decay",
            "simulate.regularizer must be early_stop or weight_decay");
    require(simulate.n >= 8, "simulate.n must be >= 8");
    require(simulate.sigma >= 0.0, "simulate.sigma must be >= 0");
    require(simulate.seed >= 0, "simulate.seed must be >= 0");
    require(!out_dir.empty(), "out_dir must be nonempty");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["learner"] = c.learner;
    j["dims"] = c.dims;
    j["noise_types"] = c.noise_types;
    j["regularizers"] = c.regularizers;
    j["sigma_grid"] = c.sigma_grid;
    j["table1_sigma_g"] = c.table1_sigma_g;
    j["table1_sigma_l"] = c.table1_sigma_l;
    j["sizes"] = c.sizes;
    j["seeds"] = c.seeds;
    j["n_test"] = c.n_test;
    j["noise_var"] = c.noise_var;
    j["laplace_shape"] = c.laplace_shape;
    j["radius"] = c.radius;
    j["truth"] = {{"nu", c.truth.nu},
                  {"rho", c.truth.rho},
                  {"variance", c.truth.variance},
                  {"anchors", c.truth.anchors},
                  {"jitter", c.truth.jitter}};
    j["mlp"] = {{"hidden1", c.mlp.hidden1},
                {"hidden2", c.mlp.hidden2},
                {"lr", c.mlp.lr},
                {"momentum", c.mlp.momentum},
                {"batch_size", c.mlp.batch_size},
                {"weight_decay", c.mlp.weight_decay},
                {"weight_decay_grid", c.mlp.weight_decay_grid},
                {"max_iters", c.mlp.max_iters},
                {"wd_iters", c.mlp.wd_iters},
                {"eval_every", c.mlp.eval_every},
                {"patience", c.mlp.patience},
                {"noise_draws", c.mlp.noise_draws},
                {"augment_subsample", c.mlp.augment_subsample},
                {"eval_draws", c.mlp.eval_draws}};
    j["kernel"] = {{"m0", c.kernel.m0},
                   {"phi", c.kernel.phi},
                   {"mf", c.kernel.mf},
                   {"regime", c.kernel.regime},
                   {"c_prop", c.kernel.c_prop},
                   {"step_scale", c.kernel.step_scale},
                   {"noise_draws", c.kernel.noise_draws}};
    j["rate_sizes"] = c.rate_sizes;
    j["ucurve"] = {{"dim", c.ucurve.dim},
                   {"type", c.ucurve.type},
                   {"sizes", c.ucurve.sizes}};
    j["simulate"] = {{"dim", c.simulate.dim},
                     {"type", c.simulate.type},
                     {"regularizer", c.simulate.regularizer},
                     {"n", c.simulate.n},
                     {"sigma", c.simulate.sigma},
                     {"seed", c.simulate.seed}};
    j["out_dir"] = c.out_dir;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    detail::KeyGuard g(j, "");
    g.take("learner", c.learner);
    g.take("dims", c.dims);
    g.take("noise_types", c.noise_types);
    g.take("regularizers", c.regularizers);
    g.take("sigma_grid", c.sigma_grid);
    g.take("table1_sigma_g", c.table1_sigma_g);
    g.take("table1_sigma_l", c.table1_sigma_l);
    g.take("sizes", c.sizes);
    g.take("seeds", c.seeds);
    g.take("n_test", c.n_test);
    g.take("noise_var", c.noise_var);
    g.take("laplace_shape", c.laplace_shape);
    g.take("radius", c.radius);
    g.take_object("truth", [&](const nlohmann::json& jt) {
        detail::KeyGuard gt(jt, "truth");
        gt.take("nu", c.truth.nu);
        gt.take("rho", c.truth.rho);
        gt.take("variance", c.truth.variance);
        gt.take("anchors", c.truth.anchors);
        gt.take("jitter", c.truth.jitter);
        gt.finish();
    });
    g.take_object("mlp", [&](const nlohmann::json& jm) {
        detail::KeyGuard gm(jm, "mlp");
        gm.take("hidden1", c.mlp.hidden1);
        gm.take("hidden2", c.mlp.hidden2);
        gm.take("lr", c.mlp.lr);
        gm.take("momentum", c.mlp.momentum);
        gm.take("batch_size", c.mlp.batch_size);
        gm.take("weight_decay", c.mlp.weight_decay);
        gm.take("weight_decay_grid", c.mlp.weight_decay_grid);
        gm.take("max_iters", c.mlp.max_iters);
        gm.take("wd_iters", c.mlp.wd_iters);
        gm.take("eval_every", c.mlp.eval_every);
        gm.take("patience", c.mlp.patience);
        gm.take("noise_draws", c.mlp.noise_draws);
        gm.take("augment_subsample", c.mlp.augment_subsample);
        gm.take("eval_draws", c.mlp.eval_draws);
        gm.finish();
    });
    g.take_object("kernel", [&](const nlohmann::json& jk) {
        detail::KeyGuard gk(jk, "kernel");
        gk.take("m0", c.kernel.m0);
        gk.take("phi", c.kernel.phi);
        gk.take("mf", c.kernel.mf);
        gk.take("regime", c.kernel.regime);
        gk.take("c_prop", c.kernel.c_prop);
        gk.take("step_scale", c.kernel.step_scale);
        gk.take("noise_draws", c.kernel.noise_draws);
        gk.finish();
    });
    g.take("rate_sizes", c.rate_sizes);
    g.take_object("ucurve", [&](const nlohmann::json& ju) {
        detail::KeyGuard gu(ju, "ucurve");
        gu.take("dim", c.ucurve.dim);
        gu.take("type", c.ucurve.type);
        gu.take("sizes", c.ucurve.sizes);
        gu.finish();
    });
    g.take_object("simulate", [&](const nlohmann::json& js) {
        detail::KeyGuard gs(js, "simulate");
        gs.take("dim", c.simulate.dim);
        gs.take("type", c.simulate.type);
        gs.take("regularizer", c.simulate.regularizer);
        gs.take("n", c.simulate.n);
        gs.take("sigma", c.simulate.sigma);
        gs.take("seed", c.simulate.seed);
        gs.finish();
    });
    g.take("out_dir", c.out_dir);
    g.finish();
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const ExperimentConfig& c, const std::string& path) {
    write_text_file(path, config_to_json(c).dump(2) + "\n");
}

// ---- model snapshots ----
// JSON keeps snapshots human-inspectable; doubles survive the round trip
// exactly (shortest-round-trip serialization on both sides).

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw std::invalid_argument(std::string("snapshot: bad row count for ") + name);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument(std::string("snapshot: bad column count for ") + name);
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(k).get<double>();
    }
    return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index n,
                                        const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw std::invalid_argument(std::string("snapshot: bad length for ") + name);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = j.at(i).get<double>();
    return v;
}

}  // namespace detail

inline nlohmann::json mlp_to_json(const MlpModel& m) {
    nlohmann::json j;
    j["input_dim"] = m.input_dim();
    j["hidden1"] = m.hidden1();
    j["hidden2"] = m.hidden2();
    j["W1"] = detail::matrix_to_json(m.W1);
    j["b1"] = detail::vector_to_json(m.b1);
    j["W2"] = detail::matrix_to_json(m.W2);
    j["b2"] = detail::vector_to_json(m.b2);
    j["w3"] = detail::vector_to_json(m.w3);
    j["b3"] = m.b3;
    return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    const int D = j.at("input_dim").get<int>();
    const int h1 = j.at("hidden1").get<int>();
    const int h2 = j.at("hidden2").get<int>();
    if (D < 1 || h1 < 1 || h2 < 1)
        throw std::invalid_argument("snapshot: dimensions must be positive");
    MlpModel m = MlpModel::zeros(D, h1, h2);
    m.W1 = detail::matrix_from_json(j.at("W1"), h1, D, "W1");
    m.b1 = detail::vector_from_json(j.at("b1"), h1, "b1");
    m.W2 = detail::matrix_from_json(j.at("W2"), h2, h1, "W2");
    m.b2 = detail::vector_from_json(j.at("b2"), h2, "b2");
    m.w3 = detail::vector_from_json(j.at("w3"), h2, "w3");
    m.b3 = j.at("b3").get<double>();
    return m;
}

inline void save_mlp(const MlpModel& m, const std::string& path) {
    write_text_file(path, mlp_to_json(m).dump(2) + "\n");
}

inline MlpModel load_mlp(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("snapshot: " + path + " is not valid JSON: " + e.what());
    }
    return mlp_from_json(j);
}

}  // namespace rsk
