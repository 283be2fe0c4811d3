#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "rsk/config_io.hpp"
#include "rsk/rng.hpp"

using nlohmann::json;

TEST_CASE("defaults encode the reference protocol") {
    rsk::ExperimentConfig c;
    REQUIRE_NOTHROW(c.validate());

    REQUIRE(c.sigma_grid.size() == 13);
    REQUIRE(c.sigma_grid.front() == 0.0);
    REQUIRE(c.sigma_grid.back() == 0.6);
    for (std::size_t i = 0; i + 1 < c.sigma_grid.size(); ++i)
        REQUIRE_THAT(c.sigma_grid[i + 1] - c.sigma_grid[i],
                     Catch::Matchers::WithinAbs(0.05, 1e-12));

    REQUIRE(c.sizes == std::vector<int>{50, 100, 200});
    REQUIRE(c.seeds == 15);
    REQUIRE(c.dims == std::vector<int>{1, 2, 3});
    REQUIRE(c.noise_types == std::vector<std::string>{"G", "L", "N"});
    REQUIRE(c.regularizers == std::vector<std::string>{"early_stop", "weight_decay"});
    REQUIRE(c.n_test == 500);
    REQUIRE(c.noise_var == 0.01);
    REQUIRE(c.mlp.hidden1 == 100);
    REQUIRE(c.mlp.lr == 0.01);
    REQUIRE(c.mlp.momentum == 0.9);
    REQUIRE(c.mlp.batch_size == 10);
    REQUIRE(c.rate_sizes == std::vector<int>{25, 50, 100, 200, 400});
}

TEST_CASE("json round trip is lossless") {
    rsk::ExperimentConfig c;
    c.seeds = 4;
    c.sigma_grid = {0.0, 0.125, 0.37};
    c.table1_sigma_g = {0.125};
    c.mlp.lr = 0.0125;
    c.mlp.eval_draws = 32;
    c.kernel.c_prop = 1.75;
    c.truth.jitter = 3e-9;
    c.ucurve.sizes = {16, 64};
    c.simulate.sigma = 0.55;
    c.out_dir = "elsewhere";

    const json j = rsk::config_to_json(c);
    const rsk::ExperimentConfig back = rsk::config_from_json(j);
    REQUIRE(rsk::config_to_json(back) == j);
}

TEST_CASE("present keys override, absent keys keep defaults") {
    const json j = {{"seeds", 3}, {"mlp", {{"lr", 0.5}}}};
    const rsk::ExperimentConfig c = rsk::config_from_json(j);
    REQUIRE(c.seeds == 3);
    REQUIRE(c.mlp.lr == 0.5);
    REQUIRE(c.mlp.momentum == 0.9);
    REQUIRE(c.sigma_grid.size() == 13);
}

TEST_CASE("unknown keys are rejected with their path") {
    REQUIRE_THROWS_WITH(rsk::config_from_json(json{{"sedes", 3}}),
                        Catch::Matchers::ContainsSubstring("sedes"));
    REQUIRE_THROWS_WITH(rsk::config_from_json(json{{"mlp", {{"lrr", 0.5}}}}),
                        Catch::Matchers::ContainsSubstring("mlp.lrr"));
    REQUIRE_THROWS_WITH(rsk::config_from_json(json::array({1, 2})),
                        Catch::Matchers::ContainsSubstring("object"));
}

TEST_CASE("type mismatches are rejected with their path") {
    REQUIRE_THROWS_WITH(rsk::config_from_json(json{{"seeds", "many"}}),
                        Catch::Matchers::ContainsSubstring("seeds"));
    REQUIRE_THROWS_WITH(rsk::config_from_json(json{{"truth", {{"nu", json::array()}}}}),
                        Catch::Matchers::ContainsSubstring("truth.nu"));
}

TEST_CASE("validation guards the protocol invariants") {
    auto broken = [](auto mutate) {
        rsk::ExperimentConfig c;
        mutate(c);
        return c;
    };
    REQUIRE_THROWS_AS(broken([](auto& c) { c.learner = "forest"; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.seeds = 0; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.sigma_grid = {0.2, 0.1}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.sigma_grid = {0.1, 0.1}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.table1_sigma_g = {0.0, 0.1}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.dims = {2, 1}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.noise_types = {"G", "X"}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.sizes = {4, 50}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.laplace_shape = 1.0; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.mlp.momentum = 1.0; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.kernel.step_scale = 1.0; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.rate_sizes = {100}; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.ucurve.type = "N"; }).validate(),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(broken([](auto& c) { c.out_dir = ""; }).validate(),
                      std::invalid_argument);

    // laplace_shape only constrains configs that actually use L noise
    rsk::ExperimentConfig g_only;
    g_only.noise_types = {"G"};
    g_only.laplace_shape = 1.0;
    REQUIRE_NOTHROW(g_only.validate());
}

TEST_CASE("quick preset narrows grids and budgets but stays valid") {
    rsk::ExperimentConfig c;
    rsk::apply_quick(c);
    REQUIRE_NOTHROW(c.validate());
    REQUIRE(c.sigma_grid.front() == 0.0);
    REQUIRE(c.sigma_grid.size() < 13);
    REQUIRE_FALSE(c.table1_sigma_g.empty());
    REQUIRE_FALSE(c.table1_sigma_l.empty());
    REQUIRE(c.mlp.max_iters < 100000);
    REQUIRE(c.mlp.noise_draws < 1000);
    REQUIRE(c.seeds == 15);
}

TEST_CASE("config survives a file round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rsk_config_io_test";
    const std::string path = (dir / "cfg.json").string();

    rsk::ExperimentConfig c;
    c.seeds = 2;
    c.kernel.regime = "poly";
    rsk::save_config(c, path);
    const rsk::ExperimentConfig back = rsk::load_config(path);
    REQUIRE(rsk::config_to_json(back) == rsk::config_to_json(c));

    rsk::write_text_file(path, "{not json");
    REQUIRE_THROWS_WITH(rsk::load_config(path),
                        Catch::Matchers::ContainsSubstring("not valid JSON"));
    fs::remove_all(dir);
}

TEST_CASE("manifolds are keyed by ambient dimension") {
    REQUIRE(rsk::manifold_for_dim(1, 2.0).kind == rsk::ManifoldKind::Line);
    REQUIRE(rsk::manifold_for_dim(2, 2.0).kind == rsk::ManifoldKind::Circle);
    REQUIRE(rsk::manifold_for_dim(2, 2.0).radius == 2.0);
    REQUIRE(rsk::manifold_for_dim(3, 0.5).kind == rsk::ManifoldKind::Sphere);
    REQUIRE_THROWS_AS(rsk::manifold_for_dim(4, 1.0), std::invalid_argument);
}

TEST_CASE("model snapshots round trip bitwise") {
    rsk::Rng rng(991);
    const rsk::MlpModel m = rsk::MlpModel::kaiming(3, 7, 5, rng);

    const nlohmann::json j = rsk::mlp_to_json(m);
    const rsk::MlpModel back = rsk::mlp_from_json(j);
    REQUIRE(back.W1 == m.W1);
    REQUIRE(back.b1 == m.b1);
    REQUIRE(back.W2 == m.W2);
    REQUIRE(back.b2 == m.b2);
    REQUIRE(back.w3 == m.w3);
    REQUIRE(back.b3 == m.b3);

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rsk_config_io_test";
    const std::string path = (dir / "model.json").string();
    rsk::save_mlp(m, path);
    const rsk::MlpModel loaded = rsk::load_mlp(path);
    REQUIRE(loaded.W1 == m.W1);
    REQUIRE(loaded.w3 == m.w3);
    fs::remove_all(dir);

    nlohmann::json bad = j;
    bad["W2"] = nlohmann::json::array();
    REQUIRE_THROWS_WITH(rsk::mlp_from_json(bad),
                        Catch::Matchers::ContainsSubstring("W2"));
}

TEST_CASE("shortest double formatting round trips") {
    for (double x : {0.05, 0.15, 1.0 / 3.0, 5.8775e-4, 1e-300, -0.0, 0.0}) {
        const std::string s = rsk::shortest(x);
        REQUIRE(std::stod(s) == x);
    }
    REQUIRE(rsk::shortest(0.05) == "0.05");
    REQUIRE(rsk::shortest(std::int64_t{200}) == "200");
}
