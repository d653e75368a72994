#include <string>

#include "helpers.hpp"
#include "sqdf/config.hpp"

using namespace sqdf;

namespace {

std::string config_message(std::string_view text) {
    try {
        (void)parse_config(text, "run.json");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config_error);
        return e.what();
    }
    FAIL("expected a config error");
    return {};
}

bool contains(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("a complete config parses") {
    const auto spec = parse_config(R"({
        "tf": {"num": [1], "den": [1, 3, 3, 1]},
        "nonlinearity": {"type": "sat", "k": 12},
        "T_grid": {"min": 1, "max": 10, "count": 10, "spacing": "linear"},
        "alpha_grid": [0.1, 1, 10],
        "n": 1024,
        "T_init": 4,
        "tol": 1e-4,
        "max_iter": 20,
        "sim": {"solver": "rk45", "step": 1e-3, "horizon": 100, "transient_fraction": 0.25,
                "initial_output": 0.5, "seed": 7, "memory_window": 30, "output_stride": 5},
        "k_sweep": [8, 10, 18],
        "k_target": "nonlinearity"
    })");
    REQUIRE(spec.tf.has_value());
    CHECK(spec.tf->den() == std::vector<double>{1, 3, 3, 1});
    REQUIRE(spec.nonlinearity.has_value());
    CHECK(spec.nonlinearity->type == "sat");
    CHECK(spec.nonlinearity->k == 12.0);
    CHECK(spec.T_grid.size() == 10);
    CHECK(spec.T_grid.front() == 1.0);
    CHECK(spec.T_grid[1] == doctest::Approx(2.0));
    CHECK(spec.T_grid.back() == 10.0);
    CHECK(spec.alpha_grid == std::vector<double>{0.1, 1, 10});
    CHECK(spec.n == 1024);
    CHECK(spec.T_init == 4.0);
    CHECK(spec.tol == 1e-4);
    CHECK(spec.max_iter == 20);
    CHECK(spec.sim.solver == Solver::rk45);
    CHECK(spec.sim.horizon == 100.0);
    CHECK(spec.sim.transient_fraction == 0.25);
    CHECK(spec.sim.initial_output == 0.5);
    CHECK(spec.sim.seed == 7u);
    CHECK(spec.memory_window == 30.0);
    CHECK(spec.output_stride == 5);
    CHECK(spec.k_sweep == std::vector<double>{8, 10, 18});
}

TEST_CASE("defaults") {
    const auto spec = parse_config("{}");
    CHECK_FALSE(spec.tf.has_value());
    CHECK_FALSE(spec.nonlinearity.has_value());
    REQUIRE(spec.T_grid.size() == 400);
    CHECK(spec.T_grid.front() == doctest::Approx(0.2));
    CHECK(spec.T_grid.back() == 100.0);
    CHECK(spec.T_grid[1] / spec.T_grid[0] == doctest::Approx(spec.T_grid[2] / spec.T_grid[1]));
    REQUIRE(spec.alpha_grid.size() == 600);
    CHECK(spec.alpha_grid.front() == doctest::Approx(1e-3));
    CHECK(spec.alpha_grid.back() == 1e3);
    CHECK(spec.omega_grid.size() == 2000);
    CHECK(spec.n == 2048);
    CHECK(spec.sim.solver == Solver::rk4);
    CHECK(spec.sim.step == 1e-3);
    CHECK(spec.k_sweep.empty());
    CHECK(spec.memory_window == std::numeric_limits<double>::infinity());
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK(contains(config_message(R"({"tf": {"num": [1], "den": [1, 1]}, "gain": 3})"), "gain: unknown key"));
    CHECK(contains(config_message(R"({"sim": {"stepsize": 1e-3}})"), "sim.stepsize: unknown key"));
    CHECK(contains(config_message(R"({"nonlinearity": {"type": "sat", "kk": 2}})"), "nonlinearity.kk"));
    CHECK(contains(config_message(R"({"T_grid": {"min": 1, "max": 2, "count": 5, "step": 1}})"), "T_grid.step"));
}

TEST_CASE("syntax errors report the line") {
    const auto msg = config_message("{\n  \"tf\": {\"num\": [1],\n    \"den\": [1, 1]\n  ,}\n}");
    CHECK(contains(msg, "run.json:4:"));
}

TEST_CASE("invalid values name the field") {
    CHECK(contains(config_message(R"({"tf": {"num": [1, 0, 0], "den": [1, 1]}})"), "tf"));
    CHECK(contains(config_message(R"({"tf": {"num": [1], "den": [0]}})"), "tf"));
    CHECK(contains(config_message(R"({"tf": {"num": [1]}})"), "tf"));
    CHECK(contains(config_message(R"({"nonlinearity": {"type": "hysteresis"}})"), "nonlinearity.type"));
    CHECK(contains(config_message(R"({"nonlinearity": {"type": "sat", "k": -1}})"), "nonlinearity.k"));
    CHECK(contains(config_message(R"({"nonlinearity": {"type": "table", "x": [0, 1], "y": [1, 2]}})"), "nonlinearity"));
    CHECK(contains(config_message(R"({"T_grid": [1, 3, 2]})"), "T_grid"));
    CHECK(contains(config_message(R"({"T_grid": [-1, 3]})"), "T_grid"));
    CHECK(contains(config_message(R"({"alpha_grid": {"min": 0, "max": 1, "count": 4}})"), "alpha_grid.min"));
    CHECK(contains(config_message(R"({"T_grid": {"min": 1, "max": 2, "count": 1}})"), "T_grid.count"));
    CHECK(contains(config_message(R"({"T_grid": {"min": 1, "max": 2, "count": 5, "spacing": "cubic"}})"), "spacing"));
    CHECK(contains(config_message(R"({"n": 7})"), "n"));
    CHECK(contains(config_message(R"({"sim": {"solver": "euler"}})"), "sim.solver"));
    CHECK(contains(config_message(R"({"sim": {"step": 0}})"), "sim.step"));
    CHECK(contains(config_message(R"({"sim": {"transient_fraction": 1}})"), "sim.transient_fraction"));
    CHECK(contains(config_message(R"({"k_sweep": [3, 2]})"), "k_sweep"));
    CHECK(contains(config_message(R"({"k_target": "plant"})"), "k_target"));
    CHECK(contains(config_message("[1, 2]"), "expected an object"));
}

TEST_CASE("missing files") {
    CHECK_ERRC(load_config("/nonexistent/run.json"), Errc::config_error);
}

TEST_CASE("nonlinearity specs build the right objects") {
    NonlinearitySpec sat{"sat", 4.0};
    CHECK(make_static(sat)(0.1) == doctest::Approx(0.4));
    CHECK_FALSE(sat.has_memory());
    CHECK(std::holds_alternative<StaticNonlinearity>(make_feedback(sat)));

    NonlinearitySpec sd{"sat_delay"};
    CHECK(sd.has_memory());
    CHECK_ERRC(make_static(sd), Errc::invalid_argument);
    const auto fb = make_feedback(sd, 25.0);
    REQUIRE(std::holds_alternative<DelayFeedback>(fb));
    CHECK(std::get<DelayFeedback>(fb).window == 25.0);
    CHECK(make_operator(sd)(2.0, 10.0).gain == doctest::Approx(0.5));
    CHECK(make_operator(sat)(2.0, 10.0).gain == doctest::Approx(0.5));
}

TEST_CASE("sweep gains") {
    auto spec = parse_config(R"({"tf": {"num": [2], "den": [1, 1]}, "nonlinearity": {"type": "sat", "k": 1}})");
    CHECK(with_gain(spec, 9.0).nonlinearity->k == 9.0);
    CHECK(with_gain(spec, 9.0).tf->num() == spec.tf->num());

    spec.k_target = KTarget::tf;
    const auto scaled = with_gain(spec, 3.0);
    CHECK(scaled.tf->num().back() == doctest::Approx(6.0));
    CHECK(scaled.nonlinearity->k == 1.0);

    auto lin = parse_config(R"({"nonlinearity": {"type": "linear", "gain": 2}})");
    CHECK(with_gain(lin, 5.0).nonlinearity->gain == 5.0);

    auto relay = parse_config(R"({"nonlinearity": {"type": "relay"}})");
    CHECK_ERRC(with_gain(relay, 5.0), Errc::config_error);
}
