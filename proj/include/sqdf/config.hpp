#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqdf/linsys.hpp"
#include "sqdf/nonlin.hpp"
#include "sqdf/simulate.hpp"

namespace sqdf {

struct NonlinearitySpec {
    /// sat, relay, deadzone, cubic, linear, table, sat_delay, delay
    std::string type;
    double k = 1.0;
    double width = 0.0;
    double gain = 1.0;
    std::vector<double> x;
    std::vector<double> y;

    bool has_memory() const { return type == "sat_delay" || type == "delay"; }
};

StaticNonlinearity make_static(const NonlinearitySpec& spec);
SquarePreservingOp make_operator(const NonlinearitySpec& spec);
/// Memory window applies to the amplitude-dependent delay (infinite = full past).
Feedback make_feedback(const NonlinearitySpec& spec, double window = std::numeric_limits<double>::infinity());

enum class KTarget { nonlinearity, tf };

/// Parsed and validated run configuration.
struct SystemSpec {
    std::optional<TransferFunction> tf;
    std::optional<NonlinearitySpec> nonlinearity;
    std::vector<double> T_grid;
    std::vector<double> alpha_grid;
    std::vector<double> omega_grid;
    std::size_t n = 2048;
    double T_init = 10.0;
    double tol = 0.0;
    int max_iter = 50;
    SimConfig sim;
    double memory_window = std::numeric_limits<double>::infinity();
    std::size_t output_stride = 10;
    std::vector<double> k_sweep;
    KTarget k_target = KTarget::nonlinearity;
};

/// Applies a sweep gain: sets the nonlinearity gain or scales the numerator.
SystemSpec with_gain(const SystemSpec& spec, double k);

/// Throws Error(config_error) with the offending field or line/column.
SystemSpec parse_config(std::string_view text, std::string_view source = "config");
SystemSpec load_config(const std::filesystem::path& path);

}  // namespace sqdf
