#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sqdf/linsys.hpp"
#include "sqdf/nonlin.hpp"

namespace sqdf {

enum class Solver { rk4, rk45 };

struct SimConfig {
    Solver solver = Solver::rk4;
    /// Fixed step (RK4) or initial step (RK45).
    double step = 1e-3;
    double max_step = 1e-2;
    double rtol = 1e-8;
    double atol = 1e-10;
    double horizon = 300.0;
    double transient_fraction = 0.5;
    /// Empty selects 1e-2 on the first state (or the state matching
    /// `initial_output`).
    std::vector<double> initial_state;
    /// Minimum-norm state with C x = initial_output.
    std::optional<double> initial_output;
    /// Adds a uniform perturbation in [-1e-2, 1e-2] to every state.
    std::optional<std::uint64_t> seed;
};

/// u(t) = phi(e(t - gamma(t))), gamma(t) = max |e| over the last `window`
/// seconds (infinite window: the whole past). Before t = 0 the error is held
/// at its initial value.
struct DelayFeedback {
    StaticNonlinearity phi = StaticNonlinearity::saturation(1.0);
    double window = std::numeric_limits<double>::infinity();
    /// Length of error history retained; a delay reaching further back is a
    /// simulation fault.
    double max_history = std::numeric_limits<double>::infinity();
};

using Feedback = std::variant<StaticNonlinearity, DelayFeedback>;

struct ClosedLoop {
    StateSpace plant;
    Feedback feedback;
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> y;

    std::size_t size() const noexcept { return t.size(); }
};

/// CSV `t,u,y`, every `stride`-th sample.
void write_csv(std::ostream& os, const TimeSeries& ts, std::size_t stride = 1);

/// Integrates x' = A x + B u, y = C x with u = feedback(e), e = -y.
TimeSeries simulate_lure(const StateSpace& plant, const Feedback& feedback, const SimConfig& cfg);
inline TimeSeries simulate_lure(const ClosedLoop& loop, const SimConfig& cfg) {
    return simulate_lure(loop.plant, loop.feedback, cfg);
}

struct OscillationReport {
    bool sustained = false;
    double period = 0.0;
    double amplitude = 0.0;
    std::size_t crossings = 0;
    std::vector<std::string> notes;
};

OscillationReport detect_oscillation(const TimeSeries& ts, double transient_fraction = 0.5);

using LoopBuilder = std::function<ClosedLoop(double)>;

/// Gain at which simulated oscillations appear: 12 bisections between a
/// non-oscillating k_lo and an oscillating k_hi.
double onset_search(const LoopBuilder& builder, double k_lo, double k_hi, const SimConfig& cfg, int iterations = 12);

}  // namespace sqdf
