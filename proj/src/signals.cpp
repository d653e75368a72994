#include "sqdf/signals.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "sqdf/csv.hpp"
#include "sqdf/error.hpp"

namespace sqdf {

const char* to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::evaluation_at_pole: return "evaluation-at-pole";
    case Errc::no_unique_steady_state: return "no-unique-steady-state";
    case Errc::division_by_zero: return "division-by-zero";
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::simulation_fault: return "simulation-fault";
    case Errc::divergence_fault: return "divergence-fault";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::invalid_bracket: return "invalid-bracket";
    case Errc::config_error: return "config-error";
    }
    return "unknown";
}

PeriodicSignal::PeriodicSignal(double period, std::vector<double> samples)
    : period_(period), samples_(std::move(samples)) {
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        fail(Errc::invalid_argument, fmt::format("period must be positive and finite, got {}", period_));
    }
    const auto n = samples_.size();
    if (n < 8 || n % 2 != 0) {
        fail(Errc::invalid_argument, fmt::format("grid size must be even and >= 8, got {}", n));
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) fail(Errc::invalid_argument, "signal samples must be finite");
    }
}

double PeriodicSignal::max_abs() const noexcept {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
}

PeriodicSignal PeriodicSignal::scaled(double factor) const {
    std::vector<double> out(samples_);
    for (double& v : out) v *= factor;
    return PeriodicSignal(period_, std::move(out));
}

double grid_position(double tau, double period, std::size_t n) {
    const double nn = static_cast<double>(n);
    double p = std::fmod(tau / period * nn, nn);
    if (p < 0.0) p += nn;
    const double r = std::round(p);
    if (std::abs(p - r) <= 1e-9 * std::max(1.0, r)) p = r;
    if (p >= nn) p -= nn;
    return p;
}

std::size_t square_switch_index(double tau, double period, std::size_t n) {
    const double p = grid_position(tau, period, n);
    return static_cast<std::size_t>(std::ceil(p)) % n;
}

PeriodicSignal render_square(const SquareWave& wave, std::size_t n) {
    if (!(wave.period > 0.0) || !std::isfinite(wave.period)) {
        fail(Errc::invalid_argument, fmt::format("square wave period must be positive, got {}", wave.period));
    }
    if (n < 8 || n % 2 != 0) {
        fail(Errc::invalid_argument, fmt::format("grid size must be even and >= 8, got {}", n));
    }
    if (!std::isfinite(wave.delay) || !std::isfinite(wave.amplitude)) {
        fail(Errc::invalid_argument, "square wave amplitude and delay must be finite");
    }
    // Samples with (i - p) mod n in [0, n/2) sit on the +alpha half; for a
    // fractional p that set starts at ceil(p).
    const std::size_t first = square_switch_index(wave.delay, wave.period, n);
    std::vector<double> samples(n, -wave.amplitude);
    for (std::size_t k = 0; k < n / 2; ++k) samples[(first + k) % n] = wave.amplitude;
    return PeriodicSignal(wave.period, std::move(samples));
}

double value_at(const PeriodicSignal& x, double t) {
    const std::size_t n = x.size();
    const double p = grid_position(t, x.period(), n);
    const auto i = static_cast<std::size_t>(std::floor(p));
    const double f = p - static_cast<double>(i);
    const double a = x[i % n];
    if (f == 0.0) return a;
    const double b = x[(i + 1) % n];
    return a + f * (b - a);
}

PeriodicSignal periodic_delay(const PeriodicSignal& x, double tau) {
    const double T = x.period();
    if (!(tau >= 0.0 && tau <= T)) {
        fail(Errc::invalid_argument, fmt::format("delay must lie in [0, T] = [0, {}], got {}", T, tau));
    }
    const std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = value_at(x, x.time(i) - tau);
    return PeriodicSignal(T, std::move(out));
}

double inner_product(const PeriodicSignal& a, const PeriodicSignal& b) {
    if (a.size() != b.size() || a.period() != b.period()) {
        fail(Errc::invalid_argument,
             fmt::format("inner product needs matching grids (T={}, n={} vs T={}, n={})", a.period(),
                         a.size(), b.period(), b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc * a.step();
}

void write_csv(std::ostream& os, const PeriodicSignal& x) {
    os << "t,value\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << csv_number(x.time(i)) << ',' << csv_number(x[i]) << '\n';
    }
}

}  // namespace sqdf
