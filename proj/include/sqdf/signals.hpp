#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace sqdf {

/// One period of a real T-periodic signal, sampled at t_i = i*T/n for
/// i = 0..n-1. n is even so that t and t + T/2 are both grid points.
class PeriodicSignal {
public:
    PeriodicSignal(double period, std::vector<double> samples);

    double period() const noexcept { return period_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double step() const noexcept { return period_ / static_cast<double>(samples_.size()); }
    double time(std::size_t i) const noexcept { return static_cast<double>(i) * step(); }

    std::span<const double> samples() const noexcept { return samples_; }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }

    double max_abs() const noexcept;

    PeriodicSignal scaled(double factor) const;

    friend bool operator==(const PeriodicSignal&, const PeriodicSignal&) = default;

private:
    double period_;
    std::vector<double> samples_;
};

/// alpha * s_tau: +alpha on [tau, tau + T/2) mod T, -alpha elsewhere.
struct SquareWave {
    double amplitude = 1.0;
    double delay = 0.0;
    double period = 1.0;
};

/// Fractional grid index of a delay tau on an n-point grid of period T.
/// Values within 1e-9 cells of an integer are snapped to it, so that delays
/// computed as multiples of T/n render with switches exactly on the grid.
double grid_position(double tau, double period, std::size_t n);

/// Index of the first +amplitude sample of a square wave delayed by tau.
std::size_t square_switch_index(double tau, double period, std::size_t n);

PeriodicSignal render_square(const SquareWave& wave, std::size_t n);

/// Periodic tau-delay: output(t) = x((t - tau) mod T), linearly interpolated.
PeriodicSignal periodic_delay(const PeriodicSignal& x, double tau);

/// Left-point rectangle rule for the integral of a*b over one period.
double inner_product(const PeriodicSignal& a, const PeriodicSignal& b);

/// Periodic linear interpolation; t is wrapped modulo T.
double value_at(const PeriodicSignal& x, double t);

/// CSV with header `t,value`, one row per grid point.
void write_csv(std::ostream& os, const PeriodicSignal& x);

}  // namespace sqdf
