#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "sqdf/linsys.hpp"
#include "sqdf/signals.hpp"

namespace sqdf {

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

/// Gain/phase pair beta * e^{j phi}. Delays map to negative phase.
struct ComplexPoint {
    double gain = 0.0;
    double phase = 0.0;
    /// Set when the gain is zero and the phase carries no information.
    bool degenerate = false;

    static ComplexPoint polar(double gain, double phase);
    static ComplexPoint from_complex(std::complex<double> c);

    std::complex<double> value() const { return std::polar(gain, phase); }
};

enum class ParameterKind { period, amplitude, frequency };

const char* to_string(ParameterKind kind) noexcept;

/// Parameterized curve in the complex plane, parameters strictly monotone.
class Locus {
public:
    explicit Locus(ParameterKind kind) : kind_(kind) {}
    Locus(ParameterKind kind, std::vector<double> params, std::vector<ComplexPoint> points);

    ParameterKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return params_.size(); }
    const std::vector<double>& params() const noexcept { return params_; }
    const std::vector<ComplexPoint>& points() const noexcept { return points_; }
    std::complex<double> value(std::size_t i) const { return points_[i].value(); }

    /// Appends a point; the parameter must continue the monotone order.
    void push_back(double param, const ComplexPoint& point);

private:
    ParameterKind kind_;
    std::vector<double> params_;
    std::vector<ComplexPoint> points_;
};

/// CSV `param,re,im,gain,phase_rad`.
void write_csv(std::ostream& os, const Locus& locus);

struct SquareFit {
    ComplexPoint point;
    /// Delay of the fitted square in [0, T); phase = -2 pi delay / T.
    double delay = 0.0;
    /// ||y - beta alpha s_delay||^2 / ||y||^2 on the sample grid.
    double residual = 0.0;
};

/// Best least-squares fit beta * alpha * s_tau to y. Candidate delays are the
/// zeros of y(tau) - y(tau + T/2) (refined by bisection on the interpolated
/// signal when `refine` is set) together with the grid maxima of
/// <y, s_tau>^2.
SquareFit best_square_fit(const PeriodicSignal& y, double alpha, bool refine = true);

/// Exhaustive fit over m uniformly spaced delays. The correlation is the exact
/// integral of the linearly interpolated signal against the continuous
/// square, so it shares no code path with the candidate reduction above.
SquareFit brute_force_fit(const PeriodicSignal& y, double alpha, std::size_t m);

/// Exact correlation of the piecewise-linear interpolant of y with s_tau.
double interpolant_correlation(const PeriodicSignal& y, double tau);

/// Delays in [0, T/2) at which <y, s_tau> changes sign (stationary points
/// of the fitting cost that are never reported as fits).
std::vector<double> degenerate_candidates(const PeriodicSignal& y);

/// Amplitude describing function of G at one period.
SquareFit adf_fit(const TransferFunction& G, double period, std::size_t n = 2048);
inline ComplexPoint adf_point(const TransferFunction& G, double period, std::size_t n = 2048) {
    return adf_fit(G, period, n).point;
}

/// ADF locus of G over a strictly increasing period grid.
Locus adf_locus(const TransferFunction& G, const std::vector<double>& periods, std::size_t n = 2048);

}  // namespace sqdf
