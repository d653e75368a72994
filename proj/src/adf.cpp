#include "sqdf/adf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "sqdf/csv.hpp"
#include "sqdf/error.hpp"
#include "sqdf/parallel.hpp"

namespace sqdf {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// c[j] = <y, s_{j h}> by the rectangle rule, for every grid delay j.
std::vector<double> grid_correlation(const PeriodicSignal& y) {
    const std::size_t n = y.size();
    std::vector<double> prefix(2 * n + 1, 0.0);
    for (std::size_t i = 0; i < 2 * n; ++i) prefix[i + 1] = prefix[i] + y[i % n];
    const double total = prefix[n];
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double window = prefix[j + n / 2] - prefix[j];
        c[j] = y.step() * (2.0 * window - total);
    }
    return c;
}

/// Exact running integral of the periodic linear interpolant.
class InterpolantIntegral {
public:
    explicit InterpolantIntegral(const PeriodicSignal& y) : y_(y), prefix_(y.size() + 1, 0.0) {
        const std::size_t n = y.size();
        for (std::size_t i = 0; i < n; ++i) {
            prefix_[i + 1] = prefix_[i] + 0.5 * y.step() * (y[i] + y[(i + 1) % n]);
        }
    }

    double total() const { return prefix_.back(); }

    /// Integral over [0, t] for t in [0, 2T).
    double at(double t) const {
        const double T = y_.period();
        if (t >= T) return total() + at(t - T);
        const std::size_t n = y_.size();
        const double p = std::clamp(t / y_.step(), 0.0, static_cast<double>(n));
        const auto i = std::min(static_cast<std::size_t>(p), n - 1);
        const double f = p - static_cast<double>(i);
        const double a = y_[i];
        const double b = y_[(i + 1) % n];
        return prefix_[i] + y_.step() * (a * f + 0.5 * (b - a) * f * f);
    }

    double correlation(double tau) const {
        const double T = y_.period();
        tau = std::fmod(tau, T);
        if (tau < 0.0) tau += T;
        return 2.0 * (at(tau + 0.5 * T) - at(tau)) - total();
    }

private:
    const PeriodicSignal& y_;
    std::vector<double> prefix_;
};

double squared_norm(const PeriodicSignal& y) { return inner_product(y, y); }

/// Projects y onto the grid rendering of s_tau and folds a negative gain into
/// a half-period shift.
SquareFit finalize_fit(const PeriodicSignal& y, double alpha, double tau) {
    const double T = y.period();
    const std::size_t n = y.size();
    const double c = inner_product(y, render_square({1.0, tau, T}, n));
    double b = c / (alpha * T);
    if (b < 0.0) {
        tau += 0.5 * T;
        b = -b;
    }
    tau = std::fmod(tau, T);
    if (tau < 0.0) tau += T;

    SquareFit fit;
    fit.delay = tau;
    fit.point = ComplexPoint::polar(b, -two_pi * tau / T);
    if (b == 0.0) {
        fit.point.phase = 0.0;
        fit.point.degenerate = true;
    }
    const double energy = squared_norm(y);
    if (energy > 0.0) {
        const auto model = render_square({b * alpha, tau, T}, n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - model[i];
            err += d * d;
        }
        fit.residual = err * y.step() / energy;
    }
    return fit;
}

/// True when y is exactly +-c on the square rendered with delay tau.
bool exact_square(const PeriodicSignal& y, double tau) {
    const std::size_t n = y.size();
    const std::size_t start = square_switch_index(tau, y.period(), n);
    const double level = y[start];
    for (std::size_t i = 0; i < n; ++i) {
        const double want = (i + n - start) % n < n / 2 ? level : -level;
        if (y[i] != want) return false;
    }
    return true;
}

void check_alpha(double alpha) {
    if (alpha == 0.0 || !std::isfinite(alpha)) {
        fail(Errc::invalid_argument, fmt::format("input amplitude must be finite and nonzero, got {}", alpha));
    }
}

SquareFit undefined_phase_fit() {
    SquareFit fit;
    fit.point.degenerate = true;
    return fit;
}

}  // namespace

double wrap_phase(double phi) {
    double r = std::remainder(phi, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r + 0.0;  // no negative zero
}

ComplexPoint ComplexPoint::polar(double gain, double phase) {
    ComplexPoint p;
    if (gain < 0.0) {
        gain = -gain;
        phase += std::numbers::pi;
    }
    p.gain = gain;
    p.phase = wrap_phase(phase);
    return p;
}

ComplexPoint ComplexPoint::from_complex(std::complex<double> c) {
    ComplexPoint p;
    p.gain = std::abs(c);
    p.phase = p.gain == 0.0 ? 0.0 : wrap_phase(std::arg(c));
    p.degenerate = p.gain == 0.0;
    return p;
}

const char* to_string(ParameterKind kind) noexcept {
    switch (kind) {
    case ParameterKind::period: return "period";
    case ParameterKind::amplitude: return "amplitude";
    case ParameterKind::frequency: return "frequency";
    }
    return "unknown";
}

Locus::Locus(ParameterKind kind, std::vector<double> params, std::vector<ComplexPoint> points) : kind_(kind) {
    if (params.size() != points.size()) fail(Errc::invalid_argument, "locus needs one point per parameter");
    params_.reserve(params.size());
    points_.reserve(points.size());
    for (std::size_t i = 0; i < params.size(); ++i) push_back(params[i], points[i]);
}

void Locus::push_back(double param, const ComplexPoint& point) {
    if (!std::isfinite(param) || !std::isfinite(point.gain) || !std::isfinite(point.phase)) {
        fail(Errc::invalid_argument, fmt::format("locus point at parameter {} is not finite", param));
    }
    if (params_.size() >= 2) {
        const bool increasing = params_[1] > params_[0];
        const double last = params_.back();
        if (increasing ? !(param > last) : !(param < last)) {
            fail(Errc::invalid_argument, fmt::format("locus parameters must be strictly monotone ({} after {})", param, last));
        }
    } else if (params_.size() == 1 && param == params_.back()) {
        fail(Errc::invalid_argument, fmt::format("duplicate locus parameter {}", param));
    }
    params_.push_back(param);
    points_.push_back(point);
}

void write_csv(std::ostream& os, const Locus& locus) {
    os << "param,re,im,gain,phase_rad\n";
    for (std::size_t i = 0; i < locus.size(); ++i) {
        const auto& p = locus.points()[i];
        const auto c = p.value();
        os << csv_number(locus.params()[i]) << ',' << csv_number(c.real()) << ',' << csv_number(c.imag()) << ','
           << csv_number(p.gain) << ',' << csv_number(p.phase) << '\n';
    }
}

double interpolant_correlation(const PeriodicSignal& y, double tau) {
    return InterpolantIntegral(y).correlation(tau);
}

SquareFit best_square_fit(const PeriodicSignal& y, double alpha, bool refine) {
    check_alpha(alpha);
    const double peak = y.max_abs();
    if (peak == 0.0) return undefined_phase_fit();

    const std::size_t n = y.size();
    const std::size_t half = n / 2;
    const double h = y.step();
    const double T = y.period();
    const auto c = grid_correlation(y);

    struct Candidate {
        double tau;
        bool stationary;
    };
    std::vector<Candidate> candidates;

    // Grid maxima of c^2; c has period n/2 up to sign.
    auto c2 = [&](std::size_t j) { return c[j % n] * c[j % n]; };
    for (std::size_t j = 0; j < half; ++j) {
        const double here = c2(j);
        const double prev = c2(j == 0 ? half - 1 : j - 1);
        const double next = c2(j + 1 == half ? 0 : j + 1);
        if (here >= prev && here >= next) candidates.push_back({y.time(j), false});
    }

    // Stationary points: y(tau) = y(tau + T/2).
    auto g_grid = [&](std::size_t j) { return y[j % n] - y[(j + half) % n]; };
    // Inside a cell g is the cubic through its four nearest grid values.
    auto g_cell = [&](std::size_t j, double tau) {
        const double u = (tau - y.time(j)) / h;
        const double gm = g_grid(j + n - 1);
        const double g0 = g_grid(j);
        const double g1 = g_grid(j + 1);
        const double g2 = g_grid(j + 2);
        return -gm * u * (u - 1.0) * (u - 2.0) / 6.0 + g0 * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 -
               g1 * (u + 1.0) * u * (u - 2.0) / 2.0 + g2 * (u + 1.0) * u * (u - 1.0) / 6.0;
    };
    const double g_tol = 1e-10 * peak;
    for (std::size_t j = 0; j < half; ++j) {
        const double g0 = g_grid(j);
        const double g1 = g_grid(j + 1);
        if (g0 == 0.0) {
            candidates.push_back({y.time(j), true});
            continue;
        }
        if (!(g0 * g1 < 0.0)) continue;
        if (!refine) {
            candidates.push_back({std::abs(g0) <= std::abs(g1) ? y.time(j) : y.time(j + 1), true});
            continue;
        }
        double lo = y.time(j);
        double hi = y.time(j) + h;
        double glo = g0;
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < 60; ++it) {
            mid = 0.5 * (lo + hi);
            const double gm = g_cell(j, mid);
            if (std::abs(gm) <= g_tol) break;
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        candidates.push_back({mid, true});
    }

    // Ties between candidates that render the same square go to the
    // stationary point, whose delay is resolved below the grid, unless the
    // rendered square already reproduces y exactly; other ties go to the
    // smaller delay.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) { return a.tau < b.tau; });
    const Candidate* best = nullptr;
    double best_score = -1.0;
    std::size_t best_index = 0;
    for (const auto& cand : candidates) {
        const std::size_t index = square_switch_index(cand.tau, T, n);
        const double score = c2(index);
        const bool better = score > best_score * (1.0 + 1e-12) + 1e-300;
        const bool tie = !better && score >= best_score * (1.0 - 1e-12);
        bool take = better;
        if (tie && cand.stationary != best->stationary && index % half == best_index % half) {
            const Candidate& grid = cand.stationary ? *best : cand;
            take = cand.stationary != exact_square(y, grid.tau);
        }
        if (take) {
            best = &cand;
            best_score = score;
            best_index = index;
        }
    }
    const double best_tau = best->tau;
    return finalize_fit(y, alpha, best_tau);
}

SquareFit brute_force_fit(const PeriodicSignal& y, double alpha, std::size_t m) {
    check_alpha(alpha);
    if (m < y.size()) {
        fail(Errc::invalid_argument, fmt::format("phase grid ({}) must be at least the signal grid ({})", m, y.size()));
    }
    if (y.max_abs() == 0.0) return undefined_phase_fit();

    const InterpolantIntegral integral(y);
    const auto rendered = grid_correlation(y);
    const double T = y.period();
    auto rendered_score = [&](double tau) {
        const double c = rendered[square_switch_index(tau, T, y.size())];
        return c * c;
    };
    // Equal interpolant scores are split by the rendered fit, then by delay.
    double best_tau = 0.0;
    double best_score = -1.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double tau = T * static_cast<double>(k) / static_cast<double>(m);
        const double c = integral.correlation(tau);
        const double score = c * c;
        const bool better = score > best_score * (1.0 + 1e-12) + 1e-300;
        const bool tie = !better && score >= best_score * (1.0 - 1e-12);
        if (better || (tie && rendered_score(tau) > rendered_score(best_tau) * (1.0 + 1e-12))) {
            best_score = std::max(score, best_score);
            best_tau = tau;
        }
    }
    return finalize_fit(y, alpha, best_tau);
}

std::vector<double> degenerate_candidates(const PeriodicSignal& y) {
    const std::size_t n = y.size();
    const std::size_t half = n / 2;
    const auto c = grid_correlation(y);
    const double tol = 1e-13 * y.period() * y.max_abs();
    std::vector<double> out;
    for (std::size_t j = 0; j < half; ++j) {
        const double c0 = c[j];
        const double c1 = j + 1 == half ? -c[0] : c[j + 1];
        if (std::abs(c0) <= tol) {
            out.push_back(y.time(j));
        } else if (std::abs(c1) > tol && c0 * c1 < 0.0) {
            out.push_back(y.time(j) + y.step() * c0 / (c0 - c1));
        }
    }
    return out;
}

SquareFit adf_fit(const TransferFunction& G, double period, std::size_t n) {
    return best_square_fit(square_steady_state(G, 1.0, period, n), 1.0);
}

Locus adf_locus(const TransferFunction& G, const std::vector<double>& periods, std::size_t n) {
    for (std::size_t i = 0; i < periods.size(); ++i) {
        if (!(periods[i] > 0.0)) fail(Errc::invalid_argument, fmt::format("periods must be positive, got {}", periods[i]));
        if (i > 0 && !(periods[i] > periods[i - 1])) fail(Errc::invalid_argument, "period grid must be strictly increasing");
    }
    if (!G.is_hurwitz()) fail(Errc::invalid_argument, "ADF locus requires a Hurwitz transfer function");

    auto points = detail::parallel_map(periods.size(), [&](std::size_t i) { return adf_point(G, periods[i], n); });

    if (!periods.empty()) {
        // Linearity: the describing function may not depend on the amplitude.
        const double T = periods.front();
        const auto doubled = best_square_fit(square_steady_state(G, 2.0, T, n), 2.0).point.value();
        const auto unit = points.front().value();
        if (!(std::abs(doubled - unit) <= 1e-9 * std::max(1.0, std::abs(unit)))) {
            fail(Errc::numerical_failure, fmt::format("ADF at T={} depends on amplitude ({} vs {})", T,
                                                      std::abs(unit), std::abs(doubled)));
        }
    }
    return Locus(ParameterKind::period, periods, std::move(points));
}

}  // namespace sqdf
