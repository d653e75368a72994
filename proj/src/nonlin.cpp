#include "sqdf/nonlin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "sqdf/error.hpp"

namespace sqdf {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_amplitude(double alpha) {
    if (alpha == 0.0 || !std::isfinite(alpha)) {
        fail(Errc::invalid_argument, fmt::format("amplitude must be finite and nonzero, got {}", alpha));
    }
}

void check_grid(const std::vector<double>& alphas) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        check_amplitude(alphas[i]);
        if (i > 0 && !(alphas[i] > alphas[i - 1])) fail(Errc::invalid_argument, "amplitude grid must be strictly increasing");
    }
}

}  // namespace

StaticNonlinearity::StaticNonlinearity(std::string name, Evaluator f, std::map<std::string, double> params)
    : name_(std::move(name)), f_(std::move(f)), params_(std::move(params)) {
    if (!f_) fail(Errc::invalid_argument, "nonlinearity needs an evaluator");
    if (f_(0.0) != 0.0) fail(Errc::invalid_argument, fmt::format("nonlinearity '{}' must vanish at zero", name_));
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> magnitude(-3.0, 3.0);
    for (int i = 0; i < 64; ++i) {
        const double x = std::pow(10.0, magnitude(rng)) * (i % 2 == 0 ? 1.0 : -1.0);
        const double a = f_(x);
        const double b = f_(-x);
        if (!(std::abs(a + b) <= 1e-12 * std::max(1.0, std::abs(a)))) {
            fail(Errc::invalid_argument, fmt::format("nonlinearity '{}' is not odd: f({}) = {}, f({}) = {}", name_, x, a, -x, b));
        }
    }
}

StaticNonlinearity StaticNonlinearity::saturation(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) fail(Errc::invalid_argument, fmt::format("saturation gain must be positive, got {}", k));
    return {"sat", [k](double x) { return std::clamp(k * x, -1.0, 1.0); }, {{"k", k}}};
}

StaticNonlinearity StaticNonlinearity::relay() { return {"relay", [](double x) { return sign(x); }}; }

StaticNonlinearity StaticNonlinearity::dead_zone(double width) {
    if (!(width >= 0.0) || !std::isfinite(width)) fail(Errc::invalid_argument, "dead-zone width must be nonnegative");
    return {"deadzone", [width](double x) { return sign(x) * std::max(std::abs(x) - width, 0.0); }, {{"width", width}}};
}

StaticNonlinearity StaticNonlinearity::cubic() { return {"cubic", [](double x) { return x * x * x; }}; }

StaticNonlinearity StaticNonlinearity::linear(double gain) {
    if (!std::isfinite(gain)) fail(Errc::invalid_argument, "linear gain must be finite");
    return {"linear", [gain](double x) { return gain * x; }, {{"gain", gain}}};
}

StaticNonlinearity StaticNonlinearity::table(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.empty()) fail(Errc::invalid_argument, "table needs matching, nonempty x and y");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) fail(Errc::invalid_argument, "table entries must be finite");
        if (x[i] < 0.0) fail(Errc::invalid_argument, "table is given on x >= 0; the negative half is its odd extension");
        if (i > 0 && !(x[i] > x[i - 1])) fail(Errc::invalid_argument, "table x must be strictly increasing");
    }
    if (x.front() == 0.0) {
        if (y.front() != 0.0) fail(Errc::invalid_argument, "table must pass through the origin");
    } else {
        x.insert(x.begin(), 0.0);
        y.insert(y.begin(), 0.0);
    }
    auto eval = [x = std::move(x), y = std::move(y)](double v) {
        const double a = std::abs(v);
        double out;
        if (a >= x.back()) {
            out = y.back();
        } else {
            const auto it = std::upper_bound(x.begin(), x.end(), a);
            const auto i = static_cast<std::size_t>(it - x.begin()) - 1;
            const double f = (a - x[i]) / (x[i + 1] - x[i]);
            out = y[i] + f * (y[i + 1] - y[i]);
        }
        return v < 0.0 ? -out : out;
    };
    return {"table", std::move(eval)};
}

ComplexPoint amplitude_response_static(const StaticNonlinearity& phi, double alpha) {
    check_amplitude(alpha);
    const double out = phi(alpha);
    ComplexPoint p;
    if (out == 0.0) {
        p.degenerate = true;
        return p;
    }
    p.gain = std::abs(out) / std::abs(alpha);
    p.phase = out * alpha > 0.0 ? 0.0 : std::numbers::pi;
    return p;
}

Locus nyqa_static(const StaticNonlinearity& phi, const std::vector<double>& alphas) {
    check_grid(alphas);
    Locus locus(ParameterKind::amplitude);
    for (double a : alphas) locus.push_back(a, amplitude_response_static(phi, a));
    return locus;
}

Locus nyqa(const SquarePreservingOp& op, double period, const std::vector<double>& alphas) {
    check_grid(alphas);
    Locus locus(ParameterKind::amplitude);
    for (double a : alphas) locus.push_back(a, op(a, period));
    return locus;
}

ComplexPoint amplitude_dependent_delay(double alpha, double period) {
    check_amplitude(alpha);
    if (!(period > 0.0)) fail(Errc::invalid_argument, fmt::format("period must be positive, got {}", period));
    return ComplexPoint::polar(1.0, -2.0 * std::numbers::pi * std::abs(alpha) / period);
}

ComplexPoint compose_square_preserving(const SquarePreservingOp& first, const SquarePreservingOp& second,
                                       double alpha, double period) {
    check_amplitude(alpha);
    const ComplexPoint c1 = first(alpha, period);
    if (c1.gain == 0.0) return c1;
    // The intermediate signal is |c1| |alpha| s_{tau'}, a nonnegative amplitude.
    const ComplexPoint c2 = second(c1.gain * std::abs(alpha), period);
    if (c2.gain == 0.0) return c2;
    return ComplexPoint::polar(c1.gain * c2.gain, c1.phase + c2.phase);
}

SquarePreservingOp as_square_preserving(const StaticNonlinearity& phi) {
    return {phi.name(), [phi](double alpha, double) { return amplitude_response_static(phi, alpha); }, false};
}

SquarePreservingOp amplitude_delay_op() { return {"delay", amplitude_dependent_delay, true}; }

SquarePreservingOp compose(SquarePreservingOp first, SquarePreservingOp second) {
    const bool dependent = first.period_dependent || second.period_dependent;
    std::string name = second.name + "*" + first.name;
    return {std::move(name),
            [first = std::move(first), second = std::move(second)](double alpha, double period) {
                return compose_square_preserving(first, second, alpha, period);
            },
            dependent};
}

SquarePreservingOp saturated_delay_op() {
    auto op = compose(amplitude_delay_op(), as_square_preserving(StaticNonlinearity::saturation(1.0)));
    op.name = "sat_delay";
    return op;
}

std::complex<double> neg_reciprocal(const ComplexPoint& point) {
    if (point.gain == 0.0) fail(Errc::division_by_zero, "cannot take -1/c of a zero point");
    return -1.0 / point.value();
}

Locus neg_reciprocal(const Locus& locus) {
    Locus out(locus.kind());
    for (std::size_t i = 0; i < locus.size(); ++i) {
        const auto& p = locus.points()[i];
        if (p.gain == 0.0) {
            fail(Errc::division_by_zero,
                 fmt::format("locus point at {} = {} is zero; -1/c is undefined", to_string(locus.kind()), locus.params()[i]));
        }
        out.push_back(locus.params()[i], ComplexPoint::polar(1.0 / p.gain, std::numbers::pi - p.phase));
    }
    return out;
}

}  // namespace sqdf
