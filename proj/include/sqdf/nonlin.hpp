#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sqdf/adf.hpp"

namespace sqdf {

/// Odd static nonlinearity Phi with Phi(-x) = -Phi(x) and Phi(0) = 0.
class StaticNonlinearity {
public:
    using Evaluator = std::function<double(double)>;

    /// Wraps an arbitrary evaluator; rejects it unless it is odd on 64
    /// pseudo-random probes and vanishes at zero.
    StaticNonlinearity(std::string name, Evaluator f, std::map<std::string, double> params = {});

    static StaticNonlinearity saturation(double k);
    static StaticNonlinearity relay();
    static StaticNonlinearity dead_zone(double width);
    static StaticNonlinearity cubic();
    static StaticNonlinearity linear(double gain);
    /// Odd extension of a table given on x >= 0, linear in between and held
    /// constant past the last breakpoint.
    static StaticNonlinearity table(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const { return f_(x); }
    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }

private:
    std::string name_;
    Evaluator f_;
    std::map<std::string, double> params_;
};

/// Square-preserving operator described by its gain/phase map N(alpha, T).
struct SquarePreservingOp {
    std::string name;
    std::function<ComplexPoint(double alpha, double period)> response;
    bool period_dependent = false;

    ComplexPoint operator()(double alpha, double period) const { return response(alpha, period); }
};

ComplexPoint amplitude_response_static(const StaticNonlinearity& phi, double alpha);

/// Amplitude Nyquist locus of a static nonlinearity (independent of T).
Locus nyqa_static(const StaticNonlinearity& phi, const std::vector<double>& alphas);

/// Amplitude Nyquist locus of any square-preserving operator at period T.
Locus nyqa(const SquarePreservingOp& op, double period, const std::vector<double>& alphas);

/// u(t) -> u(t - max_{v<t} |u(v)|): unit gain, delay |alpha|.
ComplexPoint amplitude_dependent_delay(double alpha, double period);

ComplexPoint compose_square_preserving(const SquarePreservingOp& first, const SquarePreservingOp& second,
                                       double alpha, double period);

SquarePreservingOp as_square_preserving(const StaticNonlinearity& phi);
SquarePreservingOp amplitude_delay_op();
SquarePreservingOp compose(SquarePreservingOp first, SquarePreservingOp second);
/// Unit saturation after the amplitude-dependent delay.
SquarePreservingOp saturated_delay_op();

/// c -> -1/c pointwise, parameters preserved.
Locus neg_reciprocal(const Locus& locus);
std::complex<double> neg_reciprocal(const ComplexPoint& point);

}  // namespace sqdf
