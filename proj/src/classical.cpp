#include "sqdf/classical.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "sqdf/error.hpp"

namespace sqdf {

namespace {

struct Nodes {
    std::vector<double> cos;
    std::vector<double> sin;
};

/// Midpoint quadrature nodes on one period, cached per thread and size.
const Nodes& nodes(std::size_t samples) {
    thread_local std::map<std::size_t, Nodes> cache;
    auto [it, inserted] = cache.try_emplace(samples);
    if (inserted) {
        it->second.cos.resize(samples);
        it->second.sin.resize(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            const double theta = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
            it->second.cos[i] = std::cos(theta);
            it->second.sin[i] = std::sin(theta);
        }
    }
    return it->second;
}

}  // namespace

DFPoint describing_function(const StaticNonlinearity& phi, double alpha, std::size_t samples) {
    if (alpha == 0.0 || !std::isfinite(alpha)) fail(Errc::invalid_argument, fmt::format("amplitude must be finite and nonzero, got {}", alpha));
    if (samples < 4096) fail(Errc::invalid_argument, "describing function quadrature needs at least 4096 points");
    const Nodes& q = nodes(samples);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double out = phi(alpha * q.cos[i]);
        re += out * q.cos[i];
        im -= out * q.sin[i];
    }
    const double scale = 2.0 / (alpha * static_cast<double>(samples));
    return {{re * scale, im * scale}, alpha};
}

Locus df_locus(const StaticNonlinearity& phi, const std::vector<double>& alphas, std::size_t samples) {
    Locus locus(ParameterKind::amplitude);
    for (double a : alphas) locus.push_back(a, ComplexPoint::from_complex(describing_function(phi, a, samples).value));
    return locus;
}

Locus nyquist_locus(const TransferFunction& G, const std::vector<double>& omegas) {
    Locus locus(ParameterKind::frequency);
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!(omegas[i] > 0.0)) fail(Errc::invalid_argument, fmt::format("frequencies must be positive, got {}", omegas[i]));
        if (i > 0 && !(omegas[i] > omegas[i - 1])) fail(Errc::invalid_argument, "frequency grid must be strictly increasing");
        locus.push_back(omegas[i], ComplexPoint::from_complex(freq_response(G, omegas[i])));
    }
    return locus;
}

PredictionSet classical_predict(const TransferFunction& G, const StaticNonlinearity& phi,
                                const std::vector<double>& omegas, const std::vector<double>& alphas) {
    PredictionSet out;
    const Locus nyquist = nyquist_locus(G, omegas);
    const Locus target = neg_reciprocal_nonzero(df_locus(phi, alphas), out.warnings);
    if (nyquist.size() < 2 || target.size() < 2) return out;

    const CurveEvaluator eval_g = [&](double w) { return freq_response(G, w); };
    const CurveEvaluator eval_n = [&](double a) { return -1.0 / describing_function(phi, a).value; };
    for (const auto& raw : intersect_loci(nyquist, target)) {
        if (raw.overlap) {
            out.warnings.push_back(fmt::format("Nyquist locus overlaps -1/N near {}{:+}j", raw.point.real(), raw.point.imag()));
            continue;
        }
        const Crossing c = refine_crossing(raw, nyquist, target, eval_g, eval_n);
        const auto df = describing_function(phi, c.param_b).value;
        Prediction p;
        p.method = "df";
        p.period = 2.0 * std::numbers::pi / c.param_a;
        p.amplitude = c.param_b;
        p.amplitude_after = std::abs(df) * c.param_b;
        p.point = c.point;
        p.residual = std::abs(freq_response(G, c.param_a) * df + 1.0);
        out.predictions.push_back(p);
    }
    return out;
}

}  // namespace sqdf
