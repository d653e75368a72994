#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqdf/adf.hpp"
#include "sqdf/linsys.hpp"
#include "sqdf/nonlin.hpp"

namespace sqdf {

/// Intersection of two polylines. Parameters are linearly interpolated
/// within the crossing segments (or refined against exact evaluators).
struct Crossing {
    double param_a = 0.0;
    double param_b = 0.0;
    std::complex<double> point;
    std::size_t segment_a = 0;
    std::size_t segment_b = 0;
    /// Collinear overlap; `point` is the midpoint of the shared piece.
    bool overlap = false;
};

std::vector<Crossing> intersect_loci(const Locus& a, const Locus& b);

using CurveEvaluator = std::function<std::complex<double>(double)>;

/// Narrows a crossing by bisecting both parameter intervals against the
/// exact curves until the two points agree to `gap`.
Crossing refine_crossing(const Crossing& crossing, const Locus& a, const Locus& b, const CurveEvaluator& eval_a,
                         const CurveEvaluator& eval_b, double gap = 1e-8);

struct Prediction {
    std::string method;
    double period = 0.0;
    /// Amplitude at the output of G (the nonlinearity input).
    double amplitude = 0.0;
    /// Amplitude after the nonlinearity, gamma(alpha) * alpha.
    double amplitude_after = 0.0;
    std::complex<double> point;
    /// |G(T) N(alpha) + 1| re-evaluated at the reported parameters.
    double residual = 0.0;
    /// Relative residual of the ADF square fit at the reported period.
    double fit_residual = 0.0;
};

/// CSV `method,T,alpha_out,re,im,residual`.
void write_csv(std::ostream& os, const std::vector<Prediction>& predictions);

struct PredictionSet {
    std::vector<Prediction> predictions;
    std::vector<std::string> warnings;
};

PredictionSet adf_predict(const TransferFunction& G, const StaticNonlinearity& phi, const std::vector<double>& periods,
                          const std::vector<double>& alphas, std::size_t n = 2048);

/// Same, against a precomputed ADF locus of G.
PredictionSet adf_predict(const TransferFunction& G, const Locus& adf, const StaticNonlinearity& phi,
                          const std::vector<double>& alphas, std::size_t n = 2048);

struct FixedPointOptions {
    double T_init = 10.0;
    /// Stop once |F(T) - T| <= tol; non-positive selects 1e-5 * T_init.
    double tol = 0.0;
    /// Iterations of the root finder inside one bracket.
    int max_iter = 50;
    std::size_t n = 2048;
    /// Ignore crossings where |N| does not vary with the amplitude (for the
    /// saturated delay, the unsaturated arc |alpha| <= 1).
    bool exclude_flat_gain = true;
};

struct FixedPointIterate {
    double period = 0.0;
    /// Period of the crossing found with N frozen at `period`; NaN if none.
    double image = 0.0;
};

struct FixedPointResult {
    std::optional<Prediction> prediction;
    bool converged = false;
    std::vector<FixedPointIterate> trace;
    std::string reason;
};

/// Fixed point T = F(T) where F(T) is the ADF-locus period of the crossing
/// with -1/nyq(N at T). Of several crossings the one with the smallest
/// amplitude is followed. Sign changes of F(T) - T are searched outward
/// from T_init and the nearest one that converges is returned.
FixedPointResult adf_predict_T_dependent(const TransferFunction& G, const SquarePreservingOp& op,
                                         const std::vector<double>& periods, const std::vector<double>& alphas,
                                         const FixedPointOptions& options);

struct UnityOscillation {
    double amplitude = 0.0;
    /// e = amplitude * s_0; the loop output is -e.
    SquareWave error;
};

/// Scans for |N(alpha, T)| = 1 with phase pi, as required for a square
/// oscillation under unity negative feedback.
std::optional<UnityOscillation> unity_feedback_square_check(const SquarePreservingOp& op, double period,
                                                            const std::vector<double>& alphas);

/// Smallest k in [lo, hi] (to `iterations` bisections) at which `exists`
/// switches from false to true. Requires exists(lo) false, exists(hi) true.
double bisect_onset(const std::function<bool(double)>& exists, double lo, double hi, int iterations = 40);

/// -1/c of every nonzero point; zero points are dropped with a warning.
Locus neg_reciprocal_nonzero(const Locus& locus, std::vector<std::string>& warnings);

/// Real negative-axis crossings of a locus, as (param, value) pairs.
std::vector<std::pair<double, double>> negative_real_crossings(const Locus& locus);

/// Negative real-axis crossings of the ADF locus of G, each refined by
/// bisection on Im adf_point(G, T) within its grid interval.
std::vector<std::pair<double, double>> adf_real_axis_crossings(const TransferFunction& G, const Locus& adf,
                                                               std::size_t n = 2048);

}  // namespace sqdf
