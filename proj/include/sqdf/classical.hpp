#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "sqdf/adf.hpp"
#include "sqdf/linsys.hpp"
#include "sqdf/nonlin.hpp"
#include "sqdf/predict.hpp"

namespace sqdf {

struct DFPoint {
    std::complex<double> value;
    double amplitude = 0.0;
};

/// First-harmonic describing function (2/(alpha T)) int Phi(alpha cos wt) e^{-jwt} dt,
/// by the midpoint rule on `samples` points.
DFPoint describing_function(const StaticNonlinearity& phi, double alpha, std::size_t samples = 65536);

Locus df_locus(const StaticNonlinearity& phi, const std::vector<double>& alphas, std::size_t samples = 65536);

Locus nyquist_locus(const TransferFunction& G, const std::vector<double>& omegas);

/// Intersections of G(jw) with -1/N(alpha). Period = 2 pi / w.
PredictionSet classical_predict(const TransferFunction& G, const StaticNonlinearity& phi,
                                const std::vector<double>& omegas, const std::vector<double>& alphas);

}  // namespace sqdf
