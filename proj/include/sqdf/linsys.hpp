#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sqdf/signals.hpp"

namespace sqdf {

/// Proper rational transfer function with real coefficients in descending
/// powers of s. The denominator is normalized to be monic on construction.
class TransferFunction {
public:
    TransferFunction(std::vector<double> num, std::vector<double> den);

    const std::vector<double>& num() const noexcept { return num_; }
    const std::vector<double>& den() const noexcept { return den_; }
    std::size_t order() const noexcept { return den_.size() - 1; }

    /// Roots of the denominator.
    std::vector<std::complex<double>> poles() const;
    /// All poles strictly in the open left half plane.
    bool is_hurwitz() const;

    TransferFunction scaled(double gain) const;

private:
    std::vector<double> num_;
    std::vector<double> den_;
};

struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    std::size_t states() const noexcept { return static_cast<std::size_t>(A.rows()); }
    std::complex<double> freq_response(double omega) const;
};

/// Controllable canonical realization.
StateSpace tf_to_ss(const TransferFunction& G);

/// G(j omega) by Horner evaluation of numerator and denominator.
std::complex<double> freq_response(const TransferFunction& G, double omega);

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M);

/// Zero-order-hold transition pair over a step h: Phi = e^{Ah},
/// Gamma = (int_0^h e^{A s} ds) B, via the augmented exponential of
/// [[A, B], [0, 0]] so that singular A needs no inverse.
struct HoldDiscretization {
    Eigen::MatrixXd Phi;
    Eigen::VectorXd Gamma;
};
HoldDiscretization discretize_hold(const StateSpace& ss, double h);

/// Exact T-periodic steady-state output of G driven by alpha * s_0, sampled
/// on an n-point grid.
PeriodicSignal square_steady_state(const TransferFunction& G, double alpha, double period, std::size_t n);

/// Odd-harmonic Fourier synthesis of the same response, truncated after H
/// terms (harmonics 1, 3, ..., 2H-1). Serves as an independent check of
/// square_steady_state.
PeriodicSignal square_steady_state_fourier(const TransferFunction& G, double alpha, double period,
                                           std::size_t n, std::size_t harmonics);

}  // namespace sqdf
