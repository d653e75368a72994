#include "sqdf/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqdf/error.hpp"

namespace sqdf {

namespace {

std::vector<double> strip_leading_zeros(std::vector<double> c) {
    auto it = std::find_if(c.begin(), c.end(), [](double v) { return v != 0.0; });
    c.erase(c.begin(), it);
    return c;
}

std::complex<double> horner(const std::vector<double>& c, std::complex<double> s) {
    std::complex<double> acc = 0.0;
    for (double v : c) acc = acc * s + v;
    return acc;
}

}  // namespace

TransferFunction::TransferFunction(std::vector<double> num, std::vector<double> den) {
    for (double v : num) {
        if (!std::isfinite(v)) fail(Errc::invalid_argument, "numerator coefficients must be finite");
    }
    for (double v : den) {
        if (!std::isfinite(v)) fail(Errc::invalid_argument, "denominator coefficients must be finite");
    }
    den = strip_leading_zeros(std::move(den));
    if (den.empty()) fail(Errc::invalid_argument, "denominator must have a nonzero coefficient");
    num = strip_leading_zeros(std::move(num));
    if (num.empty()) num = {0.0};
    if (num.size() > den.size()) {
        fail(Errc::invalid_argument,
             fmt::format("transfer function is improper: numerator degree {} exceeds denominator degree {}",
                         num.size() - 1, den.size() - 1));
    }
    const double lead = den.front();
    for (double& v : den) v /= lead;
    for (double& v : num) v /= lead;
    num_ = std::move(num);
    den_ = std::move(den);
}

std::vector<std::complex<double>> TransferFunction::poles() const {
    const std::size_t n = order();
    if (n == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) companion(0, static_cast<Eigen::Index>(j)) = -den_[j + 1];
    for (std::size_t i = 1; i < n; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

bool TransferFunction::is_hurwitz() const {
    for (const auto& p : poles()) {
        if (!(p.real() < 0.0)) return false;
    }
    return true;
}

TransferFunction TransferFunction::scaled(double gain) const {
    std::vector<double> num(num_);
    for (double& v : num) v *= gain;
    return TransferFunction(std::move(num), den_);
}

std::complex<double> StateSpace::freq_response(double omega) const {
    const auto n = A.rows();
    if (n == 0) return D;
    const Eigen::MatrixXcd sI_A = std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
                                  A.cast<std::complex<double>>();
    const Eigen::VectorXcd x = sI_A.fullPivLu().solve(B.cast<std::complex<double>>());
    return (C.cast<std::complex<double>>() * x)(0) + D;
}

StateSpace tf_to_ss(const TransferFunction& G) {
    const std::size_t n = G.order();
    const auto& den = G.den();
    std::vector<double> num(n + 1 - G.num().size(), 0.0);
    num.insert(num.end(), G.num().begin(), G.num().end());

    const auto N = static_cast<Eigen::Index>(n);
    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(N, N);
    ss.B = Eigen::VectorXd::Zero(N);
    ss.C = Eigen::RowVectorXd::Zero(N);
    ss.D = num[0];
    if (n == 0) return ss;
    for (Eigen::Index j = 0; j < N; ++j) {
        const auto k = static_cast<std::size_t>(j) + 1;
        ss.A(0, j) = -den[k];
        ss.C(j) = num[k] - den[k] * ss.D;
    }
    for (Eigen::Index i = 1; i < N; ++i) ss.A(i, i - 1) = 1.0;
    ss.B(0) = 1.0;
    return ss;
}

std::complex<double> freq_response(const TransferFunction& G, double omega) {
    const std::complex<double> s(0.0, omega);
    const auto d = horner(G.den(), s);
    if (std::abs(d) == 0.0) {
        fail(Errc::evaluation_at_pole, fmt::format("transfer function has a pole at s = j{}", omega));
    }
    return horner(G.num(), s) / d;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) fail(Errc::invalid_argument, "matrix exponential needs a square matrix");
    if (!M.allFinite()) fail(Errc::invalid_argument, "matrix exponential needs finite entries");
    if (M.rows() == 0) return M;
    return M.exp();
}

HoldDiscretization discretize_hold(const StateSpace& ss, double h) {
    const auto n = ss.A.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = ss.A * h;
    aug.topRightCorner(n, 1) = ss.B * h;
    const Eigen::MatrixXd E = matrix_exponential(aug);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, 1)};
}

PeriodicSignal square_steady_state(const TransferFunction& G, double alpha, double period, std::size_t n) {
    if (!(period > 0.0) || !std::isfinite(period)) {
        fail(Errc::invalid_argument, fmt::format("period must be positive, got {}", period));
    }
    if (n < 8 || n % 2 != 0) fail(Errc::invalid_argument, fmt::format("grid size must be even and >= 8, got {}", n));
    if (!G.is_hurwitz()) fail(Errc::invalid_argument, "steady-state response requires a Hurwitz transfer function");

    const StateSpace ss = tf_to_ss(G);
    const auto nx = ss.A.rows();
    std::vector<double> y(n);
    if (nx == 0) {
        for (std::size_t i = 0; i < n; ++i) y[i] = ss.D * (i < n / 2 ? alpha : -alpha);
        return PeriodicSignal(period, std::move(y));
    }

    // x(T/2) = Phi x0 + Gamma alpha, x(T) = Phi x(T/2) - Gamma alpha.
    const auto half = discretize_hold(ss, period / 2.0);
    const Eigen::MatrixXd M = half.Phi * half.Phi;
    const Eigen::VectorXd v = (half.Phi - Eigen::MatrixXd::Identity(nx, nx)) * half.Gamma * alpha;
    const Eigen::MatrixXd I_M = Eigen::MatrixXd::Identity(nx, nx) - M;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(I_M);
    if (!(lu.rcond() > 1e-13)) {
        fail(Errc::no_unique_steady_state,
             fmt::format("periodic steady state is ill-posed (rcond {:.3g})", lu.rcond()));
    }
    const Eigen::VectorXd x0 = lu.solve(v);

    const auto step = discretize_hold(ss, period / static_cast<double>(n));
    Eigen::VectorXd x = x0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = i < n / 2 ? alpha : -alpha;
        y[i] = ss.C.dot(x) + ss.D * u;
        x = step.Phi * x + step.Gamma * u;
    }
    const double drift = (x - x0).norm();
    if (!(drift <= 1e-9 * (1.0 + x0.norm()))) {
        fail(Errc::no_unique_steady_state, fmt::format("steady state failed to close the period (drift {:.3g})", drift));
    }
    return PeriodicSignal(period, std::move(y));
}

PeriodicSignal square_steady_state_fourier(const TransferFunction& G, double alpha, double period,
                                           std::size_t n, std::size_t harmonics) {
    if (!(period > 0.0)) fail(Errc::invalid_argument, "period must be positive");
    if (n < 8 || n % 2 != 0) fail(Errc::invalid_argument, "grid size must be even and >= 8");
    if (harmonics < 1) fail(Errc::invalid_argument, "need at least one harmonic");
    if (!G.is_hurwitz()) fail(Errc::invalid_argument, "steady-state response requires a Hurwitz transfer function");

    constexpr double pi = std::numbers::pi;
    const double omega = 2.0 * pi / period;
    std::vector<double> y(n, 0.0);
    if (alpha == 0.0) return PeriodicSignal(period, std::move(y));

    std::vector<std::complex<double>> roots(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double theta = 2.0 * pi * static_cast<double>(m) / static_cast<double>(n);
        roots[m] = {std::cos(theta), std::sin(theta)};
    }
    // Unit-amplitude square: sum over odd k of (4 / (k pi)) sin(k omega t).
    for (std::size_t h = 0; h < harmonics; ++h) {
        const std::size_t k = 2 * h + 1;
        const std::complex<double> g = freq_response(G, static_cast<double>(k) * omega);
        const double c = 4.0 * alpha / (static_cast<double>(k) * pi);
        for (std::size_t i = 0; i < n; ++i) {
            // k*i is reduced mod n so the phase stays exact for large k.
            y[i] += c * (g * roots[(k * i) % n]).imag();
        }
    }
    return PeriodicSignal(period, std::move(y));
}

}  // namespace sqdf
