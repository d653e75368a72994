#pragma once

#include <complex>
#include <random>
#include <vector>

#include "sqdf/linsys.hpp"

/// Random strictly proper Hurwitz transfer function of order 1 to 4 with
/// poles drawn from a box in the open left half plane.
inline sqdf::TransferFunction random_hurwitz(std::mt19937& rng) {
    std::uniform_int_distribution<int> order_dist(1, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int order = order_dist(rng);
    std::vector<double> den{1.0};
    auto multiply = [&](const std::vector<double>& factor) {
        std::vector<double> out(den.size() + factor.size() - 1, 0.0);
        for (std::size_t i = 0; i < den.size(); ++i)
            for (std::size_t j = 0; j < factor.size(); ++j) out[i + j] += den[i] * factor[j];
        den = out;
    };
    int placed = 0;
    while (placed < order) {
        if (order - placed >= 2 && u(rng) < 0.5) {
            const double re = -(0.1 + 1.9 * u(rng));
            const double im = 0.2 + 2.8 * u(rng);
            multiply({1.0, -2.0 * re, re * re + im * im});
            placed += 2;
        } else {
            multiply({1.0, 0.1 + 2.9 * u(rng)});
            placed += 1;
        }
    }
    std::vector<double> num(static_cast<std::size_t>(order));
    for (auto& c : num) c = 2.0 * u(rng) - 1.0;
    num.back() += num.back() >= 0.0 ? 0.5 : -0.5;
    return {num, den};
}
