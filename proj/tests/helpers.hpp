#pragma once

#include <cmath>
#include <vector>

#include <doctest.h>

#include "sqdf/error.hpp"

#define CHECK_ERRC(expr, errc)                                   \
    do {                                                         \
        bool thrown_ = false;                                    \
        try {                                                    \
            (void)(expr);                                        \
        } catch (const sqdf::Error& e_) {                        \
            thrown_ = true;                                      \
            CHECK(e_.code() == (errc));                          \
        }                                                        \
        CHECK_MESSAGE(thrown_, "expected sqdf::Error from " #expr); \
    } while (0)

inline std::vector<double> logspace(double lo, double hi, std::size_t m) {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(m - 1));
    return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t m) {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    return out;
}
