#include <random>
#include <sstream>

#include "helpers.hpp"
#include "sqdf/signals.hpp"

using namespace sqdf;

namespace {

std::vector<double> values(const PeriodicSignal& x) { return {x.samples().begin(), x.samples().end()}; }

PeriodicSignal random_signal(double T, std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return {T, v};
}

}  // namespace

TEST_CASE("render_square follows the switching definition") {
    CHECK(values(render_square({1, 0, 1}, 8)) == std::vector<double>{1, 1, 1, 1, -1, -1, -1, -1});
    CHECK(values(render_square({2, 0.5, 1}, 8)) == std::vector<double>{-2, -2, -2, -2, 2, 2, 2, 2});
    CHECK(values(render_square({1, 0.25, 1}, 8)) == std::vector<double>{-1, -1, 1, 1, 1, 1, -1, -1});
}

TEST_CASE("render_square rejects bad grids") {
    CHECK_ERRC(render_square({1, 0, 1}, 7), Errc::invalid_argument);
    CHECK_ERRC(render_square({1, 0, 1}, 6), Errc::invalid_argument);
    CHECK_ERRC(render_square({1, 0, 0}, 8), Errc::invalid_argument);
    CHECK_ERRC(render_square({1, 0, -1}, 8), Errc::invalid_argument);
}

TEST_CASE("render_square is linear in the amplitude") {
    for (double a : {-3.0, 0.5, 7.0}) {
        const auto unit = render_square({1, 0.3, 2}, 64);
        const auto scaled = render_square({a, 0.3, 2}, 64);
        for (std::size_t i = 0; i < 64; ++i) CHECK(scaled[i] == a * unit[i]);
    }
}

TEST_CASE("PeriodicSignal invariants") {
    CHECK_ERRC(PeriodicSignal(1.0, std::vector<double>(4, 0.0)), Errc::invalid_argument);
    CHECK_ERRC(PeriodicSignal(1.0, std::vector<double>(9, 0.0)), Errc::invalid_argument);
    CHECK_ERRC(PeriodicSignal(0.0, std::vector<double>(8, 0.0)), Errc::invalid_argument);
    std::vector<double> bad(8, 0.0);
    bad[3] = std::nan("");
    CHECK_ERRC(PeriodicSignal(1.0, bad), Errc::invalid_argument);
}

TEST_CASE("periodic_delay") {
    const auto x = random_signal(3.0, 64, 1);
    CHECK(values(periodic_delay(x, 0.0)) == values(x));
    const auto full = periodic_delay(x, 3.0);
    for (std::size_t i = 0; i < 64; ++i) CHECK(full[i] == doctest::Approx(x[i]).epsilon(1e-15));
    const auto shifted = periodic_delay(render_square({1, 0, 1}, 8), 0.5);
    CHECK(values(shifted) == values(render_square({1, 0.5, 1}, 8)));
    CHECK_ERRC(periodic_delay(x, -0.1), Errc::invalid_argument);
    CHECK_ERRC(periodic_delay(x, 3.1), Errc::invalid_argument);
}

TEST_CASE("P_tau composed with P_{T - tau} is the identity on grid-aligned delays") {
    const auto x = random_signal(2.0, 128, 2);
    for (int j : {1, 5, 64, 127}) {
        const double tau = 2.0 * j / 128.0;
        const auto back = periodic_delay(periodic_delay(x, tau), 2.0 - tau);
        for (std::size_t i = 0; i < 128; ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-12);
    }
}

TEST_CASE("inner products of squares") {
    const double T = 2.0;
    const auto s0 = render_square({1, 0, T}, 64);
    CHECK(inner_product(s0, s0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(inner_product(s0, render_square({1, T / 2, T}, 64)) == doctest::Approx(-T).epsilon(1e-15));
    CHECK(std::abs(inner_product(s0, render_square({1, T / 4, T}, 64))) <= 1e-15);
    for (int j = 0; j < 64; ++j) {
        const auto s = render_square({1, T * j / 64.0, T}, 64);
        CHECK(inner_product(s, s) == T);
    }
}

TEST_CASE("inner product properties") {
    const auto a = random_signal(1.5, 32, 3);
    const auto b = random_signal(1.5, 32, 4);
    CHECK(inner_product(a, b) == inner_product(b, a));
    CHECK(inner_product(a, a) >= 0.0);
    CHECK_ERRC(inner_product(a, random_signal(1.5, 64, 5)), Errc::invalid_argument);
    CHECK_ERRC(inner_product(a, random_signal(1.0, 32, 5)), Errc::invalid_argument);

    // Rectangle exactness: <x, s_tau> is the signed sample sum times T/n.
    for (int j : {0, 3, 17}) {
        const auto s = render_square({1, 1.5 * j / 32.0, 1.5}, 32);
        double signed_sum = 0.0;
        for (std::size_t i = 0; i < 32; ++i) signed_sum += ((i + 32 - j) % 32 < 16 ? a[i] : -a[i]);
        CHECK(inner_product(a, s) == doctest::Approx(signed_sum * 1.5 / 32.0).epsilon(1e-14));
    }
}

TEST_CASE("value_at interpolates periodically") {
    const auto x = random_signal(4.0, 16, 6);
    CHECK(value_at(x, x.time(5)) == x[5]);
    CHECK(value_at(x, x.time(5) + 4.0) == doctest::Approx(x[5]).epsilon(1e-14));
    CHECK(value_at(x, x.time(5) - 8.0) == doctest::Approx(x[5]).epsilon(1e-14));
    const PeriodicSignal wave(1.0, {0, 1, 0, -1, 0, 1, 0, -1});
    CHECK(value_at(wave, 1.0 / 16.0) == doctest::Approx(0.5));
    CHECK(value_at(wave, 15.0 / 16.0) == doctest::Approx(-0.5));
}

TEST_CASE("signal CSV") {
    std::ostringstream os;
    write_csv(os, render_square({1, 0, 1}, 8));
    CHECK(os.str() == "t,value\n0,1\n0.125,1\n0.25,1\n0.375,1\n0.5,-1\n0.625,-1\n0.75,-1\n0.875,-1\n");
}
