#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "sqdf/predict.hpp"

using namespace sqdf;

namespace {

constexpr double pi = std::numbers::pi;

const TransferFunction& lag3() {
    static const TransferFunction G({1}, {1, 3, 3, 1});
    return G;
}

const std::vector<double>& periods() {
    static const auto T = logspace(0.2, 100.0, 400);
    return T;
}

const std::vector<double>& amplitudes() {
    static const auto a = logspace(1e-3, 1e3, 600);
    return a;
}

const Locus& lag3_adf() {
    static const Locus adf = adf_locus(lag3(), periods());
    return adf;
}

Locus polyline(ParameterKind kind, std::vector<double> params, std::vector<std::complex<double>> points) {
    Locus out(kind);
    for (std::size_t i = 0; i < params.size(); ++i) out.push_back(params[i], ComplexPoint::from_complex(points[i]));
    return out;
}

Locus arc_through_minus_one(std::size_t m) {
    std::vector<double> th;
    std::vector<std::complex<double>> pts;
    for (std::size_t i = 0; i < m; ++i) {
        th.push_back(0.75 * pi + 0.5 * pi * static_cast<double>(i) / static_cast<double>(m - 1));
        pts.push_back(std::polar(1.0, th.back()));
    }
    return polyline(ParameterKind::amplitude, th, pts);
}

FixedPointResult example3(double k, const std::vector<double>& T, const std::vector<double>& a) {
    FixedPointOptions opt;
    return adf_predict_T_dependent(TransferFunction({k}, {1, 1}), saturated_delay_op(), T, a, opt);
}

}  // namespace

TEST_CASE("a segment crossing an arc") {
    const auto seg = polyline(ParameterKind::period, {1.0, 2.0}, {-2.0, -0.5});
    const auto arc = arc_through_minus_one(41);
    const auto hits = intersect_loci(seg, arc);
    REQUIRE(hits.size() == 1);
    CHECK(std::abs(hits[0].point + 1.0) <= 1e-12);
    CHECK(hits[0].param_a == doctest::Approx(1.0 + 1.0 / 1.5));
    CHECK(hits[0].param_b == doctest::Approx(pi));
    CHECK_FALSE(hits[0].overlap);

    // Off-vertex crossing: the arc parameter is interpolated along the chord.
    const auto arc2 = arc_through_minus_one(40);
    const auto hits2 = intersect_loci(seg, arc2);
    REQUIRE(hits2.size() == 1);
    CHECK(std::abs(hits2[0].point.imag()) <= 1e-12);
    CHECK(hits2[0].param_b == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("disjoint loci do not intersect") {
    const auto a = polyline(ParameterKind::period, {0, 1, 2}, {{0, 0}, {1, 0}, {2, 0}});
    const auto b = polyline(ParameterKind::period, {0, 1, 2}, {{0, 1}, {1, 1}, {2, 1}});
    CHECK(intersect_loci(a, b).empty());
    CHECK(intersect_loci(a, arc_through_minus_one(20)).empty());
}

TEST_CASE("collinear overlap is reported with its midpoint") {
    const auto a = polyline(ParameterKind::period, {0, 1}, {{0, 0}, {2, 0}});
    const auto b = polyline(ParameterKind::amplitude, {0, 1}, {{1, 0}, {3, 0}});
    const auto hits = intersect_loci(a, b);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].overlap);
    CHECK(std::abs(hits[0].point - std::complex<double>(1.5, 0.0)) <= 1e-12);
}

TEST_CASE("loci with a single point are rejected") {
    const auto a = polyline(ParameterKind::period, {0}, {{0, 0}});
    CHECK_ERRC(intersect_loci(a, arc_through_minus_one(5)), Errc::invalid_argument);
}

TEST_CASE("swapping the loci gives the same crossings") {
    const auto ray = neg_reciprocal(nyqa_static(StaticNonlinearity::saturation(12.0), amplitudes()));
    const auto ab = intersect_loci(lag3_adf(), ray);
    const auto ba = intersect_loci(ray, lag3_adf());
    REQUIRE(ab.size() == 1);
    REQUIRE(ba.size() == 1);
    CHECK(std::abs(ab[0].point - ba[0].point) <= 1e-8);
    CHECK(ab[0].param_a == doctest::Approx(ba[0].param_b).epsilon(1e-10));
    CHECK(ab[0].param_b == doctest::Approx(ba[0].param_a).epsilon(1e-10));
    CHECK(std::abs(ab[0].point.real() + 0.105) <= 0.002);

    const auto c1 = intersect_loci(lag3_adf(), arc_through_minus_one(33));
    const auto c2 = intersect_loci(arc_through_minus_one(33), lag3_adf());
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(std::abs(c1[i].point - c2[i].point) <= 1e-8);
}

TEST_CASE("ADF real-axis crossing of the third-order lag") {
    const auto crossings = adf_real_axis_crossings(lag3(), lag3_adf());
    REQUIRE(crossings.size() == 1);
    CHECK(std::abs(crossings[0].second + 0.105) <= 0.002);
    CHECK(std::abs(crossings[0].first - 3.680) <= 0.01);
    CHECK(std::abs(adf_point(lag3(), crossings[0].first).value().imag()) <= 1e-6);
}

TEST_CASE("ADF prediction for the saturated third-order lag") {
    const auto k12 = adf_predict(lag3(), StaticNonlinearity::saturation(12.0), periods(), amplitudes());
    REQUIRE(k12.predictions.size() == 1);
    const auto& p = k12.predictions.front();
    CHECK(p.method == "adf");
    CHECK(std::abs(p.period - 3.680) <= 0.01);
    CHECK(p.residual <= 1e-3);

    // Re-evaluate the balance independently of the predictor.
    const auto g = adf_point(lag3().scaled(1.0), p.period).value();
    const double gamma = std::min(12.0 * p.amplitude, 1.0) / p.amplitude;
    CHECK(std::abs(g * gamma + 1.0) <= 1e-3);
    CHECK(p.amplitude_after == doctest::Approx(gamma * p.amplitude));

    CHECK(adf_predict(lag3(), StaticNonlinearity::saturation(5.0), periods(), amplitudes()).predictions.empty());

    // The precomputed-locus overload agrees.
    const auto again = adf_predict(lag3(), lag3_adf(), StaticNonlinearity::saturation(12.0), amplitudes());
    REQUIRE(again.predictions.size() == 1);
    CHECK(again.predictions[0].period == doctest::Approx(p.period).epsilon(1e-12));
}

TEST_CASE("ADF onset gain for the saturated third-order lag") {
    auto exists = [&](double k) {
        return !adf_predict(lag3(), lag3_adf(), StaticNonlinearity::saturation(k), amplitudes()).predictions.empty();
    };
    const double onset = bisect_onset(exists, 5.0, 12.0, 20);
    CHECK(std::abs(onset - 9.53) <= 0.05);
    CHECK(-1.0 / onset == doctest::Approx(adf_real_axis_crossings(lag3(), lag3_adf())[0].second).epsilon(1e-4));
}

TEST_CASE("ADF prediction does not depend on the grid") {
    const auto coarse = adf_predict(lag3(), StaticNonlinearity::saturation(12.0), periods(), amplitudes());
    const auto fine =
        adf_predict(lag3(), StaticNonlinearity::saturation(12.0), logspace(0.2, 100.0, 799), logspace(1e-3, 1e3, 1199));
    REQUIRE(coarse.predictions.size() == 1);
    REQUIRE(fine.predictions.size() == 1);
    CHECK(std::abs(coarse.predictions[0].period - fine.predictions[0].period) <= 2e-6);
    CHECK(std::abs(coarse.predictions[0].amplitude - fine.predictions[0].amplitude) <= 2e-6);
}

TEST_CASE("zero-gain nonlinearity points are dropped with a warning") {
    const auto dz = adf_predict(lag3(), lag3_adf(), StaticNonlinearity::dead_zone(0.1), logspace(0.01, 10.0, 50));
    CHECK_FALSE(dz.warnings.empty());
    for (const auto& p : dz.predictions) CHECK(p.residual <= 1e-3);
}

TEST_CASE("period-dependent prediction for the saturated delay") {
    const auto r15 = example3(15.0, periods(), amplitudes());
    REQUIRE(r15.converged);
    REQUIRE(r15.prediction.has_value());
    CHECK(std::abs(r15.prediction->period - 28.4) <= 0.3);
    CHECK(std::abs(r15.prediction->amplitude - 13.47) <= 0.2);
    CHECK(r15.prediction->residual <= 1e-3);
    CHECK_FALSE(r15.trace.empty());

    const auto r11 = example3(11.0, periods(), amplitudes());
    REQUIRE(r11.converged);
    CHECK(std::abs(r11.prediction->period - 20.4) <= 0.3);

    const auto r2 = example3(2.0, periods(), amplitudes());
    CHECK_FALSE(r2.converged);
    CHECK_FALSE(r2.prediction.has_value());
    CHECK_FALSE(r2.reason.empty());

    const auto fine = example3(15.0, logspace(0.2, 100.0, 799), logspace(1e-3, 1e3, 1199));
    REQUIRE(fine.converged);
    CHECK(std::abs(fine.prediction->period - r15.prediction->period) <= 2e-3);
}

TEST_CASE("unity feedback square check") {
    const auto d = unity_feedback_square_check(amplitude_delay_op(), 2.0, linspace(0.05, 1.9, 100));
    REQUIRE(d.has_value());
    CHECK(d->amplitude == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d->error.amplitude == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d->error.delay == 0.0);
    CHECK(d->error.period == 2.0);

    const auto half = as_square_preserving(StaticNonlinearity::linear(0.5));
    CHECK_FALSE(unity_feedback_square_check(half, 2.0, linspace(0.05, 10.0, 100)).has_value());

    const auto sd = unity_feedback_square_check(saturated_delay_op(), 2.0, linspace(0.05, 3.0, 100));
    REQUIRE(sd.has_value());
    CHECK(sd->amplitude == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("onset bisection needs a valid bracket") {
    auto above3 = [](double k) { return k >= 3.0; };
    CHECK(bisect_onset(above3, 0.0, 10.0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK_ERRC(bisect_onset(above3, 4.0, 10.0), Errc::invalid_bracket);
    CHECK_ERRC(bisect_onset(above3, 0.0, 2.0), Errc::invalid_bracket);
}

TEST_CASE("prediction CSV") {
    Prediction p;
    p.method = "adf";
    p.period = 3.5;
    p.amplitude = 0.25;
    p.point = {-0.125, 0.5};
    p.residual = 1e-9;
    std::ostringstream os;
    write_csv(os, {p});
    const std::string text = os.str();
    CHECK(text.rfind("method,T,alpha_out,re,im,residual\n", 0) == 0);
    CHECK(text.find("adf,3.5,0.25,-0.125,0.5,1e-09") != std::string::npos);

    std::ostringstream empty;
    write_csv(empty, {});
    CHECK(empty.str() == "method,T,alpha_out,re,im,residual\n");
}
