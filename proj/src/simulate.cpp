#include "sqdf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "sqdf/csv.hpp"
#include "sqdf/error.hpp"

namespace sqdf {

namespace {

using Eigen::VectorXd;

/// Feedback law evaluated at (t, e). Delay feedback keeps the error history
/// of accepted steps; stage evaluations inside a step interpolate towards
/// the stage value when the delay is shorter than the step.
class FeedbackLaw {
public:
    FeedbackLaw(const Feedback& fb, double e0) : fb_(fb), e0_(e0) {}

    double eval(double t, double e) const {
        if (const auto* phi = std::get_if<StaticNonlinearity>(&fb_)) return (*phi)(e);
        const auto& d = std::get<DelayFeedback>(fb_);
        return d.phi(delayed_error(t, e, d));
    }

    void commit(double t, double e) {
        const auto* d = std::get_if<DelayFeedback>(&fb_);
        if (d == nullptr) return;
        history_.emplace_back(t, e);
        if (std::isinf(d->window)) {
            gamma_ = std::max(gamma_, std::abs(e));
        } else {
            while (!peaks_.empty() && peaks_.back().second <= std::abs(e)) peaks_.pop_back();
            peaks_.emplace_back(t, std::abs(e));
            while (peaks_.front().first < t - d->window) peaks_.pop_front();
            gamma_ = peaks_.front().second;
        }
        if (std::isfinite(d->max_history)) {
            while (history_.size() > 2 && history_[1].first <= t - d->max_history) history_.pop_front();
        }
    }

private:
    double delayed_error(double t, double e, const DelayFeedback& d) const {
        const double td = t - gamma_;
        if (td < 0.0) return e0_;
        const auto& [t_last, e_last] = history_.back();
        if (td >= t_last) {
            if (t <= t_last) return e_last;
            const double f = (td - t_last) / (t - t_last);
            return e_last + f * (e - e_last);
        }
        if (td < history_.front().first) {
            fail(Errc::simulation_fault, fmt::format("delay {} at t = {} reaches past the retained history ({} s)",
                                                     gamma_, t, d.max_history));
        }
        const auto it = std::upper_bound(history_.begin(), history_.end(), td,
                                         [](double x, const std::pair<double, double>& p) { return x < p.first; });
        const auto& [t1, e1] = *it;
        const auto& [t0, e0] = *(it - 1);
        return e0 + (td - t0) / (t1 - t0) * (e1 - e0);
    }

    const Feedback& fb_;
    double e0_;
    double gamma_ = 0.0;
    std::deque<std::pair<double, double>> history_;
    std::deque<std::pair<double, double>> peaks_;
};

VectorXd initial_state(const StateSpace& plant, const SimConfig& cfg) {
    const auto nx = static_cast<Eigen::Index>(plant.states());
    VectorXd x = VectorXd::Zero(nx);
    if (!cfg.initial_state.empty()) {
        if (cfg.initial_state.size() != plant.states()) {
            fail(Errc::invalid_argument, fmt::format("initial state has {} entries, plant has {} states",
                                                     cfg.initial_state.size(), plant.states()));
        }
        for (Eigen::Index i = 0; i < nx; ++i) x[i] = cfg.initial_state[static_cast<std::size_t>(i)];
    } else if (cfg.initial_output) {
        const double c2 = plant.C.squaredNorm();
        if (c2 == 0.0) fail(Errc::invalid_argument, "plant output does not depend on the state");
        x = plant.C.transpose() * (*cfg.initial_output / c2);
    } else if (nx > 0) {
        x[0] = 1e-2;
    }
    if (cfg.seed) {
        std::mt19937_64 rng(*cfg.seed);
        std::uniform_real_distribution<double> perturb(-1e-2, 1e-2);
        for (Eigen::Index i = 0; i < nx; ++i) x[i] += perturb(rng);
    }
    return x;
}

void validate(const StateSpace& plant, const SimConfig& cfg) {
    if (plant.D != 0.0) fail(Errc::invalid_argument, "feedback loop needs a strictly proper plant (D = 0)");
    if (plant.states() == 0) fail(Errc::invalid_argument, "plant has no states");
    if (!(cfg.step > 0.0)) fail(Errc::invalid_argument, fmt::format("step must be positive, got {}", cfg.step));
    if (!(cfg.horizon > 0.0)) fail(Errc::invalid_argument, fmt::format("horizon must be positive, got {}", cfg.horizon));
    if (!(cfg.transient_fraction >= 0.0 && cfg.transient_fraction < 1.0)) {
        fail(Errc::invalid_argument, "transient fraction must lie in [0, 1)");
    }
    if (cfg.solver == Solver::rk45 && !(cfg.max_step > 0.0 && cfg.rtol > 0.0 && cfg.atol > 0.0)) {
        fail(Errc::invalid_argument, "adaptive solver needs positive max_step, rtol and atol");
    }
}

void check_finite(const VectorXd& x, double t) {
    if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e12) {
        fail(Errc::divergence_fault, fmt::format("state diverged at t = {}", t));
    }
}

}  // namespace

void write_csv(std::ostream& os, const TimeSeries& ts, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    os << "t,u,y\n";
    for (std::size_t i = 0; i < ts.size(); i += stride) {
        os << csv_number(ts.t[i]) << ',' << csv_number(ts.u[i]) << ',' << csv_number(ts.y[i]) << '\n';
    }
}

TimeSeries simulate_lure(const StateSpace& plant, const Feedback& feedback, const SimConfig& cfg) {
    validate(plant, cfg);
    VectorXd x = initial_state(plant, cfg);
    auto output = [&](const VectorXd& s) { return plant.C.dot(s); };

    FeedbackLaw law(feedback, -output(x));
    auto deriv = [&](double t, const VectorXd& s) -> VectorXd {
        return plant.A * s + plant.B * law.eval(t, -output(s));
    };

    TimeSeries ts;
    auto record = [&](double t) {
        const double y = output(x);
        law.commit(t, -y);
        ts.t.push_back(t);
        ts.u.push_back(law.eval(t, -y));
        ts.y.push_back(y);
    };

    double t = 0.0;
    record(t);
    if (cfg.solver == Solver::rk4) {
        const double h = cfg.step;
        const auto steps = static_cast<std::size_t>(std::ceil(cfg.horizon / h - 1e-9));
        ts.t.reserve(steps + 1);
        ts.u.reserve(steps + 1);
        ts.y.reserve(steps + 1);
        for (std::size_t i = 0; i < steps; ++i) {
            const VectorXd k1 = deriv(t, x);
            const VectorXd k2 = deriv(t + 0.5 * h, x + 0.5 * h * k1);
            const VectorXd k3 = deriv(t + 0.5 * h, x + 0.5 * h * k2);
            const VectorXd k4 = deriv(t + h, x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = static_cast<double>(i + 1) * h;
            check_finite(x, t);
            record(t);
        }
        return ts;
    }

    // Dormand-Prince 5(4).
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static constexpr double b4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    double h = std::min(cfg.step, cfg.max_step);
    std::vector<VectorXd> k(7);
    while (t < cfg.horizon) {
        h = std::min(h, cfg.horizon - t);
        k[0] = deriv(t, x);
        for (int s = 1; s < 7; ++s) {
            VectorXd xs = x;
            for (int j = 0; j < s; ++j) xs += h * a[s][j] * k[j];
            k[s] = deriv(t + c[s] * h, xs);
        }
        VectorXd x5 = x;
        VectorXd x4 = x;
        for (int j = 0; j < 6; ++j) x5 += h * a[6][j] * k[j];
        for (int j = 0; j < 7; ++j) x4 += h * b4[j] * k[j];
        double err = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double scale = cfg.atol + cfg.rtol * std::max(std::abs(x[i]), std::abs(x5[i]));
            err = std::max(err, std::abs(x5[i] - x4[i]) / scale);
        }
        if (!std::isfinite(err)) fail(Errc::divergence_fault, fmt::format("state diverged at t = {}", t));
        if (err <= 1.0) {
            t = (cfg.horizon - t <= h * (1.0 + 1e-12)) ? cfg.horizon : t + h;
            x = x5;
            check_finite(x, t);
            record(t);
        }
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(h * factor, cfg.max_step);
        if (h < 1e-12 * std::max(1.0, t)) fail(Errc::numerical_failure, fmt::format("step size underflow at t = {}", t));
    }
    return ts;
}

OscillationReport detect_oscillation(const TimeSeries& ts, double transient_fraction) {
    if (ts.size() < 2) fail(Errc::insufficient_data, "time series is empty");
    const double t0 = ts.t.front();
    const double t_end = ts.t.back();
    const double t_start = t0 + transient_fraction * (t_end - t0);
    const auto first = static_cast<std::size_t>(std::lower_bound(ts.t.begin(), ts.t.end(), t_start) - ts.t.begin());
    if (ts.size() - first < 16) {
        fail(Errc::insufficient_data, fmt::format("only {} samples after the transient", ts.size() - first));
    }

    // Time-weighted mean of the retained part.
    double area = 0.0;
    for (std::size_t i = first; i + 1 < ts.size(); ++i) area += 0.5 * (ts.y[i] + ts.y[i + 1]) * (ts.t[i + 1] - ts.t[i]);
    const double span = t_end - ts.t[first];
    const double mean = span > 0.0 ? area / span : ts.y[first];

    std::vector<double> up;
    for (std::size_t i = first; i + 1 < ts.size(); ++i) {
        const double a = ts.y[i] - mean;
        const double b = ts.y[i + 1] - mean;
        if (a < 0.0 && b >= 0.0) up.push_back(ts.t[i] + (ts.t[i + 1] - ts.t[i]) * a / (a - b));
    }

    OscillationReport rep;
    rep.crossings = up.size();
    auto peak_since = [&](double from, double to) {
        double m = 0.0;
        const auto lo = std::lower_bound(ts.t.begin() + static_cast<std::ptrdiff_t>(first), ts.t.end(), from);
        for (auto i = static_cast<std::size_t>(lo - ts.t.begin()); i < ts.size() && ts.t[i] <= to; ++i) {
            m = std::max(m, std::abs(ts.y[i] - mean));
        }
        return m;
    };

    if (up.size() < 2) {
        rep.amplitude = peak_since(ts.t[first], t_end);
        rep.notes.push_back(fmt::format("{} mean crossing(s) after the transient", up.size()));
        return rep;
    }
    const std::size_t m = up.size();
    const std::size_t q = std::min<std::size_t>(m - 1, 10);
    rep.period = (up[m - 1] - up[m - 1 - q]) / static_cast<double>(q);

    double var = 0.0;
    for (std::size_t i = m - q; i < m; ++i) {
        const double d = (up[i] - up[i - 1]) - rep.period;
        var += d * d;
    }
    const double cv = std::sqrt(var / static_cast<double>(q)) / rep.period;
    rep.amplitude = peak_since(t_end - 5.0 * rep.period, t_end);

    const double window = std::max(0.25 * span, 2.0 * rep.period);
    const double env1 = peak_since(t_end - window, t_end - 0.5 * window);
    const double env2 = peak_since(t_end - 0.5 * window, t_end);
    const bool growing = env2 >= env1 * (1.0 - 2e-3);

    bool ok = true;
    if (m < 10) {
        rep.notes.push_back(fmt::format("only {} upward crossings (need 10)", m));
        ok = false;
    }
    if (cv > 0.02) {
        rep.notes.push_back(fmt::format("period spread {:.3g}% exceeds 2%", 100.0 * cv));
        ok = false;
    }
    if (rep.amplitude < 1e-4) {
        rep.notes.push_back(fmt::format("amplitude {:.3g} below 1e-4", rep.amplitude));
        ok = false;
    }
    if (!growing) {
        rep.notes.push_back(fmt::format("envelope shrinking ({:.6g} -> {:.6g})", env1, env2));
        ok = false;
    }
    rep.sustained = ok;
    return rep;
}

double onset_search(const LoopBuilder& builder, double k_lo, double k_hi, const SimConfig& cfg, int iterations) {
    if (!(k_lo < k_hi)) fail(Errc::invalid_bracket, fmt::format("onset bracket [{}, {}] is empty", k_lo, k_hi));
    auto sustained = [&](double k) {
        return detect_oscillation(simulate_lure(builder(k), cfg), cfg.transient_fraction).sustained;
    };
    if (sustained(k_lo)) fail(Errc::invalid_bracket, fmt::format("oscillation already present at k_lo = {}", k_lo));
    if (!sustained(k_hi)) fail(Errc::invalid_bracket, fmt::format("no oscillation at k_hi = {}", k_hi));
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (k_lo + k_hi);
        (sustained(mid) ? k_hi : k_lo) = mid;
    }
    return 0.5 * (k_lo + k_hi);
}

}  // namespace sqdf
