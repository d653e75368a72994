#include "sqdf/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "sqdf/csv.hpp"
#include "sqdf/error.hpp"

namespace sqdf {

namespace {

using cplx = std::complex<double>;

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

struct SegmentHit {
    double t = 0.0;
    double u = 0.0;
    bool overlap = false;
};

constexpr double hit_eps = 1e-12;

/// Intersection of p0 + t (p1 - p0) with q0 + u (q1 - q0), t, u in [0, 1].
std::optional<SegmentHit> segment_hit(cplx p0, cplx p1, cplx q0, cplx q1) {
    const cplx r = p1 - p0;
    const cplx s = q1 - q0;
    const cplx d = q0 - p0;
    const double nr = std::abs(r);
    const double ns = std::abs(s);
    const double den = cross(r, s);
    if (std::abs(den) > 1e-14 * nr * ns) {
        const double t = cross(d, s) / den;
        const double u = cross(d, r) / den;
        if (t < -hit_eps || t > 1.0 + hit_eps || u < -hit_eps || u > 1.0 + hit_eps) return std::nullopt;
        return SegmentHit{std::clamp(t, 0.0, 1.0), std::clamp(u, 0.0, 1.0), false};
    }
    // Parallel: only collinear pieces can meet.
    if (std::abs(cross(d, r)) > 1e-14 * nr * std::max(std::abs(d), nr)) return std::nullopt;
    const double t0 = dot(d, r) / (nr * nr);
    const double t1 = dot(q1 - p0, r) / (nr * nr);
    const double lo = std::max(0.0, std::min(t0, t1));
    const double hi = std::min(1.0, std::max(t0, t1));
    if (hi < lo - hit_eps) return std::nullopt;
    const double t = 0.5 * (lo + hi);
    const double u = std::clamp(dot(p0 + t * r - q0, s) / (ns * ns), 0.0, 1.0);
    return SegmentHit{t, u, hi - lo > hit_eps};
}

/// Closest pair of points between two segments, as (t, u, distance).
std::tuple<double, double, double> segment_closest(cplx p0, cplx p1, cplx q0, cplx q1) {
    if (const auto hit = segment_hit(p0, p1, q0, q1)) return {hit->t, hit->u, 0.0};
    auto project = [](cplx x, cplx a, cplx b) {
        const cplx r = b - a;
        const double len2 = std::norm(r);
        return len2 == 0.0 ? 0.0 : std::clamp(dot(x - a, r) / len2, 0.0, 1.0);
    };
    std::tuple<double, double, double> best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    auto consider = [&](double t, double u) {
        const double dist = std::abs((p0 + t * (p1 - p0)) - (q0 + u * (q1 - q0)));
        if (dist < std::get<2>(best)) best = {t, u, dist};
    };
    consider(0.0, project(p0, q0, q1));
    consider(1.0, project(p1, q0, q1));
    consider(project(q0, p0, p1), 0.0);
    consider(project(q1, p0, p1), 1.0);
    return best;
}

bool endpoint(double x) { return x <= hit_eps || x >= 1.0 - hit_eps; }

}  // namespace

std::vector<Crossing> intersect_loci(const Locus& a, const Locus& b) {
    std::vector<Crossing> out;
    std::vector<std::pair<double, double>> where;  // (t, u) of each hit, for deduplication
    if (a.size() < 2 || b.size() < 2) {
        fail(Errc::invalid_argument, fmt::format("loci need at least two points each, got {} and {}", a.size(), b.size()));
    }
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const cplx p0 = a.value(i);
        const cplx p1 = a.value(i + 1);
        if (p0 == p1) continue;
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            const cplx q0 = b.value(j);
            const cplx q1 = b.value(j + 1);
            if (q0 == q1) continue;
            if (std::max(p0.real(), p1.real()) < std::min(q0.real(), q1.real()) ||
                std::max(q0.real(), q1.real()) < std::min(p0.real(), p1.real()) ||
                std::max(p0.imag(), p1.imag()) < std::min(q0.imag(), q1.imag()) ||
                std::max(q0.imag(), q1.imag()) < std::min(p0.imag(), p1.imag())) {
                continue;
            }
            const auto hit = segment_hit(p0, p1, q0, q1);
            if (!hit) continue;
            Crossing c;
            c.segment_a = i;
            c.segment_b = j;
            c.overlap = hit->overlap;
            c.param_a = a.params()[i] + hit->t * (a.params()[i + 1] - a.params()[i]);
            c.param_b = b.params()[j] + hit->u * (b.params()[j + 1] - b.params()[j]);
            c.point = p0 + hit->t * (p1 - p0);

            // A hit on a shared vertex shows up once per adjacent segment.
            bool duplicate = false;
            if (endpoint(hit->t) || endpoint(hit->u)) {
                for (std::size_t k = 0; k < out.size(); ++k) {
                    const bool at_vertex = endpoint(where[k].first) || endpoint(where[k].second);
                    if (at_vertex && std::abs(out[k].point - c.point) <= 1e-9 * (1.0 + std::abs(c.point))) {
                        duplicate = true;
                        break;
                    }
                }
            }
            if (duplicate) continue;
            out.push_back(c);
            where.emplace_back(hit->t, hit->u);
        }
    }
    return out;
}

Crossing refine_crossing(const Crossing& crossing, const Locus& a, const Locus& b, const CurveEvaluator& eval_a,
                         const CurveEvaluator& eval_b, double gap) {
    if (crossing.overlap) return crossing;
    using Polyline = std::vector<std::pair<double, cplx>>;
    // The crossing segment plus one neighbour on each side, so the exact
    // crossing may drift across a vertex of the sampled locus.
    auto around = [](const Locus& l, std::size_t seg) {
        Polyline out;
        const std::size_t lo = seg == 0 ? 0 : seg - 1;
        const std::size_t hi = std::min(seg + 2, l.size() - 1);
        for (std::size_t k = lo; k <= hi; ++k) out.emplace_back(l.params()[k], l.value(k));
        return out;
    };
    // Splits segment `seg` at its exact midpoint, keeping the neighbours.
    auto narrow = [](const Polyline& line, std::size_t seg, const CurveEvaluator& eval) {
        Polyline out;
        if (seg > 0) out.push_back(line[seg - 1]);
        const double mid = 0.5 * (line[seg].first + line[seg + 1].first);
        out.push_back(line[seg]);
        out.emplace_back(mid, eval(mid));
        out.push_back(line[seg + 1]);
        if (seg + 2 < line.size()) out.push_back(line[seg + 2]);
        return out;
    };

    Polyline pa_line = around(a, crossing.segment_a);
    Polyline pb_line = around(b, crossing.segment_b);
    Crossing best = crossing;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        std::size_t sa = 0, sb = 0;
        double t = 0.0, u = 0.0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < pa_line.size(); ++i) {
            for (std::size_t j = 0; j + 1 < pb_line.size(); ++j) {
                const auto [ti, uj, d] =
                    segment_closest(pa_line[i].second, pa_line[i + 1].second, pb_line[j].second, pb_line[j + 1].second);
                if (d < dist) {
                    dist = d;
                    sa = i, sb = j, t = ti, u = uj;
                }
            }
        }
        const double pa = pa_line[sa].first + t * (pa_line[sa + 1].first - pa_line[sa].first);
        const double pb = pb_line[sb].first + u * (pb_line[sb + 1].first - pb_line[sb].first);
        const cplx ga = eval_a(pa);
        const cplx gb = eval_b(pb);
        const double d = std::abs(ga - gb);
        if (d < best_gap) {
            best_gap = d;
            best.param_a = pa;
            best.param_b = pb;
            best.point = 0.5 * (ga + gb);
        }
        if (d <= gap) break;
        const double wa = std::abs(pa_line[sa + 1].first - pa_line[sa].first);
        const double wb = std::abs(pb_line[sb + 1].first - pb_line[sb].first);
        if (wa <= 1e-15 * std::abs(pa) && wb <= 1e-15 * std::abs(pb)) break;
        pa_line = narrow(pa_line, sa, eval_a);
        pb_line = narrow(pb_line, sb, eval_b);
    }
    return best;
}

void write_csv(std::ostream& os, const std::vector<Prediction>& predictions) {
    os << "method,T,alpha_out,re,im,residual\n";
    for (const auto& p : predictions) {
        os << p.method << ',' << csv_number(p.period) << ',' << csv_number(p.amplitude) << ','
           << csv_number(p.point.real()) << ',' << csv_number(p.point.imag()) << ',' << csv_number(p.residual) << '\n';
    }
}

Locus neg_reciprocal_nonzero(const Locus& locus, std::vector<std::string>& warnings) {
    Locus out(locus.kind());
    std::size_t dropped = 0;
    double first = 0.0;
    for (std::size_t i = 0; i < locus.size(); ++i) {
        const auto& p = locus.points()[i];
        if (p.gain == 0.0) {
            if (dropped++ == 0) first = locus.params()[i];
            continue;
        }
        out.push_back(locus.params()[i], ComplexPoint::polar(1.0 / p.gain, std::numbers::pi - p.phase));
    }
    if (dropped > 0) {
        warnings.push_back(fmt::format("{} zero-gain point(s) excluded from -1/N (first at {} = {})", dropped,
                                       to_string(locus.kind()), first));
    }
    return out;
}

PredictionSet adf_predict(const TransferFunction& G, const Locus& adf, const StaticNonlinearity& phi,
                          const std::vector<double>& alphas, std::size_t n) {
    PredictionSet out;
    const Locus target = neg_reciprocal_nonzero(nyqa_static(phi, alphas), out.warnings);
    if (adf.size() < 2 || target.size() < 2) return out;

    const CurveEvaluator eval_g = [&](double T) { return adf_point(G, T, n).value(); };
    const CurveEvaluator eval_n = [&](double a) { return neg_reciprocal(amplitude_response_static(phi, a)); };
    for (const auto& raw : intersect_loci(adf, target)) {
        if (raw.overlap) {
            out.warnings.push_back(fmt::format("ADF locus overlaps -1/N near {}{:+}j", raw.point.real(), raw.point.imag()));
            continue;
        }
        const Crossing c = refine_crossing(raw, adf, target, eval_g, eval_n);
        const SquareFit fit = adf_fit(G, c.param_a, n);
        const ComplexPoint N = amplitude_response_static(phi, c.param_b);
        Prediction p;
        p.method = "adf";
        p.period = c.param_a;
        p.amplitude = c.param_b;
        p.amplitude_after = std::abs(phi(c.param_b));
        p.point = c.point;
        p.residual = std::abs(fit.point.value() * N.value() + 1.0);
        p.fit_residual = fit.residual;
        if (p.residual > 1e-3) {
            out.warnings.push_back(fmt::format("crossing at T={} alpha={} rejected: balance residual {}", p.period,
                                               p.amplitude, p.residual));
            continue;
        }
        out.predictions.push_back(p);
    }
    return out;
}

PredictionSet adf_predict(const TransferFunction& G, const StaticNonlinearity& phi, const std::vector<double>& periods,
                          const std::vector<double>& alphas, std::size_t n) {
    return adf_predict(G, adf_locus(G, periods, n), phi, alphas, n);
}

FixedPointResult adf_predict_T_dependent(const TransferFunction& G, const SquarePreservingOp& op,
                                         const std::vector<double>& periods, const std::vector<double>& alphas,
                                         const FixedPointOptions& options) {
    if (!(options.T_init > 0.0)) fail(Errc::invalid_argument, fmt::format("T_init must be positive, got {}", options.T_init));
    if (periods.size() < 2) fail(Errc::invalid_argument, "period grid needs at least two points");
    const double tol = options.tol > 0.0 ? options.tol : 1e-5 * options.T_init;
    const Locus adf = adf_locus(G, periods, options.n);
    const CurveEvaluator eval_g = [&](double T) { return adf_point(G, T, options.n).value(); };
    const double T_min = periods.front();
    const double T_max = periods.back();

    FixedPointResult result;
    // F(T): ADF period of the smallest-amplitude crossing with -1/nyq(N at T),
    // skipping crossings where N's gain does not depend on the amplitude.
    auto image = [&](double T) -> std::optional<Crossing> {
        std::vector<std::string> ignored;
        const Locus target = neg_reciprocal_nonzero(nyqa(op, T, alphas), ignored);
        if (target.size() < 2) return std::nullopt;
        const CurveEvaluator eval_n = [&](double a) { return neg_reciprocal(op(a, T)); };
        std::vector<Crossing> found = intersect_loci(adf, target);
        std::sort(found.begin(), found.end(), [](const Crossing& x, const Crossing& y) { return x.param_b < y.param_b; });
        std::optional<Crossing> pick;
        for (const auto& raw : found) {
            if (raw.overlap) continue;
            const Crossing c = refine_crossing(raw, adf, target, eval_g, eval_n);
            if (options.exclude_flat_gain) {
                const double g_lo = op(c.param_b * (1.0 - 1e-6), T).gain;
                const double g_hi = op(c.param_b * (1.0 + 1e-6), T).gain;
                if (std::abs(g_hi - g_lo) <= 1e-9 * std::max(g_lo, g_hi)) continue;
            }
            pick = c;
            break;
        }
        result.trace.push_back({T, pick ? pick->param_a : std::numeric_limits<double>::quiet_NaN()});
        return pick;
    };
    auto finish = [&](const Crossing& c) {
        const double T = c.param_a;
        const double a = c.param_b;
        const SquareFit fit = adf_fit(G, T, options.n);
        const ComplexPoint N = op(a, T);
        Prediction p;
        p.method = "adf";
        p.period = T;
        p.amplitude = a;
        p.amplitude_after = N.gain * std::abs(a);
        p.point = c.point;
        p.residual = std::abs(fit.point.value() * N.value() + 1.0);
        p.fit_residual = fit.residual;
        result.prediction = p;
        result.converged = true;
        return result;
    };

    struct Sample {
        double T;
        double r;
        Crossing c;
    };
    auto sample = [&](double T) -> std::optional<Sample> {
        auto c = image(T);
        if (!c) return std::nullopt;
        return Sample{T, c->param_a - T, *c};
    };

    // Illinois false position on r(T) = F(T) - T inside a sign-change bracket.
    // A bracket around a jump of F ends with |r| > tol and is discarded.
    auto solve = [&](Sample lo, Sample hi) -> std::optional<Crossing> {
        for (int it = 0; it < options.max_iter; ++it) {
            if (std::abs(lo.r) <= tol) return lo.c;
            if (std::abs(hi.r) <= tol) return hi.c;
            const double x = (lo.T * hi.r - hi.T * lo.r) / (hi.r - lo.r);
            const auto s = sample(x);
            if (!s) return std::nullopt;
            if ((s->r < 0.0) == (hi.r < 0.0)) {
                lo.r *= 0.5;
            } else {
                lo = hi;
            }
            hi = *s;
        }
        return std::nullopt;
    };

    const double T0 = std::clamp(options.T_init, T_min, T_max);
    const auto first = sample(T0);
    if (first && std::abs(first->r) <= tol) return finish(first->c);

    // Expand geometrically from T_init in both directions and solve the
    // nearest sign change first.
    std::optional<Sample> last_up = first;
    std::optional<Sample> last_down = first;
    bool up_open = true;
    bool down_open = true;
    for (int j = 1; (up_open || down_open) && j <= 200; ++j) {
        for (int dir : {+1, -1}) {
            bool& open = dir > 0 ? up_open : down_open;
            if (!open) continue;
            const double T = T0 * std::pow(1.1, dir * j);
            if (T > T_max || T < T_min) {
                open = false;
                continue;
            }
            auto& prev = dir > 0 ? last_up : last_down;
            const auto s = sample(T);
            if (s && std::abs(s->r) <= tol) return finish(s->c);
            if (s && prev && (s->r < 0.0) != (prev->r < 0.0)) {
                if (const auto c = solve(*prev, *s)) return finish(*c);
            }
            prev = s;
        }
    }
    result.reason = first || result.trace.size() > 1 ? "no fixed point T = F(T) found"
                                                     : fmt::format("no intersection at T = {}", T0);
    if (std::all_of(result.trace.begin(), result.trace.end(), [](const auto& t) { return std::isnan(t.image); })) {
        result.reason = "no intersection for any frozen period";
    }
    return result;
}

std::optional<UnityOscillation> unity_feedback_square_check(const SquarePreservingOp& op, double period,
                                                            const std::vector<double>& alphas) {
    if (!(period > 0.0)) fail(Errc::invalid_argument, fmt::format("period must be positive, got {}", period));
    auto mismatch = [&](double a) {
        const ComplexPoint p = op(a, period);
        return p.degenerate ? std::numeric_limits<double>::quiet_NaN() : wrap_phase(p.phase - std::numbers::pi);
    };
    auto accept = [&](double a) -> std::optional<UnityOscillation> {
        if (std::abs(op(a, period).gain - 1.0) > 1e-6) return std::nullopt;
        return UnityOscillation{a, SquareWave{a, 0.0, period}};
    };
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double d0 = mismatch(alphas[i]);
        if (d0 == 0.0) {
            if (auto hit = accept(alphas[i])) return hit;
            continue;
        }
        if (i + 1 == alphas.size()) break;
        const double d1 = mismatch(alphas[i + 1]);
        if (!std::isfinite(d0) || !std::isfinite(d1) || d1 == 0.0) continue;
        // Sign changes across the +-pi wrap are not crossings of phase pi.
        if ((d0 < 0.0) == (d1 < 0.0) || std::abs(d1 - d0) >= std::numbers::pi) continue;
        double lo = alphas[i], hi = alphas[i + 1], dlo = d0;
        for (int it = 0; it < 100 && hi - lo > 1e-15 * std::abs(hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double dm = mismatch(mid);
            if (dm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((dm < 0.0) == (dlo < 0.0)) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        if (auto hit = accept(0.5 * (lo + hi))) return hit;
    }
    return std::nullopt;
}

double bisect_onset(const std::function<bool(double)>& exists, double lo, double hi, int iterations) {
    if (!(lo < hi)) fail(Errc::invalid_bracket, fmt::format("onset bracket [{}, {}] is empty", lo, hi));
    if (exists(lo)) fail(Errc::invalid_bracket, fmt::format("oscillation already predicted at the lower end k = {}", lo));
    if (!exists(hi)) fail(Errc::invalid_bracket, fmt::format("no oscillation predicted at the upper end k = {}", hi));
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        (exists(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> negative_real_crossings(const Locus& locus) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < locus.size(); ++i) {
        const cplx p = locus.value(i);
        const cplx q = locus.value(i + 1);
        if (p.imag() == 0.0) {
            if (p.real() < 0.0) out.emplace_back(locus.params()[i], p.real());
            continue;
        }
        if ((p.imag() < 0.0) == (q.imag() < 0.0) || q.imag() == 0.0) continue;
        const double f = p.imag() / (p.imag() - q.imag());
        const double re = p.real() + f * (q.real() - p.real());
        if (re < 0.0) out.emplace_back(locus.params()[i] + f * (locus.params()[i + 1] - locus.params()[i]), re);
    }
    return out;
}

std::vector<std::pair<double, double>> adf_real_axis_crossings(const TransferFunction& G, const Locus& adf,
                                                               std::size_t n) {
    std::vector<std::pair<double, double>> out;
    for (const auto& [T_rough, re_rough] : negative_real_crossings(adf)) {
        const auto it = std::lower_bound(adf.params().begin(), adf.params().end(), T_rough);
        auto i = static_cast<std::size_t>(it - adf.params().begin());
        if (i < adf.size() && adf.params()[i] == T_rough) {
            out.emplace_back(T_rough, re_rough);
            continue;
        }
        double lo = adf.params()[i - 1];
        double hi = adf.params()[i];
        double im_lo = adf.value(i - 1).imag();
        cplx mid_value;
        for (int it2 = 0; it2 < 60; ++it2) {
            const double mid = 0.5 * (lo + hi);
            mid_value = adf_point(G, mid, n).value();
            if (mid_value.imag() == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((mid_value.imag() < 0.0) == (im_lo < 0.0)) {
                lo = mid;
                im_lo = mid_value.imag();
            } else {
                hi = mid;
            }
        }
        const double T = 0.5 * (lo + hi);
        out.emplace_back(T, adf_point(G, T, n).value().real());
    }
    return out;
}

}  // namespace sqdf
