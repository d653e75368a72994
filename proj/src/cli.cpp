#include "sqdf/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqdf/classical.hpp"
#include "sqdf/config.hpp"
#include "sqdf/csv.hpp"
#include "sqdf/error.hpp"
#include "sqdf/parallel.hpp"
#include "sqdf/predict.hpp"
#include "sqdf/simulate.hpp"

namespace sqdf {

namespace {

namespace fs = std::filesystem;

/// Fits worse than this are flagged; a pure sinusoid fits with 1 - 8/pi^2.
constexpr double fit_warning = 0.25;

struct Context {
    SystemSpec spec;
    fs::path out_dir;
    std::ostream& out;
    std::ostream& err;
};

std::ofstream open_output(const Context& ctx, const std::string& name) {
    fs::create_directories(ctx.out_dir);
    const auto path = ctx.out_dir / name;
    std::ofstream f(path);
    if (!f) fail(Errc::numerical_failure, fmt::format("cannot write {}", path.string()));
    return f;
}

const TransferFunction& need_tf(const SystemSpec& spec) {
    if (!spec.tf) fail(Errc::config_error, "tf: missing");
    return *spec.tf;
}

const NonlinearitySpec& need_nonlinearity(const SystemSpec& spec) {
    if (!spec.nonlinearity) fail(Errc::config_error, "nonlinearity: missing");
    return *spec.nonlinearity;
}

FixedPointOptions fixed_point_options(const SystemSpec& spec) {
    FixedPointOptions o;
    o.T_init = spec.T_init;
    o.tol = spec.tol;
    o.max_iter = spec.max_iter;
    o.n = spec.n;
    return o;
}

int cmd_adf(const Context& ctx) {
    const auto& G = need_tf(ctx.spec);
    const Locus locus = adf_locus(G, ctx.spec.T_grid, ctx.spec.n);
    auto f = open_output(ctx, "adf_locus.csv");
    write_csv(f, locus);
    fmt::print(ctx.out, "points={}\n", locus.size());
    for (const auto& [T, re] : adf_real_axis_crossings(G, locus, ctx.spec.n)) {
        fmt::print(ctx.out, "real_axis_crossing T={} value={}\n", T, re);
    }
    return 0;
}

int cmd_nyqa(const Context& ctx) {
    const auto& nl = need_nonlinearity(ctx.spec);
    const Locus locus = nl.has_memory() ? nyqa(make_operator(nl), ctx.spec.T_init, ctx.spec.alpha_grid)
                                        : nyqa_static(make_static(nl), ctx.spec.alpha_grid);
    std::vector<std::string> warnings;
    const Locus inverse = neg_reciprocal_nonzero(locus, warnings);
    {
        auto f = open_output(ctx, "nyqa.csv");
        write_csv(f, locus);
    }
    auto f = open_output(ctx, "nyqa_neg_reciprocal.csv");
    write_csv(f, inverse);
    if (nl.has_memory()) fmt::print(ctx.out, "period={}\n", ctx.spec.T_init);
    fmt::print(ctx.out, "points={}\n", locus.size());
    for (const auto& w : warnings) fmt::print(ctx.out, "warning: {}\n", w);
    return 0;
}

int cmd_predict(const Context& ctx) {
    const auto& G = need_tf(ctx.spec);
    const auto& nl = need_nonlinearity(ctx.spec);
    std::vector<Prediction> rows;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
    std::optional<Locus> adf;

    if (nl.has_memory()) {
        const auto result = adf_predict_T_dependent(G, make_operator(nl), ctx.spec.T_grid, ctx.spec.alpha_grid,
                                                    fixed_point_options(ctx.spec));
        if (result.prediction) rows.push_back(*result.prediction);
        if (!result.converged) notes.push_back(result.reason);
        notes.push_back(fmt::format("fixed-point iterations: {}", result.trace.size()));
        notes.push_back("classical describing function not applicable to an operator with memory");
    } else {
        const auto phi = make_static(nl);
        auto df = classical_predict(G, phi, ctx.spec.omega_grid, ctx.spec.alpha_grid);
        adf = adf_locus(G, ctx.spec.T_grid, ctx.spec.n);
        auto sq = adf_predict(G, *adf, phi, ctx.spec.alpha_grid, ctx.spec.n);
        for (auto* set : {&df, &sq}) {
            rows.insert(rows.end(), set->predictions.begin(), set->predictions.end());
            warnings.insert(warnings.end(), set->warnings.begin(), set->warnings.end());
        }
    }

    auto f = open_output(ctx, "predictions.csv");
    write_csv(f, rows);
    for (const auto& p : rows) {
        fmt::print(ctx.out, "{} T={} alpha_out={} alpha_in={} alpha_after={} re={} im={} residual={}\n", p.method,
                   p.period, p.amplitude, p.amplitude, p.amplitude_after, p.point.real(), p.point.imag(), p.residual);
        if (p.method == "adf" && p.fit_residual > fit_warning) {
            warnings.push_back(fmt::format("ADF square fit at T={} leaves relative residual {}", p.period, p.fit_residual));
        }
    }
    if (rows.empty()) {
        fmt::print(ctx.out, "no intersection\n");
        if (adf) {
            for (const auto& [T, re] : adf_real_axis_crossings(G, *adf, ctx.spec.n)) {
                fmt::print(ctx.out, "hint: ADF locus meets the negative real axis at {} (T={}); a static gain of at least {} is needed\n",
                           re, T, -1.0 / re);
            }
        }
    }
    for (const auto& n : notes) fmt::print(ctx.out, "note: {}\n", n);
    for (const auto& w : warnings) fmt::print(ctx.out, "warning: {}\n", w);
    return 0;
}

OscillationReport simulate_spec(const SystemSpec& spec, TimeSeries* keep = nullptr) {
    const auto& G = need_tf(spec);
    const auto& nl = need_nonlinearity(spec);
    TimeSeries ts = simulate_lure(tf_to_ss(G), make_feedback(nl, spec.memory_window), spec.sim);
    auto report = detect_oscillation(ts, spec.sim.transient_fraction);
    if (keep) *keep = std::move(ts);
    return report;
}

int cmd_simulate(const Context& ctx) {
    TimeSeries ts;
    const auto report = simulate_spec(ctx.spec, &ts);
    {
        auto f = open_output(ctx, "timeseries.csv");
        write_csv(f, ts, ctx.spec.output_stride);
    }
    auto f = open_output(ctx, "oscillation.csv");
    f << "sustained,period,amplitude,crossings\n"
      << (report.sustained ? "true" : "false") << ',' << csv_number(report.period) << ','
      << csv_number(report.amplitude) << ',' << report.crossings << '\n';
    fmt::print(ctx.out, "sustained={}\nperiod={}\namplitude={}\ncrossings={}\n", report.sustained, report.period,
               report.amplitude, report.crossings);
    for (const auto& n : report.notes) fmt::print(ctx.out, "note={}\n", n);
    return 0;
}

int cmd_compare(const Context& ctx) {
    const auto& spec = ctx.spec;
    const auto& G = need_tf(spec);
    const auto& nl = need_nonlinearity(spec);
    std::optional<Locus> shared_adf;
    if (!spec.k_sweep.empty() && spec.k_target == KTarget::nonlinearity && !nl.has_memory()) {
        shared_adf = adf_locus(G, spec.T_grid, spec.n);
    }

    const auto rows = detail::parallel_map(spec.k_sweep.size(), [&](std::size_t i) {
        const double k = spec.k_sweep[i];
        const SystemSpec s = with_gain(spec, k);
        const auto& Gk = *s.tf;
        const auto& nk = *s.nonlinearity;
        std::string t_sim, t_df, t_adf;
        const auto report = simulate_spec(s);
        if (report.sustained) t_sim = csv_number(report.period);
        if (nk.has_memory()) {
            const auto fp = adf_predict_T_dependent(Gk, make_operator(nk), s.T_grid, s.alpha_grid, fixed_point_options(s));
            if (fp.prediction) t_adf = csv_number(fp.prediction->period);
        } else {
            const auto phi = make_static(nk);
            const auto df = classical_predict(Gk, phi, s.omega_grid, s.alpha_grid);
            if (!df.predictions.empty()) t_df = csv_number(df.predictions.front().period);
            const auto sq = shared_adf ? adf_predict(Gk, *shared_adf, phi, s.alpha_grid, s.n)
                                       : adf_predict(Gk, phi, s.T_grid, s.alpha_grid, s.n);
            if (!sq.predictions.empty()) t_adf = csv_number(sq.predictions.front().period);
        }
        return fmt::format("{},{},{},{}\n", csv_number(k), t_sim, t_df, t_adf);
    });

    auto f = open_output(ctx, "compare.csv");
    f << "k,T_sim,T_df,T_adf\n";
    for (const auto& r : rows) {
        f << r;
        ctx.out << r;
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Square-wave describing-function analysis"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = ".";
    bool extended = false;

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Context&);
    };
    const Command commands[] = {
        {"adf", "ADF locus of the transfer function", cmd_adf},
        {"nyqa", "amplitude Nyquist locus of the nonlinearity", cmd_nyqa},
        {"predict", "classical and square-wave limit-cycle predictions", cmd_predict},
        {"simulate", "closed-loop simulation and oscillation report", cmd_simulate},
        {"compare", "simulated and predicted periods over a gain sweep", cmd_compare},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--extended", extended, "use the 1e-4 s integration step");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Context ctx{load_config(config_path), fs::path(out_dir), out, err};
        if (extended) {
            ctx.spec.sim.solver = Solver::rk4;
            ctx.spec.sim.step = 1e-4;
        }
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (subs[i]->parsed()) return commands[i].run(ctx);
        }
        return 2;
    } catch (const Error& e) {
        fmt::print(err, "error [{}]: {}\n", to_string(e.code()), e.what());
        return e.code() == Errc::config_error ? 2 : 3;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 3;
    }
}

}  // namespace sqdf
