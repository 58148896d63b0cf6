#include "spikeforge/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

using namespace spikeforge;
namespace fs = std::filesystem;

namespace {

struct ExpArgs {
    double p = 3.0;
    double q = 3.0;
    int n = 3;

    void add(CLI::App* app) {
        app->add_option("--p", p, "exponent p > 1")->capture_default_str();
        app->add_option("--q", q, "exponent q > 1")->capture_default_str();
        app->add_option("--n", n, "space dimension >= 3")->capture_default_str();
    }
    Exponents get() const { return validate_exponents(p, q, n); }
};

struct ProfileArgs {
    double r_max = 20.0;
    int cells = 4096;

    void add(CLI::App* app) {
        app->add_option("--r-max", r_max, "truncation radius of the radial profile")->capture_default_str();
        app->add_option("--cells", cells, "radial cells of the profile grid")->capture_default_str();
    }
    GroundStateOptions get() const {
        GroundStateOptions o;
        o.r_max = r_max;
        o.cells = cells;
        return o;
    }
};

struct ProblemArgs {
    std::string domain = "ball(1)";
    std::string a = "const(1)";
    std::string b = "const(1)";
    std::string c = "const(1)";

    void add(CLI::App* app) {
        app->add_option("--domain", domain, "annulus(inner,outer) or ball(R)")->capture_default_str();
        app->add_option("--a", a, "coefficient a: const(k), pow(s,e) or mul(F,G)")->capture_default_str();
        app->add_option("--b", b, "coefficient b")->capture_default_str();
        app->add_option("--c", c, "coefficient c")->capture_default_str();
    }
    Problem get(const Exponents& exp) const {
        return Problem{"custom",
                       parse_domain(domain, exp.n()),
                       Coefficients{CoefficientField::parse(a), CoefficientField::parse(b), CoefficientField::parse(c)},
                       exp,
                       "",
                       std::nullopt,
                       std::nullopt};
    }
};

struct GridArgs {
    int nr = 128;
    int ntheta = 128;
    double stretch_r = 0.75;
    double stretch_theta = 0.75;

    void add(CLI::App* app) {
        app->add_option("--nr", nr, "radial cells of the meridian grid")->capture_default_str();
        app->add_option("--ntheta", ntheta, "angular cells of the meridian grid")->capture_default_str();
        app->add_option("--stretch-r", stretch_r, "radial clustering in [0,1)")->capture_default_str();
        app->add_option("--stretch-theta", stretch_theta, "angular clustering in [0,1)")->capture_default_str();
    }
};

/// Text of every option of the chosen subcommand, sorted; the run is a
/// function of this text alone.
std::string canonical_config(const CLI::App* sub) {
    std::map<std::string, std::string> kv;
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_name(false, true);
        if (name.empty() || name == "--help" || name == "-h") continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        kv[name] = value;
    }
    std::string text = "[" + sub->get_name() + "]\n";
    for (const auto& [k, v] : kv) {
        if (k == "--out") continue;
        text += k + "=" + v + "\n";
    }
    return text;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ShootingFailure:
    case ErrorKind::NewtonDivergence:
    case ErrorKind::NonPositive:
    case ErrorKind::CollapsedToTrivial:
    case ErrorKind::IoError:
        return 3;
    default:
        return 2;
    }
}

int report_error(std::string_view kind, const std::string& message, int code) {
    Json j{{"error", kind}, {"message", message}, {"exit_code", code}, {"version", version()}};
    std::cerr << j.dump() << "\n";
    return code;
}

unsigned thread_cap(unsigned requested) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPIKEFORGE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

void print_pohozaev(const PohozaevReport& r) {
    std::printf("identity                      lhs                   rhs                   rel. residual\n");
    auto row = [](const char* name, const IdentityCheck& c) {
        std::printf("%-28s %-21.14g %-21.14g %.3e\n", name, c.lhs, c.rhs, c.relative_residual);
    };
    row("(i) normal ratio", r.normal_ratio);
    row("(ii) nonlinear balance", r.nonlinear_balance);
    row("(iii) weighted energy", r.weighted_energy);
    row("(iv) tangential ratio", r.tangential_ratio);
    row("(ii) with +trace [info]", r.nonlinear_balance_plus_trace);
}

SweepSettings sweep_settings(const GridArgs& g, const ProfileArgs& pa, const std::vector<double>& eps, bool fit,
                             unsigned threads) {
    SweepSettings s;
    s.eps = eps;
    s.radial_cells = g.nr;
    s.angular_cells = g.ntheta;
    s.stretch = GridStretch{g.stretch_r, g.stretch_theta};
    s.ground = pa.get();
    s.threads = threads;
    s.fit_expansion = fit;
    return s;
}

void write_sweep_outputs(const fs::path& out, const std::vector<ExperimentReport>& reports, const Stamp& stamp) {
    std::string jsonl;
    for (const auto& rep : reports) {
        for (const auto& run : rep.runs) {
            for (const auto& s : run.solutions) {
                Json rec = sweep_record(s, run.component.kind, stamp);
                rec["preset"] = rep.problem.id;
                jsonl += rec.dump() + "\n";
            }
        }
    }
    write_text(out / "sweep.jsonl", jsonl);
    if (reports.size() == 1) {
        write_json(out / "report.json", to_json(reports.front(), stamp));
    } else {
        Json arr = Json::array();
        for (const auto& rep : reports) arr.push_back(to_json(rep, stamp));
        write_json(out / "report.json", Json{{"version", stamp.version}, {"config_hash", stamp.config_hash},
                                             {"reports", arr}});
    }
    const auto& last = reports.back().winner().solutions.back();
    write_solution_csv(out / "solution.csv", last, stamp);
    write_json(out / "solution.json", solution_header(last, stamp));
    const std::string table = summary_table(reports, stamp);
    write_text(out / "summary.txt", table);
    std::cout << table;
}

std::vector<Problem> reproduce_preset(const std::string& id) {
    const auto e333 = validate_exponents(3, 3, 3);
    if (id == "hopf-s1") return {hopf_preset(3, e333, 1.0, 3.0)};
    if (id == "hopf-s3") return {hopf_preset(5, validate_exponents(2, 2, 5), 1.0, 3.0)};
    if (id == "annulus-regime-flip") {
        return {weighted_annulus_preset(0.5, 0.5, e333, 0.5, 4.5), weighted_annulus_preset(2.0, 2.0, e333, 0.5, 4.5)};
    }
    if (id == "weighted-degenerate") return {weighted_annulus_preset(1.0, 0.0, validate_exponents(2, 2, 3), 0.5, 4.5)};
    if (id == "ball-constant") return {constant_preset(DomainSpec::ball(1.0, 3), e333)};
    if (id == "annulus-constant") return {constant_preset(DomainSpec::annulus(1.0, 2.0, 3), e333)};
    throw Error(ErrorKind::ConfigError, "unknown preset '" + id +
                                            "' (hopf-s1, hopf-s3, annulus-regime-flip, weighted-degenerate, "
                                            "ball-constant, annulus-constant)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-spike toolkit for singularly perturbed Hamiltonian elliptic systems", "spikeforge"};
    app.set_version_flag("--version", std::string(version()));
    app.set_config("--config", "", "INI config; flags given on the command line win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir = "spikeforge-out";
    unsigned threads = 0;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (0: all cores, capped by SPIKEFORGE_THREADS)");

    // ground-state
    auto* gs = app.add_subcommand("ground-state", "radial ground state of the limit system + identity residuals");
    ExpArgs gs_exp;
    ProfileArgs gs_prof;
    double gs_threshold = 1e-3;
    gs_exp.add(gs);
    gs_prof.add(gs);
    gs->add_option("--threshold", gs_threshold, "largest accepted identity residual")->capture_default_str();

    auto* mo = app.add_subcommand("moments", "energy and half-space moments of the ground state");
    ExpArgs mo_exp;
    ProfileArgs mo_prof;
    mo_exp.add(mo);
    mo_prof.add(mo);

    auto* la = app.add_subcommand("lambda", "concentration functional on the boundary and along the radius");
    ExpArgs la_exp;
    ProblemArgs la_prob;
    int la_samples = 64;
    la_exp.add(la);
    la_prob.add(la);
    la->add_option("--samples", la_samples, "radial samples")->capture_default_str();

    auto* pr = app.add_subcommand("predict", "predicted concentration point and regime");
    ExpArgs pr_exp;
    ProfileArgs pr_prof;
    ProblemArgs pr_prob;
    double pr_tol = 1e-8;
    pr_exp.add(pr);
    pr_prof.add(pr);
    pr_prob.add(pr);
    pr->add_option("--constancy-tolerance", pr_tol, "relative variation of Lambda treated as constant")
        ->capture_default_str();

    auto* so = app.add_subcommand("solve", "one solve of the eps-system from a planted spike");
    ExpArgs so_exp;
    ProfileArgs so_prof;
    ProblemArgs so_prob;
    GridArgs so_grid;
    double so_eps = 0.2;
    std::string so_component = "auto";
    so_exp.add(so);
    so_prof.add(so);
    so_prob.add(so);
    so_grid.add(so);
    so->add_option("--eps", so_eps, "perturbation parameter")->capture_default_str();
    so->add_option("--component", so_component, "inner, outer or auto (predicted)")
        ->check(CLI::IsMember({"inner", "outer", "auto"}))
        ->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "continuation in eps on every boundary component + report");
    ExpArgs sw_exp;
    ProfileArgs sw_prof;
    ProblemArgs sw_prob;
    GridArgs sw_grid;
    std::vector<double> sw_eps{0.3, 0.21, 0.15, 0.10, 0.07};
    bool sw_fit = true;
    sw_exp.add(sw);
    sw_prof.add(sw);
    sw_prob.add(sw);
    sw_grid.add(sw);
    sw->add_option("--eps", sw_eps, "decreasing eps list")->delimiter(',')->capture_default_str();
    sw->add_flag("--fit,!--no-fit", sw_fit, "fit the two-term energy expansion")->capture_default_str();

    auto* re = app.add_subcommand("reproduce", "run a named preset end to end");
    std::string re_preset;
    GridArgs re_grid;
    ProfileArgs re_prof;
    std::vector<double> re_eps{0.3, 0.21, 0.15, 0.10, 0.07};
    re->add_option("preset", re_preset, "hopf-s1, hopf-s3, annulus-regime-flip, weighted-degenerate, "
                                        "ball-constant, annulus-constant")
        ->required();
    re_grid.add(re);
    re_prof.add(re);
    re->add_option("--eps", re_eps, "decreasing eps list")->delimiter(',')->capture_default_str();

    auto* vi = app.add_subcommand("verify-identities", "identity residuals on a grid and its refinement");
    ExpArgs vi_exp;
    ProfileArgs vi_prof;
    double vi_coarse = 1e-3;
    double vi_fine = 2.5e-4;
    vi_exp.add(vi);
    vi_prof.add(vi);
    vi->add_option("--threshold", vi_coarse, "largest residual on the base grid")->capture_default_str();
    vi->add_option("--refined-threshold", vi_fine, "largest residual after halving h")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(to_string(ErrorKind::ConfigError), e.what(), 2);
    }

    const CLI::App* sub = app.get_subcommands().front();
    const Stamp stamp{config_hash(canonical_config(sub))};
    const fs::path out(out_dir);
    const unsigned nthreads = thread_cap(threads);

    try {
        if (sub == gs || sub == vi) {
            const auto& ea = sub == gs ? gs_exp : vi_exp;
            const auto& pa = sub == gs ? gs_prof : vi_prof;
            const auto exp = ea.get();
            const auto prof = solve_limit_ground_state(exp, pa.get());
            const auto rep = verify_pohozaev(prof);
            Json pj = to_json(rep);
            pj["version"] = stamp.version;
            pj["config_hash"] = stamp.config_hash;
            pj["exponents"] = to_json(exp);
            pj["profile_residual"] = prof.residual_norm;
            print_pohozaev(rep);
            bool ok = true;
            if (sub == gs) {
                write_profile(out / "profile.csv", out / "profile.json", prof, stamp);
                pj["threshold"] = gs_threshold;
                ok = rep.max_residual() <= gs_threshold;
            } else {
                auto fine_opts = pa.get();
                fine_opts.cells *= 2;
                const auto fine = verify_pohozaev(solve_limit_ground_state(exp, fine_opts));
                std::printf("after halving h: max residual %.3e (threshold %.3e)\n", fine.max_residual(), vi_fine);
                pj["refined"] = to_json(fine);
                pj["threshold"] = vi_coarse;
                pj["refined_threshold"] = vi_fine;
                ok = rep.max_residual() <= vi_coarse && fine.max_residual() <= vi_fine;
            }
            pj["passed"] = ok;
            write_json(out / "pohozaev.json", pj);
            return ok ? 0 : 4;
        }

        if (sub == mo) {
            const auto exp = mo_exp.get();
            const auto prof = solve_limit_ground_state(exp, mo_prof.get());
            Json j = to_json(half_space_moments(prof));
            const auto d = decay_rate(prof);
            j["decay_rate_U"] = d.delta_U;
            j["decay_rate_V"] = d.delta_V;
            j["U0"] = prof.U.front();
            j["V0"] = prof.V.front();
            j["exponents"] = to_json(exp);
            j["version"] = stamp.version;
            j["config_hash"] = stamp.config_hash;
            write_json(out / "moments.json", j);
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (sub == la) {
            const auto exp = la_exp.get();
            const auto problem = la_prob.get(exp);
            if (la_samples < 2) throw Error(ErrorKind::PreconditionViolation, "need at least 2 radial samples");
            Json comps = Json::array();
            for (const auto& comp : problem.domain.boundary_components()) {
                comps.push_back(Json{{"component", to_string(comp.kind)},
                                     {"radius", comp.radius},
                                     {"lambda", lambda_at_radius(problem.coeffs, comp.radius, exp)}});
            }
            const double r0 = problem.domain.is_ball() ? 0.0 : problem.domain.min_radius();
            const double r1 = problem.domain.max_radius();
            Json radial = Json::array();
            for (int k = 0; k < la_samples; ++k) {
                double r = r0 + (r1 - r0) * k / (la_samples - 1);
                if (r == 0.0) r = 1e-3 * r1;
                radial.push_back(Json{{"r", r}, {"lambda", lambda_at_radius(problem.coeffs, r, exp)}});
            }
            Json j{{"version", stamp.version}, {"config_hash", stamp.config_hash}, {"exponents", to_json(exp)},
                   {"boundary", comps},        {"radial", radial}};
            write_json(out / "lambda.json", j);
            std::cout << comps.dump(2) << "\n";
            return 0;
        }

        if (sub == pr) {
            const auto exp = pr_exp.get();
            const auto problem = pr_prob.get(exp);
            const auto prof = solve_limit_ground_state(exp, pr_prof.get());
            const auto moments = half_space_moments(prof);
            PredictOptions po;
            po.constancy_tolerance = pr_tol;
            const auto pred = predict_concentration(problem.domain, problem.coeffs, exp, moments, po);
            Json j = to_json(pred);
            j["version"] = stamp.version;
            j["config_hash"] = stamp.config_hash;
            j["exponents"] = to_json(exp);
            j["domain"] = problem.domain.describe();
            write_json(out / "prediction.json", j);

            Series lam{"Lambda(r)", {}, {}};
            const double r0 = problem.domain.is_ball() ? 1e-3 * problem.domain.max_radius() : problem.domain.min_radius();
            const double r1 = problem.domain.max_radius();
            for (int k = 0; k <= 100; ++k) {
                const double r = r0 + (r1 - r0) * k / 100.0;
                lam.x.push_back(r);
                lam.y.push_back(lambda_at_radius(problem.coeffs, r, exp));
            }
            std::vector<Series> series{lam};
            if (pred.regime == Regime::CurvatureDriven) {
                Series score{"H*gamma+eta on the boundary", {}, {}};
                for (const auto& comp : problem.domain.boundary_components()) {
                    const auto c = candidate_at(problem.domain, problem.coeffs, exp, moments,
                                                boundary_point(exp.n(), comp.radius, 0.0));
                    score.x.push_back(comp.radius);
                    score.y.push_back(c.score);
                }
                series.push_back(score);
            }
            write_text(out / "lambda.svg",
                       line_plot_svg("Concentration functional on " + problem.domain.describe(), "|x|", "value",
                                     series, stamp));
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (sub == so) {
            const auto exp = so_exp.get();
            const auto problem = so_prob.get(exp);
            const auto prof = solve_limit_ground_state(exp, so_prof.get());
            const auto grid = build_grid(problem.domain, exp.n(), so_grid.nr, so_grid.ntheta,
                                         GridStretch{so_grid.stretch_r, so_grid.stretch_theta});
            double radius = 0.0;
            if (so_component == "auto") {
                const auto pred = predict_concentration(problem.domain, problem.coeffs, exp, half_space_moments(prof));
                radius = pred.predicted_points.front().radius;
            } else {
                const bool inner = so_component == "inner";
                if (inner && problem.domain.is_ball()) {
                    throw Error(ErrorKind::PreconditionViolation, "a ball has no inner boundary");
                }
                radius = inner ? problem.domain.min_radius() : problem.domain.max_radius();
            }
            const Point x0 = boundary_point(exp.n(), radius, 0.0);
            const auto sol = solve_system(grid, problem.coeffs, exp, so_eps,
                                          initial_guess_bump(prof, problem.coeffs, x0, so_eps, grid));
            write_solution_csv(out / "solution.csv", sol, stamp);
            const Json h = solution_header(sol, stamp);
            write_json(out / "solution.json", h);
            std::cout << h.dump(2) << "\n";
            return 0;
        }

        if (sub == sw) {
            const auto exp = sw_exp.get();
            auto problem = sw_prob.get(exp);
            const auto rep = run_experiment(problem, sweep_settings(sw_grid, sw_prof, sw_eps, sw_fit, nthreads));
            write_sweep_outputs(out, {rep}, stamp);
            return rep.passed() ? 0 : 4;
        }

        if (sub == re) {
            std::vector<ExperimentReport> reports;
            for (const auto& problem : reproduce_preset(re_preset)) {
                reports.push_back(run_experiment(problem, sweep_settings(re_grid, re_prof, re_eps, true, nthreads)));
            }
            bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
            if (re_preset == "annulus-regime-flip" && reports.size() == 2) {
                const bool differ = reports[0].observed != reports[1].observed;
                std::printf("regimes differ: %s\n", differ ? "yes" : "no");
                ok = ok && differ;
            }
            write_sweep_outputs(out, reports, stamp);
            return ok ? 0 : 4;
        }
    } catch (const Error& e) {
        return report_error(to_string(e.kind()), e.what(), exit_code_for(e.kind()));
    } catch (const std::exception& e) {
        return report_error("InternalError", e.what(), 3);
    }
    return 0;
}
