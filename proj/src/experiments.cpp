#include "spikeforge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>

namespace spikeforge {

std::string_view to_string(Site site) noexcept {
    switch (site) {
    case Site::InnerBoundary: return "InnerBoundary";
    case Site::OuterBoundary: return "OuterBoundary";
    case Site::Interior: return "Interior";
    case Site::Degenerate: return "Degenerate";
    }
    return "?";
}

Site site_of(ComponentKind kind) noexcept {
    return kind == ComponentKind::Inner ? Site::InnerBoundary : Site::OuterBoundary;
}

Problem hopf_preset(int n_reduced, const Exponents& exp, double pre_inner, double pre_outer) {
    int fibre = 0;
    switch (n_reduced) {
    case 3: fibre = 1; break;
    case 5: fibre = 3; break;
    case 9: fibre = 7; break;
    default:
        throw Error(ErrorKind::UnsupportedDimension,
                    "Hopf reductions exist only for n = 3, 5, 9 (got " + std::to_string(n_reduced) + ")");
    }
    if (exp.n() != n_reduced) throw Error(ErrorKind::PreconditionViolation, "exponents are not set for n_reduced");
    if (!(pre_inner > 0.0) || !(pre_outer > pre_inner)) {
        throw Error(ErrorKind::RangeViolation, "annulus radii must satisfy 0 < inner < outer");
    }
    const auto w = CoefficientField::power_of_radius(0.5, -1.0);
    return Problem{"hopf-s" + std::to_string(fibre),
                   DomainSpec::annulus(pre_inner * pre_inner / 2.0, pre_outer * pre_outer / 2.0, n_reduced),
                   Coefficients{w, w, w},
                   exp,
                   "S^" + std::to_string(fibre),
                   std::nullopt,
                   std::nullopt};
}

Problem weighted_annulus_preset(double alpha, double beta, const Exponents& exp, double inner, double outer) {
    if (exp.n() != 3) throw Error(ErrorKind::PreconditionViolation, "the weighted annulus is posed in n = 3");
    if (!(inner > 0.0) || !(outer > inner)) {
        throw Error(ErrorKind::RangeViolation, "annulus radii must satisfy 0 < inner < outer");
    }
    auto weight = [](double e) { return CoefficientField::power_of_radius(std::pow(2.0, e), e); };
    char id[96];
    std::snprintf(id, sizeof id, "weighted-annulus(alpha=%g,beta=%g)", alpha, beta);
    return Problem{id,
                   DomainSpec::annulus(inner, outer, 3),
                   Coefficients{weight(alpha / 2.0 - 1.0), weight(beta / 2.0 - 1.0), weight(-1.0)},
                   exp,
                   "S^1",
                   alpha,
                   beta};
}

Problem constant_preset(const DomainSpec& domain, const Exponents& exp) {
    if (domain.n() != exp.n()) throw Error(ErrorKind::PreconditionViolation, "domain and exponents disagree on n");
    const auto one = CoefficientField::constant(1.0);
    return Problem{"constant-" + domain.describe(), domain, Coefficients{one, one, one}, exp, "", std::nullopt,
                   std::nullopt};
}

double lambda_exponent(double alpha, double beta, const Exponents& exp) {
    const double p = exp.p();
    const double q = exp.q();
    return (exp.pq_minus_one() - alpha * (q + 1.0) - beta * (p + 1.0)) / exp.pq_minus_one();
}

Site regime_classify(double alpha, double beta, const Exponents& exp, double tolerance) {
    const double E = lambda_exponent(alpha, beta, exp);
    if (std::abs(E) <= tolerance) return Site::Degenerate;
    return E > 0.0 ? Site::InnerBoundary : Site::OuterBoundary;
}

DegenerateConstants degenerate_constants(double alpha, double beta, const Exponents& exp,
                                         const MomentTable& moments) {
    if (std::abs(lambda_exponent(alpha, beta, exp)) > 1e-12) {
        throw Error(ErrorKind::PreconditionViolation, "degenerate constants need E = 0");
    }
    // Λ ≡ 1 and 1/√c = √2 |x|^{1/2}; ∂_ν log (2|x|)^e = e (x·ν)/|x|².
    const double n = exp.n();
    DegenerateConstants k;
    k.C1 = 5.0 / (n + 1.0) * std::sqrt(2.0) * moments.grad_moment;
    k.C2 = std::sqrt(2.0) * ((alpha / 2.0 - 1.0) * moments.F_moment + (beta / 2.0 - 1.0) * moments.G_moment +
                             moments.UV_moment);
    return k;
}

ExpansionFit energy_expansion_fit(const std::vector<DiscreteSolution>& sweep, const Candidate& at, double leading) {
    std::vector<double> eps;
    for (const auto& s : sweep) {
        if (std::find(eps.begin(), eps.end(), s.eps) == eps.end()) eps.push_back(s.eps);
    }
    if (eps.size() < 4) {
        throw Error(ErrorKind::InsufficientData, "expansion fit needs at least 4 distinct eps values (got " +
                                                     std::to_string(eps.size()) + ")");
    }
    const int n = sweep.front().grid.n();
    const double m = static_cast<double>(sweep.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : sweep) {
        const double y = s.c_eps / std::pow(s.eps, n);
        sx += s.eps;
        sy += y;
        sxx += s.eps * s.eps;
        sxy += s.eps * y;
    }
    ExpansionFit fit;
    fit.points = sweep.size();
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss = 0;
    for (const auto& s : sweep) {
        const double d = s.c_eps / std::pow(s.eps, n) - (fit.intercept + fit.slope * s.eps);
        ss += d * d;
    }
    fit.fit_residual = std::sqrt(ss / m);
    fit.leading = leading;
    fit.intercept_error = std::abs(fit.intercept - leading) / std::abs(leading);

    const double curv = (n - 1) * at.H * at.gamma;
    fit.slope_expected_plus = -(curv + at.eta);
    fit.slope_expected_minus = -(-curv + at.eta);
    fit.slope_expected_variation = -(curv * 2.0 / 5.0 + at.eta);
    auto mismatch = [&](double expected) {
        return std::abs(std::abs(fit.slope) - std::abs(expected)) / std::abs(expected);
    };
    fit.slope_error_plus = mismatch(fit.slope_expected_plus);
    fit.slope_error_minus = mismatch(fit.slope_expected_minus);
    fit.slope_error_variation = mismatch(fit.slope_expected_variation);
    const bool plus = fit.slope_error_plus <= 0.25;
    const bool minus = fit.slope_error_minus <= 0.25;
    if (plus && (!minus || fit.slope_error_plus <= fit.slope_error_minus)) {
        fit.convention = "plus";
    } else if (minus) {
        fit.convention = "minus";
    } else {
        fit.convention = "none";
    }
    return fit;
}

Site observed_site(const DomainSpec& domain, const std::vector<DiscreteSolution>& sweep) {
    if (sweep.size() < 2) throw Error(ErrorKind::InsufficientData, "need two solutions to read the regime");
    std::optional<ComponentKind> kinds[2];
    for (int k = 0; k < 2; ++k) {
        const auto& s = sweep[sweep.size() - 1 - static_cast<std::size_t>(k)];
        if (const auto comp = domain.component_at(s.argmax_radius())) kinds[k] = comp->kind;
    }
    if (kinds[0] && kinds[1] && *kinds[0] == *kinds[1]) return site_of(*kinds[0]);
    return Site::Interior;
}

Localization localization_of(const DomainSpec& domain, const Coefficients& coeffs,
                             const std::vector<DiscreteSolution>& sweep) {
    if (sweep.empty()) throw Error(ErrorKind::InsufficientData, "empty sweep");
    Localization loc;
    for (const auto& s : sweep) {
        loc.C = std::max(loc.C, domain.distance_to_boundary(s.argmax_radius()) / s.eps);
        if (s.eps <= 0.15 + 1e-12) loc.max_separation = std::max(loc.max_separation, s.argmax_separation());
    }
    loc.on_boundary_at_two_smallest = sweep.size() >= 2 && observed_site(domain, sweep) != Site::Interior;
    const auto& last = sweep.back();
    const double c = coeffs.c.value_at_radius(last.argmax_radius());
    loc.mass_fraction = mass_fraction_within(last.grid, last.u, last.argmax_u, 10.0 * last.eps / std::sqrt(c));
    return loc;
}

bool ExperimentReport::passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed || !v.asserted; });
}

namespace {

ComponentRun sweep_component(const Problem& problem, const MeridianGrid& grid, const RadialProfile& prof,
                             const BoundaryComponent& comp, const SweepSettings& settings) {
    const int n = problem.exponents.n();
    ComponentRun run{comp, boundary_point(n, comp.radius, 0.0), {}, {}};
    try {
        run.solutions =
            continuation_sweep(grid, problem.coeffs, problem.exponents, settings.eps, prof, run.x0, settings.solve);
    } catch (const Error& e) {
        run.failure = std::string(to_string(e.kind())) + ": " + e.what();
    }
    return run;
}

std::string percent(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
    return buf;
}

}  // namespace

ExperimentReport run_experiment(const Problem& problem, const SweepSettings& settings) {
    const auto& exp = problem.exponents;
    if (settings.fit_expansion && settings.eps.size() < 4) {
        throw Error(ErrorKind::InsufficientData, "expansion fit needs at least 4 eps values (got " +
                                                     std::to_string(settings.eps.size()) + ")");
    }
    if (settings.eps.size() < 2) {
        throw Error(ErrorKind::InsufficientData, "a sweep needs at least 2 eps values to read the regime");
    }
    const auto prof = solve_limit_ground_state(exp, settings.ground);
    const auto grid = build_grid(problem.domain, exp.n(), settings.radial_cells, settings.angular_cells,
                                 settings.stretch);

    ExperimentReport rep{problem, settings, half_space_moments(prof), {}, {}, {}, {}, {}, 0, Site::Interior, {},
                         {}, {}};
    rep.prediction = predict_concentration(problem.domain, problem.coeffs, exp, rep.moments);
    if (problem.alpha && problem.beta) {
        rep.lambda_exponent = spikeforge::lambda_exponent(*problem.alpha, *problem.beta, exp);
        rep.classified = regime_classify(*problem.alpha, *problem.beta, exp);
        if (*rep.classified == Site::Degenerate) {
            rep.constants = degenerate_constants(*problem.alpha, *problem.beta, exp, rep.moments);
        }
    }

    // Components are independent; each sweep is itself sequential.
    const auto comps = problem.domain.boundary_components();
    if (settings.threads > 1 && comps.size() > 1) {
        std::vector<std::future<ComponentRun>> jobs;
        for (const auto& comp : comps) {
            jobs.push_back(std::async(std::launch::async, [&, comp] {
                return sweep_component(problem, grid, prof, comp, settings);
            }));
        }
        for (auto& j : jobs) rep.runs.push_back(j.get());
    } else {
        for (const auto& comp : comps) rep.runs.push_back(sweep_component(problem, grid, prof, comp, settings));
    }

    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < rep.runs.size(); ++k) {
        if (!rep.runs[k].ok()) continue;
        if (!best || rep.runs[k].solutions.back().c_eps < rep.runs[*best].solutions.back().c_eps) best = k;
    }
    if (!best) {
        throw Error(ErrorKind::NewtonDivergence, "no boundary component produced a converged sweep; first failure: " +
                                                     rep.runs.front().failure);
    }
    rep.chosen = *best;
    const auto& sweep = rep.winner().solutions;
    rep.observed = observed_site(problem.domain, sweep);
    rep.localization = localization_of(problem.domain, problem.coeffs, sweep);

    const auto& loc = rep.localization;
    rep.verdicts.push_back({"localization",
                            loc.on_boundary_at_two_smallest && loc.max_separation <= 2 && loc.mass_fraction >= 0.95,
                            true,
                            "C = " + std::to_string(loc.C) + ", argmax separation " +
                                std::to_string(loc.max_separation) + " cells, mass fraction " +
                                percent(loc.mass_fraction)});

    const auto predicted = rep.prediction.predicted_components();
    const auto alternate = rep.prediction.alternate_components();
    auto contains = [&](const std::vector<ComponentKind>& ks) {
        return std::any_of(ks.begin(), ks.end(), [&](ComponentKind k) { return site_of(k) == rep.observed; });
    };
    if (rep.prediction.regime == Regime::LambdaDriven) {
        rep.verdicts.push_back({"prediction", contains(predicted), true,
                                "argmin of Lambda vs observed " + std::string(to_string(rep.observed))});
    } else {
        const bool sup = contains(predicted);
        const bool inf = contains(alternate);
        rep.verdicts.push_back({"prediction", sup || inf, false,
                                std::string("curvature-driven: observed ") + std::string(to_string(rep.observed)) +
                                    (sup ? " maximizes" : inf ? " minimizes" : " extremizes neither of") +
                                    " H*gamma + eta"});
    }
    if (rep.classified) {
        const bool agree = *rep.classified == Site::Degenerate
                               ? rep.prediction.regime == Regime::CurvatureDriven &&
                                     rep.prediction.constancy_witness <= 1e-8
                               : *rep.classified == rep.observed;
        rep.verdicts.push_back({"classifier", agree, true,
                                "sign of E gives " + std::string(to_string(*rep.classified)) + ", observed " +
                                    std::string(to_string(rep.observed))});
    }

    if (settings.fit_expansion) {
        const auto& x0 = rep.winner().x0;
        const auto at = candidate_at(problem.domain, problem.coeffs, exp, rep.moments, x0);
        const double leading = lambda_value(problem.coeffs, x0, exp) * rep.moments.I_infinity;
        rep.fit = energy_expansion_fit(sweep, at, leading);
        rep.verdicts.push_back({"expansion-intercept", rep.fit->intercept_error <= 0.05, true,
                                "intercept error " + percent(rep.fit->intercept_error)});
        rep.verdicts.push_back({"expansion-slope", rep.fit->convention != "none", false,
                                "convention " + rep.fit->convention + "; mismatch plus " +
                                    percent(rep.fit->slope_error_plus) + ", minus " +
                                    percent(rep.fit->slope_error_minus) + ", 2/(n+1) weight " +
                                    percent(rep.fit->slope_error_variation)});
    }
    return rep;
}

}  // namespace spikeforge
