#pragma once

#include "spikeforge/concentration.hpp"
#include "spikeforge/core.hpp"
#include "spikeforge/fd_solver.hpp"
#include "spikeforge/ground_state.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spikeforge {

enum class Site { InnerBoundary, OuterBoundary, Interior, Degenerate };

std::string_view to_string(Site site) noexcept;
Site site_of(ComponentKind kind) noexcept;

struct Problem {
    std::string id;
    DomainSpec domain;
    Coefficients coeffs;
    Exponents exponents;
    /// Orbit of the pre-reduction problem that a boundary point stands for.
    std::string orbit;
    std::optional<double> alpha;
    std::optional<double> beta;
};

/// a = b = c = 1/(2|x|) on the reduced annulus (a_pre²/2, b_pre²/2).
/// Only n_reduced in {3, 5, 9} arise from Hopf fibrations.
Problem hopf_preset(int n_reduced, const Exponents& exp, double pre_inner, double pre_outer);

/// a = (2|x|)^{α/2-1}, b = (2|x|)^{β/2-1}, c = (2|x|)^{-1} on Annulus(inner, outer), n = 3.
/// Then Λ = (2|x|)^{E/2}; see lambda_exponent.
Problem weighted_annulus_preset(double alpha, double beta, const Exponents& exp, double inner, double outer);

Problem constant_preset(const DomainSpec& domain, const Exponents& exp);

/// E = (pq - 1 - α(q+1) - β(p+1)) / (pq - 1).
double lambda_exponent(double alpha, double beta, const Exponents& exp);

/// Sign of E: positive means Λ is smallest on the inner sphere.
Site regime_classify(double alpha, double beta, const Exponents& exp, double tolerance = 1e-12);

/// Constants of C1 H |x|^{1/2} + C2 (x·ν) |x|^{-3/2}, the curvature-driven
/// score H γ + η of a weighted annulus with E = 0.
struct DegenerateConstants {
    double C1 = 0.0;
    double C2 = 0.0;
};

DegenerateConstants degenerate_constants(double alpha, double beta, const Exponents& exp, const MomentTable& moments);

struct ExpansionFit {
    double intercept = 0.0;
    double slope = 0.0;
    /// RMS deviation of c_ε/ε^n from the fitted line.
    double fit_residual = 0.0;
    std::size_t points = 0;
    double leading = 0.0;          // Λ(x0) I∞
    double intercept_error = 0.0;  // |intercept - leading| / leading
    /// -[(n-1) H γ + η] and -[-(n-1) H γ + η].
    double slope_expected_plus = 0.0;
    double slope_expected_minus = 0.0;
    double slope_error_plus = 0.0;   // relative magnitude mismatch
    double slope_error_minus = 0.0;
    /// Same with γ built from the weight 2/(n+1) in place of 5/(n+1).
    double slope_expected_variation = 0.0;
    double slope_error_variation = 0.0;
    /// "plus", "minus" or "none": which curvature sign matches within 25%.
    std::string convention;
};

/// Least-squares line through (ε, c_ε/ε^n). Needs at least 4 distinct ε.
ExpansionFit energy_expansion_fit(const std::vector<DiscreteSolution>& sweep, const Candidate& at, double leading);

struct SweepSettings {
    std::vector<double> eps{0.3, 0.21, 0.15, 0.10, 0.07};
    int radial_cells = 128;
    int angular_cells = 128;
    GridStretch stretch{0.75, 0.75};
    GroundStateOptions ground;
    SolveOptions solve;
    unsigned threads = 1;
    bool fit_expansion = true;
};

/// One continuation sweep planted on the pole of a boundary component.
struct ComponentRun {
    BoundaryComponent component;
    Point x0;
    std::vector<DiscreteSolution> solutions;
    std::string failure;

    bool ok() const noexcept { return failure.empty(); }
};

struct Localization {
    /// max over the sweep of dist(argmax, ∂Ω) / ε.
    double C = 0.0;
    bool on_boundary_at_two_smallest = false;
    /// Largest argmax separation in cells among ε <= 0.15.
    int max_separation = 0;
    /// L² mass fraction within 10ε/√c of the maximum at the smallest ε.
    double mass_fraction = 0.0;
};

struct Verdict {
    std::string claim;
    bool passed = false;
    /// Report-only verdicts never fail a run.
    bool asserted = true;
    std::string detail;
};

struct ExperimentReport {
    Problem problem;
    SweepSettings settings;
    MomentTable moments;
    BoundaryPrediction prediction;
    std::optional<double> lambda_exponent;
    std::optional<Site> classified;
    std::optional<DegenerateConstants> constants;
    std::vector<ComponentRun> runs;
    std::size_t chosen = 0;
    Site observed = Site::Interior;
    Localization localization;
    std::optional<ExpansionFit> fit;
    std::vector<Verdict> verdicts;

    const ComponentRun& winner() const { return runs.at(chosen); }
    bool passed() const;
};

Site observed_site(const DomainSpec& domain, const std::vector<DiscreteSolution>& sweep);
Localization localization_of(const DomainSpec& domain, const Coefficients& coeffs,
                             const std::vector<DiscreteSolution>& sweep);

/// Sweeps every boundary component and keeps the run with the lowest
/// energy at the smallest ε.
ExperimentReport run_experiment(const Problem& problem, const SweepSettings& settings);

}  // namespace spikeforge
