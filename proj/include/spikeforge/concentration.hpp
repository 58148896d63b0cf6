#pragma once

#include "spikeforge/core.hpp"
#include "spikeforge/ground_state.hpp"

#include <vector>

namespace spikeforge {

/// The weights a, b, c of -ε²Δu + c u = b v^q, -ε²Δv + c v = a u^p.
struct Coefficients {
    CoefficientField a;
    CoefficientField b;
    CoefficientField c;
};

/// Scaling exponents of the map between the frozen-coefficient and unit
/// limit problems.
struct ConcentrationExponents {
    double alpha1;
    double alpha2;
    double beta1;
    double beta2;
};

ConcentrationExponents concentration_exponents(const Exponents& exp);

/// Λ(x) = (b/c)^{-(α1+α2)} (a/c)^{-(β1+β2)} c^{1-n/2}.
double lambda_value(const Coefficients& coeffs, const Point& x, const Exponents& exp);
double lambda_at_radius(const Coefficients& coeffs, double r, const Exponents& exp);
/// Λ for frozen values (a0, b0, c0).
double lambda_frozen(double a0, double b0, double c0, const Exponents& exp);

/// u(x) = A U(√c0 |x|), v(x) = B V(√c0 |x|): the ground state of the limit
/// system with frozen coefficients (a0, b0, c0).
struct AnisotropicProfile {
    const RadialProfile* unit = nullptr;
    double a0 = 1.0;
    double b0 = 1.0;
    double c0 = 1.0;
    double amplitude_u = 1.0;
    double amplitude_v = 1.0;
    /// √c0; the profile lives on radii r_i / √c0.
    double frequency = 1.0;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> du;
    std::vector<double> dv;

    /// Values and radial derivatives at distance s from the centre.
    RadialProfile::Sample at(double s) const;
};

/// The returned profile references `prof`, which must outlive it.
AnisotropicProfile rescale_profile(const RadialProfile& prof, double a0, double b0, double c0);

/// Half-space energy of the frozen problem with trapezoid weights on the
/// profile's own grid.
double frozen_energy(const AnisotropicProfile& prof);

/// The same energy by composite Simpson on an independent uniform grid with
/// `intervals` intervals, sampling through Hermite interpolation.
double frozen_energy_resampled(const AnisotropicProfile& prof, int intervals);

double frozen_residual_norm(const AnisotropicProfile& prof);

struct BoundaryTerms {
    double lambda = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    /// ∂_ν log a, ∂_ν log b, ∂_ν log c along the inward normal.
    double dlog_a = 0.0;
    double dlog_b = 0.0;
    double dlog_c = 0.0;
};

/// γ = 5/(n+1) Λ/√c ∫⟨∇U,∇V⟩z_n and
/// η = Λ/√c [∂a/a ∫F(U)z_n + ∂b/b ∫G(V)z_n − ∂c/c ∫UV z_n],
/// both from the moments of the unit profile.
BoundaryTerms gamma_eta(const MomentTable& moments, const Coefficients& coeffs, const Point& x0,
                        const Point& inner_normal, const Exponents& exp);

/// Mean curvature w.r.t. the inward normal, normalised so a ball of radius R
/// has H = 1/R; the inner sphere of an annulus has H = -1/inner.
double mean_curvature(const DomainSpec& domain, const Point& x);

enum class Regime { LambdaDriven, CurvatureDriven };

std::string_view to_string(Regime regime) noexcept;

struct Candidate {
    ComponentKind component;
    double radius = 0.0;
    Point point;
    double H = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    /// H γ + η
    double score = 0.0;
    /// (n-1) H γ + η, the first-order energy coefficient.
    double expansion_term = 0.0;
};

/// H, γ, η and the derived scores at one boundary point.
Candidate candidate_at(const DomainSpec& domain, const Coefficients& coeffs, const Exponents& exp,
                       const MomentTable& moments, const Point& x);

struct ComponentLambda {
    ComponentKind component;
    double radius = 0.0;
    std::vector<double> samples;
    double min = 0.0;
    double max = 0.0;
};

struct BoundaryPrediction {
    Regime regime = Regime::LambdaDriven;
    std::vector<ComponentLambda> lambda_values;
    /// LambdaDriven: argmin Λ. CurvatureDriven: argmax of H γ + η.
    std::vector<Candidate> predicted_points;
    /// CurvatureDriven only: argmin of H γ + η.
    std::vector<Candidate> alternate_points;
    double constancy_witness = 0.0;

    /// Components holding the predicted (or alternate) points, deduplicated.
    std::vector<ComponentKind> predicted_components() const;
    std::vector<ComponentKind> alternate_components() const;
};

struct PredictOptions {
    double constancy_tolerance = 1e-8;
    int samples_per_component = 256;
};

BoundaryPrediction predict_concentration(const DomainSpec& domain, const Coefficients& coeffs, const Exponents& exp,
                                         const MomentTable& moments, const PredictOptions& opts = {});

/// Point on the component at polar angle φ in the (x_1, x_n) plane;
/// φ = 0 is the pole (0, ..., 0, R).
Point boundary_point(int n, double radius, double phi);

}  // namespace spikeforge
