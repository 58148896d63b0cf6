#pragma once

#include "spikeforge/core.hpp"

#include <vector>

namespace spikeforge {

struct GroundStateOptions {
    double r_max = 20.0;
    int cells = 4096;
    /// Newton stops once the max-norm residual drops below this.
    double newton_tolerance = 1e-10;
    int max_newton_iterations = 60;
    int max_backtracks = 30;
    /// Exponent increment along the continuation path off the diagonal.
    double continuation_step = 0.25;
};

/// Radial ground state (U, V) of -ΔU + U = V^q, -ΔV + V = U^p sampled on the
/// uniform grid r_i = i h, i = 0..M, with U_M = V_M = 0.
struct RadialProfile {
    Exponents exponents;
    double r_max = 0.0;
    double h = 0.0;
    std::vector<double> r;
    std::vector<double> U;
    std::vector<double> V;
    std::vector<double> dU;
    std::vector<double> dV;
    /// Max-norm of the discrete residual (finite-difference profiles) or the
    /// final bracket width on w(0) (shooting profiles).
    double residual_norm = 0.0;

    std::size_t size() const noexcept { return r.size(); }
    int cells() const noexcept { return static_cast<int>(r.size()) - 1; }

    struct Sample {
        double U, V, dU, dV;
    };
    /// Cubic Hermite interpolation at radius s >= 0; zero beyond r_max.
    Sample at(double s) const;
};

/// Every integral of the unit profile needed downstream. Moments weighted by
/// z_n are over the half-space z_n > 0; `trace` is ½∫_{z_n=0} U V dσ.
struct MomentTable {
    double I_infinity = 0.0;
    double grad_moment = 0.0;
    double normal_moment = 0.0;
    double tangential_moment = 0.0;
    double F_moment = 0.0;
    double G_moment = 0.0;
    double UV_moment = 0.0;
    double trace = 0.0;
    /// ∫ [½ f(U)U - F(U) + ½ g(V)V - G(V)] z_n, used by the Pohozaev report.
    double nonlinear_excess_moment = 0.0;
};

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double relative_residual = 0.0;
};

struct PohozaevReport {
    IdentityCheck normal_ratio;       // (i)
    IdentityCheck nonlinear_balance;  // (ii), trace entering with a minus sign
    IdentityCheck weighted_energy;    // (iii)
    IdentityCheck tangential_ratio;   // (iv)
    /// (ii) with the boundary trace added instead of subtracted.
    IdentityCheck nonlinear_balance_plus_trace;

    double max_residual() const;
};

struct DecayRates {
    double delta_U = 0.0;
    double delta_V = 0.0;
};

/// Bisection shooting for -Δw + w = w^p on R^n; U = V = w in the result.
RadialProfile solve_scalar_ground_state(double p, int n, const GroundStateOptions& opts = {});

/// Damped Newton on the coupled radial finite-difference system, continued
/// off the p = q diagonal from the scalar shooting solution.
RadialProfile solve_limit_ground_state(const Exponents& exp, const GroundStateOptions& opts = {});

/// Same, additionally returning the 2-norm residual after each accepted
/// Newton step of the final continuation stage.
RadialProfile solve_limit_ground_state(const Exponents& exp, const GroundStateOptions& opts,
                                       std::vector<double>* newton_history);

/// Max-norm of the discrete radial residual of (U, V) on the profile grid.
double limit_residual_norm(const RadialProfile& prof);

/// Max-norm residual of -Δu + c0 u = b0 v^q, -Δv + c0 v = a0 u^p on a
/// uniform radial grid r (r[0] = 0) with the same stencil as the solver.
double frozen_residual_norm(const std::vector<double>& r, const std::vector<double>& u,
                            const std::vector<double>& v, const Exponents& exp, double a0, double b0, double c0);

double energy_I_infinity(const RadialProfile& prof);

MomentTable half_space_moments(const RadialProfile& prof);

PohozaevReport verify_pohozaev(const RadialProfile& prof);

/// Negated least-squares slopes of log U, log V on [0.5, 0.75] r_max.
DecayRates decay_rate(const RadialProfile& prof);

/// ∫ ω_n^k dσ over the upper unit hemisphere of S^{n-1}.
double hemisphere_direction_moment(int n, int k);

}  // namespace spikeforge
