#include "spikeforge/ground_state.hpp"

#include "newton.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace spikeforge {

namespace {

double signed_power(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

std::vector<double> uniform_grid(double r_max, int cells) {
    std::vector<double> r(static_cast<std::size_t>(cells) + 1);
    const double h = r_max / cells;
    for (int i = 0; i <= cells; ++i) r[static_cast<std::size_t>(i)] = h * i;
    r.back() = r_max;
    return r;
}

void check_grid_options(const GroundStateOptions& opts) {
    if (!(opts.r_max > 0.0) || opts.cells < 16) {
        throw Error(ErrorKind::PreconditionViolation, "ground state grid needs r_max > 0 and at least 16 cells");
    }
}

/// Composite trapezoid on the uniform profile grid.
double trapz(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

void centered_derivative(const std::vector<double>& f, double h, std::vector<double>& df) {
    const std::size_t m = f.size() - 1;
    df.assign(f.size(), 0.0);
    for (std::size_t i = 1; i < m; ++i) df[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    df[0] = 0.0;
    df[m] = (f[m] - f[m - 1]) / h;
}

// ---------------------------------------------------------------------------
// Shooting

enum class ShotKind { Overshoot, Undershoot, Undecided };

struct Shot {
    ShotKind kind = ShotKind::Undecided;
    /// Index of the first grid point at which the trajectory left the
    /// positive decreasing regime (or size() when it never did).
    std::size_t departure = 0;
    std::vector<double> w;
    std::vector<double> dw;
};

struct StopIntegration {};

Shot shoot(double w0, double p, int n, const std::vector<double>& grid) {
    using State = std::array<double, 2>;
    namespace odeint = boost::numeric::odeint;

    const double nm1 = static_cast<double>(n - 1);
    auto rhs = [&](const State& y, State& dy, double r) {
        dy[0] = y[1];
        dy[1] = -nm1 / r * y[1] + y[0] - signed_power(y[0], p);
    };

    Shot shot;
    shot.w.assign(grid.size(), 0.0);
    shot.dw.assign(grid.size(), 0.0);
    shot.w[0] = w0;
    shot.departure = grid.size();

    // Series start off the coordinate singularity at r = 0.
    const double r_start = std::min(1e-4, 0.5 * grid[1]);
    const double curvature = (w0 - std::pow(w0, p)) / static_cast<double>(n);
    State y{w0 + 0.5 * curvature * r_start * r_start, curvature * r_start};

    std::vector<double> times;
    times.reserve(grid.size());
    times.push_back(r_start);
    times.insert(times.end(), grid.begin() + 1, grid.end());

    std::size_t idx = 0;
    auto observer = [&](const State& s, double) {
        if (idx > 0) {
            shot.w[idx] = s[0];
            shot.dw[idx] = s[1];
            if (s[0] <= 0.0) {
                shot.kind = ShotKind::Overshoot;
                shot.departure = idx;
                throw StopIntegration{};
            }
            if (s[1] >= 0.0) {
                shot.kind = ShotKind::Undershoot;
                shot.departure = idx;
                throw StopIntegration{};
            }
        }
        ++idx;
    };

    auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-3 * (grid[1] - grid[0]), observer);
    } catch (const StopIntegration&) {
    }
    return shot;
}

// ---------------------------------------------------------------------------
// Radial finite-difference system

/// Fourth-order stencil of -Δ = -(d²/dr² + (n-1)/r d/dr) for radial
/// functions on a uniform grid. Ghost values use the even extension at r = 0
/// and the odd extension about r_max (Dirichlet truncation).
struct RadialStencil {
    struct Entry {
        std::size_t col;
        double weight;
    };
    /// Rows 0..m-1; columns referencing index m (the fixed zero) are dropped.
    std::vector<std::vector<Entry>> rows;

    RadialStencil(const std::vector<double>& r, int n) {
        const std::size_t m = r.size() - 1;
        const double h = r[1] - r[0];
        const double nm1 = static_cast<double>(n - 1);
        rows.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            double w[5] = {0, 0, 0, 0, 0};  // offsets -2..+2
            const double d2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
            const double d1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
            if (i == 0) {
                // Δf(0) = n f''(0)
                for (int k = 0; k < 5; ++k) w[k] = n * d2[k] / (12.0 * h * h);
            } else {
                for (int k = 0; k < 5; ++k) w[k] = d2[k] / (12.0 * h * h) + nm1 / r[i] * d1[k] / (12.0 * h);
            }
            auto& row = rows[i];
            auto add = [&](long j, double weight) {
                double sign = 1.0;
                if (j < 0) j = -j;
                if (j > static_cast<long>(m)) {
                    j = 2 * static_cast<long>(m) - j;
                    sign = -1.0;
                }
                if (j == static_cast<long>(m)) return;
                for (auto& e : row) {
                    if (e.col == static_cast<std::size_t>(j)) {
                        e.weight += sign * weight;
                        return;
                    }
                }
                row.push_back({static_cast<std::size_t>(j), sign * weight});
            };
            for (int k = 0; k < 5; ++k) add(static_cast<long>(i) + k - 2, -w[k]);
        }
    }

    /// (-Δf)_i for i < m; f_m is the truncation zero.
    double apply(const std::vector<double>& f, std::size_t i) const {
        double out = 0.0;
        for (const auto& e : rows[i]) out += e.weight * f[e.col];
        return out;
    }
};

/// Unknowns interleaved as (U_0, V_0, U_1, V_1, ...), Dirichlet zero at r_max.
struct RadialSystem {
    const RadialStencil& stencil;
    double p;
    double q;
    std::size_t m;

    void unpack(const Eigen::VectorXd& x, std::vector<double>& U, std::vector<double>& V) const {
        U.assign(m + 1, 0.0);
        V.assign(m + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            U[i] = x[static_cast<Eigen::Index>(2 * i)];
            V[i] = x[static_cast<Eigen::Index>(2 * i + 1)];
        }
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
        std::vector<double> U, V;
        unpack(x, U, V);
        Eigen::VectorXd F(static_cast<Eigen::Index>(2 * m));
        for (std::size_t i = 0; i < m; ++i) {
            F[static_cast<Eigen::Index>(2 * i)] = stencil.apply(U, i) + U[i] - signed_power(V[i], q);
            F[static_cast<Eigen::Index>(2 * i + 1)] = stencil.apply(V, i) + V[i] - signed_power(U[i], p);
        }
        return F;
    }

    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const {
        const auto N = static_cast<Eigen::Index>(2 * m);
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(N) * 7);
        for (std::size_t i = 0; i < m; ++i) {
            const auto iu = static_cast<int>(2 * i);
            const auto iv = iu + 1;
            const double u = x[iu];
            const double v = x[iv];
            t.emplace_back(iu, iu, 1.0);
            t.emplace_back(iv, iv, 1.0);
            t.emplace_back(iu, iv, -q * std::pow(std::abs(v), q - 1.0));
            t.emplace_back(iv, iu, -p * std::pow(std::abs(u), p - 1.0));
            for (const auto& e : stencil.rows[i]) {
                const auto c = static_cast<int>(2 * e.col);
                t.emplace_back(iu, c, e.weight);
                t.emplace_back(iv, c + 1, e.weight);
            }
        }
        Eigen::SparseMatrix<double> J(N, N);
        J.setFromTriplets(t.begin(), t.end());
        return J;
    }
};

RadialProfile finish_profile(const Exponents& exp, std::vector<double> r, std::vector<double> U,
                             std::vector<double> V, double residual) {
    RadialProfile prof{exp, r.back(), r[1] - r[0], std::move(r), std::move(U), std::move(V), {}, {}, residual};
    centered_derivative(prof.U, prof.h, prof.dU);
    centered_derivative(prof.V, prof.h, prof.dV);
    return prof;
}

void check_profile_shape(const RadialProfile& prof) {
    const std::size_t m = prof.size() - 1;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(prof.U[i] > 0.0) || !(prof.V[i] > 0.0)) {
            throw Error(ErrorKind::NonPositive,
                        "ground state lost positivity at r = " + std::to_string(prof.r[i]));
        }
    }
}

RadialProfile newton_on_grid(const Exponents& exp, const std::vector<double>& r, const std::vector<double>& U0,
                             const std::vector<double>& V0, const GroundStateOptions& opts,
                             std::vector<double>* history) {
    const RadialStencil stencil(r, exp.n());
    const std::size_t m = r.size() - 1;
    const RadialSystem sys{stencil, exp.p(), exp.q(), m};

    Eigen::VectorXd x(static_cast<Eigen::Index>(2 * m));
    for (std::size_t i = 0; i < m; ++i) {
        x[static_cast<Eigen::Index>(2 * i)] = U0[i];
        x[static_cast<Eigen::Index>(2 * i + 1)] = V0[i];
    }
    detail::NewtonSettings settings;
    settings.tolerance = opts.newton_tolerance;
    settings.max_iterations = opts.max_newton_iterations;
    settings.max_backtracks = opts.max_backtracks;
    const std::vector<bool> mask(static_cast<std::size_t>(x.size()), true);
    auto outcome = detail::damped_newton(sys, std::move(x), mask, settings);
    if (history) *history = outcome.history;

    std::vector<double> U, V;
    sys.unpack(outcome.x, U, V);
    auto prof = finish_profile(exp, r, std::move(U), std::move(V), outcome.residual_inf);
    check_profile_shape(prof);
    return prof;
}

}  // namespace

// ---------------------------------------------------------------------------

RadialProfile::Sample RadialProfile::at(double s) const {
    s = std::abs(s);
    if (s >= r_max) return {0.0, 0.0, 0.0, 0.0};
    const std::size_t m = size() - 1;
    auto k = static_cast<std::size_t>(s / h);
    if (k >= m) k = m - 1;
    const double t = (s - r[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    const double d00 = (6 * t2 - 6 * t) / h;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = (-6 * t2 + 6 * t) / h;
    const double d11 = 3 * t2 - 2 * t;
    auto interp = [&](const std::vector<double>& f, const std::vector<double>& df) {
        return h00 * f[k] + h10 * h * df[k] + h01 * f[k + 1] + h11 * h * df[k + 1];
    };
    auto interp_d = [&](const std::vector<double>& f, const std::vector<double>& df) {
        return d00 * f[k] + d10 * df[k] + d01 * f[k + 1] + d11 * df[k + 1];
    };
    return {interp(U, dU), interp(V, dV), interp_d(U, dU), interp_d(V, dV)};
}

RadialProfile solve_scalar_ground_state(double p, int n, const GroundStateOptions& opts) {
    const Exponents exp = validate_exponents(p, p, n);
    check_grid_options(opts);
    const auto grid = uniform_grid(opts.r_max, opts.cells);

    double lo = 1.0 + 1e-6;
    if (shoot(lo, p, n, grid).kind != ShotKind::Undershoot) {
        throw Error(ErrorKind::ShootingFailure, "no undershooting initial value near w(0) = 1");
    }
    double hi = 2.0;
    while (shoot(hi, p, n, grid).kind != ShotKind::Overshoot) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e4) throw Error(ErrorKind::ShootingFailure, "no overshooting initial value below w(0) = 1e4");
    }
    // Bisect down to adjacent doubles: the decaying branch is only tracked
    // as far as the shooting error e^{r} * |Δw(0)| stays below w itself.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Shot s = shoot(mid, p, n, grid);
        if (s.kind == ShotKind::Overshoot) {
            hi = mid;
        } else if (s.kind == ShotKind::Undershoot) {
            lo = mid;
        } else {
            lo = hi = mid;
            break;
        }
    }

    const Shot a = shoot(lo, p, n, grid);
    const Shot b = shoot(hi, p, n, grid);
    const std::size_t m = grid.size() - 1;
    const std::size_t depart = std::min({a.departure, b.departure, m}) - 1;

    std::vector<double> U(grid.size()), dU(grid.size());
    for (std::size_t i = 0; i <= depart; ++i) {
        U[i] = 0.5 * (a.w[i] + b.w[i]);
        dU[i] = 0.5 * (a.dw[i] + b.dw[i]);
    }
    // Past the departure point continue with the linearized far field
    // w ~ K r^{-(n-1)/2} e^{-r}; these values are below the bisection noise.
    const double rd = grid[depart];
    const double decay_power = 0.5 * static_cast<double>(n - 1);
    for (std::size_t i = depart + 1; i < m; ++i) {
        const double ratio = std::pow(rd / grid[i], decay_power) * std::exp(-(grid[i] - rd));
        U[i] = U[depart] * ratio;
        dU[i] = -U[i] * (1.0 + decay_power / grid[i]);
    }
    U[m] = 0.0;
    dU[m] = 0.0;

    RadialProfile prof{exp, grid.back(), grid[1] - grid[0], grid, U, U, dU, dU, hi - lo};
    return prof;
}

double frozen_residual_norm(const std::vector<double>& r, const std::vector<double>& u,
                            const std::vector<double>& v, const Exponents& exp, double a0, double b0, double c0) {
    const RadialStencil stencil(r, exp.n());
    const std::size_t m = r.size() - 1;
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double fu = stencil.apply(u, i) + c0 * u[i] - b0 * signed_power(v[i], exp.q());
        const double fv = stencil.apply(v, i) + c0 * v[i] - a0 * signed_power(u[i], exp.p());
        worst = std::max({worst, std::abs(fu), std::abs(fv)});
    }
    return worst;
}

double limit_residual_norm(const RadialProfile& prof) {
    return frozen_residual_norm(prof.r, prof.U, prof.V, prof.exponents, 1.0, 1.0, 1.0);
}

RadialProfile solve_limit_ground_state(const Exponents& exp, const GroundStateOptions& opts,
                                       std::vector<double>* history) {
    check_grid_options(opts);
    const double diag = std::min(exp.p(), exp.q());
    const bool move_q = exp.q() > exp.p();
    const double target = move_q ? exp.q() : exp.p();

    const RadialProfile seed = solve_scalar_ground_state(diag, exp.n(), opts);
    RadialProfile current = newton_on_grid(validate_exponents(diag, diag, exp.n()), seed.r, seed.U, seed.V, opts,
                                           target == diag ? history : nullptr);

    double e = diag;
    while (e < target) {
        e = std::min(target, e + opts.continuation_step);
        const Exponents step = move_q ? validate_exponents(diag, e, exp.n()) : validate_exponents(e, diag, exp.n());
        current = newton_on_grid(step, current.r, current.U, current.V, opts, e == target ? history : nullptr);
    }
    current.exponents = exp;
    return current;
}

RadialProfile solve_limit_ground_state(const Exponents& exp, const GroundStateOptions& opts) {
    return solve_limit_ground_state(exp, opts, nullptr);
}

// ---------------------------------------------------------------------------

double hemisphere_direction_moment(int n, int k) {
    // |S^{n-2}| ∫_0^{π/2} cos^k φ sin^{n-2} φ dφ = |S^{n-2}| B((k+1)/2, (n-1)/2) / 2
    const double a = 0.5 * (k + 1);
    const double b = 0.5 * (n - 1);
    const double beta = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    return unit_sphere_area(n - 2) * 0.5 * beta;
}

double energy_I_infinity(const RadialProfile& prof) {
    const int n = prof.exponents.n();
    const double p = prof.exponents.p();
    const double q = prof.exponents.q();
    std::vector<double> f(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double u = prof.U[i];
        const double v = prof.V[i];
        const double density = prof.dU[i] * prof.dV[i] + u * v - std::pow(u, p + 1.0) / (p + 1.0) -
                               std::pow(v, q + 1.0) / (q + 1.0);
        f[i] = density * std::pow(prof.r[i], n - 1);
    }
    return 0.5 * unit_sphere_area(n - 1) * trapz(f, prof.h);
}

MomentTable half_space_moments(const RadialProfile& prof) {
    const int n = prof.exponents.n();
    const double p = prof.exponents.p();
    const double q = prof.exponents.q();
    const std::size_t sz = prof.size();

    std::vector<double> grad(sz), F(sz), G(sz), UV(sz), excess(sz), trace(sz);
    for (std::size_t i = 0; i < sz; ++i) {
        const double u = prof.U[i];
        const double v = prof.V[i];
        const double rn = std::pow(prof.r[i], n);
        const double Fu = std::pow(u, p + 1.0) / (p + 1.0);
        const double Gv = std::pow(v, q + 1.0) / (q + 1.0);
        grad[i] = prof.dU[i] * prof.dV[i] * rn;
        F[i] = Fu * rn;
        G[i] = Gv * rn;
        UV[i] = u * v * rn;
        excess[i] = (0.5 * std::pow(u, p + 1.0) - Fu + 0.5 * std::pow(v, q + 1.0) - Gv) * rn;
        trace[i] = u * v * std::pow(prof.r[i], n - 2);
    }
    const double c1 = hemisphere_direction_moment(n, 1);
    const double c3 = hemisphere_direction_moment(n, 3);
    const double J = trapz(grad, prof.h);

    MomentTable m;
    m.I_infinity = energy_I_infinity(prof);
    m.grad_moment = c1 * J;
    m.normal_moment = c3 * J;
    m.tangential_moment = (c1 - c3) / static_cast<double>(n - 1) * J;
    m.F_moment = c1 * trapz(F, prof.h);
    m.G_moment = c1 * trapz(G, prof.h);
    m.UV_moment = c1 * trapz(UV, prof.h);
    m.nonlinear_excess_moment = c1 * trapz(excess, prof.h);
    m.trace = 0.5 * unit_sphere_area(n - 2) * trapz(trace, prof.h);
    return m;
}

double PohozaevReport::max_residual() const {
    return std::max({normal_ratio.relative_residual, nonlinear_balance.relative_residual,
                     weighted_energy.relative_residual, tangential_ratio.relative_residual});
}

namespace {

IdentityCheck make_check(double lhs, double rhs) {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return {lhs, rhs, scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0};
}

}  // namespace

PohozaevReport verify_pohozaev(const RadialProfile& prof) {
    const MomentTable m = half_space_moments(prof);
    const double n = prof.exponents.n();
    const double weighted = m.grad_moment + m.UV_moment - m.F_moment - m.G_moment;

    PohozaevReport rep;
    rep.normal_ratio = make_check(m.normal_moment, 2.0 / (n + 1.0) * m.grad_moment);
    rep.nonlinear_balance = make_check(m.nonlinear_excess_moment, weighted - m.trace);
    rep.nonlinear_balance_plus_trace = make_check(m.nonlinear_excess_moment, weighted + m.trace);
    rep.weighted_energy = make_check(weighted, 2.0 * m.normal_moment);
    rep.tangential_ratio = make_check(m.tangential_moment, m.grad_moment / (n + 1.0));
    return rep;
}

DecayRates decay_rate(const RadialProfile& prof) {
    const double r0 = 0.5 * prof.r_max;
    const double r1 = 0.75 * prof.r_max;
    const double umax = *std::max_element(prof.U.begin(), prof.U.end());
    const double vmax = *std::max_element(prof.V.begin(), prof.V.end());
    const RadialProfile::Sample end = prof.at(r1);
    if (!(end.U > 0.0) || !(end.V > 0.0) || end.U > 1e-4 * umax || end.V > 1e-4 * vmax) {
        throw Error(ErrorKind::TailTooShort,
                    "profile has not decayed below 1e-4 of its maximum by 0.75 r_max; increase r_max");
    }
    auto slope = [&](const std::vector<double>& f) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < prof.size(); ++i) {
            if (prof.r[i] < r0 || prof.r[i] > r1) continue;
            if (!(f[i] > 0.0)) {
                throw Error(ErrorKind::TailTooShort, "non-positive value inside the decay window");
            }
            const double x = prof.r[i];
            const double y = std::log(f[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        if (cnt < 3) throw Error(ErrorKind::TailTooShort, "decay window holds fewer than 3 grid points");
        const double c = static_cast<double>(cnt);
        return (c * sxy - sx * sy) / (c * sxx - sx * sx);
    };
    return {-slope(prof.U), -slope(prof.V)};
}

}  // namespace spikeforge
