#include "spikeforge/fd_solver.hpp"

#include "newton.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spikeforge {

namespace {

double signed_power(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

/// ∫_{lo}^{hi} sin^m θ dθ by 10-point Gauss-Legendre; positive for lo < hi.
double sine_power_integral(int m, double lo, double hi) {
    if (m == 0) return hi - lo;
    return boost::math::quadrature::gauss<double, 10>::integrate(
        [m](double t) { return std::pow(std::sin(t), m); }, lo, hi);
}

/// ∫_{lo}^{hi} r^k dr for k >= 0.
double radius_power_integral(int k, double lo, double hi) {
    return (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
}

void check_stretch(double s) {
    if (!(s >= 0.0) || !(s < 1.0)) {
        throw Error(ErrorKind::PreconditionViolation, "grid stretch factors must lie in [0, 1)");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

MeridianGrid build_grid(const DomainSpec& domain, int n, int nr, int ntheta, const GridStretch& stretch) {
    if (nr < 16 || ntheta < 16) {
        throw Error(ErrorKind::BadResolution, "meridian grid needs at least 16 cells per direction (got " +
                                                  std::to_string(nr) + " x " + std::to_string(ntheta) + ")");
    }
    if (n != domain.n()) throw Error(ErrorKind::PreconditionViolation, "grid dimension differs from the domain's");
    if (n < 3) throw Error(ErrorKind::RangeViolation, "meridian grids need n >= 3");
    check_stretch(stretch.radial);
    check_stretch(stretch.angular);

    MeridianGrid g(domain, n, nr, ntheta, stretch);
    const double a = domain.is_ball() ? 1e-2 * domain.max_radius() : domain.min_radius();
    const double b = domain.max_radius();
    const double two_pi = 2.0 * std::numbers::pi;

    g.r_.resize(static_cast<std::size_t>(nr) + 1);
    for (int i = 0; i <= nr; ++i) {
        const double xi = static_cast<double>(i) / nr;
        g.r_[static_cast<std::size_t>(i)] = a + (b - a) * (xi - stretch.radial * std::sin(two_pi * xi) / two_pi);
    }
    g.r_.front() = a;
    g.r_.back() = b;

    g.theta_.resize(static_cast<std::size_t>(ntheta) + 1);
    for (int j = 0; j <= ntheta; ++j) {
        const double xi = static_cast<double>(j) / ntheta;
        g.theta_[static_cast<std::size_t>(j)] =
            std::numbers::pi * (xi - stretch.angular * std::sin(std::numbers::pi * xi) / std::numbers::pi);
    }
    g.theta_.front() = 0.0;
    g.theta_.back() = std::numbers::pi;

    const auto& r = g.r_;
    const auto& t = g.theta_;
    g.vol_r_.resize(r.size());
    g.vol_r3_.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double lo = i == 0 ? r[0] : 0.5 * (r[i - 1] + r[i]);
        const double hi = i + 1 == r.size() ? r[i] : 0.5 * (r[i] + r[i + 1]);
        g.vol_r_[i] = radius_power_integral(n - 1, lo, hi);
        g.vol_r3_[i] = radius_power_integral(n - 3, lo, hi);
    }
    g.vol_t_.resize(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double lo = j == 0 ? t[0] : 0.5 * (t[j - 1] + t[j]);
        const double hi = j + 1 == t.size() ? t[j] : 0.5 * (t[j] + t[j + 1]);
        g.vol_t_[j] = sine_power_integral(n - 2, lo, hi);
    }
    g.face_r_.resize(r.size() - 1);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        g.face_r_[i] = std::pow(0.5 * (r[i] + r[i + 1]), n - 1) / (r[i + 1] - r[i]);
    }
    g.face_t_.resize(t.size() - 1);
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
        g.face_t_[j] = std::pow(std::sin(0.5 * (t[j] + t[j + 1])), n - 2) / (t[j + 1] - t[j]);
    }

    g.mass_.resize(g.node_count());
    for (int i = 0; i <= nr; ++i) {
        for (int j = 0; j <= ntheta; ++j) {
            g.mass_[g.index(i, j)] = g.vol_r_[static_cast<std::size_t>(i)] * g.vol_t_[static_cast<std::size_t>(j)];
        }
    }
    g.sphere_factor_ = unit_sphere_area(n - 2);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.node_count() * 9);
    auto couple = [&](std::size_t k1, std::size_t k2, double w) {
        const auto a1 = static_cast<int>(k1);
        const auto a2 = static_cast<int>(k2);
        trip.emplace_back(a1, a1, w);
        trip.emplace_back(a2, a2, w);
        trip.emplace_back(a1, a2, -w);
        trip.emplace_back(a2, a1, -w);
    };
    for (int i = 0; i <= nr; ++i) {
        for (int j = 0; j <= ntheta; ++j) {
            const auto k = g.index(i, j);
            if (i < nr) couple(k, g.index(i + 1, j), g.face_r_[static_cast<std::size_t>(i)] * g.vol_t_[static_cast<std::size_t>(j)]);
            if (j < ntheta) couple(k, g.index(i, j + 1), g.face_t_[static_cast<std::size_t>(j)] * g.vol_r3_[static_cast<std::size_t>(i)]);
        }
    }
    const auto N = static_cast<Eigen::Index>(g.node_count());
    g.stiffness_.resize(N, N);
    g.stiffness_.setFromTriplets(trip.begin(), trip.end());
    g.stiffness_.makeCompressed();
    return g;
}

std::vector<double> MeridianGrid::negative_laplacian(const std::vector<double>& f) const {
    // Flux form sum_j w_kj (f_k - f_j): exact zero on constants and free of
    // the cancellation in diag*f_k - sum w f_j.
    std::vector<double> out(f.size(), 0.0);
    for (Eigen::Index col = 0; col < stiffness_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it; ++it) {
            if (it.row() == col) continue;
            const auto k = static_cast<std::size_t>(it.row());
            out[k] -= it.value() * (f[k] - f[static_cast<std::size_t>(col)]);
        }
    }
    for (std::size_t k = 0; k < f.size(); ++k) out[k] /= mass_[k];
    return out;
}

Point MeridianGrid::point(int i, int j) const {
    const auto [rho, z] = planar(i, j);
    Point x = Point::Zero(n_);
    x[0] = rho;
    x[n_ - 1] = z;
    return x;
}

std::pair<double, double> MeridianGrid::planar(int i, int j) const {
    const double r = r_[static_cast<std::size_t>(i)];
    const double t = theta_[static_cast<std::size_t>(j)];
    return {r * std::sin(t), r * std::cos(t)};
}

double MeridianGrid::interpolate(const std::vector<double>& f, double r, double theta) const {
    r = std::clamp(r, r_.front(), r_.back());
    theta = std::clamp(theta, 0.0, std::numbers::pi);
    auto bracket = [](const std::vector<double>& xs, double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        auto i = static_cast<std::size_t>(std::distance(xs.begin(), it));
        i = std::clamp<std::size_t>(i, 1, xs.size() - 1) - 1;
        const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return std::pair{i, std::clamp(w, 0.0, 1.0)};
    };
    const auto [i, wr] = bracket(r_, r);
    const auto [j, wt] = bracket(theta_, theta);
    const int ii = static_cast<int>(i);
    const int jj = static_cast<int>(j);
    return (1 - wr) * (1 - wt) * f[index(ii, jj)] + wr * (1 - wt) * f[index(ii + 1, jj)] +
           (1 - wr) * wt * f[index(ii, jj + 1)] + wr * wt * f[index(ii + 1, jj + 1)];
}

std::vector<double> neumann_eigenvalues(const MeridianGrid& grid, int count) {
    const Eigen::MatrixXd K = Eigen::MatrixXd(grid.stiffness());
    Eigen::VectorXd m(static_cast<Eigen::Index>(grid.node_count()));
    for (std::size_t k = 0; k < grid.node_count(); ++k) m[static_cast<Eigen::Index>(k)] = grid.mass()[k];
    // M^{-1/2} K M^{-1/2} keeps the problem symmetric.
    const Eigen::VectorXd s = m.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd A = s.asDiagonal() * K * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (int k = 0; k < count && k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()[k]);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct NodalCoefficients {
    std::vector<double> a, b, c;

    NodalCoefficients(const MeridianGrid& grid, const Coefficients& coeffs) {
        const auto& r = grid.radii();
        a.resize(r.size());
        b.resize(r.size());
        c.resize(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            a[i] = coeffs.a.value_at_radius(r[i]);
            b[i] = coeffs.b.value_at_radius(r[i]);
            c[i] = coeffs.c.value_at_radius(r[i]);
        }
    }
};

void check_fields(const MeridianGrid& grid, const FieldPair& f) {
    if (f.u.size() != grid.node_count() || f.v.size() != grid.node_count()) {
        throw Error(ErrorKind::PreconditionViolation, "field size does not match the grid");
    }
}

Eigen::VectorXd interleave(const FieldPair& f) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(2 * f.u.size()));
    for (std::size_t k = 0; k < f.u.size(); ++k) {
        x[static_cast<Eigen::Index>(2 * k)] = f.u[k];
        x[static_cast<Eigen::Index>(2 * k + 1)] = f.v[k];
    }
    return x;
}

FieldPair deinterleave(const Eigen::VectorXd& x) {
    const std::size_t nn = static_cast<std::size_t>(x.size()) / 2;
    FieldPair f{std::vector<double>(nn), std::vector<double>(nn)};
    for (std::size_t k = 0; k < nn; ++k) {
        f.u[k] = x[static_cast<Eigen::Index>(2 * k)];
        f.v[k] = x[static_cast<Eigen::Index>(2 * k + 1)];
    }
    return f;
}

struct MeridianSystem {
    const MeridianGrid& grid;
    const NodalCoefficients& coef;
    double p;
    double q;
    double eps2;

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
        const FieldPair f = deinterleave(x);
        const auto Lu = grid.negative_laplacian(f.u);
        const auto Lv = grid.negative_laplacian(f.v);
        Eigen::VectorXd F(x.size());
        for (std::size_t k = 0; k < f.u.size(); ++k) {
            const auto i = static_cast<std::size_t>(grid.unindex(k).i);
            F[static_cast<Eigen::Index>(2 * k)] =
                eps2 * Lu[k] + coef.c[i] * f.u[k] - coef.b[i] * signed_power(f.v[k], q);
            F[static_cast<Eigen::Index>(2 * k + 1)] =
                eps2 * Lv[k] + coef.c[i] * f.v[k] - coef.a[i] * signed_power(f.u[k], p);
        }
        return F;
    }

    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const {
        const auto& K = grid.stiffness();
        const auto& M = grid.mass();
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(K.nonZeros()) * 2 + static_cast<std::size_t>(x.size()) * 2);
        for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
                const auto row = it.row();
                const double w = eps2 * it.value() / M[static_cast<std::size_t>(row)];
                t.emplace_back(2 * row, 2 * col, w);
                t.emplace_back(2 * row + 1, 2 * col + 1, w);
            }
        }
        for (std::size_t k = 0; k < grid.node_count(); ++k) {
            const auto i = static_cast<std::size_t>(grid.unindex(k).i);
            const auto ku = static_cast<Eigen::Index>(2 * k);
            const double u = x[ku];
            const double v = x[ku + 1];
            t.emplace_back(ku, ku, coef.c[i]);
            t.emplace_back(ku + 1, ku + 1, coef.c[i]);
            t.emplace_back(ku, ku + 1, -coef.b[i] * q * std::pow(std::abs(v), q - 1.0));
            t.emplace_back(ku + 1, ku, -coef.a[i] * p * std::pow(std::abs(u), p - 1.0));
        }
        Eigen::SparseMatrix<double> J(x.size(), x.size());
        J.setFromTriplets(t.begin(), t.end());
        return J;
    }
};

GridIndex argmax_of(const MeridianGrid& grid, const std::vector<double>& f) {
    const auto it = std::max_element(f.begin(), f.end());
    return grid.unindex(static_cast<std::size_t>(std::distance(f.begin(), it)));
}

}  // namespace

Eigen::VectorXd system_residual(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp,
                                double eps, const FieldPair& fields) {
    check_fields(grid, fields);
    const NodalCoefficients coef(grid, coeffs);
    const MeridianSystem sys{grid, coef, exp.p(), exp.q(), eps * eps};
    return sys.residual(interleave(fields));
}

Eigen::VectorXd system_residual_direct(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp,
                                       double eps, const FieldPair& fields) {
    check_fields(grid, fields);
    const int nr = grid.radial_cells();
    const int nt = grid.angular_cells();
    const auto& fr = grid.radial_face_weight();
    const auto& ft = grid.angular_face_weight();
    const auto& vr = grid.radial_volume();
    const auto& vr3 = grid.radial_volume_r3();
    const auto& vt = grid.angular_volume();
    const auto& r = grid.radii();

    Eigen::VectorXd F(static_cast<Eigen::Index>(2 * grid.node_count()));
    for (int i = 0; i <= nr; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const double a = coeffs.a.value_at_radius(r[iu]);
        const double b = coeffs.b.value_at_radius(r[iu]);
        const double c = coeffs.c.value_at_radius(r[iu]);
        for (int j = 0; j <= nt; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const std::size_t k = grid.index(i, j);
            double out_u = 0.0;
            double out_v = 0.0;
            auto flux = [&](std::size_t other, double w) {
                out_u += w * (fields.u[k] - fields.u[other]);
                out_v += w * (fields.v[k] - fields.v[other]);
            };
            if (i > 0) flux(grid.index(i - 1, j), fr[iu - 1] * vt[ju]);
            if (i < nr) flux(grid.index(i + 1, j), fr[iu] * vt[ju]);
            if (j > 0) flux(grid.index(i, j - 1), ft[ju - 1] * vr3[iu]);
            if (j < nt) flux(grid.index(i, j + 1), ft[ju] * vr3[iu]);
            const double vol = vr[iu] * vt[ju];
            F[static_cast<Eigen::Index>(2 * k)] =
                eps * eps * out_u / vol + c * fields.u[k] - b * signed_power(fields.v[k], exp.q());
            F[static_cast<Eigen::Index>(2 * k + 1)] =
                eps * eps * out_v / vol + c * fields.v[k] - a * signed_power(fields.u[k], exp.p());
        }
    }
    return F;
}

Eigen::SparseMatrix<double> system_jacobian(const MeridianGrid& grid, const Coefficients& coeffs,
                                            const Exponents& exp, double eps, const FieldPair& fields) {
    check_fields(grid, fields);
    const NodalCoefficients coef(grid, coeffs);
    const MeridianSystem sys{grid, coef, exp.p(), exp.q(), eps * eps};
    return sys.jacobian(interleave(fields));
}

// ---------------------------------------------------------------------------

FieldPair initial_guess_bump(const RadialProfile& prof, const Coefficients& coeffs, const Point& x0, double eps,
                             const MeridianGrid& grid) {
    if (!(eps > 0.0)) throw Error(ErrorKind::PreconditionViolation, "eps must be positive");
    const int n = grid.n();
    if (x0.size() != n) throw Error(ErrorKind::PreconditionViolation, "x0 has the wrong dimension");
    const double r0 = x0.norm();
    if (!grid.domain().component_at(r0)) {
        throw Error(ErrorKind::NotOnBoundary, "spike centre is not on the boundary of " + grid.domain().describe());
    }
    if (x0.head(n - 1).norm() > 1e-12 * r0) {
        throw Error(ErrorKind::PreconditionViolation, "spike centre must lie on the symmetry axis");
    }
    const double z0 = x0[n - 1];
    const double a0 = coeffs.a.value_at_radius(r0);
    const double b0 = coeffs.b.value_at_radius(r0);
    const double c0 = coeffs.c.value_at_radius(r0);
    const auto planted = rescale_profile(prof, a0, b0, c0);
    const double floor = 1e-14;

    FieldPair f{std::vector<double>(grid.node_count()), std::vector<double>(grid.node_count())};
    for (int i = 0; i <= grid.radial_cells(); ++i) {
        for (int j = 0; j <= grid.angular_cells(); ++j) {
            const auto [rho, z] = grid.planar(i, j);
            const double d = std::hypot(rho, z - z0);
            const auto s = planted.at(d / eps);
            const auto k = grid.index(i, j);
            f.u[k] = std::max(s.U, floor);
            f.v[k] = std::max(s.V, floor);
        }
    }
    return f;
}

int DiscreteSolution::argmax_separation() const {
    return std::max(std::abs(argmax_u.i - argmax_v.i), std::abs(argmax_u.j - argmax_v.j));
}

double discrete_energy(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp, double eps,
                       const FieldPair& fields) {
    check_fields(grid, fields);
    const NodalCoefficients coef(grid, coeffs);
    const Eigen::Map<const Eigen::VectorXd> u(fields.u.data(), static_cast<Eigen::Index>(fields.u.size()));
    const Eigen::Map<const Eigen::VectorXd> v(fields.v.data(), static_cast<Eigen::Index>(fields.v.size()));
    const double grad = u.dot(grid.stiffness() * v);
    const double p = exp.p();
    const double q = exp.q();
    double bulk = 0.0;
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        const auto i = static_cast<std::size_t>(grid.unindex(k).i);
        const double uk = fields.u[k];
        const double vk = fields.v[k];
        bulk += grid.mass()[k] * (coef.c[i] * uk * vk - coef.a[i] * std::pow(std::abs(uk), p + 1.0) / (p + 1.0) -
                                  coef.b[i] * std::pow(std::abs(vk), q + 1.0) / (q + 1.0));
    }
    return grid.sphere_factor() * (eps * eps * grad + bulk);
}

double discrete_energy(const DiscreteSolution& sol, const Coefficients& coeffs, const Exponents& exp) {
    return discrete_energy(sol.grid, coeffs, exp, sol.eps, FieldPair{sol.u, sol.v});
}

double mass_fraction_within(const MeridianGrid& grid, const std::vector<double>& u, GridIndex centre,
                            double radius) {
    const auto [rc, zc] = grid.planar(centre.i, centre.j);
    double inside = 0.0;
    double total = 0.0;
    for (int i = 0; i <= grid.radial_cells(); ++i) {
        for (int j = 0; j <= grid.angular_cells(); ++j) {
            const auto k = grid.index(i, j);
            const double w = grid.mass()[k] * u[k] * u[k];
            total += w;
            const auto [rho, z] = grid.planar(i, j);
            if (std::hypot(rho - rc, z - zc) < radius) inside += w;
        }
    }
    return total > 0.0 ? inside / total : 0.0;
}

DiscreteSolution solve_system(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp, double eps,
                              const FieldPair& init, const SolveOptions& opts) {
    if (!(eps > 0.0)) throw Error(ErrorKind::PreconditionViolation, "eps must be positive");
    if (grid.n() != exp.n()) throw Error(ErrorKind::PreconditionViolation, "grid and exponents disagree on n");
    check_fields(grid, init);

    const NodalCoefficients coef(grid, coeffs);
    const MeridianSystem sys{grid, coef, exp.p(), exp.q(), eps * eps};
    detail::NewtonSettings settings;
    settings.tolerance = opts.newton_tolerance;
    settings.acceptable_tolerance = opts.acceptable_residual;
    settings.max_iterations = opts.max_newton_iterations;
    settings.max_backtracks = opts.max_backtracks;
    settings.positivity_floor = opts.positivity_floor;
    const std::vector<bool> mask(2 * grid.node_count(), true);
    auto outcome = detail::damped_newton(sys, interleave(init), mask, settings);

    FieldPair f = deinterleave(outcome.x);
    DiscreteSolution sol{grid, std::move(f.u), std::move(f.v), eps, outcome.residual_inf, 0.0, {}, {},
                         outcome.iterations, false};
    sol.c_eps = discrete_energy(sol, coeffs, exp);

    const auto [umin, umax] = std::minmax_element(sol.u.begin(), sol.u.end());
    if (!(sol.c_eps > opts.energy_floor) || !(*umax > 0.0) || (*umax - *umin) < opts.flatness_tolerance * *umax) {
        throw Error(ErrorKind::CollapsedToTrivial,
                    "Newton converged to a trivial or flat state at eps = " + detail::format_short(eps));
    }
    if (!(*umin > 0.0) || !(*std::min_element(sol.v.begin(), sol.v.end()) > 0.0)) {
        throw Error(ErrorKind::NonPositive, "converged state is not positive at eps = " + detail::format_short(eps));
    }
    sol.argmax_u = argmax_of(grid, sol.u);
    sol.argmax_v = argmax_of(grid, sol.v);
    return sol;
}

namespace {

/// f_new(x) = f_old(c + (x - c) * factor), evaluated in the meridian plane.
std::vector<double> rescale_about(const MeridianGrid& grid, const std::vector<double>& f, GridIndex centre,
                                  double factor) {
    const auto [rc, zc] = grid.planar(centre.i, centre.j);
    std::vector<double> out(f.size());
    for (int i = 0; i <= grid.radial_cells(); ++i) {
        for (int j = 0; j <= grid.angular_cells(); ++j) {
            const auto [rho, z] = grid.planar(i, j);
            const double rs = std::abs(rc + (rho - rc) * factor);
            const double zs = zc + (z - zc) * factor;
            out[grid.index(i, j)] = grid.interpolate(f, std::hypot(rs, zs), std::atan2(rs, zs));
        }
    }
    return out;
}

}  // namespace

namespace {

struct Stepper {
    const MeridianGrid& grid;
    const Coefficients& coeffs;
    const Exponents& exp;
    const RadialProfile& prof;
    const Point& x0;
    const SolveOptions& opts;

    DiscreteSolution fresh(double eps) const {
        return solve_system(grid, coeffs, exp, eps, initial_guess_bump(prof, coeffs, x0, eps, grid), opts);
    }

    /// Warm start from `prev`; on failure retry from a fresh bump, then
    /// through the geometric midpoint in ε.
    DiscreteSolution step(const DiscreteSolution& prev, double eps, int depth) const {
        const double factor = prev.eps / eps;
        FieldPair warm{rescale_about(grid, prev.u, prev.argmax_u, factor),
                       rescale_about(grid, prev.v, prev.argmax_u, factor)};
        try {
            auto sol = solve_system(grid, coeffs, exp, eps, warm, opts);
            sol.warm_started = true;
            return sol;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NewtonDivergence && e.kind() != ErrorKind::NonPositive) throw;
        }
        try {
            return fresh(eps);
        } catch (const Error& e) {
            if (depth >= 2 || (e.kind() != ErrorKind::NewtonDivergence && e.kind() != ErrorKind::NonPositive)) throw;
        }
        const auto mid = step(prev, std::sqrt(prev.eps * eps), depth + 1);
        auto sol = step(mid, eps, depth + 1);
        sol.warm_started = true;
        return sol;
    }
};

}  // namespace

std::vector<DiscreteSolution> continuation_sweep(const MeridianGrid& grid, const Coefficients& coeffs,
                                                 const Exponents& exp, const std::vector<double>& eps_sequence,
                                                 const RadialProfile& prof, const Point& x0,
                                                 const SolveOptions& opts) {
    if (eps_sequence.empty()) throw Error(ErrorKind::PreconditionViolation, "empty eps sequence");
    for (std::size_t k = 1; k < eps_sequence.size(); ++k) {
        const double ratio = eps_sequence[k] / eps_sequence[k - 1];
        if (!(ratio < 1.0) || ratio < 0.5) {
            throw Error(ErrorKind::PreconditionViolation,
                        "eps sequence must be strictly decreasing with consecutive ratio >= 0.5");
        }
    }

    const Stepper stepper{grid, coeffs, exp, prof, x0, opts};
    std::vector<DiscreteSolution> out;
    out.reserve(eps_sequence.size());
    for (std::size_t k = 0; k < eps_sequence.size(); ++k) {
        const double eps = eps_sequence[k];
        try {
            out.push_back(k == 0 ? stepper.fresh(eps) : stepper.step(out.back(), eps, 0));
        } catch (const Error& e) {
            throw Error(e.kind(), "continuation failed at eps = " + detail::format_short(eps) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace spikeforge
