#pragma once

#include "spikeforge/concentration.hpp"
#include "spikeforge/core.hpp"
#include "spikeforge/ground_state.hpp"

#include <Eigen/Sparse>

#include <utility>
#include <vector>

namespace spikeforge {

/// Node clustering of the meridian grid. 0 gives uniform spacing; s in
/// (0, 1) shrinks the spacing at the clustered ends by a factor (1 - s).
struct GridStretch {
    /// r = a + (b-a)(ξ - s sin(2πξ)/(2π)): clusters at both boundary spheres.
    double radial = 0.0;
    /// θ = π(ξ - s sin(πξ)/π): clusters at the pole θ = 0.
    double angular = 0.0;
};

struct GridIndex {
    int i = 0;  // radial
    int j = 0;  // angular
    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Axisymmetric (r, θ) grid of an annulus or ball in R^n, symmetric about
/// the x_n axis. The discrete Laplacian is the vertex-centred finite-volume
/// form of ∂_rr + (n-1)/r ∂_r + r^{-2}(∂_θθ + (n-2) cot θ ∂_θ) with zero flux
/// through r = const boundaries and the poles.
class MeridianGrid {
public:
    const DomainSpec& domain() const noexcept { return domain_; }
    int n() const noexcept { return n_; }
    int radial_cells() const noexcept { return nr_; }
    int angular_cells() const noexcept { return nt_; }
    const GridStretch& stretch() const noexcept { return stretch_; }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>((nr_ + 1) * (nt_ + 1)); }

    std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(i * (nt_ + 1) + j); }
    GridIndex unindex(std::size_t k) const noexcept {
        return {static_cast<int>(k) / (nt_ + 1), static_cast<int>(k) % (nt_ + 1)};
    }

    const std::vector<double>& radii() const noexcept { return r_; }
    const std::vector<double>& angles() const noexcept { return theta_; }
    /// Nominal spacings (b-a)/Nr and π/Nθ; equal to the actual ones when unstretched.
    double hr() const noexcept { return (r_.back() - r_.front()) / nr_; }
    double htheta() const noexcept { return theta_.back() / nt_; }

    /// Dual-cell measure ∫ r^{n-1} sin^{n-2}θ dr dθ (without the S^{n-2} factor).
    const std::vector<double>& mass() const noexcept { return mass_; }
    /// |S^{n-2}|, the measure of the azimuthal sphere.
    double sphere_factor() const noexcept { return sphere_factor_; }

    /// Symmetric K with u^T K v ≈ ∫ ∇u·∇v (meridian measure, no sphere factor).
    const Eigen::SparseMatrix<double>& stiffness() const noexcept { return stiffness_; }

    /// -Δ_h f = M^{-1} K f.
    std::vector<double> negative_laplacian(const std::vector<double>& f) const;

    /// Embedding of node (i, j) as (r sinθ, 0, ..., 0, r cosθ) in R^n.
    Point point(int i, int j) const;
    /// Same, in the meridian half-plane: (r sinθ, r cosθ).
    std::pair<double, double> planar(int i, int j) const;

    /// Bilinear interpolation of a nodal field at (r, θ), clamped to the grid.
    double interpolate(const std::vector<double>& f, double r, double theta) const;

    // Face geometry, exposed for the independent residual routine.
    const std::vector<double>& radial_face_weight() const noexcept { return face_r_; }
    const std::vector<double>& angular_face_weight() const noexcept { return face_t_; }
    const std::vector<double>& radial_volume() const noexcept { return vol_r_; }
    const std::vector<double>& angular_volume() const noexcept { return vol_t_; }
    const std::vector<double>& radial_volume_r3() const noexcept { return vol_r3_; }

    friend MeridianGrid build_grid(const DomainSpec& domain, int n, int nr, int ntheta, const GridStretch& stretch);

private:
    MeridianGrid(DomainSpec domain, int n, int nr, int nt, GridStretch stretch)
        : domain_(std::move(domain)), n_(n), nr_(nr), nt_(nt), stretch_(stretch) {}

    DomainSpec domain_;
    int n_;
    int nr_;
    int nt_;
    GridStretch stretch_;
    std::vector<double> r_;
    std::vector<double> theta_;
    std::vector<double> vol_r_;   // ∫ r^{n-1} over dual cells
    std::vector<double> vol_r3_;  // ∫ r^{n-3} over dual cells
    std::vector<double> vol_t_;   // ∫ sin^{n-2} over dual cells
    std::vector<double> face_r_;  // r_{i+1/2}^{n-1} / (r_{i+1} - r_i)
    std::vector<double> face_t_;  // sin^{n-2} θ_{j+1/2} / (θ_{j+1} - θ_j)
    std::vector<double> mass_;
    double sphere_factor_ = 0.0;
    Eigen::SparseMatrix<double> stiffness_;
};

/// Ball domains excise the core r < 1e-2 R behind a zero-flux sphere.
/// Throws BadResolution unless both cell counts are at least 16.
MeridianGrid build_grid(const DomainSpec& domain, int n, int nr, int ntheta, const GridStretch& stretch = {});

/// Lowest `count` eigenvalues of -Δ_h with Neumann conditions (dense solve;
/// meant for small grids).
std::vector<double> neumann_eigenvalues(const MeridianGrid& grid, int count);

struct FieldPair {
    std::vector<double> u;
    std::vector<double> v;
};

/// Plants the Λ-rescaled limit profile at the axis point x0 with spatial
/// scale ε/√c(x0). x0 must lie on the x_n axis.
FieldPair initial_guess_bump(const RadialProfile& prof, const Coefficients& coeffs, const Point& x0, double eps,
                             const MeridianGrid& grid);

struct SolveOptions {
    double newton_tolerance = 1e-10;
    /// Largest residual accepted once Newton stagnates at roundoff.
    double acceptable_residual = 1e-9;
    int max_newton_iterations = 60;
    int max_backtracks = 30;
    double positivity_floor = 1e-14;
    /// Converged solutions need energy above this.
    double energy_floor = 1e-12;
    /// (max - min) / max of u below this counts as a flat solution.
    double flatness_tolerance = 1e-3;
};

struct DiscreteSolution {
    MeridianGrid grid;
    std::vector<double> u;
    std::vector<double> v;
    double eps = 0.0;
    double residual_norm = 0.0;
    double c_eps = 0.0;
    GridIndex argmax_u;
    GridIndex argmax_v;
    int newton_iterations = 0;
    bool warm_started = false;

    double argmax_radius() const { return grid.radii()[static_cast<std::size_t>(argmax_u.i)]; }
    double argmax_angle() const { return grid.angles()[static_cast<std::size_t>(argmax_u.j)]; }
    /// Chebyshev distance in cells between the maxima of u and v.
    int argmax_separation() const;
};

/// Strong-form residual (ε²(-Δ_h u) + c u - b|v|^{q-1}v, same for v),
/// interleaved (u_0, v_0, u_1, ...), assembled through the stiffness matrix.
Eigen::VectorXd system_residual(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp,
                                double eps, const FieldPair& fields);

/// The same residual computed node by node from the face geometry, without
/// the assembled matrix.
Eigen::VectorXd system_residual_direct(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp,
                                       double eps, const FieldPair& fields);

Eigen::SparseMatrix<double> system_jacobian(const MeridianGrid& grid, const Coefficients& coeffs,
                                            const Exponents& exp, double eps, const FieldPair& fields);

DiscreteSolution solve_system(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp, double eps,
                              const FieldPair& init, const SolveOptions& opts = {});

/// Solves at each ε of a strictly decreasing sequence (consecutive ratio
/// >= 0.5), warm-starting from the previous solution rescaled about its
/// maximum.
std::vector<DiscreteSolution> continuation_sweep(const MeridianGrid& grid, const Coefficients& coeffs,
                                                 const Exponents& exp, const std::vector<double>& eps_sequence,
                                                 const RadialProfile& prof, const Point& x0,
                                                 const SolveOptions& opts = {});

/// c_ε = ∫ [ε² ∇u·∇v + c u v - a F(u) - b G(v)] over the full domain.
double discrete_energy(const MeridianGrid& grid, const Coefficients& coeffs, const Exponents& exp, double eps,
                       const FieldPair& fields);
double discrete_energy(const DiscreteSolution& sol, const Coefficients& coeffs, const Exponents& exp);

/// Fraction of ∫u² within Euclidean distance `radius` of node `centre`.
double mass_fraction_within(const MeridianGrid& grid, const std::vector<double>& u, GridIndex centre, double radius);

}  // namespace spikeforge
