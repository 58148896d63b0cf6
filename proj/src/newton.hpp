#pragma once

// Damped Newton shared by the radial ground-state solver and the meridian
// solver. A problem supplies residual(x) and jacobian(x); the iterate is
// projected onto {x >= floor} on the entries flagged by positive_mask.

#include "spikeforge/error.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace spikeforge::detail {

struct NewtonSettings {
    double tolerance = 1e-10;
    /// Once the residual stagnates at roundoff, anything below this counts
    /// as converged.
    double acceptable_tolerance = 1e-8;
    int max_iterations = 60;
    int max_backtracks = 30;
    double positivity_floor = 1e-14;
    /// Armijo constant on the 2-norm of the residual.
    double sufficient_decrease = 1e-4;
};

struct NewtonOutcome {
    Eigen::VectorXd x;
    double residual_inf = 0.0;
    int iterations = 0;
    /// 2-norm of the residual after every accepted step, starting with x0.
    std::vector<double> history;
};

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

inline std::string format_short(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

template <class Problem>
NewtonOutcome damped_newton(const Problem& problem, Eigen::VectorXd x, const std::vector<bool>& positive_mask,
                            const NewtonSettings& settings) {
    auto project = [&](Eigen::VectorXd& y) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (positive_mask[static_cast<std::size_t>(i)] && !(y[i] >= settings.positivity_floor)) {
                y[i] = settings.positivity_floor;
            }
        }
    };

    NewtonOutcome out;
    Eigen::VectorXd F = problem.residual(x);
    double norm2 = F.norm();
    out.history.push_back(norm2);

    for (int it = 0; it < settings.max_iterations; ++it) {
        out.residual_inf = F.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(out.residual_inf)) {
            throw Error(ErrorKind::NewtonDivergence, "residual is not finite");
        }
        if (out.residual_inf <= settings.tolerance) {
            out.x = std::move(x);
            out.iterations = it;
            return out;
        }

        Eigen::SparseMatrix<double> J = problem.jacobian(x);
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(J);
        lu.factorize(J);
        if (lu.info() != Eigen::Success) {
            throw Error(ErrorKind::NewtonDivergence, "Jacobian factorization failed at iteration " + std::to_string(it));
        }
        const Eigen::VectorXd step = lu.solve(-F);

        double lambda = 1.0;
        bool accepted = false;
        bool projected_any = false;
        for (int bt = 0; bt <= settings.max_backtracks; ++bt) {
            Eigen::VectorXd trial = x + lambda * step;
            const Eigen::VectorXd before = trial;
            project(trial);
            projected_any = projected_any || (trial != before);
            Eigen::VectorXd Ft = problem.residual(trial);
            const double tn = Ft.norm();
            if (std::isfinite(tn) && tn <= (1.0 - settings.sufficient_decrease * lambda) * norm2) {
                x = std::move(trial);
                F = std::move(Ft);
                norm2 = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (out.residual_inf <= settings.acceptable_tolerance) {
                out.x = std::move(x);
                out.iterations = it;
                return out;
            }
            if (projected_any) {
                throw Error(ErrorKind::NonPositive,
                            "positivity projection blocked residual decrease at iteration " + std::to_string(it) +
                                " (|F|_inf = " + format_double(out.residual_inf) + ")");
            }
            throw Error(ErrorKind::NewtonDivergence,
                        "residual failed to contract after damping at iteration " + std::to_string(it) +
                            " (|F|_inf = " + format_double(out.residual_inf) + ")");
        }
        out.history.push_back(norm2);
    }
    out.residual_inf = F.lpNorm<Eigen::Infinity>();
    if (out.residual_inf <= settings.tolerance) {
        out.x = std::move(x);
        out.iterations = settings.max_iterations;
        return out;
    }
    throw Error(ErrorKind::NewtonDivergence,
                "no convergence within " + std::to_string(settings.max_iterations) + " Newton iterations");
}

}  // namespace spikeforge::detail
