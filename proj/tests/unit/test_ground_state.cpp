#include "spikeforge/ground_state.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace spikeforge;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

const RadialProfile& profile_333() {
    static const RadialProfile prof = solve_limit_ground_state(validate_exponents(3, 3, 3));
    return prof;
}

const RadialProfile& profile_233() {
    static const RadialProfile prof = solve_limit_ground_state(validate_exponents(2, 3, 3));
    return prof;
}

}  // namespace

TEST_CASE("scalar shooting oracle") {
    const auto w3 = solve_scalar_ground_state(3.0, 3);
    // regression value of w(0) for -Δw + w = w^3 in R^3
    CHECK(std::abs(w3.U.front() - 4.3373877) < 1e-6);
    CHECK(w3.residual_norm <= 1e-8);

    const auto w2 = solve_scalar_ground_state(2.0, 3);
    CHECK(w2.U.front() > 1.0);
    for (std::size_t i = 1; i + 1 < w2.size(); ++i) CHECK_MESSAGE(w2.U[i] < w2.U[i - 1], "i = " << i);

    const auto d = decay_rate(w3);
    CHECK(std::abs(d.delta_U - 1.0) <= 0.1);

    CHECK_THROWS_AS(solve_scalar_ground_state(5.0, 3), Error);
}

TEST_CASE("system ground state on the diagonal matches the scalar oracle") {
    const auto& sys = profile_333();
    const auto scalar = solve_scalar_ground_state(3.0, 3);
    REQUIRE(sys.size() == scalar.size());
    CHECK(max_diff(sys.U, scalar.U) <= 1e-6);
    CHECK(max_diff(sys.U, sys.V) <= 1e-6);
    CHECK(sys.residual_norm <= 1e-8);
}

TEST_CASE("off-diagonal ground state invariants") {
    const auto& prof = profile_233();
    CHECK(prof.residual_norm <= 1e-8);
    CHECK(limit_residual_norm(prof) <= 1e-8);
    CHECK(prof.dU.front() == 0.0);
    CHECK(prof.dV.front() == 0.0);
    CHECK(prof.U.back() == 0.0);
    CHECK(prof.V.back() == 0.0);
    CHECK(max_diff(prof.U, prof.V) > 0.1);
    for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
        CHECK(prof.U[i] > 0.0);
        CHECK(prof.V[i] > 0.0);
    }
    for (std::size_t i = 2; i < prof.size(); ++i) {
        CHECK(prof.U[i] < prof.U[i - 1]);
        CHECK(prof.V[i] < prof.V[i - 1]);
    }
}

TEST_CASE("Newton residual decreases monotonically") {
    std::vector<double> history;
    const auto prof = solve_limit_ground_state(validate_exponents(2, 3, 3), {}, &history);
    REQUIRE(history.size() >= 2);
    for (std::size_t k = 1; k < history.size(); ++k) CHECK(history[k] < history[k - 1]);
    CHECK(prof.residual_norm <= 1e-8);
}

TEST_CASE("energy is half the full-space integral and grid stable") {
    const auto& prof = profile_333();
    const double p = 3.0, q = 3.0;
    const int n = 3;
    // direct trapezoid over R^n of the same radial integrand
    double full = 0.0;
    for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
        auto g = [&](std::size_t k) {
            const double r = prof.r[k];
            return (prof.dU[k] * prof.dV[k] + prof.U[k] * prof.V[k] - std::pow(prof.U[k], p + 1) / (p + 1) -
                    std::pow(prof.V[k], q + 1) / (q + 1)) *
                   std::pow(r, n - 1);
        };
        full += 0.5 * (g(i) + g(i + 1)) * (prof.r[i + 1] - prof.r[i]);
    }
    full *= unit_sphere_area(n - 1);
    CHECK(energy_I_infinity(prof) == doctest::Approx(full / 2).epsilon(1e-12));

    GroundStateOptions fine;
    fine.cells = 8192;
    const double e1 = energy_I_infinity(prof);
    const double e2 = energy_I_infinity(solve_limit_ground_state(validate_exponents(3, 3, 3), fine));
    CHECK(std::abs(e1 - e2) / e2 <= 1e-3);
}

TEST_CASE("energy is positive across a sweep of exponents") {
    for (double p : {2.0, 2.5, 3.0}) {
        for (double q : {2.0, 2.5, 3.0}) {
            const auto prof = solve_limit_ground_state(validate_exponents(p, q, 3));
            CHECK_MESSAGE(energy_I_infinity(prof) > 0.0, "p=" << p << " q=" << q);
            CHECK(half_space_moments(prof).grad_moment > 0.0);
        }
    }
}

TEST_CASE("hemisphere constants against Monte-Carlo") {
    // Uniform points on S^2 from normalized Gaussians; mean of max(z,0)^k
    // times |S^2| estimates the hemisphere moment.
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> g(0.0, 1.0);
    const long N = 10'000'000;
    double s1 = 0.0, s3 = 0.0;
    for (long i = 0; i < N; ++i) {
        const double x = g(rng), y = g(rng), z = g(rng);
        const double w = z / std::sqrt(x * x + y * y + z * z);
        if (w > 0) {
            s1 += w;
            s3 += w * w * w;
        }
    }
    const double area = 4 * std::numbers::pi;
    const double mc1 = area * s1 / N;
    const double mc3 = area * s3 / N;
    CHECK(std::abs(mc1 - hemisphere_direction_moment(3, 1)) / hemisphere_direction_moment(3, 1) <= 1e-3);
    CHECK(std::abs(mc3 - hemisphere_direction_moment(3, 3)) / hemisphere_direction_moment(3, 3) <= 1e-3);
    CHECK(hemisphere_direction_moment(3, 1) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("moment decomposition and trace oracle") {
    const auto& prof = profile_233();
    const auto m = half_space_moments(prof);
    CHECK(std::abs(m.grad_moment - m.normal_moment - 2 * m.tangential_moment) <= 1e-12 * m.grad_moment);

    // ½∫_{R^2} U V by tensor Simpson on [-L, L]^2 with Hermite interpolation
    const double L = prof.r_max;
    const int N = 2400;
    const double h = 2 * L / N;
    std::vector<double> w(N + 1);
    for (int i = 0; i <= N; ++i) w[i] = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    double sum = 0.0;
    for (int i = 0; i <= N; ++i) {
        const double x = -L + i * h;
        for (int j = 0; j <= N; ++j) {
            const double y = -L + j * h;
            const auto s = prof.at(std::hypot(x, y));
            sum += w[i] * w[j] * s.U * s.V;
        }
    }
    const double oracle = 0.5 * sum * h * h / 9.0;
    CHECK(std::abs(m.trace - oracle) / oracle <= 1e-4);
}

TEST_CASE("Pohozaev examples") {
    const auto r333 = verify_pohozaev(profile_333());
    CHECK(r333.tangential_ratio.relative_residual <= 1e-3);
    const auto r233 = verify_pohozaev(profile_233());
    CHECK(r233.weighted_energy.relative_residual <= 1e-3);
    // the two stated ratios add up to one
    const auto m = half_space_moments(profile_233());
    CHECK((m.normal_moment + 2 * m.tangential_moment) == doctest::Approx(m.grad_moment).epsilon(1e-12));
}

TEST_CASE("moments are insensitive to the truncation radius") {
    const auto e = validate_exponents(3, 3, 3);
    GroundStateOptions wide;
    wide.r_max = 30.0;
    wide.cells = 6144;  // same h
    const auto a = half_space_moments(profile_333());
    const auto b = half_space_moments(solve_limit_ground_state(e, wide));
    auto close = [](double x, double y) { return std::abs(x - y) <= 5e-3 * std::abs(y); };
    CHECK(close(a.I_infinity, b.I_infinity));
    CHECK(close(a.grad_moment, b.grad_moment));
    CHECK(close(a.normal_moment, b.normal_moment));
    CHECK(close(a.tangential_moment, b.tangential_moment));
    CHECK(close(a.F_moment, b.F_moment));
    CHECK(close(a.G_moment, b.G_moment));
    CHECK(close(a.UV_moment, b.UV_moment));
    CHECK(close(a.trace, b.trace));
}

TEST_CASE("decay rates") {
    const auto& prof = profile_233();
    const auto d = decay_rate(prof);
    CHECK(std::abs(d.delta_U - 1.0) <= 0.1);
    CHECK(std::abs(d.delta_V - 1.0) <= 0.1);

    // u(x) = U(√c x): same samples on radii shrunk by √c
    const double c = 4.0;
    RadialProfile scaled = prof;
    for (auto& r : scaled.r) r /= std::sqrt(c);
    scaled.r_max /= std::sqrt(c);
    scaled.h /= std::sqrt(c);
    const auto ds = decay_rate(scaled);
    CHECK(ds.delta_U == doctest::Approx(std::sqrt(c) * d.delta_U).epsilon(1e-10));

    GroundStateOptions shortr;
    shortr.r_max = 4.0;
    shortr.cells = 1024;
    const auto truncated = solve_limit_ground_state(validate_exponents(3, 3, 3), shortr);
    try {
        decay_rate(truncated);
        FAIL("expected TailTooShort");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TailTooShort);
    }
}

TEST_CASE("degenerate exponents are rejected before solving") {
    try {
        solve_limit_ground_state(validate_exponents(1, 1, 3));
        FAIL("expected RangeViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RangeViolation);
    }
}
