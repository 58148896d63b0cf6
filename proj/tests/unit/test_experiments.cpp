#include "spikeforge/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spikeforge;

namespace {

const Exponents& e333() {
    static const Exponents e = validate_exponents(3, 3, 3);
    return e;
}

int error_kind(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return static_cast<int>(e.kind());
    }
    return -1;
}

// Solutions carrying only ε, c_ε and the argmax; enough for the fit and
// the regime readout.
std::vector<DiscreteSolution> synthetic(const MeridianGrid& g, const std::vector<double>& eps,
                                        const std::vector<double>& energy, const std::vector<GridIndex>& argmax) {
    std::vector<DiscreteSolution> out;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        DiscreteSolution s{g, {}, {}, eps[k], 0.0, energy[k], argmax[k], argmax[k], 0, false};
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("Hopf presets") {
    const auto p = hopf_preset(3, e333(), 1.0, 3.0);
    CHECK(p.id == "hopf-s1");
    CHECK(p.orbit == "S^1");
    CHECK(p.domain.min_radius() == 0.5);
    CHECK(p.domain.max_radius() == 4.5);
    for (double r : {0.5, 1.0, 4.5}) {
        CHECK(p.coeffs.a.value_at_radius(r) == doctest::Approx(1.0 / (2.0 * r)));
        CHECK(p.coeffs.c.value_at_radius(r) == doctest::Approx(1.0 / (2.0 * r)));
        // a = b = c gives Λ = c^{1-n/2} = √(2r)
        CHECK(lambda_at_radius(p.coeffs, r, e333()) == doctest::Approx(std::sqrt(2.0 * r)));
    }
    CHECK(hopf_preset(5, validate_exponents(2, 2, 5), 1.0, 3.0).id == "hopf-s3");
    CHECK(hopf_preset(9, validate_exponents(1.5, 1.5, 9), 1.0, 3.0).orbit == "S^7");
    CHECK(error_kind([] { hopf_preset(4, e333(), 1.0, 3.0); }) == static_cast<int>(ErrorKind::UnsupportedDimension));
    CHECK(error_kind([] { hopf_preset(3, e333(), 3.0, 1.0); }) == static_cast<int>(ErrorKind::RangeViolation));
}

TEST_CASE("weighted annulus lambda is a power of 2r") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ab(0.0, 2.5), rad(0.5, 4.5);
    for (int t = 0; t < 20; ++t) {
        const double alpha = ab(rng), beta = ab(rng);
        const auto p = weighted_annulus_preset(alpha, beta, e333(), 0.5, 4.5);
        const double E = lambda_exponent(alpha, beta, e333());
        for (int s = 0; s < 5; ++s) {
            const double r = rad(rng);
            CHECK(lambda_at_radius(p.coeffs, r, e333()) == doctest::Approx(std::pow(2.0 * r, E / 2.0)).epsilon(1e-12));
        }
    }
    CHECK(error_kind([] { weighted_annulus_preset(1, 1, validate_exponents(2, 2, 4), 1, 2); }) ==
          static_cast<int>(ErrorKind::PreconditionViolation));
}

TEST_CASE("lambda exponent and classification") {
    CHECK(lambda_exponent(0.5, 0.5, e333()) == doctest::Approx(0.5));
    CHECK(lambda_exponent(2.0, 2.0, e333()) == doctest::Approx(-1.0));
    CHECK(lambda_exponent(0.0, 0.0, e333()) == 1.0);
    const auto e223 = validate_exponents(2, 2, 3);
    CHECK(lambda_exponent(1.0, 0.0, e223) == 0.0);

    CHECK(regime_classify(0.5, 0.5, e333()) == Site::InnerBoundary);
    CHECK(regime_classify(2.0, 2.0, e333()) == Site::OuterBoundary);
    CHECK(regime_classify(1.0, 0.0, e223) == Site::Degenerate);
    CHECK(regime_classify(1.0 + 1e-9, 0.0, e223) == Site::OuterBoundary);
    CHECK(regime_classify(1.0 + 1e-9, 0.0, e223, 1e-6) == Site::Degenerate);

    // the sign of E decides which sphere minimizes Λ
    for (double ab : {0.25, 0.75, 1.5, 2.5}) {
        const auto p = weighted_annulus_preset(ab, ab, e333(), 0.5, 4.5);
        const bool inner_smaller =
            lambda_at_radius(p.coeffs, 0.5, e333()) < lambda_at_radius(p.coeffs, 4.5, e333());
        CHECK((regime_classify(ab, ab, e333()) == Site::InnerBoundary) == inner_smaller);
    }
}

TEST_CASE("degenerate constants reproduce the boundary score") {
    const auto exp = validate_exponents(2, 2, 3);
    const auto prof = solve_limit_ground_state(exp);
    const auto m = half_space_moments(prof);
    const auto p = weighted_annulus_preset(1.0, 0.0, exp, 0.5, 4.5);
    const auto k = degenerate_constants(1.0, 0.0, exp, m);
    for (double r : {0.5, 4.5}) {
        const Point x = boundary_point(3, r, 0.0);
        const auto cand = candidate_at(p.domain, p.coeffs, exp, m, x);
        const double xnu = x.dot(p.domain.inner_normal(x));
        CHECK(cand.score ==
              doctest::Approx(k.C1 * cand.H * std::sqrt(r) + k.C2 * xnu * std::pow(r, -1.5)).epsilon(1e-12));
    }
    CHECK(error_kind([&] { degenerate_constants(0.5, 0.5, e333(), m); }) ==
          static_cast<int>(ErrorKind::PreconditionViolation));
}

TEST_CASE("expansion fit recovers a synthetic line") {
    const auto g = build_grid(DomainSpec::annulus(1.0, 2.0, 3), 3, 16, 16);
    const std::vector<double> eps{0.3, 0.2, 0.15, 0.1, 0.07};
    const double L = 12.5, S = -4.0;
    std::vector<double> energy;
    for (double e : eps) energy.push_back(std::pow(e, 3) * (L + S * e));
    const auto sweep = synthetic(g, eps, energy, std::vector<GridIndex>(eps.size(), GridIndex{16, 0}));

    Candidate at{ComponentKind::Outer, 2.0, boundary_point(3, 2.0, 0.0), 0.5, 3.0, 1.0, 0.0, 0.0};
    // expected plus slope: -[(n-1) H γ + η] = -(2 * 0.5 * 3 + 1) = -4
    const auto fit = energy_expansion_fit(sweep, at, 12.0);
    CHECK(fit.intercept == doctest::Approx(L).epsilon(1e-12));
    CHECK(fit.slope == doctest::Approx(S).epsilon(1e-10));
    CHECK(fit.fit_residual <= 1e-12);
    CHECK(fit.points == 5);
    CHECK(fit.intercept_error == doctest::Approx(0.5 / 12.0));
    CHECK(fit.slope_expected_plus == doctest::Approx(-4.0));
    CHECK(fit.slope_expected_minus == doctest::Approx(2.0));
    CHECK(fit.slope_error_plus <= 1e-10);
    CHECK(fit.convention == "plus");

    const auto short_sweep = synthetic(g, {0.3, 0.2, 0.1}, {1, 1, 1}, std::vector<GridIndex>(3, GridIndex{16, 0}));
    CHECK(error_kind([&] { energy_expansion_fit(short_sweep, at, 1.0); }) ==
          static_cast<int>(ErrorKind::InsufficientData));
}

TEST_CASE("regime readout from the maxima") {
    const auto dom = DomainSpec::annulus(1.0, 2.0, 3);
    const auto g = build_grid(dom, 3, 16, 16);
    const std::vector<double> eps{0.3, 0.2, 0.1};
    const std::vector<double> energy{1, 1, 1};
    CHECK(observed_site(dom, synthetic(g, eps, energy, {{8, 0}, {0, 3}, {0, 0}})) == Site::InnerBoundary);
    CHECK(observed_site(dom, synthetic(g, eps, energy, {{0, 0}, {16, 3}, {16, 0}})) == Site::OuterBoundary);
    CHECK(observed_site(dom, synthetic(g, eps, energy, {{0, 0}, {16, 0}, {0, 0}})) == Site::Interior);
    CHECK(observed_site(dom, synthetic(g, eps, energy, {{0, 0}, {8, 0}, {8, 0}})) == Site::Interior);
    CHECK(error_kind([&] { observed_site(dom, synthetic(g, {0.1}, {1}, {{0, 0}})); }) ==
          static_cast<int>(ErrorKind::InsufficientData));
}

TEST_CASE("a coarse Hopf experiment concentrates on the inner sphere") {
    SweepSettings st;
    st.eps = {0.3, 0.21, 0.15, 0.1};
    st.radial_cells = 64;
    st.angular_cells = 64;
    st.threads = 2;
    const auto rep = run_experiment(hopf_preset(3, e333(), 1.0, 3.0), st);
    CHECK(rep.prediction.regime == Regime::LambdaDriven);
    REQUIRE(rep.prediction.predicted_components().size() == 1);
    CHECK(rep.prediction.predicted_components()[0] == ComponentKind::Inner);
    REQUIRE(rep.runs.size() == 2);
    CHECK(rep.winner().ok());
    CHECK(rep.winner().component.kind == ComponentKind::Inner);
    CHECK(rep.observed == Site::InnerBoundary);
    CHECK(rep.localization.on_boundary_at_two_smallest);
    CHECK(rep.fit.has_value());
    CHECK(!rep.verdicts.empty());

    st.eps = {0.3, 0.2, 0.1};
    CHECK(error_kind([&] { run_experiment(hopf_preset(3, e333(), 1.0, 3.0), st); }) ==
          static_cast<int>(ErrorKind::InsufficientData));
}
