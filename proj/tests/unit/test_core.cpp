#include "spikeforge/core.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spikeforge;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("exponent validation") {
    CHECK_NOTHROW(validate_exponents(2, 2, 3));
    CHECK_NOTHROW(validate_exponents(2, 3, 4));
    // 1/4 + 1/4 sits exactly on the hyperbola for n = 4
    CHECK(kind_of([] { validate_exponents(3, 3, 4); }) == ErrorKind::SubcriticalViolation);
    CHECK(kind_of([] { validate_exponents(1, 3, 3); }) == ErrorKind::RangeViolation);
    CHECK(kind_of([] { validate_exponents(3, 0.5, 3); }) == ErrorKind::RangeViolation);
    CHECK(kind_of([] { validate_exponents(2, 2, 2); }) == ErrorKind::RangeViolation);

    const auto e = validate_exponents(2, 3, 4);
    CHECK(e.pq_minus_one() == 5.0);
}

TEST_CASE("validation is monotone in the exponents") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pick(1.01, 8.0);
    for (int n = 3; n <= 6; ++n) {
        for (int k = 0; k < 200; ++k) {
            const double p = pick(rng);
            const double q = pick(rng);
            bool valid = true;
            try {
                validate_exponents(p, q, n);
            } catch (const Error&) {
                valid = false;
            }
            if (!valid) continue;
            std::uniform_real_distribution<double> shrink(0.0, 1.0);
            const double p2 = 1.0 + (p - 1.0) * shrink(rng);
            const double q2 = 1.0 + (q - 1.0) * shrink(rng);
            if (p2 <= 1.0 || q2 <= 1.0) continue;
            CHECK_NOTHROW(validate_exponents(p2, q2, n));
        }
    }
}

TEST_CASE("field evaluation examples") {
    Point x(3);
    x << 0.3, -1.0, 2.0;
    const auto one = CoefficientField::constant(1.0).evaluate(x);
    CHECK(one.value == 1.0);
    CHECK(one.gradient.norm() == 0.0);

    Point y(3);
    y << 0.0, 2.0, 0.0;
    CHECK(CoefficientField::power_of_radius(0.5, -1.0).value(y) == doctest::Approx(0.25).epsilon(1e-15));

    Point z(3);
    z << 3.0, 4.0, 0.0;
    const auto f = CoefficientField::power_of_radius(2.0, 1.0);
    const auto s = f.evaluate(z);
    CHECK(s.value == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(s.gradient[0] == doctest::Approx(6.0 / 5.0).epsilon(1e-15));
    CHECK(s.gradient[1] == doctest::Approx(8.0 / 5.0).epsilon(1e-15));
    CHECK(s.gradient[2] == 0.0);
    const double h = 1e-5;
    for (int i = 0; i < 3; ++i) {
        Point a = z, b = z;
        a[i] += h;
        b[i] -= h;
        const double fd = (f.value(a) - f.value(b)) / (2 * h);
        CHECK(std::abs(fd - s.gradient[i]) <= 1e-6 * std::max(1.0, std::abs(s.gradient[i])));
    }
}

TEST_CASE("gradients match central differences at random points") {
    const std::vector<CoefficientField> fields{
        CoefficientField::constant(2.5),
        CoefficientField::power_of_radius(0.5, -1.0),
        CoefficientField::power_of_radius(3.0, 0.75),
        CoefficientField::product(CoefficientField::constant(std::pow(2.0, -0.5)),
                                  CoefficientField::power_of_radius(1.0, -0.5)),
        CoefficientField::parse("mul(pow(2,1.5),pow(0.25,-2))"),
    };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (const auto& f : fields) {
        for (int k = 0; k < 100; ++k) {
            Point x(4);
            do {
                for (int i = 0; i < 4; ++i) x[i] = coord(rng);
            } while (x.norm() < 0.5);
            const auto s = f.evaluate(x);
            const double h = 1e-5;
            for (int i = 0; i < 4; ++i) {
                Point a = x, b = x;
                a[i] += h;
                b[i] -= h;
                const double fd = (f.value(a) - f.value(b)) / (2 * h);
                const double scale = std::max(s.gradient.norm(), 1e-300);
                CHECK(std::abs(fd - s.gradient[i]) <= 1e-6 * std::max(scale, 1.0));
            }
        }
    }
}

TEST_CASE("singular point and parsing") {
    const Point origin = Point::Zero(3);
    CHECK(kind_of([&] { CoefficientField::power_of_radius(1.0, -1.0).value(origin); }) == ErrorKind::SingularPoint);

    const auto f = CoefficientField::parse("mul(const(2),pow(1,-0.5))");
    CHECK(f.value_at_radius(4.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.radial_log_derivative(4.0) == doctest::Approx(-0.125).epsilon(1e-15));
    CHECK(kind_of([] { CoefficientField::parse("exp(1)"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { CoefficientField::constant(-1.0); }) == ErrorKind::RangeViolation);
}

TEST_CASE("coefficient bounds on a domain") {
    const auto dom = DomainSpec::annulus(0.5, 4.5, 3);
    const auto b = CoefficientField::power_of_radius(0.5, -1.0).bounds(dom);
    CHECK(b.lower == doctest::Approx(1.0 / 9.0));
    CHECK(b.upper == doctest::Approx(1.0));
    const auto c = CoefficientField::constant(3.0).bounds(DomainSpec::ball(2.0, 3));
    CHECK(c.lower == 3.0);
    CHECK(c.upper == 3.0);
}

TEST_CASE("domains and boundary components") {
    const auto ann = DomainSpec::annulus(1.0, 3.0, 3);
    const auto comps = ann.boundary_components();
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].kind == ComponentKind::Inner);
    CHECK(comps[0].normal_sign == 1);
    CHECK(comps[1].kind == ComponentKind::Outer);
    CHECK(comps[1].normal_sign == -1);
    CHECK(DomainSpec::ball(2.0, 4).boundary_components().size() == 1);

    Point x(3);
    x << 0.0, 0.0, 3.0;
    const Point nu = ann.inner_normal(x);
    CHECK(nu[2] == doctest::Approx(-1.0));
    x[2] = 2.0;
    CHECK(kind_of([&] { ann.inner_normal(x); }) == ErrorKind::NotOnBoundary);
    CHECK(ann.distance_to_boundary(2.5) == doctest::Approx(0.5));
    CHECK(kind_of([] { DomainSpec::annulus(2.0, 1.0, 3); }) == ErrorKind::RangeViolation);
    CHECK(kind_of([] { DomainSpec::ball(-1.0, 3); }) == ErrorKind::RangeViolation);

    const auto parsed = parse_domain("annulus(0.5,4.5)", 3);
    CHECK(parsed.min_radius() == 0.5);
    CHECK(parsed.max_radius() == 4.5);
    CHECK(parse_domain("ball(2)", 3).is_ball());
    CHECK(kind_of([] { parse_domain("cube(1)", 3); }) == ErrorKind::ConfigError);
}

TEST_CASE("unit sphere areas") {
    CHECK(unit_sphere_area(1) == doctest::Approx(2 * std::numbers::pi));
    CHECK(unit_sphere_area(2) == doctest::Approx(4 * std::numbers::pi));
    CHECK(unit_sphere_area(3) == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
}
