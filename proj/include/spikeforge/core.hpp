#pragma once

#include "spikeforge/error.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spikeforge {

using Point = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Exponents
// ---------------------------------------------------------------------------

/// Exponent triple (p, q, n) lying strictly below the critical hyperbola
/// 1/(p+1) + 1/(q+1) > (n-2)/n. Only obtainable through validate_exponents().
class Exponents {
public:
    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    int n() const noexcept { return n_; }

    /// pq - 1, strictly positive for every valid triple.
    double pq_minus_one() const noexcept { return p_ * q_ - 1.0; }

    friend Exponents validate_exponents(double p, double q, int n);
    friend bool operator==(const Exponents&, const Exponents&) = default;

private:
    Exponents(double p, double q, int n) : p_(p), q_(q), n_(n) {}
    double p_;
    double q_;
    int n_;
};

/// Throws RangeViolation (p <= 1, q <= 1, n < 3) or SubcriticalViolation.
Exponents validate_exponents(double p, double q, int n);

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

struct Annulus {
    double inner;
    double outer;
};

struct Ball {
    double radius;
};

enum class ComponentKind { Inner, Outer };

/// One sphere of the boundary. The inward unit normal at x is
/// `normal_sign * x / |x|`.
struct BoundaryComponent {
    ComponentKind kind;
    double radius;
    int normal_sign;
};

std::string_view to_string(ComponentKind kind) noexcept;

class DomainSpec {
public:
    using Shape = std::variant<Annulus, Ball>;

    DomainSpec(Shape shape, int n);

    static DomainSpec annulus(double inner, double outer, int n) { return {Annulus{inner, outer}, n}; }
    static DomainSpec ball(double radius, int n) { return {Ball{radius}, n}; }

    const Shape& shape() const noexcept { return shape_; }
    int n() const noexcept { return n_; }
    bool is_ball() const noexcept { return std::holds_alternative<Ball>(shape_); }

    /// Closure of the radial range: [inner, outer] or [0, R].
    double min_radius() const noexcept;
    double max_radius() const noexcept;

    std::vector<BoundaryComponent> boundary_components() const;

    /// Component containing a point at radius r, if |r - radius| <= tol * radius.
    std::optional<BoundaryComponent> component_at(double r, double tol = 1e-9) const;

    /// Distance from radius r to the nearest boundary sphere.
    double distance_to_boundary(double r) const;

    /// Inward unit normal at a boundary point; NotOnBoundary otherwise.
    Point inner_normal(const Point& x) const;

    std::string describe() const;

private:
    Shape shape_;
    int n_;
};

// ---------------------------------------------------------------------------
// Coefficient fields
// ---------------------------------------------------------------------------

class CoefficientField;

struct ConstantForm {
    double k;
};

struct PowerOfRadiusForm {
    double scale;
    double exponent;
};

struct ProductForm {
    std::shared_ptr<const CoefficientField> lhs;
    std::shared_ptr<const CoefficientField> rhs;
};

struct FieldSample {
    double value;
    Point gradient;
};

struct FieldBounds {
    double lower;
    double upper;
};

/// Positive radial weight from the closed family {k, s|x|^e, products}.
/// Every member collapses to a single power law `scale * |x|^exponent`,
/// which is what the evaluators use.
class CoefficientField {
public:
    using Form = std::variant<ConstantForm, PowerOfRadiusForm, ProductForm>;

    static CoefficientField constant(double k);
    static CoefficientField power_of_radius(double scale, double exponent);
    static CoefficientField product(const CoefficientField& lhs, const CoefficientField& rhs);

    /// Parses `const(k)`, `pow(s,e)` and `mul(F,G)`.
    static CoefficientField parse(const std::string& descriptor);

    const Form& form() const noexcept { return form_; }
    double scale() const noexcept { return scale_; }
    double exponent() const noexcept { return exponent_; }
    bool is_constant() const noexcept { return exponent_ == 0.0; }

    double value_at_radius(double r) const;
    /// d/dr of the value.
    double radial_derivative(double r) const;
    /// d/dr log(value) = exponent / r.
    double radial_log_derivative(double r) const;

    FieldSample evaluate(const Point& x) const;
    double value(const Point& x) const;

    /// K1 <= value <= K2 on the closure of `domain`.
    FieldBounds bounds(const DomainSpec& domain) const;

    std::string describe() const;

private:
    CoefficientField(Form form, double scale, double exponent)
        : form_(std::move(form)), scale_(scale), exponent_(exponent) {}

    void check_radius(double r) const;

    Form form_;
    double scale_;
    double exponent_;
};

/// Parses `annulus(a,b)` or `ball(R)`.
DomainSpec parse_domain(const std::string& descriptor, int n);

/// Surface area of the unit sphere S^{k} in R^{k+1}.
double unit_sphere_area(int k);

}  // namespace spikeforge
