#include "spikeforge/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spikeforge {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::RangeViolation: return "RangeViolation";
        case ErrorKind::SubcriticalViolation: return "SubcriticalViolation";
        case ErrorKind::SingularPoint: return "SingularPoint";
        case ErrorKind::ShootingFailure: return "ShootingFailure";
        case ErrorKind::NewtonDivergence: return "NewtonDivergence";
        case ErrorKind::NonPositive: return "NonPositive";
        case ErrorKind::TailTooShort: return "TailTooShort";
        case ErrorKind::NotOnBoundary: return "NotOnBoundary";
        case ErrorKind::BadResolution: return "BadResolution";
        case ErrorKind::CollapsedToTrivial: return "CollapsedToTrivial";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
        case ErrorKind::PreconditionViolation: return "PreconditionViolation";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

std::string_view to_string(ComponentKind kind) noexcept {
    return kind == ComponentKind::Inner ? "inner" : "outer";
}

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

Exponents validate_exponents(double p, double q, int n) {
    if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q)) {
        throw Error(ErrorKind::RangeViolation,
                    "exponents must satisfy p > 1 and q > 1 (got p=" + fmt_num(p) + ", q=" + fmt_num(q) + ")");
    }
    if (n < 3) {
        throw Error(ErrorKind::RangeViolation, "dimension must satisfy n >= 3 (got n=" + std::to_string(n) + ")");
    }
    const double lhs = 1.0 / (p + 1.0) + 1.0 / (q + 1.0);
    const double rhs = static_cast<double>(n - 2) / static_cast<double>(n);
    if (!(lhs > rhs)) {
        throw Error(ErrorKind::SubcriticalViolation,
                    "1/(p+1) + 1/(q+1) = " + fmt_num(lhs) + " is not above (n-2)/n = " + fmt_num(rhs));
    }
    return Exponents(p, q, n);
}

double unit_sphere_area(int k) {
    const double m = static_cast<double>(k + 1);
    return 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
}

// ---------------------------------------------------------------------------

DomainSpec::DomainSpec(Shape shape, int n) : shape_(shape), n_(n) {
    if (n < 2) {
        throw Error(ErrorKind::RangeViolation, "domain dimension must be at least 2");
    }
    if (const auto* a = std::get_if<Annulus>(&shape_)) {
        if (!(a->inner > 0.0) || !(a->outer > a->inner) || !std::isfinite(a->outer)) {
            throw Error(ErrorKind::RangeViolation, "annulus requires 0 < inner < outer");
        }
    } else {
        const auto& b = std::get<Ball>(shape_);
        if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
            throw Error(ErrorKind::RangeViolation, "ball requires radius > 0");
        }
    }
}

double DomainSpec::min_radius() const noexcept {
    if (const auto* a = std::get_if<Annulus>(&shape_)) return a->inner;
    return 0.0;
}

double DomainSpec::max_radius() const noexcept {
    if (const auto* a = std::get_if<Annulus>(&shape_)) return a->outer;
    return std::get<Ball>(shape_).radius;
}

std::vector<BoundaryComponent> DomainSpec::boundary_components() const {
    if (const auto* a = std::get_if<Annulus>(&shape_)) {
        return {{ComponentKind::Inner, a->inner, +1}, {ComponentKind::Outer, a->outer, -1}};
    }
    return {{ComponentKind::Outer, std::get<Ball>(shape_).radius, -1}};
}

std::optional<BoundaryComponent> DomainSpec::component_at(double r, double tol) const {
    for (const auto& comp : boundary_components()) {
        if (std::abs(r - comp.radius) <= tol * comp.radius) return comp;
    }
    return std::nullopt;
}

double DomainSpec::distance_to_boundary(double r) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& comp : boundary_components()) d = std::min(d, std::abs(r - comp.radius));
    return d;
}

Point DomainSpec::inner_normal(const Point& x) const {
    const double r = x.norm();
    const auto comp = component_at(r);
    if (!comp) {
        throw Error(ErrorKind::NotOnBoundary, "point at radius " + fmt_num(r) + " is not on " + describe());
    }
    return (static_cast<double>(comp->normal_sign) / r) * x;
}

std::string DomainSpec::describe() const {
    if (const auto* a = std::get_if<Annulus>(&shape_)) {
        return "annulus(" + fmt_num(a->inner) + "," + fmt_num(a->outer) + ")";
    }
    return "ball(" + fmt_num(std::get<Ball>(shape_).radius) + ")";
}

// ---------------------------------------------------------------------------

CoefficientField CoefficientField::constant(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw Error(ErrorKind::RangeViolation, "constant coefficient must be positive and finite");
    }
    return CoefficientField(ConstantForm{k}, k, 0.0);
}

CoefficientField CoefficientField::power_of_radius(double scale, double exponent) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(exponent)) {
        throw Error(ErrorKind::RangeViolation, "power-of-radius coefficient needs a positive finite scale");
    }
    return CoefficientField(PowerOfRadiusForm{scale, exponent}, scale, exponent);
}

CoefficientField CoefficientField::product(const CoefficientField& lhs, const CoefficientField& rhs) {
    return CoefficientField(ProductForm{std::make_shared<const CoefficientField>(lhs),
                                        std::make_shared<const CoefficientField>(rhs)},
                            lhs.scale_ * rhs.scale_, lhs.exponent_ + rhs.exponent_);
}

void CoefficientField::check_radius(double r) const {
    if (exponent_ != 0.0 && !(r > 0.0)) {
        throw Error(ErrorKind::SingularPoint, "coefficient " + describe() + " is singular or vanishes at |x| = 0");
    }
}

double CoefficientField::value_at_radius(double r) const {
    if (exponent_ == 0.0) return scale_;
    check_radius(r);
    return scale_ * std::pow(r, exponent_);
}

double CoefficientField::radial_derivative(double r) const {
    if (exponent_ == 0.0) return 0.0;
    check_radius(r);
    return scale_ * exponent_ * std::pow(r, exponent_ - 1.0);
}

double CoefficientField::radial_log_derivative(double r) const {
    if (exponent_ == 0.0) return 0.0;
    check_radius(r);
    return exponent_ / r;
}

FieldSample CoefficientField::evaluate(const Point& x) const {
    const double r = x.norm();
    FieldSample s{value_at_radius(r), Point::Zero(x.size())};
    if (exponent_ != 0.0) {
        // grad(s r^e) = s e r^{e-2} x
        s.gradient = (scale_ * exponent_ * std::pow(r, exponent_ - 2.0)) * x;
    }
    return s;
}

double CoefficientField::value(const Point& x) const { return value_at_radius(x.norm()); }

FieldBounds CoefficientField::bounds(const DomainSpec& domain) const {
    const double r0 = domain.min_radius();
    const double r1 = domain.max_radius();
    if (exponent_ == 0.0) return {scale_, scale_};
    if (!(r0 > 0.0)) {
        throw Error(ErrorKind::SingularPoint,
                    "coefficient " + describe() + " is not bounded away from 0 and infinity on " + domain.describe());
    }
    const double v0 = value_at_radius(r0);
    const double v1 = value_at_radius(r1);
    return {std::min(v0, v1), std::max(v0, v1)};
}

std::string CoefficientField::describe() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantForm>) {
                return "const(" + fmt_num(f.k) + ")";
            } else if constexpr (std::is_same_v<T, PowerOfRadiusForm>) {
                return "pow(" + fmt_num(f.scale) + "," + fmt_num(f.exponent) + ")";
            } else {
                return "mul(" + f.lhs->describe() + "," + f.rhs->describe() + ")";
            }
        },
        form_);
}

// ---------------------------------------------------------------------------
// Descriptor parsing

namespace {

class DescriptorParser {
public:
    explicit DescriptorParser(std::string_view text) : text_(text) {}

    CoefficientField field() {
        const std::string head = identifier();
        expect('(');
        CoefficientField out = CoefficientField::constant(1.0);
        if (head == "const") {
            out = CoefficientField::constant(number());
        } else if (head == "pow") {
            const double s = number();
            expect(',');
            out = CoefficientField::power_of_radius(s, number());
        } else if (head == "mul") {
            const auto lhs = field();
            expect(',');
            out = CoefficientField::product(lhs, field());
        } else {
            fail("unknown coefficient form '" + head + "'");
        }
        expect(')');
        return out;
    }

    DomainSpec domain(int n) {
        const std::string head = identifier();
        expect('(');
        if (head == "annulus") {
            const double a = number();
            expect(',');
            const double b = number();
            expect(')');
            return DomainSpec::annulus(a, b, n);
        }
        if (head == "ball") {
            const double r = number();
            expect(')');
            return DomainSpec::ball(r, n);
        }
        fail("unknown domain shape '" + head + "'");
    }

    void finish() {
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::ConfigError,
                    "cannot parse '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected identifier");
        return std::string(text_.substr(start, pos_ - start));
    }

    double number() {
        skip_ws();
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc()) fail("expected number");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

CoefficientField CoefficientField::parse(const std::string& descriptor) {
    DescriptorParser parser(descriptor);
    auto out = parser.field();
    parser.finish();
    return out;
}

DomainSpec parse_domain(const std::string& descriptor, int n) {
    DescriptorParser parser(descriptor);
    auto out = parser.domain(n);
    parser.finish();
    return out;
}

}  // namespace spikeforge
