#include "spikeforge/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spikeforge {

ConcentrationExponents concentration_exponents(const Exponents& exp) {
    const double d = exp.pq_minus_one();
    return {1.0 / d, exp.p() / d, exp.q() / d, 1.0 / d};
}

double lambda_frozen(double a0, double b0, double c0, const Exponents& exp) {
    const auto ce = concentration_exponents(exp);
    const double n = exp.n();
    return std::pow(b0 / c0, -(ce.alpha1 + ce.alpha2)) * std::pow(a0 / c0, -(ce.beta1 + ce.beta2)) *
           std::pow(c0, 1.0 - 0.5 * n);
}

double lambda_at_radius(const Coefficients& coeffs, double r, const Exponents& exp) {
    return lambda_frozen(coeffs.a.value_at_radius(r), coeffs.b.value_at_radius(r), coeffs.c.value_at_radius(r),
                         exp);
}

double lambda_value(const Coefficients& coeffs, const Point& x, const Exponents& exp) {
    return lambda_at_radius(coeffs, x.norm(), exp);
}

// ---------------------------------------------------------------------------

RadialProfile::Sample AnisotropicProfile::at(double s) const {
    const auto w = unit->at(s * frequency);
    return {amplitude_u * w.U, amplitude_v * w.V, amplitude_u * frequency * w.dU, amplitude_v * frequency * w.dV};
}

AnisotropicProfile rescale_profile(const RadialProfile& prof, double a0, double b0, double c0) {
    if (!(a0 > 0.0) || !(b0 > 0.0) || !(c0 > 0.0)) {
        throw Error(ErrorKind::RangeViolation, "frozen coefficients must be positive");
    }
    const auto ce = concentration_exponents(prof.exponents);
    AnisotropicProfile out;
    out.unit = &prof;
    out.a0 = a0;
    out.b0 = b0;
    out.c0 = c0;
    out.amplitude_u = std::pow(b0 / c0, -ce.alpha1) * std::pow(a0 / c0, -ce.beta1);
    out.amplitude_v = std::pow(b0 / c0, -ce.alpha2) * std::pow(a0 / c0, -ce.beta2);
    out.frequency = std::sqrt(c0);
    const std::size_t sz = prof.size();
    out.r.resize(sz);
    out.u.resize(sz);
    out.v.resize(sz);
    out.du.resize(sz);
    out.dv.resize(sz);
    for (std::size_t i = 0; i < sz; ++i) {
        out.r[i] = prof.r[i] / out.frequency;
        out.u[i] = out.amplitude_u * prof.U[i];
        out.v[i] = out.amplitude_v * prof.V[i];
        out.du[i] = out.amplitude_u * out.frequency * prof.dU[i];
        out.dv[i] = out.amplitude_v * out.frequency * prof.dV[i];
    }
    return out;
}

namespace {

double frozen_density(const AnisotropicProfile& prof, double u, double v, double du, double dv) {
    const double p = prof.unit->exponents.p();
    const double q = prof.unit->exponents.q();
    return du * dv + prof.c0 * u * v - prof.a0 * std::pow(u, p + 1.0) / (p + 1.0) -
           prof.b0 * std::pow(v, q + 1.0) / (q + 1.0);
}

}  // namespace

double frozen_energy(const AnisotropicProfile& prof) {
    const int n = prof.unit->exponents.n();
    const std::size_t sz = prof.r.size();
    double s = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        const double w = (i == 0 || i + 1 == sz) ? 0.5 : 1.0;
        s += w * frozen_density(prof, prof.u[i], prof.v[i], prof.du[i], prof.dv[i]) * std::pow(prof.r[i], n - 1);
    }
    const double h = prof.r[1] - prof.r[0];
    return 0.5 * unit_sphere_area(n - 1) * s * h;
}

double frozen_energy_resampled(const AnisotropicProfile& prof, int intervals) {
    if (intervals < 2 || intervals % 2 != 0) {
        throw Error(ErrorKind::PreconditionViolation, "Simpson quadrature needs an even number of intervals");
    }
    const int n = prof.unit->exponents.n();
    const double R = prof.r.back();
    const double h = R / intervals;
    double s = 0.0;
    for (int k = 0; k <= intervals; ++k) {
        const double x = h * k;
        const auto w = prof.at(x);
        const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        s += weight * frozen_density(prof, w.U, w.V, w.dU, w.dV) * std::pow(x, n - 1);
    }
    return 0.5 * unit_sphere_area(n - 1) * s * h / 3.0;
}

double frozen_residual_norm(const AnisotropicProfile& prof) {
    return frozen_residual_norm(prof.r, prof.u, prof.v, prof.unit->exponents, prof.a0, prof.b0, prof.c0);
}

// ---------------------------------------------------------------------------

BoundaryTerms gamma_eta(const MomentTable& moments, const Coefficients& coeffs, const Point& x0,
                        const Point& inner_normal, const Exponents& exp) {
    const auto a = coeffs.a.evaluate(x0);
    const auto b = coeffs.b.evaluate(x0);
    const auto c = coeffs.c.evaluate(x0);
    const double n = exp.n();

    BoundaryTerms t;
    t.lambda = lambda_frozen(a.value, b.value, c.value, exp);
    t.dlog_a = a.gradient.dot(inner_normal) / a.value;
    t.dlog_b = b.gradient.dot(inner_normal) / b.value;
    t.dlog_c = c.gradient.dot(inner_normal) / c.value;
    const double prefactor = t.lambda / std::sqrt(c.value);
    t.gamma = 5.0 / (n + 1.0) * prefactor * moments.grad_moment;
    t.eta = prefactor * (t.dlog_a * moments.F_moment + t.dlog_b * moments.G_moment - t.dlog_c * moments.UV_moment);
    return t;
}

double mean_curvature(const DomainSpec& domain, const Point& x) {
    const auto comp = domain.component_at(x.norm());
    if (!comp) {
        throw Error(ErrorKind::NotOnBoundary, "mean curvature requested off the boundary of " + domain.describe());
    }
    // A sphere curving towards the domain (inward normal pointing at the
    // centre) has H = +1/R; the inner sphere of an annulus curves away.
    return -static_cast<double>(comp->normal_sign) / comp->radius;
}

std::string_view to_string(Regime regime) noexcept {
    return regime == Regime::LambdaDriven ? "LambdaDriven" : "CurvatureDriven";
}

Point boundary_point(int n, double radius, double phi) {
    Point x = Point::Zero(n);
    x[0] = radius * std::sin(phi);
    x[n - 1] = radius * std::cos(phi);
    return x;
}

Candidate candidate_at(const DomainSpec& domain, const Coefficients& coeffs, const Exponents& exp,
                       const MomentTable& moments, const Point& x) {
    const auto comp = domain.component_at(x.norm());
    if (!comp) throw Error(ErrorKind::NotOnBoundary, "candidate point is off the boundary of " + domain.describe());
    const auto terms = gamma_eta(moments, coeffs, x, domain.inner_normal(x), exp);
    Candidate cand;
    cand.component = comp->kind;
    cand.radius = comp->radius;
    cand.point = x;
    cand.H = mean_curvature(domain, x);
    cand.gamma = terms.gamma;
    cand.eta = terms.eta;
    cand.score = cand.H * cand.gamma + cand.eta;
    cand.expansion_term = (exp.n() - 1) * cand.H * cand.gamma + cand.eta;
    return cand;
}

namespace {

std::vector<ComponentKind> components_of(const std::vector<Candidate>& pts) {
    std::vector<ComponentKind> out;
    for (const auto& c : pts) {
        if (std::find(out.begin(), out.end(), c.component) == out.end()) out.push_back(c.component);
    }
    return out;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

std::vector<ComponentKind> BoundaryPrediction::predicted_components() const { return components_of(predicted_points); }
std::vector<ComponentKind> BoundaryPrediction::alternate_components() const { return components_of(alternate_points); }

BoundaryPrediction predict_concentration(const DomainSpec& domain, const Coefficients& coeffs, const Exponents& exp,
                                         const MomentTable& moments, const PredictOptions& opts) {
    if (domain.n() != exp.n()) {
        throw Error(ErrorKind::PreconditionViolation, "domain and exponents disagree on the dimension");
    }
    if (opts.samples_per_component < 1) {
        throw Error(ErrorKind::PreconditionViolation, "need at least one boundary sample per component");
    }
    const int n = exp.n();
    const int ns = opts.samples_per_component;

    BoundaryPrediction pred;
    std::vector<Candidate> all;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& comp : domain.boundary_components()) {
        ComponentLambda cl{comp.kind, comp.radius, {}, 0.0, 0.0};
        cl.samples.reserve(static_cast<std::size_t>(ns));
        for (int k = 0; k < ns; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / ns;
            const Point x = boundary_point(n, comp.radius, phi);
            const double lam = lambda_value(coeffs, x, exp);
            cl.samples.push_back(lam);

            Candidate cand = candidate_at(domain, coeffs, exp, moments, x);
            all.push_back(std::move(cand));
        }
        cl.min = *std::min_element(cl.samples.begin(), cl.samples.end());
        cl.max = *std::max_element(cl.samples.begin(), cl.samples.end());
        lo = std::min(lo, cl.min);
        hi = std::max(hi, cl.max);
        pred.lambda_values.push_back(std::move(cl));
    }
    pred.constancy_witness = (hi - lo) / hi;

    if (pred.constancy_witness > opts.constancy_tolerance) {
        pred.regime = Regime::LambdaDriven;
        std::size_t idx = 0;
        for (const auto& cl : pred.lambda_values) {
            for (double lam : cl.samples) {
                if (near(lam, lo)) pred.predicted_points.push_back(all[idx]);
                ++idx;
            }
        }
        return pred;
    }

    pred.regime = Regime::CurvatureDriven;
    double smax = -std::numeric_limits<double>::infinity();
    double smin = std::numeric_limits<double>::infinity();
    for (const auto& c : all) {
        smax = std::max(smax, c.score);
        smin = std::min(smin, c.score);
    }
    for (const auto& c : all) {
        if (near(c.score, smax)) pred.predicted_points.push_back(c);
        if (near(c.score, smin)) pred.alternate_points.push_back(c);
    }
    return pred;
}

}  // namespace spikeforge
