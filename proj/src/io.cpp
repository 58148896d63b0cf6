#include "spikeforge/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#ifndef SPIKEFORGE_VERSION
#define SPIKEFORGE_VERSION "0.0.0"
#endif

namespace spikeforge {

std::string_view version() noexcept { return SPIKEFORGE_VERSION; }

std::string config_hash(std::string_view canonical_config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_real(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

Json point_json(const Point& x) {
    Json a = Json::array();
    for (Eigen::Index k = 0; k < x.size(); ++k) a.push_back(x[k]);
    return a;
}

Json candidate_json(const Candidate& c) {
    return Json{{"component", to_string(c.component)},
                {"radius", c.radius},
                {"point", point_json(c.point)},
                {"H", c.H},
                {"gamma", c.gamma},
                {"eta", c.eta},
                {"H_gamma_plus_eta", c.score},
                {"expansion_term", c.expansion_term}};
}

/// Candidates sampled on a radial-coefficient boundary repeat per
/// component; keep one representative each to keep files small.
Json candidates_json(const std::vector<Candidate>& cs) {
    Json a = Json::array();
    std::vector<ComponentKind> seen;
    for (const auto& c : cs) {
        if (std::find(seen.begin(), seen.end(), c.component) != seen.end()) continue;
        seen.push_back(c.component);
        Json j = candidate_json(c);
        j["samples_in_set"] = std::count_if(cs.begin(), cs.end(), [&](const Candidate& o) {
            return o.component == c.component;
        });
        a.push_back(std::move(j));
    }
    return a;
}

double parse_real(std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorKind::IoError, "malformed number '" + std::string(s) + "'");
    }
    return x;
}

std::string stamp_line(const Stamp& stamp) {
    return "# spikeforge " + stamp.version + " config " + stamp.config_hash + "\n";
}

}  // namespace

Json to_json(const Exponents& exp) { return Json{{"p", exp.p()}, {"q", exp.q()}, {"n", exp.n()}}; }

Json to_json(const MomentTable& m) {
    return Json{{"I_infinity", m.I_infinity},       {"grad_moment", m.grad_moment},
                {"normal_moment", m.normal_moment}, {"tangential_moment", m.tangential_moment},
                {"F_moment", m.F_moment},           {"G_moment", m.G_moment},
                {"UV_moment", m.UV_moment},         {"trace", m.trace}};
}

Json to_json(const PohozaevReport& r) {
    auto check = [](const IdentityCheck& c) {
        return Json{{"lhs", c.lhs}, {"rhs", c.rhs}, {"relative_residual", c.relative_residual}};
    };
    return Json{{"normal_ratio", check(r.normal_ratio)},
                {"nonlinear_balance", check(r.nonlinear_balance)},
                {"weighted_energy", check(r.weighted_energy)},
                {"tangential_ratio", check(r.tangential_ratio)},
                {"nonlinear_balance_plus_trace", check(r.nonlinear_balance_plus_trace)},
                {"max_residual", r.max_residual()}};
}

Json to_json(const BoundaryPrediction& pred) {
    Json lam = Json::array();
    for (const auto& cl : pred.lambda_values) {
        lam.push_back(Json{{"component", to_string(cl.component)},
                           {"radius", cl.radius},
                           {"min", cl.min},
                           {"max", cl.max},
                           {"samples", cl.samples.size()}});
    }
    Json j{{"regime", to_string(pred.regime)},
           {"constancy_witness", pred.constancy_witness},
           {"lambda", lam},
           {"predicted_points", candidates_json(pred.predicted_points)}};
    if (pred.regime == Regime::CurvatureDriven) j["alternate_points"] = candidates_json(pred.alternate_points);
    return j;
}

Json to_json(const ExpansionFit& f) {
    return Json{{"intercept", f.intercept},
                {"slope", f.slope},
                {"fit_residual", f.fit_residual},
                {"points", f.points},
                {"leading_term", f.leading},
                {"intercept_error", f.intercept_error},
                {"slope_expected_plus", f.slope_expected_plus},
                {"slope_expected_minus", f.slope_expected_minus},
                {"slope_error_plus", f.slope_error_plus},
                {"slope_error_minus", f.slope_error_minus},
                {"slope_expected_two_over_n_plus_one", f.slope_expected_variation},
                {"slope_error_two_over_n_plus_one", f.slope_error_variation},
                {"convention", f.convention}};
}

Json solution_header(const DiscreteSolution& sol, const Stamp& stamp) {
    return Json{{"version", stamp.version},
                {"config_hash", stamp.config_hash},
                {"eps", sol.eps},
                {"residual_norm", sol.residual_norm},
                {"c_eps", sol.c_eps},
                {"argmax_u", {{"i", sol.argmax_u.i}, {"j", sol.argmax_u.j}}},
                {"argmax_v", {{"i", sol.argmax_v.i}, {"j", sol.argmax_v.j}}},
                {"argmax_radius", sol.argmax_radius()},
                {"argmax_angle", sol.argmax_angle()},
                {"newton_iterations", sol.newton_iterations},
                {"warm_started", sol.warm_started},
                {"grid",
                 {{"domain", sol.grid.domain().describe()},
                  {"n", sol.grid.n()},
                  {"radial_cells", sol.grid.radial_cells()},
                  {"angular_cells", sol.grid.angular_cells()},
                  {"radial_stretch", sol.grid.stretch().radial},
                  {"angular_stretch", sol.grid.stretch().angular}}}};
}

Json sweep_record(const DiscreteSolution& sol, ComponentKind planted, const Stamp& stamp) {
    Json j = solution_header(sol, stamp);
    j.erase("grid");
    j["planted_on"] = to_string(planted);
    j["c_eps_over_eps_n"] = sol.c_eps / std::pow(sol.eps, sol.grid.n());
    j["argmax_separation"] = sol.argmax_separation();
    return j;
}

Json to_json(const ExperimentReport& rep, const Stamp& stamp) {
    Json runs = Json::array();
    for (const auto& run : rep.runs) {
        Json sols = Json::array();
        for (const auto& s : run.solutions) {
            sols.push_back(Json{{"eps", s.eps},
                                {"c_eps", s.c_eps},
                                {"c_eps_over_eps_n", s.c_eps / std::pow(s.eps, s.grid.n())},
                                {"argmax_radius", s.argmax_radius()},
                                {"argmax_angle", s.argmax_angle()},
                                {"argmax_separation", s.argmax_separation()},
                                {"residual_norm", s.residual_norm}});
        }
        Json r{{"planted_on", to_string(run.component.kind)}, {"radius", run.component.radius}, {"sweep", sols}};
        if (!run.ok()) r["failure"] = run.failure;
        runs.push_back(std::move(r));
    }
    Json verdicts = Json::array();
    for (const auto& v : rep.verdicts) {
        verdicts.push_back(Json{{"preset", rep.problem.id},
                                {"claim", v.claim},
                                {"passed", v.passed},
                                {"asserted", v.asserted},
                                {"detail", v.detail}});
    }
    const auto& s = rep.settings;
    Json j{{"version", stamp.version},
           {"config_hash", stamp.config_hash},
           {"preset", rep.problem.id},
           {"parameters",
            {{"exponents", to_json(rep.problem.exponents)},
             {"domain", rep.problem.domain.describe()},
             {"a", rep.problem.coeffs.a.describe()},
             {"b", rep.problem.coeffs.b.describe()},
             {"c", rep.problem.coeffs.c.describe()},
             {"orbit", rep.problem.orbit},
             {"eps", s.eps},
             {"radial_cells", s.radial_cells},
             {"angular_cells", s.angular_cells},
             {"radial_stretch", s.stretch.radial},
             {"angular_stretch", s.stretch.angular}}},
           {"moments", to_json(rep.moments)},
           {"prediction", to_json(rep.prediction)}};
    if (rep.problem.alpha) j["parameters"]["alpha"] = *rep.problem.alpha;
    if (rep.problem.beta) j["parameters"]["beta"] = *rep.problem.beta;
    if (rep.lambda_exponent) {
        j["lambda_exponent"] = *rep.lambda_exponent;
        j["classified"] = to_string(*rep.classified);
        j["classifier_note"] =
            "classified from the sign of the Lambda exponent E, not from the alternative inequality in 2*alpha, 2*beta";
    }
    if (rep.constants) j["degenerate_constants"] = Json{{"C1", rep.constants->C1}, {"C2", rep.constants->C2}};
    j["runs"] = runs;
    j["chosen"] = to_string(rep.winner().component.kind);
    j["regime_observed"] = to_string(rep.observed);
    j["localization"] = Json{{"C", rep.localization.C},
                             {"on_boundary_at_two_smallest", rep.localization.on_boundary_at_two_smallest},
                             {"max_argmax_separation", rep.localization.max_separation},
                             {"mass_fraction", rep.localization.mass_fraction}};
    if (rep.fit) j["expansion_fit"] = to_json(*rep.fit);
    j["verdicts"] = verdicts;
    j["passed"] = rep.passed();
    return j;
}

// ---------------------------------------------------------------------------

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorKind::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_profile(const std::filesystem::path& csv, const std::filesystem::path& json, const RadialProfile& prof,
                   const Stamp& stamp) {
    std::string text = stamp_line(stamp) + "r,U,V,dU,dV\n";
    for (std::size_t i = 0; i < prof.size(); ++i) {
        text += format_real(prof.r[i]) + ',' + format_real(prof.U[i]) + ',' + format_real(prof.V[i]) + ',' +
                format_real(prof.dU[i]) + ',' + format_real(prof.dV[i]) + '\n';
    }
    write_text(csv, text);
    Json j{{"version", stamp.version},
           {"config_hash", stamp.config_hash},
           {"p", prof.exponents.p()},
           {"q", prof.exponents.q()},
           {"n", prof.exponents.n()},
           {"R_max", prof.r_max},
           {"h", prof.h},
           {"cells", prof.cells()},
           {"residual_norm", prof.residual_norm}};
    write_json(json, j);
}

RadialProfile read_profile(const std::filesystem::path& csv, const std::filesystem::path& json) {
    std::ifstream jin(json);
    if (!jin) throw Error(ErrorKind::IoError, "cannot open " + json.string());
    Json j;
    try {
        j = Json::parse(jin);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::IoError, json.string() + ": " + e.what());
    }
    RadialProfile prof{validate_exponents(j.at("p").get<double>(), j.at("q").get<double>(), j.at("n").get<int>()),
                       j.at("R_max").get<double>(),
                       j.at("h").get<double>(),
                       {},
                       {},
                       {},
                       {},
                       {},
                       j.at("residual_norm").get<double>()};

    std::ifstream in(csv);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + csv.string());
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != "r,U,V,dU,dV") throw Error(ErrorKind::IoError, csv.string() + ": unexpected header");
            header = true;
            continue;
        }
        double v[5];
        std::size_t start = 0;
        for (int k = 0; k < 5; ++k) {
            const auto end = k < 4 ? line.find(',', start) : line.size();
            if (end == std::string::npos) throw Error(ErrorKind::IoError, csv.string() + ": short row");
            v[k] = parse_real(std::string_view(line).substr(start, end - start));
            start = end + 1;
        }
        prof.r.push_back(v[0]);
        prof.U.push_back(v[1]);
        prof.V.push_back(v[2]);
        prof.dU.push_back(v[3]);
        prof.dV.push_back(v[4]);
    }
    if (prof.r.size() < 2) throw Error(ErrorKind::IoError, csv.string() + ": no profile rows");
    return prof;
}

void write_solution_csv(const std::filesystem::path& path, const DiscreteSolution& sol, const Stamp& stamp) {
    std::string text = stamp_line(stamp) + "r,theta,u,v\n";
    const auto& g = sol.grid;
    for (int i = 0; i <= g.radial_cells(); ++i) {
        for (int j = 0; j <= g.angular_cells(); ++j) {
            const auto k = g.index(i, j);
            text += format_real(g.radii()[static_cast<std::size_t>(i)]) + ',' +
                    format_real(g.angles()[static_cast<std::size_t>(j)]) + ',' + format_real(sol.u[k]) + ',' +
                    format_real(sol.v[k]) + '\n';
        }
    }
    write_text(path, text);
}

// ---------------------------------------------------------------------------

namespace {

std::string fixed(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series, const Stamp& stamp) {
    const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double x : s.x) x0 = std::min(x0, x), x1 = std::max(x1, x);
        for (double y : s.y) y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0)) {
        const double pad = std::max(1e-12, 0.05 * std::abs(y0));
        y0 -= pad;
        y1 += pad;
    }
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<!-- spikeforge " << stamp.version << " config " << stamp.config_hash << " -->\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
      << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << fixed(xv) << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << fixed(yv) << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape_xml(xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << escape_xml(ylabel) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = colours[k % 4];
        o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) o << fixed(px(s.x[i]), 6) << ',' << fixed(py(s.y[i]), 6) << ' ';
        o << "\"/>\n";
        o << "<text x=\"" << L + 8 << "\" y=\"" << T + 16 + 14 * static_cast<double>(k) << "\" font-size=\"11\" fill=\""
          << col << "\">" << escape_xml(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string summary_table(const std::vector<ExperimentReport>& reports, const Stamp& stamp) {
    auto join = [](const std::vector<ComponentKind>& ks) {
        std::string s;
        for (auto k : ks) s += (s.empty() ? "" : "+") + std::string(to_string(site_of(k)));
        return s.empty() ? std::string("-") : s;
    };
    std::string out = stamp_line(stamp);
    char line[512];
    std::snprintf(line, sizeof line, "%-38s %8s %-34s %-14s %10s %6s %s\n", "preset", "E", "predicted", "observed",
                  "icpt err", "slope", "verdict");
    out += line;
    for (const auto& r : reports) {
        std::string predicted;
        if (r.prediction.regime == Regime::LambdaDriven) {
            predicted = join(r.prediction.predicted_components());
        } else {
            predicted = "sup:" + join(r.prediction.predicted_components()) +
                        " inf:" + join(r.prediction.alternate_components());
        }
        const std::string E = r.lambda_exponent ? fixed(*r.lambda_exponent) : std::string("-");
        const std::string err = r.fit ? fixed(100.0 * r.fit->intercept_error, 3) + "%" : std::string("-");
        const std::string slope = r.fit ? std::string(r.fit->slope < 0 ? "-" : "+") : std::string("-");
        std::snprintf(line, sizeof line, "%-38s %8s %-34s %-14s %10s %6s %s\n", r.problem.id.c_str(), E.c_str(),
                      predicted.c_str(), std::string(to_string(r.observed)).c_str(), err.c_str(), slope.c_str(),
                      r.passed() ? "pass" : "FAIL");
        out += line;
    }
    return out;
}

}  // namespace spikeforge
