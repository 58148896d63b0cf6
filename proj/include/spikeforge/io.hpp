#pragma once

#include "spikeforge/concentration.hpp"
#include "spikeforge/experiments.hpp"
#include "spikeforge/fd_solver.hpp"
#include "spikeforge/ground_state.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spikeforge {

using Json = nlohmann::ordered_json;

std::string_view version() noexcept;

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(std::string_view canonical_config);

/// Identifies the run that produced an output file.
struct Stamp {
    std::string config_hash;
    std::string version{spikeforge::version()};
};

/// Shortest text that is guaranteed to read back to the same double.
std::string format_real(double x);

Json to_json(const Exponents& exp);
Json to_json(const MomentTable& m);
Json to_json(const PohozaevReport& r);
Json to_json(const BoundaryPrediction& pred);
Json to_json(const ExpansionFit& fit);
Json to_json(const ExperimentReport& rep, const Stamp& stamp);
Json solution_header(const DiscreteSolution& sol, const Stamp& stamp);
Json sweep_record(const DiscreteSolution& sol, ComponentKind planted, const Stamp& stamp);

/// profile.csv holds r,U,V,dU,dV; profile.json the exponents, r_max, h and
/// residual. Reading both gives back a bit-identical profile.
void write_profile(const std::filesystem::path& csv, const std::filesystem::path& json, const RadialProfile& prof,
                   const Stamp& stamp);
RadialProfile read_profile(const std::filesystem::path& csv, const std::filesystem::path& json);

/// Columns r,theta,u,v, one row per meridian node.
void write_solution_csv(const std::filesystem::path& path, const DiscreteSolution& sol, const Stamp& stamp);

void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal SVG line plot: frame, tick labels, one polyline per series.
std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series, const Stamp& stamp);

/// Fixed-width table: preset, E, predicted, observed, intercept error, slope sign.
std::string summary_table(const std::vector<ExperimentReport>& reports, const Stamp& stamp);

}  // namespace spikeforge
