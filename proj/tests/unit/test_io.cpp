#include "spikeforge/io.hpp"

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace spikeforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("spikeforge-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double parse(const std::string& s) {
    double x = std::numeric_limits<double>::quiet_NaN();
    std::from_chars(s.data(), s.data() + s.size(), x);
    return x;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
    CHECK(config_hash("") == "cbf29ce484222325");
    CHECK(config_hash("a") == "af63dc4c8601ec8c");
    CHECK(config_hash("foobar") == "85944171f73967e8");
    CHECK(config_hash("a") != config_hash("b"));
}

TEST_CASE("reals round-trip through their text form") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double x = d(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(parse(format_real(x)) == x);
    }
    CHECK(parse(format_real(std::numeric_limits<double>::denorm_min())) == std::numeric_limits<double>::denorm_min());
    CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("profile files round-trip bit for bit") {
    const auto prof = solve_limit_ground_state(validate_exponents(2, 3, 3));
    const auto dir = scratch_dir("profile");
    const Stamp stamp{config_hash("ground-state p=2 q=3 n=3")};
    write_profile(dir / "profile.csv", dir / "profile.json", prof, stamp);

    const auto back = read_profile(dir / "profile.csv", dir / "profile.json");
    CHECK(back.exponents == prof.exponents);
    CHECK(back.r_max == prof.r_max);
    CHECK(back.h == prof.h);
    CHECK(back.residual_norm == prof.residual_norm);
    CHECK(same_bits(back.r, prof.r));
    CHECK(same_bits(back.U, prof.U));
    CHECK(same_bits(back.V, prof.V));
    CHECK(same_bits(back.dU, prof.dU));
    CHECK(same_bits(back.dV, prof.dV));

    const auto text = slurp(dir / "profile.csv");
    CHECK(text.rfind("# spikeforge", 0) == 0);
    CHECK(text.find(stamp.config_hash) != std::string::npos);

    try {
        read_profile(dir / "missing.csv", dir / "profile.json");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IoError);
    }
    std::ofstream(dir / "bad.csv") << "r,U,V\n0,1,2\n";
    CHECK_THROWS_AS(read_profile(dir / "bad.csv", dir / "profile.json"), Error);
    fs::remove_all(dir);
}

TEST_CASE("json views") {
    const auto exp = validate_exponents(2, 3, 3);
    const auto j = to_json(exp);
    CHECK(j["p"] == 2.0);
    CHECK(j["q"] == 3.0);
    CHECK(j["n"] == 3);

    MomentTable m;
    m.I_infinity = 1.25;
    m.trace = 0.5;
    const auto jm = to_json(m);
    CHECK(jm.dump().find("1.25") != std::string::npos);
}

TEST_CASE("solution csv has one row per node") {
    const auto g = build_grid(DomainSpec::annulus(1.0, 2.0, 3), 3, 16, 20);
    DiscreteSolution sol{g, std::vector<double>(g.node_count(), 1.0), std::vector<double>(g.node_count(), 2.0),
                         0.2, 0.0, 1.0, {16, 0}, {16, 0}, 3, false};
    const auto dir = scratch_dir("solution");
    write_solution_csv(dir / "s.csv", sol, Stamp{"0000000000000000"});
    std::ifstream in(dir / "s.csv");
    std::string line;
    int rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            CHECK(line == "r,theta,u,v");
            header = true;
            continue;
        }
        ++rows;
    }
    CHECK(rows == static_cast<int>(g.node_count()));
    const auto hdr = solution_header(sol, Stamp{"0000000000000000"});
    CHECK(hdr.dump().find("0000000000000000") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("svg plot") {
    const std::vector<Series> s{{"a<b", {0, 1, 2}, {1, 4, 9}}, {"flat", {0, 2}, {3, 3}}};
    const auto svg = line_plot_svg("title & more", "x", "y", s, Stamp{"abc"});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(svg.find("title &amp; more") != std::string::npos);
    std::size_t count = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
    CHECK(count == 2);
}

TEST_CASE("writing below a regular file fails cleanly") {
    const auto dir = scratch_dir("blocked");
    std::ofstream(dir / "plain") << "x";
    try {
        write_text(dir / "plain" / "sub" / "file.txt", "x");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IoError);
    }
    fs::remove_all(dir);
}
