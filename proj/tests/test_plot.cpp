#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semiflow/plot.hpp"

using namespace semiflow;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("nice ticks") {
    const auto t = nice_ticks(0.0, 1.0);
    REQUIRE(t.size() >= 3);
    CHECK(t.front() <= 0.0);
    CHECK(t.back() >= 1.0 - 1e-12);
    const double step = t[1] - t[0];
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] == doctest::Approx(step));
    const auto big = nice_ticks(-37.0, 412.0);
    const double s = big[1] - big[0];
    const double mant = s / std::pow(10.0, std::floor(std::log10(s)));
    CHECK((mant == doctest::Approx(1.0) || mant == doctest::Approx(2.0) || mant == doctest::Approx(5.0)));
    CHECK_THROWS(nice_ticks(3.0, 3.0));
}

TEST_CASE("one series, no legend") {
    const Grid g = Grid::create(1, 2.0, 21);
    const auto table = parse_csv(to_csv(sample_function(Preset::hat, g)));
    const std::string svg = render_svg(table, {"hat"});
    CHECK(svg.find("viewBox=\"0 0 800 500\"") != std::string::npos);
    CHECK(count(svg, "<polyline") == 1);
    CHECK(svg.find(">hat</text>") != std::string::npos);
    CHECK(svg == render_svg(table, {"hat"}));
}

TEST_CASE("several series get a legend") {
    const auto table = parse_csv("x,v1,v2\n-1,0,1\n0,1,0\n1,0,1\n");
    const std::string svg = render_svg(table);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find(">v2</text>") != std::string::npos);
}

TEST_CASE("2D tables are cut at y = 0") {
    const Grid g = Grid::create(2, {2.0, 1.0}, {5, 3});
    const auto table = parse_csv(to_csv(sample_function(Preset::gaussian_bump, g)));
    const std::string svg = render_svg(table);
    CHECK(count(svg, "<polyline") == 1);
    const auto start = svg.find("points=\"");
    const auto end = svg.find('"', start + 8);
    CHECK(count(svg.substr(start, end - start), ",") == 5);
}

TEST_CASE("emit plot writes a file and rejects bad input") {
    const fs::path dir = fs::temp_directory_path() / "semiflow_plot_test";
    fs::create_directories(dir);
    const Grid g = Grid::create(1, 1.0, 5);
    write_csv(sample_function(Preset::zero, g), dir / "flat.csv");
    emit_plot(dir / "flat.csv", dir / "flat.svg");
    std::ifstream in(dir / "flat.svg");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("</svg>") != std::string::npos);
    std::ofstream(dir / "junk.csv") << "x,v1\n1\n";
    CHECK_THROWS(emit_plot(dir / "junk.csv", dir / "junk.svg"));
    fs::remove_all(dir);
}
