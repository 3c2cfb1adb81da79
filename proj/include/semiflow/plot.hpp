/**
 * @file plot.hpp
 * @brief Static SVG line plots of CSV state files.
 */

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semiflow/state_space.hpp"

namespace semiflow {

struct PlotOptions {
    std::string title;
};

/// Round tick positions (1, 2, 5 times a power of ten) covering [lo, hi]; throws unless lo < hi.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

/// x against every value column; 2D tables are cut along y = 0. Fixed
/// viewBox 800x500, legend when there is more than one column.
std::string render_svg(const CsvTable& table, const PlotOptions& options = {});

/// Reads the CSV and writes the SVG. Throws std::runtime_error on malformed input.
void emit_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path,
               const PlotOptions& options = {});

}  // namespace semiflow
