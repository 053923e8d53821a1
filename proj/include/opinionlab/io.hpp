#pragma once

#include "opinionlab/dynamics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace opinionlab {

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Comma-separated, values printed with %.17g so that reading them back with
/// strtod recovers every double exactly.
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(std::istream& in);
Table read_csv(const std::filesystem::path& path);

std::string format_double(double v);

/// Columns t, z_<i>_<j>..., then u_<i>, gamma_<i>, delta_<i> when present.
Table trajectory_table(const Trajectory& traj);

struct Series {
    std::string label;
    std::vector<double> x, y;
    /// Draw markers instead of a polyline.
    bool scatter = false;
};

/// Minimal static line/scatter chart.
std::string svg_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

/// One series per agent, first-option opinion against time.
std::string svg_opinions(const std::string& title, const Trajectory& traj);

}  // namespace opinionlab
