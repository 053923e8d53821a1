#include "opinionlab/error.hpp"
#include "opinionlab/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace opinionlab {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        out << (c ? "," : "") << table.header[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw DimensionError("table '" + table.name + "' has a row of the wrong width");
        }
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_csv(out, table);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty CSV document");
    t.header = split(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw SchemaError("CSV line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " fields, expected " +
                              std::to_string(t.header.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || *end != '\0' || (errno == ERANGE && std::isinf(v))) {
                throw SchemaError("CSV line " + std::to_string(line_no) + ": '" + c +
                                  "' is not a number");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Table t = read_csv(in);
    t.name = path.stem().string();
    return t;
}

Table trajectory_table(const Trajectory& traj) {
    Table t;
    t.name = "trajectory";
    if (traj.states.empty()) return t;
    const SystemState& s0 = traj.states.front();
    t.header.push_back("t");
    for (Eigen::Index i = 0; i < s0.z.rows(); ++i) {
        for (Eigen::Index j = 0; j < s0.z.cols(); ++j) {
            t.header.push_back("z_" + std::to_string(i) + "_" + std::to_string(j));
        }
    }
    for (Eigen::Index i = 0; i < s0.u.size(); ++i) t.header.push_back("u_" + std::to_string(i));
    for (Eigen::Index i = 0; i < s0.gamma.size(); ++i) t.header.push_back("gamma_" + std::to_string(i));
    for (Eigen::Index i = 0; i < s0.delta.size(); ++i) t.header.push_back("delta_" + std::to_string(i));
    t.rows.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const SystemState& s = traj.states[k];
        std::vector<double> row;
        row.reserve(t.header.size());
        row.push_back(traj.times[k]);
        for (Eigen::Index i = 0; i < s.z.rows(); ++i) {
            for (Eigen::Index j = 0; j < s.z.cols(); ++j) row.push_back(s.z(i, j));
        }
        for (Eigen::Index i = 0; i < s.u.size(); ++i) row.push_back(s.u(i));
        for (Eigen::Index i = 0; i < s.gamma.size(); ++i) row.push_back(s.gamma(i));
        for (Eigen::Index i = 0; i < s.delta.size(); ++i) row.push_back(s.delta(i));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace opinionlab
