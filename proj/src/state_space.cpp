#include "semiflow/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace semiflow {

Grid Grid::create(int dim, double x_max, int n_points) {
    return create(dim, {x_max, x_max}, {n_points, n_points});
}

Grid Grid::create(int dim, std::array<double, 2> x_max, std::array<int, 2> n_points) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(dim));
    }
    Grid g;
    g.dim_ = dim;
    for (int a = 0; a < dim; ++a) {
        if (!(x_max[a] > 0.0) || !std::isfinite(x_max[a])) {
            throw std::invalid_argument("grid half width must be positive and finite");
        }
        if (n_points[a] < 3 || n_points[a] % 2 == 0) {
            throw std::invalid_argument("grid n_points must be odd and >= 3 so that 0 is a node, got " +
                                        std::to_string(n_points[a]));
        }
        g.x_max_[a] = x_max[a];
        g.n_[a] = n_points[a];
        g.h_[a] = 2.0 * x_max[a] / (n_points[a] - 1);
    }
    if (dim == 1) {
        g.x_max_[1] = 0.0;
        g.n_[1] = 1;
        g.h_[1] = 0.0;
    }
    return g;
}

std::size_t Grid::size() const { return std::size_t(n_[0]) * std::size_t(dim_ == 2 ? n_[1] : 1); }

double Grid::coordinate(int axis, int j) const {
    // Centre node is pinned to exactly 0 and the grid is symmetric around it.
    const int centre = (n_[axis] - 1) / 2;
    return (j - centre) * h_[axis];
}

std::array<int, 2> Grid::unflatten(std::size_t node) const {
    if (dim_ == 1) return {int(node), 0};
    return {int(node / n_[1]), int(node % n_[1])};
}

std::array<double, 2> Grid::point(std::size_t node) const {
    const auto ij = unflatten(node);
    return {coordinate(0, ij[0]), dim_ == 2 ? coordinate(1, ij[1]) : 0.0};
}

double Grid::radius(std::size_t node) const {
    const auto p = point(node);
    return std::hypot(p[0], p[1]);
}

double Grid::max_abs_coordinate(std::size_t node) const {
    const auto p = point(node);
    return std::max(std::abs(p[0]), std::abs(p[1]));
}

std::string_view to_string(Preset p) {
    switch (p) {
        case Preset::gaussian_bump: return "gaussian_bump";
        case Preset::cauchy_bump: return "cauchy_bump";
        case Preset::hat: return "hat";
        case Preset::identity: return "identity";
        case Preset::zero: return "zero";
    }
    return "?";
}

std::string_view to_string(Extension e) { return e == Extension::zero ? "zero" : "clamp"; }

Preset preset_from_string(std::string_view name) {
    for (Preset p : {Preset::gaussian_bump, Preset::cauchy_bump, Preset::hat, Preset::identity, Preset::zero}) {
        if (to_string(p) == name) return p;
    }
    throw std::invalid_argument("unknown function preset '" + std::string(name) + "'");
}

Extension extension_from_string(std::string_view name) {
    if (name == "zero") return Extension::zero;
    if (name == "clamp") return Extension::clamp;
    throw std::invalid_argument("unknown extension mode '" + std::string(name) + "'");
}

GridFunction::GridFunction(Grid grid, int codim, std::vector<double> values, Extension ext)
    : grid_(std::move(grid)), codim_(codim), values_(std::move(values)), ext_(ext) {
    if (codim_ < 1) throw std::invalid_argument("codomain dimension must be >= 1");
    if (values_.size() != grid_.size() * std::size_t(codim_)) {
        throw std::invalid_argument("value table has " + std::to_string(values_.size()) + " entries, expected " +
                                    std::to_string(grid_.size() * std::size_t(codim_)));
    }
}

GridFunction::GridFunction(Grid grid, int codim, Extension ext)
    : GridFunction(grid, codim, std::vector<double>(grid.size() * std::size_t(codim), 0.0), ext) {}

NormSpec NormSpec::weighted(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("weighted norm exponent p must exceed 1");
    return {Kind::weighted, p};
}

double kappa(double radius, double p) { return 1.0 / (1.0 + std::pow(radius, p)); }

GridFunction sample_function(Preset preset, const Grid& grid) {
    const bool grows = preset == Preset::identity;
    return sample_function(preset, grid, grows ? Extension::clamp : Extension::zero);
}

GridFunction sample_function(Preset preset, const Grid& grid, Extension ext) {
    const int codim = preset == Preset::identity ? grid.dim() : 1;
    GridFunction f(grid, codim, ext);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.point(i);
        const double r2 = x[0] * x[0] + x[1] * x[1];
        switch (preset) {
            case Preset::gaussian_bump: f.at(i) = std::exp(-r2); break;
            case Preset::cauchy_bump: f.at(i) = 1.0 / (1.0 + r2); break;
            case Preset::hat: f.at(i) = std::max(0.0, 1.0 - std::sqrt(r2)); break;
            case Preset::identity:
                for (int c = 0; c < codim; ++c) f.at(i, c) = x[c];
                break;
            case Preset::zero: break;
        }
    }
    return f;
}

GridFunction sample_table(std::vector<double> values, const Grid& grid, int codim, Extension ext) {
    return GridFunction(grid, codim, std::move(values), ext);
}

namespace {

void require_same_layout(const GridFunction& f, const GridFunction& g) {
    if (!f.same_layout(g)) throw std::invalid_argument("grid functions live on different grids");
}

double node_gap(const GridFunction& f, const GridFunction& g, std::size_t node) {
    const int m = f.codim();
    if (m == 1) return std::abs(f.at(node) - g.at(node));
    double s = 0.0;
    for (int c = 0; c < m; ++c) {
        const double d = f.at(node, c) - g.at(node, c);
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double distance(const GridFunction& f, const GridFunction& g, const NormSpec& norm) {
    return distance(f, g, norm, std::numeric_limits<double>::infinity());
}

double distance(const GridFunction& f, const GridFunction& g, const NormSpec& norm, double radius) {
    require_same_layout(f, g);
    const Grid& grid = f.grid();
    double best = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.max_abs_coordinate(i) > radius) continue;
        double d = node_gap(f, g, i);
        if (norm.kind == NormSpec::Kind::weighted) d *= kappa(grid.radius(i), norm.p);
        best = std::max(best, d);
    }
    return best;
}

double norm_of(const GridFunction& f, const NormSpec& norm) { return distance(f, zero_like(f), norm); }

double distance(const VectorState& x, const VectorState& y) {
    if (x.coordinates.size() != y.coordinates.size()) {
        throw std::invalid_argument("vector states differ in dimension");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.coordinates.size(); ++i) {
        const double d = x.coordinates[i] - y.coordinates[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double lipschitz_constant_estimate(const GridFunction& f) {
    const Grid& grid = f.grid();
    double best = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto ij = grid.unflatten(node);
        for (int axis = 0; axis < grid.dim(); ++axis) {
            if (ij[axis] + 1 >= grid.n_points(axis)) continue;
            const std::size_t next = axis == 0 ? grid.flatten(ij[0] + 1, ij[1]) : grid.flatten(ij[0], ij[1] + 1);
            double s = 0.0;
            for (int c = 0; c < f.codim(); ++c) {
                const double d = f.at(next, c) - f.at(node, c);
                s += d * d;
            }
            best = std::max(best, std::sqrt(s) / grid.spacing(axis));
        }
    }
    return best;
}

namespace {

// Locates x on an axis: returns lower node index and fractional offset, or
// nullopt-like (-1) when outside the box.
struct AxisLocation {
    int lo;
    double frac;
    bool inside;
};

AxisLocation locate(const Grid& grid, int axis, double x) {
    const int n = grid.n_points(axis);
    const double h = grid.spacing(axis);
    const double u = x / h + double((n - 1) / 2);
    if (!(u >= 0.0) || u > double(n - 1)) {
        const int edge = u < 0.0 ? 0 : n - 1;
        return {edge, 0.0, false};
    }
    int lo = std::min(int(std::floor(u)), n - 2);
    return {lo, u - lo, true};
}

}  // namespace

double interp_eval_1d(const GridFunction& f, double x) {
    const AxisLocation loc = locate(f.grid(), 0, x);
    if (!loc.inside) return f.extension() == Extension::zero ? 0.0 : f.at(std::size_t(loc.lo));
    if (loc.frac == 0.0) return f.at(std::size_t(loc.lo));
    const double a = f.at(std::size_t(loc.lo));
    const double b = f.at(std::size_t(loc.lo + 1));
    return a + loc.frac * (b - a);
}

std::vector<double> interp_eval(const GridFunction& f, std::span<const double> point) {
    const Grid& grid = f.grid();
    const int m = f.codim();
    std::vector<double> out(std::size_t(m), 0.0);
    std::array<AxisLocation, 2> loc{};
    for (int a = 0; a < grid.dim(); ++a) {
        loc[a] = locate(grid, a, point[std::size_t(a)]);
        if (!loc[a].inside && f.extension() == Extension::zero) return out;
    }
    if (grid.dim() == 1) {
        for (int c = 0; c < m; ++c) {
            const double a = f.at(std::size_t(loc[0].lo), c);
            if (!loc[0].inside || loc[0].frac == 0.0) {
                out[c] = a;
            } else {
                out[c] = a + loc[0].frac * (f.at(std::size_t(loc[0].lo + 1), c) - a);
            }
        }
        return out;
    }
    // Bilinear; clamped axes collapse onto the boundary node.
    const int i1 = loc[0].inside ? loc[0].lo + 1 : loc[0].lo;
    const int j1 = loc[1].inside ? loc[1].lo + 1 : loc[1].lo;
    const double fx = loc[0].frac, fy = loc[1].frac;
    for (int c = 0; c < m; ++c) {
        const double v00 = f.at(grid.flatten(loc[0].lo, loc[1].lo), c);
        const double v10 = f.at(grid.flatten(i1, loc[1].lo), c);
        const double v01 = f.at(grid.flatten(loc[0].lo, j1), c);
        const double v11 = f.at(grid.flatten(i1, j1), c);
        out[c] = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
    }
    return out;
}

namespace {

template <class Op>
GridFunction zip(const GridFunction& a, const GridFunction& b, Op op) {
    require_same_layout(a, b);
    GridFunction out = a;
    auto ov = out.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = op(ov[i], bv[i]);
    return out;
}

template <class Op>
VectorState zip(const VectorState& a, const VectorState& b, Op op) {
    if (a.coordinates.size() != b.coordinates.size()) {
        throw std::invalid_argument("vector states differ in dimension");
    }
    VectorState out = a;
    for (std::size_t i = 0; i < out.coordinates.size(); ++i) {
        out.coordinates[i] = op(out.coordinates[i], b.coordinates[i]);
    }
    return out;
}

}  // namespace

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}
GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}
GridFunction operator-(const GridFunction& a) {
    GridFunction out = a;
    for (double& v : out.values()) v = -v;
    return out;
}
GridFunction operator*(double s, const GridFunction& a) {
    GridFunction out = a;
    for (double& v : out.values()) v *= s;
    return out;
}
VectorState operator+(const VectorState& a, const VectorState& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}
VectorState operator-(const VectorState& a, const VectorState& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}
VectorState operator-(const VectorState& a) {
    VectorState out = a;
    for (double& v : out.coordinates) v = -v;
    return out;
}
VectorState operator*(double s, const VectorState& a) {
    VectorState out = a;
    for (double& v : out.coordinates) v *= s;
    return out;
}

GridFunction zero_like(const GridFunction& f) { return GridFunction(f.grid(), f.codim(), f.extension()); }
VectorState zero_like(const VectorState& x) { return {std::vector<double>(x.coordinates.size(), 0.0)}; }

bool all_finite(const GridFunction& f) {
    return std::all_of(f.values().begin(), f.values().end(), [](double v) { return std::isfinite(v); });
}
bool all_finite(const VectorState& x) {
    return std::all_of(x.coordinates.begin(), x.coordinates.end(), [](double v) { return std::isfinite(v); });
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const GridFunction& f) {
    const Grid& grid = f.grid();
    std::string out = grid.dim() == 1 ? "x" : "x,y";
    for (int c = 0; c < f.codim(); ++c) out += ",v" + std::to_string(c + 1);
    out += '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto p = grid.point(i);
        out += format_double(p[0]);
        if (grid.dim() == 2) out += "," + format_double(p[1]);
        for (int c = 0; c < f.codim(); ++c) out += "," + format_double(f.at(i, c));
        out += '\n';
    }
    return out;
}

void write_csv(const GridFunction& f, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << to_csv(f);
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    }
    if (table.header.empty()) throw std::runtime_error("CSV header is empty");
    table.columns.resize(table.header.size());
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(rs, cell, ',')) {
            if (col >= table.header.size()) throw std::runtime_error("CSV row " + std::to_string(row) + " has too many cells");
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw std::runtime_error("CSV row " + std::to_string(row) + ": '" + cell + "' is not a number");
            }
            table.columns[col++].push_back(v);
        }
        if (col != table.header.size()) throw std::runtime_error("CSV row " + std::to_string(row) + " has too few cells");
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_csv(ss.str());
}

GridFunction grid_function_from_csv(const CsvTable& table, Extension ext) {
    const bool two_d = table.header.size() >= 2 && table.header[1] == "y";
    const int dim = two_d ? 2 : 1;
    const int codim = int(table.header.size()) - dim;
    if (codim < 1 || table.columns[0].empty()) throw std::runtime_error("CSV has no value columns");
    auto axis_nodes = [](const std::vector<double>& col) {
        std::vector<double> u = col;
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        return u;
    };
    const auto xs = axis_nodes(table.columns[0]);
    std::array<double, 2> half{xs.back(), 0.0};
    std::array<int, 2> n{int(xs.size()), 1};
    if (two_d) {
        const auto ys = axis_nodes(table.columns[1]);
        half[1] = ys.back();
        n[1] = int(ys.size());
    } else {
        half[1] = half[0];
        n[1] = n[0];
    }
    const Grid grid = Grid::create(dim, half, n);
    std::vector<double> values;
    values.reserve(grid.size() * std::size_t(codim));
    for (std::size_t r = 0; r < table.columns[0].size(); ++r) {
        for (int c = 0; c < codim; ++c) values.push_back(table.columns[std::size_t(dim + c)][r]);
    }
    return GridFunction(grid, codim, std::move(values), ext);
}

}  // namespace semiflow
