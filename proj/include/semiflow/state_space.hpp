/**
 * @file state_space.hpp
 * @brief Uniform-grid function states, plain vector states and their metrics.
 *
 * Grid functions approximate elements of C_0(R^d; R^m) (zero extension) or of
 * the kappa-weighted space UC_kappa (clamp extension) on a box [-X, X]^d with
 * d in {1, 2}. Node order is row-major: the first axis is the outer index.
 */

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semiflow {

/// Uniform grid over [-X_max, X_max]^dim with an odd node count per axis.
class Grid {
public:
    /// Throws std::invalid_argument for dim outside {1,2}, even or < 3 node
    /// counts, and non-positive half widths.
    static Grid create(int dim, double x_max, int n_points);
    static Grid create(int dim, std::array<double, 2> x_max, std::array<int, 2> n_points);

    int dim() const { return dim_; }
    double half_width(int axis = 0) const { return x_max_[axis]; }
    int n_points(int axis = 0) const { return n_[axis]; }
    double spacing(int axis = 0) const { return h_[axis]; }
    std::size_t size() const;

    /// Coordinate of node j along an axis: -X_max + j*h (node (n-1)/2 is exactly 0).
    double coordinate(int axis, int j) const;
    /// Multi-index of a flat node index.
    std::array<int, 2> unflatten(std::size_t node) const;
    std::size_t flatten(int i, int j = 0) const { return dim_ == 1 ? std::size_t(i) : std::size_t(i) * n_[1] + j; }
    /// Coordinates of a flat node (second entry is 0 in 1D).
    std::array<double, 2> point(std::size_t node) const;
    /// Euclidean length of a node's coordinate vector.
    double radius(std::size_t node) const;
    /// Max-norm of a node's coordinate vector.
    double max_abs_coordinate(std::size_t node) const;

    bool operator==(const Grid&) const = default;

private:
    Grid() = default;
    int dim_ = 1;
    std::array<double, 2> x_max_{1.0, 1.0};
    std::array<int, 2> n_{3, 1};
    std::array<double, 2> h_{1.0, 1.0};
};

enum class Extension { zero, clamp };

enum class Preset { gaussian_bump, cauchy_bump, hat, identity, zero };

std::string_view to_string(Preset p);
std::string_view to_string(Extension e);
/// Throws std::invalid_argument on unknown names.
Preset preset_from_string(std::string_view name);
Extension extension_from_string(std::string_view name);

/// Values of an R^m valued function at every grid node, node-major
/// (the m components of one node are contiguous).
class GridFunction {
public:
    GridFunction(Grid grid, int codim, std::vector<double> values, Extension ext);
    /// All-zero function.
    GridFunction(Grid grid, int codim, Extension ext);

    const Grid& grid() const { return grid_; }
    int codim() const { return codim_; }
    Extension extension() const { return ext_; }
    void set_extension(Extension ext) { ext_ = ext; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double& at(std::size_t node, int comp = 0) { return values_[node * codim_ + comp]; }
    double at(std::size_t node, int comp = 0) const { return values_[node * codim_ + comp]; }

    bool same_layout(const GridFunction& other) const {
        return grid_ == other.grid_ && codim_ == other.codim_;
    }
    bool operator==(const GridFunction&) const = default;

private:
    Grid grid_;
    int codim_;
    std::vector<double> values_;
    Extension ext_;
};

/// Finite-dimensional state for ODE families.
struct VectorState {
    std::vector<double> coordinates;
    bool operator==(const VectorState&) const = default;
};

struct NormSpec {
    enum class Kind { sup, weighted };
    Kind kind = Kind::sup;
    double p = 3.0;  ///< weight exponent, kappa(x) = 1/(1+|x|^p); must exceed 1

    static NormSpec sup() { return {}; }
    /// Throws std::invalid_argument unless p > 1.
    static NormSpec weighted(double p);
    bool operator==(const NormSpec&) const = default;
};

double kappa(double radius, double p);

GridFunction sample_function(Preset preset, const Grid& grid);
GridFunction sample_function(Preset preset, const Grid& grid, Extension ext);
/// Explicit table in node-major order; throws on length mismatch.
GridFunction sample_table(std::vector<double> values, const Grid& grid, int codim = 1,
                          Extension ext = Extension::clamp);

/// Metric on grid functions sharing a layout. The optional radius restricts
/// the maximum to nodes with max-norm coordinate <= radius.
double distance(const GridFunction& f, const GridFunction& g, const NormSpec& norm);
double distance(const GridFunction& f, const GridFunction& g, const NormSpec& norm, double radius);
double norm_of(const GridFunction& f, const NormSpec& norm);

double distance(const VectorState& x, const VectorState& y);

/// Largest forward-difference slope along each axis.
double lipschitz_constant_estimate(const GridFunction& f);

/// Multilinear interpolation inside the box, extension outside.
std::vector<double> interp_eval(const GridFunction& f, std::span<const double> point);
/// Scalar fast path for 1D, codim 1.
double interp_eval_1d(const GridFunction& f, double x);

// Pointwise linear algebra used by diagnostics (generator quotients etc.).
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a);
GridFunction operator*(double s, const GridFunction& a);
VectorState operator+(const VectorState& a, const VectorState& b);
VectorState operator-(const VectorState& a, const VectorState& b);
VectorState operator-(const VectorState& a);
VectorState operator*(double s, const VectorState& a);

GridFunction zero_like(const GridFunction& f);
VectorState zero_like(const VectorState& x);
bool all_finite(const GridFunction& f);
bool all_finite(const VectorState& x);

/// CSV with header `x[,y],v1[,v2...]`, one row per node, 17 significant digits.
std::string to_csv(const GridFunction& f);
void write_csv(const GridFunction& f, const std::filesystem::path& path);

/// Parsed CSV columns (header names + numeric rows); used by plotting and round trips.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};
/// Throws std::runtime_error on malformed input.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);
/// Rebuilds a grid function from a CSV written by to_csv (uniform grid inferred).
GridFunction grid_function_from_csv(const CsvTable& table, Extension ext);

/// Shortest decimal form that round-trips at 17 significant digits.
std::string format_double(double v);

}  // namespace semiflow
