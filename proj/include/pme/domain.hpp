#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pme {

/// Raised for invalid user-facing configuration (bad grid, bad model constants, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform mesh on (a, b) with N interior nodes x_i = a + (i+1) h, i = 0..N-1.
/// Boundary values are implicit zeros.
class Grid1D {
public:
    Grid1D(double a, double b, std::size_t n);

    double a() const { return a_; }
    double b() const { return b_; }
    std::size_t size() const { return n_; }
    double h() const { return h_; }
    double length() const { return b_ - a_; }

    /// Interior node i (0-based).
    double node(std::size_t i) const { return a_ + static_cast<double>(i + 1) * h_; }
    std::vector<double> nodes() const;

    bool operator==(const Grid1D&) const = default;

private:
    double a_;
    double b_;
    std::size_t n_;
    double h_;
};

Grid1D build_grid(double a, double b, std::size_t n);

/// Interior nodal values of a field vanishing on the boundary.
struct GridFunction {
    Grid1D grid;
    std::vector<double> values;

    explicit GridFunction(const Grid1D& g) : grid(g), values(g.size(), 0.0) {}
    GridFunction(const Grid1D& g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::span<const double> view() const { return values; }

    bool all_finite() const;
};

/// Sample a callable at the interior nodes.
template <typename F>
GridFunction sample(const Grid1D& grid, F&& f) {
    GridFunction out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.node(i));
    return out;
}

/// Discrete solution of -w'' = 1, w = 0 on the boundary.
class Weight {
public:
    Weight(const Grid1D& grid, std::vector<double> values, const std::vector<double>& cached_p);

    const Grid1D& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double max() const;

    /// ||w||_{L^p}; served from the cache when p was requested at construction.
    double lp_norm(double p) const;
    const std::map<double, double>& cached_norms() const { return lp_norms_; }

    GridFunction as_function() const { return GridFunction(grid_, values_); }

private:
    Grid1D grid_;
    std::vector<double> values_;
    std::map<double, double> lp_norms_;
};

Weight solve_weight(const Grid1D& grid, const std::vector<double>& cached_p = {1.0, 2.0});

/// sum_i |f_i| w_i h
double weighted_l1_norm(std::span<const double> f, const Weight& w);
double weighted_l1_norm(const GridFunction& f, const Weight& w);
/// sum_i |f_i - g_i| w_i h without materialising the difference.
double weighted_l1_distance(std::span<const double> f, std::span<const double> g, const Weight& w);

/// (sum_i |f_i|^p h)^(1/p); p >= 1.
double lp_norm(std::span<const double> f, double h, double p);
double lp_norm(const GridFunction& f, double p);

/// 3-point Laplacian with zero Dirichlet ghosts.
GridFunction discrete_laplacian(const GridFunction& f);
void discrete_laplacian(std::span<const double> f, double h, std::span<double> out);

/// Eigenvalue lambda_k > 0 of -Delta_h for the k-th discrete sine mode (k >= 1).
double laplacian_eigenvalue(const Grid1D& grid, std::size_t k);

/// Thomas algorithm for a tridiagonal system; `scratch` must hold n entries.
/// sub[0] and sup[n-1] are ignored. Writes the solution into x (may alias rhs).
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<const double> rhs,
                       std::span<double> x, std::span<double> scratch);

/// Solve (I - c * Delta_h) x = rhs for constant c >= 0 (symmetric, diagonally dominant).
void solve_shifted_laplacian(double c, double h, std::span<const double> rhs, std::span<double> x,
                             std::span<double> scratch);

}  // namespace pme
