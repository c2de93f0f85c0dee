#include "pme/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pme {

Grid1D::Grid1D(double a, double b, std::size_t n) : a_(a), b_(b), n_(n), h_(0.0) {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ConfigError("grid: need finite endpoints with b > a");
    }
    if (n < 3) throw ConfigError("grid: need at least 3 interior nodes");
    h_ = (b - a) / static_cast<double>(n + 1);
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
    return x;
}

Grid1D build_grid(double a, double b, std::size_t n) { return Grid1D(a, b, n); }

GridFunction::GridFunction(const Grid1D& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("grid function: length mismatch");
}

bool GridFunction::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<const double> rhs,
                       std::span<double> x, std::span<double> scratch) {
    const std::size_t n = diag.size();
    double denom = diag[0];
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = sup[i - 1] / denom;
        denom = diag[i] - sub[i] * scratch[i];
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i + 1] * x[i + 1];
}

void solve_shifted_laplacian(double c, double h, std::span<const double> rhs, std::span<double> x,
                             std::span<double> scratch) {
    const std::size_t n = rhs.size();
    const double off = -c / (h * h);
    const double diag = 1.0 - 2.0 * off;
    double denom = diag;
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = off / denom;
        denom = diag - off * scratch[i];
        x[i] = (rhs[i] - off * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i + 1] * x[i + 1];
}

Weight::Weight(const Grid1D& grid, std::vector<double> values, const std::vector<double>& cached_p)
    : grid_(grid), values_(std::move(values)) {
    for (double p : cached_p) lp_norms_[p] = lp_norm(p);
}

double Weight::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Weight::lp_norm(double p) const {
    if (auto it = lp_norms_.find(p); it != lp_norms_.end()) return it->second;
    return pme::lp_norm(values_, grid_.h(), p);
}

Weight solve_weight(const Grid1D& grid, const std::vector<double>& cached_p) {
    const std::size_t n = grid.size();
    const double h2 = grid.h() * grid.h();
    // -(w_{i+1} - 2 w_i + w_{i-1}) = h^2
    std::vector<double> sub(n, -1.0), diag(n, 2.0), sup(n, -1.0), rhs(n, h2), w(n), scratch(n);
    solve_tridiagonal(sub, diag, sup, rhs, w, scratch);
    return Weight(grid, std::move(w), cached_p);
}

double weighted_l1_norm(std::span<const double> f, const Weight& w) {
    if (f.size() != w.grid().size()) throw std::invalid_argument("weighted_l1_norm: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i]) * w[i];
    return s * w.grid().h();
}

double weighted_l1_norm(const GridFunction& f, const Weight& w) {
    if (!(f.grid == w.grid())) throw std::invalid_argument("weighted_l1_norm: grid mismatch");
    return weighted_l1_norm(f.view(), w);
}

double weighted_l1_distance(std::span<const double> f, std::span<const double> g, const Weight& w) {
    if (f.size() != w.grid().size() || g.size() != f.size()) {
        throw std::invalid_argument("weighted_l1_distance: grid mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - g[i]) * w[i];
    return s * w.grid().h();
}

double lp_norm(std::span<const double> f, double h, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: need p >= 1");
    double s = 0.0;
    if (p == 1.0) {
        for (double v : f) s += std::abs(v);
        return s * h;
    }
    if (p == 2.0) {
        for (double v : f) s += v * v;
        return std::sqrt(s * h);
    }
    for (double v : f) s += std::pow(std::abs(v), p);
    return std::pow(s * h, 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) { return lp_norm(f.view(), f.grid.h(), p); }

void discrete_laplacian(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? f[i - 1] : 0.0;
        const double right = i + 1 < n ? f[i + 1] : 0.0;
        out[i] = (right - 2.0 * f[i] + left) * inv_h2;
    }
}

GridFunction discrete_laplacian(const GridFunction& f) {
    GridFunction out(f.grid);
    discrete_laplacian(f.view(), f.grid.h(), out.values);
    return out;
}

double laplacian_eigenvalue(const Grid1D& grid, std::size_t k) {
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi /
                              (2.0 * static_cast<double>(grid.size() + 1)));
    return 4.0 * s * s / (grid.h() * grid.h());
}

}  // namespace pme
