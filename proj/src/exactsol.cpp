#include "pme/exactsol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace pme {

namespace {

using State = std::array<double, 2>;


// v at each distance in `dist` (ascending, starting at 0) from the midpoint
std::vector<double> shoot(double v0, double m, const std::vector<double>& dist) {
    namespace odeint = boost::numeric::odeint;
    const double c = 1.0 / (m - 1.0);
    auto rhs = [m, c](const State& s, State& ds, double) {
        ds[0] = s[1];
        // past the zero v stays negative, so the sign at the boundary orders the shots
        ds[1] = s[0] > 0.0 ? -c * std::pow(s[0], 1.0 / m) : 0.0;
    };
    std::vector<double> out;
    out.reserve(dist.size());
    State s{v0, 0.0};
    auto stepper = odeint::make_dense_output(1e-13 * v0, 1e-13, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, s, dist.begin(), dist.end(), dist[1] * 1e-3 + 1e-6,
                            [&out](const State& st, double) { out.push_back(st[0]); });
    return out;
}

}  // namespace

Profile solve_profile(const Grid1D& grid, double m, double tol, std::size_t max_iter) {
    if (!(m > 1.0)) throw ConfigError("profile: need m > 1");
    if (!(tol > 0.0)) throw ConfigError("profile: need tol > 0");
    const std::size_t n = grid.size();
    const double mid = 0.5 * (grid.a() + grid.b());
    const double half = 0.5 * grid.length();

    std::vector<double> node_dist(n);
    for (std::size_t i = 0; i < n; ++i) node_dist[i] = std::abs(grid.node(i) - mid);
    std::vector<double> dist = node_dist;
    dist.push_back(0.0);
    dist.push_back(half);
    std::sort(dist.begin(), dist.end());
    dist.erase(std::unique(dist.begin(), dist.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
               dist.end());

    auto boundary_value = [&](double v0) { return shoot(v0, m, dist).back(); };

    // the zero of v moves outward as v(mid) grows: small v0 crosses early, large v0 stays positive
    double lo = 1e-3, hi = 1e-3;
    while (boundary_value(lo) >= 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) throw ProfileError("profile: no lower bracket", lo, hi);
    }
    hi = lo;
    while (boundary_value(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e300) throw ProfileError("profile: no upper bracket", lo, hi);
    }
    lo = hi * 0.5;

    double v0 = 0.5 * (lo + hi);
    bool converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
        v0 = 0.5 * (lo + hi);
        const double vb = boundary_value(v0);
        if (std::abs(vb) <= tol * v0 || hi - lo <= 1e-16 * hi) {
            converged = true;
            break;
        }
        (vb < 0.0 ? lo : hi) = v0;
    }
    if (!converged) throw ProfileError("profile: bisection did not converge", lo, hi);

    const std::vector<double> vals = shoot(v0, m, dist);
    Profile p{grid, GridFunction(grid), m, 0.0, v0};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = std::lower_bound(dist.begin(), dist.end(), node_dist[i] - 1e-14);
        const double vi = std::max(0.0, vals[static_cast<std::size_t>(it - dist.begin())]);
        v[i] = vi;
        p.f[i] = std::pow(vi, 1.0 / m);
    }
    std::vector<double> lap(n);
    discrete_laplacian(v, grid.h(), lap);
    for (std::size_t i = 0; i < n; ++i) {
        p.residual_norm = std::max(p.residual_norm, std::abs(lap[i] + p.f[i] / (m - 1.0)));
    }
    return p;
}

GridFunction separable_solution(const Profile& profile, double t) {
    if (t < 0.0) throw std::invalid_argument("separable solution: need t >= 0");
    const double s = std::pow(1.0 + t, -1.0 / (profile.m - 1.0));
    GridFunction out = profile.f;
    for (double& x : out.values) x *= s;
    return out;
}

}  // namespace pme
