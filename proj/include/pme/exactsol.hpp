#pragma once

#include <cstddef>
#include <stdexcept>

#include "pme/domain.hpp"

namespace pme {

/// Nonnegative, nonzero solution f of Delta(f^m) + f/(m-1) = 0 with f = 0 on the boundary.
/// u(t) = (1+t)^{-1/(m-1)} f then solves the deterministic equation exactly.
struct Profile {
    Grid1D grid;
    GridFunction f;
    double m = 2.0;
    /// max_i |Delta_h(f^m) + f/(m-1)|_i on the grid
    double residual_norm = 0.0;
    /// v(mid) = f(mid)^m found by shooting
    double midpoint_v = 0.0;
};

class ProfileError : public std::runtime_error {
public:
    ProfileError(const std::string& what, double lo, double hi)
        : std::runtime_error(what), lo_(lo), hi_(hi) {}
    double bracket_lo() const { return lo_; }
    double bracket_hi() const { return hi_; }

private:
    double lo_;
    double hi_;
};

/// Shooting on v = f^m from the midpoint (v'(mid) = 0), bisecting on v(mid)
/// until |v(boundary)| <= tol.
Profile solve_profile(const Grid1D& grid, double m, double tol = 1e-12, std::size_t max_iter = 200);

/// (1+t)^{-1/(m-1)} f
GridFunction separable_solution(const Profile& profile, double t);

}  // namespace pme
