#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pme/domain.hpp"

using namespace pme;

namespace {

// dense Gaussian elimination with partial pivoting
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        std::swap(A[c], A[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

}  // namespace

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(Grid1D(1.0, 0.0, 10), ConfigError);
    EXPECT_THROW(Grid1D(0.0, 1.0, 2), ConfigError);
    EXPECT_THROW(Grid1D(0.0, INFINITY, 10), ConfigError);
}

TEST(Grid, Nodes) {
    const Grid1D g(-1.0, 3.0, 7);
    EXPECT_DOUBLE_EQ(g.h(), 0.5);
    EXPECT_DOUBLE_EQ(g.node(0), -0.5);
    EXPECT_DOUBLE_EQ(g.node(6), 2.5);
    EXPECT_EQ(g.nodes().size(), 7u);
}

TEST(Weight, ExactAtNodes) {
    for (std::size_t n : {3u, 10u, 99u, 400u}) {
        const Grid1D g(0.0, 1.0, n);
        const Weight w = solve_weight(g);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g.node(i);
            EXPECT_NEAR(w[i], x * (1.0 - x) / 2.0, 1e-13) << n << " " << i;
        }
    }
}

TEST(Weight, ShiftedInterval) {
    const Grid1D g(2.0, 5.0, 50);
    const Weight w = solve_weight(g);
    for (std::size_t i = 0; i < 50; ++i) {
        const double x = g.node(i);
        EXPECT_NEAR(w[i], (x - 2.0) * (5.0 - x) / 2.0, 1e-12);
    }
}

TEST(Weight, NodalNormsMatchClosedForm) {
    // h/2 sum x(1-x) with sum x = N/2, sum x^2 = N(2N+1)/(6(N+1))
    const std::size_t n = 99;
    const Grid1D g(0.0, 1.0, n);
    const Weight w = solve_weight(g, {1.0, 2.0});
    const double N = n, h = 1.0 / (N + 1.0);
    const double l1 = h / 2.0 * (N / 2.0 - N * (2.0 * N + 1.0) / (6.0 * (N + 1.0)));
    EXPECT_NEAR(w.lp_norm(1.0), l1, 1e-15);
    EXPECT_NEAR(w.lp_norm(1.0), 1.0 / 12.0, 1e-5);
    EXPECT_NEAR(std::pow(w.lp_norm(2.0), 2), 1.0 / 120.0, 1e-7);
    EXPECT_NEAR(w.max(), 0.125, 1e-4);
    EXPECT_EQ(w.cached_norms().count(2.0), 1u);
    EXPECT_NEAR(w.lp_norm(3.0), lp_norm(w.values(), h, 3.0), 1e-15);
}

TEST(Norms, WeightedL1) {
    const Grid1D g(0.0, 1.0, 9);
    const Weight w = solve_weight(g);
    GridFunction f(g), z(g);
    for (std::size_t i = 0; i < 9; ++i) f[i] = (i % 2 ? -1.0 : 2.0);
    double expect = 0.0;
    for (std::size_t i = 0; i < 9; ++i) expect += std::abs(f[i]) * w[i] * g.h();
    EXPECT_NEAR(weighted_l1_norm(f, w), expect, 1e-15);
    EXPECT_NEAR(weighted_l1_distance(f.view(), z.view(), w), expect, 1e-15);
    EXPECT_EQ(weighted_l1_distance(f.view(), f.view(), w), 0.0);
}

TEST(Laplacian, SineModesAreEigenvectors) {
    const Grid1D g(0.0, 2.0, 63);
    for (std::size_t k : {1u, 5u, 40u}) {
        const auto e = sample(g, [k](double x) { return std::sin(k * std::numbers::pi * x / 2.0); });
        const GridFunction le = discrete_laplacian(e);
        const double lam = laplacian_eigenvalue(g, k);
        const double s = std::sin(k * std::numbers::pi * g.h() / 4.0);
        EXPECT_NEAR(lam, 4.0 / (g.h() * g.h()) * s * s, 1e-9 * lam);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(le[i], -lam * e[i], 1e-9 * lam);
    }
    EXPECT_NEAR(laplacian_eigenvalue(Grid1D(0.0, 1.0, 1000), 1), std::numbers::pi * std::numbers::pi, 1e-4);
}

TEST(Tridiagonal, MatchesDenseSolve) {
    const std::size_t n = 12;
    std::vector<double> sub(n), diag(n), sup(n), rhs(n), x(n), scratch(n);
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        sub[i] = -0.3 - 0.01 * i;
        sup[i] = -0.7 + 0.02 * i;
        diag[i] = 2.0 + 0.1 * i;
        rhs[i] = std::sin(1.0 + i);
        A[i][i] = diag[i];
        if (i > 0) A[i][i - 1] = sub[i];
        if (i + 1 < n) A[i][i + 1] = sup[i];
    }
    solve_tridiagonal(sub, diag, sup, rhs, x, scratch);
    const auto ref = dense_solve(A, rhs);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-13);
}

TEST(Tridiagonal, ShiftedLaplacianInverts) {
    const Grid1D g(0.0, 1.0, 31);
    const double c = 0.37;
    const auto u = sample(g, [](double x) { return x * x * (1.0 - x) + std::sin(7.0 * x); });
    std::vector<double> x(31), scratch(31);
    solve_shifted_laplacian(c, g.h(), u.view(), x, scratch);
    GridFunction xf(g, x);
    const GridFunction lx = discrete_laplacian(xf);
    for (std::size_t i = 0; i < 31; ++i) EXPECT_NEAR(x[i] - c * lx[i], u[i], 1e-12);
}
