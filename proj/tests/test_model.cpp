#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pme/model.hpp"

using namespace pme;

namespace {

std::vector<Nonlinearity> kinds() {
    return {Nonlinearity::pure_power(2.0), Nonlinearity::pure_power(3.0), Nonlinearity::pure_power(1.5),
            Nonlinearity::viscosity(2.0, 10.0), Nonlinearity::regularized(2.0, 4.0), Nonlinearity::linear()};
}

}  // namespace

TEST(Nonlinearity, OddAndIncreasing) {
    const auto lattice = symmetric_log_lattice(50.0, 200);
    for (const auto& nl : kinds()) {
        for (double r : lattice) EXPECT_DOUBLE_EQ(nl.A(-r), -nl.A(r)) << nl.name();
        for (std::size_t i = 1; i < lattice.size(); ++i) {
            if (lattice[i] > lattice[i - 1]) {
                EXPECT_GT(nl.A(lattice[i]), nl.A(lattice[i - 1])) << nl.name();
            }
        }
    }
}

TEST(Nonlinearity, DerivativeMatchesDifferenceQuotient) {
    for (const auto& nl : kinds()) {
        for (double r : {-3.7, -0.8, 0.4, 1.3, 5.5}) {
            const double eps = 1e-6;
            const double fd = (nl.A(r + eps) - nl.A(r - eps)) / (2 * eps);
            EXPECT_NEAR(nl.dA(r), fd, 1e-6 * (1.0 + std::abs(fd))) << nl.name() << " r=" << r;
            EXPECT_NEAR(nl.frak_a(r) * nl.frak_a(r), nl.dA(r), 1e-12 * (1.0 + nl.dA(r)));
        }
    }
}

TEST(Nonlinearity, PurePowerValues) {
    const auto nl = Nonlinearity::pure_power(3.0);
    EXPECT_DOUBLE_EQ(nl.A(2.0), 8.0);
    EXPECT_DOUBLE_EQ(nl.A(-2.0), -8.0);
    EXPECT_DOUBLE_EQ(Nonlinearity::pure_power(2.0).A(-3.0), -9.0);
    const auto e = eval_nonlinearity(Nonlinearity::pure_power(2.0), 0.25);
    EXPECT_DOUBLE_EQ(e.A, 0.0625);
    EXPECT_DOUBLE_EQ(e.a, std::sqrt(0.5));
}

TEST(Nonlinearity, PrimitiveClosedForm) {
    for (double m : {1.5, 2.0, 3.0}) {
        const auto nl = Nonlinearity::pure_power(m);
        for (double r : {-2.0, -0.3, 0.7, 4.0}) {
            const double exact = std::copysign(std::sqrt(m) * 2.0 / (m + 1.0) * std::pow(std::abs(r), (m + 1.0) / 2.0), r);
            EXPECT_NEAR(frak_a_primitive(nl, r), exact, 1e-8 * (1.0 + std::abs(exact)));
        }
    }
}

TEST(Nonlinearity, SufficientConstants) {
    EXPECT_NEAR(Nonlinearity::sufficient_K(2.0), 1.5, 1e-9);
    EXPECT_NEAR(Nonlinearity::sufficient_K(3.0), 4.0 / std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(Nonlinearity::sufficient_K(1.5), 1.2137294292683085, 1e-9);
}

TEST(Regularize, FloorAndDistance) {
    const auto base = Nonlinearity::pure_power(2.0);
    for (double n : {1.0, 4.0, 32.0}) {
        const auto reg = regularize(base, n);
        EXPECT_DOUBLE_EQ(reg.K(), 3.0 * base.K());
        for (double r : symmetric_log_lattice(3 * n, 100)) {
            EXPECT_GE(reg.frak_a(r), 2.0 / n - 1e-15);
            if (std::abs(r) <= n) EXPECT_LE(std::abs(reg.frak_a(r) - base.frak_a(r)), 2.0 / n + 1e-12);
        }
    }
    EXPECT_THROW(regularize(Nonlinearity::linear(), 4.0), ConfigError);
}

TEST(Validators, PurePowerPassesWithSufficientK) {
    for (double m : {1.5, 2.0, 3.0}) {
        const auto nl = Nonlinearity::pure_power(m, Nonlinearity::sufficient_K(m));
        const auto rep = validate_assumption_A(nl, 100.0, 300);
        EXPECT_TRUE(rep.all_pass()) << m;
        EXPECT_LE(rep.find(clause::primitive_near).tightest, nl.K() * (1 + 1e-12));
    }
}

TEST(Validators, LinearIsFlagged) {
    const auto rep = validate_assumption_A(Nonlinearity::linear(2.0, 1.0), 100.0, 300);
    EXPECT_FALSE(rep.find(clause::primitive_near).pass);
    EXPECT_FALSE(rep.all_pass());
}

TEST(Validators, TooSmallKIsFlagged) {
    const auto rep = validate_assumption_A(Nonlinearity::pure_power(3.0, 1.0), 100.0, 300);
    EXPECT_FALSE(rep.all_pass());
    EXPECT_GT(rep.find(clause::primitive_near).tightest, 1.0);
}

TEST(Noise, FamiliesPassWithDeclaredConstants) {
    for (auto f : {NoiseFamily::additive, NoiseFamily::linear, NoiseFamily::holder, NoiseFamily::branching}) {
        const auto nm = NoiseModel::make(f, 0.5, 4, 2.0);
        EXPECT_NO_THROW(nm.validate());
        EXPECT_TRUE(validate_noise(nm, 100.0, 200).all_pass()) << to_string(f);
        EXPECT_EQ(parse_noise_family(to_string(f)), f);
    }
    EXPECT_THROW(parse_noise_family("pink"), ConfigError);
}

TEST(Noise, UndersizedKIsFlagged) {
    auto nm = NoiseModel::make(NoiseFamily::linear, 5.0, 4, 2.0);
    nm.K = 1.0;
    EXPECT_FALSE(validate_noise(nm, 100.0, 200).all_pass());
}

TEST(Noise, CoefficientFormula) {
    const auto nm = NoiseModel::make(NoiseFamily::linear, 0.5, 3, 2.0);
    std::vector<double> out(3);
    nm.eval(0.3, 2.0, out);
    for (std::size_t k = 1; k <= 3; ++k) {
        const double expect = 0.5 * std::pow(double(k), -2.0) * std::sqrt(2.0) * std::sin(k * M_PI * 0.3) * 2.0;
        EXPECT_NEAR(out[k - 1], expect, 1e-15);
    }
    double l2 = 0;
    for (double v : out) l2 += v * v;
    EXPECT_NEAR(nm.l2_norm(0.3, 2.0), std::sqrt(l2), 1e-15);
    EXPECT_DOUBLE_EQ(NoiseModel::make(NoiseFamily::branching, 1, 1, 2).g(-4.0), std::pow(4.0, 0.55));
    EXPECT_DOUBLE_EQ(NoiseModel::make(NoiseFamily::holder, 1, 1, 2).g(-4.0), -std::pow(4.0, 0.55));
}

TEST(Noise, RangeChecks) {
    auto nm = NoiseModel::make(NoiseFamily::linear, 0.5, 4, 2.0);
    nm.spatial_decay = 1.5;
    EXPECT_THROW(nm.validate(), ConfigError);
    nm = NoiseModel::make(NoiseFamily::linear, 0.5, 4, 2.0);
    nm.kappa_bar = 0.4;
    EXPECT_THROW(nm.validate(), ConfigError);
}

TEST(Noise, DistanceBetweenModels) {
    const Grid1D g(0.0, 1.0, 20);
    const auto a = NoiseModel::make(NoiseFamily::linear, 0.5, 4, 2.0);
    EXPECT_EQ(noise_distance(a, a, g, 10.0, 50), 0.0);
    const auto b = NoiseModel::make(NoiseFamily::linear, 0.6, 4, 2.0);
    EXPECT_GT(noise_distance(a, b, g, 10.0, 50), 0.0);
}
