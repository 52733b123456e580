#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sigtools/expected_sig.hpp"

using namespace sigtools;

namespace {

const Disk unit_disk{1.0, {0.0, 0.0}};

double centre(const ExpectedSigField& f, const GridDomain& dom, const Word& w) {
    return f.at_node(dom.nearest_interior({0.0, 0.0}))[w];
}

} // namespace

TEST(GridDomain, Geometry) {
    GridDomain dom(unit_disk, 0.1);
    EXPECT_TRUE(dom.inside({0.0, 0.0}));
    EXPECT_TRUE(dom.inside({0.7, -0.7}));
    EXPECT_FALSE(dom.inside({0.8, 0.8}));
    const auto p = dom.interior_point(dom.nearest_interior({0.31, -0.52}));
    EXPECT_NEAR(p[0], 0.3, 1e-12);
    EXPECT_NEAR(p[1], -0.5, 1e-12);
    // exit point of an outward step lies on the circle
    const auto e = dom.exit_point({0.5, 0.0}, {1.5, 0.5});
    EXPECT_NEAR(std::hypot(e[0], e[1]), 1.0, 1e-12);
    EXPECT_THROW(GridDomain(Polygon{{{0.1, 0.1}, {0.2, 0.1}, {0.1, 0.2}}}, 0.5), DataError);
}

TEST(SolveRecurrence, LowLevels) {
    GridDomain dom(unit_disk, 0.05);
    auto f = solve_recurrence(dom, 3);
    EXPECT_LE(f.max_relative_residual, 1e-10);
    for (std::size_t n = 0; n < dom.interior_count(); ++n) {
        auto t = f.at_node(n);
        EXPECT_EQ(t[Word{}], 1.0);
        EXPECT_EQ(t[Word{1}], 0.0);
        EXPECT_EQ(t[Word{2}], 0.0);
    }
    EXPECT_THROW(solve_recurrence(dom, 1), DataError);
}

TEST(SolveRecurrence, LevelTwoMatchesQuadratic) {
    // -Laplace f = 1 with zero boundary data on the unit disk: f = (1 - |z|^2) / 4
    GridDomain dom(unit_disk, 0.02);
    auto f = solve_recurrence(dom, 2);
    double worst = 0.0;
    for (std::size_t n = 0; n < dom.interior_count(); ++n) {
        const auto z = dom.interior_point(n);
        const double want = (1.0 - z[0] * z[0] - z[1] * z[1]) / 4.0;
        auto t = f.at_node(n);
        worst = std::max({worst, std::abs(t[Word({1, 1})] - want), std::abs(t[Word({2, 2})] - want)});
        EXPECT_EQ(t[Word({1, 2})], 0.0);
        EXPECT_EQ(t[Word({2, 1})], 0.0);
        // nonnegative source, zero boundary data: discrete maximum principle
        EXPECT_GT(t[Word({1, 1})], 0.0);
    }
    EXPECT_LE(worst, 2e-4);
    EXPECT_NEAR(centre(f, dom, Word({1, 1})), 0.25, 1e-4);
}

TEST(SolveRecurrence, SecondOrderGridConvergence) {
    std::vector<double> v;
    for (double h : {0.04, 0.02, 0.01}) {
        GridDomain dom(unit_disk, h);
        v.push_back(centre(solve_recurrence(dom, 2), dom, Word({1, 1})));
    }
    const double p = std::log2((v[0] - v[1]) / (v[1] - v[2]));
    EXPECT_GT(p, 1.5);
    EXPECT_LT(p, 2.5);
    EXPECT_NEAR(v[2], 0.25, 1e-5);
}

TEST(SolveRecurrence, OddLevelsVanishAndFourthMoment) {
    GridDomain dom(unit_disk, 0.02);
    auto f = solve_recurrence(dom, 4);
    auto t = f.at_node(dom.nearest_interior({0.0, 0.0}));
    for (double x : t.level(3)) EXPECT_LE(std::abs(x), 1e-10);
    // word iiii only sees the exit point: E[cos^4] / 4! = 1/64
    EXPECT_NEAR(t[Word({1, 1, 1, 1})], 1.0 / 64.0, 1e-4);
    EXPECT_NEAR(t[Word({2, 2, 2, 2})], 1.0 / 64.0, 1e-4);
}

TEST(SolveRecurrence, SquareTorsionConstant) {
    // centre value of the torsion function on [-1, 1]^2
    GridDomain dom(Polygon{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}}, 0.03);
    auto f = solve_recurrence(dom, 2);
    EXPECT_NEAR(centre(f, dom, Word({1, 1})), 0.2946854, 1e-3);
    EXPECT_NEAR(centre(f, dom, Word({2, 2})), 0.2946854, 1e-3);
}

TEST(MonteCarlo, ReproducibleAndThreadIndependent) {
    GridDomain dom(unit_disk, 0.1);
    auto a = mc_expected_sig(dom, {0.1, 0.2}, 3, 300, 1e-3, 17, 1);
    auto b = mc_expected_sig(dom, {0.1, 0.2}, 3, 300, 1e-3, 17, 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    auto c = mc_expected_sig(dom, {0.1, 0.2}, 3, 300, 1e-3, 18, 1);
    EXPECT_NE(a.mean, c.mean);
    auto one = mc_expected_sig(dom, {0.0, 0.0}, 2, 1, 1e-3, 5, 1);
    EXPECT_EQ(one.std_error, TruncatedTensor(2, 2));
}

TEST(MonteCarlo, PathsExitOnBoundary) {
    GridDomain dom(unit_disk, 0.1);
    auto g = oracle::rng(61);
    for (int i = 0; i < 20; ++i) {
        auto s = stopped_brownian_signature(dom, {0.2, -0.3}, 2, 1e-3, g);
        const double x = 0.2 + s[Word{1}], y = -0.3 + s[Word{2}];
        EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-12);
    }
}

TEST(MonteCarlo, AgreesWithRecurrence) {
    GridDomain dom(unit_disk, 0.02);
    const Point2 z{0.3, 0.1};
    auto pde = solve_recurrence(dom, 3).at_node(dom.nearest_interior(z));
    const Point2 node = dom.interior_point(dom.nearest_interior(z));
    auto mc = mc_expected_sig(dom, node, 3, 2000, 1e-4, 23, 2);
    for (std::size_t i = 0; i < pde.data().size(); ++i)
        EXPECT_LE(std::abs(mc.mean.data()[i] - pde.data()[i]), 4.0 * mc.std_error.data()[i] + 1e-12) << "index " << i;
}

TEST(MonteCarlo, Validation) {
    GridDomain dom(unit_disk, 0.1);
    EXPECT_THROW(mc_expected_sig(dom, {2.0, 0.0}, 2, 10, 1e-3, 1), DataError);
    EXPECT_THROW(mc_expected_sig(dom, {0.0, 0.0}, 2, 0, 1e-3, 1), DataError);
    EXPECT_THROW(mc_expected_sig(dom, {0.0, 0.0}, 2, 10, 0.0, 1), DataError);
}

TEST(RadiusDiagnostic, StraightSegment) {
    const double dx = 0.6, dy = -0.8;
    auto sig = signature(Stream::from_rows({{0.0, 0.0}, {dx, dy}}), 6);
    auto r = radius_diagnostic(sig);
    double f1 = 1.0, f2 = 1.0;
    for (int n = 0; n <= 6; ++n) {
        if (n > 0) {
            f1 *= 1.4 / n;
            f2 *= 1.0 / n;
        }
        EXPECT_NEAR(r.l1[static_cast<std::size_t>(n)], f1, 1e-14);
        EXPECT_NEAR(r.l2[static_cast<std::size_t>(n)], f2, 1e-14);
    }
    for (std::size_t n = 0; n < 6; ++n) EXPECT_NEAR(r.ratio_l2[n], 1.0 / static_cast<double>(n + 1), 1e-12);
    EXPECT_NEAR(r.root_l2[0], 1.0, 1e-14);
    EXPECT_NEAR(r.root_l2[1], std::sqrt(2.0), 1e-12);
}

TEST(RadiusDiagnostic, ZeroLevelsFlagged) {
    TruncatedTensor t = TruncatedTensor::identity(2, 4);
    t[Word({1, 2})] = 0.5;
    t[Word({1, 1, 2, 2})] = 0.1;
    auto r = radius_diagnostic(t);
    EXPECT_EQ(r.zero_level, (std::vector<bool>{false, true, false, true, false}));
    EXPECT_EQ(r.ratio_l1[0], 0.0);
    EXPECT_EQ(r.ratio_l1[1], 0.0);
    EXPECT_EQ(r.root_l1[0], 0.0);
    EXPECT_THROW(radius_diagnostic(TruncatedTensor(2, 2)), DataError);
}

TEST(RadiusDiagnostic, DiskCentreProfile) {
    GridDomain dom(unit_disk, 0.05);
    auto r = radius_diagnostic(solve_recurrence(dom, 6).at_node(dom.nearest_interior({0.0, 0.0})));
    for (std::size_t n = 0; n <= 6; ++n) {
        EXPECT_EQ(r.zero_level[n], n % 2 == 1) << "level " << n;
        if (n % 2 == 0) {
            EXPECT_GT(r.l1[n], 0.0);
        }
    }
    for (std::size_t n = 0; n + 2 <= 6; n += 2) {
        EXPECT_GT(r.ratio2_l1[n], 0.0);
        EXPECT_TRUE(std::isfinite(r.ratio2_l1[n]));
    }
    for (double x : r.ratio_l1) EXPECT_EQ(x, 0.0);
}

TEST(GridDomain, PolygonEdgesAreBoundary) {
    // grid lines coincide with the edges of this square
    GridDomain dom(Polygon{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}}, 0.05);
    EXPECT_FALSE(dom.inside({1.0, 0.3}));
    EXPECT_FALSE(dom.inside({-0.4, -1.0}));
    EXPECT_FALSE(dom.inside({-1.0, 1.0}));
    EXPECT_TRUE(dom.inside({0.95, 0.95}));
    EXPECT_EQ(dom.interior_count(), 39u * 39u);
    auto f = solve_recurrence(dom, 2);
    EXPECT_NEAR(centre(f, dom, Word({1, 1})), 0.2946854, 2e-3);
}
