#include <gtest/gtest.h>

#include <complex>

#include "oracles.hpp"
#include "sigtools/development.hpp"
#include "sigtools/logode.hpp"

using namespace sigtools;

namespace {

double spectral_norm(const CMat& m) { return Eigen::JacobiSVD<CMat>(m).singularValues()(0); }

CMat pauli_x() {
    CMat p(2, 2);
    p << 0, 1, 1, 0;
    return p;
}

} // namespace

TEST(UnitaryPolicy, Validation) {
    CMat h = pauli_x();
    EXPECT_NO_THROW(UnitaryPolicy({h}));
    CMat not_herm = h;
    not_herm(0, 1) = {0.0, 1.0};
    EXPECT_THROW(UnitaryPolicy({not_herm}), DataError);
    EXPECT_THROW(UnitaryPolicy({CMat::Identity(2, 2)}), DataError);
    EXPECT_THROW(UnitaryPolicy({CMat::Zero(1, 1)}), DataError);
    EXPECT_THROW(UnitaryPolicy({h, CMat::Zero(3, 3)}), DimensionMismatch);
}

TEST(Develop, Examples) {
    auto g = oracle::rng(51);
    auto policy = UnitaryPolicy::random(3, 2, 1.0, g);
    Stream flat(2, {0.0, 1.0}, {1, 2, 1, 2});
    EXPECT_LE((develop(policy, flat).psi - CMat::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0);

    // d = 1, one segment of length c: exp(i c sigma_x) = cos c I + i sin c sigma_x
    const double c = 0.83;
    UnitaryPolicy px({pauli_x()});
    auto r = develop(px, Stream(1, {0.0, 2.0}, {0.0, c}));
    CMat want = std::cos(c) * CMat::Identity(2, 2) + std::complex<double>(0, std::sin(c)) * pauli_x();
    EXPECT_LE((r.psi - want).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(r.start_time, 0.0);
    EXPECT_EQ(r.end_time, 2.0);

    auto s = oracle::random_stream(g, 2, 10);
    auto loop = develop(policy, s.concat(s.reverse())).psi;
    EXPECT_LE((loop - CMat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);

    EXPECT_THROW(develop(policy, oracle::random_stream(g, 3, 2)), DimensionMismatch);
}

TEST(Develop, UnitarityAndMultiplicativity) {
    auto g = oracle::rng(52);
    std::uniform_int_distribution<int> uu(2, 5), dd(1, 4);
    for (int trial = 0; trial < 30; ++trial) {
        const int u = uu(g), d = dd(g);
        auto policy = UnitaryPolicy::random(u, d, 0.7, g);
        auto a = oracle::random_stream(g, d, 12), b = oracle::random_stream(g, d, 9);
        auto pa = develop(policy, a).psi, pb = develop(policy, b).psi, pab = develop(policy, a.concat(b)).psi;
        EXPECT_LE(unitarity_defect(pa), 1e-10);
        EXPECT_LE(unitarity_defect(pab), 1e-10);
        EXPECT_LE((pab - pa * pb).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Develop, SeriesWithinFactorialTail) {
    auto g = oracle::rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        auto policy = UnitaryPolicy::random(2 + trial % 3, 2, 0.5, g);
        auto s = oracle::random_stream(g, 2, 4, 0.4);
        const double x = policy.max_generator_norm() * s.total_variation(NormFlavor::l1);
        const CMat psi = develop(policy, s).psi;
        for (int n = 1; n <= 7; ++n) {
            const double res = spectral_norm(development_series(policy, signature(s, n)) - psi);
            EXPECT_LE(res, factorial_tail(x, n) + 1e-13) << "n=" << n << " x=" << x;
        }
    }
}

TEST(ExpectedDevelopment, DeterministicSampler) {
    auto g = oracle::rng(54);
    auto policy = UnitaryPolicy::random(3, 2, 1.0, g);
    auto s = oracle::random_stream(g, 2, 6);
    auto est = expected_development(policy, [&](std::mt19937_64&) { return s; }, 25, 7);
    EXPECT_LE((est.mean - develop(policy, s).psi).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(est.std_error_real.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(est.std_error_imag.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(est.count, 25u);
}

TEST(ExpectedDevelopment, MeanEntriesBounded) {
    auto g = oracle::rng(55);
    auto policy = UnitaryPolicy::random(4, 2, 1.0, g);
    auto est = expected_development(
        policy, [](std::mt19937_64& r) { return oracle::random_stream(r, 2, 5); }, 200, 3);
    EXPECT_LE(est.mean.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
}

TEST(ExpectedDevelopment, SymmetricSingleSegment) {
    const double c = 1.1;
    UnitaryPolicy px({pauli_x()});
    auto sampler = [c](std::mt19937_64& r) {
        std::bernoulli_distribution coin(0.5);
        return Stream(1, {0.0, 1.0}, {0.0, coin(r) ? c : -c});
    };
    auto est = expected_development(px, sampler, 4000, 99);
    // real part is cos(c) I for either sign; the odd part averages out
    const CMat want = std::cos(c) * CMat::Identity(2, 2);
    EXPECT_LE((est.mean.real() - want.real()).cwiseAbs().maxCoeff(), 1e-14);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            EXPECT_LE(std::abs(est.mean(i, j).imag()), 4.0 * est.std_error_imag(i, j) + 1e-15);
    EXPECT_GT(est.std_error_imag(0, 1), 0.0);
}

TEST(ExpectedDevelopment, ReproducibleUnderSeed) {
    auto g = oracle::rng(56);
    auto policy = UnitaryPolicy::random(2, 2, 1.0, g);
    auto sampler = [](std::mt19937_64& r) { return oracle::random_stream(r, 2, 4); };
    auto a = expected_development(policy, sampler, 50, 11), b = expected_development(policy, sampler, 50, 11);
    EXPECT_EQ(a.mean, b.mean);
    auto c = expected_development(policy, sampler, 50, 12);
    EXPECT_NE(a.mean, c.mean);
}
