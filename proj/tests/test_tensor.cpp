#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sigtools/tensor.hpp"

using namespace sigtools;

namespace {

TruncatedTensor random_tensor(std::mt19937_64& g, int d, int n, double level0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    TruncatedTensor t(d, n);
    for (double& x : t.data()) x = nd(g);
    t.data()[0] = level0;
    return t;
}

double rel_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
    return max_abs_diff(a, b) / std::max(1.0, std::max(max_abs(a), max_abs(b)));
}

} // namespace

TEST(Word, ParseAndRender) {
    EXPECT_EQ(Word::parse("1,2,2").str(), "1,2,2");
    EXPECT_EQ(Word::parse("").degree(), 0);
    EXPECT_EQ((Word{1} + Word{2, 3}).str(), "1,2,3");
}

TEST(Word, IndexRoundTrip) {
    for (int d = 1; d <= 3; ++d)
        for (int k = 0; k <= 4; ++k)
            for (std::size_t i = 0; i < level_size(d, k); ++i) EXPECT_EQ(word_index(word_at(d, k, i), d), i);
    EXPECT_EQ(words_up_to(2, 4).size(), 31u);
}

TEST(TensorMul, UnitPlusLetters) {
    auto a = TruncatedTensor::identity(2, 2) + TruncatedTensor::letter(2, 2, 1);
    auto b = TruncatedTensor::identity(2, 2) + TruncatedTensor::letter(2, 2, 2);
    auto c = a * b;
    EXPECT_EQ(c[Word{}], 1.0);
    EXPECT_EQ(c[Word{1}], 1.0);
    EXPECT_EQ(c[Word{2}], 1.0);
    EXPECT_EQ(c[Word({1, 2})], 1.0);
    EXPECT_EQ(c[Word({2, 1})], 0.0);
    EXPECT_EQ(c[Word({1, 1})], 0.0);
}

TEST(TensorMul, UnitLaw) {
    auto g = oracle::rng(1);
    auto a = random_tensor(g, 3, 4, 0.7);
    EXPECT_EQ(TruncatedTensor::identity(3, 4) * a, a);
    EXPECT_EQ(a * TruncatedTensor::identity(3, 4), a);
}

TEST(TensorMul, ExpLettersProduct) {
    auto p = tensor_exp(TruncatedTensor::letter(2, 2, 1)) * tensor_exp(TruncatedTensor::letter(2, 2, 2));
    EXPECT_DOUBLE_EQ(p[Word({1, 2})], 1.0);
    EXPECT_DOUBLE_EQ(p[Word({2, 1})], 0.0);
    EXPECT_DOUBLE_EQ(p[Word({1, 1})], 0.5);
    EXPECT_DOUBLE_EQ(p[Word({2, 2})], 0.5);
    // same two-segment path integrated directly
    auto ref = oracle::riemann_signature(Stream::from_rows({{0, 0}, {1, 0}, {1, 1}}), 2, 10000);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(p.level(2)[i], ref[2][i], 1e-8);
}

TEST(TensorMul, MismatchedShapesThrow) {
    EXPECT_THROW(TruncatedTensor(2, 2) * TruncatedTensor(3, 2), DimensionMismatch);
    EXPECT_THROW(TruncatedTensor(2, 2) * TruncatedTensor(2, 3), DimensionMismatch);
    EXPECT_NO_THROW(TruncatedTensor(2, 2) * truncate(TruncatedTensor(2, 3), 2));
}

TEST(TensorMul, Associativity) {
    auto g = oracle::rng(2);
    for (int d = 1; d <= 4; ++d)
        for (int n = 1; n <= 6; ++n) {
            if (level_size(d, n) > 5000) continue;
            auto a = random_tensor(g, d, n, 1.0), b = random_tensor(g, d, n, -0.5), c = random_tensor(g, d, n, 0.3);
            EXPECT_LE(rel_diff((a * b) * c, a * (b * c)), 1e-12) << "d=" << d << " n=" << n;
        }
}

TEST(TensorExp, Examples) {
    auto e0 = tensor_exp(TruncatedTensor(3, 4));
    EXPECT_EQ(e0, TruncatedTensor::identity(3, 4));

    const double c = 0.7;
    auto e = tensor_exp(TruncatedTensor::letter(1, 6, 1, c));
    double f = 1.0;
    for (int k = 0; k <= 6; ++k) {
        if (k > 0) f *= c / k;
        EXPECT_NEAR(e.level(k)[0], f, 1e-15);
    }

    TruncatedTensor br(2, 2);
    br[Word({1, 2})] = 1.0;
    br[Word({2, 1})] = -1.0;
    auto eb = tensor_exp(br);
    EXPECT_EQ(eb, TruncatedTensor::identity(2, 2) + br);
}

TEST(TensorExp, DomainError) {
    EXPECT_THROW(tensor_exp(TruncatedTensor::identity(2, 3)), DomainError);
    EXPECT_THROW(tensor_log(TruncatedTensor(2, 3)), DomainError);
}

TEST(TensorLog, Examples) {
    EXPECT_EQ(tensor_log(TruncatedTensor::identity(2, 4)), TruncatedTensor(2, 4));
    for (int n = 1; n <= 8; ++n) {
        auto l = tensor_log(tensor_exp(TruncatedTensor::letter(1, n, 1, 1.3)));
        EXPECT_NEAR(l.level(1)[0], 1.3, 1e-15);
        for (int k = 2; k <= n; ++k) EXPECT_NEAR(l.level(k)[0], 0.0, 1e-14);
    }
    auto two = tensor_exp(TruncatedTensor::letter(2, 2, 1)) * tensor_exp(TruncatedTensor::letter(2, 2, 2));
    auto l = tensor_log(two);
    EXPECT_NEAR(l[Word({1, 2})], 0.5, 1e-15);
    EXPECT_NEAR(l[Word({2, 1})], -0.5, 1e-15);
    EXPECT_NEAR(l[Word({1, 1})], 0.0, 1e-15);
    EXPECT_NEAR(l[Word({2, 2})], 0.0, 1e-15);
    EXPECT_LE(rel_diff(tensor_exp(l), two), 1e-15);
}

TEST(TensorLog, RoundTrips) {
    auto g = oracle::rng(3);
    for (int d = 1; d <= 4; ++d)
        for (int n = 1; n <= 6; ++n) {
            if (level_size(d, n) > 5000) continue;
            auto a = random_tensor(g, d, n, 1.0);
            a *= 0.5;
            a.data()[0] = 1.0;
            EXPECT_LE(rel_diff(tensor_exp(tensor_log(a)), a), 1e-10);
            auto b = random_tensor(g, d, n, 0.0);
            b *= 0.5;
            EXPECT_LE(rel_diff(tensor_log(tensor_exp(b)), b), 1e-10);
        }
}

TEST(Inner, Examples) {
    auto sig = tensor_exp(TruncatedTensor::letter(2, 3, 1)) * tensor_exp(TruncatedTensor::letter(2, 3, 2));
    EXPECT_EQ(inner(Word{}, sig), 1.0);
    EXPECT_EQ(inner(Word{1}, tensor_exp(TruncatedTensor::letter(1, 3, 1, 0.25))), 0.25);
    EXPECT_DOUBLE_EQ(inner(Word({1, 2}), sig), 1.0);
    EXPECT_THROW(inner(Word({1, 1, 1, 1}), sig), OutOfDepth);
    EXPECT_THROW(inner(Word({3}), sig), DataError);
}

TEST(Shuffle, Examples) {
    auto a = shuffle(Word{1}, Word{2});
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(a.at(Word({1, 2})), 1);
    EXPECT_EQ(a.at(Word({2, 1})), 1);
    auto b = shuffle(Word{1}, Word{});
    EXPECT_EQ(b.size(), 1u);
    EXPECT_EQ(b.at(Word{1}), 1);
    auto c = shuffle(Word({1, 1}), Word{1});
    EXPECT_EQ(c.size(), 1u);
    EXPECT_EQ(c.at(Word({1, 1, 1})), 3);
    EXPECT_THROW(shuffle(Word({1, 1}), Word{1}, 2), OutOfDepth);
}

TEST(Shuffle, MatchesBruteForceInterleavings) {
    for (int du = 0; du <= 3; ++du)
        for (int dv = 0; dv <= 3; ++dv)
            for (const auto& u : oracle::all_words(2, du))
                for (const auto& v : oracle::all_words(3, dv)) {
                    auto got = shuffle(Word(u), Word(v));
                    auto want = oracle::brute_shuffle(u, v);
                    ASSERT_EQ(got.size(), want.size());
                    long long total = 0;
                    for (const auto& [w, c] : want) {
                        EXPECT_EQ(got.at(Word(w)), c);
                        total += c;
                    }
                    long long binom = 1;
                    for (int i = 1; i <= du; ++i) binom = binom * (du + dv - i + 1) / i;
                    EXPECT_EQ(total, binom);
                }
}

TEST(Shuffle, CommutativeAndAssociative) {
    auto words = oracle::all_words(2, 2);
    auto ones = oracle::all_words(2, 1);
    words.insert(words.end(), ones.begin(), ones.end());
    for (const auto& u : words)
        for (const auto& v : words) {
            EXPECT_EQ(shuffle(Word(u), Word(v)), shuffle(Word(v), Word(u)));
            for (const auto& w : ones) {
                WordSum su{{Word(u), 1}}, sv{{Word(v), 1}}, sw{{Word(w), 1}};
                EXPECT_EQ(shuffle(shuffle(su, sv), sw), shuffle(su, shuffle(sv, sw)));
            }
        }
}

TEST(Shuffle, IdentityOnGrouplike) {
    auto g = oracle::rng(4);
    for (int d = 2; d <= 3; ++d) {
        const int n = 5;
        // products of exponentials of level-1 elements are grouplike
        auto s = TruncatedTensor::identity(d, n);
        for (int seg = 0; seg < 4; ++seg) {
            auto x = truncate(random_tensor(g, d, n, 0.0), 1);
            TruncatedTensor step(d, n);
            std::copy(x.level(1).begin(), x.level(1).end(), step.level(1).begin());
            s = s * tensor_exp(step * 0.4);
        }
        auto words = words_up_to(d, n);
        for (const auto& u : words)
            for (const auto& v : words) {
                if (u.degree() + v.degree() > n) continue;
                const double lhs = inner(u, s) * inner(v, s);
                const double rhs = inner(shuffle(u, v), s);
                EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
            }
    }
}

TEST(GradeNorms, Examples) {
    auto z = grade_norms(TruncatedTensor(2, 3));
    for (double x : z.norms) EXPECT_EQ(x, 0.0);
    const double c = -1.7;
    auto g = grade_norms(tensor_exp(TruncatedTensor::letter(2, 5, 2, c)), NormFlavor::l1);
    double f = 1.0;
    for (int k = 0; k <= 5; ++k) {
        if (k > 0) f *= std::abs(c) / k;
        EXPECT_NEAR(g.norms[static_cast<std::size_t>(k)], f, 1e-14);
    }
    TruncatedTensor t(2, 1);
    t[Word{1}] = 3.0;
    t[Word{2}] = -4.0;
    EXPECT_EQ(grade_norms(t, NormFlavor::l1).norms[1], 7.0);
    EXPECT_EQ(grade_norms(t, NormFlavor::l2).norms[1], 5.0);
    EXPECT_EQ(grade_norms(t, NormFlavor::linf).norms[1], 4.0);
}

TEST(TensorAlgebra, GrouplikeFlagIsAdvisory) {
    auto s = tensor_exp(TruncatedTensor::letter(2, 3, 1));
    EXPECT_FALSE(s.grouplike());
    auto e = TruncatedTensor::letter(2, 3, 1);
    EXPECT_EQ(e.dim(), 2);
    s.set_grouplike(true);
    EXPECT_TRUE((s * s).grouplike());
    EXPECT_FALSE((s * e).grouplike());
}
