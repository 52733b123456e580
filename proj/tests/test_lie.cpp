#include <gtest/gtest.h>

#include <thread>

#include "oracles.hpp"
#include "sigtools/lie.hpp"
#include "sigtools/stream.hpp"

using namespace sigtools;

namespace {

std::vector<std::string> words_of(const std::vector<LyndonBasisElement>& b) {
    std::vector<std::string> out;
    for (const auto& e : b) {
        std::string s;
        for (int l : e.word.letters) s += std::to_string(l);
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST(LyndonBasis, SmallExamples) {
    EXPECT_EQ(words_of(lyndon_basis(2, 3)), (std::vector<std::string>{"1", "2", "12", "112", "122"}));
    EXPECT_EQ(words_of(lyndon_basis(1, 5)), (std::vector<std::string>{"1"}));
    auto b = lie_basis(3, 2);
    EXPECT_EQ(b->count_of_degree(2), 3u);
    EXPECT_EQ(words_of(lyndon_basis(3, 2)), (std::vector<std::string>{"1", "2", "3", "12", "13", "23"}));
}

TEST(LyndonBasis, MatchesBruteForceEnumeration) {
    for (int d = 1; d <= 4; ++d)
        for (int k = 1; k <= 6; ++k) {
            if (std::pow(d, k) > 5000) continue;
            auto basis = lie_basis(d, k);
            auto [b, e] = basis->degree_range(k);
            std::vector<oracle::Letters> got;
            for (std::size_t i = b; i < e; ++i) got.push_back((*basis)[i].word.letters);
            EXPECT_EQ(got, oracle::brute_lyndon(d, k)) << "d=" << d << " k=" << k;
        }
}

TEST(LyndonBasis, WittCounts) {
    for (int d = 1; d <= 4; ++d)
        for (int k = 1; k <= 6; ++k) {
            const long long necklaces = oracle::necklace_count(d, k);
            EXPECT_EQ(witt_dimension(d, k), necklaces) << "d=" << d << " k=" << k;
            EXPECT_EQ(static_cast<long long>(lie_basis(d, 6)->count_of_degree(k)), necklaces);
        }
}

TEST(LyndonBasis, StandardFactorization) {
    auto basis = lie_basis(3, 6);
    for (std::size_t i = 0; i < basis->size(); ++i) {
        const auto& e = (*basis)[i];
        EXPECT_TRUE(is_lyndon(e.word.letters));
        if (e.is_letter()) continue;
        const auto& u = (*basis)[static_cast<std::size_t>(e.left)].word;
        const auto& v = (*basis)[static_cast<std::size_t>(e.right)].word;
        EXPECT_EQ(u + v, e.word);
        // v is the longest proper Lyndon suffix
        for (int len = e.degree() - 1; len > v.degree(); --len) {
            std::vector<int> suf(e.word.letters.end() - len, e.word.letters.end());
            EXPECT_FALSE(is_lyndon(suf));
        }
    }
}

TEST(BracketExpand, Examples) {
    auto basis = lie_basis(2, 3);
    auto one = bracket_expand(*basis, basis->index_of(Word{1}));
    EXPECT_EQ(one, TruncatedTensor::letter(2, 3, 1));

    auto b12 = bracket_expand(*basis, basis->index_of(Word({1, 2})));
    TruncatedTensor want(2, 3);
    want[Word({1, 2})] = 1;
    want[Word({2, 1})] = -1;
    EXPECT_EQ(b12, want);

    auto b112 = bracket_expand(*basis, basis->index_of(Word({1, 1, 2})));
    TruncatedTensor w3(2, 3);
    w3[Word({1, 1, 2})] = 1;
    w3[Word({1, 2, 1})] = -2;
    w3[Word({2, 1, 1})] = 1;
    EXPECT_EQ(b112, w3);
    EXPECT_EQ(basis->render(basis->index_of(Word({1, 1, 2}))), "[1,[1,2]]");
    EXPECT_EQ(basis->render(basis->index_of(Word({1, 2, 2}))), "[[1,2],2]");
}

TEST(BracketExpand, AntisymmetricAtDegreeTwo) {
    auto basis = lie_basis(4, 2);
    for (std::size_t i = 0; i < basis->size(); ++i) {
        if ((*basis)[i].degree() != 2) continue;
        auto t = bracket_expand(*basis, i);
        for (int a = 1; a <= 4; ++a)
            for (int b = 1; b <= 4; ++b) EXPECT_EQ(t[Word({a, b})], -t[Word({b, a})]);
    }
}

TEST(LieCoords, Examples) {
    auto l = tensor_to_lie_coords(TruncatedTensor::letter(2, 3, 1));
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(l[i], i == 0 ? 1.0 : 0.0);

    auto sq = tensor_to_lie_coords(tensor_log(signature(oracle::unit_square(), 2)));
    EXPECT_NEAR((sq[Word({1, 2})]), 1.0, 1e-12);
    EXPECT_NEAR((sq[Word{1}]), 0.0, 1e-12);

    TruncatedTensor bad(2, 2);
    bad[Word({1, 2})] = 1.0;
    EXPECT_THROW(tensor_to_lie_coords(bad), NotLieElement);
    EXPECT_THROW(tensor_to_lie_coords(TruncatedTensor::identity(2, 2)), NotLieElement);
}

TEST(LieCoords, OneLetterAlphabetRejectsHigherLevels) {
    TruncatedTensor t(1, 3);
    t[Word({1, 1})] = 0.5;
    EXPECT_THROW(tensor_to_lie_coords(t), NotLieElement);
}

TEST(LieCoords, RoundTripRandomCoordinates) {
    auto g = oracle::rng(11);
    std::normal_distribution<double> nd;
    for (int d = 2; d <= 4; ++d)
        for (int n = 1; n <= 5; ++n) {
            auto basis = lie_basis(d, n);
            std::vector<double> c(basis->size());
            for (double& x : c) x = nd(g);
            LieCoordinates l(basis, c);
            auto back = tensor_to_lie_coords(l.to_tensor());
            for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(back[i], c[i], 1e-10);
        }
}

TEST(Dynkin, Examples) {
    TruncatedTensor br(2, 2);
    br[Word({1, 2})] = 1;
    br[Word({2, 1})] = -1;
    EXPECT_EQ(dynkin_check(br)[2], 0.0);

    TruncatedTensor e12(2, 2);
    e12[Word({1, 2})] = 1;
    // D(e1e2) - 2e1e2 = -e1e2 - e2e1
    EXPECT_NEAR(dynkin_check(e12)[2], std::sqrt(2.0), 1e-15);
}

TEST(Dynkin, LogSignaturesAreLie) {
    auto g = oracle::rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 3;
        auto s = oracle::random_stream(g, d, 8, 0.5);
        auto ls = tensor_log(signature(s, d == 4 ? 5 : 6));
        auto res = dynkin_check(ls);
        for (int k = 1; k < static_cast<int>(res.size()); ++k)
            EXPECT_LE(res[static_cast<std::size_t>(k)], 1e-9 * std::max(1.0, level_norm(ls.level(k), NormFlavor::l2)));
    }
}

TEST(LieBasisCache, ConcurrentFirstUse) {
    std::vector<std::shared_ptr<const LieBasis>> got(4);
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] {
        got[static_cast<std::size_t>(i)] = lie_basis(3, 5);
        (void)got[static_cast<std::size_t>(i)]->level_qr(5);
    });
    for (auto& t : ts) t.join();
    for (const auto& b : got) EXPECT_EQ(b.get(), got[0].get());
}

TEST(LieExp, Grouplike) {
    auto basis = lie_basis(2, 4);
    LieCoordinates l(basis);
    l[Word{1}] = 0.3;
    l[Word({1, 2})] = -0.7;
    auto t = lie_exp(l);
    EXPECT_TRUE(t.grouplike());
    for (const auto& u : words_up_to(2, 2))
        for (const auto& v : words_up_to(2, 2))
            EXPECT_NEAR(inner(u, t) * inner(v, t), inner(shuffle(u, v), t), 1e-14);
}
