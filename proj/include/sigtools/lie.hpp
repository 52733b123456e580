#ifndef SIGTOOLS_LIE_HPP
#define SIGTOOLS_LIE_HPP

// Free Lie algebra over R^d in the Lyndon basis: enumeration, bracket
// expansion into the tensor algebra, coordinate projection and a Dynkin-map
// membership oracle.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sigtools/errors.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

/// A Lyndon word together with its standard bracketing.
///
/// For degree >= 2 the word factors as w = uv with v the longest proper
/// Lyndon suffix; `left` and `right` index u and v in the owning basis.
struct LyndonBasisElement {
    Word word;
    int left = -1;
    int right = -1;

    int degree() const noexcept { return word.degree(); }
    bool is_letter() const noexcept { return word.degree() == 1; }
};

inline bool is_lyndon(const std::vector<int>& w) {
    const std::size_t n = w.size();
    if (n == 0) return false;
    for (std::size_t r = 1; r < n; ++r) {
        // compare w with its rotation starting at r
        for (std::size_t i = 0; i < n; ++i) {
            int a = w[i], b = w[(i + r) % n];
            if (a < b) break;
            if (a > b) return false;
            if (i + 1 == n) return false; // periodic
        }
    }
    return true;
}

/// Lyndon basis of the free Lie algebra truncated at depth N, with cached
/// per-level QR factorizations of the expansion matrices.
class LieBasis {
public:
    LieBasis(int dim, int depth) : dim_(dim), depth_(depth) {
        if (dim < 1 || depth < 1) throw DataError("lie basis needs d >= 1 and N >= 1");
        generate();
        build_expansions();
    }

    int dim() const noexcept { return dim_; }
    int depth() const noexcept { return depth_; }
    std::size_t size() const noexcept { return elements_.size(); }
    const std::vector<LyndonBasisElement>& elements() const noexcept { return elements_; }
    const LyndonBasisElement& operator[](std::size_t i) const { return elements_[i]; }

    /// Index range [begin, end) of the degree-k elements.
    std::pair<std::size_t, std::size_t> degree_range(int k) const {
        return {level_begin_[static_cast<std::size_t>(k)], level_begin_[static_cast<std::size_t>(k) + 1]};
    }

    std::size_t count_of_degree(int k) const {
        auto [b, e] = degree_range(k);
        return e - b;
    }

    /// Bracket rendering, e.g. "[1,[1,2]]".
    std::string render(std::size_t i) const {
        const auto& e = elements_[i];
        if (e.is_letter()) return std::to_string(e.word.letters[0]);
        return "[" + render(static_cast<std::size_t>(e.left)) + "," + render(static_cast<std::size_t>(e.right)) + "]";
    }

    std::size_t index_of(const Word& w) const {
        auto it = index_.find(w);
        if (it == index_.end()) throw DataError("'" + w.str() + "' is not a Lyndon basis word");
        return it->second;
    }

    /// Homogeneous degree-k part of the bracket expansion of element i.
    const Eigen::VectorXd& expansion(std::size_t i) const { return expansions_[i]; }

    /// Expansion of element i as a full tensor at this basis' depth.
    TruncatedTensor bracket_expand(std::size_t i) const {
        TruncatedTensor t(dim_, depth_);
        auto lvl = t.level(elements_[i].degree());
        const auto& v = expansions_[i];
        for (Eigen::Index j = 0; j < v.size(); ++j) lvl[static_cast<std::size_t>(j)] = v[j];
        return t;
    }

    /// Column-pivoted QR of the d^k x (#degree-k elements) expansion matrix.
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& level_qr(int k) const {
        std::call_once(qr_once_[static_cast<std::size_t>(k)], [&] {
            auto [b, e] = degree_range(k);
            Eigen::MatrixXd m(static_cast<Eigen::Index>(level_size(dim_, k)), static_cast<Eigen::Index>(e - b));
            for (std::size_t j = b; j < e; ++j) m.col(static_cast<Eigen::Index>(j - b)) = expansions_[j];
            qr_[static_cast<std::size_t>(k)] = std::make_unique<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>(m);
            mats_[static_cast<std::size_t>(k)] = std::move(m);
        });
        return *qr_[static_cast<std::size_t>(k)];
    }

    const Eigen::MatrixXd& level_matrix(int k) const {
        level_qr(k);
        return mats_[static_cast<std::size_t>(k)];
    }

private:
    void generate() {
        // Duval's algorithm yields Lyndon words in lexicographic order.
        std::vector<std::vector<Word>> by_degree(static_cast<std::size_t>(depth_) + 1);
        std::vector<int> w{0};
        while (!w.empty()) {
            by_degree[w.size()].push_back(Word(std::vector<int>(w.begin(), w.end())));
            const std::size_t m = w.size();
            while (static_cast<int>(w.size()) < depth_) w.push_back(w[w.size() - m]);
            while (!w.empty() && w.back() == dim_ - 1) w.pop_back();
            if (!w.empty()) ++w.back();
        }
        level_begin_.push_back(0);
        level_begin_.push_back(0);
        for (int k = 1; k <= depth_; ++k) {
            for (auto& word : by_degree[static_cast<std::size_t>(k)]) {
                for (int& l : word.letters) ++l; // to 1-based
                LyndonBasisElement e{word, -1, -1};
                index_[word] = elements_.size();
                elements_.push_back(std::move(e));
            }
            level_begin_.push_back(elements_.size());
        }
        for (auto& e : elements_) {
            if (e.is_letter()) continue;
            // longest proper Lyndon suffix
            for (int s = 1; s < e.degree(); ++s) {
                Word suffix(std::vector<int>(e.word.letters.begin() + s, e.word.letters.end()));
                auto it = index_.find(suffix);
                if (it != index_.end()) {
                    Word prefix(std::vector<int>(e.word.letters.begin(), e.word.letters.begin() + s));
                    e.left = static_cast<int>(index_.at(prefix));
                    e.right = static_cast<int>(it->second);
                    break;
                }
            }
        }
        qr_once_ = std::make_unique<std::once_flag[]>(static_cast<std::size_t>(depth_) + 1);
        qr_.resize(static_cast<std::size_t>(depth_) + 1);
        mats_.resize(static_cast<std::size_t>(depth_) + 1);
    }

    void build_expansions() {
        expansions_.resize(elements_.size());
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& e = elements_[i];
            if (e.is_letter()) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
                v[e.word.letters[0] - 1] = 1.0;
                expansions_[i] = std::move(v);
                continue;
            }
            const auto& u = expansions_[static_cast<std::size_t>(e.left)];
            const auto& v = expansions_[static_cast<std::size_t>(e.right)];
            const Eigen::Index nu = u.size(), nv = v.size();
            Eigen::VectorXd out = Eigen::VectorXd::Zero(nu * nv);
            // [U,V] = U V - V U
            for (Eigen::Index p = 0; p < nu; ++p) {
                if (u[p] == 0.0) continue;
                for (Eigen::Index q = 0; q < nv; ++q) out[p * nv + q] += u[p] * v[q];
            }
            for (Eigen::Index q = 0; q < nv; ++q) {
                if (v[q] == 0.0) continue;
                for (Eigen::Index p = 0; p < nu; ++p) out[q * nu + p] -= v[q] * u[p];
            }
            expansions_[i] = std::move(out);
        }
    }

    int dim_;
    int depth_;
    std::vector<LyndonBasisElement> elements_;
    std::vector<std::size_t> level_begin_;
    std::map<Word, std::size_t> index_;
    std::vector<Eigen::VectorXd> expansions_;
    mutable std::unique_ptr<std::once_flag[]> qr_once_;
    mutable std::vector<std::unique_ptr<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>> qr_;
    mutable std::vector<Eigen::MatrixXd> mats_;
};

/// Shared, process-wide basis for (d, N).
inline std::shared_ptr<const LieBasis> lie_basis(int dim, int depth) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const LieBasis>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{dim, depth}];
    if (!slot) slot = std::make_shared<const LieBasis>(dim, depth);
    return slot;
}

/// Lyndon words of degree <= N over {1..d} with standard bracketing,
/// ordered by (degree, lexicographic).
inline std::vector<LyndonBasisElement> lyndon_basis(int dim, int depth) { return lie_basis(dim, depth)->elements(); }

/// Witt's formula: dimension of the degree-k part of the free Lie algebra.
inline long long witt_dimension(int dim, int k) {
    auto mobius = [](int n) {
        int result = 1;
        for (int p = 2; p * p <= n; ++p) {
            if (n % p == 0) {
                n /= p;
                if (n % p == 0) return 0;
                result = -result;
            }
        }
        if (n > 1) result = -result;
        return result;
    };
    long long sum = 0;
    for (int m = 1; m <= k; ++m) {
        if (k % m) continue;
        long long pw = 1;
        for (int i = 0; i < k / m; ++i) pw *= dim;
        sum += mobius(m) * pw;
    }
    return sum / k;
}

/// Coordinates of a Lie element in the Lyndon basis.
class LieCoordinates {
public:
    LieCoordinates() = default;
    explicit LieCoordinates(std::shared_ptr<const LieBasis> basis)
        : basis_(std::move(basis)), coords_(basis_->size(), 0.0) {}
    LieCoordinates(std::shared_ptr<const LieBasis> basis, std::vector<double> coords)
        : basis_(std::move(basis)), coords_(std::move(coords)) {
        if (coords_.size() != basis_->size()) throw DimensionMismatch("coordinate count != basis size");
    }

    int dim() const { return basis_->dim(); }
    int depth() const { return basis_->depth(); }
    const LieBasis& basis() const { return *basis_; }
    const std::shared_ptr<const LieBasis>& basis_ptr() const { return basis_; }
    std::size_t size() const noexcept { return coords_.size(); }

    double& operator[](std::size_t i) { return coords_[i]; }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](const Word& w) { return coords_[basis_->index_of(w)]; }
    double operator[](const Word& w) const { return coords_[basis_->index_of(w)]; }

    std::span<const double> values() const noexcept { return coords_; }

    /// sum_b lambda_b * expand(b)
    TruncatedTensor to_tensor() const {
        TruncatedTensor t(dim(), depth());
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (coords_[i] == 0.0) continue;
            const auto& e = (*basis_)[i];
            auto lvl = t.level(e.degree());
            const auto& v = basis_->expansion(i);
            for (Eigen::Index j = 0; j < v.size(); ++j) lvl[static_cast<std::size_t>(j)] += coords_[i] * v[j];
        }
        return t;
    }

    /// Highest degree carrying a nonzero coordinate (0 when all vanish).
    int effective_degree() const {
        int deg = 0;
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i] != 0.0) deg = std::max(deg, (*basis_)[i].degree());
        return deg;
    }

private:
    std::shared_ptr<const LieBasis> basis_;
    std::vector<double> coords_;
};

/// Tensor expansion of a basis element into T^(N).
inline TruncatedTensor bracket_expand(const LieBasis& basis, std::size_t i) { return basis.bracket_expand(i); }

inline constexpr double lie_membership_tolerance = 1e-9;

/// Projects a Lie element onto Lyndon coordinates by a per-level least-squares
/// solve; a residual above 1e-9 * max(||a||, reference_norm) rejects `a` as
/// not a Lie element. `reference_norm` is the scale the input was computed
/// from, e.g. the signature a log-signature came from.
inline LieCoordinates tensor_to_lie_coords(const TruncatedTensor& a, double reference_norm = 0.0) {
    if (a.data()[0] != 0.0) throw NotLieElement("level-0 coefficient of a Lie element must be 0", std::abs(a.data()[0]));
    auto basis = lie_basis(a.dim(), a.depth());
    LieCoordinates out(basis);
    const double norm = std::max(level_norm(a.data(), NormFlavor::l2), reference_norm);
    double residual2 = 0.0;
    for (int k = 1; k <= a.depth(); ++k) {
        auto lvl = a.level(k);
        Eigen::Map<const Eigen::VectorXd> rhs(lvl.data(), static_cast<Eigen::Index>(lvl.size()));
        if (rhs.isZero(0.0)) continue;
        if (basis->count_of_degree(k) == 0) {
            residual2 += rhs.squaredNorm();
            continue;
        }
        const auto& qr = basis->level_qr(k);
        Eigen::VectorXd lambda = qr.solve(rhs);
        residual2 += (basis->level_matrix(k) * lambda - rhs).squaredNorm();
        auto [b, e] = basis->degree_range(k);
        for (std::size_t j = b; j < e; ++j) out[j] = lambda[static_cast<Eigen::Index>(j - b)];
    }
    const double residual = std::sqrt(residual2);
    if (residual > lie_membership_tolerance * norm)
        throw NotLieElement("tensor is not a Lie element (residual " + std::to_string(residual) + ")", residual);
    return out;
}

/// exp of a Lie element, flagged grouplike.
inline TruncatedTensor lie_exp(const LieCoordinates& l) {
    TruncatedTensor t = tensor_exp(l.to_tensor());
    t.set_grouplike(true);
    return t;
}

/// Applies the Dynkin map D(e_{i1}...e_{ik}) = [..[[e_{i1},e_{i2}],e_{i3}],..,e_{ik}]
/// to one homogeneous level.
inline std::vector<double> dynkin_map_level(std::span<const double> level, int dim, int k) {
    std::vector<double> out(level.size(), 0.0);
    if (k == 0) return out;
    std::vector<std::pair<std::vector<int>, int>> terms, next;
    for (std::size_t idx = 0; idx < level.size(); ++idx) {
        const double c = level[idx];
        if (c == 0.0) continue;
        const Word w = word_at(dim, k, idx);
        terms.assign(1, {{w.letters[0]}, 1});
        for (int j = 1; j < k; ++j) {
            next.clear();
            const int a = w.letters[static_cast<std::size_t>(j)];
            for (auto& [t, s] : terms) {
                auto right = t;
                right.push_back(a);
                next.emplace_back(std::move(right), s);
                std::vector<int> left{a};
                left.insert(left.end(), t.begin(), t.end());
                next.emplace_back(std::move(left), -s);
            }
            std::swap(terms, next);
        }
        for (const auto& [t, s] : terms) out[word_index(Word(t), dim)] += s * c;
    }
    return out;
}

/// Per-level residuals ||D(a_k) - k a_k||_2; all vanish iff a is a Lie element.
inline std::vector<double> dynkin_check(const TruncatedTensor& a) {
    if (a.data()[0] != 0.0) throw DomainError("dynkin_check requires a zero level-0 coefficient");
    std::vector<double> res(static_cast<std::size_t>(a.depth()) + 1, 0.0);
    for (int k = 1; k <= a.depth(); ++k) {
        auto lvl = a.level(k);
        auto dl = dynkin_map_level(lvl, a.dim(), k);
        double acc = 0.0;
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            const double r = dl[i] - k * lvl[i];
            acc += r * r;
        }
        res[static_cast<std::size_t>(k)] = std::sqrt(acc);
    }
    return res;
}

} // namespace sigtools

#endif // SIGTOOLS_LIE_HPP
