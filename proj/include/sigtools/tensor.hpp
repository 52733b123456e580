#ifndef SIGTOOLS_TENSOR_HPP
#define SIGTOOLS_TENSOR_HPP

// Truncated tensor algebra T^(N)(R^d): dense graded storage, the
// concatenation product, exp/log, word pairings and the shuffle product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigtools/errors.hpp"

namespace sigtools {

/// A word e_{i1}...e_{ik} over the alphabet {1..d}; indexes one coordinate
/// iterated integral. Letters are 1-based.
struct Word {
    std::vector<int> letters;

    Word() = default;
    Word(std::initializer_list<int> l) : letters(l) {}
    explicit Word(std::vector<int> l) : letters(std::move(l)) {}

    int degree() const noexcept { return static_cast<int>(letters.size()); }
    bool empty() const noexcept { return letters.empty(); }

    Word operator+(const Word& rhs) const {
        Word w = *this;
        w.letters.insert(w.letters.end(), rhs.letters.begin(), rhs.letters.end());
        return w;
    }

    friend auto operator<=>(const Word&, const Word&) = default;

    /// Comma-joined letters, e.g. "1,2,2". The empty word renders as "".
    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < letters.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(letters[i]);
        }
        return out;
    }

    static Word parse(std::string_view text) {
        Word w;
        if (text.empty()) return w;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto comma = text.find(',', pos);
            if (comma == std::string_view::npos) comma = text.size();
            auto tok = text.substr(pos, comma - pos);
            if (tok.empty()) throw DataError("empty letter in word '" + std::string(text) + "'");
            int v = 0;
            for (char c : tok) {
                if (c < '0' || c > '9') throw DataError("bad letter in word '" + std::string(text) + "'");
                v = v * 10 + (c - '0');
            }
            if (v < 1) throw DataError("letters are 1-based in word '" + std::string(text) + "'");
            w.letters.push_back(v);
            pos = comma + 1;
        }
        return w;
    }
};

/// d^k
inline std::size_t level_size(int dim, int k) {
    std::size_t n = 1;
    for (int i = 0; i < k; ++i) n *= static_cast<std::size_t>(dim);
    return n;
}

/// Offset of level k in the concatenated storage: 1 + d + ... + d^{k-1}.
inline std::size_t level_offset(int dim, int k) {
    std::size_t off = 0, n = 1;
    for (int i = 0; i < k; ++i) {
        off += n;
        n *= static_cast<std::size_t>(dim);
    }
    return off;
}

/// Position of a word inside its level (lexicographic order).
inline std::size_t word_index(const Word& w, int dim) {
    std::size_t idx = 0;
    for (int l : w.letters) {
        if (l < 1 || l > dim)
            throw DataError("letter " + std::to_string(l) + " outside alphabet 1.." + std::to_string(dim));
        idx = idx * static_cast<std::size_t>(dim) + static_cast<std::size_t>(l - 1);
    }
    return idx;
}

/// Inverse of word_index for a word of the given degree.
inline Word word_at(int dim, int degree, std::size_t index) {
    std::vector<int> letters(static_cast<std::size_t>(degree));
    for (int i = degree - 1; i >= 0; --i) {
        letters[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(dim)) + 1;
        index /= static_cast<std::size_t>(dim);
    }
    return Word(std::move(letters));
}

/// All words of degree <= depth, ordered by degree then lexicographically.
inline std::vector<Word> words_up_to(int dim, int depth) {
    std::vector<Word> out;
    for (int k = 0; k <= depth; ++k)
        for (std::size_t i = 0; i < level_size(dim, k); ++i) out.push_back(word_at(dim, k, i));
    return out;
}

/// Element of the truncated tensor algebra over R^d at depth N.
///
/// Levels 0..N are stored back to back; level k holds d^k coefficients in
/// lexicographic word order. The grouplike flag is metadata set by
/// constructors that are known to produce group elements (signatures, exp of
/// Lie elements); arithmetic does not maintain it.
class TruncatedTensor {
public:
    TruncatedTensor() = default;

    TruncatedTensor(int dim, int depth) : dim_(dim), depth_(depth) {
        if (dim < 1) throw DataError("tensor dimension must be >= 1");
        if (depth < 0) throw DataError("tensor depth must be >= 0");
        data_.assign(level_offset(dim, depth + 1), 0.0);
    }

    static TruncatedTensor identity(int dim, int depth) {
        TruncatedTensor t(dim, depth);
        t.data_[0] = 1.0;
        t.grouplike_ = true;
        return t;
    }

    /// coeff * e_letter
    static TruncatedTensor letter(int dim, int depth, int letter, double coeff = 1.0) {
        TruncatedTensor t(dim, depth);
        if (depth >= 1) t[Word{letter}] = coeff;
        return t;
    }

    /// Level-1 tensor with the given coordinates.
    static TruncatedTensor from_vector(int dim, int depth, std::span<const double> v) {
        if (static_cast<int>(v.size()) != dim) throw DimensionMismatch("vector length != tensor dimension");
        TruncatedTensor t(dim, depth);
        if (depth >= 1) std::copy(v.begin(), v.end(), t.level(1).begin());
        return t;
    }

    int dim() const noexcept { return dim_; }
    int depth() const noexcept { return depth_; }

    std::span<double> level(int k) {
        return {data_.data() + level_offset(dim_, k), level_size(dim_, k)};
    }
    std::span<const double> level(int k) const {
        return {data_.data() + level_offset(dim_, k), level_size(dim_, k)};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    double& operator[](const Word& w) {
        check_word(w);
        return data_[level_offset(dim_, w.degree()) + word_index(w, dim_)];
    }
    double operator[](const Word& w) const {
        check_word(w);
        return data_[level_offset(dim_, w.degree()) + word_index(w, dim_)];
    }

    bool grouplike() const noexcept { return grouplike_; }
    void set_grouplike(bool g) noexcept { grouplike_ = g; }

    TruncatedTensor& operator+=(const TruncatedTensor& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        grouplike_ = false;
        return *this;
    }
    TruncatedTensor& operator-=(const TruncatedTensor& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        grouplike_ = false;
        return *this;
    }
    TruncatedTensor& operator*=(double s) {
        for (double& x : data_) x *= s;
        grouplike_ = false;
        return *this;
    }

    friend TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
    friend TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
    friend TruncatedTensor operator*(TruncatedTensor a, double s) { return a *= s; }
    friend TruncatedTensor operator*(double s, TruncatedTensor a) { return a *= s; }

    friend bool operator==(const TruncatedTensor& a, const TruncatedTensor& b) {
        return a.dim_ == b.dim_ && a.depth_ == b.depth_ && a.data_ == b.data_;
    }

    void check_same_shape(const TruncatedTensor& o) const {
        if (dim_ != o.dim_ || depth_ != o.depth_)
            throw DimensionMismatch("tensor shapes differ: (d=" + std::to_string(dim_) + ", N=" +
                                    std::to_string(depth_) + ") vs (d=" + std::to_string(o.dim_) +
                                    ", N=" + std::to_string(o.depth_) + ")");
    }

private:
    void check_word(const Word& w) const {
        if (w.degree() > depth_)
            throw OutOfDepth("word " + w.str() + " exceeds depth " + std::to_string(depth_));
    }

    int dim_ = 1;
    int depth_ = 0;
    std::vector<double> data_{0.0};
    bool grouplike_ = false;
};

/// Drops levels above `depth`.
inline TruncatedTensor truncate(const TruncatedTensor& a, int depth) {
    if (depth > a.depth()) throw OutOfDepth("cannot truncate to a larger depth");
    TruncatedTensor t(a.dim(), depth);
    std::copy_n(a.data().begin(), t.data().size(), t.data().begin());
    t.set_grouplike(a.grouplike());
    return t;
}

/// Truncated concatenation product.
inline TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
    a.check_same_shape(b);
    const int d = a.dim(), n = a.depth();
    TruncatedTensor r(d, n);
    for (int k = 0; k <= n; ++k) {
        auto out = r.level(k);
        for (int i = 0; i <= k; ++i) {
            auto la = a.level(i);
            auto lb = b.level(k - i);
            const std::size_t nb = lb.size();
            for (std::size_t p = 0; p < la.size(); ++p) {
                const double ap = la[p];
                if (ap == 0.0) continue;
                double* dst = out.data() + p * nb;
                for (std::size_t q = 0; q < nb; ++q) dst[q] += ap * lb[q];
            }
        }
    }
    r.set_grouplike(a.grouplike() && b.grouplike());
    return r;
}

inline TruncatedTensor operator*(const TruncatedTensor& a, const TruncatedTensor& b) { return tensor_mul(a, b); }

/// exp(a) = sum_k a^k / k!; requires a zero scalar part.
inline TruncatedTensor tensor_exp(const TruncatedTensor& a) {
    if (a.data()[0] != 0.0) throw DomainError("tensor_exp requires a zero level-0 coefficient");
    // Horner: 1 + a(1 + a/2(1 + a/3(...)))
    TruncatedTensor one = TruncatedTensor::identity(a.dim(), a.depth());
    TruncatedTensor acc = one;
    for (int k = a.depth(); k >= 1; --k) {
        acc = tensor_mul(a, acc) * (1.0 / k);
        acc += one;
    }
    return acc;
}

/// log(a) = sum_k (-1)^{k+1} (a-1)^k / k; requires a unit scalar part.
inline TruncatedTensor tensor_log(const TruncatedTensor& a) {
    if (a.data()[0] != 1.0) throw DomainError("tensor_log requires level-0 coefficient 1");
    TruncatedTensor x = a;
    x.data()[0] = 0.0;
    x.set_grouplike(false);
    // x(1 - x(1/2 - x(1/3 - ...)))
    const int n = a.depth();
    TruncatedTensor acc(a.dim(), n);
    for (int k = n; k >= 1; --k) {
        TruncatedTensor term = tensor_mul(x, acc) * -1.0;
        term.data()[0] += 1.0 / k;
        acc = std::move(term);
    }
    return tensor_mul(x, acc);
}

/// Coefficient <word, a>.
inline double inner(const Word& w, const TruncatedTensor& a) { return a[w]; }

/// Formal integer combination of words.
using WordSum = std::map<Word, long long>;

namespace detail {

inline void shuffle_into(const std::vector<int>& u, std::size_t nu, const std::vector<int>& v, std::size_t nv,
                         std::vector<int>& suffix, WordSum& out) {
    if (nu == 0 || nv == 0) {
        std::vector<int> w(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(nu));
        w.insert(w.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(nv));
        w.insert(w.end(), suffix.rbegin(), suffix.rend());
        ++out[Word(std::move(w))];
        return;
    }
    suffix.push_back(u[nu - 1]);
    shuffle_into(u, nu - 1, v, nv, suffix, out);
    suffix.back() = v[nv - 1];
    shuffle_into(u, nu, v, nv - 1, suffix, out);
    suffix.pop_back();
}

} // namespace detail

/// Shuffle product of two words: (ua) sh (vb) = (u sh vb)a + (ua sh v)b.
/// When a depth is given, deg(u) + deg(v) must not exceed it.
inline WordSum shuffle(const Word& u, const Word& v, std::optional<int> depth = std::nullopt) {
    if (depth && u.degree() + v.degree() > *depth)
        throw OutOfDepth("shuffle of " + u.str() + " and " + v.str() + " exceeds depth " + std::to_string(*depth));
    WordSum out;
    std::vector<int> suffix;
    detail::shuffle_into(u.letters, u.letters.size(), v.letters, v.letters.size(), suffix, out);
    return out;
}

/// Shuffle extended bilinearly to formal sums.
inline WordSum shuffle(const WordSum& a, const WordSum& b) {
    WordSum out;
    for (const auto& [u, cu] : a)
        for (const auto& [v, cv] : b)
            for (const auto& [w, cw] : shuffle(u, v)) out[w] += cu * cv * cw;
    return out;
}

/// <sum c_w w, a>
inline double inner(const WordSum& s, const TruncatedTensor& a) {
    double acc = 0.0;
    for (const auto& [w, c] : s) acc += static_cast<double>(c) * a[w];
    return acc;
}

enum class NormFlavor { l1, l2, linf };

struct GradeNorms {
    NormFlavor flavor = NormFlavor::l1;
    std::vector<double> norms; // level 0..N
};

inline double level_norm(std::span<const double> v, NormFlavor flavor) {
    double acc = 0.0;
    switch (flavor) {
    case NormFlavor::l1:
        for (double x : v) acc += std::abs(x);
        return acc;
    case NormFlavor::l2:
        for (double x : v) acc += x * x;
        return std::sqrt(acc);
    case NormFlavor::linf:
        for (double x : v) acc = std::max(acc, std::abs(x));
        return acc;
    }
    return acc;
}

inline GradeNorms grade_norms(const TruncatedTensor& a, NormFlavor flavor = NormFlavor::l1) {
    GradeNorms g{flavor, {}};
    for (int k = 0; k <= a.depth(); ++k) g.norms.push_back(level_norm(a.level(k), flavor));
    return g;
}

/// max |a_w - b_w| over all words.
inline double max_abs_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
    a.check_same_shape(b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline double max_abs(const TruncatedTensor& a) {
    double m = 0.0;
    for (double x : a.data()) m = std::max(m, std::abs(x));
    return m;
}

} // namespace sigtools

#endif // SIGTOOLS_TENSOR_HPP
