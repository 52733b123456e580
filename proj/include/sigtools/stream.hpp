#ifndef SIGTOOLS_STREAM_HPP
#define SIGTOOLS_STREAM_HPP

// Piecewise-linear streams in R^d: CSV ingestion, canonical transforms,
// signatures via Chen concatenation of segment exponentials, and a
// partition-refinement estimate of the d_p rough path distance.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sigtools/errors.hpp"
#include "sigtools/lie.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

/// Samples (t_i, x_i) of a path in R^d, interpolated linearly between
/// samples. Times are strictly increasing and every coordinate is finite.
class Stream {
public:
    Stream() = default;

    Stream(int dim, std::vector<double> times, std::vector<double> points)
        : dim_(dim), times_(std::move(times)), points_(std::move(points)) {
        if (dim_ < 1) throw DataError("stream dimension must be >= 1");
        if (times_.empty()) throw DataError("stream needs at least one sample");
        if (points_.size() != times_.size() * static_cast<std::size_t>(dim_))
            throw DimensionMismatch("stream points do not match times x dimension");
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!std::isfinite(times_[i])) throw DataError("non-finite time at sample " + std::to_string(i));
            if (i > 0 && !(times_[i] > times_[i - 1]))
                throw DataError("times not strictly increasing at sample " + std::to_string(i));
        }
        for (double x : points_)
            if (!std::isfinite(x)) throw DataError("non-finite stream value");
    }

    /// Rows of points with times 0, 1, 2, ...
    static Stream from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw DataError("stream needs at least one sample");
        const int d = static_cast<int>(rows.front().size());
        std::vector<double> t, p;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(rows[i].size()) != d) throw DimensionMismatch("ragged stream rows");
            t.push_back(static_cast<double>(i));
            p.insert(p.end(), rows[i].begin(), rows[i].end());
        }
        return Stream(d, std::move(t), std::move(p));
    }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return times_.size(); }
    double time(std::size_t i) const { return times_[i]; }
    double start_time() const { return times_.front(); }
    double end_time() const { return times_.back(); }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& raw_points() const noexcept { return points_; }

    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }

    std::vector<double> increment(std::size_t segment) const {
        std::vector<double> inc(static_cast<std::size_t>(dim_));
        auto a = point(segment), b = point(segment + 1);
        for (std::size_t j = 0; j < inc.size(); ++j) inc[j] = b[j] - a[j];
        return inc;
    }

    /// Linearly interpolated position at time t (clamped to the interval).
    std::vector<double> at(double t) const {
        if (t <= times_.front()) return {point(0).begin(), point(0).end()};
        if (t >= times_.back()) return {point(size() - 1).begin(), point(size() - 1).end()};
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
        const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
        std::vector<double> x(static_cast<std::size_t>(dim_));
        auto a = point(i), b = point(i + 1);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = a[j] + w * (b[j] - a[j]);
        return x;
    }

    /// The sub-path on [t0, t1], with interpolated endpoints.
    Stream restrict(double t0, double t1) const {
        if (!(t0 < t1)) throw DataError("restrict needs t0 < t1");
        if (t0 < times_.front() || t1 > times_.back()) throw DataError("restrict interval outside stream");
        std::vector<double> t{t0}, p = at(t0);
        for (std::size_t i = 0; i < size(); ++i) {
            if (times_[i] > t0 && times_[i] < t1) {
                t.push_back(times_[i]);
                p.insert(p.end(), point(i).begin(), point(i).end());
            }
        }
        auto end = at(t1);
        t.push_back(t1);
        p.insert(p.end(), end.begin(), end.end());
        return Stream(dim_, std::move(t), std::move(p));
    }

    /// The same image traversed backwards over the same time interval.
    Stream reverse() const {
        std::vector<double> t(size()), p;
        p.reserve(points_.size());
        const double a = times_.front(), b = times_.back();
        for (std::size_t i = 0; i < size(); ++i) {
            t[i] = a + b - times_[size() - 1 - i];
            auto x = point(size() - 1 - i);
            p.insert(p.end(), x.begin(), x.end());
        }
        return Stream(dim_, std::move(t), std::move(p));
    }

    /// This path followed by `next`, translated to start where this one ends
    /// and shifted in time to start at this stream's end time.
    Stream concat(const Stream& next) const {
        if (next.dim() != dim_) throw DimensionMismatch("concatenating streams of different dimension");
        std::vector<double> t = times_, p = points_;
        auto last = point(size() - 1);
        auto first = next.point(0);
        for (std::size_t i = 1; i < next.size(); ++i) {
            t.push_back(times_.back() + next.time(i) - next.start_time());
            auto x = next.point(i);
            for (std::size_t j = 0; j < x.size(); ++j) p.push_back(last[j] + x[j] - first[j]);
        }
        return Stream(dim_, std::move(t), std::move(p));
    }

    /// Affine time change onto [0, 1].
    Stream normalized_time() const {
        std::vector<double> t = times_;
        if (size() == 1) {
            t[0] = 0.0;
        } else {
            const double a = times_.front(), len = times_.back() - times_.front();
            for (double& x : t) x = (x - a) / len;
            t.back() = 1.0;
        }
        return Stream(dim_, std::move(t), points_);
    }

    /// Length under the given norm on R^d.
    double total_variation(NormFlavor flavor = NormFlavor::l1) const {
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < size(); ++i) len += level_norm(increment(i), flavor);
        return len;
    }

private:
    int dim_ = 1;
    std::vector<double> times_;
    std::vector<double> points_;
};

/// Parses CSV with header "t,x1,...,xd". Row numbers in errors are 1-based
/// line numbers of the input.
inline Stream ingest_csv(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    auto trim = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t b = 0;
        while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
        return s.substr(b);
    };
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++row;
    auto header = split(trim(line));
    if (header.size() < 2 || trim(header[0]) != "t") throw ParseError("header must be t,x1,...,xd", row);
    for (std::size_t j = 1; j < header.size(); ++j)
        if (trim(header[j]) != "x" + std::to_string(j)) throw ParseError("header must be t,x1,...,xd", row);
    const int d = static_cast<int>(header.size()) - 1;
    std::vector<double> times, points;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()), row);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string c = trim(cells[j]);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v))
                throw ParseError("non-numeric cell '" + c + "'", row);
            if (j == 0) {
                if (!times.empty() && !(v > times.back())) throw ParseError("times not strictly increasing", row);
                times.push_back(v);
            } else {
                points.push_back(v);
            }
        }
    }
    if (times.empty()) throw ParseError("no data rows", row);
    return Stream(d, std::move(times), std::move(points));
}

inline Stream ingest_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return ingest_csv(in);
}

inline void write_csv(std::ostream& out, const Stream& s) {
    out << "t";
    for (int j = 1; j <= s.dim(); ++j) out << ",x" << j;
    out << "\n" << std::setprecision(17);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << s.time(i);
        for (double x : s.point(i)) out << "," << x;
        out << "\n";
    }
}

/// Prepends the time coordinate: dimension d -> d + 1, time is letter 1.
inline Stream time_augment(const Stream& s) {
    std::vector<double> p;
    for (std::size_t i = 0; i < s.size(); ++i) {
        p.push_back(s.time(i));
        auto x = s.point(i);
        p.insert(p.end(), x.begin(), x.end());
    }
    return Stream(s.dim() + 1, s.times(), std::move(p));
}

/// Lead-lag embedding into R^{2d}: coordinates 1..d lead, d+1..2d lag. Each
/// data increment is applied to the lead half first (at the midpoint time),
/// then the lag half catches up.
inline Stream lead_lag(const Stream& s) {
    const int d = s.dim();
    std::vector<double> t, p;
    auto push = [&](double time, std::span<const double> lead, std::span<const double> lag) {
        t.push_back(time);
        p.insert(p.end(), lead.begin(), lead.end());
        p.insert(p.end(), lag.begin(), lag.end());
    };
    push(s.time(0), s.point(0), s.point(0));
    for (std::size_t i = 1; i < s.size(); ++i) {
        push(0.5 * (s.time(i - 1) + s.time(i)), s.point(i), s.point(i - 1));
        push(s.time(i), s.point(i), s.point(i));
    }
    return Stream(2 * d, std::move(t), std::move(p));
}

enum class Transform { none, time, leadlag };

inline Stream apply_transform(const Stream& s, Transform tr) {
    switch (tr) {
    case Transform::none: return s;
    case Transform::time: return time_augment(s);
    case Transform::leadlag: return lead_lag(s);
    }
    return s;
}

/// Running signature S <- S (x) exp(delta), updated in place.
class SignatureAccumulator {
public:
    SignatureAccumulator(int dim, int depth) : sig_(TruncatedTensor::identity(dim, depth)) {
        scratch_.resize(level_size(dim, depth));
        scratch2_.resize(level_size(dim, depth));
    }

    void push_increment(std::span<const double> delta) {
        const int d = sig_.dim(), n = sig_.depth();
        const std::size_t du = static_cast<std::size_t>(d);
        // new S_k = S_k + (...((S_0 D/k + S_1) D/(k-1) + S_2)...) D/1, descending k
        for (int k = n; k >= 1; --k) {
            std::size_t len = 1;
            scratch_[0] = sig_.data()[0];
            for (int m = 1; m <= k; ++m) {
                const double scale = 1.0 / (k - m + 1);
                auto lower = sig_.level(m);
                for (std::size_t p = 0; p < len; ++p) {
                    const double c = scratch_[p] * scale;
                    double* dst = scratch2_.data() + p * du;
                    for (std::size_t q = 0; q < du; ++q) dst[q] = c * delta[q];
                }
                len *= du;
                if (m < k) {
                    for (std::size_t p = 0; p < len; ++p) scratch_[p] = scratch2_[p] + lower[p];
                } else {
                    for (std::size_t p = 0; p < len; ++p) lower[p] += scratch2_[p];
                }
            }
        }
    }

    const TruncatedTensor& value() const noexcept { return sig_; }
    TruncatedTensor take() {
        sig_.set_grouplike(true);
        return std::move(sig_);
    }

private:
    TruncatedTensor sig_;
    std::vector<double> scratch_, scratch2_;
};

/// Truncated signature of the piecewise-linear path, flagged grouplike.
inline TruncatedTensor signature(const Stream& s, int depth) {
    if (depth < 1) throw DataError("signature depth must be >= 1");
    SignatureAccumulator acc(s.dim(), depth);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) acc.push_increment(s.increment(i));
    return acc.take();
}

/// Lyndon coordinates of log S.
inline LieCoordinates log_signature(const Stream& s, int depth) {
    const TruncatedTensor sig = signature(s, depth);
    return tensor_to_lie_coords(tensor_log(sig), level_norm(sig.data(), NormFlavor::l2));
}

/// Lower-bound profile of the d_p distance: estimates[k-1] is the supremum of
/// the partition sum over all partitions with breakpoints on the dyadic grid
/// of level k, so the profile is non-decreasing.
struct PartitionDistanceReport {
    double p = 1.0;
    std::vector<int> levels;
    std::vector<double> estimates;
};

/// max_{m <= floor(p)} ||S^m(a) - S^m(b)||^{p/m}
inline double dp_increment_cost(const TruncatedTensor& a, const TruncatedTensor& b, double p, NormFlavor flavor) {
    double cost = 0.0;
    for (int m = 1; m <= a.depth(); ++m) {
        auto la = a.level(m), lb = b.level(m);
        std::vector<double> diff(la.size());
        for (std::size_t i = 0; i < la.size(); ++i) diff[i] = la[i] - lb[i];
        cost = std::max(cost, std::pow(level_norm(diff, flavor), p / m));
    }
    return cost;
}

inline PartitionDistanceReport dp_distance_estimate(const Stream& a, const Stream& b, double p, int max_level,
                                                    NormFlavor flavor = NormFlavor::l1) {
    if (!(p >= 1.0)) throw DomainError("d_p distance needs p >= 1");
    if (a.dim() != b.dim()) throw DimensionMismatch("d_p distance between streams of different dimension");
    if (max_level < 1 || max_level > 12) throw DataError("dyadic levels must lie in 1..12");
    const int depth = static_cast<int>(std::floor(p));
    const Stream na = a.normalized_time(), nb = b.normalized_time();
    const std::size_t cells = std::size_t{1} << max_level;

    auto cell_signatures = [&](const Stream& s) {
        std::vector<TruncatedTensor> out;
        out.reserve(cells);
        for (std::size_t j = 0; j < cells; ++j) {
            const double t0 = static_cast<double>(j) / static_cast<double>(cells);
            const double t1 = static_cast<double>(j + 1) / static_cast<double>(cells);
            if (s.size() == 1) {
                out.push_back(TruncatedTensor::identity(s.dim(), depth));
            } else {
                out.push_back(signature(s.restrict(t0, t1), depth));
            }
        }
        return out;
    };
    std::vector<TruncatedTensor> ca = cell_signatures(na), cb = cell_signatures(nb);

    PartitionDistanceReport report{p, {}, {}};
    std::vector<std::vector<TruncatedTensor>> per_level_a(static_cast<std::size_t>(max_level) + 1),
        per_level_b(static_cast<std::size_t>(max_level) + 1);
    per_level_a[static_cast<std::size_t>(max_level)] = ca;
    per_level_b[static_cast<std::size_t>(max_level)] = cb;
    for (int k = max_level - 1; k >= 1; --k) {
        auto& fa = per_level_a[static_cast<std::size_t>(k) + 1];
        auto& fb = per_level_b[static_cast<std::size_t>(k) + 1];
        for (std::size_t j = 0; j + 1 < fa.size(); j += 2) {
            per_level_a[static_cast<std::size_t>(k)].push_back(tensor_mul(fa[j], fa[j + 1]));
            per_level_b[static_cast<std::size_t>(k)].push_back(tensor_mul(fb[j], fb[j + 1]));
        }
    }
    for (int k = 1; k <= max_level; ++k) {
        const auto& la = per_level_a[static_cast<std::size_t>(k)];
        const auto& lb = per_level_b[static_cast<std::size_t>(k)];
        const std::size_t m = la.size();
        // best[j]: sup of the partition sum over partitions of [0, u_j]
        std::vector<double> best(m + 1, -std::numeric_limits<double>::infinity());
        best[0] = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            TruncatedTensor sa = TruncatedTensor::identity(a.dim(), depth);
            TruncatedTensor sb = sa;
            for (std::size_t j = i + 1; j <= m; ++j) {
                sa = tensor_mul(sa, la[j - 1]);
                sb = tensor_mul(sb, lb[j - 1]);
                best[j] = std::max(best[j], best[i] + dp_increment_cost(sa, sb, p, flavor));
            }
        }
        report.levels.push_back(k);
        report.estimates.push_back(best[m]);
    }
    return report;
}

} // namespace sigtools

#endif // SIGTOOLS_STREAM_HPP
