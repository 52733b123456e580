#ifndef SIGTOOLS_EXPECTED_SIG_HPP
#define SIGTOOLS_EXPECTED_SIG_HPP

// Expected signature of planar Brownian motion started at z and stopped on
// leaving a bounded domain. The levels F = (f_0, f_1, ...) satisfy
//
//   Laplace(f_{n+2}) = -sum_i e_i e_i f_n - 2 sum_i e_i d/dz_i f_{n+1},
//   f_0 = 1, f_1 = 0, f_k = 0 on the boundary for k > 0,
//
// which is solved level by level with finite differences. A Monte Carlo
// estimator serves as an independent check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include "sigtools/errors.hpp"
#include "sigtools/stream.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

using Point2 = std::array<double, 2>;

struct Disk {
    double radius = 1.0;
    Point2 center{0.0, 0.0};
};

struct Polygon {
    std::vector<Point2> vertices; // simple polygon, either orientation
};

using DomainShape = std::variant<Disk, Polygon>;

/// Uniform grid of spacing h over a planar domain. Nodes strictly inside the
/// domain are unknowns; their exterior neighbours carry the Dirichlet data at
/// the exact boundary crossing along the grid line.
class GridDomain {
public:
    GridDomain(DomainShape shape, double h) : shape_(std::move(shape)), h_(h) {
        if (!(h > 0.0)) throw DataError("grid spacing must be positive");
        double xmin, xmax, ymin, ymax;
        if (auto* d = std::get_if<Disk>(&shape_)) {
            if (!(d->radius > 0.0)) throw DataError("disk radius must be positive");
            // grid anchored at the centre so the centre is a node
            origin_ = d->center;
            xmin = d->center[0] - d->radius;
            xmax = d->center[0] + d->radius;
            ymin = d->center[1] - d->radius;
            ymax = d->center[1] + d->radius;
        } else {
            const auto& poly = std::get<Polygon>(shape_);
            if (poly.vertices.size() < 3) throw DataError("polygon needs at least 3 vertices");
            origin_ = {0.0, 0.0};
            xmin = xmax = poly.vertices[0][0];
            ymin = ymax = poly.vertices[0][1];
            for (const auto& v : poly.vertices) {
                xmin = std::min(xmin, v[0]);
                xmax = std::max(xmax, v[0]);
                ymin = std::min(ymin, v[1]);
                ymax = std::max(ymax, v[1]);
            }
        }
        i0_ = static_cast<long>(std::floor((xmin - origin_[0]) / h)) - 1;
        j0_ = static_cast<long>(std::floor((ymin - origin_[1]) / h)) - 1;
        nx_ = static_cast<long>(std::ceil((xmax - origin_[0]) / h)) + 2 - i0_;
        ny_ = static_cast<long>(std::ceil((ymax - origin_[1]) / h)) + 2 - j0_;
        index_.assign(static_cast<std::size_t>(nx_ * ny_), -1);
        for (long j = 0; j < ny_; ++j)
            for (long i = 0; i < nx_; ++i)
                if (inside(node_point(i, j))) {
                    index_[static_cast<std::size_t>(j * nx_ + i)] = static_cast<long>(nodes_.size());
                    nodes_.push_back({i, j});
                }
        if (nodes_.empty()) throw DataError("grid has no interior nodes; reduce h");
    }

    const DomainShape& shape() const noexcept { return shape_; }
    double h() const noexcept { return h_; }
    std::size_t interior_count() const noexcept { return nodes_.size(); }
    const std::array<long, 2>& node(std::size_t n) const { return nodes_[n]; }

    Point2 node_point(long i, long j) const {
        return {origin_[0] + static_cast<double>(i + i0_) * h_, origin_[1] + static_cast<double>(j + j0_) * h_};
    }
    Point2 interior_point(std::size_t n) const { return node_point(nodes_[n][0], nodes_[n][1]); }

    /// Interior index of grid node (i, j), or -1.
    long index(long i, long j) const {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
        return index_[static_cast<std::size_t>(j * nx_ + i)];
    }

    /// Interior node closest to z; throws when that node is not interior.
    std::size_t nearest_interior(const Point2& z) const {
        const long i = std::lround((z[0] - origin_[0]) / h_) - i0_;
        const long j = std::lround((z[1] - origin_[1]) / h_) - j0_;
        const long idx = index(i, j);
        if (idx < 0) throw DataError("point is not near an interior grid node");
        return static_cast<std::size_t>(idx);
    }

    bool inside(const Point2& z) const {
        if (auto* d = std::get_if<Disk>(&shape_)) {
            const double dx = z[0] - d->center[0], dy = z[1] - d->center[1];
            return dx * dx + dy * dy < d->radius * d->radius;
        }
        const auto& v = std::get<Polygon>(shape_).vertices;
        bool in = false;
        for (std::size_t a = 0, b = v.size() - 1; a < v.size(); b = a++) {
            // points on an edge are boundary, not interior
            const double ex = v[a][0] - v[b][0], ey = v[a][1] - v[b][1];
            const double len2 = ex * ex + ey * ey;
            const double w =
                len2 > 0.0 ? std::clamp(((z[0] - v[b][0]) * ex + (z[1] - v[b][1]) * ey) / len2, 0.0, 1.0) : 0.0;
            if (std::hypot(z[0] - v[b][0] - w * ex, z[1] - v[b][1] - w * ey) <= 1e-12 * std::sqrt(len2)) return false;
            if ((v[a][1] > z[1]) != (v[b][1] > z[1])) {
                const double x = v[b][0] + (z[1] - v[b][1]) * (v[a][0] - v[b][0]) / (v[a][1] - v[b][1]);
                if (z[0] < x) in = !in;
            }
        }
        return in;
    }

    /// Smallest s in (0, 1] with a + s (b - a) on the boundary; `a` inside.
    double crossing_fraction(const Point2& a, const Point2& b) const {
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        if (auto* d = std::get_if<Disk>(&shape_)) {
            const double px = a[0] - d->center[0], py = a[1] - d->center[1];
            const double qa = ex * ex + ey * ey, qb = 2.0 * (px * ex + py * ey),
                         qc = px * px + py * py - d->radius * d->radius;
            const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
            // qc < 0, so the positive root is the exit; written to avoid cancellation
            const double s = (2.0 * -qc) / (qb + std::sqrt(disc));
            return std::clamp(s, 0.0, 1.0);
        }
        const auto& v = std::get<Polygon>(shape_).vertices;
        double best = 1.0;
        for (std::size_t k = 0, l = v.size() - 1; k < v.size(); l = k++) {
            const double fx = v[k][0] - v[l][0], fy = v[k][1] - v[l][1];
            const double den = ex * fy - ey * fx;
            if (den == 0.0) continue;
            const double gx = v[l][0] - a[0], gy = v[l][1] - a[1];
            const double s = (gx * fy - gy * fx) / den;
            const double t = (gx * ey - gy * ex) / den;
            if (s > 0.0 && s <= best && t >= 0.0 && t <= 1.0) best = s;
        }
        return best;
    }

    Point2 exit_point(const Point2& a, const Point2& b) const {
        const double s = crossing_fraction(a, b);
        return {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
    }

    /// Neighbour of interior node n one step along axis (0: x, 1: y) in
    /// direction dir (+1/-1): its interior index (or -1) and the distance to
    /// it or to the boundary crossing in between.
    std::pair<long, double> neighbour(std::size_t n, int axis, int dir) const {
        const long i = nodes_[n][0] + (axis == 0 ? dir : 0);
        const long j = nodes_[n][1] + (axis == 1 ? dir : 0);
        const long idx = index(i, j);
        if (idx >= 0) return {idx, h_};
        const double s = crossing_fraction(interior_point(n), node_point(i, j));
        return {-1, std::max(s, 1e-6) * h_};
    }

private:
    DomainShape shape_;
    double h_;
    Point2 origin_{};
    long i0_ = 0, j0_ = 0, nx_ = 0, ny_ = 0;
    std::vector<long> index_;
    std::vector<std::array<long, 2>> nodes_;
};

/// -Laplace with zero Dirichlet data, symmetric positive definite. Exterior
/// neighbours are replaced by linear extrapolation through the boundary
/// crossing, which only changes the diagonal.
inline Eigen::SparseMatrix<double> assemble_negative_laplacian(const GridDomain& dom) {
    const double h2 = dom.h() * dom.h();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(dom.interior_count() * 5);
    for (std::size_t n = 0; n < dom.interior_count(); ++n) {
        double diag = 0.0;
        for (int axis = 0; axis < 2; ++axis)
            for (int dir : {-1, 1}) {
                auto [q, dist] = dom.neighbour(n, axis, dir);
                if (q >= 0) {
                    trip.emplace_back(static_cast<int>(n), static_cast<int>(q), -1.0 / h2);
                    diag += 1.0 / h2;
                } else {
                    diag += 1.0 / (dist * dom.h());
                }
            }
        trip.emplace_back(static_cast<int>(n), static_cast<int>(n), diag);
    }
    const auto sz = static_cast<Eigen::Index>(dom.interior_count());
    Eigen::SparseMatrix<double> a(sz, sz);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

/// Second-order d/dz_axis of a grid function vanishing on the boundary.
inline std::vector<double> grid_derivative(const GridDomain& dom, const std::vector<double>& u, int axis) {
    std::vector<double> out(u.size());
    for (std::size_t n = 0; n < dom.interior_count(); ++n) {
        auto [qp, hp] = dom.neighbour(n, axis, +1);
        auto [qm, hm] = dom.neighbour(n, axis, -1);
        const double up = qp >= 0 ? u[static_cast<std::size_t>(qp)] : 0.0;
        const double um = qm >= 0 ? u[static_cast<std::size_t>(qm)] : 0.0;
        const double u0 = u[n];
        out[n] = (hm * hm * (up - u0) + hp * hp * (u0 - um)) / (hm * hp * (hm + hp));
    }
    return out;
}

/// Levels 0..N of the expected signature on the interior nodes:
/// components[k][word index][node].
struct ExpectedSigField {
    const GridDomain* domain = nullptr;
    int depth = 0;
    std::vector<std::vector<std::vector<double>>> components;
    double max_relative_residual = 0.0;

    TruncatedTensor at_node(std::size_t node) const {
        TruncatedTensor t(2, depth);
        for (int k = 0; k <= depth; ++k) {
            auto lvl = t.level(k);
            for (std::size_t w = 0; w < lvl.size(); ++w) lvl[w] = components[static_cast<std::size_t>(k)][w][node];
        }
        return t;
    }

    TruncatedTensor at(const Point2& z) const { return at_node(domain->nearest_interior(z)); }
};

inline constexpr double poisson_tolerance = 1e-12;

/// Solves the recurrence for levels up to N on `dom` (which must outlive the
/// result). Each component is one Poisson solve by Jacobi-preconditioned CG.
inline ExpectedSigField solve_recurrence(const GridDomain& dom, int depth) {
    if (depth < 2) throw DataError("expected signature recurrence needs depth >= 2");
    constexpr int d = 2;
    const std::size_t nn = dom.interior_count();
    const Eigen::SparseMatrix<double> lap = assemble_negative_laplacian(dom);
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(poisson_tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(20 * nn + 1000));
    cg.compute(lap);

    ExpectedSigField f{&dom, depth, {}, 0.0};
    f.components.resize(static_cast<std::size_t>(depth) + 1);
    f.components[0].assign(1, std::vector<double>(nn, 1.0));
    f.components[1].assign(d, std::vector<double>(nn, 0.0));
    for (int k = 2; k <= depth; ++k) {
        const std::size_t count = level_size(d, k);
        const std::size_t tail1 = level_size(d, k - 1), tail2 = level_size(d, k - 2);
        auto& level = f.components[static_cast<std::size_t>(k)];
        level.assign(count, std::vector<double>(nn, 0.0));
        // d/dz_i of every level-(k-1) component, computed once
        std::vector<std::array<std::vector<double>, 2>> grads(tail1);
        for (std::size_t w = 0; w < tail1; ++w) {
            const auto& src = f.components[static_cast<std::size_t>(k) - 1][w];
            if (std::all_of(src.begin(), src.end(), [](double x) { return x == 0.0; })) continue;
            grads[w][0] = grid_derivative(dom, src, 0);
            grads[w][1] = grid_derivative(dom, src, 1);
        }
        for (std::size_t w = 0; w < count; ++w) {
            const std::size_t first = w / tail1, rest1 = w % tail1;
            const std::size_t second = rest1 / tail2, rest2 = rest1 % tail2;
            // -Laplace f = sum e_i e_i f_{k-2} + 2 sum e_i d_i f_{k-1}
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
            bool nonzero = false;
            if (first == second) {
                const auto& src = f.components[static_cast<std::size_t>(k) - 2][rest2];
                for (std::size_t n = 0; n < nn; ++n) rhs[static_cast<Eigen::Index>(n)] += src[n];
                nonzero = true;
            }
            const auto& g = grads[rest1][first];
            if (!g.empty()) {
                for (std::size_t n = 0; n < nn; ++n) rhs[static_cast<Eigen::Index>(n)] += 2.0 * g[n];
                nonzero = true;
            }
            if (!nonzero || rhs.isZero(0.0)) continue;
            Eigen::VectorXd sol = cg.solve(rhs);
            const double rel = (lap * sol - rhs).norm() / rhs.norm();
            if (cg.info() != Eigen::Success && rel > 1e-10)
                throw SolverError("Poisson solve for level " + std::to_string(k) + " did not converge", rel);
            f.max_relative_residual = std::max(f.max_relative_residual, rel);
            auto& dst = level[w];
            for (std::size_t n = 0; n < nn; ++n) dst[n] = sol[static_cast<Eigen::Index>(n)];
        }
    }
    return f;
}

struct MonteCarloEstimate {
    TruncatedTensor mean;
    TruncatedTensor std_error;
    std::size_t paths = 0;
};

namespace detail {

struct WelfordTensor {
    std::vector<double> mean, m2;
    std::size_t n = 0;

    explicit WelfordTensor(std::size_t size) : mean(size, 0.0), m2(size, 0.0) {}

    void add(std::span<const double> x) {
        ++n;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double delta = x[i] - mean[i];
            mean[i] += delta / static_cast<double>(n);
            m2[i] += delta * (x[i] - mean[i]);
        }
    }

    void merge(const WelfordTensor& o) {
        if (o.n == 0) return;
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n), nt = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double delta = o.mean[i] - mean[i];
            mean[i] += delta * nb / nt;
            m2[i] += o.m2[i] + delta * delta * na * nb / nt;
        }
        n += o.n;
    }
};

inline std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(static_cast<std::uint64_t>(path) >> 32)};
    return std::mt19937_64(ss);
}

} // namespace detail

/// Signature of one Brownian path from `start`, simulated with N(0, dt)
/// increments until the first step that leaves the domain; that step is cut
/// at the boundary crossing.
inline TruncatedTensor stopped_brownian_signature(const GridDomain& dom, const Point2& start, int depth, double dt,
                                                  std::mt19937_64& rng) {
    SignatureAccumulator acc(2, depth);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    Point2 x = start;
    for (;;) {
        const Point2 next{x[0] + gauss(rng), x[1] + gauss(rng)};
        if (dom.inside(next)) {
            const double inc[2] = {next[0] - x[0], next[1] - x[1]};
            acc.push_increment(inc);
            x = next;
        } else {
            const Point2 e = dom.exit_point(x, next);
            const double inc[2] = {e[0] - x[0], e[1] - x[1]};
            acc.push_increment(inc);
            break;
        }
    }
    return acc.take();
}

/// Monte Carlo expected signature with elementwise standard errors. Path i
/// uses a generator seeded by (seed, i); paths are reduced in fixed blocks so
/// the result does not depend on the thread count.
inline MonteCarloEstimate mc_expected_sig(const GridDomain& dom, const Point2& start, int depth, std::size_t paths,
                                          double dt, std::uint64_t seed, unsigned threads = 1) {
    if (!dom.inside(start)) throw DataError("Monte Carlo start point must be strictly inside the domain");
    if (paths < 1) throw DataError("need at least one path");
    if (!(dt > 0.0)) throw DataError("dt must be positive");
    const std::size_t size = level_offset(2, depth + 1);
    constexpr std::size_t blocks = 64;
    std::vector<detail::WelfordTensor> stats(blocks, detail::WelfordTensor(size));
    auto run_block = [&](std::size_t b) {
        const std::size_t lo = paths * b / blocks, hi = paths * (b + 1) / blocks;
        for (std::size_t p = lo; p < hi; ++p) {
            auto rng = detail::path_rng(seed, p);
            stats[b].add(stopped_brownian_signature(dom, start, depth, dt, rng).data());
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < blocks; b += threads) run_block(b);
            });
        for (auto& th : pool) th.join();
    }
    detail::WelfordTensor total(size);
    for (const auto& s : stats) total.merge(s);
    MonteCarloEstimate est{TruncatedTensor(2, depth), TruncatedTensor(2, depth), paths};
    const double n = static_cast<double>(paths);
    for (std::size_t i = 0; i < size; ++i) {
        est.mean.data()[i] = total.mean[i];
        est.std_error.data()[i] = paths > 1 ? std::sqrt(std::max(0.0, total.m2[i] / (n - 1.0)) / n) : 0.0;
    }
    return est;
}

/// Per-level sizes a_n = ||E S^n|| and growth profiles for judging the radius
/// of convergence of sum z^n a_n. A level counts as zero when its l1 size is
/// at most zero_level_tolerance times the largest level; ratios and roots
/// involving a zero level are reported as 0 and flagged.
struct RadiusReport {
    std::vector<double> l1, l2;              // a_n, n = 0..N
    std::vector<double> ratio_l1, ratio_l2;   // a_{n+1} / a_n, n = 0..N-1
    std::vector<double> ratio2_l1, ratio2_l2; // sqrt(a_{n+2} / a_n), n = 0..N-2
    std::vector<double> root_l1, root_l2;     // a_n^{-1/n}, n = 1..N (index n-1)
    std::vector<bool> zero_level;             // n = 0..N
};

inline constexpr double zero_level_tolerance = 1e-12;

inline RadiusReport radius_diagnostic(const TruncatedTensor& t) {
    if (t.depth() < 3) throw DataError("radius diagnostic needs depth >= 3");
    RadiusReport r;
    r.l1 = grade_norms(t, NormFlavor::l1).norms;
    r.l2 = grade_norms(t, NormFlavor::l2).norms;
    const double floor = zero_level_tolerance * *std::max_element(r.l1.begin(), r.l1.end());
    for (double a : r.l1) r.zero_level.push_back(a <= floor);
    const auto& zero = r.zero_level;
    auto ratios = [&zero](const std::vector<double>& a, std::size_t step) {
        std::vector<double> out;
        for (std::size_t n = 0; n + step < a.size(); ++n) {
            if (zero[n] || zero[n + step]) out.push_back(0.0);
            else out.push_back(std::pow(a[n + step] / a[n], 1.0 / static_cast<double>(step)));
        }
        return out;
    };
    auto roots = [&zero](const std::vector<double>& a) {
        std::vector<double> out;
        for (std::size_t n = 1; n < a.size(); ++n)
            out.push_back(zero[n] ? 0.0 : std::pow(a[n], -1.0 / static_cast<double>(n)));
        return out;
    };
    r.ratio_l1 = ratios(r.l1, 1);
    r.ratio_l2 = ratios(r.l2, 1);
    r.ratio2_l1 = ratios(r.l1, 2);
    r.ratio2_l2 = ratios(r.l2, 2);
    r.root_l1 = roots(r.l1);
    r.root_l2 = roots(r.l2);
    return r;
}

} // namespace sigtools

#endif // SIGTOOLS_EXPECTED_SIG_HPP
