#ifndef SIGTOOLS_LOGODE_HPP
#define SIGTOOLS_LOGODE_HPP

// Log-ODE method for controlled differential equations dy = sum_i V_i(y) dx^i
// driven by piecewise-linear streams, plus the exact solver for linear
// systems used as its oracle.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sigtools/errors.hpp"
#include "sigtools/lie.hpp"
#include "sigtools/stream.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Linear map from the driver space R^d into vector fields on R^m, given as d
/// fields with their Jacobians.
///
/// `smoothness` is the number of derivatives the fields support; a bracket of
/// degree k needs k - 1 of them.
class VectorFieldSystem {
public:
    using Field = std::function<Vec(const Vec&)>;
    using Jacobian = std::function<Mat(const Vec&)>;

    static constexpr int unlimited_smoothness = 1 << 20;

    /// Validates finiteness and Jacobian/finite-difference agreement (1e-5
    /// relative) at the probe points; with no probes, the origin and the
    /// scaled unit vectors are used.
    VectorFieldSystem(int state_dim, int driver_dim, std::vector<Field> fields, std::vector<Jacobian> jacobians,
                      int smoothness, const std::vector<Vec>& probes = {})
        : m_(state_dim), d_(driver_dim), fields_(std::move(fields)), jacobians_(std::move(jacobians)),
          smoothness_(smoothness) {
        if (m_ < 1 || d_ < 1) throw DataError("vector field system needs m >= 1 and d >= 1");
        if (static_cast<int>(fields_.size()) != d_ || static_cast<int>(jacobians_.size()) != d_)
            throw DimensionMismatch("need exactly one field and one Jacobian per driver coordinate");
        std::vector<Vec> pts = probes;
        if (pts.empty()) {
            pts.push_back(Vec::Zero(m_));
            for (int j = 0; j < m_; ++j) pts.push_back(0.5 * Vec::Unit(m_, j));
        }
        for (const auto& y : pts) validate_at(y);
    }

    int state_dim() const noexcept { return m_; }
    int driver_dim() const noexcept { return d_; }
    int smoothness() const noexcept { return smoothness_; }

    Vec field(int i, const Vec& y) const { return fields_[static_cast<std::size_t>(i)](y); }
    Mat jacobian(int i, const Vec& y) const { return jacobians_[static_cast<std::size_t>(i)](y); }

private:
    void validate_at(const Vec& y) const {
        if (y.size() != m_) throw DimensionMismatch("probe point has wrong dimension");
        const double h = 1e-6 * (1.0 + y.norm());
        for (int i = 0; i < d_; ++i) {
            Vec f = field(i, y);
            Mat jac = jacobian(i, y);
            if (f.size() != m_ || jac.rows() != m_ || jac.cols() != m_)
                throw DimensionMismatch("field " + std::to_string(i + 1) + " returns wrong shape");
            if (!f.allFinite() || !jac.allFinite())
                throw DataError("field " + std::to_string(i + 1) + " is not finite at a probe point");
            Mat fd(m_, m_);
            for (int j = 0; j < m_; ++j) {
                Vec e = Vec::Unit(m_, j) * h;
                fd.col(j) = (field(i, y + e) - field(i, y - e)) / (2 * h);
            }
            if ((fd - jac).norm() > 1e-5 * std::max(1.0, jac.norm()))
                throw DataError("Jacobian of field " + std::to_string(i + 1) + " disagrees with finite differences");
        }
    }

    int m_, d_;
    std::vector<Field> fields_;
    std::vector<Jacobian> jacobians_;
    int smoothness_;
};

/// dy = sum_i A_i y dx^i
struct LinearSystem {
    std::vector<Mat> matrices;

    int state_dim() const { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }
    int driver_dim() const { return static_cast<int>(matrices.size()); }

    void validate() const {
        if (matrices.empty()) throw DataError("linear system needs at least one matrix");
        const auto m = matrices.front().rows();
        for (const auto& a : matrices) {
            if (a.rows() != m || a.cols() != m) throw DimensionMismatch("linear system matrices must be m x m");
            if (!a.allFinite()) throw DataError("linear system has non-finite entries");
        }
    }

    /// max_i ||A_i||_2, the operator norm of x -> sum x_i A_i for l1 on the driver.
    double operator_norm() const {
        double n = 0.0;
        for (const auto& a : matrices) n = std::max(n, Eigen::JacobiSVD<Mat>(a).singularValues()(0));
        return n;
    }

    VectorFieldSystem vector_fields() const {
        validate();
        std::vector<VectorFieldSystem::Field> f;
        std::vector<VectorFieldSystem::Jacobian> j;
        for (const auto& a : matrices) {
            f.emplace_back([a](const Vec& y) -> Vec { return a * y; });
            j.emplace_back([a](const Vec&) -> Mat { return a; });
        }
        return VectorFieldSystem(state_dim(), driver_dim(), std::move(f), std::move(j),
                                 VectorFieldSystem::unlimited_smoothness);
    }
};

namespace detail {

inline Vec bracket_field(const VectorFieldSystem& vfs, const LieBasis& basis, std::size_t b, const Vec& y);

/// D F_b(y) w; exact for letters, central differences along w otherwise.
inline Vec directional_derivative(const VectorFieldSystem& vfs, const LieBasis& basis, std::size_t b, const Vec& y,
                                  const Vec& w) {
    const auto& e = basis[b];
    if (e.is_letter()) return vfs.jacobian(e.word.letters[0] - 1, y) * w;
    const double wn = w.norm();
    if (wn == 0.0) return Vec::Zero(y.size());
    const double h = 1e-5 * (1.0 + y.norm());
    const Vec dir = w / wn;
    return (bracket_field(vfs, basis, b, y + h * dir) - bracket_field(vfs, basis, b, y - h * dir)) * (wn / (2 * h));
}

/// F_{[u,v]} = DF_v F_u - DF_u F_v
inline Vec bracket_field(const VectorFieldSystem& vfs, const LieBasis& basis, std::size_t b, const Vec& y) {
    const auto& e = basis[b];
    if (e.is_letter()) return vfs.field(e.word.letters[0] - 1, y);
    const auto u = static_cast<std::size_t>(e.left), v = static_cast<std::size_t>(e.right);
    const Vec fu = bracket_field(vfs, basis, u, y);
    const Vec fv = bracket_field(vfs, basis, v, y);
    return directional_derivative(vfs, basis, v, y, fu) - directional_derivative(vfs, basis, u, y, fv);
}

} // namespace detail

/// Evaluates the vector field sum_b lambda_b F_b(y) induced by the Lie
/// extension of the fields, where F_i = V_i and F_{[u,v]} = DF_v F_u - DF_u F_v.
/// For linear fields V_i(y) = A_i y this maps the word i1...ik to A_ik...A_i1.
inline Vec lie_extend_evaluate(const VectorFieldSystem& vfs, const LieCoordinates& l, const Vec& y) {
    if (l.dim() != vfs.driver_dim()) throw DimensionMismatch("Lie coordinates and fields disagree on driver dimension");
    if (y.size() != vfs.state_dim()) throw DimensionMismatch("state has wrong dimension");
    if (l.depth() - 1 > vfs.smoothness())
        throw CapabilityError("degree-" + std::to_string(l.depth()) + " brackets need " + std::to_string(l.depth() - 1) +
                              " derivatives, fields declare " + std::to_string(vfs.smoothness()));
    Vec out = Vec::Zero(y.size());
    for (std::size_t b = 0; b < l.size(); ++b) {
        if (l[b] == 0.0) continue;
        out += l[b] * detail::bracket_field(vfs, l.basis(), b, y);
    }
    return out;
}

/// Classical RK4 for x' = f(x) over unit time.
template <class F>
Vec rk4_unit_time(F&& f, Vec x, int substeps) {
    if (substeps < 1) throw DataError("substeps must be >= 1");
    const double h = 1.0 / substeps;
    for (int s = 0; s < substeps; ++s) {
        const Vec k1 = f(x);
        const Vec k2 = f(x + 0.5 * h * k1);
        const Vec k3 = f(x + 0.5 * h * k2);
        const Vec k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw DivergenceError("log-ODE state became non-finite", static_cast<std::size_t>(s));
    }
    return x;
}

/// Integrates the frozen field induced by `l` from y0 for unit time.
inline Vec logode_step(const VectorFieldSystem& vfs, const Vec& y0, const LieCoordinates& l, int substeps) {
    if (l.effective_degree() == 0) return y0;
    return rk4_unit_time([&](const Vec& x) { return lie_extend_evaluate(vfs, l, x); }, y0, substeps);
}

struct LogOdeSchedule {
    std::vector<double> boundaries;
    int depth = 2;
    int substeps = 8;

    static LogOdeSchedule uniform(const Stream& s, int steps, int depth, int substeps) {
        if (steps < 1) throw DataError("need at least one step");
        LogOdeSchedule sch{{}, depth, substeps};
        const double a = s.start_time(), b = s.end_time();
        for (int k = 0; k <= steps; ++k) sch.boundaries.push_back(a + (b - a) * k / steps);
        sch.boundaries.back() = b;
        return sch;
    }

    void validate(const Stream& s) const {
        if (depth < 1) throw DataError("truncation degree must be >= 1");
        if (substeps < 1) throw DataError("substeps must be >= 1");
        if (boundaries.size() < 2) throw DataError("schedule needs at least two boundaries");
        for (std::size_t i = 0; i < boundaries.size(); ++i) {
            if (boundaries[i] < s.start_time() || boundaries[i] > s.end_time())
                throw DataError("schedule boundary outside the stream interval");
            if (i > 0 && !(boundaries[i] > boundaries[i - 1])) throw DataError("schedule boundaries must increase");
        }
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
};

/// Log-ODE solve: per step, the depth-n log-signature of the driver is frozen
/// into an autonomous field and integrated for unit time.
inline Trajectory solve(const VectorFieldSystem& vfs, const Stream& driver, const Vec& y0, const LogOdeSchedule& schedule) {
    schedule.validate(driver);
    if (driver.dim() != vfs.driver_dim()) throw DimensionMismatch("driver dimension does not match the fields");
    if (y0.size() != vfs.state_dim()) throw DimensionMismatch("initial state has wrong dimension");
    Trajectory tr{{schedule.boundaries.front()}, {y0}};
    Vec y = y0;
    for (std::size_t k = 0; k + 1 < schedule.boundaries.size(); ++k) {
        const Stream piece = driver.restrict(schedule.boundaries[k], schedule.boundaries[k + 1]);
        const LieCoordinates l = log_signature(piece, schedule.depth);
        y = logode_step(vfs, y, l, schedule.substeps);
        tr.times.push_back(schedule.boundaries[k + 1]);
        tr.states.push_back(y);
    }
    return tr;
}

/// Exact solution of dy = sum_i A_i y dx^i along the polygonal stream: the
/// ordered product of exp(sum_i dx^i A_i) over segments.
inline Vec linear_solve(const LinearSystem& lin, const Stream& s, const Vec& y0) {
    lin.validate();
    if (s.dim() != lin.driver_dim()) throw DimensionMismatch("driver dimension does not match the system");
    Vec y = y0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto inc = s.increment(i);
        Mat gen = Mat::Zero(lin.state_dim(), lin.state_dim());
        for (std::size_t j = 0; j < inc.size(); ++j) gen += inc[j] * lin.matrices[j];
        y = Mat(gen.exp()) * y;
    }
    return y;
}

/// sum_{k <= N} sum_{|w| = k} <w, S> A_{w_k} ... A_{w_1} y0
inline Vec linear_series(const LinearSystem& lin, const TruncatedTensor& sig, const Vec& y0) {
    lin.validate();
    if (sig.dim() != lin.driver_dim()) throw DimensionMismatch("signature dimension does not match the system");
    const int d = sig.dim();
    Vec out = sig.data()[0] * y0;
    std::vector<Vec> prev{y0}, cur;
    for (int k = 1; k <= sig.depth(); ++k) {
        cur.clear();
        cur.reserve(prev.size() * static_cast<std::size_t>(d));
        auto lvl = sig.level(k);
        for (std::size_t p = 0; p < prev.size(); ++p)
            for (int i = 0; i < d; ++i) {
                cur.push_back(lin.matrices[static_cast<std::size_t>(i)] * prev[p]);
                out += lvl[p * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] * cur.back();
            }
        std::swap(prev, cur);
    }
    return out;
}

/// sum_{k > n} x^k / k!
inline double factorial_tail(double x, int n) {
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= x / k;
    double tail = 0.0;
    for (int k = n + 1; k < n + 400; ++k) {
        term *= x / k;
        tail += term;
        if (term < 1e-300 || term < tail * 1e-18) break;
    }
    return tail;
}

} // namespace sigtools

#endif // SIGTOOLS_LOGODE_HPP
