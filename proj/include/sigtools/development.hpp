#ifndef SIGTOOLS_DEVELOPMENT_HPP
#define SIGTOOLS_DEVELOPMENT_HPP

// Unitary development of streams: dPsi = Psi (i sum_j H_j dx^j).

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sigtools/errors.hpp"
#include "sigtools/stream.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

using CMat = Eigen::MatrixXcd;

/// psi(e_j) = i H_j with H_j traceless Hermitian u x u matrices.
class UnitaryPolicy {
public:
    explicit UnitaryPolicy(std::vector<CMat> generators) : gens_(std::move(generators)) {
        if (gens_.empty()) throw DataError("policy needs at least one generator");
        const auto u = gens_.front().rows();
        if (u < 2) throw DataError("policy matrix size must be >= 2");
        for (const auto& h : gens_) {
            if (h.rows() != u || h.cols() != u) throw DimensionMismatch("generators must all be u x u");
            if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DataError("generator is not Hermitian");
            if (std::abs(h.trace()) > 1e-12) throw DataError("generator is not traceless");
        }
    }

    /// Random traceless Hermitian generators with entries of order `scale`.
    static UnitaryPolicy random(int u, int d, double scale, std::mt19937_64& rng) {
        std::normal_distribution<double> g(0.0, scale);
        std::vector<CMat> gens;
        for (int j = 0; j < d; ++j) {
            CMat a(u, u);
            for (int r = 0; r < u; ++r)
                for (int c = 0; c < u; ++c) a(r, c) = {g(rng), g(rng)};
            CMat h = 0.5 * (a + a.adjoint());
            h -= (h.trace() / static_cast<double>(u)) * CMat::Identity(u, u);
            // exact Hermitian symmetry after the trace shift
            h = 0.5 * (h + h.adjoint()).eval();
            gens.push_back(h);
        }
        return UnitaryPolicy(std::move(gens));
    }

    int size() const { return static_cast<int>(gens_.front().rows()); }
    int dim() const { return static_cast<int>(gens_.size()); }
    const std::vector<CMat>& generators() const noexcept { return gens_; }

    /// max_j ||H_j||_2
    double max_generator_norm() const {
        double n = 0.0;
        for (const auto& h : gens_) n = std::max(n, Eigen::SelfAdjointEigenSolver<CMat>(h).eigenvalues().cwiseAbs().maxCoeff());
        return n;
    }

private:
    std::vector<CMat> gens_;
};

/// exp(i H) for Hermitian H via its eigendecomposition.
inline CMat unitary_exp(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    const auto& vals = es.eigenvalues();
    Eigen::VectorXcd phase(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) phase[i] = std::polar(1.0, vals[i]);
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

struct DevelopmentResult {
    CMat psi;
    double start_time = 0.0;
    double end_time = 0.0;
};

/// Ordered product over segments of exp(i sum_j dx^j H_j), multiplied on the right.
inline DevelopmentResult develop(const UnitaryPolicy& policy, const Stream& s) {
    if (policy.dim() != s.dim()) throw DimensionMismatch("policy has " + std::to_string(policy.dim()) +
                                                         " generators, stream has dimension " + std::to_string(s.dim()));
    const int u = policy.size();
    CMat psi = CMat::Identity(u, u);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto inc = s.increment(i);
        CMat h = CMat::Zero(u, u);
        for (std::size_t j = 0; j < inc.size(); ++j) h += inc[j] * policy.generators()[j];
        psi = psi * unitary_exp(h);
    }
    return {psi, s.start_time(), s.end_time()};
}

/// ||Psi* Psi - I||_max
inline double unitarity_defect(const CMat& psi) {
    return (psi.adjoint() * psi - CMat::Identity(psi.rows(), psi.cols())).cwiseAbs().maxCoeff();
}

/// sum_{k <= N} sum_{|w| = k} <w, S> psi(e_{w_1}) ... psi(e_{w_k})
inline CMat development_series(const UnitaryPolicy& policy, const TruncatedTensor& sig) {
    if (policy.dim() != sig.dim()) throw DimensionMismatch("policy and signature dimensions differ");
    const int u = policy.size(), d = sig.dim();
    const std::complex<double> iu(0.0, 1.0);
    CMat out = sig.data()[0] * CMat::Identity(u, u);
    std::vector<CMat> prev{CMat::Identity(u, u)}, cur;
    for (int k = 1; k <= sig.depth(); ++k) {
        cur.clear();
        auto lvl = sig.level(k);
        for (std::size_t p = 0; p < prev.size(); ++p)
            for (int j = 0; j < d; ++j) {
                cur.push_back(prev[p] * (iu * policy.generators()[static_cast<std::size_t>(j)]));
                out += lvl[p * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] * cur.back();
            }
        std::swap(prev, cur);
    }
    return out;
}

struct ExpectedDevelopment {
    CMat mean;
    Eigen::MatrixXd std_error_real;
    Eigen::MatrixXd std_error_imag;
    std::size_t count = 0;
};

using StreamSampler = std::function<Stream(std::mt19937_64&)>;

/// Monte Carlo mean of develop over sampled streams with elementwise
/// standard errors of real and imaginary parts. Sample i draws from a
/// generator seeded with (seed, i), so results do not depend on scheduling.
inline ExpectedDevelopment expected_development(const UnitaryPolicy& policy, const StreamSampler& sampler,
                                                std::size_t count, std::uint64_t seed) {
    if (count < 1) throw DataError("expected_development needs count >= 1");
    const int u = policy.size();
    // Welford accumulation: identical samples give exactly zero spread.
    CMat mean = CMat::Zero(u, u);
    Eigen::MatrixXd m2_re = Eigen::MatrixXd::Zero(u, u), m2_im = Eigen::MatrixXd::Zero(u, u);
    for (std::size_t i = 0; i < count; ++i) {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        std::mt19937_64 rng(ss);
        const CMat psi = develop(policy, sampler(rng)).psi;
        const CMat delta = psi - mean;
        mean += delta / static_cast<double>(i + 1);
        const CMat delta2 = psi - mean;
        m2_re += delta.real().cwiseProduct(delta2.real());
        m2_im += delta.imag().cwiseProduct(delta2.imag());
    }
    const double n = static_cast<double>(count);
    ExpectedDevelopment r{mean, Eigen::MatrixXd::Zero(u, u), Eigen::MatrixXd::Zero(u, u), count};
    if (count > 1) {
        r.std_error_real = (m2_re / (n - 1.0)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(n);
        r.std_error_imag = (m2_im / (n - 1.0)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(n);
    }
    return r;
}

} // namespace sigtools

#endif // SIGTOOLS_DEVELOPMENT_HPP
