#ifndef SIGTOOLS_LEARN_HPP
#define SIGTOOLS_LEARN_HPP

// Linear models on signature features: featurization, ridge and LASSO
// regression, two-class evaluation (KS, ROC/AUC, accuracy) and regression of
// output signatures on input signatures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sigtools/errors.hpp"
#include "sigtools/lie.hpp"
#include "sigtools/stream.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

enum class FeatureKind { signature, log_signature };

/// One row per stream; column 0 is the constant (empty word).
struct FeatureMatrix {
    Eigen::MatrixXd values;
    std::vector<Word> columns;
    int depth = 0;
    int dim = 0;
    Transform transform = Transform::none;
    FeatureKind kind = FeatureKind::signature;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

inline FeatureMatrix featurize(const std::vector<Stream>& streams, int depth, Transform transform = Transform::none,
                               FeatureKind kind = FeatureKind::signature) {
    if (streams.empty()) throw DataError("no streams to featurize");
    const int d0 = streams.front().dim();
    for (const auto& s : streams)
        if (s.dim() != d0) throw DimensionMismatch("streams have different dimensions");
    FeatureMatrix fm;
    fm.depth = depth;
    fm.transform = transform;
    fm.kind = kind;
    fm.dim = apply_transform(streams.front(), transform).dim();
    if (kind == FeatureKind::signature) {
        fm.columns = words_up_to(fm.dim, depth);
    } else {
        fm.columns.emplace_back();
        for (const auto& e : lie_basis(fm.dim, depth)->elements()) fm.columns.push_back(e.word);
    }
    fm.values.resize(static_cast<Eigen::Index>(streams.size()), static_cast<Eigen::Index>(fm.columns.size()));
    for (std::size_t r = 0; r < streams.size(); ++r) {
        const Stream s = apply_transform(streams[r], transform);
        const auto row = static_cast<Eigen::Index>(r);
        if (kind == FeatureKind::signature) {
            const auto sig = signature(s, depth);
            for (std::size_t c = 0; c < sig.data().size(); ++c) fm.values(row, static_cast<Eigen::Index>(c)) = sig.data()[c];
        } else {
            const auto l = log_signature(s, depth);
            fm.values(row, 0) = 1.0;
            for (std::size_t c = 0; c < l.size(); ++c) fm.values(row, static_cast<Eigen::Index>(c) + 1) = l[c];
        }
    }
    return fm;
}

struct Regularization {
    std::string method = "ridge";
    double lambda = 0.0;
};

/// f(stream) ~ sum_w beta_w <w, S(stream)>; the empty-word coefficient is the
/// intercept.
struct LinearModel {
    std::vector<double> coefficients;
    std::vector<Word> columns;
    Regularization regularization;
    int depth = 0;
    Transform transform = Transform::none;
    FeatureKind kind = FeatureKind::signature;
    bool converged = true;
    std::size_t iterations = 0;
    std::vector<std::size_t> active_set; // nonzero penalized columns

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
        if (x.cols() != static_cast<Eigen::Index>(coefficients.size()))
            throw DimensionMismatch("feature count does not match the model");
        Eigen::Map<const Eigen::VectorXd> beta(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
        return x * beta;
    }
};

namespace detail {

inline void check_intercept_column(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw DimensionMismatch("feature rows and targets differ in length");
    if (x.rows() < 1 || x.cols() < 1) throw DataError("empty design matrix");
    if (!(x.col(0).array() == 1.0).all()) throw DataError("column 0 must be the constant feature");
}

} // namespace detail

/// min ||X beta - y||^2 + lambda ||beta_{1..}||^2 with the constant column
/// unpenalized, via SVD of the centred design. lambda = 0 gives the
/// minimum-norm least-squares solution.
inline LinearModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    detail::check_intercept_column(x, y);
    if (lambda < 0.0) throw DataError("ridge lambda must be >= 0");
    const Eigen::Index n = x.rows(), p = x.cols() - 1;
    LinearModel m;
    m.regularization = {"ridge", lambda};
    m.coefficients.assign(static_cast<std::size_t>(x.cols()), 0.0);
    const double ybar = y.mean();
    if (p == 0) {
        m.coefficients[0] = ybar;
        return m;
    }
    const Eigen::RowVectorXd mu = x.rightCols(p).colwise().mean();
    const Eigen::MatrixXd xc = x.rightCols(p).rowwise() - mu;
    const Eigen::VectorXd yc = y.array() - ybar;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cutoff = s.size() ? s[0] * static_cast<double>(std::max(n, p)) * 1e-15 : 0.0;
    Eigen::VectorXd shrink(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (lambda == 0.0) shrink[i] = s[i] > cutoff ? 1.0 / s[i] : 0.0;
        else shrink[i] = s[i] / (s[i] * s[i] + lambda);
    }
    const Eigen::VectorXd beta = svd.matrixV() * shrink.asDiagonal() * (svd.matrixU().transpose() * yc);
    for (Eigen::Index j = 0; j < p; ++j) m.coefficients[static_cast<std::size_t>(j) + 1] = beta[j];
    m.coefficients[0] = ybar - mu.dot(beta);
    for (Eigen::Index j = 0; j < p; ++j)
        if (beta[j] != 0.0) m.active_set.push_back(static_cast<std::size_t>(j) + 1);
    return m;
}

inline LinearModel fit_ridge(const FeatureMatrix& fm, const Eigen::VectorXd& y, double lambda) {
    LinearModel m = fit_ridge(fm.values, y, lambda);
    m.columns = fm.columns;
    m.depth = fm.depth;
    m.transform = fm.transform;
    m.kind = fm.kind;
    return m;
}

/// Column standardization used by the LASSO: z = (x - mean) / sd with the
/// population standard deviation; constant columns get sd 0 and are left out.
struct Standardization {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd sd;
    Eigen::MatrixXd z; // standardized penalized columns
    Eigen::VectorXd yc;
    double ybar = 0.0;

    Standardization(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
        const Eigen::Index n = x.rows(), p = x.cols() - 1;
        mean = x.rightCols(p).colwise().mean();
        z = x.rightCols(p).rowwise() - mean;
        sd.resize(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double v = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
            sd[j] = v > 1e-14 * std::max(1.0, std::abs(mean[j])) ? v : 0.0;
            if (sd[j] > 0.0) z.col(j) /= sd[j];
            else z.col(j).setZero();
        }
        ybar = y.mean();
        yc = y.array() - ybar;
    }
};

/// Smallest lambda for which every penalized LASSO coefficient is zero.
inline double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    detail::check_intercept_column(x, y);
    Standardization st(x, y);
    return (st.z.transpose() * st.yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

/// min (1/2n) ||y - b0 - Z b||^2 + lambda ||b||_1 on standardized columns by
/// cyclic coordinate descent, reported on the original scale.
inline LinearModel fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                             std::size_t max_iter = 10000, double tol = 1e-10) {
    detail::check_intercept_column(x, y);
    if (lambda < 0.0) throw DataError("lasso lambda must be >= 0");
    const Eigen::Index n = x.rows(), p = x.cols() - 1;
    const double nd = static_cast<double>(n);
    Standardization st(x, y);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd r = st.yc;
    LinearModel m;
    m.regularization = {"lasso", lambda};
    m.converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (st.sd[j] == 0.0) continue;
            const auto zj = st.z.col(j);
            const double rho = zj.dot(r) / nd + b[j];
            const double bj = rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
            const double delta = bj - b[j];
            if (delta != 0.0) {
                r -= delta * zj;
                b[j] = bj;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        m.iterations = it + 1;
        if (max_change < tol) {
            m.converged = true;
            break;
        }
    }
    m.coefficients.assign(static_cast<std::size_t>(x.cols()), 0.0);
    double intercept = st.ybar;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (b[j] == 0.0) continue;
        const double beta = b[j] / st.sd[j];
        m.coefficients[static_cast<std::size_t>(j) + 1] = beta;
        intercept -= beta * st.mean[j];
        m.active_set.push_back(static_cast<std::size_t>(j) + 1);
    }
    m.coefficients[0] = intercept;
    return m;
}

inline LinearModel fit_lasso(const FeatureMatrix& fm, const Eigen::VectorXd& y, double lambda,
                             std::size_t max_iter = 10000, double tol = 1e-10) {
    LinearModel m = fit_lasso(fm.values, y, lambda, max_iter, tol);
    m.columns = fm.columns;
    m.depth = fm.depth;
    m.transform = fm.transform;
    m.kind = fm.kind;
    return m;
}

/// Largest violation of the LASSO optimality conditions on the standardized
/// scale: |g_j| <= lambda for zero coefficients, g_j = lambda sign(b_j) for
/// active ones, where g = Z^T (y - Z b) / n.
inline double lasso_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LinearModel& m) {
    detail::check_intercept_column(x, y);
    Standardization st(x, y);
    const Eigen::Index p = x.cols() - 1;
    Eigen::VectorXd b(p);
    for (Eigen::Index j = 0; j < p; ++j) b[j] = m.coefficients[static_cast<std::size_t>(j) + 1] * st.sd[j];
    const Eigen::VectorXd g = st.z.transpose() * (st.yc - st.z * b) / static_cast<double>(x.rows());
    const double lambda = m.regularization.lambda;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (st.sd[j] == 0.0) continue;
        if (b[j] == 0.0) worst = std::max(worst, std::abs(g[j]) - lambda);
        else worst = std::max(worst, std::abs(g[j] - lambda * (b[j] > 0 ? 1.0 : -1.0)));
    }
    return std::max(worst, 0.0);
}

/// Fraction of random half-size subsamples in which each column is selected
/// by the LASSO at the given lambda.
inline std::vector<double> stability_selection(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                                               std::size_t rounds, std::uint64_t seed, double fraction = 0.5) {
    detail::check_intercept_column(x, y);
    std::vector<double> freq(static_cast<std::size_t>(x.cols()), 0.0);
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const auto take = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(fraction * static_cast<double>(x.rows())));
    for (std::size_t r = 0; r < rounds; ++r) {
        std::shuffle(idx.begin(), idx.end(), rng);
        Eigen::MatrixXd xs(take, x.cols());
        Eigen::VectorXd ys(take);
        for (Eigen::Index i = 0; i < take; ++i) {
            xs.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
            ys[i] = y[idx[static_cast<std::size_t>(i)]];
        }
        for (auto j : fit_lasso(xs, ys, lambda).active_set) freq[j] += 1.0;
    }
    for (double& f : freq) f /= static_cast<double>(std::max<std::size_t>(rounds, 1));
    return freq;
}

struct ClassificationReport {
    double ks = 0.0;
    std::vector<std::pair<double, double>> roc; // (false positive rate, true positive rate)
    double auc = 0.0;
    double accuracy = 0.0;
};

inline constexpr double classification_threshold = 0.5;

/// KS distance between the class-conditional score distributions, ROC by a
/// threshold sweep over unique scores (ties move together), trapezoidal AUC
/// and accuracy of `score >= 0.5`.
inline ClassificationReport classification_report(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size()) throw DimensionMismatch("scores and labels differ in length");
    std::size_t n1 = 0, n0 = 0;
    for (int l : labels) {
        if (l == 1) ++n1;
        else if (l == 0) ++n0;
        else throw DataError("labels must be 0 or 1");
    }
    if (n0 == 0 || n1 == 0) throw DegenerateReport("classification report needs both classes");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
    });
    ClassificationReport rep;
    rep.roc.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[static_cast<Eigen::Index>(order[i])];
        while (i < order.size() && scores[static_cast<Eigen::Index>(order[i])] == s) {
            if (labels[order[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(n0);
        const double tpr = static_cast<double>(tp) / static_cast<double>(n1);
        // above the threshold s: 1 - CDF, so |CDF0 - CDF1| = |tpr - fpr| one step below
        rep.ks = std::max(rep.ks, std::abs(tpr - fpr));
        const auto& prev = rep.roc.back();
        rep.auc += (fpr - prev.first) * (tpr + prev.second) * 0.5;
        rep.roc.emplace_back(fpr, tpr);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if ((scores[static_cast<Eigen::Index>(i)] >= classification_threshold ? 1 : 0) == labels[i]) ++correct;
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    return rep;
}

/// Reports on the learning set and on the held-out set.
inline std::pair<ClassificationReport, ClassificationReport> score_and_report(const LinearModel& model,
                                                                              const Eigen::MatrixXd& x_learn,
                                                                              const std::vector<int>& y_learn,
                                                                              const Eigen::MatrixXd& x_test,
                                                                              const std::vector<int>& y_test) {
    return {classification_report(model.predict(x_learn), y_learn), classification_report(model.predict(x_test), y_test)};
}

/// Regression of the output-signature coordinates of tau on the input
/// signature of gamma: one ridge model per output word.
struct ConditionalLawModel {
    int in_depth = 0;
    int out_depth = 0;
    Transform transform = Transform::none;
    std::vector<Word> out_columns;
    std::vector<LinearModel> models;

    Eigen::MatrixXd predict(const std::vector<Stream>& inputs) const {
        const FeatureMatrix x = featurize(inputs, in_depth, transform);
        Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(models.size()));
        for (std::size_t c = 0; c < models.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = models[c].predict(x.values);
        return out;
    }
};

inline ConditionalLawModel fit_conditional_law(const std::vector<Stream>& inputs, const std::vector<Stream>& outputs,
                                               int in_depth, int out_depth, double lambda,
                                               Transform transform = Transform::none) {
    if (inputs.size() != outputs.size()) throw DimensionMismatch("inputs and outputs differ in count");
    if (inputs.size() < 2) throw DataError("conditional-law regression needs at least 2 pairs");
    const FeatureMatrix x = featurize(inputs, in_depth, transform);
    const FeatureMatrix y = featurize(outputs, out_depth, transform);
    ConditionalLawModel m{in_depth, out_depth, transform, y.columns, {}};
    for (Eigen::Index c = 0; c < y.cols(); ++c) m.models.push_back(fit_ridge(x, y.values.col(c), lambda));
    return m;
}

/// Coefficient of determination per column; NaN for constant targets.
inline std::vector<double> r_squared(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) throw DimensionMismatch("r_squared shape mismatch");
    std::vector<double> out;
    for (Eigen::Index c = 0; c < truth.cols(); ++c) {
        const double mean = truth.col(c).mean();
        const double tot = (truth.col(c).array() - mean).square().sum();
        const double res = (truth.col(c) - pred.col(c)).squaredNorm();
        out.push_back(tot > 0.0 ? 1.0 - res / tot : std::nan(""));
    }
    return out;
}

/// Two-class synthetic streams in R^2. In class 1 the second coordinate
/// follows the first with a one-step lag (positive Levy area drift); in class
/// 0 the roles are swapped. Each coordinate of each stream is centred and
/// scaled to unit quadratic variation.
struct SyntheticTask {
    std::vector<Stream> streams;
    std::vector<int> labels;
};

inline Stream normalize_stream(const Stream& s) {
    const int d = s.dim();
    std::vector<double> p = s.raw_points();
    const std::size_t n = s.size();
    for (int j = 0; j < d; ++j) {
        double mean = 0.0, qv = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += p[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
        mean /= static_cast<double>(n);
        for (std::size_t i = 1; i < n; ++i) {
            const double inc = p[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] -
                               p[(i - 1) * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
            qv += inc * inc;
        }
        const double scale = qv > 0.0 ? 1.0 / std::sqrt(qv) : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double& x = p[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
            x = (x - mean) * scale;
        }
    }
    return Stream(d, s.times(), std::move(p));
}

inline SyntheticTask synthetic_two_class(std::size_t count, std::size_t length, double coupling, std::uint64_t seed) {
    if (length < 2) throw DataError("synthetic streams need at least 2 samples");
    if (!(coupling >= 0.0 && coupling < 1.0)) throw DataError("coupling must lie in [0, 1)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    SyntheticTask task;
    const double rest = std::sqrt(1.0 - coupling * coupling);
    for (std::size_t k = 0; k < count; ++k) {
        const int label = static_cast<int>(k % 2);
        std::vector<double> t, p;
        double x = 0.0, y = 0.0, prev_lead = 0.0;
        for (std::size_t i = 0; i < length; ++i) {
            t.push_back(static_cast<double>(i) / static_cast<double>(length - 1));
            p.push_back(label ? x : y);
            p.push_back(label ? y : x);
            const double lead = g(rng);
            const double lag = coupling * prev_lead + rest * g(rng);
            prev_lead = lead;
            x += lead;
            y += lag;
        }
        task.streams.push_back(normalize_stream(Stream(2, std::move(t), std::move(p))));
        task.labels.push_back(label);
    }
    return task;
}

} // namespace sigtools

#endif // SIGTOOLS_LEARN_HPP
