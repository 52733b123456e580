#ifndef SIGTOOLS_JSON_IO_HPP
#define SIGTOOLS_JSON_IO_HPP

// JSON encodings of the library's value types (nlohmann/json).

#include <string>
#include <vector>

#include "json.hpp"

#include "sigtools/development.hpp"
#include "sigtools/errors.hpp"
#include "sigtools/expected_sig.hpp"
#include "sigtools/learn.hpp"
#include "sigtools/lie.hpp"
#include "sigtools/logode.hpp"
#include "sigtools/stream.hpp"
#include "sigtools/tensor.hpp"

namespace sigtools {

using nlohmann::json;

/// {"d": int, "depth": int, "levels": [[...], ...], "coefficients": {"1,2": ...}}
inline json tensor_to_json(const TruncatedTensor& t, bool with_words = true) {
    json levels = json::array();
    for (int k = 0; k <= t.depth(); ++k) {
        auto lvl = t.level(k);
        levels.push_back(std::vector<double>(lvl.begin(), lvl.end()));
    }
    json j{{"d", t.dim()}, {"depth", t.depth()}, {"levels", levels}};
    if (with_words) {
        json words = json::object();
        for (int k = 0; k <= t.depth(); ++k) {
            auto lvl = t.level(k);
            for (std::size_t i = 0; i < lvl.size(); ++i) words[word_at(t.dim(), k, i).str()] = lvl[i];
        }
        j["coefficients"] = words;
    }
    return j;
}

inline TruncatedTensor tensor_from_json(const json& j) {
    try {
        const int d = j.at("d").get<int>(), n = j.at("depth").get<int>();
        TruncatedTensor t(d, n);
        const auto& levels = j.at("levels");
        if (!levels.is_array() || static_cast<int>(levels.size()) != n + 1) throw DataError("tensor JSON needs depth + 1 levels");
        for (int k = 0; k <= n; ++k) {
            auto vals = levels[static_cast<std::size_t>(k)].get<std::vector<double>>();
            auto lvl = t.level(k);
            if (vals.size() != lvl.size()) throw DataError("tensor JSON level " + std::to_string(k) + " has wrong length");
            std::copy(vals.begin(), vals.end(), lvl.begin());
        }
        return t;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed tensor JSON: ") + e.what());
    }
}

/// {"d", "depth", "coordinates": [["[1,2]", value], ...], "values": {"[1,2]": value}}
inline json lie_to_json(const LieCoordinates& l) {
    json pairs = json::array(), values = json::object();
    for (std::size_t i = 0; i < l.size(); ++i) {
        const std::string name = l.basis().render(i);
        pairs.push_back(json::array({name, l[i]}));
        values[name] = l[i];
    }
    return {{"d", l.dim()}, {"depth", l.depth()}, {"coordinates", pairs}, {"values", values}};
}

inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline Mat matrix_from_json(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw DataError("empty matrix");
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw DataError("ragged matrix rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

/// {"m": int, "d": int, "matrices": [[[...]]]}
inline LinearSystem linear_system_from_json(const json& j) {
    try {
        const int m = j.at("m").get<int>(), d = j.at("d").get<int>();
        LinearSystem sys;
        for (const auto& mj : j.at("matrices")) sys.matrices.push_back(matrix_from_json(mj));
        if (static_cast<int>(sys.matrices.size()) != d) throw DataError("system JSON: expected d matrices");
        for (const auto& a : sys.matrices)
            if (a.rows() != m || a.cols() != m) throw DataError("system JSON: matrices must be m x m");
        sys.validate();
        return sys;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed system JSON: ") + e.what());
    }
}

inline json linear_system_to_json(const LinearSystem& sys) {
    json mats = json::array();
    for (const auto& a : sys.matrices) mats.push_back(matrix_to_json(a));
    return {{"m", sys.state_dim()}, {"d", sys.driver_dim()}, {"matrices", mats}};
}

inline json cmatrix_to_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(row);
    }
    return rows;
}

inline CMat cmatrix_from_json(const json& j, int u) {
    CMat m(u, u);
    if (!j.is_array() || static_cast<int>(j.size()) != u) throw DataError("generator must have u rows");
    for (int r = 0; r < u; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != u) throw DataError("generator must have u columns");
        for (int c = 0; c < u; ++c) {
            const auto& z = row[static_cast<std::size_t>(c)];
            if (!z.is_array() || z.size() != 2) throw DataError("generator entries are [re, im] pairs");
            m(r, c) = {z[0].get<double>(), z[1].get<double>()};
        }
    }
    return m;
}

/// {"u": int, "generators": [[[re,im],...],...]}
inline UnitaryPolicy policy_from_json(const json& j) {
    try {
        const int u = j.at("u").get<int>();
        std::vector<CMat> gens;
        for (const auto& g : j.at("generators")) gens.push_back(cmatrix_from_json(g, u));
        return UnitaryPolicy(std::move(gens));
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed policy JSON: ") + e.what());
    }
}

inline json policy_to_json(const UnitaryPolicy& p) {
    json gens = json::array();
    for (const auto& g : p.generators()) gens.push_back(cmatrix_to_json(g));
    return {{"u", p.size()}, {"generators", gens}};
}

inline std::string transform_name(Transform t) {
    switch (t) {
    case Transform::none: return "none";
    case Transform::time: return "time";
    case Transform::leadlag: return "leadlag";
    }
    return "none";
}

inline Transform parse_transform(const std::string& s) {
    if (s == "none") return Transform::none;
    if (s == "time") return Transform::time;
    if (s == "leadlag") return Transform::leadlag;
    throw DataError("unknown transform '" + s + "'");
}

inline json model_to_json(const LinearModel& m) {
    json coeffs = json::array();
    for (std::size_t i = 0; i < m.coefficients.size(); ++i)
        coeffs.push_back(json::array({i < m.columns.size() ? m.columns[i].str() : std::to_string(i), m.coefficients[i]}));
    return {{"depth", m.depth},
            {"transform", transform_name(m.transform)},
            {"features", m.kind == FeatureKind::signature ? "signature" : "logsignature"},
            {"method", m.regularization.method},
            {"lambda", m.regularization.lambda},
            {"converged", m.converged},
            {"iterations", m.iterations},
            {"active_set", m.active_set},
            {"coefficients", coeffs}};
}

inline LinearModel model_from_json(const json& j) {
    try {
        LinearModel m;
        m.depth = j.at("depth").get<int>();
        m.transform = parse_transform(j.at("transform").get<std::string>());
        m.kind = j.value("features", std::string("signature")) == "logsignature" ? FeatureKind::log_signature
                                                                                 : FeatureKind::signature;
        m.regularization = {j.at("method").get<std::string>(), j.at("lambda").get<double>()};
        m.converged = j.value("converged", true);
        m.iterations = j.value("iterations", std::size_t{0});
        m.active_set = j.value("active_set", std::vector<std::size_t>{});
        for (const auto& c : j.at("coefficients")) {
            m.columns.push_back(Word::parse(c.at(0).get<std::string>()));
            m.coefficients.push_back(c.at(1).get<double>());
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
}

inline json report_to_json(const ClassificationReport& r) {
    json roc = json::array();
    for (const auto& [fpr, tpr] : r.roc) roc.push_back(json::array({fpr, tpr}));
    return {{"ks", r.ks}, {"auc", r.auc}, {"accuracy", r.accuracy}, {"roc", roc}};
}

inline json dp_report_to_json(const PartitionDistanceReport& r) {
    return {{"p", r.p}, {"levels", r.levels}, {"estimates", r.estimates}};
}

} // namespace sigtools

#endif // SIGTOOLS_JSON_IO_HPP
