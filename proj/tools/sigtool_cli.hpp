#ifndef SIGTOOLS_TOOLS_SIGTOOL_CLI_HPP
#define SIGTOOLS_TOOLS_SIGTOOL_CLI_HPP

// Command-line front end. Exit codes: 0 success, 2 usage error, 3 data
// error, 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sigtools/json_io.hpp"
#include "sigtools/sigtools.hpp"

namespace sigtools::cli {

enum ExitCode : int { ok = 0, usage_error = 2, data_error = 3, numerical_error = 4 };

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DataError("bad number '" + tok + "' in '" + text + "'");
        }
    }
    return out;
}

/// "disk:R" or "polygon:x1,y1;x2,y2;..."
inline DomainShape parse_domain(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw DataError("domain must look like disk:R or polygon:x,y;x,y;...");
    const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
    if (kind == "disk") {
        auto v = parse_list(rest);
        if (v.size() != 1) throw DataError("disk domain takes one radius");
        return Disk{v[0], {0.0, 0.0}};
    }
    if (kind == "polygon") {
        Polygon p;
        std::stringstream ss(rest);
        std::string vertex;
        while (std::getline(ss, vertex, ';')) {
            auto v = parse_list(vertex);
            if (v.size() != 2) throw DataError("polygon vertices are x,y pairs");
            p.vertices.push_back({v[0], v[1]});
        }
        return p;
    }
    throw DataError("unknown domain kind '" + kind + "'");
}

inline Point2 parse_point(const std::string& text) {
    auto v = parse_list(text);
    if (v.size() != 2) throw DataError("point must be x,y");
    return {v[0], v[1]};
}

/// Manifest: CSV with header "path", one stream CSV per row, relative to the
/// manifest's directory.
inline std::vector<Stream> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    const auto base = std::filesystem::path(path).parent_path();
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 4) != "path") throw ParseError("manifest header must be 'path'", 1);
    std::vector<Stream> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        const auto p = std::filesystem::path(line);
        const auto full = p.is_absolute() ? p : base / p;
        try {
            out.push_back(ingest_csv_file(full.string()));
        } catch (const ParseError& e) {
            throw DataError(full.string() + ": " + e.what());
        }
    }
    if (out.empty()) throw ParseError("manifest lists no streams", row);
    return out;
}

/// Labels: CSV with header "label", one 0/1 value per row.
inline std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 5) != "label") throw ParseError("labels header must be 'label'", 1);
    std::vector<int> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line == "0") out.push_back(0);
        else if (line == "1") out.push_back(1);
        else throw ParseError("label must be 0 or 1", row);
    }
    return out;
}

inline json word_map(const TruncatedTensor& t) {
    json m = json::object();
    for (int k = 0; k <= t.depth(); ++k) {
        auto lvl = t.level(k);
        for (std::size_t i = 0; i < lvl.size(); ++i) m[word_at(t.dim(), k, i).str()] = lvl[i];
    }
    return m;
}

inline json radius_to_json(const RadiusReport& r) {
    return {{"l1", r.l1},
            {"l2", r.l2},
            {"ratio_l1", r.ratio_l1},
            {"ratio_l2", r.ratio_l2},
            {"ratio2_l1", r.ratio2_l1},
            {"ratio2_l2", r.ratio2_l2},
            {"root_l1", r.root_l1},
            {"root_l2", r.root_l2},
            {"zero_level", r.zero_level}};
}

inline void emit(std::ostream& out, const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        out << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f << j.dump(2) << "\n";
}

/// Runs one subcommand; output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Signatures, log-signatures, log-ODE solves, expected signatures and signature regression for streams",
                 "sigtool"};
    app.require_subcommand(1);
    app.fallthrough(false);

    std::string output;
    std::function<void()> action;

    // sig / logsig
    int depth = 2;
    std::string transform = "none", input;
    auto* sig = app.add_subcommand("sig", "Truncated signature of a stream CSV as JSON");
    sig->add_option("--depth", depth, "Truncation depth N")->required()->check(CLI::PositiveNumber);
    sig->add_option("--transform", transform, "none | time | leadlag")->check(CLI::IsMember({"none", "time", "leadlag"}));
    sig->add_option("file", input, "Stream CSV (t,x1,...,xd)")->required();
    sig->callback([&] {
        action = [&] {
            const Stream s = apply_transform(ingest_csv_file(input), parse_transform(transform));
            emit(out, tensor_to_json(signature(s, depth)), output);
        };
    });

    auto* logsig = app.add_subcommand("logsig", "Log-signature in Lyndon coordinates as JSON");
    logsig->add_option("--depth", depth, "Truncation depth N")->required()->check(CLI::PositiveNumber);
    logsig->add_option("--transform", transform, "none | time | leadlag")->check(CLI::IsMember({"none", "time", "leadlag"}));
    logsig->add_option("file", input, "Stream CSV")->required();
    logsig->callback([&] {
        action = [&] {
            const Stream s = apply_transform(ingest_csv_file(input), parse_transform(transform));
            emit(out, lie_to_json(log_signature(s, depth)), output);
        };
    });

    // dpdist
    double p = 1.0;
    int levels = 6;
    std::string norm = "l1", input_b;
    auto* dp = app.add_subcommand("dpdist", "Dyadic lower-bound profile of the d_p distance between two streams");
    dp->add_option("--p", p, "Exponent p >= 1")->required();
    dp->add_option("--levels", levels, "Finest dyadic level K")->required()->check(CLI::Range(1, 12));
    dp->add_option("--norm", norm, "l1 | l2")->check(CLI::IsMember({"l1", "l2"}));
    dp->add_option("a", input, "First stream CSV")->required();
    dp->add_option("b", input_b, "Second stream CSV")->required();
    dp->callback([&] {
        action = [&] {
            auto rep = dp_distance_estimate(ingest_csv_file(input), ingest_csv_file(input_b), p, levels,
                                            norm == "l2" ? NormFlavor::l2 : NormFlavor::l1);
            emit(out, dp_report_to_json(rep), output);
        };
    });

    // logode
    int steps = 16, substeps = 8;
    std::string system_path, y0_text;
    auto* lo = app.add_subcommand("logode", "Log-ODE solve of a linear system driven by a stream");
    lo->add_option("--depth", depth, "Log-signature truncation n")->required()->check(CLI::PositiveNumber);
    lo->add_option("--steps", steps, "Number of uniform steps")->required()->check(CLI::PositiveNumber);
    lo->add_option("--substeps", substeps, "RK4 substeps per step")->required()->check(CLI::PositiveNumber);
    lo->add_option("--system", system_path, "System JSON {m, d, matrices}")->required();
    lo->add_option("--y0", y0_text, "Initial state x1,...,xm (default: system 'y0' or e_1)");
    lo->add_option("driver", input, "Driver stream CSV")->required();
    lo->callback([&] {
        action = [&] {
            const json system_json = read_json_file(system_path);
            const LinearSystem lin = linear_system_from_json(system_json);
            const Stream driver = ingest_csv_file(input);
            Vec y0 = Vec::Unit(lin.state_dim(), 0);
            std::vector<double> init;
            if (!y0_text.empty()) init = parse_list(y0_text);
            else if (system_json.contains("y0")) init = system_json.at("y0").get<std::vector<double>>();
            if (!init.empty()) {
                if (static_cast<int>(init.size()) != lin.state_dim()) throw DimensionMismatch("y0 has wrong length");
                y0 = Eigen::Map<Vec>(init.data(), static_cast<Eigen::Index>(init.size()));
            }
            const auto tr = solve(lin.vector_fields(), driver, y0, LogOdeSchedule::uniform(driver, steps, depth, substeps));
            json states = json::array();
            for (const auto& y : tr.states) states.push_back(std::vector<double>(y.data(), y.data() + y.size()));
            emit(out, json{{"times", tr.times}, {"states", states}}, output);
        };
    });

    // develop
    std::string policy_path;
    auto* dev = app.add_subcommand("develop", "Unitary development of a stream");
    dev->add_option("--policy", policy_path, "Policy JSON {u, generators}")->required();
    dev->add_option("stream", input, "Stream CSV")->required();
    dev->callback([&] {
        action = [&] {
            const auto res = develop(policy_from_json(read_json_file(policy_path)), ingest_csv_file(input));
            emit(out,
                 json{{"u", res.psi.rows()},
                      {"psi", cmatrix_to_json(res.psi)},
                      {"interval", {res.start_time, res.end_time}},
                      {"unitarity_defect", unitarity_defect(res.psi)}},
                 output);
        };
    });

    // expsig / expsig-mc
    std::string domain_text = "disk:1.0", point_text = "0,0";
    double h = 0.02;
    auto* es = app.add_subcommand("expsig", "Expected signature of stopped Brownian motion by the PDE recurrence");
    es->set_help_flag("--help", "Print this help message and exit");
    es->add_option("--domain", domain_text, "disk:R or polygon:x,y;x,y;...");
    es->add_option("--h", h, "Grid spacing")->check(CLI::PositiveNumber);
    es->add_option("--depth", depth, "Depth N >= 2")->required()->check(CLI::Range(2, 12));
    es->add_option("--at", point_text, "Evaluation point x,y (nearest grid node)");
    es->callback([&] {
        action = [&] {
            const GridDomain dom(parse_domain(domain_text), h);
            const auto field = solve_recurrence(dom, depth);
            const auto node = dom.nearest_interior(parse_point(point_text));
            const auto value = field.at_node(node);
            const auto z = dom.interior_point(node);
            json j{{"domain", domain_text},
                   {"h", h},
                   {"depth", depth},
                   {"point", {z[0], z[1]}},
                   {"values", word_map(value)},
                   {"max_relative_residual", field.max_relative_residual}};
            if (depth >= 3) j["radius"] = radius_to_json(radius_diagnostic(value));
            emit(out, j, output);
        };
    });

    std::size_t paths = 1000;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto* mc = app.add_subcommand("expsig-mc", "Monte Carlo expected signature of stopped Brownian motion");
    mc->add_option("--paths", paths, "Number of paths")->required()->check(CLI::PositiveNumber);
    mc->add_option("--dt", dt, "Time step")->required()->check(CLI::PositiveNumber);
    mc->add_option("--seed", seed, "Random seed")->required();
    mc->add_option("--domain", domain_text, "disk:R or polygon:x,y;x,y;...");
    mc->add_option("--depth", depth, "Depth N")->check(CLI::Range(1, 10));
    mc->add_option("--start", point_text, "Start point x,y");
    mc->add_option("--threads", threads, "Worker threads");
    mc->callback([&] {
        action = [&] {
            const GridDomain dom(parse_domain(domain_text), 0.1);
            const auto est = mc_expected_sig(dom, parse_point(point_text), depth, paths, dt, seed, threads);
            emit(out,
                 json{{"domain", domain_text},
                      {"depth", depth},
                      {"paths", paths},
                      {"dt", dt},
                      {"seed", seed},
                      {"mean", word_map(est.mean)},
                      {"std_error", word_map(est.std_error)}},
                 output);
        };
    });

    // fit / score
    std::string method = "lasso", features = "signature", labels_path, model_path;
    double lambda = 0.01;
    auto* fit = app.add_subcommand("fit", "Fit a linear model on signature features of labelled streams");
    fit->add_option("--depth", depth, "Feature depth N")->required()->check(CLI::PositiveNumber);
    fit->add_option("--method", method, "ridge | lasso")->required()->check(CLI::IsMember({"ridge", "lasso"}));
    fit->add_option("--lambda", lambda, "Regularization strength")->required()->check(CLI::NonNegativeNumber);
    fit->add_option("--transform", transform, "none | time | leadlag")->check(CLI::IsMember({"none", "time", "leadlag"}));
    fit->add_option("--features", features, "signature | logsignature")->check(CLI::IsMember({"signature", "logsignature"}));
    fit->add_option("train", input, "Manifest CSV listing stream files")->required();
    fit->add_option("labels", labels_path, "Labels CSV")->required();
    fit->add_option("-o,--output", output, "Model JSON path (default stdout)");
    fit->callback([&] {
        action = [&] {
            const auto streams = read_manifest(input);
            const auto labels = read_labels(labels_path);
            if (labels.size() != streams.size()) throw DataError("manifest and labels differ in length");
            const auto kind = features == "logsignature" ? FeatureKind::log_signature : FeatureKind::signature;
            const auto x = featurize(streams, depth, parse_transform(transform), kind);
            Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
            for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i];
            const auto model = method == "ridge" ? fit_ridge(x, y, lambda) : fit_lasso(x, y, lambda);
            if (!model.converged) err << "warning: lasso did not converge in " << model.iterations << " sweeps\n";
            emit(out, model_to_json(model), output);
        };
    });

    auto* score = app.add_subcommand("score", "Score labelled streams with a fitted model");
    score->add_option("model", model_path, "Model JSON")->required();
    score->add_option("test", input, "Manifest CSV")->required();
    score->add_option("labels", labels_path, "Labels CSV")->required();
    score->callback([&] {
        action = [&] {
            const auto model = model_from_json(read_json_file(model_path));
            const auto streams = read_manifest(input);
            const auto labels = read_labels(labels_path);
            if (labels.size() != streams.size()) throw DataError("manifest and labels differ in length");
            const auto x = featurize(streams, model.depth, model.transform, model.kind);
            emit(out, report_to_json(classification_report(model.predict(x.values), labels)), output);
        };
    });

    // gen-synth
    std::size_t count = 200, length = 50;
    double coupling = 0.8;
    std::string out_dir;
    auto* gen = app.add_subcommand("gen-synth", "Write a synthetic two-class stream dataset");
    gen->add_option("--count", count, "Number of streams")->check(CLI::PositiveNumber);
    gen->add_option("--length", length, "Samples per stream")->check(CLI::Range(2, 100000));
    gen->add_option("--coupling", coupling, "Lead-lag coupling in [0, 1)")->check(CLI::Range(0.0, 0.999999));
    gen->add_option("--seed", seed, "Random seed")->required();
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->callback([&] {
        action = [&] {
            const auto task = synthetic_two_class(count, length, coupling, seed);
            std::filesystem::create_directories(out_dir);
            std::ofstream manifest(std::filesystem::path(out_dir) / "manifest.csv");
            std::ofstream labels(std::filesystem::path(out_dir) / "labels.csv");
            if (!manifest || !labels) throw DataError("cannot write into " + out_dir);
            manifest << "path\n";
            labels << "label\n";
            for (std::size_t i = 0; i < task.streams.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "stream_%05zu.csv", i);
                std::ofstream f(std::filesystem::path(out_dir) / name);
                write_csv(f, task.streams[i]);
                manifest << name << "\n";
                labels << task.labels[i] << "\n";
            }
            emit(out, json{{"count", count}, {"length", length}, {"coupling", coupling}, {"seed", seed}, {"dir", out_dir}}, "");
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return usage_error;
    }
    try {
        if (action) action();
        return ok;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return data_error;
    } catch (const json::exception& e) {
        err << "data error: " << e.what() << "\n";
        return data_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return data_error;
    }
}

} // namespace sigtools::cli

#endif // SIGTOOLS_TOOLS_SIGTOOL_CLI_HPP
