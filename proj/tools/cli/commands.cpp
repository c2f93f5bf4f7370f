#include "cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

#include "kmodels/diagnostics.hpp"
#include "kmodels/errors.hpp"
#include "kmodels/log.hpp"

namespace kmodels::cli {
namespace {

Json portmanteau_json(const PortmanteauResult& r) {
    return Json{{"statistic", r.statistic}, {"df", r.df}, {"p_value", r.p_value}};
}

Json model_json(const ClusterModel& model) {
    Json j;
    j["phi"] = model_phi(model);
    j["theta"] = model_theta(model);
    if (const auto* arma = std::get_if<ArmaModel>(&model)) j["sigma2"] = arma->sigma2;
    return j;
}

Partition label_partition(const Dataset& data, const std::map<std::string, std::string>& labels) {
    std::map<std::string, int> codes;
    Partition out;
    for (const auto& s : data) {
        const auto& lab = labels.at(s.id());
        const auto [it, _] = codes.emplace(lab, static_cast<int>(codes.size()));
        out.emplace(s.id(), it->second);
    }
    return out;
}

std::vector<double> doubles(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw InvalidArgument(std::string("result document lacks '") + key + "'");
    }
    return j.at(key).get<std::vector<double>>();
}

}  // namespace

Json report_json(const DiagnosticsReport& report) {
    Json j;
    j["lags"] = report.lags;
    j["flag_threshold"] = report.flag_threshold;
    j["relaxed_lengths"] = report.relaxed_lengths;
    Json series = Json::array();
    for (const auto& s : report.series) {
        series.push_back(Json{{"id", s.series_id},
                              {"cluster", s.cluster},
                              {"ljung_box", portmanteau_json(s.ljung_box)},
                              {"ljung_box_pacf", portmanteau_json(s.ljung_box_pacf)},
                              {"flagged", s.flagged}});
    }
    j["series"] = std::move(series);
    Json clusters = Json::array();
    for (const auto& c : report.clusters) {
        clusters.push_back(Json{{"cluster", c.cluster},
                                {"size", c.size},
                                {"group_r", portmanteau_json(c.group_r)},
                                {"group_pacf", portmanteau_json(c.group_pacf)},
                                {"max_lb_series", c.max_lb_series}});
    }
    j["clusters"] = std::move(clusters);
    j["total_r"] = portmanteau_json(report.total_r);
    j["total_pacf"] = portmanteau_json(report.total_pacf);
    return j;
}

Json cluster_document(const RunManifest& manifest) {
    manifest.validate();
    if (manifest.input.empty()) throw InvalidArgument("no input file given");
    return cluster_document(manifest, read_csv_file(manifest.input, manifest.format, manifest.labels));
}

Json cluster_document(const RunManifest& manifest, const Ingested& raw) {
    manifest.validate();
    const Dataset data = preprocess(raw.data, manifest.preprocessing);
    const ModelFamily family = manifest.family();
    const Clustering result = best_of(data, manifest.config());

    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["manifest"] = to_json(manifest);
    doc["n_series"] = data.size();

    Json assignments = Json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        assignments.push_back(Json{{"id", data[i].id()}, {"cluster", result.assignments[i]}});
    }
    doc["assignments"] = std::move(assignments);

    Json clusters = Json::array();
    for (std::size_t c = 0; c < result.k(); ++c) {
        Json cj{{"index", c}, {"size", result.members(c).size()}, {"vanished", result.is_vanished(c)}};
        if (result.models[c]) {
            const Json m = model_json(*result.models[c]);
            for (const auto& [key, value] : m.items()) cj[key] = value;
        }
        clusters.push_back(std::move(cj));
    }
    doc["clusters"] = std::move(clusters);
    doc["loss_trace"] = result.loss_trace;
    doc["final_loss"] = result.final_loss;
    doc["n_iterations"] = result.n_iterations;
    doc["converged"] = result.converged;
    doc["init_seed"] = result.seed;
    doc["vanished"] = result.vanished;

    // per-series parameters for scatter plots come from fitting each series alone
    Json fits = Json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        Json fj{{"id", data[i].id()}, {"cluster", result.assignments[i]}};
        try {
            const std::size_t idx[] = {i};
            const Json m = model_json(family.fit(data.subset(idx)));
            fj["phi"] = m["phi"];
            fj["theta"] = m["theta"];
        } catch (const std::exception& e) {
            fj["phi"] = nullptr;
            fj["theta"] = nullptr;
            fj["error"] = e.what();
        }
        fits.push_back(std::move(fj));
    }
    doc["series_fits"] = std::move(fits);

    if (!raw.labels.empty()) {
        const auto score = similarity(label_partition(data, raw.labels), result.partition(), "labels", "clustering");
        doc["similarity"] = Json{{"value", score.value}, {"reference", score.reference}, {"candidate", score.candidate}};
    } else {
        doc["similarity"] = nullptr;
    }

    try {
        doc["diagnostics"] = report_json(
            cluster_report(result, data, family, ReportOptions{manifest.lags, manifest.flag_threshold, true}));
    } catch (const std::exception& e) {
        warn(std::string("diagnostics skipped: ") + e.what());
        doc["diagnostics"] = nullptr;
        doc["diagnostics_error"] = e.what();
    }
    return doc;
}

Json diagnose_document(const Json& result, std::size_t lags, double flag_threshold) {
    if (!result.contains("manifest")) throw InvalidArgument("result document lacks 'manifest'");
    const RunManifest manifest = manifest_from_json(result.at("manifest"));
    manifest.validate();
    const auto raw = read_csv_file(manifest.input, manifest.format);
    const Dataset data = preprocess(raw.data, manifest.preprocessing);
    const ModelFamily family = manifest.family();

    Clustering c;
    std::map<std::string, int> by_id;
    for (const auto& a : result.at("assignments")) by_id[a.at("id").get<std::string>()] = a.at("cluster").get<int>();
    for (const auto& s : data) {
        const auto it = by_id.find(s.id());
        if (it == by_id.end()) throw InvalidArgument("series '" + s.id() + "' is missing from the result document");
        c.ids.push_back(s.id());
        c.assignments.push_back(it->second);
    }
    if (by_id.size() != data.size()) throw InvalidArgument("result document names series absent from the input");
    for (const auto& cj : result.at("clusters")) {
        const std::size_t index = cj.at("index").get<std::size_t>();
        if (cj.at("vanished").get<bool>() || !cj.contains("phi")) {
            c.models.emplace_back();
            c.vanished.push_back(index);
            continue;
        }
        auto phi = cj.at("phi").get<std::vector<double>>();
        auto theta = cj.at("theta").get<std::vector<double>>();
        if (family.kind == FamilyKind::ARMA_CSS) {
            c.models.emplace_back(ArmaModel{std::move(phi), std::move(theta), cj.value("sigma2", 0.0)});
        } else {
            c.models.emplace_back(ArModel{std::move(phi)});
        }
    }
    for (int a : c.assignments) {
        if (a != kUnassigned && (a < 0 || static_cast<std::size_t>(a) >= c.k() || !c.models[a])) {
            throw InvalidArgument("assignment to cluster " + std::to_string(a) + " has no model");
        }
    }

    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["manifest"] = to_json(manifest);
    doc["diagnostics"] = report_json(cluster_report(c, data, family, ReportOptions{lags, flag_threshold, true}));
    return doc;
}

Json vanish_document(const GroundTruthSpec& spec, const VanishingConfig& config) {
    const auto rows = vanishing_study(spec, config);
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["study"] = "vanish";
    doc["spec"] = spec.name;
    doc["seed"] = spec.seed;
    doc["init"] = config.init == InitKind::Prototype ? "prototype" : "partition";
    doc["loss"] = config.family == FamilyKind::AR_L1 ? "l1" : "l2";
    doc["p"] = config.p;
    doc["q"] = config.q;
    doc["replications"] = config.replications;
    doc["max_iters"] = config.max_iters;
    Json out = Json::array();
    for (const auto& r : rows) {
        out.push_back(Json{{"k", r.k},
                           {"mean_live", r.mean_live},
                           {"succeeded", r.succeeded},
                           {"failed", r.failed},
                           {"live_counts", r.live_counts}});
    }
    doc["rows"] = std::move(out);
    return doc;
}

Json calibration_document(const CalibrationConfig& config) {
    const auto r = calibration_study(config);
    auto summary = [](const StatSummary& s) {
        return Json{{"mean", s.mean}, {"variance", s.variance}, {"q05", s.q05},
                    {"q50", s.q50},   {"q95", s.q95},           {"rejection_rate", s.rejection_rate}};
    };
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["study"] = "calibrate";
    doc["config"] = Json{{"n", config.n},           {"length", config.length}, {"lags", config.lags},
                         {"replications", config.replications}, {"phi", config.phi},
                         {"alpha", config.alpha},   {"seed", config.seed}};
    doc["df"] = r.df;
    doc["q_r"] = summary(r.q_r);
    doc["q_pacf"] = summary(r.q_pacf);
    doc["values"] = Json{{"q_r", r.q_r_values}, {"q_pacf", r.q_pacf_values}};
    return doc;
}

void export_plotdata(const Json& document, const std::string& kind, std::ostream& out) {
    if (kind == "scatter") {
        if (!document.contains("series_fits")) throw InvalidArgument("scatter export needs a cluster result document");
        std::size_t p = 0, q = 0;
        for (const auto& f : document.at("series_fits")) {
            if (f.at("phi").is_array()) p = std::max(p, f.at("phi").size());
            if (f.at("theta").is_array()) q = std::max(q, f.at("theta").size());
        }
        out << "id";
        for (std::size_t i = 1; i <= p; ++i) out << ",phi" << i;
        for (std::size_t j = 1; j <= q; ++j) out << ",theta" << j;
        out << ",cluster\n";
        for (const auto& f : document.at("series_fits")) {
            out << f.at("id").get<std::string>();
            for (const char* key : {"phi", "theta"}) {
                const auto& v = f.at(key);
                const std::size_t width = std::string(key) == "phi" ? p : q;
                for (std::size_t i = 0; i < width; ++i) {
                    out << ',';
                    if (v.is_array() && i < v.size()) out << format_double(v[i].get<double>());
                }
            }
            out << ',' << f.at("cluster").get<int>() << '\n';
        }
        return;
    }
    if (kind == "hist") {
        if (!document.contains("values")) throw InvalidArgument("hist export needs a calibration result document");
        const auto qr = doubles(document.at("values"), "q_r");
        const auto qp = doubles(document.at("values"), "q_pacf");
        if (qr.size() != qp.size()) throw InvalidArgument("calibration value arrays differ in length");
        out << "replication,Q_r,Q_pacf\n";
        for (std::size_t i = 0; i < qr.size(); ++i) {
            out << (i + 1) << ',' << format_double(qr[i]) << ',' << format_double(qp[i]) << '\n';
        }
        return;
    }
    throw InvalidArgument("unknown export kind '" + kind + "' (expected scatter or hist)");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what(), 0);
    }
}

}  // namespace kmodels::cli
