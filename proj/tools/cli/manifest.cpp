#include "cli/manifest.hpp"

#include <fstream>
#include <set>

#include "kmodels/errors.hpp"

namespace kmodels::cli {

void RunManifest::validate() const {
    if (loss != "l1" && loss != "l2") throw InvalidArgument("loss must be l1 or l2, got '" + loss + "'");
    if (init != "prototype" && init != "partition") {
        throw InvalidArgument("init must be prototype or partition, got '" + init + "'");
    }
    if (vanish != "drop" && vanish != "reassign") {
        throw InvalidArgument("vanish policy must be drop or reassign, got '" + vanish + "'");
    }
    if (q > 0 && loss == "l1") throw InvalidArgument("MA terms (q > 0) are fitted by conditional least squares only");
    if (k == 0) throw InvalidArgument("k must be positive");
    if (restarts == 0) throw InvalidArgument("restarts must be positive");
    if (max_iters == 0) throw InvalidArgument("max-iters must be positive");
    if (preprocessing.rolling == 0) throw InvalidArgument("rolling window must be positive");
    if (!(flag_threshold > 0.0 && flag_threshold < 1.0)) throw InvalidArgument("flag threshold must lie in (0, 1)");
    family().validate();
}

ModelFamily RunManifest::family() const {
    if (q > 0) return ModelFamily::arma_css(p, q);
    return loss == "l1" ? ModelFamily::ar_l1(p) : ModelFamily::ar_l2(p);
}

KModelsConfig RunManifest::config() const {
    KModelsConfig c;
    c.k = k;
    c.max_iters = max_iters;
    c.restarts = restarts;
    c.init = InitMethod{init == "partition" ? InitKind::RandomPartition : InitKind::Prototype, seed};
    c.family = family();
    c.vanish_policy = vanish == "reassign" ? VanishPolicy::ReassignFarthest : VanishPolicy::Drop;
    return c;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["input"] = m.input;
    j["format"] = to_string(m.format);
    j["labels"] = m.labels ? nlohmann::ordered_json(*m.labels) : nlohmann::ordered_json(nullptr);
    j["preprocessing"] = {{"rolling", m.preprocessing.rolling},
                          {"log", m.preprocessing.log},
                          {"d", m.preprocessing.d},
                          {"center", m.preprocessing.center}};
    j["p"] = m.p;
    j["q"] = m.q;
    j["loss"] = m.loss;
    j["k"] = m.k;
    j["init"] = m.init;
    j["restarts"] = m.restarts;
    j["seed"] = m.seed;
    j["max_iters"] = m.max_iters;
    j["vanish"] = m.vanish;
    j["lags"] = m.lags;
    j["flag_threshold"] = m.flag_threshold;
    j["output"] = m.output;
    return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("manifest must be a JSON object");
    static const std::set<std::string> known{"input", "format", "labels", "preprocessing", "p", "q",
                                             "loss", "k", "init", "restarts", "seed", "max_iters",
                                             "vanish", "lags", "flag_threshold", "output"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw InvalidArgument("unknown manifest key '" + key + "'");
    }
    RunManifest m;
    try {
        m.input = j.value("input", m.input);
        if (j.contains("format")) m.format = parse_format(j.at("format").get<std::string>());
        if (j.contains("labels") && !j.at("labels").is_null()) m.labels = j.at("labels").get<std::string>();
        if (j.contains("preprocessing")) {
            const auto& pp = j.at("preprocessing");
            m.preprocessing.rolling = pp.value("rolling", m.preprocessing.rolling);
            m.preprocessing.log = pp.value("log", m.preprocessing.log);
            m.preprocessing.d = pp.value("d", m.preprocessing.d);
            m.preprocessing.center = pp.value("center", m.preprocessing.center);
        }
        m.p = j.value("p", m.p);
        m.q = j.value("q", m.q);
        m.loss = j.value("loss", m.loss);
        m.k = j.value("k", m.k);
        m.init = j.value("init", m.init);
        m.restarts = j.value("restarts", m.restarts);
        m.seed = j.value("seed", m.seed);
        m.max_iters = j.value("max_iters", m.max_iters);
        m.vanish = j.value("vanish", m.vanish);
        m.lags = j.value("lags", m.lags);
        m.flag_threshold = j.value("flag_threshold", m.flag_threshold);
        m.output = j.value("output", m.output);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad manifest field: ") + e.what());
    }
    return m;
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        return manifest_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config '") + path + "': " + e.what(), 0);
    }
}

Dataset preprocess(const Dataset& raw, const Preprocessing& steps) {
    std::vector<TimeSeries> out;
    out.reserve(raw.size());
    for (const auto& s : raw) {
        try {
            TimeSeries x = s;
            if (steps.rolling > 1) x = rolling_mean(x, steps.rolling);
            if (steps.log) x = log_transform(x);
            if (steps.d > 0) x = difference(x, steps.d);
            if (steps.center) x = center(x);
            // transforms decorate the id; outputs refer to the input ids
            out.emplace_back(s.id(), std::vector<double>(x.values().begin(), x.values().end()));
        } catch (const DomainError& e) {
            throw DomainError("series '" + s.id() + "': " + e.what(), e.index());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("series '" + s.id() + "': " + e.what());
        }
    }
    return Dataset(std::move(out));
}

}  // namespace kmodels::cli
