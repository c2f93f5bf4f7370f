#include "cli/app.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "kmodels/errors.hpp"

namespace kmodels::cli {
namespace {

constexpr const char* kConfigEnv = "KMODELS_CONFIG";

// Flag values that were given explicitly; anything left empty falls back to the config document.
struct ClusterFlags {
    std::optional<std::string> config, input, format, labels, loss, init, vanish, output;
    std::optional<std::size_t> k, p, q, d, restarts, lags, max_iters, rolling;
    std::optional<std::uint64_t> seed;
    std::optional<double> flag_threshold;
    bool center = false;
    bool log = false;
};

void add_run_flags(CLI::App* cmd, ClusterFlags& f) {
    cmd->add_option("--config", f.config, "JSON run manifest (default: $KMODELS_CONFIG)");
    cmd->add_option("--input,-i", f.input, "input CSV");
    cmd->add_option("--format", f.format, "CSV layout: wide or long");
    cmd->add_option("--labels", f.labels, "label column for scoring against the clustering");
    cmd->add_option("--k", f.k, "number of clusters");
    cmd->add_option("--p", f.p, "AR order");
    cmd->add_option("--q", f.q, "MA order (q > 0 selects ARMA by conditional least squares)");
    cmd->add_option("--d", f.d, "differencing order");
    cmd->add_option("--loss", f.loss, "l1 or l2");
    cmd->add_option("--init", f.init, "prototype or partition");
    cmd->add_option("--restarts", f.restarts, "runs with consecutive seeds; the lowest loss wins");
    cmd->add_option("--seed", f.seed, "initialization seed");
    cmd->add_option("--lags", f.lags, "autocorrelation lags for diagnostics");
    cmd->add_option("--max-iters", f.max_iters, "iteration cap per run");
    cmd->add_option("--vanish", f.vanish, "empty cluster policy: drop or reassign");
    cmd->add_option("--flag-threshold", f.flag_threshold, "flag series with Ljung-Box p-value below this");
    cmd->add_option("--rolling", f.rolling, "rolling-mean window");
    cmd->add_flag("--log", f.log, "log-transform before differencing");
    cmd->add_flag("--center", f.center, "subtract each series' mean last");
    cmd->add_option("--output,-o", f.output, "result file (default stdout)");
}

RunManifest resolve_manifest(const ClusterFlags& f) {
    RunManifest m;
    std::optional<std::string> config = f.config;
    if (!config) {
        if (const char* env = std::getenv(kConfigEnv); env && *env) config = env;
    }
    if (config) m = load_manifest(*config);
    if (f.input) m.input = *f.input;
    if (f.format) m.format = parse_format(*f.format);
    if (f.labels) m.labels = *f.labels;
    if (f.k) m.k = *f.k;
    if (f.p) m.p = *f.p;
    if (f.q) m.q = *f.q;
    if (f.d) m.preprocessing.d = *f.d;
    if (f.loss) m.loss = *f.loss;
    if (f.init) m.init = *f.init;
    if (f.restarts) m.restarts = *f.restarts;
    if (f.seed) m.seed = *f.seed;
    if (f.lags) m.lags = *f.lags;
    if (f.max_iters) m.max_iters = *f.max_iters;
    if (f.vanish) m.vanish = *f.vanish;
    if (f.flag_threshold) m.flag_threshold = *f.flag_threshold;
    if (f.rolling) m.preprocessing.rolling = *f.rolling;
    if (f.log) m.preprocessing.log = true;
    if (f.center) m.preprocessing.center = true;
    if (f.output) m.output = *f.output;
    return m;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoul(item, &used);
            if (used != item.size() || v == 0) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InvalidArgument("bad k list entry '" + item + "'");
        }
    }
    if (out.empty()) throw InvalidArgument("empty k list");
    return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Model-based clustering of time series (K-Models)", "kmodels"};
    app.require_subcommand(1);

    ClusterFlags cluster_flags;
    auto* cluster = app.add_subcommand("cluster", "cluster the series of a CSV file");
    add_run_flags(cluster, cluster_flags);

    std::string diag_result, diag_output;
    std::optional<std::size_t> diag_lags;
    std::optional<double> diag_threshold;
    auto* diagnose = app.add_subcommand("diagnose", "recompute goodness-of-fit diagnostics for a cluster result");
    diagnose->add_option("--result,-r", diag_result, "cluster result JSON")->required();
    diagnose->add_option("--lags", diag_lags, "autocorrelation lags (default: the run's)");
    diagnose->add_option("--flag-threshold", diag_threshold, "Ljung-Box p-value flag threshold");
    diagnose->add_option("--output,-o", diag_output, "output file (default stdout)");

    std::string sim_spec, sim_output, sim_format = "wide";
    std::uint64_t sim_seed = 0;
    std::optional<std::size_t> sim_length;
    bool sim_list = false;
    auto* simulate = app.add_subcommand("simulate", "write a labeled synthetic dataset");
    simulate->add_option("--spec", sim_spec, "builtin design name");
    simulate->add_option("--seed", sim_seed, "simulation seed");
    simulate->add_option("--length", sim_length, "override every series length");
    simulate->add_option("--format", sim_format, "wide or long");
    simulate->add_option("--output,-o", sim_output, "output CSV (default stdout)");
    simulate->add_flag("--list", sim_list, "list builtin designs");

    auto* study = app.add_subcommand("study", "experiment harnesses");
    study->require_subcommand(1);

    std::string van_spec = "4-AR(2)", van_k = "2,3,4,5,7,10", van_init = "prototype", van_loss = "l1", van_output;
    std::uint64_t van_seed = 1;
    VanishingConfig van;
    std::optional<std::size_t> van_length;
    auto* vanish = study->add_subcommand("vanish", "average live clusters over repeated runs");
    vanish->add_option("--spec", van_spec, "builtin design name");
    vanish->add_option("--k", van_k, "comma-separated k values");
    vanish->add_option("--init", van_init, "prototype or partition");
    vanish->add_option("--loss", van_loss, "l1 or l2");
    vanish->add_option("--p", van.p, "AR order");
    vanish->add_option("--replications", van.replications, "runs per k");
    vanish->add_option("--max-iters", van.max_iters, "iteration cap per run");
    vanish->add_option("--length", van_length, "override every series length");
    vanish->add_option("--seed", van_seed, "base seed");
    vanish->add_option("--output,-o", van_output, "output JSON (default stdout)");

    CalibrationConfig cal;
    std::string cal_output;
    auto* calibrate = study->add_subcommand("calibrate", "Monte-Carlo distribution of the grouped statistics");
    calibrate->add_option("--n", cal.n, "series per replication");
    calibrate->add_option("--length", cal.length, "series length");
    calibrate->add_option("--lags", cal.lags, "autocorrelation lags");
    calibrate->add_option("--replications", cal.replications, "Monte-Carlo replications");
    calibrate->add_option("--phi", cal.phi, "AR(1) coefficient");
    calibrate->add_option("--alpha", cal.alpha, "test level for the rejection rate");
    calibrate->add_option("--seed", cal.seed, "seed");
    calibrate->add_option("--output,-o", cal_output, "output JSON (default stdout)");

    std::string exp_kind, exp_input, exp_output;
    auto* exporter = app.add_subcommand("export", "plot tables from a result document");
    exporter->add_option("--kind", exp_kind, "scatter or hist")->required();
    exporter->add_option("--input,-i", exp_input, "result JSON")->required();
    exporter->add_option("--output,-o", exp_output, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (cluster->parsed()) {
            const RunManifest m = resolve_manifest(cluster_flags);
            write_text(m.output, dump(cluster_document(m)));
        } else if (diagnose->parsed()) {
            const Json result = read_json_file(diag_result);
            const auto& man = result.at("manifest");
            const std::size_t lags = diag_lags.value_or(man.value("lags", std::size_t{20}));
            const double threshold = diag_threshold.value_or(man.value("flag_threshold", 0.01));
            write_text(diag_output, dump(diagnose_document(result, lags, threshold)));
        } else if (simulate->parsed()) {
            if (sim_list) {
                std::string names;
                for (const auto& s : builtin_specs()) names += s.name + "\n";
                write_text(sim_output, names);
                return kExitOk;
            }
            if (sim_spec.empty()) throw InvalidArgument("--spec is required (see --list)");
            GroundTruthSpec spec = lookup_spec(sim_spec);
            spec.seed = sim_seed;
            if (sim_length) {
                for (auto& c : spec.clusters) c.length = *sim_length;
            }
            const auto ld = generate(spec);
            std::map<std::string, std::string> labels;
            for (const auto& [id, c] : ld.labels) labels.emplace(id, std::to_string(c));
            std::ostringstream os;
            write_csv(os, ld.data, parse_format(sim_format), labels);
            write_text(sim_output, os.str());
        } else if (vanish->parsed()) {
            GroundTruthSpec spec = lookup_spec(van_spec);
            spec.seed = van_seed;
            if (van_length) {
                for (auto& c : spec.clusters) c.length = *van_length;
            }
            van.k_values = parse_k_list(van_k);
            if (van_init != "prototype" && van_init != "partition") throw InvalidArgument("init must be prototype or partition");
            if (van_loss != "l1" && van_loss != "l2") throw InvalidArgument("loss must be l1 or l2");
            van.init = van_init == "partition" ? InitKind::RandomPartition : InitKind::Prototype;
            van.family = van_loss == "l1" ? FamilyKind::AR_L1 : FamilyKind::AR_L2;
            write_text(van_output, dump(vanish_document(spec, van)));
        } else if (calibrate->parsed()) {
            write_text(cal_output, dump(calibration_document(cal)));
        } else if (exporter->parsed()) {
            std::ostringstream os;
            export_plotdata(read_json_file(exp_input), exp_kind, os);
            write_text(exp_output, os.str());
        }
    } catch (const ClusteringFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const AssignmentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const DegenerateFit& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const NumericalDivergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const NumericallyDegenerate& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitOk;
}

}  // namespace kmodels::cli
