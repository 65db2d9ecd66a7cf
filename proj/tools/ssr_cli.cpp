#include "ssr/bases.hpp"
#include "ssr/detection.hpp"
#include "ssr/errors.hpp"
#include "ssr/io.hpp"
#include "ssr/model.hpp"
#include "ssr/simulation.hpp"
#include "ssr/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Flags {
    std::string config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string from_fit;
    std::string bandwidths;
};

// Registers a string option that, when given, overrides config key `key`.
void add_override(CLI::App* app, Flags& fl, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&fl, key](const std::string& v) { fl.overrides.emplace_back(key, v); }, help);
}

ssr::RunConfig load_config(const Flags& fl) {
    ssr::RunConfig cfg;
    if (!fl.config.empty()) ssr::apply_config_file(cfg, fl.config);
    for (auto& [k, v] : fl.overrides) {
        try {
            ssr::apply_config_value(cfg, k, v);
        } catch (const ssr::ParseError& e) {
            throw ssr::ParseError(std::string("option --") + k + ": " + e.what());
        }
    }
    return cfg;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ssr::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct PanelModel {
    ssr::PanelDataset ds;
    ssr::DesignPtr design;
};

PanelModel load_panel_model(const ssr::RunConfig& cfg) {
    if (cfg.panel.empty()) throw ssr::ConfigError("no panel file given (--panel or 'panel =' in the config)");
    if (cfg.distance.empty()) throw ssr::ConfigError("no distance file given (--distance or 'distance =')");
    if (std::isnan(cfg.bandwidth)) throw ssr::ConfigError("no kernel bandwidth given (--bandwidth or 'bandwidth =')");
    PanelModel pm;
    pm.ds = ssr::ingest_panel(cfg.panel);
    ssr::Mat dist = ssr::read_distance_csv(cfg.distance);
    const ssr::Dims d = pm.ds.values.dims();
    if (dist.rows() != d.n1)
        throw ssr::ShapeError("distance matrix is " + std::to_string(dist.rows()) + "x" + std::to_string(dist.cols()) +
                              " but the panel has " + std::to_string(d.n1) + " units");
    ssr::Mat kernel = ssr::gaussian_kernel_basis({cfg.bandwidth, dist});
    ssr::DesignOptions opt;
    opt.rank_tol = cfg.rank_tol;
    pm.design = ssr::SsrDesign::build(d, ssr::BasisSet::standard(kernel, d.n2, d.n3), opt);
    if (!pm.design->warning().empty()) std::cerr << "warning: " << pm.design->warning() << "\n";
    return pm;
}

ordered_json fit_manifest(const ssr::RunConfig& cfg, const PanelModel& pm, const std::vector<ssr::SsrFit>& fits) {
    ordered_json j;
    j["schema_version"] = ssr::kSchemaVersion;
    j["panel_fingerprint"] = hex64(ssr::panel_fingerprint(pm.ds));
    const ssr::Dims& d = pm.ds.values.dims();
    j["dims"] = {d.n1, d.n2, d.n3};
    j["grid"] = ssr::format_grid_spec(cfg.grid);
    j["bandwidth"] = cfg.bandwidth;
    j["rank_tol"] = cfg.rank_tol;
    j["mean_basis_rank"] = pm.design->mean_basis(1).rank;
    j["max_iter"] = cfg.fista.max_iter;
    j["tol"] = cfg.fista.tol;
    j["pairs"] = ordered_json::array();
    for (auto& f : fits)
        j["pairs"].push_back({{"lambda1", f.lambda1},
                              {"lambda2", f.lambda2},
                              {"objective", f.objective},
                              {"iterations", f.iterations},
                              {"converged", f.converged}});
    return j;
}

int cmd_fit(const Flags& fl) {
    ssr::RunConfig cfg = load_config(fl);
    PanelModel pm = load_panel_model(cfg);
    auto problem = ssr::make_problem(pm.design, pm.ds.values);
    auto fits = ssr::fit_grid(problem, cfg.grid, cfg.fista);
    ensure_dir(cfg.out);
    std::ostringstream csv;
    ssr::write_fit_csv(fits, pm.ds, csv);
    ssr::write_text_file(cfg.out + "/fit.csv", csv.str());
    ssr::write_text_file(cfg.out + "/fit_manifest.json", fit_manifest(cfg, pm, fits).dump(2) + "\n");
    return 0;
}

int cmd_monitor(const Flags& fl) {
    ssr::RunConfig cfg = load_config(fl);
    std::vector<ssr::SsrFit> fits;
    ordered_json man;
    if (!fl.from_fit.empty()) {
        std::ifstream mf(fl.from_fit + "/fit_manifest.json");
        if (!mf) throw ssr::ConfigError("cannot open '" + fl.from_fit + "/fit_manifest.json'");
        try {
            man = ordered_json::parse(mf);
            if (man.value("schema_version", 0) != ssr::kSchemaVersion)
                throw ssr::ConfigError("fit manifest has an unsupported schema_version");
            cfg.grid = ssr::parse_grid_spec(man.at("grid").get<std::string>());
            cfg.bandwidth = man.at("bandwidth").get<double>();
            cfg.rank_tol = man.at("rank_tol").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ssr::ParseError(fl.from_fit + "/fit_manifest.json: " + e.what());
        }
    }
    PanelModel pm = load_panel_model(cfg);
    const ssr::Dims d = pm.ds.values.dims();
    if (!fl.from_fit.empty()) {
        if (hex64(ssr::panel_fingerprint(pm.ds)) != man.at("panel_fingerprint").get<std::string>())
            throw ssr::ConfigError("panel does not match the one the cached fits were computed on");
        std::ifstream ff(fl.from_fit + "/fit.csv", std::ios::binary);
        if (!ff) throw ssr::ConfigError("cannot open '" + fl.from_fit + "/fit.csv'");
        fits = ssr::read_fit_csv(ff, pm.ds, cfg.grid, fl.from_fit + "/fit.csv");
    }
    if (cfg.phase1_window < 2 || cfg.phase1_window >= d.n3)
        throw ssr::ConfigError("phase1_window must be set and lie in [2, " + std::to_string(d.n3 - 1) + "]");
    if (fits.empty()) fits = ssr::fit_grid(ssr::make_problem(pm.design, pm.ds.values), cfg.grid, cfg.fista);

    ssr::Mat stats = ssr::statistics_from_fits(pm.ds.values.data(), d, fits);
    ssr::Phase1Reference ref = ssr::estimate_reference(stats.leftCols(cfg.phase1_window));
    if (!ref.warning.empty()) std::cerr << "warning: " << ref.warning << "\n";
    ssr::MonitorResult res = ssr::run_cusum(stats, cfg.grid, ref, cfg.detector, cfg.phase1_window);

    ensure_dir(cfg.out);
    std::ostringstream csv;
    ssr::write_monitor_csv(res, stats, ref, cfg.grid, pm.ds, cfg.phase1_window, csv);
    ssr::write_text_file(cfg.out + "/monitor.csv", csv.str());
    ssr::write_text_file(cfg.out + "/reference.json", ssr::reference_json(ref, cfg.grid, res.drift, res.limit));
    ordered_json summary;
    summary["schema_version"] = ssr::kSchemaVersion;
    summary["phase1_window"] = cfg.phase1_window;
    summary["drift"] = res.drift;
    summary["limit"] = res.limit;
    summary["from_fit"] = !fl.from_fit.empty();
    summary["first_alarm"] = nullptr;
    summary["alarms"] = ordered_json::array();
    for (auto& st : res.states) {
        if (!st.alarmed) continue;
        std::string label = pm.ds.times[st.t];
        if (summary["first_alarm"].is_null()) summary["first_alarm"] = {{"t", st.t + 1}, {"time_label", label}};
        auto rep = ssr::localize(fits[st.pair_index], st.t, d);
        std::string file = "hotspots_t" + std::to_string(st.t + 1) + ".json";
        ssr::write_text_file(cfg.out + "/" + file, ssr::hotspot_json(rep, pm.ds, st));
        summary["alarms"].push_back({{"t", st.t + 1}, {"time_label", label}, {"file", file}});
    }
    ssr::write_text_file(cfg.out + "/monitor_summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const Flags& fl) {
    ssr::RunConfig cfg = load_config(fl);
    ssr::ExperimentConfig ec = cfg.experiment();
    ssr::ExperimentResult res = ssr::run_experiment(ec);
    ensure_dir(cfg.out);
    ssr::write_text_file(cfg.out + "/metrics.json", ssr::metrics_json(ec, res));
    std::ostringstream csv;
    ssr::write_replications_csv(res.records, csv);
    ssr::write_text_file(cfg.out + "/replications.csv", csv.str());
    return res.metrics.failures > 0 ? 5 : 0;
}

int cmd_generate(const Flags& fl) {
    ssr::RunConfig cfg = load_config(fl);
    ssr::ExperimentConfig ec = cfg.experiment();
    ssr::SimData data = ssr::generate(ec.sim);
    const ssr::Dims d = ec.sim.dims();
    ssr::PanelDataset ds;
    auto pad = [](ssr::Index k, int width) {
        std::string s = std::to_string(k);
        return std::string(width - std::min<int>(width, s.size()), '0') + s;
    };
    for (ssr::Index i = 0; i < d.n1; ++i) ds.units.push_back("u" + pad(i + 1, 3));
    for (ssr::Index j = 0; j < d.n2; ++j) ds.categories.push_back("c" + pad(j + 1, 2));
    for (ssr::Index t = 0; t < d.n3; ++t) ds.times.push_back(std::to_string(t + 1));
    ds.values = data.y;
    ensure_dir(cfg.out);
    ssr::write_panel(ds, cfg.out + "/panel.csv");
    ssr::Mat dist = ssr::line_distance(d.n1);
    std::ostringstream dcsv;
    for (ssr::Index i = 0; i < d.n1; ++i) {
        for (ssr::Index j = 0; j < d.n1; ++j) dcsv << (j ? "," : "") << ssr::format_double(dist(i, j));
        dcsv << "\n";
    }
    ssr::write_text_file(cfg.out + "/distance.csv", dcsv.str());
    return 0;
}

int cmd_bandwidth_scan(const Flags& fl) {
    ssr::RunConfig cfg = load_config(fl);
    if (fl.bandwidths.empty()) throw ssr::ConfigError("--bandwidths is required, e.g. 2|4|8");
    if (cfg.panel.empty() || cfg.distance.empty()) throw ssr::ConfigError("--panel and --distance are required");
    ssr::PanelDataset ds = ssr::ingest_panel(cfg.panel);
    ssr::Mat dist = ssr::read_distance_csv(cfg.distance);
    const ssr::Dims d = ds.values.dims();
    if (dist.rows() != d.n1) throw ssr::ShapeError("distance matrix does not match the panel's unit count");
    ssr::LambdaGrid cs = ssr::parse_grid_spec(fl.bandwidths + ",0");
    std::ostringstream out;
    out << "schema_version,bandwidth,rank,residual_share\n";
    const double total = ds.values.data().squaredNorm();
    for (auto& [c, unused] : cs.pairs) {
        (void)unused;
        ssr::Mat kernel = ssr::gaussian_kernel_basis({c, dist});
        ssr::TruncatedBasis tb = ssr::truncate_basis(kernel, cfg.rank_tol);
        ssr::Vec proj = ssr::apply_modes(ds.values.data(), d, {tb.projector, ssr::identity_basis(d.n2),
                                                               ssr::identity_basis(d.n3)});
        double share = total > 0 ? (ds.values.data() - proj).squaredNorm() / total : 0.0;
        out << ssr::kSchemaVersion << ',' << ssr::format_double(c) << ',' << tb.rank << ','
            << ssr::format_double(share) << '\n';
    }
    ensure_dir(cfg.out);
    ssr::write_text_file(cfg.out + "/bandwidth_scan.csv", out.str());
    std::cout << out.str();
    return 0;
}

void emit_error(const std::string& kind, const std::string& msg, const std::string& file = {}, long line = 0) {
    ordered_json j;
    j["error"] = kind;
    j["message"] = msg;
    if (!file.empty()) j["file"] = file;
    if (line > 0) j["line"] = line;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal hot-spot detection with smooth-sparse tensor decomposition"};
    app.require_subcommand(1);
    Flags fl;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", fl.config, "config file with key = value lines");
        add_override(sub, fl, "--grid", "grid", "lambda grid, e.g. \"0:0.02:3,0.05|0.2|1\"");
        add_override(sub, fl, "--bandwidth", "bandwidth", "Gaussian kernel bandwidth");
        add_override(sub, fl, "--rank-tol", "rank_tol", "relative singular-value cutoff for the mean basis");
        add_override(sub, fl, "--max-iter", "max_iter", "FISTA iteration cap");
        add_override(sub, fl, "--out", "out", "output directory");
    };
    auto detector = [&](CLI::App* sub) {
        add_override(sub, fl, "--drift", "drift", "CUSUM drift, or 'auto'");
        add_override(sub, fl, "--allowance", "allowance", "drift above the phase-I mean, in phase-I sd units");
        add_override(sub, fl, "--limit-mult", "limit_multiplier", "control limit in phase-I sd units");
    };
    auto panel = [&](CLI::App* sub) {
        add_override(sub, fl, "--panel", "panel", "long CSV: unit,category,time,value");
        add_override(sub, fl, "--distance", "distance", "headerless n1 x n1 distance CSV");
    };
    auto sim = [&](CLI::App* sub) {
        add_override(sub, fl, "--scenario", "scenario", "1 = stationary mean, 2 = decreasing mean");
        add_override(sub, fl, "--delta", "delta", "shift magnitude");
        add_override(sub, fl, "--tau", "tau", "change time (one-based)");
        add_override(sub, fl, "--seed", "seed", "master seed");
        add_override(sub, fl, "--noise-sd", "noise_sd", "noise standard deviation");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit every grid pair and write the estimates");
    common(fit);
    panel(fit);

    CLI::App* mon = app.add_subcommand("monitor", "run the CUSUM chart over a panel");
    common(mon);
    panel(mon);
    detector(mon);
    add_override(mon, fl, "--phase1-window", "phase1_window", "number of leading time steps used as phase-I");
    mon->add_option("--from-fit", fl.from_fit, "directory written by 'fit' to reuse");

    CLI::App* simc = app.add_subcommand("simulate", "Monte Carlo experiment on synthetic data");
    common(simc);
    detector(simc);
    sim(simc);
    add_override(simc, fl, "--reps", "reps", "monitored replications");
    add_override(simc, fl, "--phase1-reps", "phase1_reps", "in-control replications for the reference");

    CLI::App* gen = app.add_subcommand("generate", "write one synthetic panel and its distance matrix");
    add_override(gen, fl, "--out", "out", "output directory");
    gen->add_option("--config", fl.config, "config file with key = value lines");
    sim(gen);

    CLI::App* scan = app.add_subcommand("bandwidth-scan", "rank and unexplained share per kernel bandwidth");
    scan->add_option("--config", fl.config, "config file with key = value lines");
    panel(scan);
    add_override(scan, fl, "--rank-tol", "rank_tol", "relative singular-value cutoff");
    add_override(scan, fl, "--out", "out", "output directory");
    scan->add_option("--bandwidths", fl.bandwidths, "values as a|b|c or a:b:n")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage_error", e.what());
        return 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fl);
        if (mon->parsed()) return cmd_monitor(fl);
        if (simc->parsed()) return cmd_simulate(fl);
        if (gen->parsed()) return cmd_generate(fl);
        if (scan->parsed()) return cmd_bandwidth_scan(fl);
    } catch (const ssr::ParseError& e) {
        emit_error(e.kind(), e.what(), e.file(), e.line());
        return 2;
    } catch (const ssr::ConfigError& e) {
        emit_error(e.kind(), e.what());
        return 3;
    } catch (const ssr::ShapeError& e) {
        emit_error(e.kind(), e.what());
        return 3;
    } catch (const ssr::NumericalError& e) {
        emit_error(e.kind(), e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error("internal_error", e.what());
        return 1;
    }
    return 0;
}
