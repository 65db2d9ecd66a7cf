#pragma once

#include "ssr/detection.hpp"
#include "ssr/simulation.hpp"
#include "ssr/solver.hpp"
#include "ssr/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace ssr {

constexpr int kSchemaVersion = 1;

struct PanelDataset {
    std::vector<std::string> units;       // n1, sorted
    std::vector<std::string> categories;  // n2, sorted
    std::vector<std::string> times;       // n3, numeric order if every label is a number
    Tensor3 values;

    bool operator==(const PanelDataset&) const = default;
};

// Long CSV with header unit,category,time,value.
PanelDataset parse_panel(std::istream& in, const std::string& name = "<stream>");
PanelDataset ingest_panel(const std::string& path);
void write_panel(const PanelDataset& ds, std::ostream& out);
void write_panel(const PanelDataset& ds, const std::string& path);

// Headerless n x n numeric CSV.
Mat parse_distance(std::istream& in, const std::string& name = "<stream>");
Mat read_distance_csv(const std::string& path);

// Shortest round-trip text for a double.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& what);

// Comma-separated axes, lambda1 first then lambda2.  Each axis is one of
//   a:b:n       n evenly spaced values from a to b
//   log:a:b:n   n geometrically spaced values (a, b > 0)
//   v1|v2|...   explicit values
// The grid is the product of the two axes.
LambdaGrid parse_grid_spec(const std::string& spec);
std::string format_grid_spec(const LambdaGrid& grid);

struct RunConfig {
    // model
    LambdaGrid grid = ExperimentConfig::default_grid();
    double bandwidth = std::numeric_limits<double>::quiet_NaN();
    double rank_tol = 1e-3;
    FistaConfig fista;
    // monitoring
    Index phase1_window = 0;
    DetectorConfig detector;
    // files
    std::string panel;
    std::string distance;
    std::string out = "ssr_out";
    // simulation
    int scenario = 1;
    double delta = 0.5;
    Index tau = 1;
    int reps = 100;
    int phase1_reps = 200;
    std::uint64_t seed = 1;
    Index n1 = 48, n2 = 3, T = 50;
    double noise_sd = 0.1;

    ExperimentConfig experiment() const;
};

// key = value lines, '#' starts a comment.  Unknown keys and bad values are
// reported with file and line.
void apply_config(RunConfig& cfg, std::istream& in, const std::string& name = "<stream>");
void apply_config_file(RunConfig& cfg, const std::string& path);
// Applies one key; used for both files and command-line overrides.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Cached fits: one row per (pair, unit, category, time).
void write_fit_csv(const std::vector<SsrFit>& fits, const PanelDataset& ds, std::ostream& out);
std::vector<SsrFit> read_fit_csv(std::istream& in, const PanelDataset& ds, const LambdaGrid& grid,
                                 const std::string& name = "<stream>");

void write_monitor_csv(const MonitorResult& res, const Mat& stats, const Phase1Reference& ref,
                       const LambdaGrid& grid, const PanelDataset& ds, Index phase1_window, std::ostream& out);

std::string hotspot_json(const HotspotReport& rep, const PanelDataset& ds, const MonitorState& st);
std::string reference_json(const Phase1Reference& ref, const LambdaGrid& grid, double drift, double limit);
std::string metrics_json(const ExperimentConfig& cfg, const ExperimentResult& res);
void write_replications_csv(const std::vector<ReplicationRecord>& recs, std::ostream& out);

// FNV-1a over the dims and exact bit patterns of the values.
std::uint64_t panel_fingerprint(const PanelDataset& ds);

// Writes text to a file, throwing on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ssr
