#pragma once

#include "ssr/detection.hpp"
#include "ssr/model.hpp"
#include "ssr/rng.hpp"
#include "ssr/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ssr {

enum class Scenario { Stationary = 1, Decreasing = 2 };

std::vector<Index> default_hotspots();

struct SimConfig {
    Index n1 = 48, n2 = 3, T = 50;
    Index tau = 20;  // one-based change time
    double delta = 0.0;
    std::vector<Index> hotspots = default_hotspots();  // one-based indices into the n1*n2 slice
    Scenario scenario = Scenario::Stationary;
    double noise_sd = 0.1;
    double theta_sd = 0.1;
    int spline_degree = 3;
    int spline_knots = 10;
    std::uint64_t seed = 1;

    Dims dims() const { return {n1, n2, T}; }
    void validate() const;
};

struct SimData {
    Tensor3 y;
    Tensor3 mu;   // true mean
    Tensor3 hot;  // true hot-spot component
    std::vector<char> mask;  // length n1*n2, hot-spot support
};

SimData generate(const SimConfig& cfg, Rng& rng);
SimData generate(const SimConfig& cfg);

struct LocalizationScore {
    double precision = 0.0;
    double recall = 0.0;
    double f_harmonic = 0.0;
    double f_arithmetic = 0.0;
    bool no_detections = false;  // precision undefined, reported as 0
    bool degenerate = false;     // empty truth and empty report
};

LocalizationScore score_localization(const HotspotReport& report, const std::vector<char>& truth_mask, const Dims& d);

double smse(const Vec& mu_hat, const Vec& mu_true);

struct ExperimentConfig {
    SimConfig sim;
    LambdaGrid grid = default_grid();
    DetectorConfig detector;
    FistaConfig fista;
    double bandwidth = 8.0;
    double rank_tol = 1e-3;
    int reps = 100;
    int phase1_reps = 200;
    double undetected_delay = 30.0;

    static LambdaGrid default_grid();
    void validate() const;
};

struct ReplicationRecord {
    int rep = 0;
    std::uint64_t seed = 0;
    std::optional<Index> alarm_time;  // one-based, first alarm at or after tau
    bool early_alarm = false;         // some alarm before tau
    double delay = 0.0;
    double precision = 0.0, recall = 0.0, f_harmonic = 0.0, f_arithmetic = 0.0;
    std::size_t reported = 0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double smse = 0.0;
    std::string error;
};

struct MetricsReport {
    double precision = 0.0, recall = 0.0;
    double f_measure_harmonic = 0.0, f_measure_arithmetic = 0.0;
    double arl1_mean = 0.0, arl1_sd = 0.0;
    double smse_mean = 0.0, smse_sd = 0.0;
    int replications = 0;
    int detected = 0;
    int failures = 0;
    double alarm_rate = 0.0;        // share of replications with any alarm
    double early_alarm_rate = 0.0;  // share with an alarm before tau
};

struct ExperimentResult {
    MetricsReport metrics;
    std::vector<ReplicationRecord> records;
    Phase1Reference reference;
    Index design_rank = 0;  // rank kept in the spatial mean basis
};

DesignPtr simulation_design(const ExperimentConfig& cfg);

// In-control replications (delta = 0) on their own seed stream.
Phase1Reference simulate_reference(const ExperimentConfig& cfg, const DesignPtr& design);

ExperimentResult run_experiment(const ExperimentConfig& cfg);
// Reuses a design and phase-I reference built for the same dims and grid.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const DesignPtr& design, const Phase1Reference& reference);

}  // namespace ssr
