#pragma once

#include "ssr/solver.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ssr {

// (h+)^T r / ||h+||, where h+ keeps the positive entries of h.  Zero when
// h has no positive entry.
double test_statistic_up(const Vec& h_t, const Vec& r_t);

struct Phase1Reference {
    std::vector<double> mean;  // per grid pair
    std::vector<double> var;
    std::size_t samples = 0;
    // Mean and standard deviation of the standardized max over phase-I.
    double ptilde_mean = 0.0;
    double ptilde_sd = 0.0;
    std::string warning;

    void validate(std::size_t n_pairs) const;
};

// stats: one row per grid pair, one column per in-control sample.
Phase1Reference estimate_reference(const Mat& stats);

struct Selection {
    double p_tilde = 0.0;
    std::size_t index = 0;  // position in the grid; first wins on ties
};

Selection standardize_and_select(const Vec& stats_t, const Phase1Reference& ref);

struct MonitorState {
    Index t = -1;  // zero-based time index, -1 before the first step
    double p_tilde = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;
    std::size_t pair_index = 0;
    double w = 0.0;
    bool alarmed = false;
    double limit = 0.0;
    double drift = 0.0;
};

// w' = max(0, w + p_tilde - d); alarm when w' > L.
MonitorState cusum_step(const MonitorState& prev, double p_tilde, double d, double limit);

struct DetectorConfig {
    // Absolute drift; NaN means ptilde_mean + allowance * ptilde_sd from phase-I.
    double drift = std::numeric_limits<double>::quiet_NaN();
    double allowance = 1.25;
    double limit_multiplier = 4.0;

    double resolve_drift(const Phase1Reference& ref) const;
    double resolve_limit(const Phase1Reference& ref) const;
    void validate() const;
};

// Statistic per grid pair (rows) and time step (columns), residuals taken
// against the mean of the same fit.
Mat statistics_from_fits(const Vec& y, const Dims& d, const std::vector<SsrFit>& fits);

struct GridStatistics {
    Mat stats;
    std::vector<SsrFit> fits;
};

GridStatistics grid_statistics(const SsrProblem& problem, const LambdaGrid& grid, const FistaConfig& cfg = {});

struct MonitorResult {
    std::vector<MonitorState> states;
    std::optional<Index> first_alarm;  // zero-based time index
    double drift = 0.0;
    double limit = 0.0;
};

// CUSUM over columns t_begin .. end of stats.
MonitorResult run_cusum(const Mat& stats, const LambdaGrid& grid, const Phase1Reference& ref,
                        const DetectorConfig& cfg, Index t_begin = 0);

MonitorResult monitor(const SsrProblem& problem, const LambdaGrid& grid, const Phase1Reference& ref,
                      const DetectorConfig& det, const FistaConfig& fista = {});

struct HotspotEntry {
    Index i = 0, j = 0;
    double magnitude = 0.0;
};

struct HotspotReport {
    Index t = 0;
    std::vector<HotspotEntry> entries;
};

// All (i, j) with h_hat[i, j, t_star] > 0.
HotspotReport localize(const SsrFit& fit, Index t_star, const Dims& d);

}  // namespace ssr
