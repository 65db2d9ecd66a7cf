#include "ssr/simulation.hpp"

#include "ssr/bases.hpp"
#include "ssr/errors.hpp"
#include "ssr/parallel.hpp"

#include <cmath>
#include <string>

namespace ssr {

std::vector<Index> default_hotspots() {
    return {3, 4, 5, 45, 46, 47, 57, 58, 59, 77, 78, 79, 119, 120, 121, 137, 138, 139};
}

void SimConfig::validate() const {
    if (n1 < 1 || n2 < 1 || T < 2) throw ConfigError("simulation needs n1, n2 >= 1 and T >= 2");
    if (tau < 1 || tau > T) throw ConfigError("tau must lie in [1, T], got " + std::to_string(tau));
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be finite and nonnegative");
    if (!(noise_sd >= 0.0) || !(theta_sd >= 0.0)) throw ConfigError("standard deviations must be nonnegative");
    for (Index h : hotspots)
        if (h < 1 || h > n1 * n2)
            throw ConfigError("hot-spot index " + std::to_string(h) + " outside [1, " + std::to_string(n1 * n2) + "]");
}

SimData generate(const SimConfig& cfg, Rng& rng) {
    cfg.validate();
    const Dims d = cfg.dims();
    const Index p = d.slice();
    Mat b = bspline_basis(p, cfg.spline_degree, cfg.spline_knots);
    SimData out{Tensor3(d), Tensor3(d), Tensor3(d), std::vector<char>(p, 0)};
    if (cfg.delta > 0.0)
        for (Index h : cfg.hotspots) out.mask[h - 1] = 1;
    Vec theta(b.cols());
    for (Index t = 0; t < d.n3; ++t) {
        double m = cfg.scenario == Scenario::Stationary ? 1.0 : std::pow(0.95, static_cast<double>(t));
        for (Index k = 0; k < theta.size(); ++k) theta[k] = rng.normal(m, cfg.theta_sd);
        Vec mu = b * theta;
        out.mu.data().segment(t * p, p) = mu;
        for (Index k = 0; k < p; ++k) out.y.data()[t * p + k] = mu[k] + rng.normal(0.0, cfg.noise_sd);
        if (t + 1 >= cfg.tau)
            for (Index k = 0; k < p; ++k)
                if (out.mask[k]) {
                    out.hot.data()[t * p + k] = cfg.delta;
                    out.y.data()[t * p + k] += cfg.delta;
                }
    }
    return out;
}

SimData generate(const SimConfig& cfg) {
    Rng rng(cfg.seed);
    return generate(cfg, rng);
}

LocalizationScore score_localization(const HotspotReport& report, const std::vector<char>& truth_mask, const Dims& d) {
    if (static_cast<Index>(truth_mask.size()) != d.slice()) throw ShapeError("truth mask does not match dims");
    std::vector<char> hit(truth_mask.size(), 0);
    for (auto& e : report.entries) {
        if (e.i < 0 || e.i >= d.n1 || e.j < 0 || e.j >= d.n2) throw ShapeError("hot-spot entry outside dims");
        hit[e.i + d.n1 * e.j] = 1;
    }
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < hit.size(); ++k) {
        if (hit[k] && truth_mask[k]) ++tp;
        else if (hit[k]) ++fp;
        else if (truth_mask[k]) ++fn;
    }
    LocalizationScore s;
    if (tp + fp + fn == 0) {
        s.degenerate = true;
        s.precision = s.recall = s.f_harmonic = s.f_arithmetic = 1.0;
        return s;
    }
    if (tp + fp == 0) s.no_detections = true;
    else s.precision = tp / (tp + fp);
    if (tp + fn == 0) {
        s.degenerate = true;
        s.recall = 1.0;
    } else {
        s.recall = tp / (tp + fn);
    }
    s.f_arithmetic = 0.5 * (s.precision + s.recall);
    s.f_harmonic = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

double smse(const Vec& mu_hat, const Vec& mu_true) {
    if (mu_hat.size() != mu_true.size()) throw ShapeError("smse: length mismatch");
    if (mu_hat.size() == 0) throw ShapeError("smse: empty input");
    return std::sqrt((mu_hat - mu_true).squaredNorm() / static_cast<double>(mu_hat.size()));
}

LambdaGrid ExperimentConfig::default_grid() { return LambdaGrid::product({0.0, 0.01, 0.025}, {0.05, 0.2, 1.0}); }

void ExperimentConfig::validate() const {
    sim.validate();
    grid.validate();
    detector.validate();
    if (reps < 1) throw ConfigError("reps must be at least 1");
    if (phase1_reps < 1) throw ConfigError("phase-I replications must be at least 1");
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
}

DesignPtr simulation_design(const ExperimentConfig& cfg) {
    KernelConfig kc{cfg.bandwidth, line_distance(cfg.sim.n1)};
    Mat kernel = gaussian_kernel_basis(kc);
    DesignOptions opt;
    opt.rank_tol = cfg.rank_tol;
    return SsrDesign::build(cfg.sim.dims(), BasisSet::standard(kernel, cfg.sim.n2, cfg.sim.T), opt);
}

namespace {

constexpr std::uint64_t kPhase1Stream = 1;
constexpr std::uint64_t kMonitorStream = 2;

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

Phase1Reference simulate_reference(const ExperimentConfig& cfg, const DesignPtr& design) {
    const std::size_t n = static_cast<std::size_t>(cfg.phase1_reps);
    const Index T = cfg.sim.T;
    std::vector<Mat> per(n);
    parallel_for(n, [&](std::size_t r) {
        SimConfig sc = cfg.sim;
        sc.delta = 0.0;
        Rng rng(derive_seed(cfg.sim.seed, kPhase1Stream, r));
        SimData data = generate(sc, rng);
        per[r] = grid_statistics(make_problem(design, data.y), cfg.grid, cfg.fista).stats;
    });
    Mat all(static_cast<Index>(cfg.grid.size()), static_cast<Index>(n) * T);
    for (std::size_t r = 0; r < n; ++r) all.middleCols(static_cast<Index>(r) * T, T) = per[r];
    return estimate_reference(all);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    DesignPtr design = simulation_design(cfg);
    return run_experiment(cfg, design, simulate_reference(cfg, design));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const DesignPtr& design, const Phase1Reference& reference) {
    cfg.validate();
    if (!design || !(design->dims() == cfg.sim.dims())) throw ConfigError("design does not match the simulation dims");
    reference.validate(cfg.grid.size());
    ExperimentResult res;
    res.design_rank = design->mean_basis(1).rank;
    res.reference = reference;

    const Dims d = cfg.sim.dims();
    const Index tau0 = cfg.sim.tau - 1;
    res.records.resize(static_cast<std::size_t>(cfg.reps));
    parallel_for(res.records.size(), [&](std::size_t r) {
        ReplicationRecord& rec = res.records[r];
        rec.rep = static_cast<int>(r);
        rec.seed = derive_seed(cfg.sim.seed, kMonitorStream, r);
        try {
            Rng rng(rec.seed);
            SimData data = generate(cfg.sim, rng);
            GridStatistics g = grid_statistics(make_problem(design, data.y), cfg.grid, cfg.fista);
            MonitorResult mon = run_cusum(g.stats, cfg.grid, res.reference, cfg.detector);
            const MonitorState* at = nullptr;
            for (auto& st : mon.states) {
                if (!st.alarmed) continue;
                if (st.t < tau0) {
                    rec.early_alarm = true;
                } else {
                    at = &st;
                    break;
                }
            }
            const MonitorState& chosen = at ? *at : mon.states.back();
            const SsrFit& f = g.fits[chosen.pair_index];
            rec.lambda1 = f.lambda1;
            rec.lambda2 = f.lambda2;
            rec.smse = smse(f.mu_hat, data.mu.data());
            if (at) {
                rec.alarm_time = at->t + 1;
                rec.delay = static_cast<double>(at->t - tau0 + 1);
                HotspotReport hr = localize(f, at->t, d);
                rec.reported = hr.entries.size();
                LocalizationScore sc = score_localization(hr, data.mask, d);
                rec.precision = sc.precision;
                rec.recall = sc.recall;
                rec.f_harmonic = sc.f_harmonic;
                rec.f_arithmetic = sc.f_arithmetic;
            } else {
                rec.delay = cfg.undetected_delay;
            }
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
    });

    MetricsReport& m = res.metrics;
    std::vector<double> delays, smses, prec, rec_, fh, fa;
    int alarms = 0, early = 0;
    for (auto& rec : res.records) {
        if (!rec.error.empty()) {
            ++m.failures;
            continue;
        }
        ++m.replications;
        delays.push_back(rec.delay);
        smses.push_back(rec.smse);
        if (rec.alarm_time || rec.early_alarm) ++alarms;
        if (rec.early_alarm) ++early;
        if (rec.alarm_time) {
            ++m.detected;
            prec.push_back(rec.precision);
            rec_.push_back(rec.recall);
            fh.push_back(rec.f_harmonic);
            fa.push_back(rec.f_arithmetic);
        }
    }
    m.arl1_mean = mean_of(delays);
    m.arl1_sd = sd_of(delays);
    m.smse_mean = mean_of(smses);
    m.smse_sd = sd_of(smses);
    m.precision = mean_of(prec);
    m.recall = mean_of(rec_);
    m.f_measure_harmonic = mean_of(fh);
    m.f_measure_arithmetic = mean_of(fa);
    if (m.replications > 0) {
        m.alarm_rate = static_cast<double>(alarms) / m.replications;
        m.early_alarm_rate = static_cast<double>(early) / m.replications;
    }
    return res;
}

}  // namespace ssr
