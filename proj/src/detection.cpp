#include "ssr/detection.hpp"

#include "ssr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssr {

double test_statistic_up(const Vec& h_t, const Vec& r_t) {
    if (h_t.size() != r_t.size()) throw ShapeError("test_statistic_up: length mismatch");
    double num = 0.0, den = 0.0;
    for (Index k = 0; k < h_t.size(); ++k)
        if (h_t[k] > 0.0) {
            num += h_t[k] * r_t[k];
            den += h_t[k] * h_t[k];
        }
    if (den == 0.0) return 0.0;
    return num / std::sqrt(den);
}

void Phase1Reference::validate(std::size_t n_pairs) const {
    if (mean.size() != n_pairs || var.size() != n_pairs)
        throw ConfigError("phase-I reference covers " + std::to_string(mean.size()) + " grid pairs, grid has " +
                          std::to_string(n_pairs));
    for (std::size_t k = 0; k < n_pairs; ++k)
        if (!(var[k] > 0.0) || !std::isfinite(var[k]) || !std::isfinite(mean[k]))
            throw ConfigError("phase-I variance for grid pair " + std::to_string(k) +
                              " is not positive; the statistic is constant under the reference data");
}

namespace {

void mean_var(const double* x, Index n, Index stride, double& m, double& v) {
    m = 0.0;
    for (Index s = 0; s < n; ++s) m += x[s * stride];
    m /= static_cast<double>(n);
    v = 0.0;
    for (Index s = 0; s < n; ++s) v += (x[s * stride] - m) * (x[s * stride] - m);
    v /= static_cast<double>(n - 1);
}

}  // namespace

Phase1Reference estimate_reference(const Mat& stats) {
    const Index n = stats.cols();
    if (n < 2) throw ConfigError("phase-I reference needs at least two samples");
    Phase1Reference ref;
    ref.samples = static_cast<std::size_t>(n);
    ref.mean.resize(stats.rows());
    ref.var.resize(stats.rows());
    for (Index k = 0; k < stats.rows(); ++k)
        mean_var(stats.data() + k, n, stats.rows(), ref.mean[k], ref.var[k]);
    ref.validate(static_cast<std::size_t>(stats.rows()));
    if (n < 30) ref.warning = "phase-I reference uses only " + std::to_string(n) + " samples";

    std::vector<double> pt(n);
    for (Index s = 0; s < n; ++s) pt[s] = standardize_and_select(stats.col(s), ref).p_tilde;
    double m, v;
    mean_var(pt.data(), n, 1, m, v);
    ref.ptilde_mean = m;
    ref.ptilde_sd = std::sqrt(v);
    if (!(ref.ptilde_sd > 0.0)) throw ConfigError("standardized phase-I statistic has zero spread");
    return ref;
}

Selection standardize_and_select(const Vec& stats_t, const Phase1Reference& ref) {
    if (stats_t.size() == 0) throw ConfigError("empty lambda grid");
    if (ref.mean.size() != static_cast<std::size_t>(stats_t.size()) || ref.var.size() != ref.mean.size())
        throw ConfigError("phase-I reference does not cover every grid pair");
    Selection sel;
    sel.p_tilde = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < stats_t.size(); ++k) {
        double z = (stats_t[k] - ref.mean[k]) / std::sqrt(ref.var[k]);
        if (z > sel.p_tilde) {
            sel.p_tilde = z;
            sel.index = static_cast<std::size_t>(k);
        }
    }
    return sel;
}

MonitorState cusum_step(const MonitorState& prev, double p_tilde, double d, double limit) {
    MonitorState s = prev;
    s.t = prev.t + 1;
    s.p_tilde = p_tilde;
    s.w = std::max(0.0, prev.w + p_tilde - d);
    s.alarmed = s.w > limit;
    s.limit = limit;
    s.drift = d;
    return s;
}

double DetectorConfig::resolve_drift(const Phase1Reference& ref) const {
    if (std::isnan(drift)) return ref.ptilde_mean + allowance * ref.ptilde_sd;
    return drift;
}

double DetectorConfig::resolve_limit(const Phase1Reference& ref) const { return limit_multiplier * ref.ptilde_sd; }

void DetectorConfig::validate() const {
    if (!(limit_multiplier > 0.0)) throw ConfigError("limit multiplier must be positive");
    if (!std::isnan(drift) && !std::isfinite(drift)) throw ConfigError("drift must be finite");
    if (!std::isfinite(allowance)) throw ConfigError("allowance must be finite");
}

Mat statistics_from_fits(const Vec& y, const Dims& d, const std::vector<SsrFit>& fits) {
    const Index p = d.slice();
    Mat stats(static_cast<Index>(fits.size()), d.n3);
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const SsrFit& f = fits[k];
        if (f.h_hat.size() != d.size() || f.mu_hat.size() != d.size())
            throw ShapeError("fit " + std::to_string(k) + " does not match the data dims");
        for (Index t = 0; t < d.n3; ++t) {
            Vec r = y.segment(t * p, p) - f.mu_hat.segment(t * p, p);
            stats(static_cast<Index>(k), t) = test_statistic_up(f.h_hat.segment(t * p, p), r);
        }
    }
    return stats;
}

GridStatistics grid_statistics(const SsrProblem& problem, const LambdaGrid& grid, const FistaConfig& cfg) {
    GridStatistics g;
    g.fits = fit_grid(problem, grid, cfg);
    g.stats = statistics_from_fits(problem.y, problem.design->dims(), g.fits);
    return g;
}

MonitorResult run_cusum(const Mat& stats, const LambdaGrid& grid, const Phase1Reference& ref,
                        const DetectorConfig& cfg, Index t_begin) {
    cfg.validate();
    ref.validate(grid.size());
    if (static_cast<std::size_t>(stats.rows()) != grid.size())
        throw ShapeError("statistics rows do not match the grid size");
    MonitorResult res;
    res.drift = cfg.resolve_drift(ref);
    res.limit = cfg.resolve_limit(ref);
    MonitorState st;
    st.t = t_begin - 1;
    for (Index t = t_begin; t < stats.cols(); ++t) {
        Selection sel = standardize_and_select(stats.col(t), ref);
        st = cusum_step(st, sel.p_tilde, res.drift, res.limit);
        st.pair_index = sel.index;
        st.lambda1 = grid.pairs[sel.index].first;
        st.lambda2 = grid.pairs[sel.index].second;
        if (st.alarmed && !res.first_alarm) res.first_alarm = t;
        res.states.push_back(st);
    }
    return res;
}

MonitorResult monitor(const SsrProblem& problem, const LambdaGrid& grid, const Phase1Reference& ref,
                      const DetectorConfig& det, const FistaConfig& fista) {
    GridStatistics g = grid_statistics(problem, grid, fista);
    return run_cusum(g.stats, grid, ref, det);
}

HotspotReport localize(const SsrFit& fit, Index t_star, const Dims& d) {
    if (t_star < 0 || t_star >= d.n3) throw ShapeError("localize: time index out of range");
    if (fit.h_hat.size() != d.size()) throw ShapeError("localize: fit does not match dims");
    HotspotReport rep;
    rep.t = t_star;
    for (Index j = 0; j < d.n2; ++j)
        for (Index i = 0; i < d.n1; ++i) {
            double v = fit.h_hat[flat_index(d, i, j, t_star)];
            if (v > 0.0) rep.entries.push_back({i, j, v});
        }
    return rep;
}

}  // namespace ssr
