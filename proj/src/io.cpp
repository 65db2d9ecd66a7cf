#include "ssr/io.hpp"

#include "ssr/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace ssr {

using nlohmann::ordered_json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw ParseError(what + ": empty number");
    const char* first = s.data() + b;
    const char* last = s.data() + e + 1;
    if (*first == '+') ++first;
    double v = 0.0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw ParseError(what + ": '" + s.substr(b, e - b + 1) + "' is not a number");
    return v;
}

namespace {

std::vector<std::string> split_csv(const std::string& line, bool& ok) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    ok = true;
    for (std::size_t k = 0; k < line.size(); ++k) {
        char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    cur += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) ok = false;
    out.push_back(cur);
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_number(const std::string& s) {
    try {
        double v = parse_double(s, "");
        return std::isfinite(v);
    } catch (const ParseError&) {
        return false;
    }
}

std::string loc(const std::string& name, long line) { return name + ":" + std::to_string(line) + ": "; }

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    return f;
}

}  // namespace

PanelDataset parse_panel(std::istream& in, const std::string& name) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError(name + ": empty file", name, 0);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) line.erase(0, 3);
    bool ok;
    auto header = split_csv(line, ok);
    for (auto& h : header) h = strip(h);
    if (!ok || header != std::vector<std::string>{"unit", "category", "time", "value"})
        throw ParseError(loc(name, 1) + "header must be 'unit,category,time,value'", name, 1);

    struct Row {
        std::string u, c, t;
        double v;
        long line;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        auto f = split_csv(line, ok);
        if (!ok || f.size() != 4)
            throw ParseError(loc(name, lineno) + "malformed row, expected 4 fields", name, lineno);
        for (auto& x : f) x = strip(x);
        if (f[0].empty() || f[1].empty() || f[2].empty())
            throw ParseError(loc(name, lineno) + "empty label", name, lineno);
        double v;
        try {
            v = parse_double(f[3], "value");
        } catch (const ParseError& e) {
            throw ParseError(loc(name, lineno) + e.what(), name, lineno);
        }
        if (!std::isfinite(v)) throw ParseError(loc(name, lineno) + "value is not finite", name, lineno);
        rows.push_back({f[0], f[1], f[2], v, lineno});
    }
    if (rows.empty()) throw ParseError(name + ": no data rows", name, lineno);

    std::vector<std::string> units, cats, times;
    for (auto& r : rows) {
        units.push_back(r.u);
        cats.push_back(r.c);
        times.push_back(r.t);
    }
    auto uniq = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(units);
    uniq(cats);
    uniq(times);
    if (std::all_of(times.begin(), times.end(), is_number)) {
        std::stable_sort(times.begin(), times.end(), [](const std::string& a, const std::string& b) {
            return parse_double(a, "time") < parse_double(b, "time");
        });
        for (std::size_t k = 1; k < times.size(); ++k)
            if (parse_double(times[k], "time") == parse_double(times[k - 1], "time"))
                throw ParseError(name + ": time labels '" + times[k - 1] + "' and '" + times[k] +
                                     "' denote the same time",
                                 name, 0);
    }
    auto index_of = [](const std::vector<std::string>& v) {
        std::map<std::string, Index> m;
        for (std::size_t k = 0; k < v.size(); ++k) m[v[k]] = static_cast<Index>(k);
        return m;
    };
    auto ui = index_of(units), ci = index_of(cats), ti = index_of(times);

    Dims d{static_cast<Index>(units.size()), static_cast<Index>(cats.size()), static_cast<Index>(times.size())};
    PanelDataset ds{units, cats, times, Tensor3(d)};
    std::vector<long> seen(d.size(), 0);
    for (auto& r : rows) {
        Index f = flat_index(d, ui[r.u], ci[r.c], ti[r.t]);
        if (seen[f])
            throw ParseError(loc(name, r.line) + "duplicate cell (" + r.u + ", " + r.c + ", " + r.t +
                                 "), first seen on line " + std::to_string(seen[f]),
                             name, r.line);
        seen[f] = r.line;
        ds.values.data()[f] = r.v;
    }
    std::vector<std::string> gaps;
    for (Index t = 0; t < d.n3; ++t)
        for (Index j = 0; j < d.n2; ++j)
            for (Index i = 0; i < d.n1; ++i)
                if (!seen[flat_index(d, i, j, t)]) gaps.push_back("(" + units[i] + ", " + cats[j] + ", " + times[t] + ")");
    if (!gaps.empty()) {
        std::string msg = name + ": " + std::to_string(gaps.size()) + " missing cell(s):";
        for (auto& g : gaps) msg += " " + g;
        throw ParseError(msg, name, 0);
    }
    return ds;
}

PanelDataset ingest_panel(const std::string& path) {
    auto f = open_in(path);
    return parse_panel(f, path);
}

void write_panel(const PanelDataset& ds, std::ostream& out) {
    const Dims& d = ds.values.dims();
    out << "unit,category,time,value\n";
    for (Index t = 0; t < d.n3; ++t)
        for (Index j = 0; j < d.n2; ++j)
            for (Index i = 0; i < d.n1; ++i)
                out << csv_field(ds.units[i]) << ',' << csv_field(ds.categories[j]) << ',' << csv_field(ds.times[t])
                    << ',' << format_double(ds.values(i, j, t)) << '\n';
}

void write_panel(const PanelDataset& ds, const std::string& path) {
    std::ostringstream ss;
    write_panel(ds, ss);
    write_text_file(path, ss.str());
}

Mat parse_distance(std::istream& in, const std::string& name) {
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        bool ok;
        auto f = split_csv(line, ok);
        std::vector<double> row;
        for (std::size_t k = 0; k < f.size(); ++k) {
            try {
                row.push_back(parse_double(f[k], "column " + std::to_string(k + 1)));
            } catch (const ParseError& e) {
                throw ParseError(loc(name, lineno) + e.what(), name, lineno);
            }
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw ParseError(loc(name, lineno) + "row has " + std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(rows[0].size()),
                             name, lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(name + ": empty distance matrix", name, 0);
    if (rows.size() != rows[0].size())
        throw ParseError(name + ": distance matrix is " + std::to_string(rows.size()) + "x" +
                             std::to_string(rows[0].size()) + ", must be square",
                         name, 0);
    Mat m(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    return m;
}

Mat read_distance_csv(const std::string& path) {
    auto f = open_in(path);
    return parse_distance(f, path);
}

namespace {

std::vector<double> parse_axis(const std::string& axis) {
    std::string a = strip(axis);
    if (a.empty()) throw ParseError("grid axis is empty");
    std::vector<double> vals;
    if (a.find('|') != std::string::npos || a.find(':') == std::string::npos) {
        std::size_t start = 0;
        while (true) {
            std::size_t bar = a.find('|', start);
            vals.push_back(parse_double(a.substr(start, bar - start), "grid value"));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        return vals;
    }
    bool geometric = false;
    if (a.rfind("log:", 0) == 0) {
        geometric = true;
        a = a.substr(4);
    }
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t c = a.find(':', start);
        parts.push_back(a.substr(start, c - start));
        if (c == std::string::npos) break;
        start = c + 1;
    }
    if (parts.size() != 3) throw ParseError("grid axis '" + axis + "' must look like a:b:n");
    double lo = parse_double(parts[0], "grid start");
    double hi = parse_double(parts[1], "grid end");
    double nd = parse_double(parts[2], "grid count");
    if (nd < 1 || nd != std::floor(nd)) throw ParseError("grid count must be a positive integer in '" + axis + "'");
    int n = static_cast<int>(nd);
    if (geometric && !(lo > 0 && hi > 0)) throw ParseError("log grid needs positive endpoints in '" + axis + "'");
    for (int k = 0; k < n; ++k) {
        double f = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        vals.push_back(geometric ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return vals;
}

}  // namespace

LambdaGrid parse_grid_spec(const std::string& spec) {
    std::size_t comma = spec.find(',');
    if (comma == std::string::npos || spec.find(',', comma + 1) != std::string::npos)
        throw ParseError("grid spec '" + spec + "' must have exactly two comma-separated axes");
    LambdaGrid g = LambdaGrid::product(parse_axis(spec.substr(0, comma)), parse_axis(spec.substr(comma + 1)));
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw ParseError(std::string("grid spec: ") + e.what());
    }
    return g;
}

std::string format_grid_spec(const LambdaGrid& grid) {
    std::vector<double> l1, l2;
    for (auto& [a, b] : grid.pairs) {
        if (std::find(l1.begin(), l1.end(), a) == l1.end()) l1.push_back(a);
        if (std::find(l2.begin(), l2.end(), b) == l2.end()) l2.push_back(b);
    }
    auto join = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "|" : "") + format_double(v[k]);
        return s;
    };
    return join(l1) + "," + join(l2);
}

ExperimentConfig RunConfig::experiment() const {
    ExperimentConfig e;
    e.sim.n1 = n1;
    e.sim.n2 = n2;
    e.sim.T = T;
    e.sim.tau = tau;
    e.sim.delta = delta;
    e.sim.scenario = scenario == 2 ? Scenario::Decreasing : Scenario::Stationary;
    e.sim.noise_sd = noise_sd;
    e.sim.seed = seed;
    e.grid = grid;
    e.detector = detector;
    e.fista = fista;
    e.bandwidth = std::isnan(bandwidth) ? 8.0 : bandwidth;
    e.rank_tol = rank_tol;
    e.reps = reps;
    e.phase1_reps = phase1_reps;
    return e;
}

namespace {

long parse_int(const std::string& v, const std::string& key) {
    double d = parse_double(v, key);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw ParseError(key + ": '" + v + "' is not an integer");
    return static_cast<long>(d);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ParseError(key + ": '" + v + "' is not a boolean");
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ParseError(msg);
}

}  // namespace

void apply_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = strip(raw);
    if (key == "grid") {
        c.grid = parse_grid_spec(v);
    } else if (key == "bandwidth") {
        c.bandwidth = parse_double(v, key);
        require(c.bandwidth > 0 && std::isfinite(c.bandwidth), "bandwidth must be positive");
    } else if (key == "rank_tol") {
        c.rank_tol = parse_double(v, key);
        require(c.rank_tol >= 1e-10 && c.rank_tol < 1, "rank_tol must lie in [1e-10, 1)");
    } else if (key == "phase1_window") {
        c.phase1_window = parse_int(v, key);
        require(c.phase1_window >= 2, "phase1_window must be at least 2");
    } else if (key == "drift") {
        if (v == "auto") {
            c.detector.drift = std::numeric_limits<double>::quiet_NaN();
        } else {
            c.detector.drift = parse_double(v, key);
            require(std::isfinite(c.detector.drift), "drift must be finite or 'auto'");
        }
    } else if (key == "allowance") {
        c.detector.allowance = parse_double(v, key);
        require(std::isfinite(c.detector.allowance), "allowance must be finite");
    } else if (key == "limit_multiplier" || key == "limit-mult") {
        c.detector.limit_multiplier = parse_double(v, key);
        require(c.detector.limit_multiplier > 0, "limit_multiplier must be positive");
    } else if (key == "max_iter") {
        c.fista.max_iter = static_cast<int>(parse_int(v, key));
        require(c.fista.max_iter >= 1, "max_iter must be at least 1");
    } else if (key == "tol") {
        c.fista.tol = parse_double(v, key);
        require(c.fista.tol > 0, "tol must be positive");
    } else if (key == "restart") {
        c.fista.restart = parse_bool(v, key);
    } else if (key == "panel") {
        c.panel = v;
    } else if (key == "distance") {
        c.distance = v;
    } else if (key == "out") {
        require(!v.empty(), "out must not be empty");
        c.out = v;
    } else if (key == "scenario") {
        long s = parse_int(v, key);
        require(s == 1 || s == 2, "scenario must be 1 or 2");
        c.scenario = static_cast<int>(s);
    } else if (key == "delta") {
        c.delta = parse_double(v, key);
        require(c.delta >= 0 && std::isfinite(c.delta), "delta must be nonnegative");
    } else if (key == "tau") {
        c.tau = parse_int(v, key);
        require(c.tau >= 1, "tau must be at least 1");
    } else if (key == "reps") {
        c.reps = static_cast<int>(parse_int(v, key));
        require(c.reps >= 1, "reps must be at least 1");
    } else if (key == "phase1_reps") {
        c.phase1_reps = static_cast<int>(parse_int(v, key));
        require(c.phase1_reps >= 1, "phase1_reps must be at least 1");
    } else if (key == "seed") {
        long s = parse_int(v, key);
        require(s >= 0, "seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "n1" || key == "n2" || key == "T") {
        long n = parse_int(v, key);
        require(n >= (key == "T" ? 2 : 1), key + " is too small");
        (key == "n1" ? c.n1 : key == "n2" ? c.n2 : c.T) = n;
    } else if (key == "noise_sd") {
        c.noise_sd = parse_double(v, key);
        require(c.noise_sd >= 0, "noise_sd must be nonnegative");
    } else {
        throw ParseError("unknown key '" + key + "'");
    }
}

void apply_config(RunConfig& cfg, std::istream& in, const std::string& name) {
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (strip(line).empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(loc(name, lineno) + "expected 'key = value'", name, lineno);
        std::string key = strip(line.substr(0, eq));
        try {
            apply_config_value(cfg, key, line.substr(eq + 1));
        } catch (const ParseError& e) {
            throw ParseError(loc(name, lineno) + e.what(), name, lineno);
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    auto f = open_in(path);
    apply_config(cfg, f, path);
}

void write_fit_csv(const std::vector<SsrFit>& fits, const PanelDataset& ds, std::ostream& out) {
    const Dims& d = ds.values.dims();
    out << "schema_version,pair,lambda1,lambda2,unit,category,time,theta_m,theta_h,mu_hat,h_hat,residual\n";
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const SsrFit& f = fits[k];
        std::string head = std::to_string(kSchemaVersion) + "," + std::to_string(k) + "," + format_double(f.lambda1) +
                           "," + format_double(f.lambda2) + ",";
        for (Index t = 0; t < d.n3; ++t)
            for (Index j = 0; j < d.n2; ++j)
                for (Index i = 0; i < d.n1; ++i) {
                    Index q = flat_index(d, i, j, t);
                    out << head << csv_field(ds.units[i]) << ',' << csv_field(ds.categories[j]) << ','
                        << csv_field(ds.times[t]) << ',' << format_double(f.theta_m[q]) << ','
                        << format_double(f.theta_h[q]) << ',' << format_double(f.mu_hat[q]) << ','
                        << format_double(f.h_hat[q]) << ',' << format_double(f.residual[q]) << '\n';
                }
    }
}

std::vector<SsrFit> read_fit_csv(std::istream& in, const PanelDataset& ds, const LambdaGrid& grid,
                                 const std::string& name) {
    const Dims& d = ds.values.dims();
    std::vector<SsrFit> fits(grid.size());
    for (std::size_t k = 0; k < fits.size(); ++k) {
        fits[k].lambda1 = grid.pairs[k].first;
        fits[k].lambda2 = grid.pairs[k].second;
        for (Vec* v : {&fits[k].theta_m, &fits[k].theta_h, &fits[k].mu_hat, &fits[k].h_hat, &fits[k].residual})
            *v = Vec::Constant(d.size(), std::numeric_limits<double>::quiet_NaN());
    }
    std::map<std::string, Index> ui, ci, ti;
    for (Index k = 0; k < d.n1; ++k) ui[ds.units[k]] = k;
    for (Index k = 0; k < d.n2; ++k) ci[ds.categories[k]] = k;
    for (Index k = 0; k < d.n3; ++k) ti[ds.times[k]] = k;

    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError(name + ": empty fit file", name, 0);
    ++lineno;
    if (line.rfind("schema_version,pair,", 0) != 0) throw ParseError(loc(name, 1) + "not a fit file", name, 1);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        bool ok;
        auto f = split_csv(line, ok);
        if (!ok || f.size() != 12) throw ParseError(loc(name, lineno) + "malformed fit row", name, lineno);
        try {
            if (parse_int(f[0], "schema_version") != kSchemaVersion)
                throw ParseError("unsupported schema_version " + f[0]);
            long k = parse_int(f[1], "pair");
            if (k < 0 || static_cast<std::size_t>(k) >= grid.size()) throw ParseError("pair index out of range");
            SsrFit& fit = fits[k];
            if (parse_double(f[2], "lambda1") != fit.lambda1 || parse_double(f[3], "lambda2") != fit.lambda2)
                throw ParseError("lambda values do not match the grid");
            auto iu = ui.find(f[4]), ic = ci.find(f[5]), it = ti.find(f[6]);
            if (iu == ui.end() || ic == ci.end() || it == ti.end()) throw ParseError("unknown label");
            Index q = flat_index(d, iu->second, ic->second, it->second);
            fit.theta_m[q] = parse_double(f[7], "theta_m");
            fit.theta_h[q] = parse_double(f[8], "theta_h");
            fit.mu_hat[q] = parse_double(f[9], "mu_hat");
            fit.h_hat[q] = parse_double(f[10], "h_hat");
            fit.residual[q] = parse_double(f[11], "residual");
            ++rows;
        } catch (const ParseError& e) {
            throw ParseError(loc(name, lineno) + e.what(), name, lineno);
        }
    }
    if (rows != grid.size() * static_cast<std::size_t>(d.size()))
        throw ParseError(name + ": expected " + std::to_string(grid.size() * d.size()) + " rows, found " +
                             std::to_string(rows),
                         name, 0);
    for (auto& f : fits)
        if (!f.h_hat.allFinite() || !f.mu_hat.allFinite()) throw ParseError(name + ": fit file has missing cells", name, 0);
    return fits;
}

void write_monitor_csv(const MonitorResult& res, const Mat& stats, const Phase1Reference& ref,
                       const LambdaGrid& grid, const PanelDataset& ds, Index phase1_window, std::ostream& out) {
    out << "schema_version,t,time_label,phase,p_tilde,lambda1,lambda2,w,alarm\n";
    for (Index t = 0; t < phase1_window && t < stats.cols(); ++t) {
        Selection sel = standardize_and_select(stats.col(t), ref);
        out << kSchemaVersion << ',' << t + 1 << ',' << csv_field(ds.times[t]) << ",phase1,"
            << format_double(sel.p_tilde) << ',' << format_double(grid.pairs[sel.index].first) << ','
            << format_double(grid.pairs[sel.index].second) << ",,0\n";
    }
    for (auto& s : res.states)
        out << kSchemaVersion << ',' << s.t + 1 << ',' << csv_field(ds.times[s.t]) << ",monitor,"
            << format_double(s.p_tilde) << ',' << format_double(s.lambda1) << ',' << format_double(s.lambda2) << ','
            << format_double(s.w) << ',' << (s.alarmed ? 1 : 0) << '\n';
}

std::string hotspot_json(const HotspotReport& rep, const PanelDataset& ds, const MonitorState& st) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["t"] = rep.t + 1;
    j["time_label"] = ds.times[rep.t];
    j["lambda1"] = st.lambda1;
    j["lambda2"] = st.lambda2;
    j["w"] = st.w;
    j["limit"] = st.limit;
    j["entries"] = ordered_json::array();
    for (auto& e : rep.entries)
        j["entries"].push_back({{"unit", ds.units[e.i]},
                                {"category", ds.categories[e.j]},
                                {"unit_index", e.i + 1},
                                {"category_index", e.j + 1},
                                {"magnitude", e.magnitude}});
    return j.dump(2) + "\n";
}

std::string reference_json(const Phase1Reference& ref, const LambdaGrid& grid, double drift, double limit) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["samples"] = ref.samples;
    j["ptilde_mean"] = ref.ptilde_mean;
    j["ptilde_sd"] = ref.ptilde_sd;
    j["drift"] = drift;
    j["limit"] = limit;
    j["pairs"] = ordered_json::array();
    for (std::size_t k = 0; k < grid.size(); ++k)
        j["pairs"].push_back({{"lambda1", grid.pairs[k].first},
                              {"lambda2", grid.pairs[k].second},
                              {"mean", ref.mean[k]},
                              {"var", ref.var[k]}});
    if (!ref.warning.empty()) j["warning"] = ref.warning;
    return j.dump(2) + "\n";
}

std::string metrics_json(const ExperimentConfig& cfg, const ExperimentResult& res) {
    const MetricsReport& m = res.metrics;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    ordered_json c;
    c["scenario"] = cfg.sim.scenario == Scenario::Stationary ? 1 : 2;
    c["delta"] = cfg.sim.delta;
    c["tau"] = cfg.sim.tau;
    c["n1"] = cfg.sim.n1;
    c["n2"] = cfg.sim.n2;
    c["T"] = cfg.sim.T;
    c["noise_sd"] = cfg.sim.noise_sd;
    c["seed"] = cfg.sim.seed;
    c["reps"] = cfg.reps;
    c["phase1_reps"] = cfg.phase1_reps;
    c["bandwidth"] = cfg.bandwidth;
    c["rank_tol"] = cfg.rank_tol;
    c["grid"] = format_grid_spec(cfg.grid);
    c["allowance"] = cfg.detector.allowance;
    if (!std::isnan(cfg.detector.drift)) c["drift"] = cfg.detector.drift;
    c["limit_multiplier"] = cfg.detector.limit_multiplier;
    c["max_iter"] = cfg.fista.max_iter;
    c["tol"] = cfg.fista.tol;
    j["config"] = c;
    ordered_json mj;
    mj["precision"] = m.precision;
    mj["recall"] = m.recall;
    mj["f_measure_harmonic"] = m.f_measure_harmonic;
    mj["f_measure_arithmetic"] = m.f_measure_arithmetic;
    mj["arl1_mean"] = m.arl1_mean;
    mj["arl1_sd"] = m.arl1_sd;
    mj["smse_mean"] = m.smse_mean;
    mj["smse_sd"] = m.smse_sd;
    mj["replications"] = m.replications;
    mj["detected"] = m.detected;
    mj["failures"] = m.failures;
    mj["alarm_rate"] = m.alarm_rate;
    mj["early_alarm_rate"] = m.early_alarm_rate;
    j["metrics"] = mj;
    j["phase1"] = {{"samples", res.reference.samples},
                   {"ptilde_mean", res.reference.ptilde_mean},
                   {"ptilde_sd", res.reference.ptilde_sd}};
    j["mean_basis_rank"] = res.design_rank;
    return j.dump(2) + "\n";
}

void write_replications_csv(const std::vector<ReplicationRecord>& recs, std::ostream& out) {
    out << "schema_version,rep,seed,alarm_time,early_alarm,delay,precision,recall,f_harmonic,f_arithmetic,reported,"
           "lambda1,lambda2,smse,error\n";
    for (auto& r : recs)
        out << kSchemaVersion << ',' << r.rep << ',' << r.seed << ','
            << (r.alarm_time ? std::to_string(*r.alarm_time) : "") << ',' << (r.early_alarm ? 1 : 0) << ','
            << format_double(r.delay) << ',' << format_double(r.precision) << ',' << format_double(r.recall) << ','
            << format_double(r.f_harmonic) << ',' << format_double(r.f_arithmetic) << ',' << r.reported << ','
            << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ',' << format_double(r.smse) << ','
            << csv_field(r.error) << '\n';
}

std::uint64_t panel_fingerprint(const PanelDataset& ds) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t k = 0; k < n; ++k) {
            h ^= b[k];
            h *= 1099511628211ULL;
        }
    };
    const Dims& d = ds.values.dims();
    Index dims[3] = {d.n1, d.n2, d.n3};
    mix(dims, sizeof dims);
    for (auto* labels : {&ds.units, &ds.categories, &ds.times})
        for (auto& s : *labels) mix(s.data(), s.size() + 1);
    mix(ds.values.data().data(), sizeof(double) * static_cast<std::size_t>(d.size()));
    return h;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace ssr
