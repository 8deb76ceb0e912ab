// Experiment orchestration: validated configuration, time-grid construction,
// disorder-averaged squeezing traces for both solver backends, sweeps over a
// control parameter, and the file outputs shared by the command-line tool and
// the acceptance suite.

#ifndef GSQ_EXPERIMENT_HPP
#define GSQ_EXPERIMENT_HPP

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/analysis.hpp"
#include "gsq/dtwa.hpp"
#include "gsq/graph.hpp"
#include "gsq/percolation.hpp"
#include "gsq/spectral.hpp"
#include "gsq/spinwave.hpp"
#include "gsq/trace.hpp"

namespace gsq {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Method { rotor_sw, dtwa, both };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::rotor_sw: return "rotor_sw";
        case Method::dtwa: return "dtwa";
        case Method::both: return "both";
    }
    return "?";
}

struct TGridSpec {
    bool automatic = true; // t_max from 4x the rotor optimum estimate
    double t_min = 0.0;    // used when not automatic
    double t_max = 0.0;
    int points = 200;
};

struct SweepSpec {
    std::string control; // delta | dilution_p | bond_C
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string id = "experiment";
    Geometry geometry = Geometry::ring1d;
    GraphParams params;
    double delta = 0.0;
    double spin_s = 0.5;
    std::vector<int> sizes;
    Method method = Method::dtwa;
    int n_samples = 500;
    int n_disorder = 50; // rotor/SW disorder realizations
    TGridSpec t_grid;
    std::optional<SweepSpec> sweep;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
};

struct ConfigError {
    std::string path;
    std::string message;
};

struct ParsedConfig {
    ExperimentConfig config;
    std::vector<ConfigError> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

namespace experiment_detail {

inline bool is_square(int n) {
    int l = graph_detail::int_sqrt(n);
    return l * l == n;
}

} // namespace experiment_detail

// Parse and fully validate a configuration document, reporting every error
// (not just the first) with its field path.
inline ParsedConfig parse_config_json(const nlohmann::json& j) {
    ParsedConfig out;
    auto err = [&](const std::string& path, const std::string& msg) { out.errors.push_back({path, msg}); };

    static const std::vector<std::string> known{
        "id",      "geometry",  "alpha",       "dimension", "dilution_p", "bond_C",
        "kappa_scale", "apply_kac", "delta",   "spin_s",    "sizes",      "method",
        "n_samples",   "n_disorder", "t_grid", "sweep",     "output_dir", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            err(it.key(), "unknown key");

    ExperimentConfig& c = out.config;
    try {
        if (j.contains("id")) c.id = j.at("id").get<std::string>();
        if (j.contains("geometry")) {
            auto g = geometry_from_name(j.at("geometry").get<std::string>());
            if (!g)
                err("geometry", "unknown geometry '" + j.at("geometry").get<std::string>() +
                                    "' (ring1d, triangular2d, pw2, correlated_bond)");
            else
                c.geometry = *g;
        } else {
            err("geometry", "required");
        }
        if (j.contains("alpha")) c.params.alpha = j.at("alpha").get<double>();
        if (j.contains("dimension")) c.params.dimension = j.at("dimension").get<int>();
        c.params.dimension = c.geometry == Geometry::triangular2d ? 2 : c.params.dimension;
        if (j.contains("dilution_p")) c.params.dilution_p = j.at("dilution_p").get<double>();
        if (j.contains("bond_C")) c.params.bond_C = j.at("bond_C").get<double>();
        if (j.contains("kappa_scale")) c.params.kappa_scale = j.at("kappa_scale").get<double>();
        if (j.contains("apply_kac")) c.params.apply_kac = j.at("apply_kac").get<bool>();
        if (j.contains("delta")) c.delta = j.at("delta").get<double>();
        if (j.contains("spin_s")) c.spin_s = j.at("spin_s").get<double>();
        if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<int>>();
        if (j.contains("method")) {
            std::string m = j.at("method").get<std::string>();
            if (m == "rotor_sw")
                c.method = Method::rotor_sw;
            else if (m == "dtwa")
                c.method = Method::dtwa;
            else if (m == "both")
                c.method = Method::both;
            else
                err("method", "must be rotor_sw, dtwa or both");
        }
        if (j.contains("n_samples")) c.n_samples = j.at("n_samples").get<int>();
        if (j.contains("n_disorder")) c.n_disorder = j.at("n_disorder").get<int>();
        if (j.contains("t_grid")) {
            const auto& tg = j.at("t_grid");
            if (tg.is_string() && tg.get<std::string>() == "auto") {
                c.t_grid.automatic = true;
            } else if (tg.is_object()) {
                c.t_grid.automatic = false;
                c.t_grid.t_min = tg.value("t_min", 0.0);
                c.t_grid.t_max = tg.value("t_max", 0.0);
                c.t_grid.points = tg.value("points", 200);
                if (tg.contains("auto")) c.t_grid.automatic = tg.at("auto").get<bool>();
                for (auto it = tg.begin(); it != tg.end(); ++it)
                    if (it.key() != "t_min" && it.key() != "t_max" && it.key() != "points" &&
                        it.key() != "auto")
                        err("t_grid." + it.key(), "unknown key");
            } else {
                err("t_grid", "must be \"auto\" or an object {t_min, t_max, points}");
            }
        }
        if (j.contains("sweep")) {
            SweepSpec s;
            const auto& sw = j.at("sweep");
            s.control = sw.value("control", "");
            if (s.control != "delta" && s.control != "dilution_p" && s.control != "bond_C")
                err("sweep.control", "must be delta, dilution_p or bond_C");
            if (sw.contains("values")) s.values = sw.at("values").get<std::vector<double>>();
            if (s.values.empty()) err("sweep.values", "required, non-empty");
            std::vector<double> dedup;
            for (double v : s.values)
                if (std::find(dedup.begin(), dedup.end(), v) == dedup.end())
                    dedup.push_back(v);
                else
                    out.warnings.push_back("sweep.values: duplicate value " + std::to_string(v) +
                                           " removed");
            s.values = dedup;
            c.sweep = s;
        }
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        err("(document)", e.what());
        return out;
    }

    // semantic checks
    if (c.delta <= -1.0 || c.delta > 1.0)
        err("delta", "anisotropy restricted to (-1, 1]");
    if (c.spin_s <= 0.0) err("spin_s", "must be positive");
    if (c.sizes.empty()) err("sizes", "required, non-empty");
    for (int n : c.sizes) {
        if (n < 2) err("sizes", "size " + std::to_string(n) + " too small");
        if (c.geometry == Geometry::pw2 && !graph_detail::is_power_of_two(n))
            err("sizes", "pw2 requires powers of two, got " + std::to_string(n));
        if (c.geometry == Geometry::triangular2d && !experiment_detail::is_square(n))
            err("sizes", "triangular2d requires n = L^2, got " + std::to_string(n));
    }
    if (c.params.dilution_p < 0.0 || c.params.dilution_p >= 1.0)
        err("dilution_p", "must be in [0, 1)");
    if (c.geometry == Geometry::correlated_bond) {
        if (c.params.bond_C <= 0.0 || c.params.bond_C > 1.0) err("bond_C", "must be in (0, 1]");
        if (c.params.alpha <= 0.0) err("alpha", "correlated_bond requires alpha > 0");
    }
    if (c.n_samples < 2) err("n_samples", "need at least 2");
    if (c.n_disorder < 1) err("n_disorder", "need at least 1");
    if (!c.t_grid.automatic) {
        if (c.t_grid.t_min <= 0 || c.t_grid.t_max <= c.t_grid.t_min)
            err("t_grid", "need 0 < t_min < t_max");
        if (c.t_grid.points < 2) err("t_grid.points", "need >= 2 points");
    }
    if (c.sweep) {
        for (double v : c.sweep->values) {
            if (c.sweep->control == "delta" && (v <= -1.0 || v > 1.0))
                err("sweep.values", "delta value " + std::to_string(v) + " outside (-1, 1]");
            if (c.sweep->control == "dilution_p" && (v < 0.0 || v >= 1.0))
                err("sweep.values", "dilution_p value " + std::to_string(v) + " outside [0, 1)");
            if (c.sweep->control == "bond_C" && (v <= 0.0 || v > 1.0))
                err("sweep.values", "bond_C value " + std::to_string(v) + " outside (0, 1]");
        }
    }
    return out;
}

inline ParsedConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    ParsedConfig out;
    if (!f) {
        out.errors.push_back({"(file)", "cannot open " + path});
        return out;
    }
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        out.errors.push_back({"(file)", std::string("parse error: ") + e.what()});
        return out;
    }
    return parse_config_json(j);
}

inline nlohmann::json serialize_config(const ExperimentConfig& c) {
    nlohmann::json j;
    j["id"] = c.id;
    j["geometry"] = geometry_name(c.geometry);
    j["alpha"] = c.params.alpha;
    j["dimension"] = c.params.dimension;
    j["dilution_p"] = c.params.dilution_p;
    j["bond_C"] = c.params.bond_C;
    j["kappa_scale"] = c.params.kappa_scale;
    j["apply_kac"] = c.params.apply_kac;
    j["delta"] = c.delta;
    j["spin_s"] = c.spin_s;
    j["sizes"] = c.sizes;
    j["method"] = method_name(c.method);
    j["n_samples"] = c.n_samples;
    j["n_disorder"] = c.n_disorder;
    if (c.t_grid.automatic) {
        j["t_grid"] = "auto";
    } else {
        j["t_grid"] = {{"t_min", c.t_grid.t_min}, {"t_max", c.t_grid.t_max}, {"points", c.t_grid.points}};
    }
    if (c.sweep) j["sweep"] = {{"control", c.sweep->control}, {"values", c.sweep->values}};
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j;
}

// FNV-1a over the canonical (sorted-key) serialization.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    std::string s = serialize_config(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Atomic file write: write to a temporary then rename into place.
inline void atomic_write(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("atomic_write: cannot open " + tmp);
        f << contents;
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Trace runners

inline GraphParams params_with(const GraphParams& base, const std::string& control, double value) {
    GraphParams p = base;
    if (control == "dilution_p") p.dilution_p = value;
    if (control == "bond_C") p.bond_C = value;
    return p;
}

// Estimated optimal-squeezing time of the pure rotor at size n, used to pick
// automatic time grids (t_max = 4x the estimate).
inline double rotor_tmin_estimate(const Graph& g, double delta, double spin_s) {
    SWConfig cfg;
    cfg.delta = delta;
    cfg.spin_s = spin_s;
    Graph giant = giant_component(g);
    double chi = rotor_frequency(giant, cfg);
    const int n = giant.n_active();
    double t_hi = 0.5 * M_PI / chi, best = 1e300, best_t = t_hi;
    for (int i = 1; i <= 3000; ++i) {
        double t = t_hi * i / 3000.0;
        auto rm = rotor_oat_moments(n, chi, t, spin_s);
        if (rm.kx <= 0) break;
        double xi2 = 2.0 * spin_s * n * rm.var_min / (rm.kx * rm.kx);
        if (xi2 < best) {
            best = xi2;
            best_t = t;
        }
    }
    return best_t;
}

inline std::vector<double> make_time_grid(const ExperimentConfig& cfg, int n, double delta) {
    if (!cfg.t_grid.automatic)
        return log_time_grid(cfg.t_grid.t_min, cfg.t_grid.t_max, cfg.t_grid.points);
    Graph probe = build_graph(cfg.geometry, cfg.params, n, sample_seed(cfg.seed, 0));
    double t_opt = rotor_tmin_estimate(probe, delta, cfg.spin_s);
    double t_max = 4.0 * t_opt;
    return log_time_grid(t_max / 2000.0, t_max, cfg.t_grid.points);
}

// Disorder-averaged rotor/spin-wave trace: xi^2 averaged pointwise over
// realizations, with the breakdown flag set once half of the realizations
// have broken down.
inline SqueezeTrace rotor_sw_trace(Geometry geom, const GraphParams& params, int n, double delta,
                                   double spin_s, const std::vector<double>& times, int n_disorder,
                                   std::uint64_t seed, int dense_cap = kDefaultDenseCap) {
    SWConfig cfg;
    cfg.delta = delta;
    cfg.spin_s = spin_s;
    const bool disordered = dtwa_detail::family_is_disordered(geom, params);
    const int reps = disordered ? n_disorder : 1;

    const std::size_t nt = times.size();
    std::vector<double> sum(nt, 0.0), sum2(nt, 0.0), sx_sum(nt, 0.0), vm_sum(nt, 0.0);
    std::vector<int> alive(nt, 0);

    for (int r = 0; r < reps; ++r) {
        Graph g = build_graph(geom, params, n, sample_seed(seed, static_cast<std::uint64_t>(r)));
        Graph giant = giant_component(g);
        auto tr = xi2_rotor_sw(giant, cfg, times, dense_cap);
        for (std::size_t i = 0; i < nt; ++i) {
            if (tr.broken_at(i)) break;
            sum[i] += tr.xi2[i];
            sum2[i] += tr.xi2[i] * tr.xi2[i];
            sx_sum[i] += tr.sx[i];
            vm_sum[i] += tr.var_min[i];
            alive[i] += 1;
        }
    }

    SqueezeTrace out;
    out.times = times;
    out.n_samples = reps;
    out.xi2.assign(nt, std::numeric_limits<double>::quiet_NaN());
    out.xi2_err.assign(nt, 0.0);
    out.sx.assign(nt, 0.0);
    out.var_min.assign(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        if (alive[i] * 2 <= reps) { // half or more broke down
            out.breakdown_index = static_cast<int>(i);
            break;
        }
        double k = static_cast<double>(alive[i]);
        out.xi2[i] = sum[i] / k;
        out.sx[i] = sx_sum[i] / k;
        out.var_min[i] = vm_sum[i] / k;
        if (alive[i] > 1) {
            double var = (sum2[i] - sum[i] * sum[i] / k) / (k - 1.0);
            out.xi2_err[i] = std::sqrt(std::max(0.0, var) / k);
        }
    }
    // record the realized mean giant size
    out.n_sites = n;
    return out;
}

inline SqueezeTrace dtwa_trace(Geometry geom, const GraphParams& params, int n, double delta,
                               double spin_s, const std::vector<double>& times, int n_samples,
                               std::uint64_t seed, const IntegrateOptions& integ = {}, int n_threads = 0) {
    EnsembleConfig ec;
    ec.geometry = geom;
    ec.params = params;
    ec.n = n;
    ec.delta = delta;
    ec.spin_s = spin_s;
    ec.n_samples = n_samples;
    ec.t_grid = times;
    ec.seed = seed;
    ec.integrate = integ;
    ec.n_threads = n_threads;
    return run_ensemble(ec);
}

// ---------------------------------------------------------------------------
// Sweep driver

struct SweepPointResult {
    double control = 0.0;
    int size = 0;
    TraceMinimum minimum;
    std::string error; // empty on success
};

struct SweepResult {
    std::vector<SweepPointResult> points;
    std::map<double, Scalability> classification; // per control value
    bool any_failed = false;
};

// Run traces for every (control value, size), locate minima and classify each
// control value across sizes. Failures abort only the affected point.
inline SweepResult run_sweep(const ExperimentConfig& cfg,
                             const std::function<void(const std::string&)>& log = nullptr) {
    if (!cfg.sweep) throw std::invalid_argument("run_sweep: config has no sweep section");
    SweepResult out;
    for (double value : cfg.sweep->values) {
        double delta = cfg.sweep->control == "delta" ? value : cfg.delta;
        GraphParams params = params_with(cfg.params, cfg.sweep->control, value);
        std::map<int, TraceMinimum> minima;
        bool point_ok = true;
        for (int n : cfg.sizes) {
            SweepPointResult pr;
            pr.control = value;
            pr.size = n;
            try {
                auto times = make_time_grid(cfg, n, delta);
                std::uint64_t pseed = point_seed(cfg.seed, value, static_cast<std::uint64_t>(n));
                SqueezeTrace tr;
                if (cfg.method == Method::rotor_sw)
                    tr = rotor_sw_trace(cfg.geometry, params, n, delta, cfg.spin_s, times, cfg.n_disorder,
                                        pseed);
                else
                    tr = dtwa_trace(cfg.geometry, params, n, delta, cfg.spin_s, times, cfg.n_samples,
                                    pseed);
                double deg = build_graph(cfg.geometry, params, n, sample_seed(pseed, 0)).average_degree();
                pr.minimum = find_trace_minimum(tr, deg > 0 ? 1.0 / deg : 0.0);
                if (!pr.minimum.valid) {
                    pr.error = "no interior minimum";
                    point_ok = false;
                } else {
                    minima[n] = pr.minimum;
                }
            } catch (const std::exception& e) {
                pr.error = e.what();
                point_ok = false;
                out.any_failed = true;
            }
            if (log)
                log("sweep " + cfg.sweep->control + "=" + std::to_string(value) + " N=" +
                    std::to_string(n) + (pr.error.empty() ? " ok" : " FAILED: " + pr.error));
            out.points.push_back(std::move(pr));
        }
        if (point_ok && static_cast<int>(minima.size()) == static_cast<int>(cfg.sizes.size())) {
            try {
                out.classification[value] = classify_scalability(minima);
            } catch (const std::exception&) {
                out.classification[value] = Scalability::undecided;
            }
        } else {
            out.classification[value] = Scalability::undecided;
        }
    }
    return out;
}

} // namespace gsq

#endif
