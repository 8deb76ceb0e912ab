// gsq command-line tool: graph construction, spectral analysis, percolation
// sweeps, squeezing dynamics and scaling fits, glued together through plain
// CSV/JSON files so pipelines compose in the shell.
//
// Exit codes: 0 success, 1 validation failure, 2 partial sweep failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gsq/analysis.hpp"
#include "gsq/dtwa.hpp"
#include "gsq/experiment.hpp"
#include "gsq/graph_io.hpp"
#include "gsq/percolation.hpp"
#include "gsq/spectral.hpp"
#include "gsq/spinwave.hpp"

using nlohmann::json;

namespace {

struct GraphOptions {
    std::string geometry = "ring1d";
    double alpha = 1.0;
    double dilution_p = 0.0;
    double bond_C = 1.0;
    double kappa_scale = 0.0;
    bool no_kac = false;
    int n = 64;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--geometry", geometry, "ring1d | triangular2d | pw2 | correlated_bond");
        cmd->add_option("--alpha", alpha, "power-law exponent");
        cmd->add_option("-p,--dilution", dilution_p, "site dilution probability");
        cmd->add_option("-C,--bond-C", bond_C, "correlated-bond amplitude");
        cmd->add_option("--kappa-scale", kappa_scale, "exponential cutoff Lambda (kappa = Lambda/N)");
        cmd->add_flag("--no-kac", no_kac, "disable Kac normalization");
        cmd->add_option("-n,--size", n, "number of nodes")->required();
        cmd->add_option("--seed", seed, "RNG seed");
    }

    gsq::Graph build() const {
        auto geom = gsq::geometry_from_name(geometry);
        if (!geom) throw CLI::ValidationError("--geometry", "unknown geometry " + geometry);
        gsq::GraphParams p;
        p.alpha = alpha;
        p.dilution_p = dilution_p;
        p.bond_C = bond_C;
        p.kappa_scale = kappa_scale;
        p.apply_kac = !no_kac;
        p.dimension = *geom == gsq::Geometry::triangular2d ? 2 : 1;
        return gsq::build_graph(*geom, p, n, seed);
    }
};

std::string out_dir_override(const std::string& configured) {
    if (const char* env = std::getenv("GSQ_OUTDIR")) return env;
    return configured;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return dir.empty() ? name : dir + "/" + name;
}

void write_manifest(const std::string& dir, const gsq::ExperimentConfig& cfg, double wall_seconds,
                    const std::vector<std::string>& outputs, const std::vector<std::string>& failures) {
    json m;
    m["id"] = cfg.id;
    m["config"] = gsq::serialize_config(cfg);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(gsq::config_hash(cfg)));
    m["config_hash"] = hash;
    m["tool_version"] = gsq::kToolVersion;
    m["wall_time_s"] = wall_seconds;
    m["master_seed"] = cfg.seed;
    m["outputs"] = outputs;
    m["failures"] = failures;
    gsq::atomic_write(join_path(dir, cfg.id + "_manifest.json"), m.dump(2) + "\n");
}

int report_config_errors(const gsq::ParsedConfig& pc) {
    for (const auto& e : pc.errors) std::cerr << "config error: " << e.path << ": " << e.message << "\n";
    for (const auto& w : pc.warnings) std::cerr << "config warning: " << w << "\n";
    return pc.ok() ? 0 : 1;
}

void emit_gnuplot(const std::string& dir, const std::string& csv, const std::string& title, int xcol,
                  int ycol, bool loglog) {
    std::ostringstream gp;
    gp << "set datafile separator ','\n";
    if (loglog) gp << "set logscale xy\n";
    gp << "set key left\nset title '" << title << "'\n";
    gp << "plot '" << csv << "' using " << xcol << ":" << ycol << " with linespoints title '" << title
       << "'\n";
    gsq::atomic_write(join_path(dir, title + ".gp"), gp.str());
}

int cmd_graph_stats(const GraphOptions& gopt, const std::string& dir, const std::string& save_path) {
    gsq::Graph g = gopt.build();
    auto rep = gsq::find_clusters(g);
    auto thr = gsq::threshold_from_moments(rep.z0_mean, rep.z0_second_moment);
    json out;
    out["geometry"] = gsq::geometry_name(g.geometry());
    out["n_nodes"] = g.n_nodes();
    out["n_active"] = g.n_active();
    out["n_edges"] = g.edge_count();
    out["avg_degree"] = g.average_degree();
    out["n_components"] = rep.components.size();
    out["giant_size"] = rep.giant_size;
    out["giant_fraction"] = rep.giant_fraction;
    out["mean_finite_cluster_S"] = rep.mean_cluster_size_S;
    out["z0_mean"] = rep.z0_mean;
    out["z0_second_moment"] = rep.z0_second_moment;
    out["moment_threshold_pp"] = thr.value;
    out["moment_threshold_degenerate"] = thr.degenerate;
    if (g.geometry() == gsq::Geometry::pw2) out["pw2_threshold"] = gsq::pw2_threshold(g.n_nodes());
    std::cout << out.dump(2) << "\n";
    if (!save_path.empty()) {
        ensure_dir(dir);
        std::ostringstream ss;
        gsq::save_graph(g, ss);
        gsq::atomic_write(join_path(dir, save_path), ss.str());
    }
    return 0;
}

int cmd_spectrum(const GraphOptions& gopt, const std::string& dir, int dense_cap, double dos_fraction,
                 const std::string& recurrence_spec, bool plot) {
    gsq::Graph g = gopt.build();
    ensure_dir(dir);
    gsq::Graph giant = gsq::giant_component(g);
    auto summary = gsq::make_spectral_summary(giant, dense_cap, dos_fraction);

    std::ostringstream csv;
    csv << "index,lambda\n";
    char buf[64];
    for (int i = 0; i < summary.eigenvalues.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", i, summary.eigenvalues[i]);
        csv << buf;
    }
    std::string csv_name = "spectrum_" + gopt.geometry + "_n" + std::to_string(gopt.n) + ".csv";
    gsq::atomic_write(join_path(dir, csv_name), csv.str());

    json out;
    out["n_active"] = summary.n_active;
    out["gap"] = summary.gap;
    out["ds_from_dos"] = summary.ds_from_dos.valid ? json(summary.ds_from_dos.ds) : json();
    out["ds_from_dos_stderr"] = summary.ds_from_dos.valid ? json(summary.ds_from_dos.stderr_) : json();
    out["spectrum_csv"] = csv_name;

    if (!recurrence_spec.empty()) {
        // format: t_min:t_max:points
        double t0, t1;
        int np;
        if (std::sscanf(recurrence_spec.c_str(), "%lf:%lf:%d", &t0, &t1, &np) != 3)
            throw CLI::ValidationError("--recurrence", "expected t_min:t_max:points");
        auto tr = gsq::recurrence_probability(giant, gsq::log_time_grid(t0, t1, np),
                                              {std::max(dense_cap, 8192)});
        std::ostringstream rcsv;
        rcsv << "t,p_avg\n";
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tr.times[i], tr.p_avg[i]);
            rcsv << buf;
        }
        std::string rname = "recurrence_" + gopt.geometry + "_n" + std::to_string(gopt.n) + ".csv";
        gsq::atomic_write(join_path(dir, rname), rcsv.str());
        out["recurrence_csv"] = rname;
        out["recurrence_slope"] = tr.fitted_slope;
        out["recurrence_slope_stderr"] = tr.fitted_slope_stderr;
        if (plot) emit_gnuplot(dir, rname, "recurrence", 1, 2, true);
    }
    if (plot) emit_gnuplot(dir, csv_name, "spectrum", 1, 2, false);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_percolate(const GraphOptions& gopt, const std::string& dir, std::vector<double> controls,
                  int seeds, double level, bool plot) {
    if (controls.size() < 3) throw CLI::ValidationError("--controls", "need >= 3 control values");
    std::sort(controls.begin(), controls.end());
    auto geom = gsq::geometry_from_name(gopt.geometry);
    if (!geom) throw CLI::ValidationError("--geometry", "unknown geometry");
    const bool bond_sweep = *geom == gsq::Geometry::correlated_bond;

    auto make = [&](double control, std::uint64_t seed) {
        gsq::GraphParams p;
        p.alpha = gopt.alpha;
        p.apply_kac = !gopt.no_kac;
        p.kappa_scale = gopt.kappa_scale;
        p.dimension = *geom == gsq::Geometry::triangular2d ? 2 : 1;
        if (bond_sweep) {
            p.bond_C = control;
            p.dilution_p = 0.0;
        } else {
            p.dilution_p = control;
            p.bond_C = gopt.bond_C;
        }
        return gsq::build_graph(*geom, p, gopt.n, seed);
    };

    auto res = gsq::empirical_threshold(make, gopt.n, controls, seeds, gopt.seed, level, !bond_sweep);

    ensure_dir(dir);
    std::ostringstream csv;
    csv << "param,size,giant_fraction,giant_fraction_err,S,S_err\n";
    char buf[160];
    for (const auto& pt : res.curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", pt.control, gopt.n,
                      pt.giant_fraction, pt.giant_fraction_err, pt.mean_cluster_S, pt.mean_cluster_S_err);
        csv << buf;
    }
    std::string csv_name = "percolation_" + gopt.geometry + "_n" + std::to_string(gopt.n) + ".csv";
    gsq::atomic_write(join_path(dir, csv_name), csv.str());
    if (plot) emit_gnuplot(dir, csv_name, "percolation", 1, 3, false);

    json out;
    out["size"] = gopt.n;
    out["control"] = bond_sweep ? "bond_C" : "dilution_p";
    out["crossing_level"] = level;
    out["crossing"] = res.crossing_valid ? json(res.crossing) : json();
    out["crossing_err"] = res.crossing_valid ? json(res.crossing_err) : json();
    out["monotone"] = res.monotone;
    out["gamma"] = res.gamma_valid ? json(res.gamma) : json();
    out["gamma_stderr"] = res.gamma_valid ? json(res.gamma_stderr) : json();
    out["curve_csv"] = csv_name;
    std::cout << out.dump(2) << "\n";
    return res.crossing_valid ? 0 : 2;
}

int cmd_squeeze(const std::string& config_path) {
    auto pc = gsq::parse_config(config_path);
    if (!pc.ok()) return report_config_errors(pc);
    report_config_errors(pc); // warnings only
    gsq::ExperimentConfig cfg = pc.config;
    cfg.output_dir = out_dir_override(cfg.output_dir);
    ensure_dir(cfg.output_dir);

    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> outputs, failures;
    for (int n : cfg.sizes) {
        std::vector<gsq::Method> methods;
        if (cfg.method == gsq::Method::both)
            methods = {gsq::Method::rotor_sw, gsq::Method::dtwa};
        else
            methods = {cfg.method};
        for (auto m : methods) {
            try {
                auto times = gsq::make_time_grid(cfg, n, cfg.delta);
                std::uint64_t pseed = gsq::point_seed(cfg.seed, cfg.delta, static_cast<std::uint64_t>(n));
                gsq::SqueezeTrace tr;
                if (m == gsq::Method::rotor_sw)
                    tr = gsq::rotor_sw_trace(cfg.geometry, cfg.params, n, cfg.delta, cfg.spin_s, times,
                                             cfg.n_disorder, pseed);
                else
                    tr = gsq::dtwa_trace(cfg.geometry, cfg.params, n, cfg.delta, cfg.spin_s, times,
                                         cfg.n_samples, pseed);
                std::string name = cfg.id + "_" + gsq::method_name(m) + "_n" + std::to_string(n) + ".csv";
                std::ostringstream ss;
                gsq::write_trace_csv(tr, ss, m == gsq::Method::dtwa);
                gsq::atomic_write(join_path(cfg.output_dir, name), ss.str());
                outputs.push_back(name);
                std::cout << "wrote " << name << "\n";
            } catch (const std::exception& e) {
                failures.push_back("n=" + std::to_string(n) + " " + gsq::method_name(m) + ": " + e.what());
                std::cerr << "point failed: " << failures.back() << "\n";
            }
        }
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg.output_dir, cfg, wall, outputs, failures);
    return failures.empty() ? 0 : 2;
}

int cmd_sweep(const std::string& config_path) {
    auto pc = gsq::parse_config(config_path);
    if (!pc.ok()) return report_config_errors(pc);
    report_config_errors(pc);
    gsq::ExperimentConfig cfg = pc.config;
    cfg.output_dir = out_dir_override(cfg.output_dir);
    if (!cfg.sweep) {
        std::cerr << "config error: sweep: required for the sweep subcommand\n";
        return 1;
    }
    ensure_dir(cfg.output_dir);

    auto t0 = std::chrono::steady_clock::now();
    auto res = gsq::run_sweep(cfg, [](const std::string& line) { std::cout << line << "\n"; });

    std::ostringstream csv;
    csv << "control,size,t_min,xi2_min,xi2_min_err,at_boundary,error\n";
    char buf[200];
    for (const auto& p : res.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%d,", p.control, p.size,
                      p.minimum.t_min, p.minimum.xi2_min, p.minimum.xi2_min_err,
                      p.minimum.at_boundary ? 1 : 0);
        csv << buf << p.error << "\n";
    }
    std::string minima_name = cfg.id + "_minima.csv";
    gsq::atomic_write(join_path(cfg.output_dir, minima_name), csv.str());

    json summary;
    summary["id"] = cfg.id;
    summary["control"] = cfg.sweep->control;
    summary["minima_csv"] = minima_name;
    json cls = json::object();
    for (auto& [value, c] : res.classification) {
        char key[32];
        std::snprintf(key, sizeof key, "%.10g", value);
        cls[key] = gsq::scalability_name(c);
    }
    summary["classification"] = cls;
    json pts = json::array();
    for (const auto& p : res.points) {
        json pj;
        pj["control"] = p.control;
        pj["size"] = p.size;
        pj["t_min"] = p.minimum.t_min;
        pj["xi2_min"] = p.minimum.xi2_min;
        pj["xi2_min_err"] = p.minimum.xi2_min_err;
        pj["at_boundary"] = p.minimum.at_boundary;
        if (!p.error.empty()) pj["error"] = p.error;
        pts.push_back(pj);
    }
    summary["points"] = pts;
    std::string summary_name = cfg.id + "_sweep_summary.json";
    gsq::atomic_write(join_path(cfg.output_dir, summary_name), summary.dump(2) + "\n");
    std::cout << "wrote " << summary_name << "\n";

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg.output_dir, cfg, wall, {minima_name, summary_name},
                   res.any_failed ? std::vector<std::string>{"one or more sweep points failed"}
                                  : std::vector<std::string>{});
    return res.any_failed ? 2 : 0;
}

int cmd_fit(const std::string& summary_path, const std::string& out_path) {
    std::ifstream f(summary_path);
    if (!f) {
        std::cerr << "cannot open " << summary_path << "\n";
        return 1;
    }
    json summary;
    f >> summary;

    // group minima by control value
    std::map<double, std::map<int, gsq::TraceMinimum>> by_control;
    for (const auto& pj : summary.at("points")) {
        if (pj.contains("error")) continue;
        gsq::TraceMinimum m;
        m.t_min = pj.at("t_min").get<double>();
        m.xi2_min = pj.at("xi2_min").get<double>();
        m.xi2_min_err = pj.at("xi2_min_err").get<double>();
        m.at_boundary = pj.at("at_boundary").get<bool>();
        m.valid = true;
        by_control[pj.at("control").get<double>()][pj.at("size").get<int>()] = m;
    }

    json report;
    report["id"] = summary.value("id", "experiment");
    json per_control = json::object();
    std::vector<double> grid;
    std::map<double, gsq::Scalability> cls;
    for (auto& [control, minima] : by_control) {
        json cj;
        // mu/nu fit across sizes at this control value
        try {
            std::map<int, gsq::SqueezeTrace> traces; // rebuild pseudo-traces from minima
            std::vector<double> ns, xs, ts;
            for (auto& [n, m] : minima) {
                ns.push_back(n);
                xs.push_back(m.xi2_min);
                ts.push_back(m.t_min);
            }
            if (ns.size() >= 3) {
                auto fmu = gsq::loglog_fit(ns, xs);
                auto fnu = gsq::loglog_fit(ns, ts);
                cj["mu"] = -fmu.slope;
                cj["mu_stderr"] = fmu.slope_stderr;
                cj["nu"] = fnu.slope;
                cj["nu_stderr"] = fnu.slope_stderr;
            }
        } catch (const std::exception&) {
        }
        gsq::Scalability c = gsq::Scalability::undecided;
        try {
            c = gsq::classify_scalability(minima);
        } catch (const std::exception&) {
        }
        cls[control] = c;
        grid.push_back(control);
        cj["classification"] = gsq::scalability_name(c);
        char key[32];
        std::snprintf(key, sizeof key, "%.10g", control);
        per_control[key] = cj;
    }
    report["per_control"] = per_control;

    // critical point from the precomputed classifications
    if (grid.size() >= 3) {
        try {
            auto cp = gsq::extract_critical_point(grid, [&](double c) {
                auto it = cls.find(c);
                return it != cls.end() ? it->second : gsq::Scalability::undecided;
            }, 0);
            report["critical_point"] = cp.value;
            report["critical_point_halfwidth"] = cp.half_width;
        } catch (const std::exception& e) {
            report["critical_point_error"] = e.what();
        }
    }

    std::string text = report.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        gsq::atomic_write(out_path, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-squeezing scalability toolkit for interaction graphs"};
    app.require_subcommand(1);

    GraphOptions gopt;
    std::string dir = "out", save_graph_path, config_path, recurrence_spec, summary_path, fit_out;
    int dense_cap = gsq::kDefaultDenseCap;
    double dos_fraction = 0.05, level = 0.5;
    int seeds = 200;
    std::vector<double> controls;
    bool plot = false;

    auto* stats = app.add_subcommand("graph-stats", "construct a graph and report its statistics");
    gopt.attach(stats);
    stats->add_option("--out-dir", dir, "output directory");
    stats->add_option("--save", save_graph_path, "also write the graph in columnar text format");

    auto* spectrum = app.add_subcommand("spectrum", "Laplacian spectrum and spectral dimension");
    gopt.attach(spectrum);
    spectrum->add_option("--out-dir", dir, "output directory");
    spectrum->add_option("--dense-cap", dense_cap, "full-diagonalization size threshold");
    spectrum->add_option("--dos-fraction", dos_fraction, "low-lambda window for the integrated DOS fit");
    spectrum->add_option("--recurrence", recurrence_spec, "also export <P(t)>: t_min:t_max:points");
    spectrum->add_flag("--plot", plot, "emit gnuplot scripts");

    auto* percolate = app.add_subcommand("percolate", "Monte Carlo percolation sweep");
    gopt.attach(percolate);
    percolate->add_option("--out-dir", dir, "output directory");
    percolate->add_option("--controls", controls, "control values (dilution p or bond C)")->required();
    percolate->add_option("--seeds", seeds, "realizations per control value");
    percolate->add_option("--level", level, "giant-fraction crossing level");
    percolate->add_flag("--plot", plot, "emit gnuplot scripts");

    auto* squeeze = app.add_subcommand("squeeze", "squeezing traces from a config file");
    squeeze->add_option("--config", config_path, "experiment config (json)")->required();

    auto* sweep = app.add_subcommand("sweep", "sweep a control parameter from a config file");
    sweep->add_option("--config", config_path, "experiment config (json) with a sweep section")->required();

    auto* fit = app.add_subcommand("fit", "scaling fits and classification from a sweep summary");
    fit->add_option("--summary", summary_path, "sweep summary json")->required();
    fit->add_option("--out", fit_out, "output report path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (stats->parsed()) return cmd_graph_stats(gopt, out_dir_override(dir), save_graph_path);
        if (spectrum->parsed())
            return cmd_spectrum(gopt, out_dir_override(dir), dense_cap, dos_fraction, recurrence_spec, plot);
        if (percolate->parsed())
            return cmd_percolate(gopt, out_dir_override(dir), controls, seeds, level, plot);
        if (squeeze->parsed()) return cmd_squeeze(config_path);
        if (sweep->parsed()) return cmd_sweep(config_path);
        if (fit->parsed()) return cmd_fit(summary_path, fit_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
