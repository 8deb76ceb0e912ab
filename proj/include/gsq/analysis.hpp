// Scaling-law extraction and phase classification from squeezing traces:
// power-law fits of xi2_min ~ N^-mu and t_min ~ N^nu, scalable / non-scalable
// classification across sizes, critical-point bracketing along a control
// parameter, and tests of predicted critical-point scalings.

#ifndef GSQ_ANALYSIS_HPP
#define GSQ_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/fitting.hpp"
#include "gsq/trace.hpp"

namespace gsq {

enum class FitMethod { loglog_ls, crossing, size_independence };

struct ScalingPoint {
    double control = 0.0; // size N or distance to threshold
    double value = 0.0;
    double err = 0.0;
};

struct ScalingFit {
    double exponent = 0.0;
    double stderr_ = 0.0;
    std::vector<ScalingPoint> points;
    FitMethod method = FitMethod::loglog_ls;
    std::string window;
    bool valid = false;
};

struct TraceMinimum {
    double t_min = 0.0;
    double xi2_min = 0.0;
    double xi2_min_err = 0.0;
    bool at_boundary = false;
    bool valid = false;
};

// Interior minimum of a trace, refined by the parabola through the discrete
// minimum and its neighbours (exact for quadratic data). Minima earlier than
// t_floor (sub-collective transient) and past a breakdown are ignored.
inline TraceMinimum find_trace_minimum(const SqueezeTrace& tr, double t_floor = 0.0) {
    TraceMinimum out;
    const std::size_t nt = tr.times.size();
    if (nt < 3) return out;
    std::size_t last = nt;
    if (tr.breakdown_index >= 0) last = static_cast<std::size_t>(tr.breakdown_index);
    std::size_t best = nt;
    double bestv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < last; ++i) {
        if (tr.times[i] < t_floor) continue;
        if (!std::isfinite(tr.xi2[i])) continue;
        if (tr.xi2[i] < bestv) {
            bestv = tr.xi2[i];
            best = i;
        }
    }
    if (best >= last) return out;
    out.xi2_min = bestv;
    out.t_min = tr.times[best];
    out.xi2_min_err = tr.xi2_err.empty() ? 0.0 : tr.xi2_err[best];
    if (best == 0 || best + 1 >= last) {
        out.at_boundary = true;
        out.valid = true;
        return out;
    }
    auto v = parabola_vertex(tr.times[best - 1], tr.xi2[best - 1], tr.times[best], tr.xi2[best],
                             tr.times[best + 1], tr.xi2[best + 1]);
    if (v.valid && v.x > tr.times[best - 1] && v.x < tr.times[best + 1]) {
        out.t_min = v.x;
        out.xi2_min = v.y;
    }
    out.valid = true;
    return out;
}

// Fit xi2_min ~ N^-mu and t_min ~ N^nu across sizes. Traces whose minimum
// sits on the grid edge are excluded (with a note in the window string).
inline std::pair<ScalingFit, ScalingFit> fit_mu_nu(const std::map<int, SqueezeTrace>& traces,
                                                   double t_floor = 0.0) {
    std::vector<double> ns, mins, tmins;
    std::string excluded;
    for (const auto& [n, tr] : traces) {
        auto m = find_trace_minimum(tr, t_floor);
        if (!m.valid || m.at_boundary) {
            excluded += " N=" + std::to_string(n);
            continue;
        }
        ns.push_back(static_cast<double>(n));
        mins.push_back(m.xi2_min);
        tmins.push_back(m.t_min);
    }
    if (ns.size() < 3)
        throw std::invalid_argument("fit_mu_nu: need >= 3 usable sizes (excluded:" + excluded + ")");
    ScalingFit mu, nu;
    auto fm = loglog_fit(ns, mins);
    mu.exponent = -fm.slope;
    mu.stderr_ = fm.slope_stderr;
    mu.method = FitMethod::loglog_ls;
    mu.valid = true;
    auto ft = loglog_fit(ns, tmins);
    nu.exponent = ft.slope;
    nu.stderr_ = ft.slope_stderr;
    nu.method = FitMethod::loglog_ls;
    nu.valid = true;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        mu.points.push_back({ns[i], mins[i], 0.0});
        nu.points.push_back({ns[i], tmins[i], 0.0});
    }
    if (!excluded.empty()) {
        mu.window = "excluded boundary minima:" + excluded;
        nu.window = mu.window;
    }
    return {mu, nu};
}

enum class Scalability { scalable, non_scalable, undecided };

inline const char* scalability_name(Scalability s) {
    switch (s) {
        case Scalability::scalable: return "scalable";
        case Scalability::non_scalable: return "non_scalable";
        case Scalability::undecided: return "undecided";
    }
    return "?";
}

// Scalable: xi2_min strictly decreasing in N with total drop beyond the
// combined 2 sigma. Non-scalable: all pairwise differences within 2 sigma.
// Anything else: undecided.
inline Scalability classify_scalability(const std::map<int, TraceMinimum>& minima, double n_sigma = 2.0) {
    if (minima.size() < 3) throw std::invalid_argument("classify_scalability: need >= 3 sizes");
    std::vector<double> n, v, e;
    for (const auto& [size, m] : minima) {
        if (!m.valid) throw std::invalid_argument("classify_scalability: invalid minimum in input");
        n.push_back(static_cast<double>(size));
        v.push_back(m.xi2_min);
        e.push_back(m.xi2_min_err);
    }
    if (n.back() / n.front() < 4.0)
        throw std::invalid_argument("classify_scalability: need a factor >= 4 between sizes");

    bool monotone = true;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i + 1] >= v[i]) monotone = false;
    double drop = v.front() - v.back();
    double sigma_total = std::hypot(e.front(), e.back());
    if (monotone && drop > n_sigma * sigma_total) return Scalability::scalable;

    bool all_flat = true;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            double sig = std::hypot(e[i], e[j]);
            if (std::abs(v[i] - v[j]) > n_sigma * sig) all_flat = false;
        }
    if (all_flat) return Scalability::non_scalable;
    return Scalability::undecided;
}

struct CriticalPoint {
    double value = 0.0;
    double half_width = 0.0;
    std::vector<std::pair<double, Scalability>> classifications;
    bool valid = false;
};

// Bracket the transition along a control parameter: classify each grid value,
// locate the adjacent (scalable, non_scalable) pair, then refine by bisection
// up to `bisection_rounds` extra classifications. The classify callback is
// expected to be monotone in the control up to noise.
inline CriticalPoint extract_critical_point(const std::vector<double>& grid,
                                            const std::function<Scalability(double)>& classify,
                                            int bisection_rounds = 3) {
    if (grid.size() < 3) throw std::invalid_argument("extract_critical_point: need >= 3 control values");
    std::vector<double> c(grid);
    std::sort(c.begin(), c.end());

    CriticalPoint out;
    std::vector<Scalability> cls;
    for (double x : c) {
        auto s = classify(x);
        cls.push_back(s);
        out.classifications.push_back({x, s});
    }

    // find an adjacent pair with one side scalable and the other not
    int lo = -1;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        bool a = cls[i] == Scalability::scalable, b = cls[i + 1] == Scalability::scalable;
        if (a != b && cls[i] != Scalability::undecided && cls[i + 1] != Scalability::undecided) {
            lo = static_cast<int>(i);
            break;
        }
    }
    if (lo < 0) {
        std::string msg = "extract_critical_point: no bracket found;";
        for (auto& [x, s] : out.classifications)
            msg += " " + std::to_string(x) + "=" + scalability_name(s);
        throw std::runtime_error(msg);
    }

    double a = c[static_cast<std::size_t>(lo)], b = c[static_cast<std::size_t>(lo) + 1];
    Scalability sa = cls[static_cast<std::size_t>(lo)];
    for (int round = 0; round < bisection_rounds; ++round) {
        double mid = 0.5 * (a + b);
        auto sm = classify(mid);
        out.classifications.push_back({mid, sm});
        if (sm == Scalability::undecided) break;
        if (sm == sa)
            a = mid;
        else
            b = mid;
    }
    out.value = 0.5 * (a + b);
    out.half_width = 0.5 * (b - a);
    out.valid = true;
    return out;
}

// Log-log fit of (1 - Delta_c) against the distance to the percolation
// threshold, compared against a predicted exponent.
struct DeltacScalingTest {
    ScalingFit fit;
    double predicted = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline DeltacScalingTest test_deltac_scaling(const std::vector<ScalingPoint>& points, double predicted,
                                             double tolerance) {
    if (points.size() < 3) throw std::invalid_argument("test_deltac_scaling: need >= 3 points");
    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(p.control); // distance to threshold
        y.push_back(p.value);   // 1 - Delta_c
    }
    auto f = loglog_fit(x, y);
    DeltacScalingTest t;
    t.fit.exponent = f.slope;
    t.fit.stderr_ = f.slope_stderr;
    t.fit.points = points;
    t.fit.method = FitMethod::loglog_ls;
    t.fit.valid = true;
    t.predicted = predicted;
    t.tolerance = tolerance;
    t.pass = std::abs(f.slope - predicted) <= tolerance;
    return t;
}

} // namespace gsq

#endif
