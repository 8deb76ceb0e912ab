// Time series of squeezing observables, shared by the rotor/spin-wave solver
// and the DTWA engine. Error fields are zero for analytic traces.

#ifndef GSQ_TRACE_HPP
#define GSQ_TRACE_HPP

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

struct SqueezeTrace {
    std::vector<double> times;
    std::vector<double> xi2, xi2_err;
    std::vector<double> sx, sx_err;     // <S_x>
    std::vector<double> var_min;        // minimal transverse variance
    std::vector<double> var_y, var_z, cov_yz;
    std::vector<double> m_xy, m_xy_err; // xy-plane magnetization per spin
    int n_samples = 1;
    int n_sites = 0;
    int breakdown_index = -1; // first index where the result is unreliable; -1 = none

    bool broken_at(std::size_t i) const {
        return breakdown_index >= 0 && static_cast<int>(i) >= breakdown_index;
    }
};

// Log-spaced time grid, inclusive of both endpoints.
inline std::vector<double> log_time_grid(double t_min, double t_max, int points) {
    if (points < 2 || t_min <= 0 || t_max <= t_min)
        throw std::invalid_argument("log_time_grid: need 0 < t_min < t_max and points >= 2");
    std::vector<double> t(static_cast<std::size_t>(points));
    double lr = std::log(t_max / t_min) / (points - 1);
    for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = t_min * std::exp(lr * i);
    t.back() = t_max;
    return t;
}

inline void write_trace_csv(const SqueezeTrace& tr, std::ostream& os, bool with_mxy = false) {
    char buf[256];
    os << (with_mxy ? "t,xi2,xi2_err,Sx,Sx_err,varmin,m_xy,m_xy_err,n_samples,breakdown_flag\n"
                    : "t,xi2,Sx,varmin,breakdown_flag\n");
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        int flag = tr.broken_at(i) ? 1 : 0;
        if (with_mxy) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                          tr.times[i], tr.xi2[i], tr.xi2_err.empty() ? 0.0 : tr.xi2_err[i], tr.sx[i],
                          tr.sx_err.empty() ? 0.0 : tr.sx_err[i], tr.var_min[i],
                          tr.m_xy.empty() ? 0.0 : tr.m_xy[i], tr.m_xy_err.empty() ? 0.0 : tr.m_xy_err[i],
                          tr.n_samples, flag);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", tr.times[i], tr.xi2[i], tr.sx[i],
                          tr.var_min[i], flag);
        }
        os << buf;
    }
}

inline void write_trace_csv(const SqueezeTrace& tr, const std::string& path, bool with_mxy = false) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_trace_csv: cannot open " + path);
    write_trace_csv(tr, f, with_mxy);
}

} // namespace gsq

#endif
