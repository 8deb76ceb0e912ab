// Discrete truncated Wigner approximation for XXZ dynamics on a graph.
//
// Each trajectory starts from the discrete Wigner sampling of the x-polarized
// product state (s^x = s, s^y = +/-s, s^z = +/-s with independent signs) and
// evolves under the classical mean-field equations
//     ds_i/dt = s_i x B_i,   B_i = (sum_j J_ij s_j^x, sum_j J_ij s_j^y,
//                                   Delta sum_j J_ij s_j^z),
// integrated with an adaptive Dormand-Prince RK5(4) scheme. The equations
// conserve every |s_i| and the classical energy exactly; both are monitored
// and drift is treated as integrator failure rather than silently projected
// away.
//
// Sampling is joint over DTWA trajectories and disorder: every sample draws a
// fresh graph realization (when the family is disordered) and fresh initial
// signs from split RNG streams. Accumulation is per-sample, reduced in fixed
// sample order, so results are bit-identical regardless of thread count.

#ifndef GSQ_DTWA_HPP
#define GSQ_DTWA_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/fft.hpp"
#include "gsq/graph.hpp"
#include "gsq/parallel.hpp"
#include "gsq/rng.hpp"
#include "gsq/trace.hpp"

namespace gsq {

using SpinMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>; // one row per spin

struct TrajectoryState {
    SpinMatrix spins;
    double time = 0.0;
};

// Discrete Wigner sampling of the x-polarized coherent state.
inline SpinMatrix sample_initial(int n_act, double spin_s, Rng& rng) {
    if (spin_s <= 0.0) throw std::invalid_argument("sample_initial: spin length must be positive");
    SpinMatrix s(n_act, 3);
    for (int i = 0; i < n_act; ++i) {
        s(i, 0) = spin_s;
        s(i, 1) = rng.sign() * spin_s;
        s(i, 2) = rng.sign() * spin_s;
    }
    return s;
}

// Effective field evaluator: fills B (n x 3) for given spins, including the
// anisotropy factor on the z component.
using FieldFunction = std::function<void(const SpinMatrix& spins, SpinMatrix& B)>;

// Field from a coupling matrix restricted to active nodes.
class CouplingField {
public:
    CouplingField(const Graph& g, double delta) : delta_(delta) {
        auto idx = g.active_indices();
        const int m = static_cast<int>(idx.size());
        if (g.symmetry() == graph_detail::Symmetry::circulant_ring && g.n_active() == g.n_nodes()) {
            circ_ = std::make_unique<CirculantKernel>(g.circulant_kernel());
            n_ = m;
        } else if (g.is_sparse()) {
            std::vector<int> map(static_cast<std::size_t>(g.n_nodes()), -1);
            for (int k = 0; k < m; ++k) map[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = k;
            std::vector<Eigen::Triplet<double>> tri;
            g.for_each_edge([&](int i, int j, double w) {
                int a = map[static_cast<std::size_t>(i)], b = map[static_cast<std::size_t>(j)];
                if (a >= 0 && b >= 0) {
                    tri.emplace_back(a, b, w);
                    tri.emplace_back(b, a, w);
                }
            });
            sparse_ = std::make_unique<Eigen::SparseMatrix<double>>(m, m);
            sparse_->setFromTriplets(tri.begin(), tri.end());
            sparse_->makeCompressed();
            n_ = m;
        } else {
            Eigen::MatrixXd full = g.dense_couplings();
            dense_ = std::make_unique<Eigen::MatrixXd>(m, m);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    (*dense_)(a, b) = full(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
            n_ = m;
        }
    }

    int size() const { return n_; }
    double delta() const { return delta_; }

    void operator()(const SpinMatrix& spins, SpinMatrix& B) {
        if (circ_) {
            B.resize(n_, 3);
            for (int c = 0; c < 3; ++c) {
                colin_ = spins.col(c);
                circ_->apply(colin_.data(), colout_.data());
                B.col(c) = colout_;
            }
        } else if (dense_) {
            B.noalias() = (*dense_) * spins;
        } else {
            B = (*sparse_) * spins;
        }
        B.col(2) *= delta_;
    }

    // Classical energy -sum_{i<j} J_ij (sx sx + sy sy + Delta sz sz)
    // = -1/2 sum_i s_i . B_i.
    double energy(const SpinMatrix& spins, SpinMatrix& scratch) {
        (*this)(spins, scratch);
        return -0.5 * (spins.array() * scratch.array()).sum();
    }

private:
    int n_ = 0;
    double delta_ = 0.0;
    std::unique_ptr<CirculantKernel> circ_;
    std::unique_ptr<Eigen::MatrixXd> dense_;
    std::unique_ptr<Eigen::SparseMatrix<double>> sparse_;
    Eigen::VectorXd colin_{}, colout_{};

public:
    void prepare_buffers() {
        if (circ_) {
            colin_.resize(n_);
            colout_.resize(n_);
        }
    }
};

// ds_i/dt = s_i x B_i, rowwise cross product.
inline void mean_field_rhs(const SpinMatrix& spins, SpinMatrix& B, SpinMatrix& deriv) {
    deriv.col(0) = spins.col(1).cwiseProduct(B.col(2)) - spins.col(2).cwiseProduct(B.col(1));
    deriv.col(1) = spins.col(2).cwiseProduct(B.col(0)) - spins.col(0).cwiseProduct(B.col(2));
    deriv.col(2) = spins.col(0).cwiseProduct(B.col(1)) - spins.col(1).cwiseProduct(B.col(0));
}

struct IntegrateOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_norm_drift = 1e-6;   // relative drift of any |s_i|
    double max_energy_drift = 1e-6; // relative drift of the classical energy
    double min_step = 1e-14;        // relative to the grid span
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Dormand-Prince 5(4) integration with outputs exactly at t_grid
// (steps are clipped to grid points). The observer is called as
// observer(grid_index, time, spins).
inline void integrate_observe(const SpinMatrix& spins0, const FieldFunction& field, double spin_s,
                              const std::vector<double>& t_grid, const IntegrateOptions& opt,
                              const std::function<void(std::size_t, double, const SpinMatrix&)>& observer,
                              const std::function<double(const SpinMatrix&)>& energy_fn = nullptr) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    if (t_grid.empty()) return;
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1]) throw std::invalid_argument("integrate: t_grid must be increasing");
    if (t_grid.front() < 0.0) throw std::invalid_argument("integrate: negative time");

    const int n = static_cast<int>(spins0.rows());
    SpinMatrix y = spins0, ynew(n, 3), B(n, 3), err(n, 3);
    SpinMatrix k1(n, 3), k2(n, 3), k3(n, 3), k4(n, 3), k5(n, 3), k6(n, 3), k7(n, 3), tmp(n, 3);

    auto rhs = [&](const SpinMatrix& s, SpinMatrix& out) {
        field(s, B);
        mean_field_rhs(s, B, out);
    };

    double t = 0.0;
    std::size_t gi = 0;
    const double t_end = t_grid.back();
    const double e0 = energy_fn ? energy_fn(y) : 0.0;
    const double e_scale = energy_fn ? std::max(std::abs(e0), 1e-12) : 1.0;

    auto check_state = [&](const SpinMatrix& s, double time) {
        double max_drift = 0.0;
        for (int i = 0; i < n; ++i) {
            double norm = s.row(i).norm();
            max_drift = std::max(max_drift, std::abs(norm - spin_s) / spin_s);
        }
        if (max_drift > opt.max_norm_drift)
            throw IntegrationError("integrate: spin-norm drift " + std::to_string(max_drift) + " at t=" +
                                   std::to_string(time));
        if (energy_fn) {
            double drift = std::abs(energy_fn(s) - e0) / e_scale;
            if (drift > opt.max_energy_drift)
                throw IntegrationError("integrate: energy drift " + std::to_string(drift) + " at t=" +
                                       std::to_string(time));
        }
    };

    // emit any leading grid points at t = 0
    while (gi < t_grid.size() && t_grid[gi] == 0.0) {
        observer(gi, 0.0, y);
        ++gi;
    }
    if (gi == t_grid.size()) return;

    rhs(y, k1);
    // conservative first step from the field magnitude
    double f0 = k1.norm() / std::sqrt(static_cast<double>(n));
    double h = f0 > 0 ? 0.1 * spin_s / f0 : (t_grid[gi] - t);
    h = std::min(h, t_grid[gi] - t);
    const double h_min = opt.min_step * t_end;

    while (gi < t_grid.size()) {
        bool hit_grid = false;
        if (t + h >= t_grid[gi] - 1e-14 * t_end) {
            h = t_grid[gi] - t;
            hit_grid = true;
        }
        if (h < h_min) throw IntegrationError("integrate: step size underflow at t=" + std::to_string(t));

        tmp = y + h * (a21 * k1);
        rhs(tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        rhs(tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(tmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double errnorm = 0.0;
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) {
                double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y(i, c)), std::abs(ynew(i, c)));
                double q = err(i, c) / sc;
                errnorm += q * q;
            }
        errnorm = std::sqrt(errnorm / (3.0 * n));

        if (errnorm <= 1.0) {
            t = hit_grid ? t_grid[gi] : t + h;
            y.swap(ynew);
            k1.swap(k7); // FSAL
            if (hit_grid) {
                check_state(y, t);
                observer(gi, t, y);
                ++gi;
                if (gi == t_grid.size()) break;
            }
        }
        double fac = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        if (gi < t_grid.size()) h = std::min(h, std::max(t_grid[gi] - t, h_min));
    }
}

// Dense-output convenience wrapper returning the state at every grid time.
inline std::vector<TrajectoryState> integrate(const SpinMatrix& spins0, const FieldFunction& field,
                                              double spin_s, const std::vector<double>& t_grid,
                                              IntegrateOptions opt = {},
                                              const std::function<double(const SpinMatrix&)>& energy_fn = nullptr) {
    std::vector<TrajectoryState> out(t_grid.size());
    integrate_observe(
        spins0, field, spin_s, t_grid, opt,
        [&](std::size_t gi, double t, const SpinMatrix& s) {
            out[gi].spins = s;
            out[gi].time = t;
        },
        energy_fn);
    return out;
}

// ---------------------------------------------------------------------------
// Ensemble driver

struct EnsembleConfig {
    Geometry geometry = Geometry::ring1d;
    GraphParams params;
    int n = 0;
    double delta = 0.0;
    double spin_s = 0.5;
    int n_samples = 500;
    std::vector<double> t_grid;
    std::uint64_t seed = 0;
    IntegrateOptions integrate;
    int n_threads = 0; // 0: GSQ_THREADS env or hardware concurrency
};

namespace dtwa_detail {

constexpr int kMomentsPerTime = 7; // Sx, Sy, Sz, Sx2, Sy2, Sz2, SySz

inline bool family_is_disordered(Geometry geom, const GraphParams& p) {
    return geom == Geometry::correlated_bond || p.dilution_p > 0.0;
}

inline void accumulate_sample(const SpinMatrix& s, double* row) {
    double sx = s.col(0).sum(), sy = s.col(1).sum(), sz = s.col(2).sum();
    row[0] = sx;
    row[1] = sy;
    row[2] = sz;
    row[3] = sx * sx;
    row[4] = sy * sy;
    row[5] = sz * sz;
    row[6] = sy * sz;
}

// xi^2, <Sx>, m_xy and the transverse (co)variances from moment averages.
struct MomentView {
    double sx, sy, sz, sx2, sy2, sz2, syz;
};

struct PointEstimates {
    double xi2, sx, var_min, var_y, var_z, cov_yz, m_xy;
};

inline PointEstimates estimate(const MomentView& m, double n_sites) {
    PointEstimates e;
    e.var_y = m.sy2 - m.sy * m.sy;
    e.var_z = m.sz2 - m.sz * m.sz;
    e.cov_yz = m.syz - m.sy * m.sz;
    double mid = 0.5 * (e.var_y + e.var_z);
    double rad = 0.5 * std::sqrt((e.var_z - e.var_y) * (e.var_z - e.var_y) + 4.0 * e.cov_yz * e.cov_yz);
    e.var_min = mid - rad;
    e.sx = m.sx;
    e.xi2 = n_sites * e.var_min / (m.sx * m.sx);
    e.m_xy = std::sqrt(std::max(0.0, m.sx2 + m.sy2)) / n_sites;
    return e;
}

} // namespace dtwa_detail

struct EnsembleMoments {
    std::vector<double> times;
    int n_samples = 0;
    double spin_s = 0.5;
    std::vector<double> active_counts; // active sites per sample
    // per sample: kMomentsPerTime contiguous values per time point
    std::vector<std::vector<double>> rows;

    double mean_active() const {
        double m = 0;
        for (double a : active_counts) m += a;
        return active_counts.empty() ? 0.0 : m / static_cast<double>(active_counts.size());
    }
};

// Run (or extend) the raw per-sample moment table.
inline EnsembleMoments run_ensemble_moments(const EnsembleConfig& cfg, const EnsembleMoments* resume = nullptr) {
    if (cfg.n_samples < 2) throw std::invalid_argument("run_ensemble: need >= 2 samples");
    if (cfg.t_grid.empty()) throw std::invalid_argument("run_ensemble: empty time grid");

    EnsembleMoments acc;
    acc.times = cfg.t_grid;
    acc.spin_s = cfg.spin_s;
    acc.rows.resize(static_cast<std::size_t>(cfg.n_samples));
    acc.active_counts.assign(static_cast<std::size_t>(cfg.n_samples), 0.0);

    int first = 0;
    if (resume) {
        if (resume->times != cfg.t_grid)
            throw std::invalid_argument("run_ensemble: checkpoint time grid mismatch");
        first = std::min(resume->n_samples, cfg.n_samples);
        for (int i = 0; i < first; ++i) {
            acc.rows[static_cast<std::size_t>(i)] = resume->rows[static_cast<std::size_t>(i)];
            acc.active_counts[static_cast<std::size_t>(i)] = resume->active_counts[static_cast<std::size_t>(i)];
        }
    }

    const bool disordered = dtwa_detail::family_is_disordered(cfg.geometry, cfg.params);
    std::shared_ptr<const Graph> shared_graph;
    if (!disordered)
        shared_graph = std::make_shared<Graph>(build_graph(cfg.geometry, cfg.params, cfg.n, cfg.seed));

    const std::size_t nt = cfg.t_grid.size();
    parallel_for_index(cfg.n_samples - first, cfg.n_threads, [&](int task) {
        int k = first + task;
        std::uint64_t sk = sample_seed(cfg.seed, static_cast<std::uint64_t>(k));
        std::shared_ptr<const Graph> graph = shared_graph;
        if (disordered)
            graph = std::make_shared<Graph>(build_graph(cfg.geometry, cfg.params, cfg.n, sk));

        CouplingField fld(*graph, cfg.delta);
        fld.prepare_buffers();
        Rng init_rng(sk, RngStream::dtwa);
        SpinMatrix s0 = sample_initial(fld.size(), cfg.spin_s, init_rng);

        auto& row = acc.rows[static_cast<std::size_t>(k)];
        row.assign(nt * dtwa_detail::kMomentsPerTime, 0.0);
        SpinMatrix scratch(fld.size(), 3);
        auto energy = [&](const SpinMatrix& sp) mutable { return fld.energy(sp, scratch); };
        integrate_observe(
            s0, std::ref(fld), cfg.spin_s, cfg.t_grid, cfg.integrate,
            [&](std::size_t gi, double, const SpinMatrix& sp) {
                dtwa_detail::accumulate_sample(sp, row.data() + gi * dtwa_detail::kMomentsPerTime);
            },
            energy);
        acc.active_counts[static_cast<std::size_t>(k)] = static_cast<double>(fld.size());
    });

    acc.n_samples = cfg.n_samples;
    return acc;
}

// Reduce the moment table to a squeezing trace. Error bars are leave-one-out
// jackknife estimates (first-order delta method) for the moment ratios.
inline SqueezeTrace reduce_ensemble(const EnsembleMoments& acc) {
    const int ns = acc.n_samples;
    const std::size_t nt = acc.times.size();
    constexpr int M = dtwa_detail::kMomentsPerTime;
    const double n_sites = acc.mean_active();

    SqueezeTrace tr;
    tr.times = acc.times;
    tr.n_samples = ns;
    tr.n_sites = static_cast<int>(std::lround(n_sites));
    tr.xi2.resize(nt);
    tr.xi2_err.resize(nt);
    tr.sx.resize(nt);
    tr.sx_err.resize(nt);
    tr.var_min.resize(nt);
    tr.var_y.resize(nt);
    tr.var_z.resize(nt);
    tr.cov_yz.resize(nt);
    tr.m_xy.resize(nt);
    tr.m_xy_err.resize(nt);

    std::vector<double> tot(M), jk_xi(static_cast<std::size_t>(ns)), jk_m(static_cast<std::size_t>(ns));
    for (std::size_t ti = 0; ti < nt; ++ti) {
        std::fill(tot.begin(), tot.end(), 0.0);
        for (int k = 0; k < ns; ++k) {
            const double* row = acc.rows[static_cast<std::size_t>(k)].data() + ti * M;
            for (int m = 0; m < M; ++m) tot[static_cast<std::size_t>(m)] += row[m];
        }
        auto view = [&](const double* t, double cnt) {
            dtwa_detail::MomentView v;
            v.sx = t[0] / cnt;
            v.sy = t[1] / cnt;
            v.sz = t[2] / cnt;
            v.sx2 = t[3] / cnt;
            v.sy2 = t[4] / cnt;
            v.sz2 = t[5] / cnt;
            v.syz = t[6] / cnt;
            return v;
        };
        auto full = dtwa_detail::estimate(view(tot.data(), ns), n_sites);
        tr.xi2[ti] = full.xi2;
        tr.sx[ti] = full.sx;
        tr.var_min[ti] = full.var_min;
        tr.var_y[ti] = full.var_y;
        tr.var_z[ti] = full.var_z;
        tr.cov_yz[ti] = full.cov_yz;
        tr.m_xy[ti] = full.m_xy;

        // plain standard error for <Sx>
        double var_sx = 0.0;
        double mean_sx = tot[0] / ns;
        for (int k = 0; k < ns; ++k) {
            double d = acc.rows[static_cast<std::size_t>(k)][ti * M] - mean_sx;
            var_sx += d * d;
        }
        tr.sx_err[ti] = std::sqrt(var_sx / (ns - 1.0) / ns);

        // jackknife for the ratio estimators
        double loo[M];
        for (int k = 0; k < ns; ++k) {
            const double* row = acc.rows[static_cast<std::size_t>(k)].data() + ti * M;
            for (int m = 0; m < M; ++m) loo[m] = tot[static_cast<std::size_t>(m)] - row[m];
            auto e = dtwa_detail::estimate(view(loo, ns - 1.0), n_sites);
            jk_xi[static_cast<std::size_t>(k)] = e.xi2;
            jk_m[static_cast<std::size_t>(k)] = e.m_xy;
        }
        auto jk_err = [&](const std::vector<double>& v) {
            double m = 0;
            for (double x : v) m += x;
            m /= ns;
            double ss = 0;
            for (double x : v) ss += (x - m) * (x - m);
            return std::sqrt((ns - 1.0) / ns * ss);
        };
        tr.xi2_err[ti] = jk_err(jk_xi);
        tr.m_xy_err[ti] = jk_err(jk_m);

        if (tr.breakdown_index < 0 && full.sx <= 0.0) tr.breakdown_index = static_cast<int>(ti);
    }
    return tr;
}

inline SqueezeTrace run_ensemble(const EnsembleConfig& cfg) {
    return reduce_ensemble(run_ensemble_moments(cfg));
}

} // namespace gsq

#endif
