// Graph-Laplacian spectra, spectral-dimension estimates and random-walk
// recurrence.
//
// The Laplacian L = D - J is restricted to active nodes. Full spectra come
// from an exact Fourier evaluation when the graph is translation invariant,
// and from dense diagonalization otherwise (up to a configurable size cap);
// the k smallest modes of large disordered graphs go through Lanczos.

#ifndef GSQ_SPECTRAL_HPP
#define GSQ_SPECTRAL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "gsq/fft.hpp"
#include "gsq/fitting.hpp"
#include "gsq/graph.hpp"
#include "gsq/linalg.hpp"
#include "gsq/percolation.hpp"

namespace gsq {

inline constexpr int kDefaultDenseCap = 4096;

// Dense Laplacian over active nodes (size n_active x n_active).
inline Eigen::MatrixXd laplacian(const Graph& g) {
    auto idx = g.active_indices();
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    std::vector<int> map(static_cast<std::size_t>(g.n_nodes()), -1);
    for (int k = 0; k < m; ++k) map[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = k;
    g.for_each_edge([&](int i, int j, double w) {
        int a = map[static_cast<std::size_t>(i)], b = map[static_cast<std::size_t>(j)];
        L(a, a) += w;
        L(b, b) += w;
        L(a, b) -= w;
        L(b, a) -= w;
    });
    return L;
}

namespace spectral_detail {

inline bool is_connected(const Graph& g) {
    auto rep = find_clusters(g);
    return rep.components.size() == 1 && rep.giant_size == g.n_active() && g.n_active() > 0;
}

// Exact Laplacian spectrum of a translation-invariant graph from the Fourier
// transform of one coupling row: lambda_m = deg - Jhat_m.
inline Eigen::VectorXd circulant_laplacian_eigenvalues(const Graph& g) {
    auto kernel = g.circulant_kernel();
    double deg = 0.0;
    for (double w : kernel) deg += w;
    std::vector<double> jhat;
    if (g.symmetry() == graph_detail::Symmetry::circulant_torus2d) {
        int L = graph_detail::int_sqrt(g.n_nodes());
        jhat = circulant_eigenvalues_2d(kernel, L);
    } else {
        jhat = circulant_eigenvalues_1d(kernel);
    }
    Eigen::VectorXd ev(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) ev[i] = deg - jhat[static_cast<std::size_t>(i)];
    std::sort(ev.data(), ev.data() + ev.size());
    // clamp the tiny negative round-off on the zero mode
    if (std::abs(ev[0]) < 1e-12 * std::max(1.0, std::abs(ev[ev.size() - 1]))) ev[0] = std::max(ev[0], 0.0);
    return ev;
}

} // namespace spectral_detail

// Full Laplacian spectrum, ascending. Translation-invariant graphs are
// evaluated exactly in Fourier space at any size; everything else is dense
// diagonalization up to dense_cap active nodes.
inline Eigen::VectorXd laplacian_eigenvalues(const Graph& g, int dense_cap = kDefaultDenseCap) {
    if (g.symmetry() != graph_detail::Symmetry::none)
        return spectral_detail::circulant_laplacian_eigenvalues(g);
    if (g.n_active() > dense_cap)
        throw std::invalid_argument("laplacian_eigenvalues: graph exceeds dense size cap " +
                                    std::to_string(dense_cap) + "; use extreme-mode solver");
    return dense_symmetric_eigenvalues(laplacian(g));
}

// k smallest Laplacian eigenvalues via Lanczos (any size, any graph).
inline LanczosResult laplacian_extreme_eigenvalues(const Graph& g, int k, LanczosOptions opt = {}) {
    auto idx = g.active_indices();
    const int m = static_cast<int>(idx.size());
    Eigen::VectorXd deg_full = g.degrees();
    Eigen::VectorXd deg(m);
    for (int i = 0; i < m; ++i) deg[i] = deg_full[idx[static_cast<std::size_t>(i)]];

    if (m == g.n_nodes() && !g.is_sparse()) {
        const Eigen::MatrixXd J = g.dense_couplings();
        LinearOperator op = [&](const double* in, double* out) {
            Eigen::Map<const Eigen::VectorXd> x(in, m);
            Eigen::Map<Eigen::VectorXd> y(out, m);
            y.noalias() = -(J * x);
            y.array() += deg.array() * x.array();
        };
        return lanczos_lowest(op, m, k, opt);
    }

    // compressed sparse/dense apply through scatter-gather
    Eigen::MatrixXd xfull = Eigen::MatrixXd::Zero(g.n_nodes(), 1), yfull(g.n_nodes(), 1);
    LinearOperator op = [&, idx](const double* in, double* out) mutable {
        for (int i = 0; i < m; ++i) xfull(idx[static_cast<std::size_t>(i)], 0) = in[i];
        g.apply_couplings(xfull, yfull);
        for (int i = 0; i < m; ++i)
            out[i] = deg[i] * in[i] - yfull(idx[static_cast<std::size_t>(i)], 0);
    };
    return lanczos_lowest(op, m, k, opt);
}

// Smallest nonzero Laplacian eigenvalue (algebraic connectivity) of a
// connected graph.
inline double spectral_gap(const Graph& g, int dense_cap = kDefaultDenseCap) {
    if (g.symmetry() != graph_detail::Symmetry::none || g.n_active() <= dense_cap) {
        Eigen::VectorXd ev = laplacian_eigenvalues(g, dense_cap);
        return ev[1];
    }
    auto res = laplacian_extreme_eigenvalues(g, 2);
    if (!res.converged) throw std::runtime_error("spectral_gap: Lanczos did not converge");
    return res.values[1];
}

struct DsEstimate {
    double ds = 0.0;
    double stderr_ = 0.0;
    bool valid = false;
};

struct SpectralSummary {
    Eigen::VectorXd eigenvalues; // ascending
    double gap = 0.0;            // lambda_1
    std::vector<double> dos_bin_edges;
    std::vector<double> dos_density; // counts / (N * bin width)
    DsEstimate ds_from_dos;          // filled by dos_and_ds
    DsEstimate ds_from_gap;          // filled when a size series is analyzed
    int n_active = 0;
};

// Spectral dimension from the finite-size scaling of the gap,
// gap ~ N^(-2/ds), over a series of (N, gap) points.
inline DsEstimate ds_from_gap(const std::vector<std::pair<double, double>>& size_gap) {
    DsEstimate est;
    if (size_gap.size() < 4) throw std::invalid_argument("ds_from_gap: need >= 4 sizes");
    double nmin = 1e300, nmax = 0;
    std::vector<double> ns, gaps;
    for (auto& [n, gp] : size_gap) {
        nmin = std::min(nmin, n);
        nmax = std::max(nmax, n);
        ns.push_back(n);
        gaps.push_back(gp);
    }
    if (nmax / nmin < 10.0) throw std::invalid_argument("ds_from_gap: sizes must span >= one decade");
    auto f = loglog_fit(ns, gaps);
    if (f.slope >= 0.0) return est; // gap not closing: ds effectively infinite
    est.ds = -2.0 / f.slope;
    est.stderr_ = 2.0 / (f.slope * f.slope) * f.slope_stderr;
    est.valid = true;
    return est;
}

// Convenience: build clean/diluted graphs over a size series and fit ds from
// the gap. Refuses disconnected graphs (their gap reflects components).
inline DsEstimate ds_from_gap_series(const std::function<Graph(int n)>& make_graph,
                                     const std::vector<int>& sizes, int dense_cap = kDefaultDenseCap) {
    std::vector<std::pair<double, double>> pts;
    for (int n : sizes) {
        Graph g = make_graph(n);
        if (!spectral_detail::is_connected(g))
            throw std::runtime_error("ds_from_gap_series: graph at n=" + std::to_string(n) +
                                     " is disconnected");
        pts.emplace_back(static_cast<double>(g.n_active()), spectral_gap(g, dense_cap));
    }
    return ds_from_gap(pts);
}

// Spectral dimension from the low-lambda integrated density of states.
// The cumulative eigenvalue count C(lambda) ~ lambda^(ds/2) is fitted on the
// lowest `low_lambda_fraction` of the nonzero spectrum; the cumulative form
// needs no binning. Refused when the window holds < 20 eigenvalues.
inline DsEstimate dos_and_ds(const Eigen::VectorXd& eigenvalues, double low_lambda_fraction = 0.05) {
    if (low_lambda_fraction <= 0.0 || low_lambda_fraction > 0.2)
        throw std::invalid_argument("dos_and_ds: low_lambda_fraction must be in (0, 0.2]");
    const int n = static_cast<int>(eigenvalues.size());
    double lmax = eigenvalues[n - 1];
    double zero_tol = 1e-9 * std::max(lmax, 1.0);
    int first = 0;
    while (first < n && eigenvalues[first] <= zero_tol) ++first;
    int navail = n - first;
    int K = static_cast<int>(std::floor(low_lambda_fraction * n));
    K = std::min(K, navail);
    if (K < 20) throw std::invalid_argument("dos_and_ds: window holds fewer than 20 eigenvalues");
    std::vector<double> lam, cnt;
    lam.reserve(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        lam.push_back(eigenvalues[first + i]);
        cnt.push_back(static_cast<double>(i + 1));
    }
    auto f = loglog_fit(lam, cnt);
    DsEstimate est;
    est.ds = 2.0 * f.slope;
    est.stderr_ = 2.0 * f.slope_stderr;
    est.valid = f.slope > 0.0;
    return est;
}

inline void fill_dos_histogram(SpectralSummary& s, int nbins = 64) {
    const int n = static_cast<int>(s.eigenvalues.size());
    if (n == 0 || nbins < 1) return;
    double lo = s.eigenvalues[0], hi = s.eigenvalues[n - 1];
    if (hi <= lo) hi = lo + 1.0;
    double w = (hi - lo) / nbins;
    s.dos_bin_edges.resize(static_cast<std::size_t>(nbins) + 1);
    s.dos_density.assign(static_cast<std::size_t>(nbins), 0.0);
    for (int b = 0; b <= nbins; ++b) s.dos_bin_edges[static_cast<std::size_t>(b)] = lo + b * w;
    for (int i = 0; i < n; ++i) {
        int b = std::min(nbins - 1, static_cast<int>((s.eigenvalues[i] - lo) / w));
        s.dos_density[static_cast<std::size_t>(b)] += 1.0 / (n * w);
    }
}

inline SpectralSummary make_spectral_summary(const Graph& g, int dense_cap = kDefaultDenseCap,
                                             double low_lambda_fraction = 0.05, int dos_bins = 64) {
    SpectralSummary s;
    s.eigenvalues = laplacian_eigenvalues(g, dense_cap);
    s.n_active = g.n_active();
    s.gap = s.eigenvalues.size() > 1 ? s.eigenvalues[1] : 0.0;
    fill_dos_histogram(s, dos_bins);
    try {
        s.ds_from_dos = dos_and_ds(s.eigenvalues, low_lambda_fraction);
    } catch (const std::invalid_argument&) {
        s.ds_from_dos.valid = false;
    }
    return s;
}

inline int count_zero_modes(const Eigen::VectorXd& eigenvalues) {
    const int n = static_cast<int>(eigenvalues.size());
    if (n == 0) return 0;
    double tol = 1e-9 * std::max(std::abs(eigenvalues[n - 1]), 1.0);
    int k = 0;
    while (k < n && eigenvalues[k] <= tol) ++k;
    return k;
}

// ---------------------------------------------------------------------------
// Random-walk recurrence

struct RecurrenceTrace {
    std::vector<double> times;
    std::vector<double> p_avg; // node-averaged return probability
    double fitted_slope = 0.0;
    double fitted_slope_stderr = 0.0;
    double fit_t_min = 0.0, fit_t_max = 0.0;
};

struct RecurrenceOptions {
    int dense_cap = 8192;
    double fit_t_min = 1.0; // lower edge of the log-log fit window
    double fit_t_max = 0.0; // 0: automatic, half the gap time 1/mu_1
};

// Node-averaged return probability of the random walk generated by D^-1 L on
// a connected graph: <P(t)> = (1/N) tr exp(-D^-1 L t), evaluated through the
// symmetrized generator D^-1/2 L D^-1/2 whose propagator has the same
// diagonal.
inline RecurrenceTrace recurrence_probability(const Graph& g, const std::vector<double>& times,
                                              RecurrenceOptions opt = {}) {
    if (!spectral_detail::is_connected(g))
        throw std::invalid_argument("recurrence_probability: graph must be a connected component");
    auto idx = g.active_indices();
    const int m = static_cast<int>(idx.size());
    Eigen::VectorXd deg_full = g.degrees();
    for (int i : idx)
        if (deg_full[i] <= 0.0)
            throw std::runtime_error("recurrence_probability: zero-degree node in component");
    if (m > opt.dense_cap) throw std::invalid_argument("recurrence_probability: size exceeds dense cap");

    Eigen::MatrixXd L = laplacian(g);
    Eigen::VectorXd dinv_sqrt(m);
    for (int i = 0; i < m; ++i) dinv_sqrt[i] = 1.0 / std::sqrt(deg_full[idx[static_cast<std::size_t>(i)]]);
    Eigen::MatrixXd M = dinv_sqrt.asDiagonal() * L * dinv_sqrt.asDiagonal();
    // enforce exact symmetry against round-off before diagonalizing
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::VectorXd mu = dense_symmetric_eigenvalues(std::move(M));

    RecurrenceTrace tr;
    tr.times = times;
    tr.p_avg.resize(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double t = times[ti];
        if (t < 0) throw std::invalid_argument("recurrence_probability: negative time");
        double s = 0;
        for (int i = 0; i < m; ++i) s += std::exp(-mu[i] * t);
        tr.p_avg[ti] = s / m;
    }

    double gap = mu[1];
    tr.fit_t_min = opt.fit_t_min;
    tr.fit_t_max = opt.fit_t_max > 0 ? opt.fit_t_max : (gap > 0 ? 0.5 / gap : times.back());
    std::vector<double> fx, fy;
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        if (times[ti] >= tr.fit_t_min && times[ti] <= tr.fit_t_max && tr.p_avg[ti] > 1.5 / m) {
            fx.push_back(times[ti]);
            fy.push_back(tr.p_avg[ti]);
        }
    if (fx.size() >= 3) {
        auto f = loglog_fit(fx, fy);
        tr.fitted_slope = f.slope;
        tr.fitted_slope_stderr = f.slope_stderr;
    }
    return tr;
}

} // namespace gsq

#endif
