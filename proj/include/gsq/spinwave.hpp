// Rotor/spin-wave theory of the XXZ model on a graph.
//
// The Hamiltonian convention throughout is H = -sum_{i<j} J_ij (sx sx + sy sy
// + Delta sz sz): each bond counted once. This is fixed by calibration
// against the exact two-spin spectrum and against exact symmetric-sector
// evolution on the complete graph (see the spinwave tests), and makes the
// quadratic bosonic form, the rotor frequency chi = deg (1-Delta)/(2(N-1))
// and the spin-wave dispersion mutually consistent.
//
// The collective zero mode is resummed into a planar rotor that reproduces
// one-axis-twisting dynamics; the n > 0 modes are Bogoliubov quasiparticles
// with frequencies determined by the Laplacian spectrum. Their thermal-like
// population depletes the collective magnetization and eventually invalidates
// the expansion (breakdown flag).

#ifndef GSQ_SPINWAVE_HPP
#define GSQ_SPINWAVE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/fft.hpp"
#include "gsq/graph.hpp"
#include "gsq/linalg.hpp"
#include "gsq/spectral.hpp"
#include "gsq/trace.hpp"

namespace gsq {

struct SWConfig {
    double delta = 0.0;    // z-anisotropy, restricted to (-1, 1]
    double spin_s = 0.5;   // spin length
    bool use_regular_approx = true;

    void validate() const {
        if (delta <= -1.0 || delta > 1.0)
            throw std::invalid_argument("SWConfig: delta must lie in (-1, 1]");
        if (spin_s <= 0.0) throw std::invalid_argument("SWConfig: spin_s must be positive");
    }
};

struct SWSolution {
    Eigen::VectorXd lambdas; // Laplacian eigenvalues, ascending (lambda_0 = 0)
    Eigen::VectorXd omegas;  // spin-wave frequencies, same ordering
    Eigen::VectorXd bog_u;   // Bogoliubov U_n (U_0 = V_0 = 0 by convention)
    Eigen::VectorXd bog_v;
    double chi = 0.0;        // rotor frequency
    double avg_degree = 0.0;
    double spin_s = 0.5;
    double delta = 0.0;
    int n = 0; // number of sites
};

// Quadratic bosonic Hamiltonian matrix over active nodes,
//   [[ A, B ], [ B, A ]],  A = s (D - J (1+Delta)/2),  B = -s J (1-Delta)/2.
// At Delta = 1 the off-diagonal block vanishes and A = s L.
inline Eigen::MatrixXd quadratic_hamiltonian(const Graph& g, const SWConfig& cfg) {
    cfg.validate();
    auto idx = g.active_indices();
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    std::vector<int> map(static_cast<std::size_t>(g.n_nodes()), -1);
    for (int k = 0; k < m; ++k) map[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = k;
    g.for_each_edge([&](int i, int j, double w) {
        int a = map[static_cast<std::size_t>(i)], b = map[static_cast<std::size_t>(j)];
        J(a, b) = w;
        J(b, a) = w;
    });
    Eigen::VectorXd deg = J.rowwise().sum();
    const double s = cfg.spin_s;
    Eigen::MatrixXd A = -s * (1.0 + cfg.delta) / 2.0 * J;
    A.diagonal() += s * deg;
    Eigen::MatrixXd B = -s * (1.0 - cfg.delta) / 2.0 * J;
    Eigen::MatrixXd H(2 * m, 2 * m);
    H.topLeftCorner(m, m) = A;
    H.bottomRightCorner(m, m) = A;
    H.topRightCorner(m, m) = B;
    H.bottomLeftCorner(m, m) = B;
    return H;
}

namespace spinwave_detail {

// Bogoliubov solution of one 2x2 block with diagonal entry a and
// off-diagonal b: omega = sqrt(a^2 - b^2), v^2 = (a/omega - 1)/2,
// u v = -b/(2 omega).
struct Mode {
    double omega, u, v;
};

inline Mode solve_mode(double a, double b, int mode_index) {
    double disc = a * a - b * b;
    if (disc < 0.0) {
        if (disc > -1e-12 * std::max(a * a, 1.0))
            disc = 0.0; // round-off at the stability edge
        else
            throw std::runtime_error("spinwave: dynamical instability at mode " +
                                     std::to_string(mode_index) + " (A^2 < B^2)");
    }
    Mode m;
    m.omega = std::sqrt(disc);
    if (m.omega <= 0.0) {
        m.u = m.v = 0.0; // singular (zero) mode; treated by the rotor sector
        return m;
    }
    double v2 = 0.5 * (a / m.omega - 1.0);
    if (v2 < 0.0) v2 = 0.0;
    m.v = (b > 0 ? -1.0 : 1.0) * std::sqrt(v2);
    m.u = std::sqrt(1.0 + v2);
    return m;
}

} // namespace spinwave_detail

// Rotor frequency chi = avg_degree (1 - Delta) / (2 (N - 1)).
inline double rotor_frequency(const Graph& g, const SWConfig& cfg) {
    cfg.validate();
    if (cfg.delta == 1.0)
        throw std::invalid_argument("rotor_frequency: no rotor dynamics at the Heisenberg point");
    const int n = g.n_active();
    if (n < 2) throw std::invalid_argument("rotor_frequency: need at least two active sites");
    return g.average_degree() * (1.0 - cfg.delta) / (2.0 * (n - 1));
}

// Spin-wave solution in the regular-graph (average-degree) approximation:
// omega_n = s sqrt(lambda_n (Delta lambda_n + avg_deg (1-Delta))).
inline SWSolution regular_approx_spectrum(const Graph& g, const SWConfig& cfg,
                                          int dense_cap = kDefaultDenseCap) {
    cfg.validate();
    SWSolution sol;
    sol.n = g.n_active();
    sol.spin_s = cfg.spin_s;
    sol.delta = cfg.delta;
    sol.avg_degree = g.average_degree();
    sol.lambdas = laplacian_eigenvalues(g, dense_cap);
    sol.chi = cfg.delta < 1.0 ? rotor_frequency(g, cfg) : 0.0;

    const int m = static_cast<int>(sol.lambdas.size());
    sol.omegas.resize(m);
    sol.bog_u.resize(m);
    sol.bog_v.resize(m);
    const double s = cfg.spin_s, deg = sol.avg_degree;
    for (int i = 0; i < m; ++i) {
        double jn = deg - sol.lambdas[i];
        double a = s * (deg - jn * (1.0 + cfg.delta) / 2.0);
        double b = -s * jn * (1.0 - cfg.delta) / 2.0;
        auto md = spinwave_detail::solve_mode(a, b, i);
        sol.omegas[i] = md.omega;
        sol.bog_u[i] = md.u;
        sol.bog_v[i] = md.v;
    }
    return sol;
}

// Real-space spin-wave frequencies from the full quadratic form, without the
// regularity approximation. The 2N x 2N symplectic problem reduces exactly to
// the N x N symmetric spectrum of G^T (A+B) G with A-B = G G^T:
// omega^2 = eig( (A-B)(A+B) ), A+B = s L, A-B = s (D - Delta J).
//
// k = 0 computes the full spectrum (dense, up to dense_cap). k > 0 computes
// the k smallest frequencies matrix-free; this path requires Delta = 0 where
// A - B = s D is diagonal and the similarity is a diagonal scaling.
inline Eigen::VectorXd spinwave_frequencies_full(const Graph& g, const SWConfig& cfg, int k = 0,
                                                 int dense_cap = kDefaultDenseCap) {
    cfg.validate();
    auto idx = g.active_indices();
    const int m = static_cast<int>(idx.size());
    const double s = cfg.spin_s;

    if (cfg.delta == 1.0) {
        // Heisenberg point: omega_n = s lambda_n exactly
        Eigen::VectorXd lam = laplacian_eigenvalues(g, dense_cap);
        return k > 0 ? Eigen::VectorXd(s * lam.head(k)) : Eigen::VectorXd(s * lam);
    }

    if (k > 0) {
        if (cfg.delta != 0.0)
            throw std::invalid_argument(
                "spinwave_frequencies_full: matrix-free mode requires delta = 0; use the dense mode");
        Eigen::VectorXd deg_full = g.degrees();
        Eigen::VectorXd dsqrt(m);
        for (int i = 0; i < m; ++i) {
            double d = deg_full[idx[static_cast<std::size_t>(i)]];
            if (d <= 0.0)
                throw std::runtime_error("spinwave_frequencies_full: zero-degree active node; restrict "
                                         "to the giant component first");
            dsqrt[i] = std::sqrt(d);
        }

        // operator x -> D^1/2 L D^1/2 x with the Laplacian applied through the
        // clean circulant kernel when available
        bool circulant_ok = (g.geometry() == Geometry::ring1d || g.geometry() == Geometry::pw2);
        if (circulant_ok) {
            CirculantKernel circ(clean_coupling_kernel(g.geometry(), g.params(), g.n_nodes()));
            Eigen::VectorXd xfull = Eigen::VectorXd::Zero(g.n_nodes()), yfull(g.n_nodes());
            Eigen::VectorXd tmp(m);
            LinearOperator op = [&](const double* in, double* out) {
                for (int i = 0; i < m; ++i) tmp[i] = dsqrt[i] * in[i];
                xfull.setZero();
                for (int i = 0; i < m; ++i) xfull[idx[static_cast<std::size_t>(i)]] = tmp[i];
                circ.apply(xfull.data(), yfull.data());
                for (int i = 0; i < m; ++i) {
                    double li = deg_full[idx[static_cast<std::size_t>(i)]] * tmp[i] -
                                yfull[idx[static_cast<std::size_t>(i)]];
                    out[i] = dsqrt[i] * li;
                }
            };
            LanczosOptions lopt;
            lopt.max_basis = std::min(m, 2 * k + 240);
            auto res = lanczos_lowest(op, m, k, lopt);
            if (!res.converged)
                throw std::runtime_error("spinwave_frequencies_full: Lanczos did not converge");
            Eigen::VectorXd w(k);
            for (int i = 0; i < k; ++i) w[i] = s * std::sqrt(std::max(0.0, res.values[i]));
            return w;
        }
        Eigen::MatrixXd L = laplacian(g);
        LinearOperator op = [&](const double* in, double* out) {
            Eigen::Map<const Eigen::VectorXd> x(in, m);
            Eigen::Map<Eigen::VectorXd> y(out, m);
            Eigen::VectorXd t = dsqrt.array() * x.array();
            Eigen::VectorXd lt = L * t;
            y = dsqrt.array() * lt.array();
        };
        LanczosOptions lopt;
        lopt.max_basis = std::min(m, 2 * k + 240);
        auto res = lanczos_lowest(op, m, k, lopt);
        if (!res.converged) throw std::runtime_error("spinwave_frequencies_full: Lanczos did not converge");
        Eigen::VectorXd w(k);
        for (int i = 0; i < k; ++i) w[i] = s * std::sqrt(std::max(0.0, res.values[i]));
        return w;
    }

    if (m > dense_cap)
        throw std::invalid_argument("spinwave_frequencies_full: size exceeds dense cap; use k > 0");

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    std::vector<int> map(static_cast<std::size_t>(g.n_nodes()), -1);
    for (int i = 0; i < m; ++i) map[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = i;
    g.for_each_edge([&](int i, int j, double w) {
        int a = map[static_cast<std::size_t>(i)], b = map[static_cast<std::size_t>(j)];
        J(a, b) = w;
        J(b, a) = w;
    });
    Eigen::VectorXd deg = J.rowwise().sum();

    Eigen::MatrixXd ApB = -s * J; // A + B = s L
    ApB.diagonal() += s * deg;
    Eigen::MatrixXd AmB = -s * cfg.delta * J; // A - B = s (D - Delta J), positive definite for |Delta|<1
    AmB.diagonal() += s * deg;

    Eigen::LLT<Eigen::MatrixXd> llt(AmB);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("spinwave_frequencies_full: A - B not positive definite "
                                 "(isolated sites or delta outside (-1,1])");
    Eigen::MatrixXd G = llt.matrixL();
    Eigen::MatrixXd C = G.transpose() * ApB * G;
    C = 0.5 * (C + C.transpose()).eval();
    Eigen::VectorXd w2 = dense_symmetric_eigenvalues(std::move(C));
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = std::sqrt(std::max(0.0, w2[i]));
    std::sort(w.data(), w.data() + m);
    return w;
}

// One-axis-twisting moments of the collective rotor of length Ns:
// K_x(t) and the minimal transverse variance (minimal-eigenvalue branch).
struct RotorMoments {
    double kx;
    double var_min;
};

inline RotorMoments rotor_oat_moments(int n, double chi, double t, double spin_s = 0.5) {
    if (n < 2) throw std::invalid_argument("rotor_oat_moments: n must be >= 2");
    const double Jlen = n * spin_s; // rotor length
    const double twoJ = 2.0 * Jlen;
    const double c = std::cos(chi * t);
    RotorMoments rm;
    rm.kx = Jlen * std::pow(c, twoJ - 1.0);
    const double A = 1.0 - std::pow(std::cos(2.0 * chi * t), twoJ - 2.0);
    const double B = 4.0 * std::sin(chi * t) * std::pow(c, twoJ - 2.0);
    rm.var_min = Jlen / 2.0 + (Jlen * (Jlen - 0.5) / 4.0) * (A - std::sqrt(A * A + B * B));
    return rm;
}

// Spin-wave pair correlations G_n(t) = <a_n^dag a_n> and F_n(t) = <a_n a_n>
// for the n > 0 Bogoliubov modes.
inline void spinwave_populations(const SWSolution& sol, double t, std::vector<double>& G,
                                 std::vector<std::complex<double>>& F) {
    const int m = static_cast<int>(sol.omegas.size());
    G.assign(static_cast<std::size_t>(m), 0.0);
    F.assign(static_cast<std::size_t>(m), {0.0, 0.0});
    for (int i = 0; i < m; ++i) {
        double u = sol.bog_u[i], v = sol.bog_v[i];
        if (u == 0.0 && v == 0.0) continue; // zero mode
        double w = sol.omegas[i];
        G[static_cast<std::size_t>(i)] = 2.0 * u * u * v * v * (1.0 - std::cos(2.0 * w * t));
        std::complex<double> e_m(std::cos(2.0 * w * t), -std::sin(2.0 * w * t));
        F[static_cast<std::size_t>(i)] =
            u * v * (u * u * e_m + v * v * std::conj(e_m) - 2.0 * v * v - 1.0);
    }
}

// Combined rotor + spin-wave squeezing trace on a connected graph:
//   xi^2(t) = 2 s N Var_min(t) / <S_x>(t)^2,
//   <S_x>(t) = Ns cos^(2Ns-1)(chi t) - sum_{n>0} G_n(t).
// The trace is truncated with a breakdown flag once the depleted
// magnetization reaches zero (the expansion is no longer meaningful there).
inline SqueezeTrace xi2_rotor_sw(const Graph& g, const SWConfig& cfg, const std::vector<double>& times,
                                 int dense_cap = kDefaultDenseCap) {
    cfg.validate();
    if (cfg.delta == 1.0)
        throw std::invalid_argument("xi2_rotor_sw: squeezing dynamics undefined at delta = 1");
    SWSolution sol = regular_approx_spectrum(g, cfg, dense_cap);
    const int n = sol.n;
    if (n < 2) throw std::invalid_argument("xi2_rotor_sw: need at least two sites");

    SqueezeTrace tr;
    tr.times = times;
    tr.n_sites = n;
    tr.n_samples = 1;
    const std::size_t nt = times.size();
    tr.xi2.assign(nt, std::numeric_limits<double>::quiet_NaN());
    tr.sx.assign(nt, 0.0);
    tr.var_min.assign(nt, 0.0);

    std::vector<double> G;
    std::vector<std::complex<double>> F;
    for (std::size_t ti = 0; ti < nt; ++ti) {
        double t = times[ti];
        auto rm = rotor_oat_moments(n, sol.chi, t, cfg.spin_s);
        spinwave_populations(sol, t, G, F);
        double depletion = 0.0;
        for (int i = 0; i < n; ++i) depletion += G[static_cast<std::size_t>(i)];
        double sx = rm.kx - depletion;
        tr.sx[ti] = sx;
        tr.var_min[ti] = rm.var_min;
        if (sx <= 0.0) {
            tr.breakdown_index = static_cast<int>(ti);
            break;
        }
        tr.xi2[ti] = 2.0 * cfg.spin_s * n * rm.var_min / (sx * sx);
    }
    return tr;
}

// Perturbative criterion near the Heisenberg point: the anisotropy-induced
// splitting delta_eps = s (1-Delta) avg_deg competes with the Laplacian gap;
// equality defines Delta_c through 1 - Delta_c = gap / (s avg_deg).
struct HeisenbergPerturbation {
    double delta_eps = 0.0;    // s (1 - delta) avg_deg at the queried delta
    double delta_lambda = 0.0; // Laplacian spectral gap
    double delta_c = 0.0;
    bool in_range = true; // false when 1 - delta_c falls outside (0, 2)
};

inline HeisenbergPerturbation heisenberg_perturbation(const Graph& g, double delta, double spin_s = 0.5,
                                                      int dense_cap = kDefaultDenseCap) {
    HeisenbergPerturbation hp;
    double deg = g.average_degree();
    if (deg <= 0.0) throw std::invalid_argument("heisenberg_perturbation: average degree is zero");
    hp.delta_eps = spin_s * (1.0 - delta) * deg;
    hp.delta_lambda = spectral_gap(g, dense_cap);
    double one_minus = hp.delta_lambda / (spin_s * deg);
    hp.delta_c = 1.0 - one_minus;
    hp.in_range = one_minus > 0.0 && one_minus < 2.0;
    return hp;
}

} // namespace gsq

#endif
