// Dense and iterative symmetric eigensolvers.
//
// Dense problems go through LAPACK's divide-and-conquer driver (dsyevd).
// Extreme eigenvalues of large operators use Lanczos with full
// reorthogonalization and deflation restarts, which handles the degenerate
// spectra typical of translation-invariant graphs.

#ifndef GSQ_LINALG_HPP
#define GSQ_LINALG_HPP

#include <lapacke.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gsq/rng.hpp"

namespace gsq {

// Eigenvalues (ascending) of a symmetric matrix; the input is consumed.
inline Eigen::VectorXd dense_symmetric_eigenvalues(Eigen::MatrixXd a) {
    const int n = static_cast<int>(a.rows());
    Eigen::VectorXd w(n);
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
    return w;
}

// Eigenvalues and eigenvectors (columns, same order) of a symmetric matrix.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> dense_symmetric_eigensystem(Eigen::MatrixXd a) {
    const int n = static_cast<int>(a.rows());
    Eigen::VectorXd w(n);
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
    return {std::move(w), std::move(a)};
}

using LinearOperator = std::function<void(const double* in, double* out)>;

struct LanczosResult {
    Eigen::VectorXd values;   // k smallest, ascending
    Eigen::MatrixXd vectors;  // n x k, empty unless requested
    Eigen::VectorXd residuals; // ||A u - theta u|| estimate per returned value
    int matvecs = 0;
    bool converged = false;
};

struct LanczosOptions {
    double tol = 1e-8;       // residual tolerance relative to spectral scale
    int max_basis = 0;       // 0: automatic (2.5k + 80, capped at n)
    bool want_vectors = false;
    std::uint64_t seed = 0x6C616E637AULL;
};

namespace linalg_detail {

inline void tridiagonal_eigs(const std::vector<double>& alpha, const std::vector<double>& beta,
                             Eigen::VectorXd& theta, Eigen::MatrixXd& s) {
    const int m = static_cast<int>(alpha.size());
    theta.resize(m);
    for (int i = 0; i < m; ++i) theta[i] = alpha[static_cast<std::size_t>(i)];
    std::vector<double> off(static_cast<std::size_t>(std::max(m - 1, 0)));
    for (int i = 0; i + 1 < m; ++i) off[static_cast<std::size_t>(i)] = beta[static_cast<std::size_t>(i)];
    s.resize(m, m);
    int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', m, theta.data(), off.data(), s.data(), m);
    if (info != 0) throw std::runtime_error("dstevd failed, info=" + std::to_string(info));
}

} // namespace linalg_detail

// k smallest eigenvalues of a symmetric operator of dimension n.
//
// Plain Lanczos recovers only one copy of each degenerate eigenvalue per
// Krylov sequence, so whenever the recurrence breaks down (invariant
// subspace) a fresh random start vector is orthogonalized against the whole
// basis; the union of sequences resolves multiplicities.
inline LanczosResult lanczos_lowest(const LinearOperator& op, int n, int k, LanczosOptions opt = {}) {
    if (k < 1 || k > n) throw std::invalid_argument("lanczos_lowest: need 1 <= k <= n");
    int max_basis = opt.max_basis > 0 ? opt.max_basis : std::min(n, 5 * k / 2 + 80);
    if (max_basis < k) max_basis = std::min(n, k);

    Eigen::MatrixXd V(n, max_basis);
    std::vector<double> alpha, beta; // block-tridiagonal entries; beta[j]=0 marks a restart
    alpha.reserve(static_cast<std::size_t>(max_basis));
    beta.reserve(static_cast<std::size_t>(max_basis));

    Rng rng(opt.seed);
    Eigen::VectorXd w(n), v(n);

    auto random_orthonormal = [&](int j) -> bool {
        // draw a random vector orthogonal to the current basis
        for (int attempt = 0; attempt < 8; ++attempt) {
            for (int i = 0; i < n; ++i) v[i] = rng.next_double() - 0.5;
            if (j > 0) {
                Eigen::VectorXd c = V.leftCols(j).transpose() * v;
                v.noalias() -= V.leftCols(j) * c;
                c.noalias() = V.leftCols(j).transpose() * v;
                v.noalias() -= V.leftCols(j) * c;
            }
            double nv = v.norm();
            if (nv > 1e-10 * std::sqrt(static_cast<double>(n))) {
                v /= nv;
                return true;
            }
        }
        return false;
    };

    LanczosResult res;
    if (!random_orthonormal(0)) throw std::runtime_error("lanczos_lowest: cannot start");
    V.col(0) = v;

    int j = 0;
    double prev_beta = 0.0;
    int check_at = std::min(max_basis, std::max(2 * k + 20, 40));
    Eigen::VectorXd theta;
    Eigen::MatrixXd s;

    while (true) {
        op(V.col(j).data(), w.data());
        ++res.matvecs;
        double a = V.col(j).dot(w);
        alpha.push_back(a);
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd c = V.leftCols(j + 1).transpose() * w;
            w.noalias() -= V.leftCols(j + 1) * c;
        }
        double b = w.norm();
        const int m = j + 1;

        bool basis_full = (m == max_basis);
        bool breakdown = (b <= 1e-13 * std::max(1.0, std::abs(a) + prev_beta));
        bool do_check = basis_full || breakdown || m >= check_at;

        if (do_check && m >= 1) {
            linalg_detail::tridiagonal_eigs(alpha, beta, theta, s);
            double scale = std::max(std::abs(theta[0]), std::abs(theta[m - 1]));
            if (scale == 0.0) scale = 1.0;
            int kk = std::min(k, m);
            bool ok = (m >= k);
            Eigen::VectorXd resid(kk);
            for (int i = 0; i < kk; ++i) {
                resid[i] = (breakdown || m == n) ? 0.0 : std::abs(b * s(m - 1, i));
                if (resid[i] > opt.tol * scale) ok = false;
            }
            if ((ok && m >= k) || basis_full || m == n) {
                res.values = theta.head(kk);
                res.residuals = resid;
                res.converged = ok && m >= k;
                if (opt.want_vectors) res.vectors = V.leftCols(m) * s.leftCols(kk);
                return res;
            }
            check_at = std::min(max_basis, m + std::max(40, m / 4));
        }

        if (breakdown) {
            // invariant subspace exhausted: deflation restart
            if (m == n || !random_orthonormal(m)) {
                linalg_detail::tridiagonal_eigs(alpha, beta, theta, s);
                int kk = std::min(k, m);
                res.values = theta.head(kk);
                res.residuals = Eigen::VectorXd::Zero(kk);
                res.converged = (m >= k);
                if (opt.want_vectors) res.vectors = V.leftCols(m) * s.leftCols(kk);
                return res;
            }
            V.col(m) = v;
            beta.push_back(0.0);
            prev_beta = 0.0;
        } else {
            V.col(m) = w / b;
            beta.push_back(b);
            prev_beta = b;
        }
        ++j;
    }
}

} // namespace gsq

#endif
