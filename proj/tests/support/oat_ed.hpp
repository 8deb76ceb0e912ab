// Exact quantum evolution of the XXZ model on the Kac-normalized complete
// graph, restricted to the symmetric (Dicke) sector of N spins-1/2.
//
// With J = 1/(N-1) and H = -sum_{i<j} J (sx sx + sy sy + Delta sz sz), the
// identity sum_{i<j}(s_i^x s_j^x + s_i^y s_j^y) = (S_x^2 + S_y^2 - N/2)/2
// makes H diagonal in the |S=N/2, M> basis up to constants:
//     H = const + chi S_z^2,   chi = J (1 - Delta) / 2 = (1-Delta)/(2(N-1)).
// Starting from the x-polarized coherent state, all squeezing observables
// follow from ladder-operator matrix elements. This file is a test-only
// oracle, independent of the library's rotor/spin-wave implementation.

#ifndef GSQ_TESTS_OAT_ED_HPP
#define GSQ_TESTS_OAT_ED_HPP

#include <cmath>
#include <complex>
#include <vector>

namespace gsq_test {

struct EdMoments {
    double sx, sy, sz;
    double var_y, var_z, cov_yz;
    double xi2;
};

class DickeOat {
public:
    // chi: coefficient of S_z^2 in the effective Hamiltonian
    DickeOat(int n, double chi) : n_(n), chi_(chi), S_(0.5 * n) {
        // CSS_x amplitudes in the z basis: c_M = sqrt(binom(N, N/2+M)) / 2^(N/2)
        const int dim = n_ + 1;
        c_.resize(dim);
        std::vector<double> logfact(static_cast<std::size_t>(n_) + 1, 0.0);
        for (int k = 2; k <= n_; ++k)
            logfact[static_cast<std::size_t>(k)] = logfact[static_cast<std::size_t>(k) - 1] + std::log(k);
        for (int idx = 0; idx < dim; ++idx) {
            double logbinom = logfact[static_cast<std::size_t>(n_)] - logfact[static_cast<std::size_t>(idx)] -
                              logfact[static_cast<std::size_t>(n_ - idx)];
            c_[static_cast<std::size_t>(idx)] = std::exp(0.5 * logbinom - 0.5 * n_ * std::log(2.0));
        }
    }

    EdMoments moments(double t) const {
        using cd = std::complex<double>;
        const int dim = n_ + 1;
        std::vector<cd> psi(static_cast<std::size_t>(dim));
        for (int idx = 0; idx < dim; ++idx) {
            double M = idx - S_;
            double phase = -chi_ * M * M * t;
            psi[static_cast<std::size_t>(idx)] = c_[static_cast<std::size_t>(idx)] * cd(std::cos(phase), std::sin(phase));
        }
        auto A = [&](double M) { return std::sqrt(S_ * (S_ + 1.0) - M * (M + 1.0)); };

        cd sp = 0, sp2 = 0, spz = 0;
        double sz = 0, sz2 = 0;
        for (int idx = 0; idx < dim; ++idx) {
            double M = idx - S_;
            double pr = std::norm(psi[static_cast<std::size_t>(idx)]);
            sz += pr * M;
            sz2 += pr * M * M;
            if (idx + 1 < dim)
                sp += std::conj(psi[static_cast<std::size_t>(idx) + 1]) * psi[static_cast<std::size_t>(idx)] * A(M);
            if (idx + 2 < dim)
                sp2 += std::conj(psi[static_cast<std::size_t>(idx) + 2]) * psi[static_cast<std::size_t>(idx)] *
                       A(M + 1.0) * A(M);
            if (idx + 1 < dim)
                spz += std::conj(psi[static_cast<std::size_t>(idx) + 1]) * psi[static_cast<std::size_t>(idx)] *
                       A(M) * (2.0 * M + 1.0);
        }

        EdMoments m;
        m.sx = sp.real();
        m.sy = sp.imag();
        m.sz = sz;
        double spsm_sum = 2.0 * (S_ * (S_ + 1.0) - sz2); // <S+S- + S-S+>
        double sy2 = 0.25 * (spsm_sum - 2.0 * sp2.real());
        m.var_y = sy2 - m.sy * m.sy;
        m.var_z = sz2 - sz * sz;
        // {S_y, S_z}/2 = Im<S_+ S_z + S_z S_+>/2
        m.cov_yz = 0.5 * spz.imag() - m.sy * m.sz;

        double mid = 0.5 * (m.var_y + m.var_z);
        double rad = 0.5 * std::hypot(m.var_z - m.var_y, 2.0 * m.cov_yz);
        double var_min = mid - rad;
        m.xi2 = n_ * var_min / (m.sx * m.sx);
        return m;
    }

    // interior minimum of xi^2 over a dense grid, parabola-refined
    struct Minimum {
        double t_min, xi2_min;
    };
    Minimum find_minimum(double t_max, int points = 4000) const {
        double best_t = 0, best = 1e300;
        for (int i = 1; i < points; ++i) {
            double t = t_max * i / points;
            double v = moments(t).xi2;
            if (v < best) {
                best = v;
                best_t = t;
            }
        }
        double h = t_max / points;
        double y0 = moments(best_t - h).xi2, y1 = best, y2 = moments(best_t + h).xi2;
        double denom = y0 - 2 * y1 + y2;
        if (denom > 0) {
            double d = 0.5 * (y0 - y2) / denom;
            best_t += d * h;
            best = moments(best_t).xi2;
        }
        return {best_t, best};
    }

private:
    int n_;
    double chi_, S_;
    std::vector<double> c_;
};

} // namespace gsq_test

#endif
