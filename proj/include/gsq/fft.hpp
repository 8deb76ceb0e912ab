// Circulant matrix-vector products and circulant eigenvalues via FFTW.
//
// Translation-invariant coupling matrices (clean ring / PW2 / triangular
// torus) are circulant, so J*x costs O(n log n) and the full Laplacian
// spectrum is available exactly from the Fourier transform of one coupling
// row. Plans are created with FFTW_ESTIMATE so results are reproducible
// bit-for-bit (no timing-dependent algorithm selection).
//
// A CirculantKernel instance is not safe for concurrent apply() calls; use
// one instance per thread.

#ifndef GSQ_FFT_HPP
#define GSQ_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace gsq {

namespace fft_detail {
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace fft_detail

class CirculantKernel {
public:
    explicit CirculantKernel(const std::vector<double>& kernel) : n_(static_cast<int>(kernel.size())) {
        if (n_ < 2) throw std::invalid_argument("CirculantKernel: kernel too short");
        nc_ = n_ / 2 + 1;
        real_ = fftw_alloc_real(static_cast<std::size_t>(n_));
        freq_ = fftw_alloc_complex(static_cast<std::size_t>(nc_));
        kfreq_ = fftw_alloc_complex(static_cast<std::size_t>(nc_));
        {
            std::lock_guard<std::mutex> lock(fft_detail::planner_mutex());
            fwd_ = fftw_plan_dft_r2c_1d(n_, real_, freq_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_1d(n_, freq_, real_, FFTW_ESTIMATE);
        }
        for (int i = 0; i < n_; ++i) real_[i] = kernel[static_cast<std::size_t>(i)];
        fftw_execute(fwd_);
        for (int i = 0; i < nc_; ++i) {
            kfreq_[i][0] = freq_[i][0];
            kfreq_[i][1] = freq_[i][1];
        }
    }

    CirculantKernel(const CirculantKernel&) = delete;
    CirculantKernel& operator=(const CirculantKernel&) = delete;

    ~CirculantKernel() {
        std::lock_guard<std::mutex> lock(fft_detail::planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(freq_);
        fftw_free(kfreq_);
    }

    int size() const { return n_; }

    // y = C x where C is the circulant with first row equal to the kernel.
    // For a symmetric kernel, first row and first column coincide.
    void apply(const double* x, double* y) {
        for (int i = 0; i < n_; ++i) real_[i] = x[i];
        fftw_execute(fwd_);
        const double scale = 1.0 / n_;
        for (int i = 0; i < nc_; ++i) {
            double re = freq_[i][0] * kfreq_[i][0] - freq_[i][1] * kfreq_[i][1];
            double im = freq_[i][0] * kfreq_[i][1] + freq_[i][1] * kfreq_[i][0];
            freq_[i][0] = re * scale;
            freq_[i][1] = im * scale;
        }
        fftw_execute(bwd_);
        for (int i = 0; i < n_; ++i) y[i] = real_[i];
    }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.resize(n_);
        apply(x.data(), y.data());
    }

private:
    int n_, nc_;
    double* real_;
    fftw_complex* freq_;
    fftw_complex* kfreq_;
    fftw_plan fwd_, bwd_;
};

// Exact eigenvalues of a 1d circulant with symmetric real kernel:
// lambda_m = sum_j c_j cos(2 pi m j / n), m = 0..n-1 (unsorted).
inline std::vector<double> circulant_eigenvalues_1d(const std::vector<double>& kernel) {
    int n = static_cast<int>(kernel.size());
    int nc = n / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(nc));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fft_detail::planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    for (int i = 0; i < n; ++i) in[i] = kernel[static_cast<std::size_t>(i)];
    fftw_execute(plan);
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int m = 0; m < nc; ++m) ev[static_cast<std::size_t>(m)] = out[m][0];
    for (int m = nc; m < n; ++m) ev[static_cast<std::size_t>(m)] = out[n - m][0]; // conjugate symmetry
    {
        std::lock_guard<std::mutex> lock(fft_detail::planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return ev;
}

// Exact eigenvalues of an L x L block-circulant (2d torus) with symmetric
// real kernel given in row-major (di * L + dj) layout.
inline std::vector<double> circulant_eigenvalues_2d(const std::vector<double>& kernel, int L) {
    if (static_cast<int>(kernel.size()) != L * L)
        throw std::invalid_argument("circulant_eigenvalues_2d: kernel size mismatch");
    int nc = L / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(L) * L);
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(L) * nc);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fft_detail::planner_mutex());
        plan = fftw_plan_dft_r2c_2d(L, L, in, out, FFTW_ESTIMATE);
    }
    for (int i = 0; i < L * L; ++i) in[i] = kernel[static_cast<std::size_t>(i)];
    fftw_execute(plan);
    std::vector<double> ev(static_cast<std::size_t>(L) * L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            int bb = b < nc ? b : L - b;
            int aa = b < nc ? a : (a == 0 ? 0 : L - a);
            ev[static_cast<std::size_t>(a) * L + b] = out[static_cast<std::size_t>(aa) * nc + bb][0];
        }
    {
        std::lock_guard<std::mutex> lock(fft_detail::planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return ev;
}

} // namespace gsq

#endif
