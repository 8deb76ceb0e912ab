// Least-squares helpers shared by the spectral and analysis layers.

#ifndef GSQ_FITTING_HPP
#define GSQ_FITTING_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gsq {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    int n = 0;
};

// Ordinary least squares y = a + b x with parameter standard errors from the
// residual variance.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need >= 2 matching points");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[static_cast<std::size_t>(i)];
        sy += y[static_cast<std::size_t>(i)];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        double dx = x[static_cast<std::size_t>(i)] - mx;
        sxx += dx * dx;
        sxy += dx * (y[static_cast<std::size_t>(i)] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LinearFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (int i = 0; i < n; ++i) {
        double r = y[static_cast<std::size_t>(i)] - (f.intercept + f.slope * x[static_cast<std::size_t>(i)]);
        ss_res += r * r;
    }
    double var = n > 2 ? ss_res / (n - 2) : 0.0;
    f.slope_stderr = std::sqrt(var / sxx);
    f.intercept_stderr = std::sqrt(var * (1.0 / n + mx * mx / sxx));
    // keep reported uncertainties strictly positive even for exact data
    const double tiny = 1e-12 * (std::abs(f.slope) + 1.0);
    if (f.slope_stderr < tiny) f.slope_stderr = tiny;
    if (f.intercept_stderr < tiny) f.intercept_stderr = tiny;
    return f;
}

inline LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0)
            throw std::invalid_argument("loglog_fit: nonpositive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly);
}

// Vertex of the parabola through three points; exact for quadratic data.
struct ParabolaVertex {
    double x = 0, y = 0;
    bool valid = false;
};

inline ParabolaVertex parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    ParabolaVertex v;
    double d0 = (x0 - x1) * (x0 - x2), d1 = (x1 - x0) * (x1 - x2), d2 = (x2 - x0) * (x2 - x1);
    double a = y0 / d0 + y1 / d1 + y2 / d2;
    double b = -(y0 * (x1 + x2) / d0 + y1 * (x0 + x2) / d1 + y2 * (x0 + x1) / d2);
    if (a <= 0.0 || !std::isfinite(a) || !std::isfinite(b)) return v;
    v.x = -b / (2 * a);
    double c = y0 * x1 * x2 / d0 + y1 * x0 * x2 / d1 + y2 * x0 * x1 / d2;
    v.y = c - b * b / (4 * a);
    v.valid = true;
    return v;
}

} // namespace gsq

#endif
