#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gsq/analysis.hpp"
#include "gsq/spinwave.hpp"

using namespace gsq;

namespace {

SqueezeTrace synthetic_trace(const std::vector<double>& times, const std::function<double(double)>& f,
                             double err = 0.0) {
    SqueezeTrace tr;
    tr.times = times;
    for (double t : times) {
        tr.xi2.push_back(f(t));
        tr.xi2_err.push_back(err);
        tr.sx.push_back(1.0);
        tr.var_min.push_back(0.0);
    }
    return tr;
}

} // namespace

TEST_CASE("minimum interpolation is exact on quadratic data") {
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(0.1 + 0.37 * i);
    double t0 = 7.7123, y0 = 0.3141, a = 0.05;
    auto tr = synthetic_trace(times, [&](double t) { return y0 + a * (t - t0) * (t - t0); });
    auto m = find_trace_minimum(tr);
    REQUIRE(m.valid);
    CHECK_FALSE(m.at_boundary);
    CHECK(m.t_min == Catch::Approx(t0).margin(1e-8));
    CHECK(m.xi2_min == Catch::Approx(y0).margin(1e-8));
}

TEST_CASE("minimum respects the transient floor and breakdown") {
    std::vector<double> times;
    for (int i = 0; i <= 60; ++i) times.push_back(0.1 * (i + 1));
    // two local minima: spurious early dip at t=0.5, true one at t=4
    auto f = [](double t) {
        double d1 = (t - 0.5) * (t - 0.5), d2 = (t - 4.0) * (t - 4.0);
        return std::min(0.2 + d1, 0.5 + 0.1 * d2);
    };
    auto tr = synthetic_trace(times, f);
    auto m_all = find_trace_minimum(tr, 0.0);
    CHECK(m_all.t_min == Catch::Approx(0.5).margin(1e-6));
    auto m_floor = find_trace_minimum(tr, 1.5);
    CHECK(m_floor.t_min == Catch::Approx(4.0).margin(1e-6));

    tr.breakdown_index = 20; // everything from t=2.1 on is unreliable
    auto m_broken = find_trace_minimum(tr, 1.5);
    REQUIRE(m_broken.valid);
    CHECK(m_broken.at_boundary); // minimum pushed to the truncation edge
}

TEST_CASE("fit_mu_nu") {
    SECTION("recovers exact power laws to 1e-6") {
        std::map<int, SqueezeTrace> traces;
        for (int n : {64, 128, 256, 512, 1024}) {
            std::vector<double> times;
            for (int i = 0; i <= 200; ++i) times.push_back(0.02 * (i + 1) * std::pow(n, 1.0 / 3.0));
            double t0 = 1.3 * std::pow(n, 1.0 / 3.0);
            double y0 = 2.2 * std::pow(n, -2.0 / 3.0);
            traces[n] = synthetic_trace(times, [&](double t) { return y0 + 1e-3 * (t - t0) * (t - t0); });
        }
        auto [mu, nu] = fit_mu_nu(traces);
        CHECK(mu.exponent == Catch::Approx(2.0 / 3.0).margin(1e-6));
        CHECK(nu.exponent == Catch::Approx(1.0 / 3.0).margin(1e-6));
        CHECK(mu.stderr_ > 0.0);
    }
    SECTION("flat synthetic data gives mu = 0") {
        std::map<int, SqueezeTrace> traces;
        for (int n : {64, 256, 1024}) {
            std::vector<double> times;
            for (int i = 0; i <= 100; ++i) times.push_back(0.1 * (i + 1));
            traces[n] = synthetic_trace(times, [&](double t) { return 0.5 + 0.01 * (t - 5.0) * (t - 5.0); });
        }
        auto [mu, nu] = fit_mu_nu(traces);
        CHECK(mu.exponent == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("OAT analytic traces give mu ~ 2/3, nu ~ 1/3") {
        std::map<int, SqueezeTrace> traces;
        for (int n = 64; n <= 4096; n *= 2) {
            double chi = 1.0 / (2.0 * (n - 1.0));
            auto times = log_time_grid(0.05 / chi / std::pow(n, 2.0 / 3.0), 1.5 / chi / std::pow(n, 1.0 / 3.0), 600);
            SqueezeTrace tr;
            tr.times = times;
            for (double t : times) {
                auto rm = rotor_oat_moments(n, chi, t);
                tr.xi2.push_back(n * rm.var_min / (rm.kx * rm.kx));
                tr.sx.push_back(rm.kx);
                tr.var_min.push_back(rm.var_min);
            }
            traces[n] = tr;
        }
        auto [mu, nu] = fit_mu_nu(traces);
        CHECK(std::abs(mu.exponent - 2.0 / 3.0) < 0.05);
        CHECK(std::abs(nu.exponent - 1.0 / 3.0) < 0.05);
    }
}

TEST_CASE("classify_scalability") {
    auto mins = [](std::vector<std::pair<int, std::pair<double, double>>> v) {
        std::map<int, TraceMinimum> m;
        for (auto& [n, ve] : v) {
            TraceMinimum tm;
            tm.xi2_min = ve.first;
            tm.xi2_min_err = ve.second;
            tm.t_min = 1.0;
            tm.valid = true;
            m[n] = tm;
        }
        return m;
    };
    SECTION("clear decrease: scalable") {
        auto c = classify_scalability(mins({{128, {0.5, 0.01}}, {256, {0.33, 0.01}}, {512, {0.21, 0.01}}}));
        CHECK(c == Scalability::scalable);
    }
    SECTION("identical minima: non_scalable") {
        auto c = classify_scalability(mins({{128, {0.5, 0.01}}, {256, {0.5, 0.01}}, {512, {0.5, 0.01}}}));
        CHECK(c == Scalability::non_scalable);
    }
    SECTION("drop smaller than noise: non_scalable") {
        auto c = classify_scalability(mins({{128, {0.50, 0.05}}, {256, {0.49, 0.05}}, {512, {0.48, 0.05}}}));
        CHECK(c == Scalability::non_scalable);
    }
    SECTION("non-monotone with significant spread: undecided") {
        auto c = classify_scalability(mins({{128, {0.5, 0.004}}, {256, {0.6, 0.004}}, {512, {0.4, 0.004}}}));
        CHECK(c == Scalability::undecided);
    }
    SECTION("invariant under uniform rescaling") {
        auto a = mins({{128, {0.5, 0.01}}, {256, {0.33, 0.01}}, {512, {0.21, 0.01}}});
        auto b = mins({{128, {5.0, 0.1}}, {256, {3.3, 0.1}}, {512, {2.1, 0.1}}});
        CHECK(classify_scalability(a) == classify_scalability(b));
    }
    SECTION("requires >= 3 sizes and factor >= 4 span") {
        CHECK_THROWS_AS(classify_scalability(mins({{128, {0.5, 0.01}}, {256, {0.4, 0.01}}})),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            classify_scalability(mins({{128, {0.5, 0.01}}, {192, {0.4, 0.01}}, {256, {0.3, 0.01}}})),
            std::invalid_argument);
    }
}

TEST_CASE("extract_critical_point") {
    SECTION("synthetic step with known threshold 0.5") {
        auto classify = [](double c) {
            return c > 0.5 ? Scalability::scalable : Scalability::non_scalable;
        };
        std::vector<double> grid{0.1, 0.3, 0.45, 0.62, 0.8};
        auto cp = extract_critical_point(grid, classify, 3);
        REQUIRE(cp.valid);
        CHECK(std::abs(cp.value - 0.5) <= cp.half_width + 1e-12);
        CHECK(cp.half_width <= 0.5 * (0.62 - 0.45) / 2.0 + 1e-12); // bisection narrowed it
    }
    SECTION("all scalable: no bracket") {
        auto classify = [](double) { return Scalability::scalable; };
        CHECK_THROWS_AS(extract_critical_point({0.1, 0.2, 0.3}, classify, 1), std::runtime_error);
    }
}

TEST_CASE("test_deltac_scaling recovers synthetic exponents to 1e-6") {
    std::vector<ScalingPoint> pts;
    for (double d : {0.02, 0.05, 0.1, 0.2}) pts.push_back({d, 3.0 * std::pow(d, 0.8), 0.0});
    auto t = test_deltac_scaling(pts, 0.8, 0.05);
    CHECK(t.pass);
    CHECK(t.fit.exponent == Catch::Approx(0.8).margin(1e-6));
    auto t2 = test_deltac_scaling(pts, 1.4, 0.05);
    CHECK_FALSE(t2.pass);
}
