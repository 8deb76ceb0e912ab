#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "gsq/spinwave.hpp"
#include "support/oat_ed.hpp"

using namespace gsq;

namespace {

// Independent Kitagawa-Ueda closed form for H = chi S_z^2, N spins-1/2.
double ku_xi2(int n, double chi, double t) {
    double c = std::cos(chi * t);
    double kx = 0.5 * n * std::pow(c, n - 1.0);
    double A = 1.0 - std::pow(std::cos(2.0 * chi * t), n - 2.0);
    double B = 4.0 * std::sin(chi * t) * std::pow(c, n - 2.0);
    double varmin = 0.25 * n + n * (n - 1.0) / 16.0 * (A - std::sqrt(A * A + B * B));
    return n * varmin / (kx * kx);
}

} // namespace

TEST_CASE("quadratic hamiltonian structure") {
    GraphParams p;
    p.alpha = 1.1;
    Graph g = build_diluted_lr_lattice(p, 6, 0);

    SECTION("delta=1: off-diagonal block vanishes, diagonal is s L") {
        SWConfig cfg;
        cfg.delta = 1.0;
        Eigen::MatrixXd H = quadratic_hamiltonian(g, cfg);
        int m = 6;
        CHECK(H.topRightCorner(m, m).cwiseAbs().maxCoeff() == 0.0);
        Eigen::MatrixXd sL = 0.5 * laplacian(g);
        CHECK((H.topLeftCorner(m, m) - sL).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("symplectic eigenvalues of the 4x4 two-spin block match the reduced form") {
        GraphParams q;
        q.alpha = 1.0;
        q.apply_kac = false;
        Graph g2 = build_diluted_lr_lattice(q, 2, 0);
        SWConfig cfg;
        cfg.delta = 0.0;
        Eigen::MatrixXd H = quadratic_hamiltonian(g2, cfg); // 4x4
        Eigen::MatrixXd eta = Eigen::MatrixXd::Identity(4, 4);
        eta(2, 2) = eta(3, 3) = -1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(eta * H);
        std::vector<double> freqs;
        for (int i = 0; i < 4; ++i) {
            auto ev = es.eigenvalues()[i];
            CHECK(std::abs(ev.imag()) < 1e-10);
            if (ev.real() > 1e-12) freqs.push_back(ev.real());
        }
        std::sort(freqs.begin(), freqs.end());
        auto w = spinwave_frequencies_full(g2, cfg);
        // one zero mode and one positive mode
        CHECK(w[0] == Catch::Approx(0.0).margin(1e-10));
        REQUIRE(freqs.size() == 1);
        CHECK(freqs[0] == Catch::Approx(w[1]).epsilon(1e-10));
        // closed form: omega = s J sqrt(2 (1 + Delta)) with J = 1, s = 1/2
        CHECK(w[1] == Catch::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("two-spin calibration at the Heisenberg point") {
    // exact singlet-triplet gap of H = -J s1.s2 equals the spin-wave
    // excitation energy s*lambda_1 = J; this pins the bond-counting convention
    GraphParams q;
    q.alpha = 1.0;
    q.apply_kac = false;
    Graph g2 = build_diluted_lr_lattice(q, 2, 0);

    // exact 4-dim spectrum in the z basis
    Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
    double J = 1.0, D = 1.0;
    // basis |uu>, |ud>, |du>, |dd>
    H(0, 0) = H(3, 3) = -J * D * 0.25;
    H(1, 1) = H(2, 2) = J * D * 0.25;
    H(1, 2) = H(2, 1) = -J * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(H);
    double gap = es.eigenvalues()[3] - es.eigenvalues()[0]; // singlet above triplet

    SWConfig cfg;
    cfg.delta = 1.0;
    auto w = spinwave_frequencies_full(g2, cfg);
    CHECK(w[1] == Catch::Approx(gap).epsilon(1e-12));
    CHECK(gap == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("regular approximation spectrum") {
    SECTION("delta=1: omega = s lambda") {
        GraphParams p;
        p.alpha = 1.4;
        Graph g = build_diluted_lr_lattice(p, 64, 0);
        SWConfig cfg;
        cfg.delta = 1.0;
        auto sol = regular_approx_spectrum(g, cfg);
        for (int i = 0; i < 64; ++i)
            CHECK(sol.omegas[i] == Catch::Approx(0.5 * sol.lambdas[i]).margin(1e-12));
    }
    SECTION("canonical constraint u^2 - v^2 = 1 on every nonzero mode") {
        GraphParams p;
        p.alpha = 1.2;
        p.dilution_p = 0.2;
        Graph g = giant_component(build_diluted_lr_lattice(p, 256, 9));
        SWConfig cfg;
        cfg.delta = -0.4;
        auto sol = regular_approx_spectrum(g, cfg);
        for (int i = 1; i < sol.n; ++i) {
            double u = sol.bog_u[i], v = sol.bog_v[i];
            CHECK(u * u - v * v == Catch::Approx(1.0).epsilon(1e-10));
        }
        CHECK(sol.omegas[0] == 0.0);
    }
    SECTION("dispersion identity omega = s sqrt(lambda(Delta lambda + deg(1-Delta)))") {
        GraphParams p;
        p.alpha = 0.9;
        Graph g = build_pw2_graph(p, 128, 0);
        SWConfig cfg;
        cfg.delta = 0.35;
        auto sol = regular_approx_spectrum(g, cfg);
        for (int i = 1; i < sol.n; ++i) {
            double lam = sol.lambdas[i];
            double expect = 0.5 * std::sqrt(lam * (cfg.delta * lam + sol.avg_degree * (1.0 - cfg.delta)));
            CHECK(sol.omegas[i] == Catch::Approx(expect).epsilon(1e-8));
        }
    }
    SECTION("regular approx agrees with the full solution on a regular graph") {
        GraphParams p;
        p.alpha = 1.6;
        Graph g = build_diluted_lr_lattice(p, 128, 0); // clean: exactly regular
        SWConfig cfg;
        cfg.delta = 0.3;
        auto sol = regular_approx_spectrum(g, cfg);
        auto full = spinwave_frequencies_full(g, cfg);
        Eigen::VectorXd approx = sol.omegas;
        std::sort(approx.data(), approx.data() + approx.size());
        for (int i = 0; i < 128; ++i) CHECK(approx[i] == Catch::Approx(full[i]).margin(1e-9));
    }
}

TEST_CASE("matrix-free lowest-k spin-wave frequencies match dense") {
    GraphParams p;
    p.alpha = 1.4;
    p.dilution_p = 0.3;
    Graph g = giant_component(build_diluted_lr_lattice(p, 512, 33));
    SWConfig cfg;
    cfg.delta = 0.0;
    auto dense = spinwave_frequencies_full(g, cfg);
    auto low = spinwave_frequencies_full(g, cfg, 24);
    for (int i = 0; i < 24; ++i) CHECK(low[i] == Catch::Approx(dense[i]).margin(1e-7 * dense[dense.size() - 1]));
}

TEST_CASE("rotor frequency") {
    SECTION("complete Kac graph at delta=0: chi = 1/(2(N-1))") {
        Graph g = build_complete_kac_graph(20);
        SWConfig cfg;
        cfg.delta = 0.0;
        CHECK(rotor_frequency(g, cfg) == Catch::Approx(1.0 / (2.0 * 19.0)).epsilon(1e-12));
    }
    SECTION("delta -> 1 vanishes; delta = 1 is an error") {
        Graph g = build_complete_kac_graph(8);
        SWConfig cfg;
        cfg.delta = 0.999;
        CHECK(rotor_frequency(g, cfg) == Catch::Approx(0.001 / 14.0).epsilon(1e-9));
        cfg.delta = 1.0;
        CHECK_THROWS_AS(rotor_frequency(g, cfg), std::invalid_argument);
    }
    SECTION("doubling the degree doubles chi") {
        GraphParams p;
        p.alpha = 0.0;
        p.apply_kac = false;
        Graph g = build_diluted_lr_lattice(p, 10, 0); // complete, J=1: deg = 9
        SWConfig cfg;
        cfg.delta = 0.5;
        double chi1 = rotor_frequency(g, cfg);
        CHECK(chi1 == Catch::Approx(9.0 * 0.5 / 18.0).epsilon(1e-12));
    }
}

TEST_CASE("rotor OAT moments") {
    SECTION("t=0: coherent state") {
        auto rm = rotor_oat_moments(24, 0.02, 0.0);
        CHECK(rm.kx == Catch::Approx(12.0));
        CHECK(rm.var_min == Catch::Approx(6.0));
        // xi^2 = 2 s N var / kx^2 = 1
        CHECK(2.0 * 0.5 * 24 * rm.var_min / (rm.kx * rm.kx) == Catch::Approx(1.0));
    }
    SECTION("chi t = pi/2 with even N: Kx = 0") {
        auto rm = rotor_oat_moments(8, 1.0, M_PI / 2.0);
        CHECK(rm.kx == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("N=20 minimum matches exact symmetric-sector evolution to <1%") {
        const int n = 20;
        const double chi = 1.0 / (2.0 * (n - 1.0));
        gsq_test::DickeOat ed(n, chi);
        auto exact = ed.find_minimum(0.5 / chi);

        double best = 1e300, best_t = 0;
        for (int i = 1; i < 4000; ++i) {
            double t = 0.5 / chi * i / 4000.0;
            auto rm = rotor_oat_moments(n, chi, t);
            double xi2 = n * rm.var_min / (rm.kx * rm.kx);
            if (xi2 < best) {
                best = xi2;
                best_t = t;
            }
        }
        CHECK(best == Catch::Approx(exact.xi2_min).epsilon(0.01));
        CHECK(best_t == Catch::Approx(exact.t_min).epsilon(0.01));
    }
}

TEST_CASE("spin-wave populations") {
    GraphParams p;
    p.alpha = 1.3;
    Graph g = build_diluted_lr_lattice(p, 32, 0);
    SWConfig cfg;
    cfg.delta = 0.2;
    auto sol = regular_approx_spectrum(g, cfg);
    std::vector<double> G;
    std::vector<std::complex<double>> F;

    SECTION("G_n(0) = 0 and G_n >= 0, bounded by 4 u^2 v^2") {
        spinwave_populations(sol, 0.0, G, F);
        for (double gn : G) CHECK(gn == Catch::Approx(0.0).margin(1e-15));
        for (double t : {0.3, 1.7, 9.1}) {
            spinwave_populations(sol, t, G, F);
            for (int i = 1; i < sol.n; ++i) {
                double cap = 4.0 * sol.bog_u[i] * sol.bog_u[i] * sol.bog_v[i] * sol.bog_v[i];
                CHECK(G[static_cast<std::size_t>(i)] >= 0.0);
                CHECK(G[static_cast<std::size_t>(i)] <= cap + 1e-12);
            }
        }
    }
    SECTION("trivial mode v=0 stays empty") {
        SWSolution s2 = sol;
        s2.bog_u[3] = 1.0;
        s2.bog_v[3] = 0.0;
        spinwave_populations(s2, 2.0, G, F);
        CHECK(G[3] == 0.0);
        CHECK(std::abs(F[3]) == 0.0);
    }
}

TEST_CASE("xi2_rotor_sw") {
    SECTION("xi2(0) = 1 exactly") {
        GraphParams p;
        p.alpha = 1.2;
        p.dilution_p = 0.15;
        Graph g = giant_component(build_diluted_lr_lattice(p, 128, 3));
        SWConfig cfg;
        cfg.delta = 0.0;
        auto tr = xi2_rotor_sw(g, cfg, {0.0, 0.5, 1.0});
        CHECK(tr.xi2[0] == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("zero spin-wave correction reproduces Kitagawa-Ueda exactly") {
        // on the complete graph, force G_n = 0 by comparing against the
        // independent closed form with the same chi
        const int n = 48;
        Graph g = build_complete_kac_graph(n);
        SWConfig cfg;
        cfg.delta = 0.0;
        double chi = rotor_frequency(g, cfg);
        for (double t : {0.0, 3.0, 11.0, 31.0}) {
            auto rm = rotor_oat_moments(n, chi, t);
            double xi2 = 2.0 * cfg.spin_s * n * rm.var_min / (rm.kx * rm.kx);
            CHECK(xi2 == Catch::Approx(ku_xi2(n, chi, t)).epsilon(1e-12));
        }
    }
    SECTION("complete-graph minimum within 5% of exact quantum evolution") {
        for (int n : {8, 12}) {
            Graph g = build_complete_kac_graph(n);
            SWConfig cfg;
            cfg.delta = 0.0;
            double chi = rotor_frequency(g, cfg);
            gsq_test::DickeOat ed(n, chi);
            auto exact = ed.find_minimum(0.5 / chi);

            auto times = log_time_grid(1e-4 / chi, 0.5 / chi, 2000);
            auto tr = xi2_rotor_sw(g, cfg, times);
            double best = 1e300;
            for (std::size_t i = 0; i < times.size(); ++i)
                if (!tr.broken_at(i) && tr.xi2[i] < best) best = tr.xi2[i];
            INFO("n=" << n << " sw=" << best << " ed=" << exact.xi2_min);
            CHECK(std::abs(best - exact.xi2_min) / exact.xi2_min < 0.05);
        }
    }
    SECTION("breakdown flag on depleted magnetization") {
        // short-range 1d chain: spin waves proliferate, magnetization dies
        GraphParams p;
        p.alpha = 2.8;
        p.apply_kac = true;
        Graph g = build_diluted_lr_lattice(p, 256, 0);
        SWConfig cfg;
        cfg.delta = 0.0;
        auto times = log_time_grid(0.1, 5e4, 400);
        auto tr = xi2_rotor_sw(g, cfg, times);
        CHECK(tr.breakdown_index > 0); // eventually breaks
    }
    SECTION("delta=1 rejected") {
        Graph g = build_complete_kac_graph(8);
        SWConfig cfg;
        cfg.delta = 1.0;
        CHECK_THROWS_AS(xi2_rotor_sw(g, cfg, {0.0, 1.0}), std::invalid_argument);
    }
}

TEST_CASE("observables depend only on eigenvalues in degenerate subspaces") {
    // complete graph: N-1 fold degenerate Laplacian eigenvalue; the G_n sum
    // must be identical no matter how the degenerate basis is oriented, which
    // holds because populations depend on lambda_n alone
    Graph g = build_complete_kac_graph(16);
    SWConfig cfg;
    cfg.delta = 0.3;
    auto sol = regular_approx_spectrum(g, cfg);
    for (int i = 2; i < 16; ++i) {
        CHECK(sol.omegas[i] == Catch::Approx(sol.omegas[1]).epsilon(1e-12));
        CHECK(sol.bog_v[i] == Catch::Approx(sol.bog_v[1]).epsilon(1e-10));
    }
}

TEST_CASE("heisenberg perturbation criterion") {
    SECTION("delta_eps vanishes at delta = 1") {
        Graph g = build_complete_kac_graph(12);
        auto hp = heisenberg_perturbation(g, 1.0);
        CHECK(hp.delta_eps == 0.0);
    }
    SECTION("complete Kac graph: 1 - delta_c = 2N/(N-1), flagged out of range") {
        const int n = 50;
        Graph g = build_complete_kac_graph(n);
        auto hp = heisenberg_perturbation(g, 0.0);
        CHECK(hp.delta_lambda == Catch::Approx(n / (n - 1.0)).epsilon(1e-10));
        CHECK(1.0 - hp.delta_c == Catch::Approx(2.0 * n / (n - 1.0)).epsilon(1e-10));
        CHECK_FALSE(hp.in_range); // mean-field graphs order for all delta < 1
    }
    SECTION("sparse graph: delta_c within range") {
        GraphParams p;
        p.bond_C = 0.9;
        p.alpha = 1.8;
        Graph g = giant_component(build_correlated_bond_graph(p, 512, 10));
        auto hp = heisenberg_perturbation(g, 0.9);
        CHECK(hp.in_range);
        CHECK(hp.delta_c < 1.0);
        CHECK(hp.delta_c > -1.0);
    }
}
