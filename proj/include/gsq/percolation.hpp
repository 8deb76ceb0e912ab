// Connected-cluster analysis and percolation thresholds.
//
// Connectivity is read from the binary adjacency (J_ij > 0); weights play no
// role in cluster geometry. Components come out of a union-find pass ordered
// by descending size, ties by smallest contained index.

#ifndef GSQ_PERCOLATION_HPP
#define GSQ_PERCOLATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/fitting.hpp"
#include "gsq/graph.hpp"
#include "gsq/rng.hpp"

namespace gsq {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        int root = x;
        while (parent_[static_cast<std::size_t>(root)] != root) root = parent_[static_cast<std::size_t>(root)];
        while (parent_[static_cast<std::size_t>(x)] != root) {
            int next = parent_[static_cast<std::size_t>(x)];
            parent_[static_cast<std::size_t>(x)] = root;
            x = next;
        }
        return root;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)]) std::swap(a, b);
        parent_[static_cast<std::size_t>(b)] = a;
        size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
    }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

struct ClusterReport {
    std::vector<std::vector<int>> components; // descending size, ties by smallest index
    int giant_size = 0;
    double giant_fraction = 0.0; // giant_size / n_active; 0 on an empty graph
    double mean_cluster_size_S = 0.0; // sum s^2 n_s / sum s n_s over finite (non-giant) clusters
    double z0_mean = 0.0;             // moments of the connected-neighbor count
    double z0_second_moment = 0.0;
};

inline ClusterReport find_clusters(const Graph& g) {
    const int n = g.n_nodes();
    UnionFind uf(n);
    std::vector<int> z(static_cast<std::size_t>(n), 0);
    g.for_each_edge([&](int i, int j, double) {
        uf.unite(i, j);
        ++z[static_cast<std::size_t>(i)];
        ++z[static_cast<std::size_t>(j)];
    });

    std::vector<std::vector<int>> byroot(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        if (g.is_active(i)) byroot[static_cast<std::size_t>(uf.find(i))].push_back(i);

    ClusterReport rep;
    for (auto& c : byroot)
        if (!c.empty()) rep.components.push_back(std::move(c));
    std::sort(rep.components.begin(), rep.components.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a.front() < b.front();
              });

    if (!rep.components.empty()) {
        rep.giant_size = static_cast<int>(rep.components.front().size());
        rep.giant_fraction = static_cast<double>(rep.giant_size) / g.n_active();
    }

    double s1 = 0, s2 = 0;
    for (std::size_t c = 1; c < rep.components.size(); ++c) {
        double s = static_cast<double>(rep.components[c].size());
        s1 += s;
        s2 += s * s;
    }
    rep.mean_cluster_size_S = s1 > 0 ? s2 / s1 : 0.0;

    double zm = 0, zm2 = 0;
    int na = g.n_active();
    if (na > 0) {
        for (int i = 0; i < n; ++i)
            if (g.is_active(i)) {
                double zi = static_cast<double>(z[static_cast<std::size_t>(i)]);
                zm += zi;
                zm2 += zi * zi;
            }
        zm /= na;
        zm2 /= na;
    }
    rep.z0_mean = zm;
    rep.z0_second_moment = zm2;
    return rep;
}

// Subgraph induced by a node set; indices are remapped to 0..|nodes|-1 and
// the metadata of the parent graph is kept.
inline Graph induced_subgraph(const Graph& g, const std::vector<int>& nodes) {
    std::vector<int> map(static_cast<std::size_t>(g.n_nodes()), -1);
    for (std::size_t k = 0; k < nodes.size(); ++k) map[static_cast<std::size_t>(nodes[k])] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> tri;
    g.for_each_edge([&](int i, int j, double w) {
        int a = map[static_cast<std::size_t>(i)], b = map[static_cast<std::size_t>(j)];
        if (a >= 0 && b >= 0) tri.emplace_back(std::min(a, b), std::max(a, b), w);
    });
    std::vector<std::uint8_t> active(nodes.size(), 1);
    return Graph::from_triplets(static_cast<int>(nodes.size()), g.geometry(), g.params(), g.seed(),
                                std::move(active), tri);
}

// Largest connected cluster as a standalone graph.
inline Graph giant_component(const Graph& g) {
    auto rep = find_clusters(g);
    if (rep.components.empty()) throw std::runtime_error("giant_component: empty graph");
    return induced_subgraph(g, rep.components.front());
}

struct MomentThreshold {
    double value = 0.0;
    bool degenerate = false; // branching ratio <= 1: formula outside validity
};

// Degree-moment estimate of the site-percolation threshold,
// p_p = 1 - 1/(<z0^2>/<z0> - 1), from the clean graph's moments.
inline MomentThreshold threshold_from_moments(double z0_mean, double z0_m2) {
    if (z0_mean <= 0.0) throw std::invalid_argument("threshold_from_moments: z0_mean must be > 0");
    MomentThreshold t;
    double kappa = z0_m2 / z0_mean - 1.0;
    if (kappa <= 1.0) {
        t.value = 0.0;
        t.degenerate = true;
        return t;
    }
    t.value = std::clamp(1.0 - 1.0 / kappa, 0.0, 1.0);
    return t;
}

// Finite-size PW2 site-percolation threshold, 1 - 1/(log2(N) - 5/2 - 1/N).
inline double pw2_threshold(int n) {
    if (!graph_detail::is_power_of_two(n)) throw std::invalid_argument("pw2_threshold: n must be a power of two");
    double log2n = std::log2(static_cast<double>(n));
    double den = log2n - 2.5 - 1.0 / n;
    if (den <= 0.0) throw std::invalid_argument("pw2_threshold: denominator <= 0 (n too small)");
    return 1.0 - 1.0 / den;
}

// Riemann zeta by direct series plus Euler-Maclaurin tail, absolute error
// below 1e-12 for alpha > 1.
inline double zeta_series(double alpha) {
    if (alpha <= 1.0) throw std::invalid_argument("zeta_series: requires alpha > 1");
    const int m = 64;
    double s = 0.0;
    for (int k = 1; k < m; ++k) s += std::pow(static_cast<double>(k), -alpha);
    const double M = static_cast<double>(m);
    // tail: integral + midpoint + first Bernoulli corrections
    s += std::pow(M, 1.0 - alpha) / (alpha - 1.0);
    s += 0.5 * std::pow(M, -alpha);
    s += alpha / 12.0 * std::pow(M, -alpha - 1.0);
    s -= alpha * (alpha + 1.0) * (alpha + 2.0) / 720.0 * std::pow(M, -alpha - 3.0);
    return s;
}

// Bethe-lattice bound on the correlated-bond percolation threshold:
// C_c(alpha) >= 1 - 1/(2 zeta(alpha)).
inline double bethe_bound(double alpha) {
    if (alpha <= 1.0) throw std::invalid_argument("bethe_bound: zeta diverges for alpha <= 1");
    return 1.0 - 1.0 / (2.0 * zeta_series(alpha));
}

// ---------------------------------------------------------------------------
// Monte Carlo threshold estimation

struct PercolationCurvePoint {
    double control = 0.0; // dilution p or bond amplitude C
    double giant_fraction = 0.0;
    double giant_fraction_err = 0.0;
    double mean_cluster_S = 0.0;
    double mean_cluster_S_err = 0.0;
};

struct EmpiricalThreshold {
    int size = 0;
    std::vector<PercolationCurvePoint> curve;
    double crossing = 0.0; // control value where mean giant fraction crosses the level
    double crossing_err = 0.0;
    bool crossing_valid = false;
    bool monotone = true;
    double gamma = 0.0; // from S ~ |p_hat - p|^-gamma on the subcritical side
    double gamma_stderr = 0.0;
    bool gamma_valid = false;
};

namespace percolation_detail {

// Linear interpolation of the level crossing on a monotone curve. Direction
// is inferred from the endpoints.
inline bool interp_crossing(const std::vector<double>& c, const std::vector<double>& gf, double level,
                            double& out) {
    const std::size_t n = c.size();
    if (n < 2) return false;
    bool decreasing = gf.front() > gf.back();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double a = gf[i], b = gf[i + 1];
        bool brackets = decreasing ? (a >= level && b < level) : (a <= level && b > level);
        if (brackets) {
            double t = (level - a) / (b - a);
            out = c[i] + t * (c[i + 1] - c[i]);
            return true;
        }
    }
    return false;
}

} // namespace percolation_detail

// Sweep a control parameter, measure giant fraction and mean finite-cluster
// size over `n_seeds` disorder realizations per point, locate the level
// crossing with a bootstrap error bar, and fit gamma on the subcritical side.
//
// `make_graph(control, seed)` supplies the realization; `subcritical_above`
// states on which side of the crossing the giant cluster is absent (true for
// site dilution, false for the bond amplitude C).
inline EmpiricalThreshold empirical_threshold(
    const std::function<Graph(double control, std::uint64_t seed)>& make_graph, int size,
    const std::vector<double>& controls, int n_seeds, std::uint64_t master_seed, double level = 0.5,
    bool subcritical_above = true, int n_bootstrap = 200) {
    if (controls.size() < 3) throw std::invalid_argument("empirical_threshold: need >= 3 control values");
    if (n_seeds < 2) throw std::invalid_argument("empirical_threshold: need >= 2 seeds");

    EmpiricalThreshold out;
    out.size = size;
    const std::size_t nc = controls.size();
    std::vector<std::vector<double>> gf(nc), S(nc);
    for (std::size_t ci = 0; ci < nc; ++ci) {
        gf[ci].resize(static_cast<std::size_t>(n_seeds));
        S[ci].resize(static_cast<std::size_t>(n_seeds));
        std::uint64_t ps = point_seed(master_seed, controls[ci], static_cast<std::uint64_t>(size));
        for (int s = 0; s < n_seeds; ++s) {
            std::uint64_t seed = sample_seed(ps, static_cast<std::uint64_t>(s));
            Graph g = make_graph(controls[ci], seed);
            auto rep = find_clusters(g);
            gf[ci][static_cast<std::size_t>(s)] = rep.giant_fraction;
            S[ci][static_cast<std::size_t>(s)] = rep.mean_cluster_size_S;
        }
    }

    auto mean_err = [&](const std::vector<double>& v, double& m, double& e) {
        m = 0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double var = 0;
        for (double x : v) var += (x - m) * (x - m);
        var /= static_cast<double>(v.size() - 1);
        e = std::sqrt(var / static_cast<double>(v.size()));
    };

    std::vector<double> gfm(nc), cvals(controls);
    for (std::size_t ci = 0; ci < nc; ++ci) {
        PercolationCurvePoint pt;
        pt.control = controls[ci];
        mean_err(gf[ci], pt.giant_fraction, pt.giant_fraction_err);
        mean_err(S[ci], pt.mean_cluster_S, pt.mean_cluster_S_err);
        gfm[ci] = pt.giant_fraction;
        out.curve.push_back(pt);
    }

    // monotonicity check (3 sigma allowance against MC noise)
    bool decreasing = gfm.front() > gfm.back();
    for (std::size_t i = 0; i + 1 < nc; ++i) {
        double d = gfm[i + 1] - gfm[i];
        double tol = 3.0 * std::hypot(out.curve[i].giant_fraction_err, out.curve[i + 1].giant_fraction_err);
        if ((decreasing && d > tol) || (!decreasing && d < -tol)) out.monotone = false;
    }

    out.crossing_valid = out.monotone &&
                         percolation_detail::interp_crossing(cvals, gfm, level, out.crossing);

    if (out.crossing_valid && n_bootstrap > 1) {
        Rng brng(master_seed, RngStream::bootstrap);
        std::vector<double> crossings;
        std::vector<double> bgf(nc);
        for (int b = 0; b < n_bootstrap; ++b) {
            for (std::size_t ci = 0; ci < nc; ++ci) {
                double m = 0;
                for (int s = 0; s < n_seeds; ++s)
                    m += gf[ci][static_cast<std::size_t>(brng.next_below(static_cast<std::uint64_t>(n_seeds)))];
                bgf[ci] = m / n_seeds;
            }
            double c;
            if (percolation_detail::interp_crossing(cvals, bgf, level, c)) crossings.push_back(c);
        }
        if (crossings.size() > 4) {
            double m = 0;
            for (double c : crossings) m += c;
            m /= static_cast<double>(crossings.size());
            double var = 0;
            for (double c : crossings) var += (c - m) * (c - m);
            out.crossing_err = std::sqrt(var / static_cast<double>(crossings.size() - 1));
        } else {
            out.crossing_valid = false;
        }
    }

    // gamma from S ~ |p_hat - c|^-gamma, subcritical side only
    if (out.crossing_valid) {
        std::vector<double> dist, sval;
        for (std::size_t ci = 0; ci < nc; ++ci) {
            bool sub = subcritical_above ? (controls[ci] > out.crossing) : (controls[ci] < out.crossing);
            double d = std::abs(out.crossing - controls[ci]);
            if (sub && d > 1e-12 && out.curve[ci].mean_cluster_S > 0)
                dist.push_back(d), sval.push_back(out.curve[ci].mean_cluster_S);
        }
        if (dist.size() >= 3) {
            auto f = loglog_fit(dist, sval);
            out.gamma = -f.slope;
            out.gamma_stderr = f.slope_stderr;
            out.gamma_valid = true;
        }
    }
    return out;
}

} // namespace gsq

#endif
