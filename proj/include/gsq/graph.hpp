// Interaction-graph construction for spin ensembles.
//
// Three graph families are supported:
//   * site-diluted long-range lattices (1d ring, 2d triangular torus) with
//     power-law couplings J ~ r^-alpha, optional exponential cutoff and Kac
//     normalization;
//   * power-of-two (PW2) ring graphs with bonds only at distances 2^m;
//   * correlated-bond random graphs with uniform couplings and a bond
//     survival probability decaying algebraically with distance.
//
// A Graph is immutable after construction and safe to share across threads.
// Couplings are stored dense or sparse depending on bond density; the two
// representations are semantically identical.

#ifndef GSQ_GRAPH_HPP
#define GSQ_GRAPH_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/rng.hpp"

namespace gsq {

enum class Geometry { ring1d, triangular2d, pw2, correlated_bond };

inline const char* geometry_name(Geometry g) {
    switch (g) {
        case Geometry::ring1d: return "ring1d";
        case Geometry::triangular2d: return "triangular2d";
        case Geometry::pw2: return "pw2";
        case Geometry::correlated_bond: return "correlated_bond";
    }
    return "unknown";
}

inline std::optional<Geometry> geometry_from_name(const std::string& s) {
    if (s == "ring1d") return Geometry::ring1d;
    if (s == "triangular2d") return Geometry::triangular2d;
    if (s == "pw2") return Geometry::pw2;
    if (s == "correlated_bond") return Geometry::correlated_bond;
    return std::nullopt;
}

struct GraphParams {
    double alpha = 0.0;       // power-law exponent of couplings or bond probability
    int dimension = 1;        // lattice dimension, 1 or 2
    double dilution_p = 0.0;  // site removal probability
    double bond_C = 1.0;      // correlated-bond amplitude
    double kappa_scale = 0.0; // exponential cutoff Lambda; kappa = Lambda / N
    bool apply_kac = true;
};

// Minimum-image distance on a periodic ring of n sites.
inline int ring_distance(int i, int j, int n) {
    int d = i - j;
    if (d < 0) d = -d;
    return d < n - d ? d : n - d;
}

namespace graph_detail {

// Translation-equivalence classes exploited by spectral/DTWA fast paths.
enum class Symmetry { none, circulant_ring, circulant_torus2d };

inline int int_sqrt(int n) {
    int l = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    while (l > 0 && l * l > n) --l;
    while ((l + 1) * (l + 1) <= n) ++l;
    return l;
}

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Euclidean minimum-image distance between cells (di,dj) on the L x L
// triangular torus with primitive vectors (1,0) and (1/2, sqrt(3)/2).
inline double triangular_distance(int di, int dj, int L) {
    di = ((di % L) + L) % L;
    dj = ((dj % L) + L) % L;
    double best = 1e300;
    for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) {
            double u = di + a * L, v = dj + b * L;
            double x = u + 0.5 * v;
            double y = 0.8660254037844386467637231707529362 * v; // sqrt(3)/2
            double r2 = x * x + y * y;
            if (r2 < best) best = r2;
        }
    }
    return std::sqrt(best);
}

} // namespace graph_detail

// Lattice sum S = sum_r r^-alpha over the clean finite lattice with periodic
// boundaries (1d: r = 1..n/2 with multiplicity 2, antipode once for even n;
// 2d triangular: all nonzero minimum-image displacement vectors). For
// alpha > d the sum converges as n grows; for alpha < d it grows as n^(d-alpha).
inline double kac_norm(double alpha, int n, int dimension) {
    if (n < 2) throw std::invalid_argument("kac_norm: n must be >= 2");
    if (dimension == 1) {
        double s = 0.0;
        int half = n / 2;
        for (int r = 1; r <= half; ++r) {
            double mult = (2 * r == n) ? 1.0 : 2.0;
            s += mult * std::pow(static_cast<double>(r), -alpha);
        }
        return s;
    }
    if (dimension == 2) {
        int L = graph_detail::int_sqrt(n);
        if (L * L != n) throw std::invalid_argument("kac_norm: 2d requires n = L^2");
        double s = 0.0;
        for (int di = 0; di < L; ++di)
            for (int dj = 0; dj < L; ++dj) {
                if (di == 0 && dj == 0) continue;
                s += std::pow(graph_detail::triangular_distance(di, dj, L), -alpha);
            }
        return s;
    }
    throw std::invalid_argument("kac_norm: dimension must be 1 or 2");
}

class Graph {
public:
    int n_nodes() const { return n_; }
    Geometry geometry() const { return geometry_; }
    const GraphParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    const std::vector<std::uint8_t>& active_nodes() const { return active_; }
    bool is_active(int i) const { return active_[static_cast<std::size_t>(i)] != 0; }
    int n_active() const { return n_active_; }

    bool is_sparse() const { return dense_ == nullptr; }
    std::size_t edge_count() const { return n_edges_; }

    graph_detail::Symmetry symmetry() const { return symmetry_; }

    double coupling(int i, int j) const {
        if (dense_) return (*dense_)(i, j);
        return sparse_->coeff(i, j);
    }

    // Visit every bond once as f(i, j, weight) with i < j.
    template <class F>
    void for_each_edge(F&& f) const {
        if (dense_) {
            for (int j = 1; j < n_; ++j)
                for (int i = 0; i < j; ++i) {
                    double w = (*dense_)(i, j);
                    if (w != 0.0) f(i, j, w);
                }
        } else {
            for (int k = 0; k < sparse_->outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(*sparse_, k); it; ++it)
                    if (it.row() < it.col())
                        f(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }

    // Weighted coordination numbers deg_j = sum_l J_lj over all n nodes
    // (zero at inactive sites).
    Eigen::VectorXd degrees() const {
        if (dense_) return dense_->rowwise().sum();
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
        for (int k = 0; k < sparse_->outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(*sparse_, k); it; ++it)
                d[it.row()] += it.value();
        return d;
    }

    // Mean degree over active nodes.
    double average_degree() const {
        if (n_active_ == 0) return 0.0;
        return degrees().sum() / n_active_;
    }

    // y = J x (columnwise for multi-column x).
    void apply_couplings(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y) const {
        if (dense_)
            y.noalias() = (*dense_) * x;
        else
            y = (*sparse_) * x;
    }

    Eigen::MatrixXd dense_couplings() const {
        if (dense_) return *dense_;
        return Eigen::MatrixXd(*sparse_);
    }

    // Indices of active nodes in ascending order.
    std::vector<int> active_indices() const {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(n_active_));
        for (int i = 0; i < n_; ++i)
            if (active_[static_cast<std::size_t>(i)]) idx.push_back(i);
        return idx;
    }

    // First coupling row of a translation-invariant graph: kernel[j] = J(0,j).
    std::vector<double> circulant_kernel() const {
        if (symmetry_ != graph_detail::Symmetry::circulant_ring &&
            symmetry_ != graph_detail::Symmetry::circulant_torus2d)
            throw std::logic_error("circulant_kernel: graph is not translation invariant");
        std::vector<double> row(static_cast<std::size_t>(n_), 0.0);
        if (dense_) {
            for (int j = 0; j < n_; ++j) row[static_cast<std::size_t>(j)] = (*dense_)(0, j);
        } else {
            for (Eigen::SparseMatrix<double>::InnerIterator it(*sparse_, 0); it; ++it)
                row[static_cast<std::size_t>(it.row())] = it.value();
        }
        return row;
    }

    static Graph from_dense(int n, Geometry geom, const GraphParams& params, std::uint64_t seed,
                            std::vector<std::uint8_t> active, Eigen::MatrixXd couplings,
                            graph_detail::Symmetry symmetry) {
        Graph g;
        g.init_meta(n, geom, params, seed, std::move(active), symmetry);
        std::size_t nnz = 0;
        for (int j = 1; j < n; ++j)
            for (int i = 0; i < j; ++i)
                if (couplings(i, j) != 0.0) ++nnz;
        g.n_edges_ = nnz;
        g.dense_ = std::make_shared<Eigen::MatrixXd>(std::move(couplings));
        return g;
    }

    static Graph from_triplets(int n, Geometry geom, const GraphParams& params, std::uint64_t seed,
                               std::vector<std::uint8_t> active,
                               const std::vector<Eigen::Triplet<double>>& upper_triplets,
                               graph_detail::Symmetry symmetry = graph_detail::Symmetry::none) {
        Graph g;
        g.init_meta(n, geom, params, seed, std::move(active), symmetry);
        g.n_edges_ = upper_triplets.size();

        double density =
            n > 1 ? 2.0 * static_cast<double>(g.n_edges_) / (static_cast<double>(n) * (n - 1)) : 0.0;
        if (density < 0.05) {
            auto sp = std::make_shared<Eigen::SparseMatrix<double>>(n, n);
            std::vector<Eigen::Triplet<double>> sym;
            sym.reserve(2 * upper_triplets.size());
            for (const auto& t : upper_triplets) {
                sym.emplace_back(t.row(), t.col(), t.value());
                sym.emplace_back(t.col(), t.row(), t.value());
            }
            sp->setFromTriplets(sym.begin(), sym.end());
            sp->makeCompressed();
            g.sparse_ = std::move(sp);
        } else {
            auto dn = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
            for (const auto& t : upper_triplets) {
                (*dn)(t.row(), t.col()) = t.value();
                (*dn)(t.col(), t.row()) = t.value();
            }
            g.dense_ = std::move(dn);
        }
        return g;
    }

private:
    void init_meta(int n, Geometry geom, const GraphParams& params, std::uint64_t seed,
                   std::vector<std::uint8_t> active, graph_detail::Symmetry symmetry) {
        n_ = n;
        geometry_ = geom;
        params_ = params;
        seed_ = seed;
        active_ = std::move(active);
        symmetry_ = symmetry;
        n_active_ = 0;
        for (auto a : active_)
            if (a) ++n_active_;
    }

    int n_ = 0;
    int n_active_ = 0;
    std::size_t n_edges_ = 0;
    Geometry geometry_ = Geometry::ring1d;
    GraphParams params_;
    std::uint64_t seed_ = 0;
    std::vector<std::uint8_t> active_;
    graph_detail::Symmetry symmetry_ = graph_detail::Symmetry::none;
    std::shared_ptr<const Eigen::MatrixXd> dense_;
    std::shared_ptr<const Eigen::SparseMatrix<double>> sparse_;
};

inline std::vector<std::uint8_t> sample_site_mask(int n, double p, Rng& rng) {
    std::vector<std::uint8_t> active(static_cast<std::size_t>(n), 1);
    if (p > 0.0)
        for (int i = 0; i < n; ++i)
            if (rng.bernoulli(p)) active[static_cast<std::size_t>(i)] = 0;
    return active;
}

// Site-diluted long-range lattice. 1d: periodic ring; 2d: L x L triangular
// torus (n = L^2). J_ij = r^-alpha * exp(-kappa r) / N between active sites,
// with kappa = kappa_scale / n and N = kac_norm(alpha, n, d) when apply_kac.
inline Graph build_diluted_lr_lattice(const GraphParams& params, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("build_diluted_lr_lattice: n must be >= 2");
    if (params.dimension != 1 && params.dimension != 2)
        throw std::invalid_argument("build_diluted_lr_lattice: dimension must be 1 or 2");
    if (params.dilution_p < 0.0 || params.dilution_p >= 1.0)
        throw std::invalid_argument("build_diluted_lr_lattice: dilution_p must be in [0,1)");
    int L = 0;
    if (params.dimension == 2) {
        L = graph_detail::int_sqrt(n);
        if (L * L != n) throw std::invalid_argument("build_diluted_lr_lattice: 2d requires n = L^2");
    }

    Rng rng(seed, RngStream::graph);
    auto active = sample_site_mask(n, params.dilution_p, rng);

    const double norm = params.apply_kac ? kac_norm(params.alpha, n, params.dimension) : 1.0;
    const double kappa = params.kappa_scale > 0.0 ? params.kappa_scale / n : 0.0;
    auto weight = [&](double r) {
        double w = std::pow(r, -params.alpha);
        if (kappa > 0.0) w *= std::exp(-kappa * r);
        return w / norm;
    };

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    if (params.dimension == 1) {
        // weight depends only on the node offset; share the exact values with
        // the circulant fast paths
        GraphParams p1 = params;
        auto kernel = clean_coupling_kernel(Geometry::ring1d, p1, n);
        for (int j = 0; j < n; ++j) {
            if (!active[static_cast<std::size_t>(j)]) continue;
            for (int i = 0; i < j; ++i) {
                if (!active[static_cast<std::size_t>(i)]) continue;
                double w = kernel[static_cast<std::size_t>(j - i)];
                J(i, j) = w;
                J(j, i) = w;
            }
        }
    } else {
        Eigen::MatrixXd wtab(L, L);
        for (int di = 0; di < L; ++di)
            for (int dj = 0; dj < L; ++dj)
                wtab(di, dj) = (di == 0 && dj == 0)
                                   ? 0.0
                                   : weight(graph_detail::triangular_distance(di, dj, L));
        for (int j = 0; j < n; ++j) {
            if (!active[static_cast<std::size_t>(j)]) continue;
            int ib = j / L, jb = j % L;
            for (int i = 0; i < j; ++i) {
                if (!active[static_cast<std::size_t>(i)]) continue;
                int ia = i / L, ja = i % L;
                double w = wtab(((ia - ib) % L + L) % L, ((ja - jb) % L + L) % L);
                J(i, j) = w;
                J(j, i) = w;
            }
        }
    }

    auto sym = graph_detail::Symmetry::none;
    if (params.dilution_p == 0.0)
        sym = params.dimension == 1 ? graph_detail::Symmetry::circulant_ring
                                    : graph_detail::Symmetry::circulant_torus2d;
    Geometry geom = params.dimension == 1 ? Geometry::ring1d : Geometry::triangular2d;
    return Graph::from_dense(n, geom, params, seed, std::move(active), std::move(J), sym);
}

// First coupling row of the clean (undiluted) graph for the lattice and PW2
// families: kernel[j] = J_clean(0, j). Diluted instances satisfy
// J = mask * J_clean * mask with exactly these weights, which the spectral
// fast paths rely on.
inline std::vector<double> clean_coupling_kernel(Geometry geom, const GraphParams& params, int n);

// PW2 Kac sum: geometric series over the log2(n) distance scales.
inline double pw2_kac_norm(double alpha, int n) {
    int scales = 0;
    while ((1 << scales) < n) ++scales;
    double s = 0.0;
    for (int m = 0; m < scales; ++m) s += std::pow(2.0, -alpha * m);
    return s;
}

// Power-of-two graph on a ring: bonds only at distances 2^m. Weight r^-alpha;
// for alpha < 0 extensivity needs a rescaling, provided either by the Kac sum
// (whose geometric growth absorbs the required N^alpha factor) or by an
// explicit N^alpha factor when apply_kac is off.
inline Graph build_pw2_graph(const GraphParams& params, int n, std::uint64_t seed) {
    if (n < 4 || !graph_detail::is_power_of_two(n))
        throw std::invalid_argument("build_pw2_graph: n must be a power of two >= 4");
    if (params.dilution_p < 0.0 || params.dilution_p >= 1.0)
        throw std::invalid_argument("build_pw2_graph: dilution_p must be in [0,1)");

    Rng rng(seed, RngStream::graph);
    auto active = sample_site_mask(n, params.dilution_p, rng);

    double norm = 1.0;
    if (params.apply_kac)
        norm = pw2_kac_norm(params.alpha, n);
    else if (params.alpha < 0.0)
        norm = std::pow(static_cast<double>(n), -params.alpha);

    std::vector<Eigen::Triplet<double>> tri;
    for (int d = 1; d < n; d <<= 1) {
        double w = std::pow(static_cast<double>(d), -params.alpha) / norm;
        for (int i = 0; i < n; ++i) {
            int j = i + d;
            if (d == n / 2) {
                if (j >= n) continue; // antipode counted once per pair
            } else {
                j %= n;
            }
            int a = std::min(i, j), b = std::max(i, j);
            if (!active[static_cast<std::size_t>(a)] || !active[static_cast<std::size_t>(b)]) continue;
            tri.emplace_back(a, b, w);
        }
    }

    auto sym = params.dilution_p == 0.0 ? graph_detail::Symmetry::circulant_ring
                                        : graph_detail::Symmetry::none;
    return Graph::from_triplets(n, Geometry::pw2, params, seed, std::move(active), tri, sym);
}

// Fully connected ring whose bonds survive with probability
// q_r = min(1, C r^-alpha); surviving bonds carry uniform weight J = 1.
inline Graph build_correlated_bond_graph(const GraphParams& params, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("build_correlated_bond_graph: n must be >= 2");
    if (params.bond_C <= 0.0 || params.bond_C > 1.0)
        throw std::invalid_argument("build_correlated_bond_graph: bond_C must be in (0,1]");
    if (params.alpha <= 0.0)
        throw std::invalid_argument("build_correlated_bond_graph: alpha must be > 0");

    Rng rng(seed, RngStream::graph);
    std::vector<std::uint8_t> active(static_cast<std::size_t>(n), 1);

    std::vector<double> q(static_cast<std::size_t>(n / 2 + 1), 0.0);
    for (int r = 1; r <= n / 2; ++r)
        q[static_cast<std::size_t>(r)] =
            std::min(1.0, params.bond_C * std::pow(static_cast<double>(r), -params.alpha));

    std::vector<Eigen::Triplet<double>> tri;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(q[static_cast<std::size_t>(ring_distance(i, j, n))]))
                tri.emplace_back(i, j, 1.0);

    return Graph::from_triplets(n, Geometry::correlated_bond, params, seed, std::move(active), tri);
}

inline Graph build_graph(Geometry geom, const GraphParams& params, int n, std::uint64_t seed) {
    switch (geom) {
        case Geometry::ring1d:
        case Geometry::triangular2d: {
            GraphParams p = params;
            p.dimension = geom == Geometry::ring1d ? 1 : 2;
            return build_diluted_lr_lattice(p, n, seed);
        }
        case Geometry::pw2: return build_pw2_graph(params, n, seed);
        case Geometry::correlated_bond: return build_correlated_bond_graph(params, n, seed);
    }
    throw std::invalid_argument("build_graph: unknown geometry");
}

// Kac-normalized complete graph (the alpha = 0 ring), J = 1/(n-1).
inline Graph build_complete_kac_graph(int n, std::uint64_t seed = 0) {
    GraphParams p;
    p.alpha = 0.0;
    p.dimension = 1;
    p.apply_kac = true;
    return build_diluted_lr_lattice(p, n, seed);
}

inline std::vector<double> degree_vector(const Graph& g) {
    Eigen::VectorXd d = g.degrees();
    return std::vector<double>(d.data(), d.data() + d.size());
}

inline std::vector<double> clean_coupling_kernel(Geometry geom, const GraphParams& params, int n) {
    std::vector<double> kernel(static_cast<std::size_t>(n), 0.0);
    if (geom == Geometry::ring1d) {
        const double norm = params.apply_kac ? kac_norm(params.alpha, n, 1) : 1.0;
        const double kappa = params.kappa_scale > 0.0 ? params.kappa_scale / n : 0.0;
        for (int j = 1; j < n; ++j) {
            double r = static_cast<double>(ring_distance(0, j, n));
            double w = std::pow(r, -params.alpha);
            if (kappa > 0.0) w *= std::exp(-kappa * r);
            kernel[static_cast<std::size_t>(j)] = w / norm;
        }
        return kernel;
    }
    if (geom == Geometry::pw2) {
        double norm = 1.0;
        if (params.apply_kac)
            norm = pw2_kac_norm(params.alpha, n);
        else if (params.alpha < 0.0)
            norm = std::pow(static_cast<double>(n), -params.alpha);
        for (int d = 1; d < n; d <<= 1) {
            double w = std::pow(static_cast<double>(d), -params.alpha) / norm;
            kernel[static_cast<std::size_t>(d)] = w;
            if (d != n - d) kernel[static_cast<std::size_t>(n - d)] = w;
        }
        return kernel;
    }
    throw std::invalid_argument("clean_coupling_kernel: only ring1d and pw2 kernels are 1d-circulant");
}

} // namespace gsq

#endif
