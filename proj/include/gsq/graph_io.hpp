// Self-describing columnar text format for graphs.
//
//   # gsq-graph v1
//   # geometry=ring1d n=64 seed=42
//   # alpha=1.4 dimension=1 dilution_p=0.2 bond_C=1 kappa_scale=0 apply_kac=1
//   # inactive=3,17
//   i j J_ij        (one bond per line, i < j)
//
// Weights are printed with 17 significant digits so a save/load cycle is
// bit-exact for IEEE doubles.

#ifndef GSQ_GRAPH_IO_HPP
#define GSQ_GRAPH_IO_HPP

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gsq/graph.hpp"

namespace gsq {

inline void save_graph(const Graph& g, std::ostream& os) {
    char buf[128];
    os << "# gsq-graph v1\n";
    std::snprintf(buf, sizeof buf, "# geometry=%s n=%d seed=%" PRIu64 "\n", geometry_name(g.geometry()),
                  g.n_nodes(), static_cast<std::uint64_t>(g.seed()));
    os << buf;
    const GraphParams& p = g.params();
    std::snprintf(buf, sizeof buf, "# alpha=%.17g dimension=%d dilution_p=%.17g bond_C=%.17g", p.alpha,
                  p.dimension, p.dilution_p, p.bond_C);
    os << buf;
    std::snprintf(buf, sizeof buf, " kappa_scale=%.17g apply_kac=%d\n", p.kappa_scale, p.apply_kac ? 1 : 0);
    os << buf;
    os << "# inactive=";
    bool first = true;
    for (int i = 0; i < g.n_nodes(); ++i) {
        if (!g.is_active(i)) {
            if (!first) os << ',';
            os << i;
            first = false;
        }
    }
    os << '\n';
    g.for_each_edge([&](int i, int j, double w) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, j, w);
        os << buf;
    });
}

inline void save_graph(const Graph& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_graph: cannot open " + path);
    save_graph(g, f);
}

namespace graph_io_detail {

inline std::string header_value(const std::string& line, const std::string& key) {
    auto pos = line.find(key + "=");
    if (pos == std::string::npos) throw std::runtime_error("graph file: missing header key " + key);
    pos += key.size() + 1;
    auto end = line.find(' ', pos);
    return line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

} // namespace graph_io_detail

inline Graph load_graph(std::istream& is) {
    using graph_io_detail::header_value;
    std::string magic, meta, pars, inact;
    if (!std::getline(is, magic) || magic != "# gsq-graph v1")
        throw std::runtime_error("graph file: bad magic line");
    if (!std::getline(is, meta) || !std::getline(is, pars) || !std::getline(is, inact))
        throw std::runtime_error("graph file: truncated header");

    auto geom = geometry_from_name(header_value(meta, "geometry"));
    if (!geom) throw std::runtime_error("graph file: unknown geometry");
    int n = std::stoi(header_value(meta, "n"));
    std::uint64_t seed = std::stoull(header_value(meta, "seed"));

    GraphParams p;
    p.alpha = std::strtod(header_value(pars, "alpha").c_str(), nullptr);
    p.dimension = std::stoi(header_value(pars, "dimension"));
    p.dilution_p = std::strtod(header_value(pars, "dilution_p").c_str(), nullptr);
    p.bond_C = std::strtod(header_value(pars, "bond_C").c_str(), nullptr);
    p.kappa_scale = std::strtod(header_value(pars, "kappa_scale").c_str(), nullptr);
    p.apply_kac = std::stoi(header_value(pars, "apply_kac")) != 0;

    std::vector<std::uint8_t> active(static_cast<std::size_t>(n), 1);
    {
        auto pos = inact.find('=');
        if (pos == std::string::npos) throw std::runtime_error("graph file: bad inactive line");
        std::string list = inact.substr(pos + 1);
        std::stringstream ss(list);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) active.at(static_cast<std::size_t>(std::stoi(tok))) = 0;
    }

    std::vector<Eigen::Triplet<double>> tri;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        int i, j;
        double w;
        char* end = nullptr;
        i = static_cast<int>(std::strtol(line.c_str(), &end, 10));
        j = static_cast<int>(std::strtol(end, &end, 10));
        w = std::strtod(end, &end);
        if (i < 0 || j <= i || j >= n) throw std::runtime_error("graph file: bad edge line: " + line);
        tri.emplace_back(i, j, w);
    }

    // Re-detect translation invariance from the metadata.
    auto sym = graph_detail::Symmetry::none;
    if (p.dilution_p == 0.0 && *geom != Geometry::correlated_bond)
        sym = (*geom == Geometry::triangular2d) ? graph_detail::Symmetry::circulant_torus2d
                                                : graph_detail::Symmetry::circulant_ring;
    return Graph::from_triplets(n, *geom, p, seed, std::move(active), tri, sym);
}

inline Graph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_graph: cannot open " + path);
    return load_graph(f);
}

} // namespace gsq

#endif
