// Binary checkpoint of accumulated DTWA moments, for resumable sweeps.
//
// Fixed little-endian layout:
//   bytes 0..7   magic "GSQDTWA1"
//   u32          version (currently 1)
//   u32          moments per time point (7)
//   u64          n_times
//   u64          n_samples
//   f64          spin_s
//   f64[n_times]              time grid
//   f64[n_samples]            active-site count per sample
//   f64[n_samples * n_times * 7]  per-sample moment rows
//                   (Sx, Sy, Sz, Sx^2, Sy^2, Sz^2, Sy*Sz per time point)

#ifndef GSQ_DTWA_CHECKPOINT_HPP
#define GSQ_DTWA_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "gsq/dtwa.hpp"

namespace gsq {

namespace checkpoint_detail {
constexpr char kMagic[8] = {'G', 'S', 'Q', 'D', 'T', 'W', 'A', '1'};

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

static_assert(sizeof(double) == 8);
} // namespace checkpoint_detail

inline void save_checkpoint(const EnsembleMoments& acc, const std::string& path) {
    using namespace checkpoint_detail;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kMagic, 8);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(dtwa_detail::kMomentsPerTime));
    put<std::uint64_t>(os, acc.times.size());
    put<std::uint64_t>(os, static_cast<std::uint64_t>(acc.n_samples));
    put<double>(os, acc.spin_s);
    os.write(reinterpret_cast<const char*>(acc.times.data()),
             static_cast<std::streamsize>(acc.times.size() * 8));
    os.write(reinterpret_cast<const char*>(acc.active_counts.data()),
             static_cast<std::streamsize>(acc.n_samples * 8));
    for (int k = 0; k < acc.n_samples; ++k) {
        const auto& row = acc.rows[static_cast<std::size_t>(k)];
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 8));
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline EnsembleMoments load_checkpoint(const std::string& path) {
    using namespace checkpoint_detail;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("load_checkpoint: bad magic");
    auto version = get<std::uint32_t>(is);
    if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
    auto mper = get<std::uint32_t>(is);
    if (mper != static_cast<std::uint32_t>(dtwa_detail::kMomentsPerTime))
        throw std::runtime_error("load_checkpoint: moment layout mismatch");
    auto nt = get<std::uint64_t>(is);
    auto ns = get<std::uint64_t>(is);
    EnsembleMoments acc;
    acc.spin_s = get<double>(is);
    acc.n_samples = static_cast<int>(ns);
    acc.times.resize(nt);
    is.read(reinterpret_cast<char*>(acc.times.data()), static_cast<std::streamsize>(nt * 8));
    acc.active_counts.resize(ns);
    is.read(reinterpret_cast<char*>(acc.active_counts.data()), static_cast<std::streamsize>(ns * 8));
    acc.rows.resize(ns);
    for (std::uint64_t k = 0; k < ns; ++k) {
        acc.rows[k].resize(nt * dtwa_detail::kMomentsPerTime);
        is.read(reinterpret_cast<char*>(acc.rows[k].data()),
                static_cast<std::streamsize>(acc.rows[k].size() * 8));
    }
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return acc;
}

} // namespace gsq

#endif
