#include "evflow/veckm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "evflow/parallel.hpp"
#include "evflow/rng.hpp"

namespace evflow {

namespace {

inline void sincos_fast(double theta, double& s, double& c) {
#if defined(__GLIBC__)
    ::sincos(theta, &s, &c);
#else
    s = std::sin(theta);
    c = std::cos(theta);
#endif
}

inline std::int64_t cell_key(std::int64_t cx, std::int64_t cy) {
    return (cx << 32) ^ (cy & 0xffffffffLL);
}

struct CellIndex {
    // Event indices per cell, ascending (hence ascending in time as well).
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> cells;
    double inv_dx = 0.0, inv_dy = 0.0;

    static CellIndex build(const EventCloud& cloud, const NeighborhoodSpec& spec) {
        CellIndex idx;
        idx.inv_dx = 1.0 / spec.dx;
        idx.inv_dy = 1.0 / spec.dy;
        idx.cells.reserve(cloud.size());
        for (std::uint32_t i = 0; i < cloud.size(); ++i) {
            const auto& e = cloud.events[i];
            const auto cx = static_cast<std::int64_t>(std::floor(e.x * idx.inv_dx));
            const auto cy = static_cast<std::int64_t>(std::floor(e.y * idx.inv_dy));
            idx.cells[cell_key(cx, cy)].push_back(i);
        }
        return idx;
    }
};

// Visit all neighbors of event k (self included), ascending per cell.
template <typename Fn>
void for_each_neighbor(const EventCloud& cloud, const NeighborhoodSpec& spec,
                       const CellIndex& index, std::uint32_t k, Fn&& fn) {
    const auto& ek = cloud.events[k];
    const auto cx = static_cast<std::int64_t>(std::floor(ek.x * index.inv_dx));
    const auto cy = static_cast<std::int64_t>(std::floor(ek.y * index.inv_dy));
    const double t_lo = ek.t - spec.dt;
    const double t_hi = ek.t + spec.dt;
    for (std::int64_t gx = cx - 1; gx <= cx + 1; ++gx) {
        for (std::int64_t gy = cy - 1; gy <= cy + 1; ++gy) {
            const auto it = index.cells.find(cell_key(gx, gy));
            if (it == index.cells.end()) continue;
            const auto& list = it->second;
            // Time-window sweep within the cell: events are time-sorted, so
            // binary search prunes everything outside +/-dt.
            auto lo = std::lower_bound(list.begin(), list.end(), t_lo,
                                       [&](std::uint32_t i, double t) { return cloud.events[i].t < t; });
            for (auto jt = lo; jt != list.end(); ++jt) {
                const auto& ej = cloud.events[*jt];
                if (ej.t > t_hi) break;
                const double dt = (ej.t - ek.t) / spec.dt;
                const double dx = (ej.x - ek.x) / spec.dx;
                const double dy = (ej.y - ek.y) / spec.dy;
                if (dt * dt + dx * dx + dy * dy < 1.0) fn(*jt);
            }
        }
    }
}

} // namespace

RandomProjection RandomProjection::generate(std::uint64_t seed, int d, double sigma2) {
    RandomProjection proj;
    proj.seed = seed;
    proj.d = d;
    proj.sigma2 = sigma2;
    proj.a.resize(3, d);
    const CounterRng rng(CounterRng::substream(seed, /*tag=*/0x70726f6aULL)); // "proj"
    const double sigma = std::sqrt(sigma2);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < d; ++c)
            proj.a(r, c) = sigma * rng.normal(static_cast<std::uint64_t>(r) * d + c);
    return proj;
}

Adjacency build_adjacency(const EventCloud& cloud, const NeighborhoodSpec& spec) {
    const std::size_t n = cloud.size();
    Adjacency adj;
    adj.offsets.assign(n + 1, 0);
    if (n == 0) return adj;

    const CellIndex index = CellIndex::build(cloud, spec);

    std::vector<std::uint64_t> counts(n, 0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            std::uint64_t c = 0;
            for_each_neighbor(cloud, spec, index, static_cast<std::uint32_t>(k),
                              [&](std::uint32_t) { ++c; });
            counts[k] = c;
        }
    });
    std::partial_sum(counts.begin(), counts.end(), adj.offsets.begin() + 1);
    adj.neighbors.resize(adj.offsets.back());

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            std::uint32_t* out = adj.neighbors.data() + adj.offsets[k];
            for_each_neighbor(cloud, spec, index, static_cast<std::uint32_t>(k),
                              [&](std::uint32_t j) { *out++ = j; });
            std::sort(adj.neighbors.data() + adj.offsets[k], out);
        }
    });
    return adj;
}

Encoding encode(const EventCloud& cloud, const Adjacency& adj, const NeighborhoodSpec& spec,
                const RandomProjection& proj) {
    const std::size_t n = cloud.size();
    const auto d = static_cast<std::size_t>(proj.d);
    Encoding enc;
    enc.n = n;
    enc.d = proj.d;
    enc.re.resize(n * d);
    enc.im.resize(n * d);
    enc.neighbor_counts.resize(n);

    // Phase table: A[j, m] = exp(i X_j . a[:, m]) on delta-normalized coords.
    std::vector<double> cos_t(n * d), sin_t(n * d);
    const double inv_dt = 1.0 / spec.dt, inv_dx = 1.0 / spec.dx, inv_dy = 1.0 / spec.dy;

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto& e = cloud.events[j];
            const double xt = e.t * inv_dt, xx = e.x * inv_dx, xy = e.y * inv_dy;
            double* cr = cos_t.data() + j * d;
            double* si = sin_t.data() + j * d;
            for (std::size_t m = 0; m < d; ++m) {
                const double theta = xt * proj.a(0, m) + xx * proj.a(1, m) + xy * proj.a(2, m);
                sincos_fast(theta, si[m], cr[m]);
            }
        }
    });

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc_re(d), acc_im(d);
        for (std::size_t k = begin; k < end; ++k) {
            std::fill(acc_re.begin(), acc_re.end(), 0.0);
            std::fill(acc_im.begin(), acc_im.end(), 0.0);
            const auto* nb = adj.row_begin(k);
            const auto* nb_end = adj.row_end(k);
            enc.neighbor_counts[k] = static_cast<std::uint32_t>(nb_end - nb);
            for (; nb != nb_end; ++nb) {
                const double* cr = cos_t.data() + static_cast<std::size_t>(*nb) * d;
                const double* si = sin_t.data() + static_cast<std::size_t>(*nb) * d;
                for (std::size_t m = 0; m < d; ++m) {
                    acc_re[m] += cr[m];
                    acc_im[m] += si[m];
                }
            }
            // Elementwise complex division by the unit-modulus phase of k,
            // then row normalization.
            const double* ck = cos_t.data() + k * d;
            const double* sk = sin_t.data() + k * d;
            double* out_re = enc.re.data() + k * d;
            double* out_im = enc.im.data() + k * d;
            double norm2 = 0.0;
            for (std::size_t m = 0; m < d; ++m) {
                const double denom = ck[m] * ck[m] + sk[m] * sk[m];
                const double re = (acc_re[m] * ck[m] + acc_im[m] * sk[m]) / denom;
                const double im = (acc_im[m] * ck[m] - acc_re[m] * sk[m]) / denom;
                out_re[m] = re;
                out_im[m] = im;
                norm2 += re * re + im * im;
            }
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t m = 0; m < d; ++m) {
                out_re[m] *= inv;
                out_im[m] *= inv;
            }
        }
    });
    return enc;
}

std::vector<double> reconstruct_density(const Encoding& enc, std::size_t row,
                                        const RandomProjection& proj,
                                        const std::vector<Vec3>& grid) {
    const auto d = static_cast<std::size_t>(enc.d);
    const double* re = enc.re.data() + row * d;
    const double* im = enc.im.data() + row * d;
    std::vector<double> density(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const Vec3& p = grid[g];
        double acc = 0.0;
        for (std::size_t m = 0; m < d; ++m) {
            const double theta = p.x() * proj.a(0, m) + p.y() * proj.a(1, m) + p.z() * proj.a(2, m);
            double s, c;
            sincos_fast(theta, s, c);
            // Re(conj(exp(i theta)) * G[row, m])
            acc += c * re[m] + s * im[m];
        }
        density[g] = acc / static_cast<double>(d);
    }
    return density;
}

std::vector<std::uint32_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    if (n <= cap) return idx;
    RngStream rng(CounterRng::substream(seed, /*tag=*/0x73756273ULL)); // "subs"
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace evflow
