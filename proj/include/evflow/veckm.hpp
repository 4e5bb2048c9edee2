#pragma once

#include <cstdint>
#include <vector>

#include "evflow/types.hpp"

namespace evflow {

/// Ellipsoidal neighborhood radii. An event j neighbors k when
/// ||((tj-tk)/dt, (xj-xk)/dx, (yj-yk)/dy)||_2 < 1 (strict, open ball).
struct NeighborhoodSpec {
    double dt = 0.02;   ///< seconds
    double dx = 0.02;   ///< normalized pixels
    double dy = 0.02;
};

/**
 * Fixed random projection for the complex random-feature encoding. Entries
 * are Normal(0, sigma2) drawn from a counter-based generator, so the matrix
 * is a pure function of (seed, d, sigma2) and can be regenerated from the
 * seed stored in a model file.
 */
struct RandomProjection {
    Eigen::Matrix3Xd a;          ///< 3 x d
    std::uint64_t seed = 0;
    double sigma2 = 25.0;
    int d = 384;

    static RandomProjection generate(std::uint64_t seed, int d, double sigma2 = 25.0);
};

/// Symmetric boolean adjacency in row-compressed form. Every row contains
/// its own index (an event neighbors itself at distance zero) and neighbor
/// lists are sorted ascending.
struct Adjacency {
    std::vector<std::uint64_t> offsets;     ///< size N+1
    std::vector<std::uint32_t> neighbors;

    std::size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t degree(std::size_t row) const { return offsets[row + 1] - offsets[row]; }
    const std::uint32_t* row_begin(std::size_t row) const { return neighbors.data() + offsets[row]; }
    const std::uint32_t* row_end(std::size_t row) const { return neighbors.data() + offsets[row + 1]; }
};

/**
 * Per-event complex encoding G (N x d), rows normalized to unit Euclidean
 * norm. Row k depends only on the relative offsets of its neighbors, which
 * is what makes the encoding translation invariant.
 */
struct Encoding {
    std::size_t n = 0;
    int d = 0;
    std::vector<double> re;                     ///< n*d, row-major
    std::vector<double> im;
    std::vector<std::uint32_t> neighbor_counts; ///< per row, includes self

    double real(std::size_t row, int col) const { return re[row * static_cast<std::size_t>(d) + static_cast<std::size_t>(col)]; }
    double imag(std::size_t row, int col) const { return im[row * static_cast<std::size_t>(d) + static_cast<std::size_t>(col)]; }
};

/// Exact ellipsoidal-ball adjacency. Events are bucketed into dx-by-dy cells;
/// candidates from the 3x3 cell block are pruned to the +/-dt time window
/// before the full distance check, so the result matches the all-pairs rule
/// exactly at near-linear cost.
Adjacency build_adjacency(const EventCloud& cloud, const NeighborhoodSpec& spec);

/// VecKM encoding: A = exp(i X a) on the delta-normalized coordinates
/// (the same frame the adjacency was built in), G = normalize((J A) ./ A)
/// with elementwise complex division.
Encoding encode(const EventCloud& cloud, const Adjacency& adj, const NeighborhoodSpec& spec,
                const RandomProjection& proj);

/// Kernel-mixture density estimate reconstructed from one encoding row,
/// evaluated at grid points given in delta-normalized relative coordinates.
/// Diagnostics only.
std::vector<double> reconstruct_density(const Encoding& enc, std::size_t row,
                                        const RandomProjection& proj,
                                        const std::vector<Vec3>& grid);

/// Deterministic uniform subsample without replacement: returns `cap` sorted
/// indices out of [0, n), or the identity when n <= cap.
std::vector<std::uint32_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed);

/// Default per-slice event cap (larger slices are subsampled to this).
constexpr std::size_t kMaxEventsPerSlice = 80000;

} // namespace evflow
