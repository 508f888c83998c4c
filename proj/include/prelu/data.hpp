#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prelu/rng.hpp"
#include "prelu/types.hpp"

namespace prelu {

/// Parameters of the clustered data model: K orthonormal subclass centers in
/// R^D, the first K1 of them labeled +1, Gaussian intra-subclass noise of
/// entrywise variance alpha^2/D.
struct ClusterSpec {
    Index D = 0;
    Index K = 0;
    Index K1 = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class BasisMode { Canonical, RandomOrthogonal };

/// K orthonormal subclass centers, one per row of mu.
struct SubclassBasis {
    Matrix mu;   // K x D, rows orthonormal
    Index K1 = 0;

    Index K() const { return mu.rows(); }
    Index D() const { return mu.cols(); }
    Index K2() const { return K() - K1; }
    Vector center(Index k) const { return mu.row(k).transpose(); }
};

enum class Provenance { Synthetic, Simplified, MnistParity, MnistDigits };

/// One observation. y is the class label: +/-1 for binary provenances,
/// 0..9 for mnist-digits. z, when present, is the 1-based latent subclass
/// (synthetic/simplified) or digit+1 (mnist-parity).
struct LabeledSample {
    Vector x;
    int y = 0;
    std::optional<Index> z;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    Provenance provenance = Provenance::Synthetic;

    Index size() const { return static_cast<Index>(samples.size()); }
    Index dim() const { return samples.empty() ? 0 : samples.front().x.size(); }

    /// Samples stacked row-wise into an n x D matrix.
    Matrix X() const;
    /// Labels as a vector of doubles (+/-1 or class index).
    Vector y() const;

    void validate() const;
};

std::string provenance_name(Provenance p);

/// Builds the K orthonormal centers. Canonical mode takes the first K
/// standard basis vectors; random-orthogonal orthonormalizes a seeded
/// Gaussian K x D matrix. Throws std::invalid_argument if K > D.
SubclassBasis make_basis(const ClusterSpec& spec, BasisMode mode);

/// Average class directions (mu_plus, mu_minus), both unit norm:
/// mu_plus = K1^{-1/2} sum_{k<=K1} mu_k, mu_minus likewise over k>K1.
std::pair<Vector, Vector> average_centers(const SubclassBasis& basis);

/// Draws n samples: z uniform on [K], x = mu_z + eps with eps entries
/// N(0, alpha^2/D), y = +1 iff z <= K1. Deterministic for a fixed rng state.
Dataset sample_synthetic(const ClusterSpec& spec, const SubclassBasis& basis, Index n, Rng& rng);

/// The K-point dataset of exact subclass centers with their class labels.
Dataset simplified_dataset(const SubclassBasis& basis);

} // namespace prelu
