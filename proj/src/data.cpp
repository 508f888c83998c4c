#include "prelu/data.hpp"

#include <stdexcept>

namespace prelu {

void ClusterSpec::validate() const {
    if (K1 < 1 || K1 >= K) throw std::invalid_argument("ClusterSpec: need 1 <= K1 < K");
    if (K > D) throw std::invalid_argument("ClusterSpec: need K <= D");
    if (alpha < 0.0) throw std::invalid_argument("ClusterSpec: alpha must be >= 0");
}

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Synthetic: return "synthetic";
        case Provenance::Simplified: return "simplified";
        case Provenance::MnistParity: return "mnist-parity";
        case Provenance::MnistDigits: return "mnist-digits";
    }
    return "unknown";
}

Matrix Dataset::X() const {
    Matrix out(size(), dim());
    for (Index i = 0; i < size(); ++i) out.row(i) = samples[static_cast<std::size_t>(i)].x.transpose();
    return out;
}

Vector Dataset::y() const {
    Vector out(size());
    for (Index i = 0; i < size(); ++i) out[i] = samples[static_cast<std::size_t>(i)].y;
    return out;
}

void Dataset::validate() const {
    if (samples.empty()) throw std::invalid_argument("Dataset: empty");
    const Index D = dim();
    for (const auto& s : samples) {
        if (s.x.size() != D) throw std::invalid_argument("Dataset: inconsistent sample dimension");
    }
}

SubclassBasis make_basis(const ClusterSpec& spec, BasisMode mode) {
    spec.validate();
    SubclassBasis basis;
    basis.K1 = spec.K1;
    if (mode == BasisMode::Canonical) {
        basis.mu = Matrix::Zero(spec.K, spec.D);
        for (Index k = 0; k < spec.K; ++k) basis.mu(k, k) = 1.0;
        return basis;
    }
    Rng rng = Rng(spec.seed).split(0x6261736973ull);  // "basis"
    Matrix g = rng.normal_matrix(spec.D, spec.K);
    // Thin QR of the D x K Gaussian: columns of Q are orthonormal; the rows
    // of Q^T are the centers. Fix signs so the result does not depend on the
    // QR implementation's sign convention.
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(spec.D, spec.K);
    Matrix r = qr.matrixQR().topRows(spec.K).template triangularView<Eigen::Upper>();
    for (Index k = 0; k < spec.K; ++k)
        if (r(k, k) < 0.0) q.col(k) = -q.col(k);
    basis.mu = q.transpose();
    return basis;
}

std::pair<Vector, Vector> average_centers(const SubclassBasis& basis) {
    const Index K = basis.K();
    const Index K1 = basis.K1;
    Vector plus = Vector::Zero(basis.D());
    Vector minus = Vector::Zero(basis.D());
    for (Index k = 0; k < K1; ++k) plus += basis.mu.row(k).transpose();
    for (Index k = K1; k < K; ++k) minus += basis.mu.row(k).transpose();
    plus /= std::sqrt(static_cast<double>(K1));
    minus /= std::sqrt(static_cast<double>(K - K1));
    return {plus, minus};
}

Dataset sample_synthetic(const ClusterSpec& spec, const SubclassBasis& basis, Index n, Rng& rng) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("sample_synthetic: need n >= 1");
    const double noise_std = spec.alpha / std::sqrt(static_cast<double>(spec.D));
    Dataset ds;
    ds.provenance = Provenance::Synthetic;
    ds.samples.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Index z = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(spec.K)));
        LabeledSample s;
        s.x = basis.mu.row(z).transpose();
        if (noise_std > 0.0) s.x += noise_std * rng.normal_vector(spec.D);
        s.y = (z < spec.K1) ? +1 : -1;
        s.z = z + 1;  // 1-based subclass index
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Dataset simplified_dataset(const SubclassBasis& basis) {
    Dataset ds;
    ds.provenance = Provenance::Simplified;
    ds.samples.reserve(static_cast<std::size_t>(basis.K()));
    for (Index k = 0; k < basis.K(); ++k) {
        LabeledSample s;
        s.x = basis.mu.row(k).transpose();
        s.y = (k < basis.K1) ? +1 : -1;
        s.z = k + 1;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace prelu
