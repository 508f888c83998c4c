#include "prelu/reference.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace prelu {

ReferenceClassifier make_reference(RefKind kind, const SubclassBasis& basis, double p) {
    if (kind == RefKind::Fp && p < 1.0) throw std::invalid_argument("make_reference: Fp needs p >= 1");
    ReferenceClassifier ref;
    ref.kind = kind;
    ref.basis = basis;
    ref.p = (kind == RefKind::F) ? 1.0 : p;
    std::tie(ref.mu_plus, ref.mu_minus) = average_centers(basis);
    return ref;
}

double eval_F(const SubclassBasis& basis, const Vector& x) {
    if (x.size() != basis.D()) throw std::invalid_argument("eval_F: dimension mismatch");
    auto [plus, minus] = average_centers(basis);
    const double k1 = std::sqrt(static_cast<double>(basis.K1));
    const double k2 = std::sqrt(static_cast<double>(basis.K2()));
    return k1 * std::max(plus.dot(x), 0.0) - k2 * std::max(minus.dot(x), 0.0);
}

double eval_Fp(const SubclassBasis& basis, double p, const Vector& x) {
    if (p < 1.0) throw std::invalid_argument("eval_Fp: p must be >= 1");
    if (x.size() != basis.D()) throw std::invalid_argument("eval_Fp: dimension mismatch");
    double out = 0.0;
    for (Index k = 0; k < basis.K(); ++k) {
        const double term = relu_pow(basis.mu.row(k).dot(x.transpose()), p);
        out += (k < basis.K1) ? term : -term;
    }
    return out;
}

double eval_reference(const ReferenceClassifier& ref, const Vector& x) {
    if (ref.kind == RefKind::F) {
        const double k1 = std::sqrt(static_cast<double>(ref.basis.K1));
        const double k2 = std::sqrt(static_cast<double>(ref.basis.K2()));
        return k1 * std::max(ref.mu_plus.dot(x), 0.0) - k2 * std::max(ref.mu_minus.dot(x), 0.0);
    }
    return eval_Fp(ref.basis, ref.p, x);
}

Vector eval_reference(const ReferenceClassifier& ref, const Matrix& X) {
    if (X.cols() != ref.basis.D()) throw std::invalid_argument("eval_reference: dimension mismatch");
    const Index n = X.rows();
    Vector out = Vector::Zero(n);
    if (ref.kind == RefKind::F) {
        const double k1 = std::sqrt(static_cast<double>(ref.basis.K1));
        const double k2 = std::sqrt(static_cast<double>(ref.basis.K2()));
        Vector sp = X * ref.mu_plus;
        Vector sm = X * ref.mu_minus;
        for (Index i = 0; i < n; ++i)
            out[i] = k1 * std::max(sp[i], 0.0) - k2 * std::max(sm[i], 0.0);
        return out;
    }
    Matrix S = X * ref.basis.mu.transpose();  // n x K
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < ref.basis.K(); ++k) {
            const double term = relu_pow(S(i, k), ref.p);
            out[i] += (k < ref.basis.K1) ? term : -term;
        }
    return out;
}

Matrix reference_input_gradients(const ReferenceClassifier& ref, const Matrix& X) {
    if (X.cols() != ref.basis.D()) throw std::invalid_argument("reference gradients: dimension mismatch");
    const Index n = X.rows();
    if (ref.kind == RefKind::F) {
        const double k1 = std::sqrt(static_cast<double>(ref.basis.K1));
        const double k2 = std::sqrt(static_cast<double>(ref.basis.K2()));
        Vector sp = X * ref.mu_plus;
        Vector sm = X * ref.mu_minus;
        Matrix g = Matrix::Zero(n, X.cols());
        for (Index i = 0; i < n; ++i) {
            if (sp[i] > 0.0) g.row(i) += k1 * ref.mu_plus.transpose();
            if (sm[i] > 0.0) g.row(i) -= k2 * ref.mu_minus.transpose();
        }
        return g;
    }
    Matrix S = X * ref.basis.mu.transpose();
    Matrix C(n, ref.basis.K());  // per-center coefficients p * relu(s)^{p-1}
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < ref.basis.K(); ++k) {
            const double c = (S(i, k) > 0.0) ? ref.p * relu_pow(S(i, k), ref.p - 1.0) : 0.0;
            C(i, k) = (k < ref.basis.K1) ? c : -c;
        }
    return C * ref.basis.mu;
}

Matrix net_input_gradients(const PreluNet& net, const Matrix& X) {
    if (!net.binary()) throw std::invalid_argument("net_input_gradients: binary nets only");
    if (X.cols() != net.dim()) throw std::invalid_argument("net gradients: dimension mismatch");
    Matrix S = X * net.W.transpose();
    Vector norms = net.W.rowwise().norm();
    Matrix C(X.rows(), net.width());
    for (Index j = 0; j < net.width(); ++j) {
        const double scale =
            (norms[j] > 0.0) ? net.V(j, 0) * net.p / relu_pow(norms[j], net.p - 1.0) : 0.0;
        for (Index i = 0; i < X.rows(); ++i) {
            C(i, j) = (S(i, j) > 0.0) ? scale * relu_pow(S(i, j), net.p - 1.0) : 0.0;
        }
    }
    return C * net.W;
}

RealizationPlan default_plan(RefKind kind, Index h, const SubclassBasis& basis) {
    RealizationPlan plan;
    plan.lambda = Vector::Zero(h);
    if (kind == RefKind::F) {
        if (h < 2) throw std::invalid_argument("default_plan: F needs h >= 2");
        plan.groups = {{0}, {1}};
        plan.lambda[0] = std::pow(static_cast<double>(basis.K1), 0.25);
        plan.lambda[1] = std::pow(static_cast<double>(basis.K2()), 0.25);
        return plan;
    }
    if (h < basis.K()) throw std::invalid_argument("default_plan: Fp needs h >= K");
    plan.groups.resize(static_cast<std::size_t>(basis.K()));
    for (Index k = 0; k < basis.K(); ++k) {
        plan.groups[static_cast<std::size_t>(k)] = {k};
        plan.lambda[k] = 1.0;
    }
    return plan;
}

PreluNet realize(RefKind kind, Index h, const RealizationPlan& plan, const SubclassBasis& basis,
                 double p) {
    if (kind == RefKind::F && p != 1.0)
        throw std::invalid_argument("realize: F is a p = 1 construction");
    if (p < 1.0) throw std::invalid_argument("realize: p must be >= 1");
    if (plan.lambda.size() != h) throw std::invalid_argument("realize: lambda length != h");
    if (plan.lambda.minCoeff() < 0.0) throw std::invalid_argument("realize: lambda must be nonnegative");

    const std::size_t expected_groups = (kind == RefKind::F) ? 2u : static_cast<std::size_t>(basis.K());
    if (plan.groups.size() != expected_groups)
        throw std::invalid_argument("realize: wrong number of index groups");

    std::set<Index> seen;
    for (const auto& grp : plan.groups) {
        if (grp.empty()) throw std::invalid_argument("realize: empty index group");
        for (Index j : grp) {
            if (j < 0 || j >= h) throw std::invalid_argument("realize: neuron index out of range");
            if (!seen.insert(j).second) throw std::invalid_argument("realize: overlapping index groups");
        }
    }

    auto group_mass = [&](std::size_t g) {
        double s = 0.0;
        for (Index j : plan.groups[g]) s += plan.lambda[j] * plan.lambda[j];
        return s;
    };

    PreluNet net;
    net.p = p;
    net.W = Matrix::Zero(h, basis.D());
    net.V = Matrix::Zero(h, 1);

    if (kind == RefKind::F) {
        auto [plus, minus] = average_centers(basis);
        const double want_plus = std::sqrt(static_cast<double>(basis.K1));
        const double want_minus = std::sqrt(static_cast<double>(basis.K2()));
        if (std::abs(group_mass(0) - want_plus) > 1e-12 ||
            std::abs(group_mass(1) - want_minus) > 1e-12)
            throw std::invalid_argument("realize: lambda mass violates the F normalization");
        for (Index j : plan.groups[0]) {
            net.W.row(j) = plan.lambda[j] * plus.transpose();
            net.V(j, 0) = plan.lambda[j];
        }
        for (Index j : plan.groups[1]) {
            net.W.row(j) = plan.lambda[j] * minus.transpose();
            net.V(j, 0) = -plan.lambda[j];
        }
        return net;
    }

    for (Index k = 0; k < basis.K(); ++k) {
        if (std::abs(group_mass(static_cast<std::size_t>(k)) - 1.0) > 1e-12)
            throw std::invalid_argument("realize: lambda mass violates the Fp normalization");
        for (Index j : plan.groups[static_cast<std::size_t>(k)]) {
            net.W.row(j) = plan.lambda[j] * basis.mu.row(k);
            net.V(j, 0) = (k < basis.K1) ? plan.lambda[j] : -plan.lambda[j];
        }
    }
    return net;
}

DistResult dist_estimate(const PreluNet& net, const ReferenceClassifier& ref,
                         const DistParams& params) {
    if (params.n_fit < 1 || params.n_chains < 1)
        throw std::invalid_argument("dist_estimate: need N1, N2 >= 1");
    if (params.step <= 0.0) throw std::invalid_argument("dist_estimate: step must be > 0");
    const Index D = net.dim();
    if (D != ref.basis.D()) throw std::invalid_argument("dist_estimate: dimension mismatch");

    Rng root(params.seed);
    Rng fit_rng = root.split(1);

    Matrix Xfit(params.n_fit, D);
    for (Index i = 0; i < params.n_fit; ++i) Xfit.row(i) = fit_rng.unit_sphere(D).transpose();
    Vector f = forward(net, Xfit);
    Vector r = eval_reference(ref, Xfit);
    const double ff = f.squaredNorm();
    if (ff == 0.0) throw std::domain_error("dist_estimate: f vanishes on the fit sample");

    DistResult result;
    result.c_hat = f.dot(r) / ff;
    if (result.c_hat <= 0.0) {
        result.c_hat = 1e-12;
        result.clamped = true;
    }

    // One start point per chain, seeded by chain index so chain sets nest.
    Matrix X(params.n_chains, D);
    for (Index i = 0; i < params.n_chains; ++i) {
        Rng chain = root.split(1000 + static_cast<std::uint64_t>(i));
        X.row(i) = chain.unit_sphere(D).transpose();
    }

    const double c = result.c_hat;
    for (Index t = 0; t < params.max_iter; ++t) {
        Vector gap = c * forward(net, X) - eval_reference(ref, X);
        Matrix grad = c * net_input_gradients(net, X) - reference_input_gradients(ref, X);
        grad.array().colwise() *= 2.0 * gap.array();
        for (Index i = 0; i < params.n_chains; ++i) {
            const double gn = grad.row(i).norm();
            if (gn > 0.0) X.row(i) += (params.step / gn) * grad.row(i);
            X.row(i) /= X.row(i).norm();
        }
    }
    Vector gap = (c * forward(net, X) - eval_reference(ref, X)).cwiseAbs();
    result.dist = gap.maxCoeff();
    return result;
}

} // namespace prelu
