#pragma once

#include <cstdint>
#include <vector>

#include "prelu/data.hpp"
#include "prelu/net.hpp"
#include "prelu/types.hpp"

namespace prelu {

enum class RefKind { F, Fp };

/// Closed-form classifiers over a subclass basis:
///   F(x)     = sqrt(K1) relu(<mu_plus, x>) - sqrt(K2) relu(<mu_minus, x>)
///   F^(p)(x) = sum_{k<=K1} relu(<mu_k, x>)^p - sum_{k>K1} relu(<mu_k, x>)^p
struct ReferenceClassifier {
    RefKind kind = RefKind::F;
    SubclassBasis basis;
    double p = 1.0;       // Fp only
    Vector mu_plus;       // cached average class directions
    Vector mu_minus;
};

ReferenceClassifier make_reference(RefKind kind, const SubclassBasis& basis, double p = 1.0);

double eval_F(const SubclassBasis& basis, const Vector& x);
double eval_Fp(const SubclassBasis& basis, double p, const Vector& x);

double eval_reference(const ReferenceClassifier& ref, const Vector& x);
Vector eval_reference(const ReferenceClassifier& ref, const Matrix& X);
/// d ref / d x, one row per sample.
Matrix reference_input_gradients(const ReferenceClassifier& ref, const Matrix& X);

/// d f_p / d x for a binary pReLU net, one row per sample.
Matrix net_input_gradients(const PreluNet& net, const Matrix& X);

/// Neuron partition and weights realizing a reference classifier. For F the
/// groups are {I+, I-} with sum_{I+} lambda^2 = sqrt(K1) and
/// sum_{I-} lambda^2 = sqrt(K2); for Fp there are K groups, each summing to 1.
struct RealizationPlan {
    std::vector<std::vector<Index>> groups;
    Vector lambda;   // length h, nonnegative
};

/// The minimal plan: one neuron per group, lambda chosen to meet the
/// normalization exactly.
RealizationPlan default_plan(RefKind kind, Index h, const SubclassBasis& basis);

/// Builds the network of Claim 1. Throws std::invalid_argument if the plan
/// violates the normalization (tolerance 1e-12), groups overlap, or kind is
/// F with p != 1.
PreluNet realize(RefKind kind, Index h, const RealizationPlan& plan, const SubclassBasis& basis,
                 double p = 1.0);

struct DistParams {
    Index n_fit = 4096;      // N1, sphere samples for the least-squares scale
    Index n_chains = 256;    // N2, projected-gradient-ascent chains
    double step = 0.05;
    Index max_iter = 200;
    std::uint64_t seed = 0;
};

struct DistResult {
    double dist = 0.0;
    double c_hat = 0.0;
    bool clamped = false;   // closed-form scale was <= 0 and got clamped
};

/// Estimates dist(f, ref) = inf_{c>0} sup_{|x|=1} |c f(x) - ref(x)|.
/// Stage 1 fits c by least squares over uniform sphere samples; stage 2 runs
/// normalized gradient ascent on |c f - ref|^2 with re-projection to the
/// sphere, and returns the max gap over the chains' final iterates.
/// Chains are seeded by index, so enlarging n_chains never lowers the result
/// for a fixed seed. Throws std::domain_error when f vanishes on the whole
/// fit sample.
DistResult dist_estimate(const PreluNet& net, const ReferenceClassifier& ref,
                         const DistParams& params);

} // namespace prelu
