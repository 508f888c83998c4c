#pragma once

#include <string>
#include <vector>

#include "prelu/data.hpp"
#include "prelu/net.hpp"
#include "prelu/reference.hpp"
#include "prelu/rng.hpp"
#include "prelu/types.hpp"

namespace prelu {

/// The simplified dataset together with the activation exponent; the pair
/// determines the extremal-vector field x^(p)(w) that drives neuron
/// directions during the alignment phase.
struct ExtremalField {
    Dataset dataset;   // provenance must be Simplified
    double p = 1.0;

    void validate() const {
        dataset.validate();
        if (dataset.provenance != Provenance::Simplified)
            throw std::invalid_argument("ExtremalField: dataset must be the simplified one");
        if (p < 1.0) throw std::invalid_argument("ExtremalField: p must be >= 1");
    }
};

/// x^(p)(w) = sum_k gamma_k(w) y_k x_k p cos^{p-1}(x_k, w). A data point is
/// active when cos(x_k, w) > 1e-12; the tolerance keeps structurally
/// orthogonal points inactive for p = 1 under floating-point dust (the
/// subgradient at the kink is taken as 0).
Vector extremal_vector(const ExtremalField& field, const Vector& w);

/// <P_w^perp x^(p)(w), target> / |target| -- the leading-order d/dt of
/// cos(w, target) for a positive neuron; negative neurons flip the sign.
double alignment_derivative(const ExtremalField& field, const Vector& w, const Vector& target);

enum class SweepTarget { ClassAverage, Subclass };
enum class NeuronSign { Positive, Negative };

struct SweepSummary {
    double min_derivative = 0.0;
    double max_derivative = 0.0;
    Index samples = 0;
    Index rejected = 0;
};

/// Samples w on the cone {cos(w, target) = 1 - delta} inside the relevant
/// activation region and reports the range of the alignment derivative
/// (field sign flipped for negative neurons).
///   - class-average: target is mu_plus (mu_minus for negative neurons), the
///     cone lives in the span of the same-class centers, and samples that
///     fail to activate every same-class center are rejected.
///   - subclass: one cone per same-class center, sampled within the span of
///     all K centers; samples within 1e-8 of an activation kink are rejected.
/// Throws std::runtime_error if the activation region at this delta rejects
/// essentially everything.
SweepSummary alignment_bias_sweep(const ExtremalField& field, const SubclassBasis& basis,
                                  double delta, Index n_samples, SweepTarget which,
                                  NeuronSign sign, Rng& rng);

/// g_p(q) = (sum_i z_i^q)(sum_i z_i^{p+1-q}), z_i >= 0 and not all zero.
/// Zero entries contribute 0^q (with 0^0 = 1); negative exponents with zero
/// entries are a domain error.
double gp(double q, const Vector& z, double p);

/// Closed-form second derivative sum_{i,j} z_i^q z_j^{p+1-q} (log z_i - log z_j)^2
/// restricted to the strictly positive entries.
double gp_second_derivative(double q, const Vector& z, double p);

enum class BoundEvent { Clean, D0Attack, PgdRobust };

/// Monte Carlo estimate of a probability event with a 95% Wilson interval.
/// The direction of the paper's bounds is checked qualitatively; the unknown
/// constant in the exponents is never estimated.
struct BoundCheck {
    std::string description;
    double estimate = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    Index n = 0;
};

/// Events: Clean       -- correct classification of a fresh sample;
///         D0Attack    -- misclassification under the d0 attack, param = rho;
///         PgdRobust   -- survival of an L2 PGD attack, param = radius.
BoundCheck mc_bound_check(const ReferenceClassifier& ref, const ClusterSpec& spec,
                          const SubclassBasis& basis, BoundEvent event, double param, Index n,
                          Rng& rng);

struct AlignmentReport {
    Vector contributions;               // |v_j| |w_j|, sorted descending
    std::vector<Index> by_contribution; // neuron indices in that order
    Matrix cosines;  // rows follow by_contribution; cols: mu_plus, mu_minus, mu_1..mu_K
    std::vector<Index> grouping;        // row order clustering neurons by argmax column
};

AlignmentReport alignment_report(const PreluNet& net, const SubclassBasis& basis);

} // namespace prelu
