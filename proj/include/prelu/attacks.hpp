#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "prelu/data.hpp"
#include "prelu/net.hpp"
#include "prelu/reference.hpp"
#include "prelu/types.hpp"

namespace prelu {

enum class AttackNorm { L2, Linf, L1 };

struct AttackSpec {
    AttackNorm norm = AttackNorm::L2;
    double radius = 0.1;
    Index steps = 50;
    double step_size = 0.0;   // 0 -> 2.5 * radius / steps
    Index restarts = 3;
    std::uint64_t seed = 0;
    bool adaptive = false;    // APGD-style schedule (Linf only)

    void validate() const {
        if (radius < 0.0) throw std::invalid_argument("AttackSpec: radius must be >= 0");
        if (steps < 1) throw std::invalid_argument("AttackSpec: steps must be >= 1");
        if (restarts < 1) throw std::invalid_argument("AttackSpec: restarts must be >= 1");
    }
    double effective_step() const { return step_size > 0.0 ? step_size : 2.5 * radius / steps; }
};

/// Batched differentiable binary classifier: the surface attacks need.
class BinaryModel {
public:
    virtual ~BinaryModel() = default;
    virtual Index dim() const = 0;
    virtual Vector values(const Matrix& X) const = 0;
    virtual Matrix input_grads(const Matrix& X) const = 0;
};

class NetModel final : public BinaryModel {
public:
    explicit NetModel(PreluNet net) : net_(std::move(net)) { net_.validate(); }
    Index dim() const override { return net_.dim(); }
    Vector values(const Matrix& X) const override { return forward(net_, X); }
    Matrix input_grads(const Matrix& X) const override { return net_input_gradients(net_, X); }
    const PreluNet& net() const { return net_; }

private:
    PreluNet net_;
};

class ReferenceModel final : public BinaryModel {
public:
    explicit ReferenceModel(ReferenceClassifier ref) : ref_(std::move(ref)) {}
    Index dim() const override { return ref_.basis.D(); }
    Vector values(const Matrix& X) const override { return eval_reference(ref_, X); }
    Matrix input_grads(const Matrix& X) const override {
        return reference_input_gradients(ref_, X);
    }
    const ReferenceClassifier& ref() const { return ref_; }

private:
    ReferenceClassifier ref_;
};

struct AttackResult {
    Matrix delta;                 // n x D perturbations, inside the norm ball
    Vector objective;             // attack objective -y f(x + delta) per sample
    std::vector<bool> stagnated;  // gradient vanished at every visited point
};

struct AttackReport {
    Matrix delta;
    Vector margin_before;   // y * f(x)
    Vector margin_after;    // y * f(x + delta)
    std::vector<bool> success;  // correct before, flipped by the attack
    double clean_acc = 0.0;
    double robust_acc = 0.0;
};

/// Projected gradient ascent on -y f(x + delta) with per-norm step direction
/// (L2: normalized gradient, Linf: sign, L1: steepest single coordinate) and
/// projection onto the radius ball after every step. Returns the best final
/// iterate over restarts; the zero perturbation is always a candidate, so the
/// attacked margin never exceeds the clean one. Restart 0 starts from zero,
/// later restarts from seeded random points in the ball.
AttackResult pgd(const BinaryModel& model, const Matrix& X, const Vector& y,
                 const AttackSpec& spec);

/// Linf PGD with momentum 0.75 and a per-sample halving step schedule
/// triggered when the best objective fails to improve across a checkpoint
/// window; tracks the best-so-far iterate.
AttackResult apgd_linf(const BinaryModel& model, const Matrix& X, const Vector& y,
                       const AttackSpec& spec);

/// Analytic attack on F: returns x - y (1+rho)/sqrt(K) d0 with
/// d0 = (sqrt(K1) mu_plus - sqrt(K2) mu_minus) / sqrt(K).
Vector d0_attack(const SubclassBasis& basis, const Vector& x, int y, double rho);
Vector d0_direction(const SubclassBasis& basis);

/// Oracle attack on F^(p): x + scale * (-mu_z + mu_opp)/sqrt(2), where
/// mu_opp is the last center of the opposite class (first center when z is
/// negative-class). z is the 1-based latent subclass.
Vector subclass_swap_attack(const SubclassBasis& basis, const Vector& x, Index z, double scale);

/// Runs the spec'd attack over a dataset and aggregates robust accuracy:
/// the fraction of samples classified correctly both before and after the
/// perturbation. Deterministic for a fixed seed.
AttackReport robust_accuracy(const BinaryModel& model, const Dataset& data,
                             const AttackSpec& spec);

/// Multiclass variant: PGD ascent on the margin max_{c != y} f_c - f_y.
AttackReport robust_accuracy_multiclass(const PreluNet& net, const Dataset& data,
                                        const AttackSpec& spec);

} // namespace prelu
