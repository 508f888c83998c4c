#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prelu/data.hpp"
#include "prelu/rng.hpp"
#include "prelu/types.hpp"

namespace prelu {

/// Shallow pReLU network: f(x) = sum_j v_j * relu(<x, w_j>)^p / |w_j|^{p-1}.
/// Rows of W are the neurons. V is h x C; C = 1 is the scalar (binary) net,
/// C > 1 the multiclass extension with shared first layer. Rows with
/// |w_j| = 0 contribute exactly 0 to the forward pass and get zero gradient.
struct PreluNet {
    Matrix W;   // h x D
    Matrix V;   // h x C
    double p = 1.0;

    Index width() const { return W.rows(); }
    Index dim() const { return W.cols(); }
    Index heads() const { return V.cols(); }
    bool binary() const { return heads() == 1; }
    Vector v() const { return V.col(0); }

    void validate() const {
        if (p < 1.0) throw std::invalid_argument("PreluNet: p must be >= 1");
        if (V.rows() != W.rows()) throw std::invalid_argument("PreluNet: V/W row mismatch");
    }
};

enum class DirectionLaw { Uniform, Gaussian };

/// Small balanced initialization: w_j(0) = epsilon * w_{j0} with w_{j0} drawn
/// from the direction law (uniform entries on (-1/sqrt(D), 1/sqrt(D)) or
/// standard Gaussian entries), and v_j(0) = +/-|w_j(0)| with fair coin signs.
struct InitSpec {
    double epsilon = 1e-6;
    DirectionLaw law = DirectionLaw::Uniform;
    bool balanced = true;    // if false, v is drawn from the direction law at scale epsilon
    std::uint64_t seed = 0;
};

enum class LossKind { Exponential, Logistic, CrossEntropy };
enum class Optimizer { Sgd, Adam };
enum class Reduction { Mean, Sum };

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    LossKind loss = LossKind::Exponential;
    Optimizer optimizer = Optimizer::Sgd;
    double step_size = 0.2;
    Index batch_size = 100;
    Index epochs = 1;
    std::uint64_t seed = 0;
    Index record_cadence = 1;       // epochs between history rows
    Reduction reduction = Reduction::Mean;
    double stop_loss = 0.0;         // stop early once mean train loss drops below (0 = off)
    bool record_stable_rank = false;
    AdamParams adam;

    void validate() const {
        if (step_size <= 0.0) throw std::invalid_argument("TrainConfig: step_size must be > 0");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    }
};

struct Gradients {
    Matrix dW;
    Matrix dV;
};

struct TrainSnapshot {
    Index epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;          // NaN when no eval set
    double stable_rank = 0.0;       // NaN unless requested
    double max_balancedness_drift = 0.0;
    Vector neuron_norms;            // |w_j| at snapshot time
};

using SnapshotHook = std::function<void(const TrainSnapshot&)>;

struct TrainHistory {
    std::vector<TrainSnapshot> rows;
};

/// Thrown when the loss turns NaN/Inf during training.
struct TrainingDiverged : std::runtime_error {
    Index iteration;
    Index neuron;
    TrainingDiverged(Index it, Index j)
        : std::runtime_error("training diverged (non-finite loss) at iteration " +
                             std::to_string(it) + ", worst neuron " + std::to_string(j)),
          iteration(it), neuron(j) {}
};

/// relu(s)^p, with p >= 1 real; small integer exponents avoid std::pow.
double relu_pow(double s, double p);

PreluNet init_balanced(Index h, Index D, const InitSpec& spec);

/// Kaiming-style init used for the MNIST runs: W entries N(0, 2/D),
/// V entries N(0, 2/h).
PreluNet init_kaiming(Index h, Index D, Index heads, std::uint64_t seed);

double loss_value(double y, double yhat, LossKind kind);
/// d loss / d yhat.
double loss_derivative(double y, double yhat, LossKind kind);

/// Hidden post-activation features: entry (i,j) = relu(<x_i,w_j>)^p / |w_j|^{p-1}.
Matrix hidden_features(const PreluNet& net, const Matrix& X);

/// Batched forward pass; returns n values (binary) using V.col(0).
Vector forward(const PreluNet& net, const Matrix& X);
double forward(const PreluNet& net, const Vector& x);

/// Multiclass logits, n x C.
Matrix forward_logits(const PreluNet& net, const Matrix& X);

/// Analytic gradient of the summed loss over the batch (binary nets).
/// y entries must be +/-1. The subgradient at the activation kink is 0.
Gradients backward(const PreluNet& net, const Matrix& X, const Vector& y, LossKind kind);

/// Analytic gradient of summed softmax cross-entropy (multiclass nets);
/// labels are class indices in [0, C).
Gradients backward_ce(const PreluNet& net, const Matrix& X, const VectorI& labels);

/// Mean loss of the batch.
double batch_loss(const PreluNet& net, const Matrix& X, const Vector& y, LossKind kind);
double batch_loss_ce(const PreluNet& net, const Matrix& X, const VectorI& labels);

/// Fraction of correctly classified samples (sign test or argmax).
double accuracy(const PreluNet& net, const Dataset& data);

/// Mini-batch training with seeded shuffling. Deterministic for a fixed
/// config. Throws TrainingDiverged on NaN/Inf loss.
TrainHistory train(PreluNet& net, const Dataset& data, const TrainConfig& cfg,
                   const Dataset* eval = nullptr, const SnapshotHook& hook = nullptr);

/// |A|_F^2 / |A|_2^2 with the spectral norm from power iteration at relative
/// tolerance 1e-8. Throws std::domain_error on an all-zero matrix.
double stable_rank(const Matrix& A);

/// max_j |(|v_j|^2 - |w_j|^2) - baseline_j|. With balanced init the baseline
/// is zero and this is the conserved-quantity drift.
double balancedness_drift(const PreluNet& net, const Vector& baseline);
Vector balancedness(const PreluNet& net);  // per-neuron |v_j|^2 - |w_j|^2

} // namespace prelu
