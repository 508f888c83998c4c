#pragma once

#include <cstdint>
#include <string>

#include "prelu/attacks.hpp"
#include "prelu/data.hpp"
#include "prelu/net.hpp"
#include "prelu/types.hpp"

namespace prelu {

/// Full description of one experiment run. Serializable to/from JSON so a
/// config replays to byte-identical outputs; the FNV-1a hash of the
/// serialized form is stamped into every emitted CSV.
struct ExperimentConfig {
    std::string experiment = "conjecture-validate";
    ClusterSpec cluster{1000, 10, 6, 0.1, 0};
    Index n_train = 1000;
    Index n_test = 2000;
    BasisMode basis_mode = BasisMode::RandomOrthogonal;

    InitSpec init;
    TrainConfig train;
    Index width = 2000;
    std::vector<double> p_values = {1.0, 3.0};
    std::vector<double> alphas = {0.0, 0.1};
    std::vector<double> attack_radii;
    AttackSpec attack;
    DistParams dist;

    std::string out_dir = "out";
    std::uint64_t seed = 0;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
};

std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Named presets encoding the paper's setups: "synth-k10" (D=1000, K=10,
/// K1=6), "synth-k20" (K=20, K1=8), "synth-desk" (D=200, K=6, K1=4, the fast
/// verification preset), "mnist".
ExperimentConfig preset(const std::string& name);

/// Trains pReLU nets for the configured p values, estimates dist(f_p, F) or
/// dist(f_p, F^(p)) per alpha, writes distance curves, contribution bars,
/// cosine maps, and L2-PGD robustness sweeps.
int run_conjecture_validate(const ExperimentConfig& cfg);

/// Sweeps the attack radius for the closed-form classifiers (and trained nets
/// when configured) and locates the 50%-robust-accuracy crossover.
int run_critical_radius(const ExperimentConfig& cfg);

/// MNIST parity / digits pipelines (h=500, Adam, 50 epochs by default).
int run_mnist(const ExperimentConfig& cfg, bool digits);

/// Distance-estimator run between a checkpointed net and a reference.
int run_dist(const std::string& checkpoint, const std::string& ref_kind, double p,
             const ExperimentConfig& cfg);

/// Executes checks 1-8 and writes a machine-readable manifest; returns 0 when
/// every check passes, 1 otherwise.
int run_theory_suite(const std::string& out_dir);

} // namespace prelu
