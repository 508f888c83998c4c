#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prelu/experiments.hpp"

namespace {

prelu::ExperimentConfig load_config(const std::string& config_path, const std::string& preset_name,
                                    std::uint64_t seed, const std::string& out_dir) {
    prelu::ExperimentConfig cfg =
        preset_name.empty() ? prelu::ExperimentConfig{} : prelu::preset(preset_name);
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = prelu::ExperimentConfig::from_json(ss.str());
    }
    if (seed != 0) {
        cfg.seed = seed;
        cfg.cluster.seed = seed;
        cfg.init.seed = seed ^ 0x1111;
        cfg.train.seed = seed ^ 0x2222;
        cfg.attack.seed = seed ^ 0x3333;
        cfg.dist.seed = seed ^ 0x4444;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pReLU workbench: synthetic cluster experiments, closed-form classifiers, "
                 "adversarial attacks, and the theory verification suite"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON config file (see README for the schema)");
    app.add_option("--preset", preset_name, "preset name: synth-desk, synth-k10, synth-k20, radius, mnist");
    app.add_option("--seed", seed, "override every seed in the config");
    app.add_option("--out", out_dir, "output directory");

    auto* synth = app.add_subcommand("synth", "train pReLU nets on the synthetic clusters and "
                                              "validate the convergence conjecture");
    auto* radius = app.add_subcommand("radius", "locate the robust-accuracy crossover radius");
    auto* mnist_parity = app.add_subcommand("mnist-parity", "MNIST parity experiment");
    auto* mnist_digits = app.add_subcommand("mnist-digits", "MNIST 10-class experiment");
    auto* theory = app.add_subcommand("theory", "run verification checks 1-8 and write a manifest");
    auto* dist = app.add_subcommand("dist", "estimate dist(f, F) for a checkpointed net");

    std::string checkpoint, ref_kind = "F";
    double ref_p = 1.0;
    dist->add_option("--checkpoint", checkpoint, "net checkpoint file")->required();
    dist->add_option("--ref", ref_kind, "reference kind: F or Fp");
    dist->add_option("--p", ref_p, "exponent for Fp");

    CLI11_PARSE(app, argc, argv);

    try {
        if (theory->parsed()) {
            prelu::ExperimentConfig cfg = load_config(config_path, "", seed, out_dir);
            return prelu::run_theory_suite(out_dir.empty() ? "out" : cfg.out_dir) == 0 ? 0 : 1;
        }
        if (synth->parsed()) {
            prelu::ExperimentConfig cfg =
                load_config(config_path, preset_name.empty() ? "synth-desk" : preset_name, seed, out_dir);
            return prelu::run_conjecture_validate(cfg);
        }
        if (radius->parsed()) {
            prelu::ExperimentConfig cfg =
                load_config(config_path, preset_name.empty() ? "radius" : preset_name, seed, out_dir);
            return prelu::run_critical_radius(cfg);
        }
        if (mnist_parity->parsed() || mnist_digits->parsed()) {
            prelu::ExperimentConfig cfg =
                load_config(config_path, preset_name.empty() ? "mnist" : preset_name, seed, out_dir);
            const int rc = prelu::run_mnist(cfg, mnist_digits->parsed());
            return rc;  // 2 when the IDX files are missing
        }
        if (dist->parsed()) {
            prelu::ExperimentConfig cfg =
                load_config(config_path, preset_name.empty() ? "synth-desk" : preset_name, seed, out_dir);
            if (ref_kind != "F" && ref_kind != "Fp")
                throw CLI::ValidationError("--ref", "must be F or Fp");
            return prelu::run_dist(checkpoint, ref_kind, ref_p, cfg);
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
