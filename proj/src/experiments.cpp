#include "prelu/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "prelu/checks.hpp"
#include "prelu/io.hpp"
#include "prelu/mnist.hpp"
#include "prelu/reference.hpp"
#include "prelu/theory.hpp"

namespace prelu {

using json = nlohmann::ordered_json;

namespace {

std::string basis_name(BasisMode m) {
    return m == BasisMode::Canonical ? "canonical" : "random-orthogonal";
}
BasisMode basis_from(const std::string& s) {
    if (s == "canonical") return BasisMode::Canonical;
    if (s == "random-orthogonal") return BasisMode::RandomOrthogonal;
    throw std::invalid_argument("unknown basis mode: " + s);
}
std::string law_name(DirectionLaw l) { return l == DirectionLaw::Uniform ? "uniform" : "gaussian"; }
DirectionLaw law_from(const std::string& s) {
    if (s == "uniform") return DirectionLaw::Uniform;
    if (s == "gaussian") return DirectionLaw::Gaussian;
    throw std::invalid_argument("unknown direction law: " + s);
}
std::string loss_name(LossKind k) {
    switch (k) {
        case LossKind::Exponential: return "exponential";
        case LossKind::Logistic: return "logistic";
        case LossKind::CrossEntropy: return "cross-entropy";
    }
    return "?";
}
LossKind loss_from(const std::string& s) {
    if (s == "exponential") return LossKind::Exponential;
    if (s == "logistic") return LossKind::Logistic;
    if (s == "cross-entropy") return LossKind::CrossEntropy;
    throw std::invalid_argument("unknown loss: " + s);
}
std::string norm_name(AttackNorm n) {
    switch (n) {
        case AttackNorm::L2: return "l2";
        case AttackNorm::Linf: return "linf";
        case AttackNorm::L1: return "l1";
    }
    return "?";
}
AttackNorm norm_from(const std::string& s) {
    if (s == "l2") return AttackNorm::L2;
    if (s == "linf") return AttackNorm::Linf;
    if (s == "l1") return AttackNorm::L1;
    throw std::invalid_argument("unknown attack norm: " + s);
}

} // namespace

std::string ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["cluster"] = {{"D", cluster.D}, {"K", cluster.K}, {"K1", cluster.K1},
                    {"alpha", cluster.alpha}, {"seed", cluster.seed}};
    j["n_train"] = n_train;
    j["n_test"] = n_test;
    j["basis"] = basis_name(basis_mode);
    j["width"] = width;
    j["p_values"] = p_values;
    j["alphas"] = alphas;
    j["init"] = {{"epsilon", init.epsilon}, {"law", law_name(init.law)},
                 {"balanced", init.balanced}, {"seed", init.seed}};
    j["train"] = {{"loss", loss_name(train.loss)},
                  {"optimizer", train.optimizer == Optimizer::Sgd ? "sgd" : "adam"},
                  {"step_size", train.step_size},
                  {"batch_size", train.batch_size},
                  {"epochs", train.epochs},
                  {"seed", train.seed},
                  {"record_cadence", train.record_cadence},
                  {"reduction", train.reduction == Reduction::Mean ? "mean" : "sum"},
                  {"stop_loss", train.stop_loss},
                  {"record_stable_rank", train.record_stable_rank}};
    j["attack"] = {{"norm", norm_name(attack.norm)}, {"radius", attack.radius},
                   {"steps", attack.steps}, {"step_size", attack.step_size},
                   {"restarts", attack.restarts}, {"seed", attack.seed},
                   {"adaptive", attack.adaptive}};
    j["attack_radii"] = attack_radii;
    j["dist"] = {{"n_fit", dist.n_fit}, {"n_chains", dist.n_chains}, {"step", dist.step},
                 {"max_iter", dist.max_iter}, {"seed", dist.seed}};
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.experiment = j.value("experiment", cfg.experiment);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("cluster")) {
        const auto& c = j["cluster"];
        cfg.cluster.D = c.value("D", cfg.cluster.D);
        cfg.cluster.K = c.value("K", cfg.cluster.K);
        cfg.cluster.K1 = c.value("K1", cfg.cluster.K1);
        cfg.cluster.alpha = c.value("alpha", cfg.cluster.alpha);
        cfg.cluster.seed = c.value("seed", cfg.cluster.seed);
    }
    cfg.n_train = j.value("n_train", cfg.n_train);
    cfg.n_test = j.value("n_test", cfg.n_test);
    if (j.contains("basis")) cfg.basis_mode = basis_from(j["basis"]);
    cfg.width = j.value("width", cfg.width);
    if (j.contains("p_values")) cfg.p_values = j["p_values"].get<std::vector<double>>();
    if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("init")) {
        const auto& c = j["init"];
        cfg.init.epsilon = c.value("epsilon", cfg.init.epsilon);
        if (c.contains("law")) cfg.init.law = law_from(c["law"]);
        cfg.init.balanced = c.value("balanced", cfg.init.balanced);
        cfg.init.seed = c.value("seed", cfg.init.seed);
    }
    if (j.contains("train")) {
        const auto& c = j["train"];
        if (c.contains("loss")) cfg.train.loss = loss_from(c["loss"]);
        if (c.contains("optimizer"))
            cfg.train.optimizer = (c["optimizer"] == "adam") ? Optimizer::Adam : Optimizer::Sgd;
        cfg.train.step_size = c.value("step_size", cfg.train.step_size);
        cfg.train.batch_size = c.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = c.value("epochs", cfg.train.epochs);
        cfg.train.seed = c.value("seed", cfg.train.seed);
        cfg.train.record_cadence = c.value("record_cadence", cfg.train.record_cadence);
        if (c.contains("reduction"))
            cfg.train.reduction = (c["reduction"] == "sum") ? Reduction::Sum : Reduction::Mean;
        cfg.train.stop_loss = c.value("stop_loss", cfg.train.stop_loss);
        cfg.train.record_stable_rank = c.value("record_stable_rank", cfg.train.record_stable_rank);
    }
    if (j.contains("attack")) {
        const auto& c = j["attack"];
        if (c.contains("norm")) cfg.attack.norm = norm_from(c["norm"]);
        cfg.attack.radius = c.value("radius", cfg.attack.radius);
        cfg.attack.steps = c.value("steps", cfg.attack.steps);
        cfg.attack.step_size = c.value("step_size", cfg.attack.step_size);
        cfg.attack.restarts = c.value("restarts", cfg.attack.restarts);
        cfg.attack.seed = c.value("seed", cfg.attack.seed);
        cfg.attack.adaptive = c.value("adaptive", cfg.attack.adaptive);
    }
    if (j.contains("attack_radii")) cfg.attack_radii = j["attack_radii"].get<std::vector<double>>();
    if (j.contains("dist")) {
        const auto& c = j["dist"];
        cfg.dist.n_fit = c.value("n_fit", cfg.dist.n_fit);
        cfg.dist.n_chains = c.value("n_chains", cfg.dist.n_chains);
        cfg.dist.step = c.value("step", cfg.dist.step);
        cfg.dist.max_iter = c.value("max_iter", cfg.dist.max_iter);
        cfg.dist.seed = c.value("seed", cfg.dist.seed);
    }
    return cfg;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(cfg.to_json()); }

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    if (name == "synth-k10" || name == "synth-k20") {
        // The paper's synthetic run; long-running at full fidelity.
        cfg.experiment = "conjecture-validate";
        cfg.cluster = {1000, 10, 6, 0.1, 11};
        if (name == "synth-k20") cfg.cluster = {1000, 20, 8, 0.1, 11};
        cfg.n_train = 4000;
        cfg.n_test = 2000;
        cfg.width = 2000;
        cfg.p_values = {1.0, 3.0};
        cfg.alphas = {0.0, 0.05, 0.1, 0.2};
        cfg.init = {1e-7, DirectionLaw::Gaussian, true, 17};
        cfg.train.loss = LossKind::Exponential;
        cfg.train.optimizer = Optimizer::Sgd;
        cfg.train.step_size = 0.2;
        cfg.train.batch_size = 100;
        cfg.train.epochs = 200000;
        cfg.train.stop_loss = 1e-3;
        cfg.train.record_cadence = 1000;
        cfg.train.seed = 23;
        cfg.attack.norm = AttackNorm::L2;
        cfg.attack.steps = 50;
        cfg.attack.restarts = 3;
        cfg.attack.seed = 29;
        cfg.attack_radii = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        cfg.dist.seed = 31;
        return cfg;
    }
    if (name == "synth-desk") {
        // Desk-scale verification preset: full-gradient steps to loss < 1e-3.
        cfg.experiment = "conjecture-validate";
        cfg.cluster = {200, 6, 4, 0.05, 11};
        cfg.n_train = 600;
        cfg.n_test = 2000;
        cfg.width = 400;
        cfg.p_values = {1.0, 3.0};
        cfg.alphas = {0.05};
        cfg.init = {1e-6, DirectionLaw::Gaussian, true, 17};
        cfg.train.loss = LossKind::Exponential;
        cfg.train.optimizer = Optimizer::Sgd;
        cfg.train.step_size = 0.2;
        cfg.train.batch_size = 600;  // full batch
        cfg.train.epochs = 100000;
        cfg.train.stop_loss = 1e-3;
        cfg.train.record_cadence = 500;
        cfg.train.seed = 23;
        cfg.attack.norm = AttackNorm::L2;
        cfg.attack.radius = 0.5;
        cfg.attack.steps = 50;
        cfg.attack.restarts = 3;
        cfg.attack.seed = 29;
        cfg.attack_radii = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
        cfg.dist.seed = 31;
        return cfg;
    }
    if (name == "radius") {
        cfg.experiment = "critical-radius";
        cfg.cluster = {1000, 10, 6, 0.01, 11};
        cfg.n_test = 2000;
        cfg.p_values = {};  // closed-form classifiers only
        cfg.attack.norm = AttackNorm::L2;
        cfg.attack.steps = 50;
        cfg.attack.restarts = 2;
        cfg.attack.seed = 29;
        return cfg;
    }
    if (name == "mnist") {
        cfg.experiment = "mnist-parity";
        cfg.width = 500;
        cfg.p_values = {1.0, 2.0, 3.0, 4.0};
        cfg.n_test = 2000;  // attack evaluation subset
        cfg.train.loss = LossKind::Logistic;
        cfg.train.optimizer = Optimizer::Adam;
        cfg.train.step_size = 1e-3;
        cfg.train.batch_size = 1000;
        cfg.train.epochs = 50;
        cfg.train.record_cadence = 5;
        cfg.train.record_stable_rank = true;
        cfg.train.seed = 23;
        cfg.init.seed = 17;
        cfg.attack.norm = AttackNorm::Linf;
        cfg.attack.adaptive = true;
        cfg.attack.steps = 100;
        cfg.attack.restarts = 1;
        cfg.attack.seed = 29;
        cfg.attack_radii = {0.02, 0.05, 0.1, 0.15, 0.2};
        return cfg;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

struct SynthRun {
    SubclassBasis basis;
    Dataset train_set;
    PreluNet net;
    TrainHistory history;
};

SynthRun train_synth(const ExperimentConfig& cfg, double p, double alpha) {
    ClusterSpec spec = cfg.cluster;
    spec.alpha = alpha;
    SynthRun run;
    run.basis = make_basis(spec, cfg.basis_mode);
    Rng rng = Rng(spec.seed).split(0xda7a);
    run.train_set = sample_synthetic(spec, run.basis, cfg.n_train, rng);
    run.net = init_balanced(cfg.width, spec.D, cfg.init);
    run.net.p = p;
    run.history = train(run.net, run.train_set, cfg.train);
    return run;
}

void write_alignment_csvs(const std::string& out_dir, const std::string& tag,
                          const PreluNet& net, const SubclassBasis& basis, std::uint64_t hash) {
    AlignmentReport rep = alignment_report(net, basis);
    {
        CsvWriter csv(join(out_dir, "contributions_" + tag + ".csv"), {"rank", "neuron", "contribution"},
                      hash);
        for (Index r = 0; r < rep.contributions.size(); ++r)
            csv.row({static_cast<double>(r), static_cast<double>(rep.by_contribution[static_cast<std::size_t>(r)]),
                     rep.contributions[r]});
    }
    std::vector<std::string> header = {"rank", "neuron", "cos_mu_plus", "cos_mu_minus"};
    for (Index k = 0; k < basis.K(); ++k) header.push_back("cos_mu_" + std::to_string(k + 1));
    CsvWriter csv(join(out_dir, "cosines_" + tag + ".csv"), header, hash);
    for (Index r = 0; r < rep.cosines.rows(); ++r) {
        std::vector<double> row = {static_cast<double>(r),
                                   static_cast<double>(rep.by_contribution[static_cast<std::size_t>(r)])};
        for (Index c = 0; c < rep.cosines.cols(); ++c) row.push_back(rep.cosines(r, c));
        csv.row(row);
    }
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

void write_robustness_sweep(const std::string& path, const BinaryModel& model,
                            const Dataset& test, const AttackSpec& base,
                            const std::vector<double>& radii, double p, std::uint64_t hash) {
    CsvWriter csv(path, {"p", "norm", "radius", "robust_acc", "clean_acc", "seed"}, hash);
    for (double r : radii) {
        AttackSpec spec = base;
        spec.radius = r;
        AttackReport rep = robust_accuracy(model, test, spec);
        csv.row_text({fmt(p), norm_name(base.norm), fmt(r), fmt(rep.robust_acc),
                      fmt(rep.clean_acc), std::to_string(base.seed)});
    }
}

} // namespace

int run_conjecture_validate(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::uint64_t hash = config_hash(cfg);
    std::ofstream(join(cfg.out_dir, "config.json")) << cfg.to_json() << "\n";

    CsvWriter dist_csv(join(cfg.out_dir, "distances.csv"),
                       {"alpha", "p", "seed", "dist", "c_hat", "flag"}, hash);

    for (double alpha : cfg.alphas) {
        for (double p : cfg.p_values) {
            SynthRun run = train_synth(cfg, p, alpha);
            const std::string tag = "p" + std::to_string(static_cast<int>(p)) + "_alpha" +
                                    std::to_string(alpha);
            save_history_csv(run.history, join(cfg.out_dir, "history_" + tag + ".csv"), hash);
            save_checkpoint(run.net, join(cfg.out_dir, "net_" + tag + ".ckpt"));

            const RefKind kind = (p < 2.0) ? RefKind::F : RefKind::Fp;
            ReferenceClassifier ref = make_reference(kind, run.basis, p);
            DistParams dp = cfg.dist;
            DistResult dr = dist_estimate(run.net, ref, dp);
            dist_csv.row({alpha, p, static_cast<double>(cfg.seed), dr.dist, dr.c_hat,
                          dr.clamped ? 1.0 : 0.0});

            write_alignment_csvs(cfg.out_dir, tag, run.net, run.basis, hash);

            ClusterSpec tspec = cfg.cluster;
            tspec.alpha = alpha;
            Rng trng = Rng(tspec.seed).split(0x7e57);
            Dataset test = sample_synthetic(tspec, run.basis, cfg.n_test, trng);
            NetModel model(run.net);
            write_robustness_sweep(join(cfg.out_dir, "robustness_" + tag + ".csv"), model, test,
                                   cfg.attack, cfg.attack_radii, p, hash);
            std::cout << "p=" << p << " alpha=" << alpha << " dist=" << dr.dist
                      << " c_hat=" << dr.c_hat << "\n";
        }
    }
    return 0;
}

namespace {

// Interpolated radius where the sweep first crosses 50% robust accuracy.
double crossover_radius(const std::vector<double>& radii, const std::vector<double>& acc) {
    for (std::size_t i = 1; i < radii.size(); ++i) {
        if (acc[i - 1] >= 0.5 && acc[i] < 0.5) {
            const double t = (acc[i - 1] - 0.5) / (acc[i - 1] - acc[i]);
            return radii[i - 1] + t * (radii[i] - radii[i - 1]);
        }
    }
    return acc.front() < 0.5 ? radii.front() : radii.back();
}

} // namespace

int run_critical_radius(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::uint64_t hash = config_hash(cfg);
    std::ofstream(join(cfg.out_dir, "config.json")) << cfg.to_json() << "\n";

    SubclassBasis basis = make_basis(cfg.cluster, cfg.basis_mode);
    Rng trng = Rng(cfg.cluster.seed).split(0x7e57);
    Dataset test = sample_synthetic(cfg.cluster, basis, cfg.n_test, trng);

    const double rF = 1.0 / std::sqrt(static_cast<double>(cfg.cluster.K));
    const double rFp = std::sqrt(2.0) / 2.0;
    auto grid_around = [](double r) {
        std::vector<double> g;
        for (double f : {0.75, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.25}) g.push_back(f * r);
        return g;
    };

    CsvWriter sweep(join(cfg.out_dir, "radius_sweep.csv"),
                    {"classifier_p", "radius", "robust_acc", "clean_acc"}, hash);
    CsvWriter cross(join(cfg.out_dir, "crossovers.csv"),
                    {"classifier_p", "crossover", "critical", "ratio"}, hash);

    int status = 0;
    auto sweep_model = [&](const BinaryModel& model, double p_tag, double critical) {
        std::vector<double> radii = grid_around(critical);
        std::vector<double> accs;
        for (double r : radii) {
            AttackSpec spec = cfg.attack;
            spec.radius = r;
            AttackReport rep = robust_accuracy(model, test, spec);
            accs.push_back(rep.robust_acc);
            sweep.row({p_tag, r, rep.robust_acc, rep.clean_acc});
        }
        const double c = crossover_radius(radii, accs);
        cross.row({p_tag, c, critical, c / critical});
        std::cout << "classifier p=" << p_tag << " crossover=" << c << " critical=" << critical
                  << "\n";
        if (c <= 0.9 * critical || c >= 1.1 * critical) status = 1;
    };

    ReferenceModel modelF(make_reference(RefKind::F, basis));
    sweep_model(modelF, 1.0, rF);
    ReferenceModel modelF2(make_reference(RefKind::Fp, basis, 2.0));
    sweep_model(modelF2, 2.0, rFp);

    // Trained networks, when the config asks for them.
    for (double p : cfg.p_values) {
        SynthRun run = train_synth(cfg, p, cfg.cluster.alpha);
        NetModel model(run.net);
        sweep_model(model, p, (p < 2.0) ? rF : rFp);
    }
    return status;
}

int run_mnist(const ExperimentConfig& cfg, bool digits) {
    const char* env = std::getenv("PRELU_MNIST_DIR");
    const std::string dir = env ? env : "data/mnist";
    const std::string train_images = join(dir, "train-images-idx3-ubyte");
    const std::string train_labels = join(dir, "train-labels-idx1-ubyte");
    const std::string test_images = join(dir, "t10k-images-idx3-ubyte");
    const std::string test_labels = join(dir, "t10k-labels-idx1-ubyte");
    for (const auto& path : {train_images, train_labels, test_images, test_labels}) {
        if (!fs::exists(path)) {
            std::cerr << "missing MNIST file: " << path
                      << " (set PRELU_MNIST_DIR to the directory holding the four IDX files)\n";
            return 2;
        }
    }
    fs::create_directories(cfg.out_dir);
    const std::uint64_t hash = config_hash(cfg);
    std::ofstream(join(cfg.out_dir, "config.json")) << cfg.to_json() << "\n";

    MnistSplit train_raw = load_mnist_idx(train_images, train_labels);
    MnistSplit test_raw = load_mnist_idx(test_images, test_labels);
    auto [train_set, test_set] =
        digits ? preprocess_digits(train_raw, test_raw) : preprocess_parity(train_raw, test_raw);

    Dataset attack_set;
    attack_set.provenance = test_set.provenance;
    const Index n_eval = std::min(cfg.n_test, test_set.size());
    attack_set.samples.assign(test_set.samples.begin(), test_set.samples.begin() + n_eval);

    CsvWriter table(join(cfg.out_dir, digits ? "digits_attacks.csv" : "parity_attacks.csv"),
                    {"p", "norm", "radius", "robust_acc", "clean_acc", "seed"}, hash);
    CsvWriter ranks(join(cfg.out_dir, "stable_rank.csv"), {"p", "stable_rank"}, hash);

    for (double p : cfg.p_values) {
        PreluNet net = init_kaiming(cfg.width, train_set.dim(), digits ? 10 : 1,
                                    cfg.init.seed + static_cast<std::uint64_t>(p * 1000));
        net.p = p;
        TrainConfig tc = cfg.train;
        tc.loss = digits ? LossKind::CrossEntropy : cfg.train.loss;
        TrainHistory hist = train(net, train_set, tc, &test_set);
        const std::string tag = (digits ? "digits_p" : "parity_p") + std::to_string(static_cast<int>(p));
        save_history_csv(hist, join(cfg.out_dir, "history_" + tag + ".csv"), hash);
        save_checkpoint(net, join(cfg.out_dir, "net_" + tag + ".ckpt"));
        ranks.row({p, stable_rank(hidden_features(net, train_set.X()))});

        auto run_attack = [&](AttackNorm norm, double radius, bool adaptive) {
            AttackSpec spec = cfg.attack;
            spec.norm = norm;
            spec.radius = radius;
            spec.adaptive = adaptive && norm == AttackNorm::Linf;
            AttackReport rep = digits ? robust_accuracy_multiclass(net, attack_set, spec)
                                      : robust_accuracy(NetModel(net), attack_set, spec);
            table.row_text({fmt(p), norm_name(norm), fmt(radius), fmt(rep.robust_acc),
                            fmt(rep.clean_acc), std::to_string(spec.seed)});
            std::cout << "p=" << p << " " << norm_name(norm) << " r=" << radius
                      << " robust=" << rep.robust_acc << " clean=" << rep.clean_acc << "\n";
        };
        if (digits) {
            for (double r : {0.05, 0.1}) run_attack(AttackNorm::Linf, r, true);
            for (double r : {1.0, 2.0}) run_attack(AttackNorm::L2, r, false);
            for (double r : {5.0, 10.0}) run_attack(AttackNorm::L1, r, false);
        } else {
            for (double r : cfg.attack_radii) run_attack(AttackNorm::Linf, r, true);
        }
    }
    return 0;
}

int run_dist(const std::string& checkpoint, const std::string& ref_kind, double p,
             const ExperimentConfig& cfg) {
    PreluNet net = load_checkpoint(checkpoint);
    SubclassBasis basis = make_basis(cfg.cluster, cfg.basis_mode);
    ReferenceClassifier ref =
        make_reference(ref_kind == "F" ? RefKind::F : RefKind::Fp, basis, p);
    DistResult dr = dist_estimate(net, ref, cfg.dist);
    fs::create_directories(cfg.out_dir);
    CsvWriter csv(join(cfg.out_dir, "dist.csv"), {"alpha", "p", "seed", "dist", "c_hat", "flag"},
                  config_hash(cfg));
    csv.row({cfg.cluster.alpha, p, static_cast<double>(cfg.dist.seed), dr.dist, dr.c_hat,
             dr.clamped ? 1.0 : 0.0});
    std::cout << "dist=" << dr.dist << " c_hat=" << dr.c_hat << (dr.clamped ? " (clamped)" : "")
              << "\n";
    return 0;
}

int run_theory_suite(const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<CheckResult> results = theory_suite_checks();
    CsvWriter manifest(join(out_dir, "theory_manifest.csv"),
                       {"id", "name", "pass", "seconds", "detail"}, 0);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << format_check(r) << "\n";
        manifest.row_text({std::to_string(r.id), r.name, r.pass ? "1" : "0",
                           std::to_string(r.seconds), r.detail});
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

} // namespace prelu
