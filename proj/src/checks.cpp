#include "prelu/checks.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "prelu/attacks.hpp"
#include "prelu/data.hpp"
#include "prelu/experiments.hpp"
#include "prelu/io.hpp"
#include "prelu/mnist.hpp"
#include "prelu/net.hpp"
#include "prelu/reference.hpp"
#include "prelu/theory.hpp"

namespace prelu {

namespace {

using Clock = std::chrono::steady_clock;

struct Stopwatch {
    Clock::time_point start = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }
};

struct Gate {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << (detail.tellp() > 0 ? "; " : "") << "FAILED: " << what;
        }
    }
    void note(const std::string& what) {
        detail << (detail.tellp() > 0 ? "; " : "") << what;
    }
};

CheckResult finish(int id, const std::string& name, Gate& gate, const Stopwatch& sw,
                   double budget_seconds) {
    CheckResult r;
    r.id = id;
    r.name = name;
    r.seconds = sw.seconds();
    if (budget_seconds > 0.0 && r.seconds > budget_seconds) {
        gate.pass = false;
        gate.detail << (gate.detail.tellp() > 0 ? "; " : "") << "FAILED: runtime "
                    << r.seconds << "s over budget " << budget_seconds << "s";
    }
    r.pass = gate.pass;
    r.detail = gate.detail.str();
    return r;
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

} // namespace

// Criterion 1: realizability of F and F^(p) to 1e-9 over 1e4 sphere points.
CheckResult check_realizability() {
    Stopwatch sw;
    Gate gate;
    ClusterSpec spec{1000, 10, 6, 0.0, 101};
    SubclassBasis basis = make_basis(spec, BasisMode::RandomOrthogonal);

    Rng rng(2024);
    const Index n = 10000;
    Matrix X(n, spec.D);
    for (Index i = 0; i < n; ++i) X.row(i) = rng.unit_sphere(spec.D).transpose();

    auto sup_gap = [&](const PreluNet& net, const ReferenceClassifier& ref) {
        return (forward(net, X) - eval_reference(ref, X)).cwiseAbs().maxCoeff();
    };

    {
        ReferenceClassifier ref = make_reference(RefKind::F, basis);
        PreluNet net = realize(RefKind::F, 8, default_plan(RefKind::F, 8, basis), basis, 1.0);
        const double gap = sup_gap(net, ref);
        gate.require(gap <= 1e-9, "F realization sup gap " + num(gap));
        gate.note("F gap=" + num(gap));

        // a split plan with several neurons per group
        RealizationPlan plan;
        plan.groups = {{0, 2, 4}, {1, 3}};
        plan.lambda = Vector::Zero(8);
        const double mp = std::sqrt(static_cast<double>(basis.K1)) / 3.0;
        const double mm = std::sqrt(static_cast<double>(basis.K2())) / 2.0;
        for (Index j : plan.groups[0]) plan.lambda[j] = std::sqrt(mp);
        for (Index j : plan.groups[1]) plan.lambda[j] = std::sqrt(mm);
        PreluNet net2 = realize(RefKind::F, 8, plan, basis, 1.0);
        const double gap2 = sup_gap(net2, ref);
        gate.require(gap2 <= 1e-9, "F split-plan sup gap " + num(gap2));
    }
    for (double p : {1.0, 2.0, 3.0}) {
        ReferenceClassifier ref = make_reference(RefKind::Fp, basis, p);
        PreluNet net =
            realize(RefKind::Fp, spec.K, default_plan(RefKind::Fp, spec.K, basis), basis, p);
        const double gap = sup_gap(net, ref);
        gate.require(gap <= 1e-9, "Fp p=" + num(p) + " sup gap " + num(gap));
        gate.note("Fp(p=" + num(p) + ") gap=" + num(gap));
    }
    return finish(1, "realizability", gate, sw, 10.0);
}

// Criterion 2: closed-form attack oracle on noiseless centers.
CheckResult check_attack_oracle() {
    Stopwatch sw;
    Gate gate;
    ClusterSpec spec{1000, 10, 6, 0.0, 103};
    SubclassBasis basis = make_basis(spec, BasisMode::RandomOrthogonal);
    Dataset centers = simplified_dataset(basis);

    double worst_f0 = 0.0;
    bool all_flip = true;
    for (const auto& s : centers.samples) {
        const Vector x0 = d0_attack(basis, s.x, s.y, 0.0);
        worst_f0 = std::max(worst_f0, std::abs(eval_F(basis, x0)));
        const Vector x1 = d0_attack(basis, s.x, s.y, 0.1);
        all_flip = all_flip && (eval_F(basis, x1) * s.y < 0.0);
    }
    gate.require(worst_f0 <= 1e-10, "max |F| after rho=0 d0 attack is " + num(worst_f0));
    gate.require(all_flip, "rho=0.1 d0 attack must flip F on every center");
    gate.note("|F|_max=" + num(worst_f0));

    const double rswap = 1.1 * std::sqrt(2.0) / 2.0;
    bool swap_flips = true;
    for (const auto& s : centers.samples) {
        const Vector xs = subclass_swap_attack(basis, s.x, *s.z, rswap);
        swap_flips = swap_flips && (eval_Fp(basis, 2.0, xs) * s.y < 0.0);
    }
    gate.require(swap_flips, "subclass swap at 1.1*sqrt(2)/2 must flip F^(2) on every center");

    AttackSpec aspec;
    aspec.norm = AttackNorm::L2;
    aspec.radius = 0.9 * std::sqrt(2.0) / 2.0;
    aspec.steps = 50;
    aspec.restarts = 5;
    aspec.seed = 7;
    ReferenceModel modelF2(make_reference(RefKind::Fp, basis, 2.0));
    AttackReport rep = robust_accuracy(modelF2, centers, aspec);
    gate.require(rep.robust_acc == 1.0,
                 "F^(2) robust accuracy under PGD at 0.9*sqrt(2)/2 is " + num(rep.robust_acc));
    gate.note("pgd_robust=" + num(rep.robust_acc));
    return finish(2, "closed-form attack oracle", gate, sw, 60.0);
}

// Criterion 3: critical-radius bracketing at alpha=0.01, D=1000, K=10, n=2000.
CheckResult check_critical_radius() {
    Stopwatch sw;
    Gate gate;
    ClusterSpec spec{1000, 10, 6, 0.01, 107};
    SubclassBasis basis = make_basis(spec, BasisMode::RandomOrthogonal);
    Rng rng = Rng(spec.seed).split(0x7e57);
    Dataset test = sample_synthetic(spec, basis, 2000, rng);

    auto crossover = [&](const BinaryModel& model, double critical) {
        std::vector<double> factors = {0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2};
        double prev_acc = 1.0, prev_r = 0.0, cross = -1.0;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            AttackSpec aspec;
            aspec.norm = AttackNorm::L2;
            aspec.radius = factors[i] * critical;
            aspec.steps = 50;
            aspec.restarts = 2;
            aspec.seed = 7;
            AttackReport rep = robust_accuracy(model, test, aspec);
            if (i > 0 && prev_acc >= 0.5 && rep.robust_acc < 0.5) {
                const double t = (prev_acc - 0.5) / (prev_acc - rep.robust_acc);
                cross = prev_r + t * (aspec.radius - prev_r);
                break;
            }
            prev_acc = rep.robust_acc;
            prev_r = aspec.radius;
        }
        return cross;
    };

    const double rF = 1.0 / std::sqrt(10.0);
    ReferenceModel modelF(make_reference(RefKind::F, basis));
    const double cF = crossover(modelF, rF);
    gate.require(cF > 0.9 * rF && cF < 1.1 * rF,
                 "F crossover " + num(cF) + " outside (0.9,1.1)*" + num(rF));
    gate.note("F crossover=" + num(cF) + " (critical " + num(rF) + ")");

    const double rFp = std::sqrt(2.0) / 2.0;
    ReferenceModel modelF2(make_reference(RefKind::Fp, basis, 2.0));
    const double cF2 = crossover(modelF2, rFp);
    gate.require(cF2 > 0.9 * rFp && cF2 < 1.1 * rFp,
                 "F^(2) crossover " + num(cF2) + " outside (0.9,1.1)*" + num(rFp));
    gate.note("F2 crossover=" + num(cF2) + " (critical " + num(rFp) + ")");
    return finish(3, "critical-radius bracketing", gate, sw, 300.0);
}

// Criterion 4: conjecture validation at desk scale.
CheckResult check_conjecture_desk() {
    Stopwatch sw;
    Gate gate;
    ExperimentConfig cfg = preset("synth-desk");
    const double alpha = 0.05;

    for (double p : {1.0, 3.0}) {
        ClusterSpec spec = cfg.cluster;
        spec.alpha = alpha;
        SubclassBasis basis = make_basis(spec, cfg.basis_mode);
        Rng rng = Rng(spec.seed).split(0xda7a);
        Dataset train_set = sample_synthetic(spec, basis, cfg.n_train, rng);
        PreluNet net = init_balanced(cfg.width, spec.D, cfg.init);
        net.p = p;
        TrainHistory hist = train(net, train_set, cfg.train);
        const double final_loss = hist.rows.back().loss;
        gate.require(final_loss < 1e-3,
                     "p=" + num(p) + " train loss " + num(final_loss) + " did not reach 1e-3");

        // (a)/(b): every top-contribution-decile neuron aligned to 0.98
        AlignmentReport rep = alignment_report(net, basis);
        const Index top = cfg.width / 10;
        double worst_cos = 1.0;
        for (Index r = 0; r < top; ++r) {
            double best;
            if (p < 2.0) best = std::max(rep.cosines(r, 0), rep.cosines(r, 1));
            else best = rep.cosines.row(r).segment(2, basis.K()).maxCoeff();
            worst_cos = std::min(worst_cos, best);
        }
        gate.require(worst_cos >= 0.98,
                     "p=" + num(p) + " top-decile alignment " + num(worst_cos) + " < 0.98");
        gate.note("p=" + num(p) + " align=" + num(worst_cos));

        // distance to the matching reference, normalized by max_k |ref(mu_k)|
        const RefKind kind = (p < 2.0) ? RefKind::F : RefKind::Fp;
        ReferenceClassifier ref = make_reference(kind, basis, p);
        DistResult dr = dist_estimate(net, ref, cfg.dist);
        double ref_scale = 0.0;
        for (Index k = 0; k < basis.K(); ++k)
            ref_scale = std::max(ref_scale, std::abs(eval_reference(ref, basis.center(k))));
        const double ndist = dr.dist / ref_scale;
        gate.require(ndist <= 0.15, "p=" + num(p) + " normalized dist " + num(ndist) + " > 0.15");
        gate.note("p=" + num(p) + " dist=" + num(ndist));

        // (c): L2 PGD robust accuracy at radius 0.5
        Rng trng = Rng(spec.seed).split(0x7e57);
        Dataset test = sample_synthetic(spec, basis, cfg.n_test, trng);
        AttackSpec aspec = cfg.attack;
        aspec.radius = 0.5;
        NetModel model(net);
        AttackReport arep = robust_accuracy(model, test, aspec);
        if (p >= 2.0)
            gate.require(arep.robust_acc >= 0.9,
                         "p=3 robust acc at 0.5 is " + num(arep.robust_acc) + " < 0.9");
        else
            gate.require(arep.robust_acc <= 0.2,
                         "p=1 robust acc at 0.5 is " + num(arep.robust_acc) + " > 0.2");
        gate.note("p=" + num(p) + " robust@0.5=" + num(arep.robust_acc));
    }
    return finish(4, "conjecture validation (desk scale)", gate, sw, 1200.0);
}

// Criterion 5: alignment-bias signs, zero tolerance.
CheckResult check_alignment_signs() {
    Stopwatch sw;
    Gate gate;
    ClusterSpec spec{32, 10, 6, 0.0, 109};
    SubclassBasis basis = make_basis(spec, BasisMode::Canonical);
    Dataset simplified = simplified_dataset(basis);
    Rng rng(4242);

    const Index n = 1000;
    for (double delta : {0.05, 0.1, 0.2}) {
        for (NeuronSign sign : {NeuronSign::Positive, NeuronSign::Negative}) {
            const std::string side = (sign == NeuronSign::Positive) ? "+" : "-";
            {
                ExtremalField field{simplified, 1.0};
                SweepSummary s = alignment_bias_sweep(field, basis, delta, n,
                                                      SweepTarget::ClassAverage, sign, rng);
                gate.require(s.min_derivative > 0.0,
                             "p=1 class-avg (" + side + ") min " + num(s.min_derivative) +
                                 " at delta=" + num(delta));
            }
            for (double p : {3.0, 4.0}) {
                ExtremalField field{simplified, p};
                SweepSummary s = alignment_bias_sweep(field, basis, delta, n,
                                                      SweepTarget::ClassAverage, sign, rng);
                gate.require(s.max_derivative < 0.0,
                             "p=" + num(p) + " class-avg (" + side + ") max " +
                                 num(s.max_derivative) + " at delta=" + num(delta));
                SweepSummary sub = alignment_bias_sweep(field, basis, delta, n,
                                                        SweepTarget::Subclass, sign, rng);
                gate.require(sub.min_derivative > 0.0,
                             "p=" + num(p) + " subclass (" + side + ") min " +
                                 num(sub.min_derivative) + " at delta=" + num(delta));
            }
        }
    }
    gate.note("all signs correct over 10^3 cone samples per case");
    return finish(5, "alignment-bias signs", gate, sw, 60.0);
}

// Criterion 6: g_p convexity, FD agreement, argmin location.
CheckResult check_gp_convexity() {
    Stopwatch sw;
    Gate gate;
    Rng rng(606);
    double worst_second = 0.0;
    double worst_fd_rel = 0.0;
    double worst_argmin_off = 0.0;

    for (int trial = 0; trial < 1000; ++trial) {
        const Index len = 2 + static_cast<Index>(rng.uniform_index(7));  // 2..8
        Vector z(len);
        for (Index i = 0; i < len; ++i) z[i] = std::exp(rng.normal());
        for (double p : {1.0, 2.0, 3.0, 4.0}) {
            const double qstar = (p + 1.0) / 2.0;
            const Index grid_n = 41;
            double best_q = 0.0, best_val = std::numeric_limits<double>::infinity();
            const double q_lo = 0.0, q_hi = p + 1.0;
            const double cell = (q_hi - q_lo) / (grid_n - 1);
            for (Index i = 0; i < grid_n; ++i) {
                const double q = q_lo + cell * static_cast<double>(i);
                const double val = gp(q, z, p);
                if (val < best_val) {
                    best_val = val;
                    best_q = q;
                }
                const double sd = gp_second_derivative(q, z, p);
                worst_second = std::min(worst_second, sd);
                const double h = 1e-4;
                const double fd = (gp(q + h, z, p) - 2.0 * gp(q, z, p) + gp(q - h, z, p)) / (h * h);
                const double rel = std::abs(fd - sd) / std::max(std::abs(sd), 1e-9);
                worst_fd_rel = std::max(worst_fd_rel, rel);
            }
            worst_argmin_off = std::max(worst_argmin_off, std::abs(best_q - qstar) / cell);
        }
    }
    gate.require(worst_second >= -1e-12, "second derivative dipped to " + num(worst_second));
    gate.require(worst_fd_rel <= 1e-4, "worst FD relative error " + num(worst_fd_rel));
    gate.require(worst_argmin_off <= 1.0,
                 "grid argmin off by " + num(worst_argmin_off) + " cells from (p+1)/2");
    gate.note("min g''=" + num(worst_second) + ", fd_rel=" + num(worst_fd_rel) +
              ", argmin_off=" + num(worst_argmin_off) + " cells");
    return finish(6, "g_p convexity", gate, sw, 10.0);
}

// Criterion 7: balancedness conservation and the small-norm phase.
CheckResult check_balancedness() {
    Stopwatch sw;
    Gate gate;

    {   // exact balance at t = 0
        InitSpec ispec{1e-4, DirectionLaw::Uniform, true, 707};
        PreluNet net = init_balanced(64, 16, ispec);
        const double drift0 = balancedness(net).cwiseAbs().maxCoeff();
        gate.require(drift0 <= 1e-15, "drift at t=0 is " + num(drift0));
        gate.note("drift0=" + num(drift0));
    }

    {   // one Euler step changes v^2 - |w|^2 by O(eta^2): log-log slope 2 +/- 0.2
        ClusterSpec spec{16, 6, 4, 0.0, 709};
        SubclassBasis basis = make_basis(spec, BasisMode::Canonical);
        Dataset simp = simplified_dataset(basis);
        const Matrix X = simp.X();
        const Vector y = simp.y();
        InitSpec ispec{0.5, DirectionLaw::Uniform, true, 711};
        PreluNet base = init_balanced(16, spec.D, ispec);
        base.p = 3.0;
        std::vector<double> etas = {1e-2, 1e-3, 1e-4};
        std::vector<double> drifts;
        for (double eta : etas) {
            PreluNet net = base;
            Gradients g = backward(net, X, y, LossKind::Exponential);
            net.W -= eta * g.dW;
            net.V -= eta * g.dV;
            drifts.push_back(balancedness(net).cwiseAbs().maxCoeff());
        }
        // least-squares slope of log(drift) against log(eta)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < etas.size(); ++i) {
            const double lx = std::log(etas[i]), ly = std::log(drifts[i]);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        const double npts = static_cast<double>(etas.size());
        const double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
        gate.require(std::abs(slope - 2.0) <= 0.2, "drift slope " + num(slope) + " not 2 +/- 0.2");
        gate.note("slope=" + num(slope));
    }

    {   // small-norm phase on the simplified dataset
        ClusterSpec spec{16, 6, 4, 0.0, 713};
        SubclassBasis basis = make_basis(spec, BasisMode::Canonical);
        Dataset simp = simplified_dataset(basis);
        const Matrix X = simp.X();
        const Vector y = simp.y();
        const double eps = 1e-4, M = 1.0;
        const Index h = 64;
        InitSpec ispec{eps, DirectionLaw::Uniform, true, 715};
        PreluNet net = init_balanced(h, spec.D, ispec);
        net.p = 3.0;
        const double T = 1.0 / (4.0 * static_cast<double>(spec.K)) *
                         std::log(1.0 / (std::sqrt(static_cast<double>(h)) * eps));
        const double eta = 1e-3;
        const auto steps = static_cast<Index>(std::floor(T / eta));
        const double norm_bound = 2.0 * eps * M * M / std::sqrt(static_cast<double>(h));
        const double value_bound = 2.0 * eps * std::sqrt(static_cast<double>(h)) * M * M;
        double worst_norm = 0.0, worst_value = 0.0;
        for (Index t = 0; t < steps; ++t) {
            Gradients g = backward(net, X, y, LossKind::Exponential);  // sum reduction = GF clock
            net.W -= eta * g.dW;
            net.V -= eta * g.dV;
            worst_norm = std::max(worst_norm, net.W.rowwise().squaredNorm().maxCoeff());
            worst_value = std::max(worst_value, forward(net, X).cwiseAbs().maxCoeff());
        }
        gate.require(worst_norm <= norm_bound, "max |w|^2 " + num(worst_norm) + " exceeded " +
                                                   num(norm_bound) + " during the small-norm phase");
        gate.require(worst_value <= value_bound,
                     "max |f| " + num(worst_value) + " exceeded " + num(value_bound));
        gate.note("max|w|^2=" + num(worst_norm) + " (bound " + num(norm_bound) + ") over " +
                  std::to_string(steps) + " steps");
    }
    return finish(7, "balancedness and small-norm phase", gate, sw, 120.0);
}

// Criterion 8: analytic gradients vs central differences.
CheckResult check_gradient_correctness() {
    Stopwatch sw;
    Gate gate;
    Rng rng(808);
    double worst = 0.0;
    const double fd_step = 1e-6;

    for (int trial = 0; trial < 1000; ++trial) {
        const double p = 1.0 + static_cast<double>(rng.uniform_index(4));  // 1..4
        const Index h = 3, D = 5, n = 4;
        Matrix X(n, D);
        PreluNet net;
        net.p = p;
        // resample until safely away from every activation kink
        bool smooth = false;
        while (!smooth) {
            net.W = rng.normal_matrix(h, D);
            net.V = rng.normal_matrix(h, 1);
            X = rng.normal_matrix(n, D);
            smooth = (X * net.W.transpose()).cwiseAbs().minCoeff() > 1e-3;
        }
        Vector y(n);
        for (Index i = 0; i < n; ++i) y[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const LossKind kind = (trial % 2 == 0) ? LossKind::Exponential : LossKind::Logistic;

        Gradients g = backward(net, X, y, kind);
        auto sum_loss = [&](const PreluNet& m) {
            Vector yhat = forward(m, X);
            double s = 0.0;
            for (Index i = 0; i < n; ++i) s += loss_value(y[i], yhat[i], kind);
            return s;
        };
        double num2 = 0.0, den2 = 0.0;
        auto probe = [&](double* param, const double analytic) {
            const double saved = *param;
            *param = saved + fd_step;
            const double up = sum_loss(net);
            *param = saved - fd_step;
            const double down = sum_loss(net);
            *param = saved;
            const double fd = (up - down) / (2.0 * fd_step);
            num2 += (fd - analytic) * (fd - analytic);
            den2 += analytic * analytic;
        };
        for (Index j = 0; j < h; ++j)
            for (Index d = 0; d < D; ++d) probe(&net.W(j, d), g.dW(j, d));
        for (Index j = 0; j < h; ++j) probe(&net.V(j, 0), g.dV(j, 0));
        worst = std::max(worst, std::sqrt(num2 / std::max(den2, 1e-300)));
    }
    gate.require(worst < 1e-5, "worst relative gradient error " + num(worst));
    gate.note("worst_rel_err=" + num(worst));
    return finish(8, "gradient correctness", gate, sw, 30.0);
}

// Criterion 9: MNIST parity, gated on the data files being present.
CheckResult check_mnist_parity(const std::string& data_dir) {
    Stopwatch sw;
    Gate gate;
    namespace fs = std::filesystem;
    const std::string paths[4] = {data_dir + "/train-images-idx3-ubyte",
                                  data_dir + "/train-labels-idx1-ubyte",
                                  data_dir + "/t10k-images-idx3-ubyte",
                                  data_dir + "/t10k-labels-idx1-ubyte"};
    for (const auto& p : paths) {
        if (!fs::exists(p)) {
            CheckResult r;
            r.id = 9;
            r.name = "mnist parity";
            r.skipped = true;
            r.pass = false;
            r.detail = "SKIPPED: missing " + p + " (set PRELU_MNIST_DIR)";
            r.seconds = sw.seconds();
            return r;
        }
    }

    MnistSplit train_raw = load_mnist_idx(paths[0], paths[1]);
    MnistSplit test_raw = load_mnist_idx(paths[2], paths[3]);
    auto [train_set, test_set] = preprocess_parity(train_raw, test_raw);

    Dataset attack_set;
    attack_set.provenance = test_set.provenance;
    attack_set.samples.assign(test_set.samples.begin(),
                              test_set.samples.begin() + std::min<Index>(2000, test_set.size()));

    ExperimentConfig cfg = preset("mnist");
    double acc_p1 = 0.0, acc_p4 = 0.0, rank_p1 = 0.0, rank_p4 = 0.0;
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        PreluNet net = init_kaiming(cfg.width, train_set.dim(), 1,
                                    cfg.init.seed + static_cast<std::uint64_t>(p * 1000));
        net.p = p;
        TrainHistory hist = train(net, train_set, cfg.train, &test_set);
        const double clean = hist.rows.back().test_acc;
        gate.require(clean >= 0.95, "p=" + num(p) + " clean test accuracy " + num(clean));
        gate.note("p=" + num(p) + " clean=" + num(clean));

        AttackSpec aspec = cfg.attack;
        aspec.radius = 0.1;
        NetModel model(net);
        AttackReport rep = robust_accuracy(model, attack_set, aspec);
        const double rank = stable_rank(hidden_features(net, train_set.X()));
        if (p == 1.0) { acc_p1 = rep.robust_acc; rank_p1 = rank; }
        if (p == 4.0) { acc_p4 = rep.robust_acc; rank_p4 = rank; }
        gate.note("p=" + num(p) + " robust@0.1=" + num(rep.robust_acc) + " rank=" + num(rank));
    }
    gate.require(acc_p4 - acc_p1 >= 0.35, "APGD robust gap acc(p=4)-acc(p=1) = " +
                                              num(acc_p4 - acc_p1) + " < 0.35");
    gate.require(rank_p4 > rank_p1, "stable rank p=4 (" + num(rank_p4) +
                                        ") must exceed p=1 (" + num(rank_p1) + ")");
    return finish(9, "mnist parity", gate, sw, 3600.0);
}

std::vector<CheckResult> theory_suite_checks() {
    std::vector<CheckResult> out;
    out.push_back(check_realizability());
    out.push_back(check_attack_oracle());
    out.push_back(check_critical_radius());
    out.push_back(check_conjecture_desk());
    out.push_back(check_alignment_signs());
    out.push_back(check_gp_convexity());
    out.push_back(check_balancedness());
    out.push_back(check_gradient_correctness());
    return out;
}

std::string format_check(const CheckResult& r) {
    std::ostringstream ss;
    ss << (r.skipped ? "[SKIP]" : (r.pass ? "[PASS]" : "[FAIL]")) << " C" << r.id << " " << r.name;
    if (!r.detail.empty()) ss << " (" << r.detail << ")";
    ss.precision(3);
    ss << " [" << r.seconds << "s]";
    return ss.str();
}

} // namespace prelu
