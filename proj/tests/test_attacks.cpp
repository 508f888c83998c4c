#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prelu/attacks.hpp"
#include "prelu/data.hpp"
#include "prelu/reference.hpp"

using namespace prelu;

namespace {

// f(x) = <a, x>, the closed-form PGD test bed
class LinearModel final : public BinaryModel {
public:
    explicit LinearModel(Vector a) : a_(std::move(a)) {}
    Index dim() const override { return a_.size(); }
    Vector values(const Matrix& X) const override { return X * a_; }
    Matrix input_grads(const Matrix& X) const override {
        Matrix g(X.rows(), a_.size());
        g.rowwise() = a_.transpose();
        return g;
    }

private:
    Vector a_;
};

SubclassBasis test_basis(Index D = 64, Index K = 10, Index K1 = 6, std::uint64_t seed = 5) {
    ClusterSpec spec{D, K, K1, 0.0, seed};
    return make_basis(spec, BasisMode::RandomOrthogonal);
}

double ball_norm(const Eigen::RowVectorXd& v, AttackNorm norm) {
    switch (norm) {
        case AttackNorm::L2: return v.norm();
        case AttackNorm::Linf: return v.cwiseAbs().maxCoeff();
        case AttackNorm::L1: return v.lpNorm<1>();
    }
    return 0.0;
}

} // namespace

TEST_CASE("L2 PGD on a linear model finds the closed-form optimum") {
    Rng rng(3);
    Vector a = rng.normal_vector(12);
    LinearModel model(a);
    Matrix X(2, 12);
    X.row(0) = rng.normal_vector(12).transpose();
    X.row(1) = rng.normal_vector(12).transpose();
    Vector y(2);
    y << 1.0, -1.0;
    AttackSpec spec;
    spec.norm = AttackNorm::L2;
    spec.radius = 0.5;
    spec.steps = 100;
    spec.restarts = 2;
    spec.seed = 7;
    AttackResult r = pgd(model, X, y, spec);
    for (Index i = 0; i < 2; ++i) {
        Vector want = -y[i] * spec.radius * a / a.norm();
        CHECK((r.delta.row(i).transpose() - want).norm() <= 1e-6);
        // objective = -y <a, x + delta> = -y<a,x> + r |a|
        const double closed = -y[i] * a.dot(X.row(i)) + spec.radius * a.norm();
        CHECK(r.objective[i] == doctest::Approx(closed).epsilon(1e-9));
    }
}

TEST_CASE("radius zero returns the zero perturbation") {
    LinearModel model(Vector::Ones(4));
    Matrix X = Matrix::Random(3, 4);
    Vector y = Vector::Ones(3);
    AttackSpec spec;
    spec.radius = 0.0;
    AttackResult r = pgd(model, X, y, spec);
    CHECK(r.delta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("every returned perturbation satisfies its norm bound within 1e-9") {
    SubclassBasis b = test_basis(32, 6, 3, 11);
    PreluNet net = realize(RefKind::Fp, b.K(), default_plan(RefKind::Fp, b.K(), b), b, 2.0);
    NetModel model(net);
    ClusterSpec spec{32, 6, 3, 0.1, 13};
    Rng rng(13);
    Dataset data = sample_synthetic(spec, b, 50, rng);
    const Matrix X = data.X();
    const Vector y = data.y();
    for (AttackNorm norm : {AttackNorm::L2, AttackNorm::Linf, AttackNorm::L1}) {
        AttackSpec aspec;
        aspec.norm = norm;
        aspec.radius = 0.3;
        aspec.steps = 30;
        aspec.restarts = 3;
        aspec.seed = 17;
        AttackResult r = pgd(model, X, y, aspec);
        for (Index i = 0; i < X.rows(); ++i)
            CHECK(ball_norm(r.delta.row(i), norm) <= aspec.radius + 1e-9);
    }
}

TEST_CASE("stagnation: a model with zero gradient everywhere returns zero delta and flags") {
    LinearModel model(Vector::Zero(5));
    Matrix X = Matrix::Random(4, 5);
    Vector y = Vector::Ones(4);
    AttackSpec spec;
    spec.radius = 0.2;
    spec.steps = 10;
    AttackResult r = pgd(model, X, y, spec);
    for (Index i = 0; i < 4; ++i) {
        CHECK(r.stagnated[static_cast<std::size_t>(i)]);
        CHECK(r.delta.row(i).norm() == 0.0);
    }
}

TEST_CASE("apgd_linf stays in the box and dominates plain PGD on most samples") {
    SubclassBasis b = test_basis(48, 8, 4, 19);
    PreluNet net = realize(RefKind::Fp, b.K(), default_plan(RefKind::Fp, b.K(), b), b, 1.0);
    NetModel model(net);
    ClusterSpec spec{48, 8, 4, 0.1, 23};
    Rng rng(23);
    Dataset data = sample_synthetic(spec, b, 1000, rng);
    const Matrix X = data.X();
    const Vector y = data.y();

    AttackSpec aspec;
    aspec.norm = AttackNorm::Linf;
    aspec.radius = 0.02;
    aspec.steps = 40;
    aspec.restarts = 1;
    aspec.seed = 29;
    AttackResult adaptive = apgd_linf(model, X, y, aspec);
    CHECK(adaptive.delta.cwiseAbs().maxCoeff() <= aspec.radius + 1e-9);

    AttackResult plain = pgd(model, X, y, aspec);
    Index wins = 0;
    for (Index i = 0; i < X.rows(); ++i)
        if (adaptive.objective[i] >= plain.objective[i] - 1e-12) ++wins;
    CHECK(static_cast<double>(wins) / static_cast<double>(X.rows()) >= 0.95);

    // single-step FGSM comparison: APGD's best objective can only be better
    AttackSpec fgsm = aspec;
    fgsm.steps = 1;
    fgsm.step_size = aspec.radius;
    fgsm.restarts = 1;
    AttackResult one = pgd(model, X, y, fgsm);
    Index success_apgd = 0, success_fgsm = 0;
    for (Index i = 0; i < X.rows(); ++i) {
        if (adaptive.objective[i] > 0.0) ++success_apgd;
        if (one.objective[i] > 0.0) ++success_fgsm;
    }
    CHECK(success_apgd >= success_fgsm);
}

TEST_CASE("d0 attack: exact zero at rho=0, sign flip at rho>0, exact norm") {
    SubclassBasis b = test_basis();
    Dataset centers = simplified_dataset(b);
    CHECK(std::abs(d0_direction(b).norm() - 1.0) <= 1e-10);
    for (const auto& s : centers.samples) {
        const Vector x0 = d0_attack(b, s.x, s.y, 0.0);
        CHECK(std::abs(eval_F(b, x0)) <= 1e-10);
        CHECK(std::abs((x0 - s.x).norm() - 1.0 / std::sqrt(10.0)) <= 1e-12);
        for (double rho : {0.05, 0.3, 1.0})
            CHECK(eval_F(b, d0_attack(b, s.x, s.y, rho)) * s.y < 0.0);
    }
}

TEST_CASE("subclass swap attack: hinge arithmetic at the critical scale") {
    SubclassBasis b = test_basis();
    const Vector x = b.center(0);
    const double scale = (std::sqrt(2.0) + 0.1) / 2.0;
    const Vector xp = subclass_swap_attack(b, x, 1, scale);
    // hinge arguments become 1 - scale/sqrt(2) on the own center and
    // scale/sqrt(2) on the opposite one
    const double t = scale / std::sqrt(2.0);
    const double expect = (1.0 - t) * (1.0 - t) - t * t;  // = 1 - 2t < 0
    CHECK(eval_Fp(b, 2.0, xp) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(eval_Fp(b, 2.0, xp) < 0.0);

    CHECK((subclass_swap_attack(b, x, 1, 0.0) - x).norm() == 0.0);
    CHECK(std::abs((subclass_swap_attack(b, x, 1, 0.37) - x).norm() - 0.37) <= 1e-12);

    // negative-class points swap toward the first (positive) center
    const Vector xn = subclass_swap_attack(b, b.center(9), 10, scale);
    CHECK(eval_Fp(b, 2.0, xn) * (-1.0) < 0.0);
}

TEST_CASE("robust accuracy: radius 0 equals clean accuracy; monotone in radius") {
    SubclassBasis b = test_basis(64, 10, 6, 31);
    ReferenceModel model(make_reference(RefKind::F, b));
    ClusterSpec spec{64, 10, 6, 0.05, 37};
    Rng rng(37);
    Dataset data = sample_synthetic(spec, b, 200, rng);

    AttackSpec zero;
    zero.norm = AttackNorm::L2;
    zero.radius = 0.0;
    AttackReport rep0 = robust_accuracy(model, data, zero);
    CHECK(rep0.robust_acc == rep0.clean_acc);

    double prev = 1.0;
    for (double r : {0.1, 0.2, 0.3, 0.35, 0.4, 0.6}) {
        AttackSpec aspec;
        aspec.norm = AttackNorm::L2;
        aspec.radius = r;
        aspec.steps = 40;
        aspec.restarts = 2;
        aspec.seed = 41;
        AttackReport rep = robust_accuracy(model, data, aspec);
        CHECK(rep.robust_acc <= prev + 1e-12);
        prev = rep.robust_acc;
    }
}

TEST_CASE("critical-radius bracketing for the closed-form classifiers on centers") {
    SubclassBasis b = test_basis();
    Dataset centers = simplified_dataset(b);
    const double rF = 1.0 / std::sqrt(10.0);

    AttackSpec aspec;
    aspec.norm = AttackNorm::L2;
    aspec.steps = 50;
    aspec.restarts = 3;
    aspec.seed = 43;

    ReferenceModel modelF(make_reference(RefKind::F, b));
    aspec.radius = 0.9 * rF;
    CHECK(robust_accuracy(modelF, centers, aspec).robust_acc == 1.0);
    // d0 attack at radius 1.1/sqrt(K): 0% robust
    Index flipped = 0;
    for (const auto& s : centers.samples)
        if (eval_F(b, d0_attack(b, s.x, s.y, 0.1)) * s.y <= 0.0) ++flipped;
    CHECK(flipped == centers.size());

    const double rFp = std::sqrt(2.0) / 2.0;
    ReferenceModel modelF2(make_reference(RefKind::Fp, b, 2.0));
    aspec.radius = 0.9 * rFp;
    aspec.restarts = 5;
    CHECK(robust_accuracy(modelF2, centers, aspec).robust_acc == 1.0);
    Index swapped = 0;
    for (const auto& s : centers.samples)
        if (eval_Fp(b, 2.0, subclass_swap_attack(b, s.x, *s.z, 1.1 * rFp)) * s.y <= 0.0) ++swapped;
    CHECK(swapped == centers.size());
}

TEST_CASE("attacks are deterministic under a fixed seed") {
    SubclassBasis b = test_basis(32, 6, 3, 47);
    ReferenceModel model(make_reference(RefKind::Fp, b, 2.0));
    ClusterSpec spec{32, 6, 3, 0.1, 53};
    Rng rng(53);
    Dataset data = sample_synthetic(spec, b, 64, rng);
    AttackSpec aspec;
    aspec.norm = AttackNorm::L2;
    aspec.radius = 0.4;
    aspec.steps = 20;
    aspec.restarts = 3;
    aspec.seed = 59;
    AttackReport r1 = robust_accuracy(model, data, aspec);
    AttackReport r2 = robust_accuracy(model, data, aspec);
    CHECK(r1.delta == r2.delta);
    CHECK(r1.robust_acc == r2.robust_acc);
}

TEST_CASE("multiclass margin attack on a 3-head net") {
    Rng rng(61);
    PreluNet net;
    net.p = 2.0;
    net.W = rng.normal_matrix(12, 8);
    net.V = rng.normal_matrix(12, 3);
    Dataset data;
    data.provenance = Provenance::MnistDigits;
    for (int i = 0; i < 30; ++i) {
        LabeledSample s;
        s.x = rng.unit_sphere(8);
        Matrix logits = forward_logits(net, s.x.transpose());
        Index arg = 0;
        logits.row(0).maxCoeff(&arg);
        s.y = static_cast<int>(arg);  // label = model prediction -> clean acc 1
        data.samples.push_back(std::move(s));
    }
    AttackSpec aspec;
    aspec.norm = AttackNorm::Linf;
    aspec.radius = 0.0;
    AttackReport clean = robust_accuracy_multiclass(net, data, aspec);
    CHECK(clean.clean_acc == 1.0);
    CHECK(clean.robust_acc == 1.0);

    aspec.radius = 0.5;
    aspec.steps = 30;
    aspec.restarts = 2;
    aspec.seed = 67;
    AttackReport attacked = robust_accuracy_multiclass(net, data, aspec);
    CHECK(attacked.robust_acc < clean.robust_acc);
    CHECK(attacked.delta.cwiseAbs().maxCoeff() <= 0.5 + 1e-9);
}
