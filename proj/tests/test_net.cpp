#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include <Eigen/SVD>

#include "prelu/data.hpp"
#include "prelu/io.hpp"
#include "prelu/net.hpp"

using namespace prelu;

namespace {

PreluNet random_net(Rng& rng, Index h, Index D, double p) {
    PreluNet net;
    net.p = p;
    net.W = rng.normal_matrix(h, D);
    net.V = rng.normal_matrix(h, 1);
    return net;
}

} // namespace

TEST_CASE("single neuron, p = 3: f(e1) = 1") {
    PreluNet net;
    net.p = 3.0;
    net.W = Matrix::Zero(1, 4);
    net.W(0, 0) = 1.0;
    net.V = Matrix::Constant(1, 1, 1.0);
    Vector x = Vector::Zero(4);
    x[0] = 1.0;
    CHECK(forward(net, x) == 1.0);
}

TEST_CASE("2-positive-homogeneity: f(x; g*theta) = g^2 f(x; theta)") {
    Rng rng(11);
    PreluNet net = random_net(rng, 7, 5, 2.5);
    Matrix X = rng.normal_matrix(20, 5);
    Vector base = forward(net, X);
    for (double gamma : {0.5, 2.0, 10.0}) {
        PreluNet scaled = net;
        scaled.W *= gamma;
        scaled.V *= gamma;
        Vector got = forward(scaled, X);
        for (Index i = 0; i < X.rows(); ++i)
            CHECK(got[i] == doctest::Approx(gamma * gamma * base[i]).epsilon(1e-12));
    }
}

TEST_CASE("unit inputs: per-neuron term equals relu(<x,w>) cos^{p-1}(x,w)") {
    Rng rng(13);
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        PreluNet net = random_net(rng, 1, 6, p);
        Vector x = rng.unit_sphere(6);
        const double term = forward(net, x);
        const double s = net.W.row(0).dot(x.transpose());
        const double c = s / net.W.row(0).norm();
        const double expected = std::max(s, 0.0) * std::pow(std::max(c, 0.0), p - 1.0);
        CHECK(term - net.V(0, 0) * expected == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("zero-norm rows contribute nothing and get zero gradient") {
    PreluNet net;
    net.p = 3.0;
    net.W = Matrix::Zero(2, 3);
    net.W(0, 0) = 1.0;  // row 1 stays zero
    net.V = Matrix::Constant(2, 1, 1.0);
    Matrix X = Matrix::Random(5, 3);
    Vector y = Vector::Ones(5);
    PreluNet solo = net;
    solo.W = net.W.topRows(1);
    solo.V = net.V.topRows(1);
    CHECK((forward(net, X) - forward(solo, X)).norm() == 0.0);
    Gradients g = backward(net, X, y, LossKind::Exponential);
    CHECK(g.dW.row(1).norm() == 0.0);
    CHECK(g.dV(1, 0) == 0.0);
}

TEST_CASE("balanced init: exact balance, uniform-law bound, scale") {
    InitSpec spec{1e-7, DirectionLaw::Uniform, true, 3};
    PreluNet net = init_balanced(50, 1000, spec);
    CHECK(balancedness(net).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(net.W.rowwise().norm().maxCoeff() <= 1e-7);

    // uniform law: |w_{j0}| <= sqrt(D) * (1/sqrt(D)) = 1, checked over 1e6 entries
    InitSpec big{1.0, DirectionLaw::Uniform, true, 4};
    PreluNet unit = init_balanced(10000, 100, big);
    CHECK(unit.W.rowwise().norm().maxCoeff() <= 1.0);

    InitSpec gauss{1e-7, DirectionLaw::Gaussian, true, 5};
    PreluNet g = init_balanced(20, 50, gauss);
    CHECK(balancedness(g).cwiseAbs().maxCoeff() <= 1e-15);

    InitSpec unbal{1e-7, DirectionLaw::Gaussian, false, 6};
    PreluNet u = init_balanced(20, 50, unbal);
    CHECK(balancedness(u).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("loss values and derivatives") {
    CHECK(loss_value(1.0, 0.0, LossKind::Exponential) == 1.0);
    CHECK(loss_derivative(1.0, 0.0, LossKind::Exponential) == -1.0);
    // overflow-safe logistic tail
    CHECK(loss_value(1.0, 50.0, LossKind::Logistic) < 1e-20);
    CHECK(loss_value(1.0, 50.0, LossKind::Logistic) > 0.0);
    CHECK(std::isfinite(loss_value(-1.0, 700.0, LossKind::Logistic)));
    CHECK(std::isfinite(loss_derivative(-1.0, 700.0, LossKind::Logistic)));

    // the loss-derivative bound |-dl/dyhat - s y| <= 2|yhat| for |yhat| <= 1,
    // with s the negated slope at 0 (1 for exponential, 1/2 for the standard
    // logistic form used here)
    for (int i = 0; i <= 1000; ++i) {
        const double yhat = -1.0 + 2.0 * i / 1000.0;
        for (double y : {-1.0, 1.0}) {
            const double de = -loss_derivative(y, yhat, LossKind::Exponential);
            CHECK(std::abs(de - y) <= 2.0 * std::abs(yhat) + 1e-12);
            const double dl = -loss_derivative(y, yhat, LossKind::Logistic);
            CHECK(std::abs(dl - 0.5 * y) <= 2.0 * std::abs(yhat) + 1e-12);
        }
    }
}

TEST_CASE("analytic gradient matches central differences away from kinks") {
    Rng rng(17);
    const double fd_step = 1e-6;
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        for (LossKind kind : {LossKind::Exponential, LossKind::Logistic}) {
            PreluNet net;
            net.p = p;
            Matrix X;
            bool smooth = false;
            while (!smooth) {
                net.W = rng.normal_matrix(3, 5);
                net.V = rng.normal_matrix(3, 1);
                X = rng.normal_matrix(4, 5);
                smooth = (X * net.W.transpose()).cwiseAbs().minCoeff() > 1e-3;
            }
            Vector y(4);
            for (Index i = 0; i < 4; ++i) y[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            Gradients g = backward(net, X, y, kind);
            auto sum_loss = [&]() {
                Vector yhat = forward(net, X);
                double s = 0.0;
                for (Index i = 0; i < 4; ++i) s += loss_value(y[i], yhat[i], kind);
                return s;
            };
            double err2 = 0.0, ref2 = 0.0;
            auto probe = [&](double* param, double analytic) {
                const double saved = *param;
                *param = saved + fd_step;
                const double up = sum_loss();
                *param = saved - fd_step;
                const double dn = sum_loss();
                *param = saved;
                const double fd = (up - dn) / (2.0 * fd_step);
                err2 += (fd - analytic) * (fd - analytic);
                ref2 += analytic * analytic;
            };
            for (Index j = 0; j < 3; ++j)
                for (Index d = 0; d < 5; ++d) probe(&net.W(j, d), g.dW(j, d));
            for (Index j = 0; j < 3; ++j) probe(&net.V(j, 0), g.dV(j, 0));
            CHECK(std::sqrt(err2 / ref2) < 1e-5);
        }
    }
}

TEST_CASE("multiclass cross-entropy gradient matches central differences") {
    Rng rng(19);
    PreluNet net;
    net.p = 2.0;
    net.W = rng.normal_matrix(4, 5);
    net.V = rng.normal_matrix(4, 3);
    Matrix X = rng.normal_matrix(6, 5);
    VectorI labels(6);
    for (Index i = 0; i < 6; ++i) labels[i] = static_cast<int>(rng.uniform_index(3));
    Gradients g = backward_ce(net, X, labels);
    auto sum_loss = [&]() { return batch_loss_ce(net, X, labels) * 6.0; };
    const double fd_step = 1e-6;
    double err2 = 0.0, ref2 = 0.0;
    auto probe = [&](double* param, double analytic) {
        const double saved = *param;
        *param = saved + fd_step;
        const double up = sum_loss();
        *param = saved - fd_step;
        const double dn = sum_loss();
        *param = saved;
        const double fd = (up - dn) / (2.0 * fd_step);
        err2 += (fd - analytic) * (fd - analytic);
        ref2 += analytic * analytic;
    };
    for (Index j = 0; j < 4; ++j)
        for (Index d = 0; d < 5; ++d) probe(&net.W(j, d), g.dW(j, d));
    for (Index j = 0; j < 4; ++j)
        for (Index c = 0; c < 3; ++c) probe(&net.V(j, c), g.dV(j, c));
    CHECK(std::sqrt(err2 / ref2) < 1e-5);
}

TEST_CASE("a batch that activates nothing gives a zero gradient row") {
    PreluNet net;
    net.p = 2.0;
    net.W = Matrix::Zero(1, 3);
    net.W(0, 0) = 1.0;
    net.V = Matrix::Constant(1, 1, 0.7);
    Matrix X = Matrix::Zero(3, 3);
    X.col(0).setConstant(-1.0);  // <x, w> < 0 everywhere
    Vector y = Vector::Ones(3);
    Gradients g = backward(net, X, y, LossKind::Exponential);
    CHECK(g.dW.row(0).norm() == 0.0);
    CHECK(g.dV(0, 0) == 0.0);
}

TEST_CASE("one discrete step moves v^2 - |w|^2 by O(eta^2)") {
    ClusterSpec spec{8, 4, 2, 0.0, 23};
    SubclassBasis basis = make_basis(spec, BasisMode::Canonical);
    Dataset simp = simplified_dataset(basis);
    InitSpec ispec{0.8, DirectionLaw::Uniform, true, 29};
    PreluNet base = init_balanced(12, 8, ispec);
    base.p = 2.0;
    const Matrix X = simp.X();
    const Vector y = simp.y();
    std::vector<double> etas = {1e-2, 1e-3, 1e-4}, drifts;
    for (double eta : etas) {
        PreluNet net = base;
        Gradients g = backward(net, X, y, LossKind::Exponential);
        net.W -= eta * g.dW;
        net.V -= eta * g.dV;
        drifts.push_back(balancedness(net).cwiseAbs().maxCoeff());
    }
    const double slope01 = std::log(drifts[0] / drifts[1]) / std::log(etas[0] / etas[1]);
    const double slope12 = std::log(drifts[1] / drifts[2]) / std::log(etas[1] / etas[2]);
    CHECK(slope01 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(slope12 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("training fits the simplified dataset and is deterministic") {
    ClusterSpec spec{16, 5, 3, 0.0, 31};
    SubclassBasis basis = make_basis(spec, BasisMode::RandomOrthogonal);
    Dataset simp = simplified_dataset(basis);
    InitSpec ispec{1e-4, DirectionLaw::Uniform, true, 37};
    TrainConfig cfg;
    cfg.loss = LossKind::Exponential;
    cfg.step_size = 0.1;
    cfg.batch_size = 5;
    cfg.epochs = 3000;
    cfg.seed = 41;
    cfg.record_cadence = 500;
    cfg.stop_loss = 0.05;

    PreluNet net1 = init_balanced(32, 16, ispec);
    net1.p = 1.0;
    TrainHistory h1 = train(net1, simp, cfg);
    CHECK(h1.rows.back().train_acc == 1.0);
    CHECK(h1.rows.back().loss < 0.05);

    PreluNet net2 = init_balanced(32, 16, ispec);
    net2.p = 1.0;
    train(net2, simp, cfg);
    CHECK(net1.W == net2.W);  // bit-identical rerun
    CHECK(net1.V == net2.V);
}

TEST_CASE("training aborts with diagnostics on divergence") {
    ClusterSpec spec{8, 3, 1, 0.0, 43};
    SubclassBasis basis = make_basis(spec, BasisMode::Canonical);
    Dataset simp = simplified_dataset(basis);
    InitSpec ispec{1.0, DirectionLaw::Gaussian, true, 47};
    PreluNet net = init_balanced(8, 8, ispec);
    net.p = 2.0;
    TrainConfig cfg;
    cfg.step_size = 1e6;  // guaranteed blow-up of the exponential loss
    cfg.batch_size = 3;
    cfg.epochs = 50;
    CHECK_THROWS_AS(train(net, simp, cfg), TrainingDiverged);
}

TEST_CASE("loss/provenance compatibility is enforced") {
    ClusterSpec spec{8, 3, 1, 0.0, 53};
    SubclassBasis basis = make_basis(spec, BasisMode::Canonical);
    Dataset simp = simplified_dataset(basis);
    PreluNet net = init_kaiming(4, 8, 10, 59);
    TrainConfig cfg;
    cfg.loss = LossKind::CrossEntropy;
    CHECK_THROWS_AS(train(net, simp, cfg), std::invalid_argument);  // 10 heads vs binary data
    PreluNet bin = init_kaiming(4, 8, 1, 61);
    CHECK_THROWS_AS(train(bin, simp, cfg), std::invalid_argument);  // CE vs 1 head
}

TEST_CASE("stable rank: identity, rank-1, diag(2,1,1), SVD cross-check") {
    CHECK(stable_rank(Matrix::Identity(7, 7)) == doctest::Approx(7.0).epsilon(1e-8));

    Rng rng(67);
    Vector u = rng.normal_vector(9), v = rng.normal_vector(5);
    Matrix rank1 = u * v.transpose();
    CHECK(stable_rank(rank1) == doctest::Approx(1.0).epsilon(1e-6));

    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 2.0; d(1, 1) = 1.0; d(2, 2) = 1.0;
    CHECK(stable_rank(d) == doctest::Approx(1.5).epsilon(1e-8));

    Matrix A = rng.normal_matrix(20, 12);
    Eigen::JacobiSVD<Matrix> svd(A);
    const double oracle = A.squaredNorm() / (svd.singularValues()[0] * svd.singularValues()[0]);
    CHECK(stable_rank(A) == doctest::Approx(oracle).epsilon(1e-7));

    CHECK_THROWS_AS(stable_rank(Matrix::Zero(4, 4)), std::domain_error);
}

TEST_CASE("hidden features: relu reduction, nonnegativity, forward consistency") {
    Rng rng(71);
    PreluNet relu;
    relu.p = 1.0;
    relu.W = rng.normal_matrix(1, 4);
    relu.V = Matrix::Constant(1, 1, 1.0);
    Matrix X = rng.normal_matrix(10, 4);
    Matrix A = hidden_features(relu, X);
    for (Index i = 0; i < 10; ++i)
        CHECK(A(i, 0) == std::max(X.row(i).dot(relu.W.row(0)), 0.0));

    PreluNet net = random_net(rng, 6, 4, 3.0);
    Matrix F = hidden_features(net, X);
    CHECK(F.minCoeff() >= 0.0);
    Vector via_features = F * net.V.col(0);
    Vector direct = forward(net, X);
    CHECK((via_features - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    Rng rng(73);
    PreluNet net = random_net(rng, 5, 7, 2.5);
    const std::string path = "test_ckpt_roundtrip.bin";
    save_checkpoint(net, path);
    PreluNet back = load_checkpoint(path);
    CHECK(back.p == net.p);
    CHECK(back.W == net.W);
    CHECK(back.V == net.V);
    std::remove(path.c_str());
}

TEST_CASE("adam on a small separable problem reaches full accuracy") {
    ClusterSpec spec{12, 4, 2, 0.05, 79};
    SubclassBasis basis = make_basis(spec, BasisMode::RandomOrthogonal);
    Rng rng(79);
    Dataset data = sample_synthetic(spec, basis, 100, rng);
    PreluNet net = init_kaiming(32, 12, 1, 83);
    net.p = 2.0;
    TrainConfig cfg;
    cfg.loss = LossKind::Logistic;
    cfg.optimizer = Optimizer::Adam;
    cfg.step_size = 1e-2;
    cfg.batch_size = 25;
    cfg.epochs = 200;
    cfg.seed = 89;
    cfg.record_cadence = 50;
    TrainHistory hist = train(net, data, cfg);
    CHECK(hist.rows.back().train_acc == 1.0);
}
