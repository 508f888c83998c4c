#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prelu/data.hpp"
#include "prelu/reference.hpp"

using namespace prelu;

namespace {

SubclassBasis test_basis(Index D = 64, Index K = 10, Index K1 = 6, std::uint64_t seed = 5) {
    ClusterSpec spec{D, K, K1, 0.0, seed};
    return make_basis(spec, BasisMode::RandomOrthogonal);
}

} // namespace

TEST_CASE("eval_F on centers, class averages, and the orthogonal complement") {
    SubclassBasis b = test_basis();
    auto [plus, minus] = average_centers(b);
    for (Index k = 0; k < b.K1; ++k)
        CHECK(eval_F(b, b.center(k)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eval_F(b, minus) == doctest::Approx(-2.0).epsilon(1e-12));  // -sqrt(K2), K2 = 4
    // a vector orthogonal to the span
    Vector x = Vector::Zero(64);
    x[63] = 1.0;
    x -= b.mu.transpose() * (b.mu * x);
    CHECK(std::abs(eval_F(b, x)) <= 1e-12);
}

TEST_CASE("eval_Fp: centers give +/-1, two-center mixtures, p=1 linearity on the cone") {
    SubclassBasis b = test_basis();
    for (double p : {1.0, 2.0, 3.0, 4.5}) {
        for (Index k = 0; k < b.K(); ++k) {
            const double want = (k < b.K1) ? 1.0 : -1.0;
            CHECK(eval_Fp(b, p, b.center(k)) == doctest::Approx(want).epsilon(1e-12));
        }
    }
    Vector x = (b.center(0) + b.center(1)) / std::sqrt(2.0);
    CHECK(eval_Fp(b, 2.0, x) == doctest::Approx(1.0).epsilon(1e-12));

    // p = 1 on positively activated directions: plain sum of inner products
    Vector cone = 0.7 * b.center(0) + 0.2 * b.center(1) + 0.1 * b.center(2);
    double expected = 0.0;
    for (Index k = 0; k < b.K(); ++k) {
        const double dot = b.center(k).dot(cone);
        if (dot > 0.0) expected += (k < b.K1 ? dot : -dot);
    }
    CHECK(eval_Fp(b, 1.0, cone) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("realize: the h=2 example plan matches F on 1e4 sphere points") {
    SubclassBasis b = test_basis();
    RealizationPlan plan;
    plan.groups = {{0}, {1}};
    plan.lambda = Vector::Zero(2);
    plan.lambda[0] = std::pow(static_cast<double>(b.K1), 0.25);
    plan.lambda[1] = std::pow(static_cast<double>(b.K2()), 0.25);
    PreluNet net = realize(RefKind::F, 2, plan, b, 1.0);
    ReferenceClassifier ref = make_reference(RefKind::F, b);
    Rng rng(99);
    double sup = 0.0;
    for (int i = 0; i < 10000; ++i) {
        Vector x = rng.unit_sphere(b.D());
        sup = std::max(sup, std::abs(forward(net, x) - eval_reference(ref, x)));
    }
    CHECK(sup <= 1e-10);
}

TEST_CASE("realize: one neuron per subclass matches F^(p) exactly on centers") {
    SubclassBasis b = test_basis();
    for (double p : {1.0, 2.0, 3.0}) {
        PreluNet net = realize(RefKind::Fp, b.K(), default_plan(RefKind::Fp, b.K(), b), b, p);
        for (Index k = 0; k < b.K(); ++k) {
            const double want = (k < b.K1) ? 1.0 : -1.0;
            CHECK(forward(net, b.center(k)) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("realize rejects bad plans") {
    SubclassBasis b = test_basis();
    RealizationPlan plan = default_plan(RefKind::Fp, b.K(), b);
    plan.lambda[0] = 2.0;  // group mass becomes 4, not 1
    CHECK_THROWS_AS(realize(RefKind::Fp, b.K(), plan, b, 2.0), std::invalid_argument);

    RealizationPlan overlap = default_plan(RefKind::F, 4, b);
    overlap.groups = {{0, 1}, {1}};
    CHECK_THROWS_AS(realize(RefKind::F, 4, overlap, b, 1.0), std::invalid_argument);

    RealizationPlan empty_group = default_plan(RefKind::F, 4, b);
    empty_group.groups = {{0}, {}};
    CHECK_THROWS_AS(realize(RefKind::F, 4, empty_group, b, 1.0), std::invalid_argument);

    CHECK_THROWS_AS(realize(RefKind::F, 4, default_plan(RefKind::F, 4, b), b, 2.0),
                    std::invalid_argument);  // F is a p=1 construction
}

TEST_CASE("rescaling (w, v) -> (g w, v/g) leaves the p=1 network unchanged") {
    SubclassBasis b = test_basis(32, 6, 3, 7);
    PreluNet net = realize(RefKind::F, 4, default_plan(RefKind::F, 4, b), b, 1.0);
    PreluNet scaled = net;
    const double gamma = 3.7;
    scaled.W.row(0) *= gamma;
    scaled.V(0, 0) /= gamma;
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
        Vector x = rng.unit_sphere(b.D());
        CHECK(forward(scaled, x) == doctest::Approx(forward(net, x)).epsilon(1e-12));
    }
}

TEST_CASE("net input gradients match finite differences") {
    SubclassBasis b = test_basis(16, 4, 2, 9);
    PreluNet net = realize(RefKind::Fp, 4, default_plan(RefKind::Fp, 4, b), b, 3.0);
    Rng rng(103);
    Matrix X(3, 16);
    for (Index i = 0; i < 3; ++i) X.row(i) = rng.unit_sphere(16).transpose();
    Matrix G = net_input_gradients(net, X);
    const double h = 1e-6;
    for (Index i = 0; i < 3; ++i) {
        for (Index d = 0; d < 16; ++d) {
            Matrix Xp = X, Xm = X;
            Xp(i, d) += h;
            Xm(i, d) -= h;
            const double fd = (forward(net, Xp)[i] - forward(net, Xm)[i]) / (2.0 * h);
            CHECK(G(i, d) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
    ReferenceClassifier ref = make_reference(RefKind::Fp, b, 3.0);
    Matrix GR = reference_input_gradients(ref, X);
    for (Index i = 0; i < 3; ++i) {
        for (Index d = 0; d < 16; ++d) {
            Matrix Xp = X, Xm = X;
            Xp(i, d) += h;
            Xm(i, d) -= h;
            const double fd =
                (eval_reference(ref, Vector(Xp.row(i))) - eval_reference(ref, Vector(Xm.row(i)))) /
                (2.0 * h);
            CHECK(GR(i, d) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("dist_estimate: zero distance for exact realizations, scale invariance") {
    SubclassBasis b = test_basis(32, 6, 4, 11);
    PreluNet net = realize(RefKind::F, 4, default_plan(RefKind::F, 4, b), b, 1.0);
    ReferenceClassifier ref = make_reference(RefKind::F, b);
    DistParams params;
    params.n_fit = 512;
    params.n_chains = 32;
    params.max_iter = 60;
    params.seed = 5;
    DistResult r = dist_estimate(net, ref, params);
    CHECK(r.dist <= 1e-8);
    CHECK(r.c_hat == doctest::Approx(1.0).epsilon(1e-6));

    PreluNet scaled = net;
    scaled.V *= 5.0;
    DistResult r5 = dist_estimate(scaled, ref, params);
    CHECK(r5.dist <= 1e-8);
    CHECK(r5.c_hat == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("dist_estimate flags a wrong reference with a large distance") {
    SubclassBasis b = test_basis(64, 10, 6, 13);
    PreluNet net = realize(RefKind::Fp, b.K(), default_plan(RefKind::Fp, b.K(), b), b, 3.0);
    ReferenceClassifier wrong = make_reference(RefKind::F, b);
    DistParams params;
    params.seed = 7;
    DistResult r = dist_estimate(net, wrong, params);
    CHECK(r.dist >= 0.1);

    // independent lower-bound oracle: dense sampling of the K-dim subspace
    Rng rng(107);
    double oracle = 0.0;
    for (int i = 0; i < 100000; ++i) {
        Vector coef = rng.unit_sphere(b.K());
        Vector x = b.mu.transpose() * coef;
        oracle = std::max(oracle, std::abs(r.c_hat * forward(net, x) - eval_reference(wrong, x)));
    }
    CHECK(oracle >= 0.1);
    CHECK(r.dist >= 0.5 * oracle);  // the PGA search is at least in the oracle's ballpark
}

TEST_CASE("dist_estimate: chain nesting makes the estimate monotone in N2") {
    SubclassBasis b = test_basis(24, 5, 3, 17);
    PreluNet net = realize(RefKind::Fp, b.K(), default_plan(RefKind::Fp, b.K(), b), b, 2.0);
    ReferenceClassifier wrong = make_reference(RefKind::F, b);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        DistParams small, large;
        small.n_fit = large.n_fit = 256;
        small.max_iter = large.max_iter = 50;
        small.seed = large.seed = seed;
        small.n_chains = 16;
        large.n_chains = 64;
        DistResult rs = dist_estimate(net, wrong, small);
        DistResult rl = dist_estimate(net, wrong, large);
        CHECK(rl.dist >= rs.dist);
    }
}

TEST_CASE("stage-1 scale is the least-squares optimum") {
    SubclassBasis b = test_basis(24, 5, 2, 19);
    PreluNet net = realize(RefKind::Fp, b.K(), default_plan(RefKind::Fp, b.K(), b), b, 2.0);
    net.V *= 1.7;
    ReferenceClassifier ref = make_reference(RefKind::Fp, b, 2.0);
    DistParams params;
    params.seed = 11;
    DistResult r = dist_estimate(net, ref, params);

    // replay the fit sample exactly as dist_estimate draws it
    Rng fit_rng = Rng(params.seed).split(1);
    Matrix X(params.n_fit, b.D());
    for (Index i = 0; i < params.n_fit; ++i) X.row(i) = fit_rng.unit_sphere(b.D()).transpose();
    Vector f = forward(net, X);
    Vector g = eval_reference(ref, X);
    auto objective = [&](double c) { return (c * f - g).squaredNorm(); };
    CHECK(objective(r.c_hat) <= objective(r.c_hat * 1.01));
    CHECK(objective(r.c_hat) <= objective(r.c_hat * 0.99));
}

TEST_CASE("dist_estimate degenerate and clamped cases") {
    SubclassBasis b = test_basis(16, 4, 2, 23);
    ReferenceClassifier ref = make_reference(RefKind::F, b);
    PreluNet zero;
    zero.p = 1.0;
    zero.W = Matrix::Zero(3, 16);
    zero.V = Matrix::Zero(3, 1);
    DistParams params;
    CHECK_THROWS_AS(dist_estimate(zero, ref, params), std::domain_error);

    PreluNet neg = realize(RefKind::F, 4, default_plan(RefKind::F, 4, b), b, 1.0);
    neg.V = -neg.V;  // anti-correlated with the reference -> c <= 0 -> clamp
    DistResult r = dist_estimate(neg, ref, params);
    CHECK(r.clamped);
    CHECK(r.c_hat == 1e-12);
}
