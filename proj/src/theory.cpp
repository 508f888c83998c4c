#include "prelu/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prelu/attacks.hpp"

namespace prelu {

namespace {
constexpr double kActiveTol = 1e-12;
constexpr double kKinkRejectTol = 1e-8;
}

Vector extremal_vector(const ExtremalField& field, const Vector& w) {
    field.validate();
    const double wn = w.norm();
    if (wn == 0.0) throw std::domain_error("extremal_vector: w must be nonzero");
    if (w.size() != field.dataset.dim())
        throw std::invalid_argument("extremal_vector: dimension mismatch");
    Vector out = Vector::Zero(w.size());
    for (const auto& s : field.dataset.samples) {
        const double c = s.x.dot(w) / (wn * s.x.norm());
        if (c <= kActiveTol) continue;
        out += (s.y * field.p * relu_pow(c, field.p - 1.0)) * s.x;
    }
    return out;
}

double alignment_derivative(const ExtremalField& field, const Vector& w, const Vector& target) {
    const double wn = w.norm();
    const double tn = target.norm();
    if (wn == 0.0 || tn == 0.0)
        throw std::domain_error("alignment_derivative: zero vector");
    Vector xp = extremal_vector(field, w);
    Vector proj = xp - (xp.dot(w) / (wn * wn)) * w;
    return proj.dot(target) / tn;
}

namespace {

// Coefficient-space cone sample: w = (1-delta) t + sqrt(1-(1-delta)^2) u with
// u unit in the orthogonal complement of t inside the sampled subspace.
Vector cone_sample(const Vector& target_coef, Index m, double delta, Rng& rng) {
    Vector c = rng.normal_vector(m);
    c -= c.dot(target_coef) * target_coef;
    double n = c.norm();
    while (n == 0.0) {
        c = rng.normal_vector(m);
        c -= c.dot(target_coef) * target_coef;
        n = c.norm();
    }
    const double a = 1.0 - delta;
    return a * target_coef + std::sqrt(1.0 - a * a) * (c / n);
}

} // namespace

SweepSummary alignment_bias_sweep(const ExtremalField& field, const SubclassBasis& basis,
                                  double delta, Index n_samples, SweepTarget which,
                                  NeuronSign sign, Rng& rng) {
    field.validate();
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("alignment_bias_sweep: need 0 < delta < 1");
    if (n_samples < 1) throw std::invalid_argument("alignment_bias_sweep: need n_samples >= 1");

    const Index K = basis.K();
    const Index K1 = basis.K1;
    const bool positive = (sign == NeuronSign::Positive);
    const double flip = positive ? 1.0 : -1.0;
    auto [mu_plus, mu_minus] = average_centers(basis);

    // Class indices owning the cone(s).
    std::vector<Index> own;
    for (Index k = (positive ? 0 : K1); k < (positive ? K1 : K); ++k) own.push_back(k);
    const Index m_own = static_cast<Index>(own.size());

    struct Cone {
        Vector target;        // ambient target direction
        Matrix span;          // rows spanning the sampled subspace (subset of mu rows)
        Vector target_coef;   // target in span coordinates (unit)
        std::vector<Index> must_activate;  // rows of `span` that must stay active
    };
    std::vector<Cone> cones;

    if (which == SweepTarget::ClassAverage) {
        Cone c;
        c.target = positive ? mu_plus : mu_minus;
        c.span.resize(m_own, basis.D());
        for (Index i = 0; i < m_own; ++i) c.span.row(i) = basis.mu.row(own[static_cast<std::size_t>(i)]);
        c.target_coef = Vector::Constant(m_own, 1.0 / std::sqrt(static_cast<double>(m_own)));
        for (Index i = 0; i < m_own; ++i) c.must_activate.push_back(i);
        cones.push_back(std::move(c));
    } else {
        for (Index i = 0; i < m_own; ++i) {
            Cone c;
            const Index k = own[static_cast<std::size_t>(i)];
            c.target = basis.center(k);
            c.span = basis.mu;
            c.target_coef = Vector::Zero(K);
            c.target_coef[k] = 1.0;
            cones.push_back(std::move(c));
        }
    }

    SweepSummary summary;
    summary.min_derivative = std::numeric_limits<double>::infinity();
    summary.max_derivative = -std::numeric_limits<double>::infinity();
    const Index per_cone = n_samples;
    const Index max_attempts = 1000 * per_cone;

    for (const Cone& cone : cones) {
        if (cone.span.rows() < 2)
            throw std::runtime_error("alignment_bias_sweep: cone subspace is degenerate (need >= 2 centers)");
        Index accepted = 0;
        Index attempts = 0;
        while (accepted < per_cone) {
            if (++attempts > max_attempts)
                throw std::runtime_error(
                    "alignment_bias_sweep: activation region at this delta is (almost) empty");
            Vector coef = cone_sample(cone.target_coef, cone.span.rows(), delta, rng);
            bool ok = true;
            for (Index i = 0; i < coef.size() && ok; ++i) {
                if (which == SweepTarget::ClassAverage) {
                    // every same-class center must activate w
                    if (coef[i] <= kKinkRejectTol) ok = false;
                } else {
                    // stay clear of activation kinks
                    if (std::abs(coef[i]) < kKinkRejectTol && std::abs(coef[i]) > kActiveTol)
                        ok = false;
                }
            }
            if (!ok) {
                ++summary.rejected;
                continue;
            }
            Vector w = cone.span.transpose() * coef;
            const double d = flip * alignment_derivative(field, w, cone.target);
            summary.min_derivative = std::min(summary.min_derivative, d);
            summary.max_derivative = std::max(summary.max_derivative, d);
            ++accepted;
            ++summary.samples;
        }
    }
    return summary;
}

double gp(double q, const Vector& z, double p) {
    if (z.size() == 0 || z.minCoeff() < 0.0 || z.maxCoeff() <= 0.0)
        throw std::domain_error("gp: need nonnegative z with at least one positive entry");
    const bool has_zero = (z.minCoeff() == 0.0);
    const double q2 = p + 1.0 - q;
    if (has_zero && (q < 0.0 || q2 < 0.0))
        throw std::domain_error("gp: negative exponent with zero entries");
    auto power_sum = [&](double e) {
        double s = 0.0;
        for (Index i = 0; i < z.size(); ++i) {
            if (z[i] == 0.0) s += (e == 0.0) ? 1.0 : 0.0;
            else s += std::pow(z[i], e);
        }
        return s;
    };
    return power_sum(q) * power_sum(q2);
}

double gp_second_derivative(double q, const Vector& z, double p) {
    if (z.size() == 0 || z.minCoeff() < 0.0 || z.maxCoeff() <= 0.0)
        throw std::domain_error("gp_second_derivative: need nonnegative z, not all zero");
    const double q2 = p + 1.0 - q;
    double out = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
        if (z[i] == 0.0) continue;
        for (Index j = 0; j < z.size(); ++j) {
            if (z[j] == 0.0) continue;
            const double dlog = std::log(z[i]) - std::log(z[j]);
            out += std::pow(z[i], q) * std::pow(z[j], q2) * dlog * dlog;
        }
    }
    return out;
}

namespace {

double wilson_low(double phat, double n, double zq) {
    const double z2 = zq * zq;
    const double denom = 1.0 + z2 / n;
    const double center = phat + z2 / (2.0 * n);
    const double half = zq * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return (center - half) / denom;
}

} // namespace

BoundCheck mc_bound_check(const ReferenceClassifier& ref, const ClusterSpec& spec,
                          const SubclassBasis& basis, BoundEvent event, double param, Index n,
                          Rng& rng) {
    if (n < 10000) throw std::invalid_argument("mc_bound_check: need n >= 10^4 per estimate");
    constexpr double z95 = 1.959963984540054;

    Dataset data = sample_synthetic(spec, basis, n, rng);
    Index hits = 0;
    std::string desc;

    switch (event) {
        case BoundEvent::Clean: {
            desc = "P(correct on clean sample); paper bound direction: -> 1 for large D/(alpha^2 K^2)";
            const Vector vals = eval_reference(ref, data.X());
            for (Index i = 0; i < n; ++i)
                if (vals[i] * data.samples[static_cast<std::size_t>(i)].y > 0.0) ++hits;
            break;
        }
        case BoundEvent::D0Attack: {
            desc = "P(misclassified under d0 attack, rho=" + std::to_string(param) +
                   "); paper bound direction: -> 1";
            for (Index i = 0; i < n; ++i) {
                const auto& s = data.samples[static_cast<std::size_t>(i)];
                const Vector xa = d0_attack(basis, s.x, s.y, param);
                if (eval_reference(ref, xa) * s.y <= 0.0) ++hits;
            }
            break;
        }
        case BoundEvent::PgdRobust: {
            desc = "P(correct under L2 PGD, radius=" + std::to_string(param) +
                   "); paper bound direction: -> 1 below the critical radius";
            AttackSpec aspec;
            aspec.norm = AttackNorm::L2;
            aspec.radius = param;
            aspec.steps = 50;
            aspec.restarts = 3;
            aspec.seed = rng.next_u64();
            ReferenceModel model(ref);
            AttackReport rep = robust_accuracy(model, data, aspec);
            hits = static_cast<Index>(std::lround(rep.robust_acc * static_cast<double>(n)));
            break;
        }
    }

    BoundCheck check;
    check.description = desc + " (unknown constant C not estimated)";
    check.n = n;
    check.estimate = static_cast<double>(hits) / static_cast<double>(n);
    check.wilson_low = wilson_low(check.estimate, static_cast<double>(n), z95);
    check.wilson_high = 1.0 - wilson_low(1.0 - check.estimate, static_cast<double>(n), z95);
    return check;
}

AlignmentReport alignment_report(const PreluNet& net, const SubclassBasis& basis) {
    if (net.dim() != basis.D()) throw std::invalid_argument("alignment_report: dimension mismatch");
    const Index h = net.width();
    const Index K = basis.K();
    auto [mu_plus, mu_minus] = average_centers(basis);

    Vector contributions(h);
    for (Index j = 0; j < h; ++j)
        contributions[j] = net.V.row(j).norm() * net.W.row(j).norm();

    AlignmentReport rep;
    rep.by_contribution.resize(static_cast<std::size_t>(h));
    std::iota(rep.by_contribution.begin(), rep.by_contribution.end(), Index{0});
    std::stable_sort(rep.by_contribution.begin(), rep.by_contribution.end(),
                     [&](Index a, Index b) { return contributions[a] > contributions[b]; });

    rep.contributions.resize(h);
    rep.cosines.resize(h, 2 + K);
    for (Index r = 0; r < h; ++r) {
        const Index j = rep.by_contribution[static_cast<std::size_t>(r)];
        rep.contributions[r] = contributions[j];
        const double wn = net.W.row(j).norm();
        auto cos_with = [&](const Vector& mu) {
            if (wn == 0.0) return 0.0;
            return std::clamp(net.W.row(j).dot(mu.transpose()) / wn, -1.0, 1.0);
        };
        rep.cosines(r, 0) = cos_with(mu_plus);
        rep.cosines(r, 1) = cos_with(mu_minus);
        for (Index k = 0; k < K; ++k) rep.cosines(r, 2 + k) = cos_with(basis.center(k));
    }

    rep.grouping.resize(static_cast<std::size_t>(h));
    std::iota(rep.grouping.begin(), rep.grouping.end(), Index{0});
    auto argmax_col = [&](Index row) {
        Index best = 0;
        rep.cosines.row(row).maxCoeff(&best);
        return best;
    };
    std::stable_sort(rep.grouping.begin(), rep.grouping.end(),
                     [&](Index a, Index b) { return argmax_col(a) < argmax_col(b); });
    return rep;
}

} // namespace prelu
