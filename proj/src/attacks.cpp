#include "prelu/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prelu {

namespace {

template <class Row>
void project_ball(Row&& v, AttackNorm norm, double radius) {
    switch (norm) {
        case AttackNorm::L2: {
            const double n = v.norm();
            if (n > radius) v *= radius / n;
            return;
        }
        case AttackNorm::Linf:
            v = v.cwiseMax(-radius).cwiseMin(radius);
            return;
        case AttackNorm::L1: {
            if (v.template lpNorm<1>() <= radius) return;
            // Duchi et al. simplex projection on |v|
            std::vector<double> u(static_cast<std::size_t>(v.size()));
            for (Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v[i]);
            std::sort(u.begin(), u.end(), std::greater<double>());
            double cum = 0.0, theta = 0.0;
            for (std::size_t j = 0; j < u.size(); ++j) {
                cum += u[j];
                const double cand = (cum - radius) / static_cast<double>(j + 1);
                if (u[j] > cand) theta = cand;
                else break;
            }
            for (Index i = 0; i < v.size(); ++i) {
                const double a = std::abs(v[i]) - theta;
                v[i] = (a > 0.0) ? (v[i] > 0.0 ? a : -a) : 0.0;
            }
            return;
        }
    }
}

Eigen::RowVectorXd random_ball_point(Rng& rng, AttackNorm norm, double radius, Index D) {
    Eigen::RowVectorXd out(D);
    switch (norm) {
        case AttackNorm::L2: {
            Vector u = rng.unit_sphere(D);
            const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(D));
            out = r * u.transpose();
            return out;
        }
        case AttackNorm::Linf:
            for (Index i = 0; i < D; ++i) out[i] = rng.uniform(-radius, radius);
            return out;
        case AttackNorm::L1: {
            double total = 0.0;
            for (Index i = 0; i < D; ++i) {
                const double e = -std::log(1.0 - rng.uniform01() + 1e-300);
                out[i] = (rng.uniform01() < 0.5 ? -e : e);
                total += e;
            }
            const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(D));
            out *= r / total;
            return out;
        }
    }
    return out;
}

// Ascent direction from the raw objective gradient, per norm. Returns false
// when the gradient row is zero.
bool ascent_direction(const Eigen::RowVectorXd& g, AttackNorm norm,
                      Eigen::Ref<Eigen::RowVectorXd> dir) {
    switch (norm) {
        case AttackNorm::L2: {
            const double n = g.norm();
            if (n == 0.0) return false;
            dir = g / n;
            return true;
        }
        case AttackNorm::Linf: {
            if ((g.array() == 0.0).all()) return false;
            dir = g.array().sign();
            return true;
        }
        case AttackNorm::L1: {
            Index best = 0;
            const double m = g.cwiseAbs().maxCoeff(&best);
            if (m == 0.0) return false;
            dir.setZero();
            dir[best] = (g[best] > 0.0) ? 1.0 : -1.0;
            return true;
        }
    }
    return false;
}

struct ObjectiveFns {
    std::function<Vector(const Matrix&)> value;   // attack objective, maximized
    std::function<Matrix(const Matrix&)> grad;
};

AttackResult run_pgd(const Matrix& X, const ObjectiveFns& fns, const AttackSpec& spec) {
    spec.validate();
    const Index n = X.rows();
    const Index D = X.cols();

    AttackResult result;
    result.delta = Matrix::Zero(n, D);
    result.objective = fns.value(X);  // zero perturbation is always a candidate
    result.stagnated.assign(static_cast<std::size_t>(n), true);
    if (spec.radius == 0.0) {
        result.stagnated.assign(static_cast<std::size_t>(n), false);
        return result;
    }

    const double step = spec.effective_step();
    Rng root(spec.seed);

    for (Index restart = 0; restart < spec.restarts; ++restart) {
        Matrix delta(n, D);
        if (restart == 0) {
            delta.setZero();
        } else {
            Rng rr = root.split(static_cast<std::uint64_t>(restart));
            for (Index i = 0; i < n; ++i) {
                Rng ri = rr.split(static_cast<std::uint64_t>(i));
                delta.row(i) = random_ball_point(ri, spec.norm, spec.radius, D);
            }
        }
        Eigen::RowVectorXd dir(D);
        for (Index t = 0; t < spec.steps; ++t) {
            Matrix G = fns.grad(X + delta);
            for (Index i = 0; i < n; ++i) {
                Eigen::RowVectorXd g = G.row(i);
                if (!ascent_direction(g, spec.norm, dir)) continue;
                result.stagnated[static_cast<std::size_t>(i)] = false;
                delta.row(i) += step * dir;
                project_ball(delta.row(i), spec.norm, spec.radius);
            }
        }
        Vector obj = fns.value(X + delta);
        for (Index i = 0; i < n; ++i) {
            if (obj[i] > result.objective[i]) {
                result.objective[i] = obj[i];
                result.delta.row(i) = delta.row(i);
            }
        }
    }
    // Spec'd behavior: a fully stagnated sample reports the zero perturbation.
    for (Index i = 0; i < n; ++i) {
        if (result.stagnated[static_cast<std::size_t>(i)]) result.delta.row(i).setZero();
    }
    return result;
}

AttackResult run_apgd_linf(const Matrix& X, const ObjectiveFns& fns, const AttackSpec& spec) {
    spec.validate();
    const Index n = X.rows();
    const Index D = X.cols();
    constexpr double kMomentum = 0.75;

    AttackResult result;
    result.delta = Matrix::Zero(n, D);
    result.objective = fns.value(X);
    result.stagnated.assign(static_cast<std::size_t>(n), true);
    if (spec.radius == 0.0) {
        result.stagnated.assign(static_cast<std::size_t>(n), false);
        return result;
    }

    const Index window = std::max<Index>(3, spec.steps / 10);
    Rng root(spec.seed);

    for (Index restart = 0; restart < spec.restarts; ++restart) {
        Matrix delta(n, D);
        if (restart == 0) {
            delta.setZero();
        } else {
            Rng rr = root.split(0xA9D + static_cast<std::uint64_t>(restart));
            for (Index i = 0; i < n; ++i) {
                Rng ri = rr.split(static_cast<std::uint64_t>(i));
                delta.row(i) = random_ball_point(ri, AttackNorm::Linf, spec.radius, D);
            }
        }
        Matrix delta_prev = delta;
        Vector eta = Vector::Constant(n, spec.step_size > 0.0 ? spec.step_size : 2.0 * spec.radius);
        // best over this restart, for the improvement checkpoints
        Vector best_obj = fns.value(X + delta);
        Matrix best_delta = delta;
        std::vector<Index> improved(static_cast<std::size_t>(n), 0);

        for (Index t = 0; t < spec.steps; ++t) {
            Matrix G = fns.grad(X + delta);
            Matrix next(n, D);
            for (Index i = 0; i < n; ++i) {
                Eigen::RowVectorXd g = G.row(i);
                if (!(g.array() == 0.0).all()) result.stagnated[static_cast<std::size_t>(i)] = false;
                Eigen::RowVectorXd z = delta.row(i) + eta[i] * g.array().sign().matrix();
                project_ball(z, AttackNorm::Linf, spec.radius);
                Eigen::RowVectorXd step = delta.row(i) + kMomentum * (z - delta.row(i)) +
                                          (1.0 - kMomentum) * (delta.row(i) - delta_prev.row(i));
                project_ball(step, AttackNorm::Linf, spec.radius);
                next.row(i) = step;
            }
            delta_prev = delta;
            delta = next;
            Vector obj = fns.value(X + delta);
            for (Index i = 0; i < n; ++i) {
                if (obj[i] > best_obj[i]) {
                    best_obj[i] = obj[i];
                    best_delta.row(i) = delta.row(i);
                    ++improved[static_cast<std::size_t>(i)];
                }
            }
            if ((t + 1) % window == 0) {
                for (Index i = 0; i < n; ++i) {
                    if (improved[static_cast<std::size_t>(i)] == 0) {
                        eta[i] *= 0.5;               // objective stalled: halve and
                        delta.row(i) = best_delta.row(i);  // restart from the best point
                        delta_prev.row(i) = best_delta.row(i);
                    }
                    improved[static_cast<std::size_t>(i)] = 0;
                }
            }
        }
        for (Index i = 0; i < n; ++i) {
            if (best_obj[i] > result.objective[i]) {
                result.objective[i] = best_obj[i];
                result.delta.row(i) = best_delta.row(i);
            }
        }
    }
    for (Index i = 0; i < n; ++i) {
        if (result.stagnated[static_cast<std::size_t>(i)]) result.delta.row(i).setZero();
    }
    return result;
}

ObjectiveFns binary_objective(const BinaryModel& model, const Vector& y) {
    ObjectiveFns fns;
    fns.value = [&model, y](const Matrix& Z) -> Vector {
        return -(model.values(Z).array() * y.array()).matrix();
    };
    fns.grad = [&model, y](const Matrix& Z) -> Matrix {
        Matrix g = model.input_grads(Z);
        g.array().colwise() *= -y.array();
        return g;
    };
    return fns;
}

Vector multiclass_margin(const PreluNet& net, const Matrix& X, const VectorI& labels) {
    Matrix Y = forward_logits(net, X);
    Vector margin(X.rows());
    for (Index i = 0; i < X.rows(); ++i) {
        const Index yi = labels[i];
        double other = -std::numeric_limits<double>::infinity();
        for (Index c = 0; c < Y.cols(); ++c)
            if (c != yi) other = std::max(other, Y(i, c));
        margin[i] = Y(i, yi) - other;
    }
    return margin;
}

Matrix multiclass_margin_grad(const PreluNet& net, const Matrix& X, const VectorI& labels) {
    // gradient of (f_{c*} - f_y), the attack objective, with c* the current
    // strongest wrong class
    Matrix Y = forward_logits(net, X);
    Matrix S = X * net.W.transpose();
    Vector norms = net.W.rowwise().norm();
    Matrix C(X.rows(), net.width());
    for (Index i = 0; i < X.rows(); ++i) {
        const Index yi = labels[i];
        Index cstar = (yi == 0) ? 1 : 0;
        for (Index c = 0; c < Y.cols(); ++c)
            if (c != yi && Y(i, c) > Y(i, cstar)) cstar = c;
        for (Index j = 0; j < net.width(); ++j) {
            if (norms[j] == 0.0 || S(i, j) <= 0.0) {
                C(i, j) = 0.0;
                continue;
            }
            const double b = net.p * relu_pow(S(i, j), net.p - 1.0) / relu_pow(norms[j], net.p - 1.0);
            C(i, j) = b * (net.V(j, cstar) - net.V(j, yi));
        }
    }
    return C * net.W;
}

} // namespace

AttackResult pgd(const BinaryModel& model, const Matrix& X, const Vector& y,
                 const AttackSpec& spec) {
    if (X.cols() != model.dim()) throw std::invalid_argument("pgd: dimension mismatch");
    if (X.rows() != y.size()) throw std::invalid_argument("pgd: label count mismatch");
    return run_pgd(X, binary_objective(model, y), spec);
}

AttackResult apgd_linf(const BinaryModel& model, const Matrix& X, const Vector& y,
                       const AttackSpec& spec) {
    if (X.cols() != model.dim()) throw std::invalid_argument("apgd_linf: dimension mismatch");
    if (X.rows() != y.size()) throw std::invalid_argument("apgd_linf: label count mismatch");
    if (spec.norm != AttackNorm::Linf) throw std::invalid_argument("apgd_linf: Linf only");
    return run_apgd_linf(X, binary_objective(model, y), spec);
}

Vector d0_direction(const SubclassBasis& basis) {
    auto [plus, minus] = average_centers(basis);
    const double k1 = std::sqrt(static_cast<double>(basis.K1));
    const double k2 = std::sqrt(static_cast<double>(basis.K2()));
    return (k1 * plus - k2 * minus) / std::sqrt(static_cast<double>(basis.K()));
}

Vector d0_attack(const SubclassBasis& basis, const Vector& x, int y, double rho) {
    const double scale = (1.0 + rho) / std::sqrt(static_cast<double>(basis.K()));
    return x - (y * scale) * d0_direction(basis);
}

Vector subclass_swap_attack(const SubclassBasis& basis, const Vector& x, Index z, double scale) {
    if (z < 1 || z > basis.K()) throw std::invalid_argument("subclass_swap_attack: z out of range");
    const Index k = z - 1;
    const Index opp = (k < basis.K1) ? basis.K() - 1 : 0;
    const Vector d = (basis.center(opp) - basis.center(k)) / std::sqrt(2.0);
    return x + scale * d;
}

AttackReport robust_accuracy(const BinaryModel& model, const Dataset& data,
                             const AttackSpec& spec) {
    const Matrix X = data.X();
    const Vector y = data.y();
    AttackResult ar = (spec.adaptive && spec.norm == AttackNorm::Linf)
                          ? apgd_linf(model, X, y, spec)
                          : pgd(model, X, y, spec);
    AttackReport rep;
    rep.delta = std::move(ar.delta);
    rep.margin_before = (model.values(X).array() * y.array()).matrix();
    rep.margin_after = -ar.objective;
    const Index n = X.rows();
    rep.success.assign(static_cast<std::size_t>(n), false);
    Index clean = 0, robust = 0;
    for (Index i = 0; i < n; ++i) {
        const bool ok_before = rep.margin_before[i] > 0.0;
        const bool ok_after = rep.margin_after[i] > 0.0;
        if (ok_before) ++clean;
        if (ok_before && ok_after) ++robust;
        rep.success[static_cast<std::size_t>(i)] = ok_before && !ok_after;
    }
    rep.clean_acc = static_cast<double>(clean) / static_cast<double>(n);
    rep.robust_acc = static_cast<double>(robust) / static_cast<double>(n);
    return rep;
}

AttackReport robust_accuracy_multiclass(const PreluNet& net, const Dataset& data,
                                        const AttackSpec& spec) {
    const Matrix X = data.X();
    const Index n = X.rows();
    VectorI labels(n);
    for (Index i = 0; i < n; ++i) labels[i] = data.samples[static_cast<std::size_t>(i)].y;

    ObjectiveFns fns;
    fns.value = [&](const Matrix& Z) -> Vector { return -multiclass_margin(net, Z, labels); };
    fns.grad = [&](const Matrix& Z) -> Matrix { return multiclass_margin_grad(net, Z, labels); };
    AttackResult ar = (spec.adaptive && spec.norm == AttackNorm::Linf)
                          ? run_apgd_linf(X, fns, spec)
                          : run_pgd(X, fns, spec);

    AttackReport rep;
    rep.delta = std::move(ar.delta);
    rep.margin_before = multiclass_margin(net, X, labels);
    rep.margin_after = -ar.objective;
    rep.success.assign(static_cast<std::size_t>(n), false);
    Index clean = 0, robust = 0;
    for (Index i = 0; i < n; ++i) {
        const bool ok_before = rep.margin_before[i] > 0.0;
        const bool ok_after = rep.margin_after[i] > 0.0;
        if (ok_before) ++clean;
        if (ok_before && ok_after) ++robust;
        rep.success[static_cast<std::size_t>(i)] = ok_before && !ok_after;
    }
    rep.clean_acc = static_cast<double>(clean) / static_cast<double>(n);
    rep.robust_acc = static_cast<double>(robust) / static_cast<double>(n);
    return rep;
}

} // namespace prelu
