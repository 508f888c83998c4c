#include "prelu/net.hpp"

#include <cmath>
#include <limits>

namespace prelu {

namespace {

// s^q for s > 0, q >= 0; fast paths for the small integer exponents used in
// training loops.
double pos_pow(double s, double q) {
    if (q == 0.0) return 1.0;
    if (q == 1.0) return s;
    if (q == 2.0) return s * s;
    if (q == 3.0) return s * s * s;
    return std::pow(s, q);
}

double softplus(double t) {
    // log(1 + exp(t)) without overflow
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

struct ForwardCache {
    Matrix S;       // n x h pre-activations
    Matrix A;       // n x h hidden features
    Vector norms;   // h row norms of W
    Vector scale;   // h, |w_j|^{1-p} with 0 for zero rows
};

ForwardCache compute_features(const PreluNet& net, const Matrix& X) {
    if (X.cols() != net.dim()) throw std::invalid_argument("pReLU forward: dimension mismatch");
    ForwardCache c;
    c.S.noalias() = X * net.W.transpose();
    c.norms = net.W.rowwise().norm();
    const Index h = net.width();
    c.scale.resize(h);
    for (Index j = 0; j < h; ++j)
        c.scale[j] = (c.norms[j] > 0.0) ? pos_pow(c.norms[j], net.p - 1.0) : 0.0;
    // scale currently holds |w|^{p-1}; invert to |w|^{1-p}
    for (Index j = 0; j < h; ++j)
        c.scale[j] = (c.scale[j] > 0.0) ? 1.0 / c.scale[j] : 0.0;
    c.A = c.S.unaryExpr([p = net.p](double s) { return relu_pow(s, p); });
    c.A.array().rowwise() *= c.scale.transpose().array();
    return c;
}

} // namespace

double relu_pow(double s, double p) {
    if (s <= 0.0) return 0.0;
    return pos_pow(s, p);
}

PreluNet init_balanced(Index h, Index D, const InitSpec& spec) {
    if (h < 1 || D < 1) throw std::invalid_argument("init_balanced: need h, D >= 1");
    if (spec.epsilon <= 0.0) throw std::invalid_argument("init_balanced: epsilon must be > 0");
    Rng rng(spec.seed);
    Rng dir = rng.split(1);
    Rng sign = rng.split(2);
    PreluNet net;
    net.p = 1.0;
    net.W.resize(h, D);
    const double bound = 1.0 / std::sqrt(static_cast<double>(D));
    for (Index j = 0; j < h; ++j)
        for (Index d = 0; d < D; ++d)
            net.W(j, d) = spec.epsilon * (spec.law == DirectionLaw::Uniform
                                              ? dir.uniform(-bound, bound)
                                              : dir.normal());
    net.V.resize(h, 1);
    for (Index j = 0; j < h; ++j) {
        if (spec.balanced) {
            const double s = (sign.uniform01() < 0.5) ? -1.0 : 1.0;
            net.V(j, 0) = s * net.W.row(j).norm();
        } else {
            net.V(j, 0) = spec.epsilon * (spec.law == DirectionLaw::Uniform
                                              ? sign.uniform(-bound, bound)
                                              : sign.normal());
        }
    }
    return net;
}

PreluNet init_kaiming(Index h, Index D, Index heads, std::uint64_t seed) {
    if (h < 1 || D < 1 || heads < 1) throw std::invalid_argument("init_kaiming: bad shape");
    Rng rng(seed);
    Rng rw = rng.split(1);
    Rng rv = rng.split(2);
    PreluNet net;
    net.p = 1.0;
    net.W = rw.normal_matrix(h, D) * std::sqrt(2.0 / static_cast<double>(D));
    net.V = rv.normal_matrix(h, heads) * std::sqrt(2.0 / static_cast<double>(h));
    return net;
}

double loss_value(double y, double yhat, LossKind kind) {
    switch (kind) {
        case LossKind::Exponential: return std::exp(-y * yhat);
        case LossKind::Logistic: return softplus(-y * yhat);
        case LossKind::CrossEntropy:
            throw std::invalid_argument("loss_value: cross-entropy needs the multiclass path");
    }
    return 0.0;
}

double loss_derivative(double y, double yhat, LossKind kind) {
    switch (kind) {
        case LossKind::Exponential: return -y * std::exp(-y * yhat);
        case LossKind::Logistic: {
            // -y * sigmoid(-y yhat), evaluated without overflow
            const double q = y * yhat;
            if (q > 0.0) {
                const double e = std::exp(-q);
                return -y * e / (1.0 + e);
            }
            return -y / (1.0 + std::exp(q));
        }
        case LossKind::CrossEntropy:
            throw std::invalid_argument("loss_derivative: cross-entropy needs the multiclass path");
    }
    return 0.0;
}

Matrix hidden_features(const PreluNet& net, const Matrix& X) {
    return compute_features(net, X).A;
}

Vector forward(const PreluNet& net, const Matrix& X) {
    return compute_features(net, X).A * net.V.col(0);
}

double forward(const PreluNet& net, const Vector& x) {
    if (x.size() != net.dim()) throw std::invalid_argument("pReLU forward: dimension mismatch");
    double out = 0.0;
    for (Index j = 0; j < net.width(); ++j) {
        const double nr = net.W.row(j).norm();
        if (nr == 0.0) continue;
        const double s = net.W.row(j).dot(x.transpose());
        if (s <= 0.0) continue;
        out += net.V(j, 0) * pos_pow(s, net.p) / pos_pow(nr, net.p - 1.0);
    }
    return out;
}

Matrix forward_logits(const PreluNet& net, const Matrix& X) {
    return compute_features(net, X).A * net.V;
}

namespace {

// Shared tail of the two backward paths. E is the n x h backprop signal
// reaching the hidden features: E(i,j) = d loss_i / d a_ij.
Gradients backward_from_signal(const PreluNet& net, const Matrix& X, const ForwardCache& c,
                               const Matrix& E) {
    const Index h = net.width();
    Matrix B(c.S.rows(), h);
    for (Index j = 0; j < h; ++j) {
        const double sc = net.p * c.scale[j];
        B.col(j) = c.S.col(j).unaryExpr([&, sc](double s) {
            return (s > 0.0) ? sc * pos_pow(s, net.p - 1.0) : 0.0;
        });
    }
    Gradients g;
    g.dW.noalias() = (B.cwiseProduct(E)).transpose() * X;
    if (net.p > 1.0) {
        for (Index j = 0; j < h; ++j) {
            if (c.norms[j] == 0.0) continue;
            const double coef =
                (net.p - 1.0) / (c.norms[j] * c.norms[j]) * E.col(j).dot(c.A.col(j));
            g.dW.row(j) -= coef * net.W.row(j);
        }
    }
    return g;  // dV is filled in by the caller
}

} // namespace

Gradients backward(const PreluNet& net, const Matrix& X, const Vector& y, LossKind kind) {
    if (!net.binary()) throw std::invalid_argument("backward: net has multiple heads; use backward_ce");
    if (X.rows() != y.size() || X.rows() == 0)
        throw std::invalid_argument("backward: batch/label mismatch or empty batch");
    ForwardCache c = compute_features(net, X);
    Vector yhat = c.A * net.V.col(0);
    Vector gvec(X.rows());
    for (Index i = 0; i < X.rows(); ++i) gvec[i] = loss_derivative(y[i], yhat[i], kind);
    Matrix E = gvec * net.V.col(0).transpose();  // n x h
    Gradients g = backward_from_signal(net, X, c, E);
    g.dV = c.A.transpose() * gvec;  // exact, avoids E-based reconstruction
    return g;
}

Gradients backward_ce(const PreluNet& net, const Matrix& X, const VectorI& labels) {
    if (X.rows() != labels.size() || X.rows() == 0)
        throw std::invalid_argument("backward_ce: batch/label mismatch or empty batch");
    ForwardCache c = compute_features(net, X);
    Matrix Y = c.A * net.V;  // n x C logits
    Matrix G(Y.rows(), Y.cols());
    for (Index i = 0; i < Y.rows(); ++i) {
        const double m = Y.row(i).maxCoeff();
        Eigen::RowVectorXd e = (Y.row(i).array() - m).exp();
        G.row(i) = e / e.sum();
        G(i, labels[i]) -= 1.0;
    }
    Matrix E = G * net.V.transpose();  // n x h
    Gradients g = backward_from_signal(net, X, c, E);
    g.dV = c.A.transpose() * G;
    return g;
}

double batch_loss(const PreluNet& net, const Matrix& X, const Vector& y, LossKind kind) {
    Vector yhat = forward(net, X);
    double total = 0.0;
    for (Index i = 0; i < X.rows(); ++i) total += loss_value(y[i], yhat[i], kind);
    return total / static_cast<double>(X.rows());
}

double batch_loss_ce(const PreluNet& net, const Matrix& X, const VectorI& labels) {
    Matrix Y = forward_logits(net, X);
    double total = 0.0;
    for (Index i = 0; i < Y.rows(); ++i) {
        const double m = Y.row(i).maxCoeff();
        const double lse = m + std::log((Y.row(i).array() - m).exp().sum());
        total += lse - Y(i, labels[i]);
    }
    return total / static_cast<double>(Y.rows());
}

double accuracy(const PreluNet& net, const Dataset& data) {
    const Matrix X = data.X();
    Index correct = 0;
    if (net.binary()) {
        Vector yhat = forward(net, X);
        for (Index i = 0; i < data.size(); ++i)
            if (yhat[i] * data.samples[static_cast<std::size_t>(i)].y > 0.0) ++correct;
    } else {
        Matrix Y = forward_logits(net, X);
        for (Index i = 0; i < data.size(); ++i) {
            Index argmax = 0;
            Y.row(i).maxCoeff(&argmax);
            if (argmax == data.samples[static_cast<std::size_t>(i)].y) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

Vector balancedness(const PreluNet& net) {
    Vector q(net.width());
    for (Index j = 0; j < net.width(); ++j)
        q[j] = net.V.row(j).squaredNorm() - net.W.row(j).squaredNorm();
    return q;
}

double balancedness_drift(const PreluNet& net, const Vector& baseline) {
    return (balancedness(net) - baseline).cwiseAbs().maxCoeff();
}

namespace {

struct AdamState {
    Matrix mW, vW, mV, vV;
    long t = 0;
};

void apply_update(PreluNet& net, const Gradients& g, double step, Optimizer opt,
                  const AdamParams& ap, AdamState& st) {
    if (opt == Optimizer::Sgd) {
        net.W -= step * g.dW;
        net.V -= step * g.dV;
        return;
    }
    if (st.t == 0) {
        st.mW = Matrix::Zero(net.W.rows(), net.W.cols());
        st.vW = st.mW;
        st.mV = Matrix::Zero(net.V.rows(), net.V.cols());
        st.vV = st.mV;
    }
    ++st.t;
    const double bc1 = 1.0 - std::pow(ap.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(ap.beta2, static_cast<double>(st.t));
    auto adam = [&](Matrix& P, Matrix& m, Matrix& v, const Matrix& grad) {
        m = ap.beta1 * m + (1.0 - ap.beta1) * grad;
        v = ap.beta2 * v + (1.0 - ap.beta2) * grad.cwiseProduct(grad);
        P.array() -= step * (m.array() / bc1) / ((v.array() / bc2).sqrt() + ap.eps);
    };
    adam(net.W, st.mW, st.vW, g.dW);
    adam(net.V, st.mV, st.vV, g.dV);
}

Index worst_neuron(const PreluNet& net) {
    for (Index j = 0; j < net.width(); ++j)
        if (!net.W.row(j).allFinite() || !net.V.row(j).allFinite()) return j;
    Index j = 0;
    net.W.rowwise().norm().maxCoeff(&j);
    return j;
}

} // namespace

TrainHistory train(PreluNet& net, const Dataset& data, const TrainConfig& cfg,
                   const Dataset* eval, const SnapshotHook& hook) {
    cfg.validate();
    data.validate();
    net.validate();
    const bool multiclass = !net.binary();
    if (multiclass != (cfg.loss == LossKind::CrossEntropy))
        throw std::invalid_argument("train: loss kind does not match the net's head count");
    if (multiclass != (data.provenance == Provenance::MnistDigits))
        throw std::invalid_argument("train: dataset provenance does not match the net's head count");

    const Matrix X = data.X();
    const Index n = X.rows();
    Vector y;
    VectorI labels;
    if (multiclass) {
        labels.resize(n);
        for (Index i = 0; i < n; ++i) labels[i] = data.samples[static_cast<std::size_t>(i)].y;
    } else {
        y = data.y();
    }

    const Vector q0 = balancedness(net);
    Rng shuffler = Rng(cfg.seed).split(0x73687566ull);  // "shuf"
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    AdamState adam;
    TrainHistory hist;
    Index iteration = 0;

    auto record = [&](Index epoch, double mean_loss) {
        TrainSnapshot snap;
        snap.epoch = epoch;
        snap.loss = mean_loss;
        snap.train_acc = accuracy(net, data);
        snap.test_acc = eval ? accuracy(net, *eval) : std::numeric_limits<double>::quiet_NaN();
        snap.stable_rank = cfg.record_stable_rank
                               ? stable_rank(hidden_features(net, X))
                               : std::numeric_limits<double>::quiet_NaN();
        snap.max_balancedness_drift = balancedness_drift(net, q0);
        snap.neuron_norms = net.W.rowwise().norm();
        hist.rows.push_back(snap);
        if (hook) hook(snap);
    };

    for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffler.shuffle(order);
        for (Index start = 0; start < n; start += cfg.batch_size) {
            const Index bn = std::min(cfg.batch_size, n - start);
            Matrix Xb(bn, X.cols());
            for (Index i = 0; i < bn; ++i) Xb.row(i) = X.row(order[static_cast<std::size_t>(start + i)]);
            Gradients g;
            if (multiclass) {
                VectorI lb(bn);
                for (Index i = 0; i < bn; ++i) lb[i] = labels[order[static_cast<std::size_t>(start + i)]];
                g = backward_ce(net, Xb, lb);
            } else {
                Vector yb(bn);
                for (Index i = 0; i < bn; ++i) yb[i] = y[order[static_cast<std::size_t>(start + i)]];
                g = backward(net, Xb, yb, cfg.loss);
            }
            if (cfg.reduction == Reduction::Mean) {
                const double inv = 1.0 / static_cast<double>(bn);
                g.dW *= inv;
                g.dV *= inv;
            }
            apply_update(net, g, cfg.step_size, cfg.optimizer, cfg.adam, adam);
            ++iteration;
        }
        const double mean_loss =
            multiclass ? batch_loss_ce(net, X, labels) : batch_loss(net, X, y, cfg.loss);
        if (!std::isfinite(mean_loss)) throw TrainingDiverged(iteration, worst_neuron(net));
        const bool stop = (cfg.stop_loss > 0.0 && mean_loss < cfg.stop_loss);
        if (epoch % cfg.record_cadence == 0 || epoch == cfg.epochs || stop) record(epoch, mean_loss);
        if (stop) break;
    }
    return hist;
}

double stable_rank(const Matrix& A) {
    const double fro2 = A.squaredNorm();
    if (fro2 == 0.0) throw std::domain_error("stable_rank: all-zero matrix");
    Rng rng(0x57ab1eull);
    Vector v = rng.unit_sphere(A.cols());
    double sigma = 0.0;
    for (long iter = 0; iter < 1000000; ++iter) {
        Vector u = A * v;
        const double s1 = u.norm();
        if (s1 == 0.0) {
            v = rng.unit_sphere(A.cols());
            continue;
        }
        Vector w = A.transpose() * u;
        const double s2 = w.norm();
        const double next = s2 / s1;  // -> top singular value
        v = w / s2;
        if (iter > 0 && std::abs(next - sigma) <= 1e-8 * next) return fro2 / (next * next);
        sigma = next;
    }
    throw std::runtime_error("stable_rank: power iteration did not converge");
}

} // namespace prelu
