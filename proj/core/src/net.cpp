#include "decouplenet/net.hpp"

#include <cmath>
#include <numeric>

#include "decouplenet/errors.hpp"
#include "decouplenet/special.hpp"

namespace dcn::net {

std::string activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "logistic";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu")
        return Activation::relu;
    if (name == "logistic")
        return Activation::logistic;
    throw FormatError("unknown activation '" + name + "'");
}

std::vector<int> NetConfig::layer_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(hidden.size() + 2);
    sizes.push_back(d);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(d_out);
    return sizes;
}

void validate(const NetConfig& config) {
    if (config.d_out < 2 || config.d < config.d_out)
        throw DomainError("net config: need input dim >= output dim >= 2");
    if (config.hidden.empty())
        throw DomainError("net config: need at least one hidden layer");
    for (int h : config.hidden)
        if (h < 1)
            throw DomainError("net config: hidden layer sizes must be positive");
    if (config.output_activation != Activation::logistic)
        throw DomainError("net config: the output activation must map into (0,1); use logistic");
}

void validate(const TrainConfig& config) {
    if (config.n_epochs < 1 || config.n_batch < 1)
        throw DomainError("train config: epochs and batch size must be positive");
    if (config.bandwidths.empty())
        throw DomainError("train config: need at least one kernel bandwidth");
    for (double s : config.bandwidths)
        if (!(s > 0.0) || !std::isfinite(s))
            throw DomainError("train config: bandwidths must be positive");
    if (!(config.beta1 > 0.0 && config.beta1 < 1.0) ||
        !(config.beta2 > 0.0 && config.beta2 < 1.0))
        throw DomainError("train config: decay rates must lie in (0,1)");
    if (!(config.alpha > 0.0) || !(config.epsilon > 0.0))
        throw DomainError("train config: step size and smoothing constant must be positive");
}

void check_shapes(const NetConfig& config, const NetWeights& w) {
    const std::vector<int> sizes = config.layer_sizes();
    const std::size_t layers = sizes.size() - 1;
    if (w.weights.size() != layers || w.biases.size() != layers)
        throw DomainError("net weights: layer count does not match the architecture");
    for (std::size_t l = 0; l < layers; ++l) {
        if (w.weights[l].rows() != sizes[l + 1] || w.weights[l].cols() != sizes[l])
            throw DomainError("net weights: weight matrix shape mismatch at layer " +
                              std::to_string(l + 1));
        if (w.biases[l].size() != sizes[l + 1])
            throw DomainError("net weights: bias length mismatch at layer " +
                              std::to_string(l + 1));
        if (!w.weights[l].allFinite() || !w.biases[l].allFinite())
            throw NumericError("net weights: non-finite entries at layer " +
                               std::to_string(l + 1));
    }
}

AdamState::AdamState(const NetConfig& config) {
    const std::vector<int> sizes = config.layer_sizes();
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        m1_w.emplace_back(Eigen::ArrayXXd::Zero(sizes[l + 1], sizes[l]));
        m2_w.emplace_back(Eigen::ArrayXXd::Zero(sizes[l + 1], sizes[l]));
        m1_b.emplace_back(Eigen::ArrayXd::Zero(sizes[l + 1]));
        m2_b.emplace_back(Eigen::ArrayXd::Zero(sizes[l + 1]));
    }
}

NetWeights glorot_init(const NetConfig& config, Rng& rng) {
    validate(config);
    const std::vector<int> sizes = config.layer_sizes();
    NetWeights w;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l], fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd weight(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) // row-major draw order
            for (int c = 0; c < fan_in; ++c)
                weight(r, c) = limit * (2.0 * rng.uniform_open() - 1.0);
        w.weights.push_back(std::move(weight));
        w.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return w;
}

namespace {

// Logistic with the pre-activation clamped so outputs stay strictly inside
// (0,1) even for extreme inputs.
double logistic(double z) {
    const double zc = std::min(36.0, std::max(-36.0, z));
    if (zc >= 0.0)
        return 1.0 / (1.0 + std::exp(-zc));
    const double e = std::exp(zc);
    return e / (1.0 + e);
}

void apply_activation(Eigen::MatrixXd& z, Activation a) {
    if (a == Activation::relu)
        z = z.cwiseMax(0.0);
    else
        z = z.unaryExpr([](double v) { return logistic(v); });
}

// Stack of layer activations h[0] = input, h[L] = output.
std::vector<Eigen::MatrixXd> forward_stack(const NetConfig& config, const NetWeights& w,
                                           const Eigen::MatrixXd& x) {
    if (x.cols() != config.d)
        throw DomainError("forward: input has " + std::to_string(x.cols()) +
                          " columns, expected " + std::to_string(config.d));
    const std::size_t layers = w.layers();
    std::vector<Eigen::MatrixXd> h(layers + 1);
    h[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        h[l + 1].noalias() = h[l] * w.weights[l].transpose();
        h[l + 1].rowwise() += w.biases[l].transpose();
        apply_activation(h[l + 1], l + 1 < layers ? config.hidden_activation
                                                  : config.output_activation);
        if (!h[l + 1].allFinite())
            throw NumericError("forward: non-finite activations at layer " +
                               std::to_string(l + 1));
    }
    return h;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
    d2.colwise() += a.rowwise().squaredNorm();
    d2.rowwise() += b.rowwise().squaredNorm().transpose();
    return d2.cwiseMax(0.0);
}

struct KernelTerms {
    double loss = 0.0;
    Eigen::MatrixXd w_aa, w_ab; // sum over bandwidths of exp(-D/s)/s
};

KernelTerms kernel_terms(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const std::vector<double>& bandwidths, bool need_weights) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DomainError("mmd: batches must have equal shape");
    if (a.rows() < 1)
        throw DomainError("mmd: empty batch");
    if (bandwidths.empty())
        throw DomainError("mmd: need at least one bandwidth");
    for (double s : bandwidths)
        if (!(s > 0.0))
            throw DomainError("mmd: bandwidths must be positive");

    const Eigen::ArrayXXd d_aa = squared_distances(a, a).array();
    const Eigen::ArrayXXd d_ab = squared_distances(a, b).array();
    const Eigen::ArrayXXd d_bb = squared_distances(b, b).array();

    KernelTerms out;
    if (need_weights) {
        out.w_aa = Eigen::MatrixXd::Zero(a.rows(), a.rows());
        out.w_ab = Eigen::MatrixXd::Zero(a.rows(), a.rows());
    }
    double s_aa = 0.0, s_ab = 0.0, s_bb = 0.0;
    for (double s : bandwidths) {
        const Eigen::ArrayXXd e_aa = (-d_aa / s).exp();
        const Eigen::ArrayXXd e_ab = (-d_ab / s).exp();
        s_aa += e_aa.sum();
        s_ab += e_ab.sum();
        s_bb += (-d_bb / s).exp().sum();
        if (need_weights) {
            out.w_aa += (e_aa / s).matrix();
            out.w_ab += (e_ab / s).matrix();
        }
    }
    const double m = static_cast<double>(a.rows());
    out.loss = (s_aa - 2.0 * s_ab + s_bb) / (m * m);
    return out;
}

} // namespace

Eigen::MatrixXd forward(const NetConfig& config, const NetWeights& w, const Eigen::MatrixXd& x) {
    validate(config);
    check_shapes(config, w);
    return forward_stack(config, w, x).back();
}

double kernel_mixture(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                      const std::vector<double>& bandwidths) {
    if (u.size() != v.size())
        throw DomainError("kernel_mixture: dimension mismatch");
    const double d2 = (u - v).squaredNorm();
    double k = 0.0;
    for (double s : bandwidths) {
        if (!(s > 0.0))
            throw DomainError("kernel_mixture: bandwidths must be positive");
        k += std::exp(-d2 / s);
    }
    return k;
}

double mmd_loss(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                const std::vector<double>& bandwidths) {
    return kernel_terms(a, b, bandwidths, false).loss;
}

LossAndGradient loss_and_gradient(const NetConfig& config, const NetWeights& w,
                                  const Eigen::MatrixXd& input, const Eigen::MatrixXd& targets,
                                  const std::vector<double>& bandwidths) {
    validate(config);
    check_shapes(config, w);
    if (targets.cols() != config.d_out || targets.rows() != input.rows())
        throw DomainError("loss_and_gradient: target batch shape mismatch");

    const std::vector<Eigen::MatrixXd> h = forward_stack(config, w, input);
    const Eigen::MatrixXd& a = h.back();
    const KernelTerms kt = kernel_terms(a, targets, bandwidths, true);

    // d loss / d a_p = (-4/m^2) [ sum_q w^{aa}_{pq} (a_p - a_q)
    //                            - sum_i w^{ab}_{pi} (a_p - b_i) ]
    const double m = static_cast<double>(a.rows());
    const Eigen::VectorXd row_aa = kt.w_aa.rowwise().sum();
    const Eigen::VectorXd row_ab = kt.w_ab.rowwise().sum();
    Eigen::MatrixXd delta = (row_aa - row_ab).asDiagonal() * a;
    delta.noalias() -= kt.w_aa * a;
    delta.noalias() += kt.w_ab * targets;
    delta *= -4.0 / (m * m);

    const std::size_t layers = w.layers();
    LossAndGradient out{kt.loss, NetGradient{}};
    out.gradient.weights.resize(layers);
    out.gradient.biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        const Activation act =
            l + 1 < layers ? config.hidden_activation : config.output_activation;
        if (act == Activation::logistic)
            delta.array() *= (h[l + 1].array() * (1.0 - h[l + 1].array()));
        else // relu: pass gradient only where the unit fired
            delta.array() *= (h[l + 1].array() > 0.0).cast<double>();
        out.gradient.weights[l].noalias() = delta.transpose() * h[l];
        out.gradient.biases[l] = delta.colwise().sum().transpose();
        if (!out.gradient.weights[l].allFinite())
            throw NumericError("loss_and_gradient: non-finite gradient at layer " +
                               std::to_string(l + 1));
        if (l > 0)
            delta = delta * w.weights[l];
    }
    return out;
}

void adam_step(AdamState& state, NetWeights& w, const NetGradient& g, const TrainConfig& config) {
    validate(config);
    if (g.weights.size() != w.weights.size())
        throw DomainError("adam_step: gradient layer count mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < w.weights.size(); ++l) {
        state.m1_w[l] = config.beta1 * state.m1_w[l] + (1.0 - config.beta1) * g.weights[l].array();
        state.m2_w[l] =
            config.beta2 * state.m2_w[l] + (1.0 - config.beta2) * g.weights[l].array().square();
        w.weights[l].array() -=
            config.alpha * (state.m1_w[l] / bc1) / ((state.m2_w[l] / bc2).sqrt() + config.epsilon);

        state.m1_b[l] = config.beta1 * state.m1_b[l] + (1.0 - config.beta1) * g.biases[l].array();
        state.m2_b[l] =
            config.beta2 * state.m2_b[l] + (1.0 - config.beta2) * g.biases[l].array().square();
        w.biases[l].array() -=
            config.alpha * (state.m1_b[l] / bc1) / ((state.m2_b[l] / bc2).sqrt() + config.epsilon);
    }
}

namespace {

constexpr double CLAMP = 1e-12; // margin clamp shared by train and transform

Eigen::MatrixXd normal_scores(const Eigen::MatrixXd& u) {
    Eigen::MatrixXd z(u.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            z(i, j) = num::std_normal_quantile(
                std::min(1.0 - CLAMP, std::max(CLAMP, u(i, j))));
    return z;
}

void shuffle_indices(std::vector<Eigen::Index>& idx, Rng& rng) {
    for (std::size_t i = idx.size() - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(i + 1)]);
}

} // namespace

NetWeights train(const Sample& input, const NetConfig& net_config,
                 const TrainConfig& train_config) {
    validate(net_config);
    validate(train_config);
    const Eigen::Index n = input.n();
    if (n < 2)
        throw DataError("train: need at least two observations");
    if (input.d() != net_config.d)
        throw DomainError("train: sample dimension does not match the net input dimension");
    if (n % train_config.n_batch != 0)
        throw DomainError("train: batch size " + std::to_string(train_config.n_batch) +
                          " must divide the training size " + std::to_string(n));

    Rng root(train_config.seed);
    Rng init_rng = root.derive(1);
    Rng target_rng = root.derive(2);
    Rng shuffle_rng = root.derive(3);

    NetWeights w = glorot_init(net_config, init_rng);
    AdamState state(net_config);

    // Input pre-map is epoch-invariant: compute once.
    const Eigen::MatrixXd x = normal_scores(input.values);

    // Target uniforms are fixed up front and only re-partitioned per epoch.
    Eigen::MatrixXd targets(n, net_config.d_out);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < net_config.d_out; ++j)
            targets(i, j) = target_rng.uniform_open();

    const Eigen::Index batches = n / train_config.n_batch;
    const Eigen::Index m = train_config.n_batch;
    std::vector<Eigen::Index> perm_x(n), perm_t(n);
    std::iota(perm_x.begin(), perm_x.end(), 0);
    std::iota(perm_t.begin(), perm_t.end(), 0);

    Eigen::MatrixXd xb(m, net_config.d), tb(m, net_config.d_out);
    for (Eigen::Index epoch = 0; epoch < train_config.n_epochs; ++epoch) {
        shuffle_indices(perm_x, shuffle_rng); // inputs first, then targets
        shuffle_indices(perm_t, shuffle_rng);
        for (Eigen::Index b = 0; b < batches; ++b) {
            for (Eigen::Index r = 0; r < m; ++r) {
                xb.row(r) = x.row(perm_x[static_cast<std::size_t>(b * m + r)]);
                tb.row(r) = targets.row(perm_t[static_cast<std::size_t>(b * m + r)]);
            }
            const LossAndGradient lg =
                loss_and_gradient(net_config, w, xb, tb, train_config.bandwidths);
            adam_step(state, w, lg.gradient, train_config);
        }
    }
    return w;
}

Sample transform(const NetConfig& config, const NetWeights& w, const Sample& u) {
    validate(config);
    check_shapes(config, w);
    if (u.d() != config.d)
        throw DomainError("transform: sample dimension does not match the net input dimension");
    return Sample{forward(config, w, normal_scores(u.values))};
}

} // namespace dcn::net
