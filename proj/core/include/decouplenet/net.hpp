#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decouplenet/rng.hpp"
#include "decouplenet/sample.hpp"

namespace dcn::net {

enum class Activation { relu, logistic };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Feedforward architecture mapping d inputs to d_out outputs through at least
// one hidden layer. The output activation has to map into (0,1) so the net's
// image lies in the unit hypercube; logistic is the only such activation here.
struct NetConfig {
    int d = 2;
    int d_out = 2;
    std::vector<int> hidden = {300, 300};
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::logistic;

    // Layer sizes including input and output: d, hidden..., d_out.
    std::vector<int> layer_sizes() const;
};

void validate(const NetConfig& config);

// Per layer: weight matrix (fan_out x fan_in) and bias vector (fan_out).
struct NetWeights {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    std::size_t layers() const { return weights.size(); }
};

using NetGradient = NetWeights; // same shapes, one entry per parameter

void check_shapes(const NetConfig& config, const NetWeights& w);

struct TrainConfig {
    Eigen::Index n_epochs = 100;
    Eigen::Index n_batch = 1000;
    std::vector<double> bandwidths = {0.05, 0.1, 0.5, 1.0, 5.0};
    double beta1 = 0.9;
    double beta2 = 0.999;
    double alpha = 0.001;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

// First and second moment estimates plus the global step counter; the counter
// advances by exactly one per processed batch.
struct AdamState {
    std::vector<Eigen::ArrayXXd> m1_w, m2_w;
    std::vector<Eigen::ArrayXd> m1_b, m2_b;
    long step = 0;

    explicit AdamState(const NetConfig& config);
};

// Weights uniform on +-sqrt(6/(fan_in+fan_out)), drawn row-major per layer in
// layer order; biases zero.
NetWeights glorot_init(const NetConfig& config, Rng& rng);

// Rows of x are independent inputs; returns the activations of the top layer.
Eigen::MatrixXd forward(const NetConfig& config, const NetWeights& w, const Eigen::MatrixXd& x);

// Gaussian mixture kernel sum_m exp(-|u-v|^2 / bandwidth_m).
double kernel_mixture(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                      const std::vector<double>& bandwidths);

// Biased V-statistic form of the kernel two-sample distance between equally
// sized batches: (1/m^2) sum_{i,i'} [K(a_i,a_i') - 2 K(a_i',b_i) + K(b_i,b_i')].
double mmd_loss(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                const std::vector<double>& bandwidths);

struct LossAndGradient {
    double loss;
    NetGradient gradient;
};

// Reverse-mode gradient of mmd_loss(forward(w, input), targets) with respect
// to every weight and bias. Deterministic; throws NumericError naming the
// layer if an intermediate stops being finite.
LossAndGradient loss_and_gradient(const NetConfig& config, const NetWeights& w,
                                  const Eigen::MatrixXd& input, const Eigen::MatrixXd& targets,
                                  const std::vector<double>& bandwidths);

// One stochastic-gradient step: update biased first/second moments, correct
// the bias with the global step count, move each coordinate by
// -alpha * m1_hat / (sqrt(m2_hat) + epsilon).
void adam_step(AdamState& state, NetWeights& w, const NetGradient& g, const TrainConfig& config);

// Mini-batch training: (1) pre-map the input sample componentwise through the
// standard-normal quantile, once; (2) draw the target uniforms, once; (3) per
// epoch, re-partition inputs and targets by two independent shuffles and run
// one Adam step per batch. n_batch must divide the number of rows.
NetWeights train(const Sample& input, const NetConfig& net_config,
                 const TrainConfig& train_config);

// The composed map: clamp to [1e-12, 1-1e-12], componentwise normal quantile,
// then the net. Output has d_out columns.
Sample transform(const NetConfig& config, const NetWeights& w, const Sample& u);

} // namespace dcn::net
