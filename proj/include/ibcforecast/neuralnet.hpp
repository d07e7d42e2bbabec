#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ibcforecast/dataio.hpp"

namespace ibc {

enum class Activation { Tanh, Logistic };

const char* to_string(Activation a);
Activation parse_activation(std::string_view text);

/// Fully connected feed-forward topology. Hidden layers all share one
/// activation; the output layer is linear. Zero hidden layers gives a plain
/// affine model, which the tests use as a closed-form oracle.
struct NetworkSpec {
    std::vector<int> layer_sizes{kCovariateCount, 8, 1};
    Activation hidden_activation = Activation::Tanh;

    int input_width() const { return layer_sizes.front(); }
    int hidden_layers() const { return static_cast<int>(layer_sizes.size()) - 2; }

    /// Sum over layers of (fan_in + 1) * fan_out.
    int weight_count() const;

    void validate() const;

    /// Compact form used in grids and configs: hidden sizes joined by '-',
    /// then ':' and the activation ("8:tanh", "8-8:logistic"). "linear" means
    /// no hidden layer. The input width is always kCovariateCount.
    std::string str() const;
    static NetworkSpec parse(std::string_view text);

    bool operator==(const NetworkSpec&) const = default;
};

/// Flat weights. Layer by layer from the input side; within a layer, neuron
/// by neuron; each neuron stores its fan_in incoming weights followed by its
/// bias.
using WeightVector = std::vector<double>;

/// Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], deterministic in `seed`.
WeightVector init_weights(const NetworkSpec& spec, std::uint64_t seed);

/// Row-major input matrix plus targets, the form the trainer consumes.
struct Dataset {
    int rows = 0;
    int cols = 0;
    std::vector<double> x;  // rows * cols
    std::vector<double> y;

    std::span<const double> row(int i) const {
        return {x.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
    }
};

Dataset to_dataset(const Design& design);
std::span<const double> as_span(const CovariateRow& row);

double forward(const NetworkSpec& spec, std::span<const double> weights,
               std::span<const double> input);
double forward(const NetworkSpec& spec, std::span<const double> weights, const CovariateRow& input);

/// Residuals r_i = y_i - prediction_i.
Eigen::VectorXd residuals(const NetworkSpec& spec, std::span<const double> weights,
                          const Dataset& data);

double sse(const NetworkSpec& spec, std::span<const double> weights, const Dataset& data);

/// d r_i / d w_j for r = target - prediction; rows are samples.
Eigen::MatrixXd jacobian(const NetworkSpec& spec, std::span<const double> weights,
                         const Dataset& data);

struct TrainOptions {
    double mu0 = 1e-3;
    double mu_up = 10.0;
    double mu_down = 10.0;
    double mu_max = 1e10;
    int max_epochs = 200;
    double grad_tol = 1e-7;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class StopReason { MaxEpochs, GradientTolerance, DampingLimit };

const char* to_string(StopReason r);

struct TrainedNetwork {
    NetworkSpec spec;
    WeightVector weights;
    double final_sse = 0.0;
    int epochs_run = 0;
    double final_mu = 1e-3;
    StopReason stop = StopReason::MaxEpochs;
    /// SSE at start followed by SSE after every accepted step.
    std::vector<double> sse_history;

    bool converged() const { return stop != StopReason::MaxEpochs; }
};

/// Levenberg-Marquardt on the sum of squared residuals. Each epoch forms J
/// and solves (J'J + mu I) delta = J'r by Cholesky; the step w - delta is
/// kept only if it lowers the SSE (then mu /= mu_down), otherwise mu *= mu_up
/// and the solve is retried. Stops on max_epochs, ||J'r||_inf < grad_tol, or
/// mu > mu_max.
TrainedNetwork lm_train(const NetworkSpec& spec, WeightVector weights0, const Dataset& data,
                        const TrainOptions& opts);

/// Continue training a network for `epochs` more epochs from its own state.
TrainedNetwork lm_resume(const TrainedNetwork& net, const Dataset& data, const TrainOptions& opts,
                         int epochs);

}  // namespace ibc
