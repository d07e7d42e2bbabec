#include "ibcforecast/neuralnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ibcforecast/error.hpp"
#include "ibcforecast/rng.hpp"

namespace ibc {

const char* to_string(Activation a) {
    return a == Activation::Tanh ? "tanh" : "logistic";
}

Activation parse_activation(std::string_view text) {
    if (text == "tanh") return Activation::Tanh;
    if (text == "logistic" || text == "logsig" || text == "sigmoid") return Activation::Logistic;
    throw Error(ErrorCode::InvalidArgument, "unknown activation '" + std::string(text) + "'");
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::MaxEpochs: return "max_epochs";
        case StopReason::GradientTolerance: return "gradient_tolerance";
        case StopReason::DampingLimit: return "damping_limit";
    }
    return "max_epochs";
}

int NetworkSpec::weight_count() const {
    int total = 0;
    for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
        total += (layer_sizes[l - 1] + 1) * layer_sizes[l];
    }
    return total;
}

void NetworkSpec::validate() const {
    if (layer_sizes.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "network needs at least input and output layers");
    }
    if (layer_sizes.front() != kCovariateCount) {
        throw Error(ErrorCode::InvalidArgument,
                    "network input width must be " + std::to_string(kCovariateCount));
    }
    if (layer_sizes.back() != 1) {
        throw Error(ErrorCode::InvalidArgument, "network output width must be 1");
    }
    if (hidden_layers() > 2) {
        throw Error(ErrorCode::InvalidArgument, "at most two hidden layers are supported");
    }
    for (int size : layer_sizes) {
        if (size < 1) throw Error(ErrorCode::InvalidArgument, "layer sizes must be >= 1");
    }
}

std::string NetworkSpec::str() const {
    if (hidden_layers() == 0) return "linear";
    std::string out;
    for (int l = 1; l + 1 < static_cast<int>(layer_sizes.size()); ++l) {
        if (!out.empty()) out += '-';
        out += std::to_string(layer_sizes[l]);
    }
    out += ':';
    out += to_string(hidden_activation);
    return out;
}

NetworkSpec NetworkSpec::parse(std::string_view text) {
    NetworkSpec spec;
    if (text == "linear") {
        spec.layer_sizes = {kCovariateCount, 1};
        return spec;
    }
    const auto colon = text.find(':');
    std::string_view sizes = text.substr(0, colon);
    if (colon != std::string_view::npos) spec.hidden_activation = parse_activation(text.substr(colon + 1));

    spec.layer_sizes = {kCovariateCount};
    std::size_t pos = 0;
    while (pos <= sizes.size()) {
        auto dash = sizes.find('-', pos);
        if (dash == std::string_view::npos) dash = sizes.size();
        const auto part = sizes.substr(pos, dash - pos);
        int n = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), n);
        if (ec != std::errc{} || ptr != part.data() + part.size() || n < 1) {
            throw Error(ErrorCode::InvalidArgument, "bad network spec '" + std::string(text) + "'");
        }
        spec.layer_sizes.push_back(n);
        pos = dash + 1;
    }
    spec.layer_sizes.push_back(1);
    spec.validate();
    return spec;
}

WeightVector init_weights(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    WeightVector w;
    w.reserve(static_cast<std::size_t>(spec.weight_count()));
    for (std::size_t l = 1; l < spec.layer_sizes.size(); ++l) {
        const int fan_in = spec.layer_sizes[l - 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (int j = 0; j < spec.layer_sizes[l]; ++j) {
            for (int i = 0; i <= fan_in; ++i) w.push_back(rng.uniform(-bound, bound));
        }
    }
    return w;
}

Dataset to_dataset(const Design& design) {
    if (design.inputs.size() != design.targets.size()) {
        throw Error(ErrorCode::LengthMismatch, "design inputs and targets differ in length");
    }
    Dataset d;
    d.rows = static_cast<int>(design.inputs.size());
    d.cols = kCovariateCount;
    d.x.reserve(design.inputs.size() * kCovariateCount);
    for (const auto& r : design.inputs) {
        d.x.insert(d.x.end(), {r.year, r.month_sin, r.month_cos, r.class_value});
    }
    d.y = design.targets;
    return d;
}

std::span<const double> as_span(const CovariateRow& row) {
    static_assert(sizeof(CovariateRow) == kCovariateCount * sizeof(double));
    return {&row.year, static_cast<std::size_t>(kCovariateCount)};
}

namespace {

inline double activate(Activation a, double z) {
    return a == Activation::Tanh ? std::tanh(z) : 1.0 / (1.0 + std::exp(-z));
}

// Derivative expressed through the activation value.
inline double activate_slope(Activation a, double y) {
    return a == Activation::Tanh ? 1.0 - y * y : y * (1.0 - y);
}

// Forward/backward pass state for one network, reused across samples.
class Evaluator {
public:
    Evaluator(const NetworkSpec& spec, std::span<const double> weights)
        : spec_(spec), w_(weights) {
        spec_.validate();
        if (static_cast<int>(w_.size()) != spec_.weight_count()) {
            throw Error(ErrorCode::LengthMismatch,
                        "weight vector has " + std::to_string(w_.size()) + " entries, spec " +
                            spec_.str() + " needs " + std::to_string(spec_.weight_count()));
        }
        const auto layers = spec_.layer_sizes.size();
        act_.resize(layers);
        delta_.resize(layers);
        offset_.resize(layers, 0);
        for (std::size_t l = 0; l < layers; ++l) {
            act_[l].assign(static_cast<std::size_t>(spec_.layer_sizes[l]), 0.0);
            delta_[l].assign(static_cast<std::size_t>(spec_.layer_sizes[l]), 0.0);
            if (l > 0) {
                offset_[l] = (l > 1 ? offset_[l - 1] : 0) +
                             (l > 1 ? (spec_.layer_sizes[l - 2] + 1) * spec_.layer_sizes[l - 1] : 0);
            }
        }
    }

    double run(std::span<const double> input) {
        if (static_cast<int>(input.size()) != spec_.input_width()) {
            throw Error(ErrorCode::LengthMismatch,
                        "input has " + std::to_string(input.size()) + " features, network expects " +
                            std::to_string(spec_.input_width()));
        }
        std::copy(input.begin(), input.end(), act_[0].begin());
        const std::size_t last = act_.size() - 1;
        for (std::size_t l = 1; l <= last; ++l) {
            const int fan_in = spec_.layer_sizes[l - 1];
            const double* wp = w_.data() + offset_[l];
            const auto& prev = act_[l - 1];
            for (auto& out : act_[l]) {
                double z = 0.0;
                for (int i = 0; i < fan_in; ++i) z += wp[i] * prev[static_cast<std::size_t>(i)];
                z += wp[fan_in];
                wp += fan_in + 1;
                out = l == last ? z : activate(spec_.hidden_activation, z);
            }
        }
        return act_[last][0];
    }

    // d prediction / d w for the sample most recently passed to run().
    void gradient(double* out) {
        const std::size_t last = act_.size() - 1;
        delta_[last][0] = 1.0;
        for (std::size_t l = last; l >= 1; --l) {
            const int fan_in = spec_.layer_sizes[l - 1];
            const double* wp = w_.data() + offset_[l];
            double* gp = out + offset_[l];
            const auto& prev = act_[l - 1];
            if (l > 1) std::fill(delta_[l - 1].begin(), delta_[l - 1].end(), 0.0);
            for (std::size_t j = 0; j < act_[l].size(); ++j) {
                const double d = delta_[l][j];
                for (int i = 0; i < fan_in; ++i) {
                    gp[i] = d * prev[static_cast<std::size_t>(i)];
                    if (l > 1) delta_[l - 1][static_cast<std::size_t>(i)] += wp[i] * d;
                }
                gp[fan_in] = d;
                wp += fan_in + 1;
                gp += fan_in + 1;
            }
            if (l > 1) {
                for (std::size_t i = 0; i < delta_[l - 1].size(); ++i) {
                    delta_[l - 1][i] *= activate_slope(spec_.hidden_activation, act_[l - 1][i]);
                }
            }
        }
    }

private:
    const NetworkSpec& spec_;
    std::span<const double> w_;
    std::vector<std::vector<double>> act_;
    std::vector<std::vector<double>> delta_;
    std::vector<int> offset_;
};

}  // namespace

double forward(const NetworkSpec& spec, std::span<const double> weights,
               std::span<const double> input) {
    Evaluator ev(spec, weights);
    return ev.run(input);
}

double forward(const NetworkSpec& spec, std::span<const double> weights, const CovariateRow& input) {
    return forward(spec, weights, as_span(input));
}

Eigen::VectorXd residuals(const NetworkSpec& spec, std::span<const double> weights,
                          const Dataset& data) {
    Evaluator ev(spec, weights);
    Eigen::VectorXd r(data.rows);
    for (int i = 0; i < data.rows; ++i) r[i] = data.y[static_cast<std::size_t>(i)] - ev.run(data.row(i));
    return r;
}

double sse(const NetworkSpec& spec, std::span<const double> weights, const Dataset& data) {
    return residuals(spec, weights, data).squaredNorm();
}

Eigen::MatrixXd jacobian(const NetworkSpec& spec, std::span<const double> weights,
                         const Dataset& data) {
    Evaluator ev(spec, weights);
    const int p = spec.weight_count();
    // Row-major scratch so each sample's gradient is written contiguously.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> jac(data.rows, p);
    for (int i = 0; i < data.rows; ++i) {
        ev.run(data.row(i));
        ev.gradient(jac.row(i).data());
    }
    return -jac;
}

void TrainOptions::validate() const {
    if (!(mu0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu0 must be positive");
    if (!(mu_up > 1.0) || !(mu_down > 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "mu_up and mu_down must exceed 1");
    }
    if (!(mu_max > mu0)) throw Error(ErrorCode::InvalidArgument, "mu_max must exceed mu0");
    if (max_epochs < 0) throw Error(ErrorCode::InvalidArgument, "max_epochs must be >= 0");
}

namespace {

// Smallest damping used after repeated successful steps; keeps J'J + mu I
// numerically positive definite.
constexpr double kMuFloor = 1e-20;

TrainedNetwork run_lm(TrainedNetwork net, const Dataset& data, const TrainOptions& opts,
                      double mu, int epochs) {
    if (data.rows < 1) throw Error(ErrorCode::InvalidArgument, "training data is empty");
    const int p = net.spec.weight_count();
    WeightVector trial(net.weights.size());
    double current = sse(net.spec, net.weights, data);
    if (!std::isfinite(current)) {
        throw Error(ErrorCode::NumericalFailure, "initial SSE is not finite");
    }
    if (net.sse_history.empty()) net.sse_history.push_back(current);
    net.stop = StopReason::MaxEpochs;

    Eigen::MatrixXd normal(p, p);
    Eigen::LLT<Eigen::MatrixXd> chol;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const Eigen::MatrixXd jac = jacobian(net.spec, net.weights, data);
        const Eigen::VectorXd r = residuals(net.spec, net.weights, data);
        const Eigen::VectorXd grad = jac.transpose() * r;
        ++net.epochs_run;
        if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            net.stop = StopReason::GradientTolerance;
            break;
        }
        normal.setZero();
        normal.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());

        bool accepted = false;
        bool factored_once = false;
        while (!accepted) {
            Eigen::MatrixXd damped = normal;
            damped.diagonal().array() += mu;
            chol.compute(damped);
            if (chol.info() == Eigen::Success) {
                factored_once = true;
                const Eigen::VectorXd step = chol.solve(grad);
                for (int j = 0; j < p; ++j) {
                    trial[static_cast<std::size_t>(j)] = net.weights[static_cast<std::size_t>(j)] - step[j];
                }
                const double candidate = sse(net.spec, trial, data);
                if (candidate < current) {
                    net.weights.swap(trial);
                    current = candidate;
                    net.sse_history.push_back(current);
                    mu = std::max(mu / opts.mu_down, kMuFloor);
                    accepted = true;
                    break;
                }
            }
            mu *= opts.mu_up;
            if (mu > opts.mu_max) break;
        }
        if (!accepted) {
            if (!factored_once) {
                throw Error(ErrorCode::NumericalFailure,
                            "normal equations singular up to the damping limit");
            }
            net.stop = StopReason::DampingLimit;
            break;
        }
    }
    net.final_sse = current;
    net.final_mu = mu;
    return net;
}

}  // namespace

TrainedNetwork lm_train(const NetworkSpec& spec, WeightVector weights0, const Dataset& data,
                        const TrainOptions& opts) {
    opts.validate();
    spec.validate();
    if (static_cast<int>(weights0.size()) != spec.weight_count()) {
        throw Error(ErrorCode::LengthMismatch, "initial weights do not match spec " + spec.str());
    }
    if (data.cols != spec.input_width()) {
        throw Error(ErrorCode::LengthMismatch, "data width does not match network input width");
    }
    TrainedNetwork net;
    net.spec = spec;
    net.weights = std::move(weights0);
    return run_lm(std::move(net), data, opts, opts.mu0, opts.max_epochs);
}

TrainedNetwork lm_resume(const TrainedNetwork& net, const Dataset& data, const TrainOptions& opts,
                         int epochs) {
    opts.validate();
    if (net.converged()) return net;
    return run_lm(net, data, opts, std::clamp(net.final_mu, kMuFloor, opts.mu_max), epochs);
}

}  // namespace ibc
