#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "ibcforecast/error.hpp"
#include "ibcforecast/neuralnet.hpp"
#include "ibcforecast/rng.hpp"

using namespace ibc;

namespace {

Dataset random_dataset(int rows, std::uint64_t seed, double (*target)(const double*)) {
    Rng rng(seed);
    Dataset d;
    d.rows = rows;
    d.cols = kCovariateCount;
    for (int i = 0; i < rows; ++i) {
        double x[kCovariateCount];
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        d.x.insert(d.x.end(), x, x + kCovariateCount);
        d.y.push_back(target(x));
    }
    return d;
}

double linear_target(const double* x) { return 2.0 * x[0] - 0.5 * x[1] + 0.25 * x[2] + x[3] + 1.0; }

double smooth_target(const double* x) {
    return 0.6 * std::sin(2.0 * x[0] + x[1]) + 0.3 * x[2] * x[3] - 0.2 * x[3];
}

// Central differences of the residual vector with respect to each weight.
Eigen::MatrixXd fd_jacobian(const NetworkSpec& spec, WeightVector w, const Dataset& data, double h) {
    Eigen::MatrixXd out(data.rows, static_cast<Eigen::Index>(w.size()));
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double keep = w[j];
        w[j] = keep + h;
        const Eigen::VectorXd up = residuals(spec, w, data);
        w[j] = keep - h;
        const Eigen::VectorXd down = residuals(spec, w, data);
        w[j] = keep;
        out.col(static_cast<Eigen::Index>(j)) = (up - down) / (2.0 * h);
    }
    return out;
}

NetworkSpec random_spec(Rng& rng) {
    NetworkSpec spec;
    spec.hidden_activation = rng.below(2) ? Activation::Tanh : Activation::Logistic;
    spec.layer_sizes = {kCovariateCount};
    const int hidden = 1 + static_cast<int>(rng.below(2));
    for (int l = 0; l < hidden; ++l) spec.layer_sizes.push_back(1 + static_cast<int>(rng.below(10)));
    spec.layer_sizes.push_back(1);
    return spec;
}

}  // namespace

TEST_CASE("weight counts") {
    CHECK(NetworkSpec::parse("8:tanh").weight_count() == 49);
    CHECK(NetworkSpec::parse("8-8:tanh").weight_count() == 121);
    CHECK(NetworkSpec::parse("linear").weight_count() == 5);
    CHECK(init_weights(NetworkSpec::parse("8:tanh"), 1).size() == 49);
}

TEST_CASE("spec strings round trip") {
    for (const char* s : {"8:tanh", "12:logistic", "8-4:tanh", "linear"}) {
        CHECK(NetworkSpec::parse(s).str() == s);
    }
    CHECK_THROWS_AS(NetworkSpec::parse("8:relu"), Error);
    CHECK_THROWS_AS(NetworkSpec::parse("0:tanh"), Error);
    CHECK_THROWS_AS(NetworkSpec::parse("4-4-4:tanh"), Error);
}

TEST_CASE("initial weights are seeded and fan-in bounded") {
    const auto spec = NetworkSpec::parse("8-3:logistic");
    const auto a = init_weights(spec, 77);
    CHECK(a == init_weights(spec, 77));
    CHECK(a != init_weights(spec, 78));
    // layer 1: 8 neurons x 5 weights, fan_in 4; layer 2: 3 x 9, fan_in 8; output 4, fan_in 3
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double fan_in = i < 40 ? 4.0 : (i < 67 ? 8.0 : 3.0);
        CHECK(std::abs(a[i]) <= 1.0 / std::sqrt(fan_in));
    }
}

TEST_CASE("forward pass") {
    const auto spec = NetworkSpec::parse("8:tanh");
    const std::vector<double> zeros(49, 0.0);
    const double x[4] = {0.3, -0.2, 0.9, 1.2};
    CHECK(forward(spec, zeros, x) == 0.0);

    // one hidden tanh neuron: out = v * tanh(w.x + b) + c
    const auto tiny = NetworkSpec::parse("1:tanh");
    const std::vector<double> w{0.1, -0.2, 0.3, 0.4, 0.05, 2.0, -0.5};
    const double pre = 0.1 * 0.3 + -0.2 * -0.2 + 0.3 * 0.9 + 0.4 * 1.2 + 0.05;
    CHECK(forward(tiny, w, x) == doctest::Approx(2.0 * std::tanh(pre) - 0.5).epsilon(1e-15));

    const auto logistic = NetworkSpec::parse("1:logistic");
    CHECK(forward(logistic, w, x) == doctest::Approx(2.0 / (1.0 + std::exp(-pre)) - 0.5).epsilon(1e-15));

    // extrapolated class value stays finite
    const auto wr = init_weights(spec, 3);
    CovariateRow row{0.9, 0.0, 1.0, 1.2};
    CHECK(std::isfinite(forward(spec, wr, row)));

    const double bad[3] = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(forward(spec, wr, std::span<const double>(bad, 3)), Error);
}

TEST_CASE("analytic jacobian matches central differences") {
    Rng rng(2025);
    const auto data = random_dataset(25, 9, smooth_target);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = random_spec(rng);
        const auto w = init_weights(spec, rng.next());
        const Eigen::MatrixXd J = jacobian(spec, w, data);
        const Eigen::MatrixXd F = fd_jacobian(spec, w, data, 1e-6);
        REQUIRE(J.cols() == spec.weight_count());
        const double rel = (J - F).norm() / F.norm();
        CHECK(rel <= 1e-5);
    }
}

TEST_CASE("jacobian of a zero-weight tanh network") {
    const auto spec = NetworkSpec::parse("3:tanh");
    const std::vector<double> zeros(static_cast<std::size_t>(spec.weight_count()), 0.0);
    const auto data = random_dataset(6, 1, smooth_target);
    const Eigen::MatrixXd J = jacobian(spec, zeros, data);
    // output neuron: 3 weights then its bias, at the end of the layout
    const int out0 = 3 * 5;
    for (int i = 0; i < data.rows; ++i) {
        for (int k = 0; k < 3; ++k) CHECK(J(i, out0 + k) == 0.0);
        CHECK(J(i, out0 + 3) == -1.0);
    }
}

TEST_CASE("linear jacobian does not depend on the weights") {
    const auto spec = NetworkSpec::parse("linear");
    const auto data = random_dataset(10, 2, linear_target);
    const Eigen::MatrixXd a = jacobian(spec, init_weights(spec, 1), data);
    const Eigen::MatrixXd b = jacobian(spec, init_weights(spec, 2), data);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("J'r is half the SSE gradient") {
    Rng rng(8);
    const auto data = random_dataset(30, 4, smooth_target);
    for (int trial = 0; trial < 5; ++trial) {
        const auto spec = random_spec(rng);
        auto w = init_weights(spec, rng.next());
        const Eigen::VectorXd jtr = jacobian(spec, w, data).transpose() * residuals(spec, w, data);
        Eigen::VectorXd grad(jtr.size());
        const double h = 1e-6;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double keep = w[j];
            w[j] = keep + h;
            const double up = sse(spec, w, data);
            w[j] = keep - h;
            const double down = sse(spec, w, data);
            w[j] = keep;
            grad[static_cast<Eigen::Index>(j)] = (up - down) / (2.0 * h);
        }
        CHECK((jtr - 0.5 * grad).norm() / grad.norm() <= 1e-5);

        // heavily damped step points along J'r
        const Eigen::MatrixXd J = jacobian(spec, w, data);
        Eigen::MatrixXd A = J.transpose() * J;
        A.diagonal().array() += 1e8;
        const Eigen::VectorXd step = A.llt().solve(jtr);
        CHECK(step.dot(jtr) / (step.norm() * jtr.norm()) > 0.999);
    }
}

TEST_CASE("LM solves a linear model in a few epochs") {
    const auto spec = NetworkSpec::parse("linear");
    const auto data = random_dataset(40, 12, linear_target);
    TrainOptions opts;
    opts.max_epochs = 5;
    const auto net = lm_train(spec, init_weights(spec, 5), data, opts);
    CHECK(net.final_sse < 1e-10);
    CHECK(net.epochs_run <= 5);

    // closed-form least squares via QR
    Eigen::MatrixXd X(data.rows, 5);
    Eigen::VectorXd y(data.rows);
    for (int i = 0; i < data.rows; ++i) {
        for (int j = 0; j < 4; ++j) X(i, j) = data.row(i)[static_cast<std::size_t>(j)];
        X(i, 4) = 1.0;
        y[i] = data.y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    for (int j = 0; j < 5; ++j) CHECK(net.weights[static_cast<std::size_t>(j)] == doctest::Approx(beta[j]).epsilon(1e-6));
}

TEST_CASE("accepted steps strictly lower the SSE") {
    Rng rng(41);
    const auto data = random_dataset(60, 13, smooth_target);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = random_spec(rng);
        TrainOptions opts;
        opts.max_epochs = 60;
        const auto net = lm_train(spec, init_weights(spec, rng.next()), data, opts);
        REQUIRE(net.sse_history.size() >= 2);
        for (std::size_t i = 1; i < net.sse_history.size(); ++i) {
            CHECK(net.sse_history[i] < net.sse_history[i - 1]);
        }
        CHECK(net.final_sse == net.sse_history.back());
        CHECK(net.final_sse == doctest::Approx(sse(spec, net.weights, data)).epsilon(1e-9));
    }
}

TEST_CASE("zero epochs returns the initial weights") {
    const auto spec = NetworkSpec::parse("4:tanh");
    const auto data = random_dataset(20, 1, smooth_target);
    const auto w0 = init_weights(spec, 9);
    TrainOptions opts;
    opts.max_epochs = 0;
    const auto net = lm_train(spec, w0, data, opts);
    CHECK(net.weights == w0);
    CHECK(net.final_sse == sse(spec, w0, data));
    CHECK(net.epochs_run == 0);
}

TEST_CASE("4-8-1 tanh fits a smooth seasonal function") {
    Dataset d;
    d.rows = 200;
    d.cols = kCovariateCount;
    for (int i = 0; i < d.rows; ++i) {
        const int month = i % 12 + 1;
        const double year = -1.0 + 2.0 * i / (d.rows - 1.0);
        const double s = std::sin(2.0 * M_PI * month / 12.0), c = std::cos(2.0 * M_PI * month / 12.0);
        const double cls = (i / 17) % 3 * 0.5;
        d.x.insert(d.x.end(), {year, s, c, cls});
        d.y.push_back(0.4 * s + 0.2 * c + 0.3 * year + 0.3 * cls - 0.2);
    }
    const auto spec = NetworkSpec::parse("8:tanh");
    TrainOptions opts;
    opts.max_epochs = 300;
    const auto net = lm_train(spec, init_weights(spec, 21), d, opts);
    CHECK(std::sqrt(net.final_sse / d.rows) < 0.05);
}

TEST_CASE("training is deterministic") {
    const auto spec = NetworkSpec::parse("6:logistic");
    const auto data = random_dataset(50, 3, smooth_target);
    TrainOptions opts;
    opts.max_epochs = 40;
    const auto a = lm_train(spec, init_weights(spec, 4), data, opts);
    const auto b = lm_train(spec, init_weights(spec, 4), data, opts);
    CHECK(a.weights == b.weights);
    CHECK(a.sse_history == b.sse_history);
}

TEST_CASE("resume continues from the saved state") {
    const auto spec = NetworkSpec::parse("5:tanh");
    const auto data = random_dataset(50, 6, smooth_target);
    TrainOptions opts;
    opts.max_epochs = 30;
    const auto whole = lm_train(spec, init_weights(spec, 2), data, opts);
    opts.max_epochs = 10;
    auto part = lm_train(spec, init_weights(spec, 2), data, opts);
    part = lm_resume(part, data, opts, 20);
    CHECK(part.weights == whole.weights);
    CHECK(part.epochs_run == whole.epochs_run);
}

TEST_CASE("option validation") {
    TrainOptions o;
    o.mu0 = 0.0;
    CHECK_THROWS_AS(o.validate(), Error);
    o = {};
    o.mu_up = 1.0;
    CHECK_THROWS_AS(o.validate(), Error);
    o = {};
    o.mu_max = 1e-4;
    CHECK_THROWS_AS(o.validate(), Error);
}
