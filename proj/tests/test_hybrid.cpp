// Copyright 2026 The qsfe Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <doctest.h>

#include <numbers>

#include "qsfe/hybrid.hpp"
#include "qsfe/rng.hpp"

using namespace qsfe;

namespace {

constexpr double kPi = std::numbers::pi;

HybridModeld make_model(Task task, bool clamp, std::uint64_t seed) {
    HybridModeld model;
    model.qnn.feature_map = FeatureMapSpec{3, 1, EntanglementPattern::full};
    model.qnn.ansatz = AnsatzSpec{3, 1, EntanglementPattern::full};
    model.qnn.weights = init_weights(model.qnn.ansatz, seed);
    model.qnn.observable = PauliZString::all(3);
    model.task = task;
    model.angle_clamp = clamp;
    Rng rng(mix_seed({seed, 0xABCDULL}));
    model.pre.weight.resize(3, 3);
    for (Eigen::Index c = 0; c < 3; ++c) {
        for (Eigen::Index r = 0; r < 3; ++r) {
            model.pre.weight(r, c) = rng.uniform(-0.6, 0.6);
        }
    }
    model.pre.bias = Eigen::VectorXd::Zero(3);
    model.pre.bias << 0.1, -0.2, 0.05;
    model.post.weight = Eigen::MatrixXd::Constant(1, 1, 0.8);
    model.post.bias = Eigen::VectorXd::Constant(1, 0.1);
    return model;
}

Eigen::MatrixXd random_batch(Rng& rng, Eigen::Index m) {
    Eigen::MatrixXd X(m, 3);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            X(r, c) = rng.uniform(0.0, kPi);
        }
    }
    return X;
}

// finite differences across the packed parameter vector
Eigen::VectorXd fd_param_grad(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& targets,
                              const HybridModeld& model, double h = 1e-5) {
    Eigen::VectorXd params = detail::pack_params(model);
    Eigen::VectorXd grad(params.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        HybridModeld probe = model;
        Eigen::VectorXd shifted = params;
        shifted[i] = params[i] + h;
        detail::unpack_params(shifted, probe);
        const double plus = hybrid_backward(X, targets, probe).loss;
        shifted[i] = params[i] - h;
        detail::unpack_params(shifted, probe);
        const double minus = hybrid_backward(X, targets, probe).loss;
        grad[i] = (plus - minus) / (2 * h);
    }
    return grad;
}

Eigen::VectorXd pack_grads(const HybridGradients<double>& grads,
                           const HybridModeld& model) {
    TrainConfig config; // nothing frozen
    return detail::pack_gradients(grads, model, config);
}

} // namespace

TEST_CASE("identity wrappers reduce the hybrid to the bare QNN") {
    HybridModeld model = make_model(Task::regression, false, 3);
    model.pre = AffineLayer<double>::identity(3);
    model.post.weight = Eigen::MatrixXd::Identity(1, 1);
    model.post.bias = Eigen::VectorXd::Zero(1);
    Rng rng(10);
    const Eigen::MatrixXd X = random_batch(rng, 5);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd x = X.row(i).transpose();
        CHECK(hybrid_forward(x, model) ==
              doctest::Approx(qnn_forward(x, model.qnn)).epsilon(1e-12));
    }
}

TEST_CASE("zero post weight yields a constant model") {
    HybridModeld model = make_model(Task::regression, true, 4);
    model.post.weight.setZero();
    model.post.bias[0] = -2.5;
    Rng rng(11);
    const Eigen::MatrixXd X = random_batch(rng, 4);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        CHECK(hybrid_forward(X.row(i).transpose(), model) ==
              doctest::Approx(-2.5).epsilon(1e-12));
    }
}

TEST_CASE("classification squashing") {
    HybridModeld model = make_model(Task::classification, true, 5);
    model.post.weight.setZero();
    model.post.bias.setZero();
    Rng rng(12);
    const Eigen::VectorXd x = random_batch(rng, 1).row(0).transpose();
    CHECK(hybrid_forward(x, model) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(hybrid_classify(x, model) == 1); // 0.5 threshold maps to 1
}

TEST_CASE("loss at the optimum has vanishing gradients") {
    HybridModeld model = make_model(Task::regression, true, 6);
    Rng rng(13);
    const Eigen::MatrixXd X = random_batch(rng, 4);
    Eigen::VectorXd targets(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        targets[i] = hybrid_forward(X.row(i).transpose(), model);
    }
    const auto grads = hybrid_backward(X, targets, model);
    CHECK(grads.loss <= 1e-20);
    CHECK(pack_grads(grads, model).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("bce at the midpoint is ln 2") {
    HybridModeld model = make_model(Task::classification, true, 7);
    model.post.weight.setZero();
    model.post.bias.setZero();
    Rng rng(14);
    const Eigen::MatrixXd X = random_batch(rng, 1);
    const Eigen::VectorXd targets = Eigen::VectorXd::Ones(1);
    const auto grads = hybrid_backward(X, targets, model);
    CHECK(grads.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences end to end") {
    Rng rng(15);
    SUBCASE("regression with the angle clamp") {
        const HybridModeld model = make_model(Task::regression, true, 16);
        const Eigen::MatrixXd X = random_batch(rng, 3);
        Eigen::VectorXd targets(3);
        targets << 0.2, -0.4, 0.7;
        const auto analytic = pack_grads(hybrid_backward(X, targets, model), model);
        const auto numeric = fd_param_grad(X, targets, model);
        CHECK((analytic - numeric).cwiseAbs().maxCoeff() <= 1e-5);
    }
    SUBCASE("classification") {
        const HybridModeld model = make_model(Task::classification, true, 17);
        const Eigen::MatrixXd X = random_batch(rng, 3);
        Eigen::VectorXd targets(3);
        targets << 1, 0, 1;
        const auto analytic = pack_grads(hybrid_backward(X, targets, model), model);
        const auto numeric = fd_param_grad(X, targets, model);
        CHECK((analytic - numeric).cwiseAbs().maxCoeff() <= 1e-5);
    }
    SUBCASE("pure mode without the clamp") {
        HybridModeld model = make_model(Task::regression, false, 18);
        model.pre = AffineLayer<double>::identity(3);
        const Eigen::MatrixXd X = random_batch(rng, 2);
        Eigen::VectorXd targets(2);
        targets << -0.1, 0.5;
        const auto analytic = pack_grads(hybrid_backward(X, targets, model), model);
        const auto numeric = fd_param_grad(X, targets, model);
        CHECK((analytic - numeric).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("single post-weight slope matches a manual finite difference") {
    const HybridModeld model = make_model(Task::regression, true, 19);
    Rng rng(20);
    const Eigen::MatrixXd X = random_batch(rng, 1);
    Eigen::VectorXd targets(1);
    targets << 0.3;
    const double h = 1e-6;
    HybridModeld plus = model, minus = model;
    plus.post.weight(0, 0) += h;
    minus.post.weight(0, 0) -= h;
    const double slope = (hybrid_backward(X, targets, plus).loss -
                          hybrid_backward(X, targets, minus).loss) /
                         (2 * h);
    const auto grads = hybrid_backward(X, targets, model);
    CHECK(grads.post_weight == doctest::Approx(slope).epsilon(1e-5));
}

TEST_CASE("backward input validation") {
    const HybridModeld model = make_model(Task::regression, true, 21);
    CHECK_THROWS_AS(
        hybrid_backward(Eigen::MatrixXd(0, 3), Eigen::VectorXd(0), model),
        ConfigError);
    CHECK_THROWS_AS(
        hybrid_backward(Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(3),
                        model),
        ShapeError);
}

TEST_CASE("target scaler roundtrip") {
    Eigen::VectorXd t(4);
    t << 3.0, 19.5, -6.0, 11.25;
    const auto scaler = TargetScaler<double>::fit(t);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double scaled = scaler.scale(t[i]);
        CHECK(scaled >= -1.0);
        CHECK(scaled <= 1.0);
        CHECK(scaler.unscale(scaled) == doctest::Approx(t[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(TargetScaler<double>::fit(Eigen::VectorXd::Constant(3, 2.0)),
                    ConfigError);
}

TEST_CASE("seeded toy regression reaches near-zero loss") {
    // four points, targets a linear function of the features scaled to [-1, 1]
    Eigen::MatrixXd X(4, 3);
    X << 0.31, 1.22, 2.11, //
        2.74, 0.45, 0.98,  //
        1.55, 2.85, 0.20,  //
        0.90, 1.78, 2.95;
    Eigen::VectorXd raw = X * Eigen::Vector3d(0.5, -0.3, 0.2);
    const auto scaler = TargetScaler<double>::fit(raw);
    Eigen::VectorXd targets(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        targets[i] = scaler.scale(raw[i]);
    }

    HybridModeld model = make_model(Task::regression, true, 90);
    TrainConfig config;
    config.epochs = 2000;
    config.learning_rate = 0.05;
    config.seed = 90;
    const auto history = train_hybrid(X, targets, model, config);
    REQUIRE(!history.empty());
    double best = history.front();
    for (const double loss : history) {
        best = std::min(best, loss);
    }
    CHECK(history.back() < 1e-3);
    CHECK(best < 1e-3);
}

TEST_CASE("frozen model keeps a flat loss history") {
    Rng rng(22);
    const Eigen::MatrixXd X = random_batch(rng, 4);
    Eigen::VectorXd targets(4);
    targets << 0.1, -0.1, 0.2, 0.0;
    HybridModeld model = make_model(Task::regression, true, 23);
    TrainConfig config;
    config.epochs = 25;
    config.freeze_pre = true;
    config.freeze_qnn = true;
    config.freeze_post = true;
    const auto history = train_hybrid(X, targets, model, config);
    for (const double loss : history) {
        CHECK(loss == history.front());
    }
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
    Rng rng(24);
    const Eigen::MatrixXd X = random_batch(rng, 5);
    Eigen::VectorXd targets(5);
    targets << 0.3, -0.2, 0.5, 0.0, -0.6;
    TrainConfig config;
    config.epochs = 40;

    HybridModeld a = make_model(Task::regression, true, 25);
    HybridModeld b = make_model(Task::regression, true, 25);
    const auto history_a = train_hybrid(X, targets, a, config);
    const auto history_b = train_hybrid(X, targets, b, config);
    CHECK(history_a == history_b);
    CHECK(detail::pack_params(a) == detail::pack_params(b));
}

TEST_CASE("non-finite loss aborts with the failing epoch") {
    Eigen::MatrixXd X(2, 3);
    X << 0.1, 0.2, 0.3, //
        std::numeric_limits<double>::quiet_NaN(), 0.5, 0.6;
    Eigen::VectorXd targets(2);
    targets << 0.0, 0.1;
    HybridModeld model = make_model(Task::regression, true, 26);
    TrainConfig config;
    config.epochs = 5;
    CHECK_THROWS_WITH_AS(train_hybrid(X, targets, model, config),
                         doctest::Contains("epoch 1"), TrainingError);
}

TEST_CASE("sgd optimizer also trains") {
    Eigen::MatrixXd X(3, 3);
    X << 0.2, 1.0, 2.0, //
        2.5, 0.3, 1.0,  //
        1.2, 2.2, 0.4;
    Eigen::VectorXd targets(3);
    targets << 0.4, -0.3, 0.1;
    HybridModeld model = make_model(Task::regression, true, 27);
    TrainConfig config;
    config.optimizer = TrainConfig::Optimizer::sgd;
    config.learning_rate = 0.1;
    config.epochs = 200;
    const auto history = train_hybrid(X, targets, model, config);
    CHECK(history.back() < history.front());
}
