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
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/errors.hpp"
#include "qsfe/kernel.hpp"

namespace qsfe {

template <typename Scalar = double>
struct SvmOptions {
    Scalar C = 1;
    Scalar epsilon = Scalar(0.1); // SVR tube half-width; ignored by SVC
    Scalar tol = Scalar(1e-3);
    // Cap on two-variable SMO updates; 0 = 10 * (number of dual variables).
    Eigen::Index max_passes = 0;
    // Test hook, called with the dual vector after every update.
    std::function<void(const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>&)>
        iteration_observer;
};

/// Trained C-SVC on a precomputed kernel. dual_coefs[i] = alpha_i * y_i.
template <typename Scalar = double>
struct SvcModel {
    Eigen::Vector<Scalar, Eigen::Dynamic> dual_coefs;
    Scalar bias = 0;
    std::vector<Eigen::Index> support_indices;
    Scalar C = 1;
    Scalar dual_objective = 0;
    Scalar kkt_gap = 0;
    Eigen::Index iterations = 0;
    bool converged = false;
};

/// Trained epsilon-SVR on a precomputed kernel.
/// dual_coefs[i] = alpha_i - alpha*_i in [-C, C].
template <typename Scalar = double>
struct SvrModel {
    Eigen::Vector<Scalar, Eigen::Dynamic> dual_coefs;
    Scalar bias = 0;
    std::vector<Eigen::Index> support_indices;
    Scalar C = 1;
    Scalar epsilon = 0;
    Scalar dual_objective = 0;
    Scalar kkt_gap = 0;
    Eigen::Index iterations = 0;
    bool converged = false;
};

template <typename Scalar>
struct SvcPrediction {
    Eigen::Vector<Scalar, Eigen::Dynamic> decision_values;
    Eigen::VectorXi labels; // in {-1, +1}; exact zero maps to +1
};

namespace detail {

template <typename Derived>
void check_training_kernel(const Eigen::MatrixBase<Derived>& K) {
    using Scalar = typename Derived::Scalar;
    if (K.rows() != K.cols() || K.rows() == 0) {
        throw ShapeError("svm: training kernel must be square and non-empty");
    }
    const Scalar asym =
        (K.derived() - K.derived().transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-8)) {
        throw NumericError("svm: kernel asymmetry " + std::to_string(asym));
    }
    const Scalar lambda_min = min_eigenvalue(K);
    if (lambda_min < Scalar(-1e-6)) {
        throw NumericError("svm: kernel not PSD, min eigenvalue " +
                           std::to_string(lambda_min));
    }
}

template <typename Scalar>
struct SmoResult {
    Eigen::Vector<Scalar, Eigen::Dynamic> alpha;
    Scalar rho = 0; // decision value offset; bias b = -rho
    Scalar gap = 0; // final max KKT violation m(alpha) - M(alpha)
    Eigen::Index iterations = 0;
    bool converged = false;
};

// Two-variable SMO with maximal-violating-pair selection for
//   min 0.5 a^T Q a + p^T a   s.t.  y^T a = 0,  0 <= a_i <= C,
// where y_i is +-1. Ties in the pair selection go to the lowest index, so
// the solve is deterministic. Box and equality feasibility hold after every
// update.
template <typename Scalar>
SmoResult<Scalar>
smo_solve(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q,
          const Eigen::Vector<Scalar, Eigen::Dynamic>& p,
          const std::vector<int>& y, Scalar C, Scalar tol,
          Eigen::Index max_iterations, const SvmOptions<Scalar>& opts) {
    constexpr Scalar kTau = Scalar(1e-12);
    const Eigen::Index n = p.size();
    using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

    SmoResult<Scalar> result;
    result.alpha = Vector::Zero(n);
    Vector& alpha = result.alpha;
    Vector grad = p; // Q * 0 + p

    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    Eigen::Index iter = 0;
    Scalar gap = inf;
    for (; iter < max_iterations; ++iter) {
        // i maximizes -y_i grad_i over variables that can move up,
        // j minimizes it over variables that can move down.
        Eigen::Index i = -1, j = -1;
        Scalar up_max = -inf, low_min = inf;
        for (Eigen::Index t = 0; t < n; ++t) {
            const Scalar v = -Scalar(y[t]) * grad[t];
            const bool can_up =
                (y[t] > 0) ? (alpha[t] < C) : (alpha[t] > Scalar(0));
            const bool can_down =
                (y[t] > 0) ? (alpha[t] > Scalar(0)) : (alpha[t] < C);
            if (can_up && v > up_max) {
                up_max = v;
                i = t;
            }
            if (can_down && v < low_min) {
                low_min = v;
                j = t;
            }
        }
        gap = (i >= 0 && j >= 0) ? up_max - low_min : Scalar(0);
        if (i < 0 || j < 0 || gap <= tol) {
            result.converged = true;
            break;
        }

        const Scalar old_ai = alpha[i];
        const Scalar old_aj = alpha[j];
        if (y[i] != y[j]) {
            Scalar quad = Q(i, i) + Q(j, j) + 2 * Q(i, j);
            if (quad <= Scalar(0)) {
                quad = kTau;
            }
            const Scalar delta = (-grad[i] - grad[j]) / quad;
            const Scalar diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > Scalar(0)) {
                if (alpha[j] < Scalar(0)) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < Scalar(0)) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
            }
            if (diff > Scalar(0)) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = C + diff;
                }
            }
        } else {
            Scalar quad = Q(i, i) + Q(j, j) - 2 * Q(i, j);
            if (quad <= Scalar(0)) {
                quad = kTau;
            }
            const Scalar delta = (grad[i] - grad[j]) / quad;
            const Scalar sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else {
                if (alpha[j] < Scalar(0)) {
                    alpha[j] = 0;
                    alpha[i] = sum;
                }
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else {
                if (alpha[i] < Scalar(0)) {
                    alpha[i] = 0;
                    alpha[j] = sum;
                }
            }
        }

        const Scalar di = alpha[i] - old_ai;
        const Scalar dj = alpha[j] - old_aj;
        grad.noalias() += Q.col(i) * di + Q.col(j) * dj;
        if (opts.iteration_observer) {
            opts.iteration_observer(alpha);
        }
    }
    result.iterations = iter;
    result.gap = gap;

    // rho from free variables when present, otherwise the midpoint of the
    // KKT-feasible interval.
    Scalar upper = inf, lower = -inf, free_sum = 0;
    Eigen::Index free_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const Scalar yg = Scalar(y[t]) * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) {
                upper = std::min(upper, yg);
            } else {
                lower = std::max(lower, yg);
            }
        } else if (alpha[t] <= Scalar(0)) {
            if (y[t] > 0) {
                upper = std::min(upper, yg);
            } else {
                lower = std::max(lower, yg);
            }
        } else {
            free_sum += yg;
            ++free_count;
        }
    }
    result.rho = free_count > 0 ? free_sum / Scalar(free_count)
                                : (upper + lower) / Scalar(2);
    return result;
}

template <typename Scalar>
std::vector<Eigen::Index>
support_of(const Eigen::Vector<Scalar, Eigen::Dynamic>& dual_coefs) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < dual_coefs.size(); ++i) {
        if (std::abs(dual_coefs[i]) > Scalar(1e-12)) {
            support.push_back(i);
        }
    }
    return support;
}

} // namespace detail

/// Solves the C-SVC dual
///   max sum_i a_i - 0.5 sum_ij a_i a_j y_i y_j K_ij
///   s.t. 0 <= a_i <= C, sum_i a_i y_i = 0
/// by SMO on the precomputed kernel. Labels must be -1/+1 with both classes
/// present.
template <typename DerivedK, typename DerivedY,
          typename Scalar = typename DerivedK::Scalar>
SvcModel<Scalar> train_svc(const Eigen::MatrixBase<DerivedK>& K_in,
                           const Eigen::MatrixBase<DerivedY>& y_in,
                           const SvmOptions<Scalar>& opts) {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> K = K_in;
    const Eigen::Vector<Scalar, Eigen::Dynamic> y = y_in;
    detail::check_training_kernel(K);
    const Eigen::Index m = K.rows();
    if (y.size() != m) {
        throw ShapeError("train_svc: " + std::to_string(y.size()) +
                         " labels for " + std::to_string(m) + " samples");
    }
    if (opts.C <= Scalar(0)) {
        throw ConfigError("train_svc: C must be positive");
    }
    std::vector<int> yi(static_cast<std::size_t>(m));
    bool has_pos = false, has_neg = false;
    for (Eigen::Index t = 0; t < m; ++t) {
        if (y[t] != Scalar(1) && y[t] != Scalar(-1)) {
            throw ConfigError("train_svc: labels must be -1 or +1");
        }
        yi[static_cast<std::size_t>(t)] = y[t] > 0 ? 1 : -1;
        (y[t] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw ConfigError("train_svc: training labels contain a single class");
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Q =
        (y * y.transpose()).cwiseProduct(K);
    const Eigen::Vector<Scalar, Eigen::Dynamic> p =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(m, Scalar(-1));
    const Eigen::Index max_iter =
        opts.max_passes > 0 ? opts.max_passes : 10 * m;
    const auto smo = detail::smo_solve(Q, p, yi, opts.C, opts.tol, max_iter, opts);

    SvcModel<Scalar> model;
    model.dual_coefs = smo.alpha.cwiseProduct(y);
    model.bias = -smo.rho;
    model.support_indices = detail::support_of(model.dual_coefs);
    model.C = opts.C;
    model.dual_objective =
        smo.alpha.sum() -
        Scalar(0.5) * smo.alpha.dot(Q * smo.alpha);
    model.kkt_gap = smo.gap;
    model.iterations = smo.iterations;
    model.converged = smo.converged;
    return model;
}

/// decision_i = sum_j dual_coefs_j * K_cross(i, j) + bias; label = sign with
/// exact zero mapping to +1.
template <typename Scalar, typename Derived>
SvcPrediction<Scalar> predict_svc(const SvcModel<Scalar>& model,
                                  const Eigen::MatrixBase<Derived>& K_cross) {
    if (K_cross.rows() > 0 && K_cross.cols() != model.dual_coefs.size()) {
        throw ShapeError("predict_svc: kernel has " +
                         std::to_string(K_cross.cols()) +
                         " columns, model has " +
                         std::to_string(model.dual_coefs.size()) +
                         " training samples");
    }
    SvcPrediction<Scalar> out;
    out.decision_values =
        (K_cross.derived() * model.dual_coefs).array() + model.bias;
    out.labels.resize(out.decision_values.size());
    for (Eigen::Index i = 0; i < out.labels.size(); ++i) {
        out.labels[i] = out.decision_values[i] >= Scalar(0) ? 1 : -1;
    }
    return out;
}

/// Solves the epsilon-insensitive SVR dual via the standard 2m-variable
/// reduction (alpha block then alpha* block) with the same SMO core.
/// The returned dual_coefs are the canonical complementary pair
/// (alpha_i - alpha*_i with alpha_i * alpha*_i = 0).
template <typename DerivedK, typename DerivedT,
          typename Scalar = typename DerivedK::Scalar>
SvrModel<Scalar> train_svr(const Eigen::MatrixBase<DerivedK>& K_in,
                           const Eigen::MatrixBase<DerivedT>& t_in,
                           const SvmOptions<Scalar>& opts) {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> K = K_in;
    const Eigen::Vector<Scalar, Eigen::Dynamic> t = t_in;
    detail::check_training_kernel(K);
    const Eigen::Index m = K.rows();
    if (t.size() != m) {
        throw ShapeError("train_svr: " + std::to_string(t.size()) +
                         " targets for " + std::to_string(m) + " samples");
    }
    if (opts.C <= Scalar(0)) {
        throw ConfigError("train_svr: C must be positive");
    }
    if (opts.epsilon < Scalar(0)) {
        throw ConfigError("train_svr: epsilon must be non-negative");
    }

    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
    Matrix Q(2 * m, 2 * m);
    Q.topLeftCorner(m, m) = K;
    Q.bottomRightCorner(m, m) = K;
    Q.topRightCorner(m, m) = -K;
    Q.bottomLeftCorner(m, m) = -K;
    Vector p(2 * m);
    p.head(m) = Vector::Constant(m, opts.epsilon) - t;
    p.tail(m) = Vector::Constant(m, opts.epsilon) + t;
    std::vector<int> yi(static_cast<std::size_t>(2 * m));
    for (Eigen::Index i = 0; i < m; ++i) {
        yi[static_cast<std::size_t>(i)] = 1;
        yi[static_cast<std::size_t>(m + i)] = -1;
    }
    const Eigen::Index max_iter =
        opts.max_passes > 0 ? opts.max_passes : 10 * (2 * m);
    const auto smo = detail::smo_solve(Q, p, yi, opts.C, opts.tol, max_iter, opts);

    SvrModel<Scalar> model;
    model.dual_coefs = smo.alpha.head(m) - smo.alpha.tail(m);
    model.bias = -smo.rho;
    model.support_indices = detail::support_of(model.dual_coefs);
    model.C = opts.C;
    model.epsilon = opts.epsilon;
    const Vector& beta = model.dual_coefs;
    model.dual_objective = -Scalar(0.5) * beta.dot(K * beta) + t.dot(beta) -
                           opts.epsilon * beta.template lpNorm<1>();
    model.kkt_gap = smo.gap;
    model.iterations = smo.iterations;
    model.converged = smo.converged;
    return model;
}

/// prediction_i = sum_j dual_coefs_j * K_cross(i, j) + bias.
template <typename Scalar, typename Derived>
Eigen::Vector<Scalar, Eigen::Dynamic>
predict_svr(const SvrModel<Scalar>& model,
            const Eigen::MatrixBase<Derived>& K_cross) {
    if (K_cross.rows() > 0 && K_cross.cols() != model.dual_coefs.size()) {
        throw ShapeError("predict_svr: kernel has " +
                         std::to_string(K_cross.cols()) +
                         " columns, model has " +
                         std::to_string(model.dual_coefs.size()) +
                         " training samples");
    }
    return (K_cross.derived() * model.dual_coefs).array() + model.bias;
}

/// Maximum complementarity violation of a trained SVC over its training set.
template <typename Scalar, typename DerivedK, typename DerivedY>
Scalar kkt_report(const SvcModel<Scalar>& model,
                  const Eigen::MatrixBase<DerivedK>& K,
                  const Eigen::MatrixBase<DerivedY>& y) {
    const Eigen::Vector<Scalar, Eigen::Dynamic> f =
        (K.derived() * model.dual_coefs).array() + model.bias;
    Scalar worst = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const Scalar margin = y.derived()(i) * f[i];
        const Scalar a = model.dual_coefs[i] * y.derived()(i); // alpha_i
        Scalar violation;
        if (a <= Scalar(1e-12)) {
            violation = std::max(Scalar(0), Scalar(1) - margin);
        } else if (a >= model.C - Scalar(1e-12)) {
            violation = std::max(Scalar(0), margin - Scalar(1));
        } else {
            violation = std::abs(Scalar(1) - margin);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

/// Maximum complementarity violation of a trained SVR over its training set.
template <typename Scalar, typename DerivedK, typename DerivedT>
Scalar kkt_report(const SvrModel<Scalar>& model,
                  const Eigen::MatrixBase<DerivedK>& K,
                  const Eigen::MatrixBase<DerivedT>& t) {
    const Eigen::Vector<Scalar, Eigen::Dynamic> f =
        (K.derived() * model.dual_coefs).array() + model.bias;
    Scalar worst = 0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const Scalar r = f[i] - t.derived()(i);
        const Scalar beta = model.dual_coefs[i];
        const Scalar eps = model.epsilon;
        Scalar violation;
        if (std::abs(beta) <= Scalar(1e-12)) {
            violation = std::max(Scalar(0), std::abs(r) - eps);
        } else if (beta >= model.C - Scalar(1e-12)) {
            violation = std::max(Scalar(0), r + eps); // requires r <= -eps
        } else if (beta <= -model.C + Scalar(1e-12)) {
            violation = std::max(Scalar(0), eps - r); // requires r >= eps
        } else if (beta > Scalar(0)) {
            violation = std::abs(r + eps); // on the lower tube edge
        } else {
            violation = std::abs(r - eps); // on the upper tube edge
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

} // namespace qsfe
