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
//
// Brute-force dual solvers for tiny SVM problems (m <= 4): multiresolution
// grid search over the feasible dual polytope, refined locally around the
// running best point. Entirely independent of the SMO implementation; used
// as the verification oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace qsfe::testing {

struct OracleResult {
    Eigen::VectorXd duals; // alpha_i * y_i (SVC) or alpha_i - alpha*_i (SVR)
    double objective = -std::numeric_limits<double>::infinity();
    double bias = 0;
};

namespace detail {

inline constexpr int kGridPoints = 13;

// Maximizes a concave objective over free coordinates in [lo, hi]^d with the
// last coordinate pinned by the equality constraint. `expand` maps free
// coordinates to the full dual vector and returns false when infeasible.
template <typename Expand, typename Objective>
Eigen::VectorXd refine_grid(int dims, double lo, double hi, double final_step,
                            const Expand& expand, const Objective& objective) {
    Eigen::VectorXd center = Eigen::VectorXd::Constant(dims, (lo + hi) / 2);
    double halfspan = (hi - lo) / 2;
    Eigen::VectorXd best_free = center;
    double best_value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_full;

    while (true) {
        const double step = 2 * halfspan / double(kGridPoints - 1);
        std::vector<int> idx(static_cast<std::size_t>(dims), 0);
        Eigen::VectorXd point(dims);
        bool done = false;
        while (!done) {
            for (int d = 0; d < dims; ++d) {
                double v = center[d] - halfspan +
                           step * double(idx[static_cast<std::size_t>(d)]);
                point[d] = std::clamp(v, lo, hi);
            }
            Eigen::VectorXd full;
            if (expand(point, full)) {
                const double value = objective(full);
                if (value > best_value) {
                    best_value = value;
                    best_free = point;
                    best_full = full;
                }
            }
            int d = 0;
            while (d < dims && ++idx[static_cast<std::size_t>(d)] == kGridPoints) {
                idx[static_cast<std::size_t>(d)] = 0;
                ++d;
            }
            done = d == dims;
        }
        if (step <= final_step) {
            break;
        }
        center = best_free;
        halfspan = std::max(2 * step, final_step);
    }
    return best_full;
}

} // namespace detail

/// C-SVC dual oracle: maximize sum(a) - 0.5 a^T (yy^T .* K) a over
/// 0 <= a <= C, sum a_i y_i = 0.
inline OracleResult svc_oracle(const Eigen::MatrixXd& K,
                               const Eigen::VectorXd& y, double C,
                               double final_step = 1e-4) {
    const auto m = static_cast<int>(K.rows());
    const Eigen::MatrixXd Q = (y * y.transpose()).cwiseProduct(K);

    auto expand = [&](const Eigen::VectorXd& free, Eigen::VectorXd& full) {
        full.resize(m);
        full.head(m - 1) = free;
        double acc = 0;
        for (int i = 0; i + 1 < m; ++i) {
            acc += free[i] * y[i];
        }
        const double last = -acc * y[m - 1];
        if (last < -1e-12 || last > C + 1e-12) {
            return false;
        }
        full[m - 1] = std::clamp(last, 0.0, C);
        return true;
    };
    auto objective = [&](const Eigen::VectorXd& a) {
        return a.sum() - 0.5 * a.dot(Q * a);
    };

    OracleResult result;
    const Eigen::VectorXd alpha =
        detail::refine_grid(m - 1, 0.0, C, final_step, expand, objective);
    result.objective = objective(alpha);
    result.duals = alpha.cwiseProduct(y);

    // KKT bias interval, derived from the primal feasibility conditions.
    const Eigen::VectorXd u = K * result.duals;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double free_sum = 0;
    int free_count = 0;
    const double at_bound = 1e-8 * std::max(1.0, C);
    for (int i = 0; i < m; ++i) {
        if (alpha[i] > at_bound && alpha[i] < C - at_bound) {
            free_sum += y[i] - u[i];
            ++free_count;
        } else if (alpha[i] <= at_bound) {
            if (y[i] > 0) {
                lower = std::max(lower, 1.0 - u[i]);
            } else {
                upper = std::min(upper, -1.0 - u[i]);
            }
        } else {
            if (y[i] > 0) {
                upper = std::min(upper, 1.0 - u[i]);
            } else {
                lower = std::max(lower, -1.0 - u[i]);
            }
        }
    }
    result.bias = free_count > 0 ? free_sum / free_count : (lower + upper) / 2;
    return result;
}

/// epsilon-SVR dual oracle over beta = alpha - alpha*: maximize
/// -0.5 b^T K b + t^T b - eps * |b|_1 over |b_i| <= C, sum b_i = 0.
inline OracleResult svr_oracle(const Eigen::MatrixXd& K,
                               const Eigen::VectorXd& t, double C, double eps,
                               double final_step = 1e-4) {
    const auto m = static_cast<int>(K.rows());

    auto expand = [&](const Eigen::VectorXd& free, Eigen::VectorXd& full) {
        full.resize(m);
        full.head(m - 1) = free;
        const double last = -free.sum();
        if (last < -C - 1e-12 || last > C + 1e-12) {
            return false;
        }
        full[m - 1] = std::clamp(last, -C, C);
        return true;
    };
    auto objective = [&](const Eigen::VectorXd& b) {
        return -0.5 * b.dot(K * b) + t.dot(b) - eps * b.cwiseAbs().sum();
    };

    OracleResult result;
    if (m == 1) {
        result.duals = Eigen::VectorXd::Zero(1);
        result.objective = 0;
        result.bias = t[0];
        return result;
    }
    const Eigen::VectorXd beta =
        detail::refine_grid(m - 1, -C, C, final_step, expand, objective);
    result.objective = objective(beta);
    result.duals = beta;

    const Eigen::VectorXd u = K * beta;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double free_sum = 0;
    int free_count = 0;
    const double at_bound = 1e-8 * std::max(1.0, C);
    for (int i = 0; i < m; ++i) {
        const double b = beta[i];
        if (std::abs(b) <= at_bound) {
            lower = std::max(lower, t[i] - u[i] - eps);
            upper = std::min(upper, t[i] - u[i] + eps);
        } else if (b > 0 && b < C - at_bound) {
            free_sum += t[i] - u[i] - eps;
            ++free_count;
        } else if (b < 0 && b > -C + at_bound) {
            free_sum += t[i] - u[i] + eps;
            ++free_count;
        } else if (b >= C - at_bound) {
            upper = std::min(upper, t[i] - u[i] - eps);
        } else {
            lower = std::max(lower, t[i] - u[i] + eps);
        }
    }
    result.bias = free_count > 0 ? free_sum / free_count : (lower + upper) / 2;
    return result;
}

} // namespace qsfe::testing
