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

#include <atomic>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qsfe/errors.hpp"
#include "qsfe/feature_map.hpp"

namespace qsfe {

/// Gram or cross matrix of quantum-kernel entries with optional sample
/// identifiers for CSV dumps.
template <typename Scalar = double>
struct KernelMatrix {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
};

using KernelMatrixd = KernelMatrix<double>;

/// K(x, x') = |<Phi(x)|Phi(x')>|^2, in [0, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar kernel_entry(const Eigen::MatrixBase<DerivedA>& x,
                                       const Eigen::MatrixBase<DerivedB>& x_prime,
                                       const FeatureMapSpec& spec) {
    const auto a = encode(x, spec);
    const auto b = encode(x_prime, spec);
    return std::norm(inner_product(a, b));
}

namespace detail {

template <typename Derived>
std::vector<StateVector<typename Derived::Scalar>>
encode_rows(const Eigen::MatrixBase<Derived>& X, const FeatureMapSpec& spec) {
    std::vector<StateVector<typename Derived::Scalar>> states;
    states.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        states.push_back(encode(X.derived().row(i).transpose(), spec));
    }
    return states;
}

// Runs fn(i) for i in [0, count) across `jobs` threads. Each index is
// processed by exactly one worker and writes only its own output slot, so
// results do not depend on the thread count.
inline void parallel_for_index(Eigen::Index count, int jobs,
                               const std::function<void(Eigen::Index)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (Eigen::Index i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<Eigen::Index> next{0};
    auto worker = [&] {
        for (Eigen::Index i = next.fetch_add(1); i < count;
             i = next.fetch_add(1)) {
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(count));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace detail

/// Symmetric Gram matrix over the rows of X (one sample per row). Each row is
/// encoded once; m(m+1)/2 overlaps are computed and mirrored. Entries are
/// computed independently, so any `jobs` value gives bit-identical results.
template <typename Derived>
KernelMatrix<typename Derived::Scalar>
gram_matrix(const Eigen::MatrixBase<Derived>& X, const FeatureMapSpec& spec,
            int jobs = 1) {
    using Scalar = typename Derived::Scalar;
    if (X.rows() == 0) {
        throw ConfigError("gram_matrix: empty sample set");
    }
    const auto states = detail::encode_rows(X, spec);
    const Eigen::Index m = X.rows();
    KernelMatrix<Scalar> result;
    result.values.resize(m, m);
    auto fill_row = [&](Eigen::Index i) {
        for (Eigen::Index j = i; j < m; ++j) {
            result.values(i, j) = std::norm(inner_product(states[i], states[j]));
        }
    };
    detail::parallel_for_index(m, jobs, fill_row);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            result.values(i, j) = result.values(j, i);
        }
    }
    return result;
}

/// Cross kernel matrix between the rows of A (p samples) and B (m samples).
template <typename DerivedA, typename DerivedB>
KernelMatrix<typename DerivedA::Scalar>
cross_matrix(const Eigen::MatrixBase<DerivedA>& A,
             const Eigen::MatrixBase<DerivedB>& B, const FeatureMapSpec& spec,
             int jobs = 1) {
    using Scalar = typename DerivedA::Scalar;
    if (A.rows() > 0 && B.rows() > 0 && A.cols() != B.cols()) {
        throw ShapeError("cross_matrix: feature widths " +
                         std::to_string(A.cols()) + " and " +
                         std::to_string(B.cols()) + " differ");
    }
    KernelMatrix<Scalar> result;
    result.values.resize(A.rows(), B.rows());
    if (A.rows() == 0 || B.rows() == 0) {
        return result;
    }
    const auto a_states = detail::encode_rows(A, spec);
    const auto b_states = detail::encode_rows(B, spec);
    auto fill_row = [&](Eigen::Index i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            result.values(i, j) =
                std::norm(inner_product(a_states[i], b_states[j]));
        }
    };
    detail::parallel_for_index(A.rows(), jobs, fill_row);
    return result;
}

/// Smallest eigenvalue of a symmetric matrix (PSD diagnostics).
template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
    using Matrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                                 Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.derived(),
                                                 Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

} // namespace qsfe
