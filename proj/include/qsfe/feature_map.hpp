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

#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/errors.hpp"
#include "qsfe/statevector.hpp"

namespace qsfe {

/// Which qubit pairs receive the two-qubit phase terms.
enum class EntanglementPattern { linear, circular, full };

inline const char* to_string(EntanglementPattern pattern) {
    switch (pattern) {
    case EntanglementPattern::linear:
        return "linear";
    case EntanglementPattern::circular:
        return "circular";
    case EntanglementPattern::full:
        return "full";
    }
    return "?";
}

inline EntanglementPattern parse_entanglement(const std::string& name) {
    if (name == "linear") {
        return EntanglementPattern::linear;
    }
    if (name == "circular") {
        return EntanglementPattern::circular;
    }
    if (name == "full") {
        return EntanglementPattern::full;
    }
    throw ConfigError("unknown entanglement pattern '" + name +
                      "' (expected linear, circular or full)");
}

/// Blueprint of the entangled data-encoding circuit: one qubit per feature,
/// `reps` repetitions of (Hadamard layer, diagonal phase layer).
struct FeatureMapSpec {
    int n_qubits = 3;
    int reps = 1;
    EntanglementPattern pattern = EntanglementPattern::full;

    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ConfigError("FeatureMapSpec: qubit count " +
                              std::to_string(n_qubits) + " outside [1, " +
                              std::to_string(kMaxQubits) + "]");
        }
        if (reps < 1) {
            throw ConfigError("FeatureMapSpec: reps must be at least 1, got " +
                              std::to_string(reps));
        }
    }
};

/// Ordered interaction pairs for a pattern. linear is the open chain,
/// circular appends the wrap-around pair, full is all i<j pairs in
/// lexicographic order. A single qubit has no pairs.
inline std::vector<std::pair<int, int>>
entanglement_pairs(int n_qubits, EntanglementPattern pattern) {
    if (n_qubits < 1) {
        throw ConfigError("entanglement_pairs: qubit count must be >= 1");
    }
    std::vector<std::pair<int, int>> pairs;
    if (n_qubits == 1) {
        return pairs;
    }
    switch (pattern) {
    case EntanglementPattern::linear:
    case EntanglementPattern::circular:
        for (int i = 0; i + 1 < n_qubits; ++i) {
            pairs.emplace_back(i, i + 1);
        }
        if (pattern == EntanglementPattern::circular) {
            pairs.emplace_back(n_qubits - 1, 0);
        }
        break;
    case EntanglementPattern::full:
        for (int i = 0; i < n_qubits; ++i) {
            for (int j = i + 1; j < n_qubits; ++j) {
                pairs.emplace_back(i, j);
            }
        }
        break;
    }
    return pairs;
}

/// Single-feature encoding angle.
template <typename Scalar>
constexpr Scalar phi_single(Scalar x_i) {
    return x_i;
}

/// Pairwise encoding angle (pi - x_i)(pi - x_j), symmetric in its arguments.
template <typename Scalar>
constexpr Scalar phi_pair(Scalar x_i, Scalar x_j) {
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    return (pi - x_i) * (pi - x_j);
}

/// One commuting term of the diagonal encoding unitary exp(i * angle * Z...Z):
/// the mask marks the qubits of the Z-string.
template <typename Scalar>
struct PhaseTerm {
    std::uint64_t mask = 0;
    Scalar angle = 0;
};

/// The angle set of one encoding repetition for feature vector x: one
/// single-qubit term per feature followed by one term per interaction pair.
template <typename Derived>
std::vector<PhaseTerm<typename Derived::Scalar>>
encoding_terms(const Eigen::MatrixBase<Derived>& x,
               std::span<const std::pair<int, int>> pairs) {
    using Scalar = typename Derived::Scalar;
    std::vector<PhaseTerm<Scalar>> terms;
    terms.reserve(static_cast<std::size_t>(x.size()) + pairs.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        terms.push_back({1ULL << i, phi_single(x.derived()(i))});
    }
    for (const auto& [i, j] : pairs) {
        terms.push_back(
            {(1ULL << i) | (1ULL << j), phi_pair(x.derived()(i), x.derived()(j))});
    }
    return terms;
}

/// Collapses commuting Z-string terms into one phase per basis index:
/// phases[b] = sum_t angle_t * (-1)^popcount(b & mask_t).
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic>
diagonal_phases(std::span<const PhaseTerm<Scalar>> terms, int n_qubits) {
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    Eigen::Vector<Scalar, Eigen::Dynamic> phases =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(dim);
    for (const auto& term : terms) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            const int parity =
                std::popcount(static_cast<std::uint64_t>(b) & term.mask) & 1;
            phases[b] += parity ? -term.angle : term.angle;
        }
    }
    return phases;
}

/// Encodes x with per-repetition angle sets (they are identical in the plain
/// map; gradient code shifts a single occurrence).
template <typename Scalar>
StateVector<Scalar> encode_with_terms(
    std::span<const std::vector<PhaseTerm<Scalar>>> per_rep_terms,
    int n_qubits) {
    StateVector<Scalar> state = zero_state<Scalar>(n_qubits);
    for (const auto& terms : per_rep_terms) {
        apply_hadamard_all(state);
        const auto phases = diagonal_phases<Scalar>(terms, n_qubits);
        apply_diagonal_phase(state, phases);
    }
    return state;
}

/// |Phi(x)>: starting from |0...0>, repeat `reps` times: Hadamard on every
/// qubit, then the diagonal unitary exp(i [sum_i phi_single(x_i) Z_i +
/// sum_(i,j) phi_pair(x_i, x_j) Z_i Z_j]). The diagonal is identical across
/// repetitions, so its phase vector is built once.
template <typename Derived>
StateVector<typename Derived::Scalar>
encode(const Eigen::MatrixBase<Derived>& x, const FeatureMapSpec& spec) {
    using Scalar = typename Derived::Scalar;
    spec.validate();
    if (x.size() != spec.n_qubits) {
        throw ShapeError("encode: feature vector of length " +
                         std::to_string(x.size()) + " for " +
                         std::to_string(spec.n_qubits) + " qubits");
    }
    const auto pairs = entanglement_pairs(spec.n_qubits, spec.pattern);
    const auto terms = encoding_terms(x, pairs);
    const auto phases = diagonal_phases<Scalar>(terms, spec.n_qubits);
    StateVector<Scalar> state = zero_state<Scalar>(spec.n_qubits);
    for (int rep = 0; rep < spec.reps; ++rep) {
        apply_hadamard_all(state);
        apply_diagonal_phase(state, phases);
    }
    return state;
}

} // namespace qsfe
