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

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

#include "qsfe/errors.hpp"

namespace qsfe {

inline constexpr int kMaxQubits = 20;

/// Dense amplitudes of an n-qubit pure state.
///
/// Bit convention: qubit 0 is the least-significant bit of the basis index,
/// i.e. amplitudes[b] multiplies |b_{n-1} ... b_1 b_0>. All gate and
/// observable code in this library assumes this ordering.
template <typename Scalar = double>
struct StateVector {
    using Complex = std::complex<Scalar>;
    using Amplitudes = Eigen::Vector<Complex, Eigen::Dynamic>;

    int n_qubits = 0;
    Amplitudes amplitudes;

    Eigen::Index dim() const { return amplitudes.size(); }
    Scalar squared_norm() const { return amplitudes.squaredNorm(); }
};

using StateVectord = StateVector<double>;

/// Z...Z observable supported on a subset of qubits (identity elsewhere).
/// Diagonal with eigenvalues exactly +-1.
struct PauliZString {
    int n_qubits = 0;
    std::uint64_t support_mask = 0; // bit i set = Z acts on qubit i

    static PauliZString all(int n_qubits) {
        check_qubits(n_qubits);
        const std::uint64_t mask =
            n_qubits == 64 ? ~0ULL : ((1ULL << n_qubits) - 1ULL);
        return {n_qubits, mask};
    }

    static PauliZString on(int n_qubits, std::initializer_list<int> support) {
        check_qubits(n_qubits);
        std::uint64_t mask = 0;
        for (int q : support) {
            if (q < 0 || q >= n_qubits) {
                throw IndexError("PauliZString: qubit " + std::to_string(q) +
                                 " outside register of size " +
                                 std::to_string(n_qubits));
            }
            mask |= 1ULL << q;
        }
        return {n_qubits, mask};
    }

  private:
    static void check_qubits(int n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ConfigError("PauliZString: qubit count " +
                              std::to_string(n_qubits) + " outside [1, " +
                              std::to_string(kMaxQubits) + "]");
        }
    }
};

/// |0...0> on n qubits, 1 <= n <= 20.
template <typename Scalar = double>
StateVector<Scalar> zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("zero_state: qubit count " +
                          std::to_string(n_qubits) + " outside [1, " +
                          std::to_string(kMaxQubits) + "]");
    }
    StateVector<Scalar> state;
    state.n_qubits = n_qubits;
    state.amplitudes =
        StateVector<Scalar>::Amplitudes::Zero(Eigen::Index(1) << n_qubits);
    state.amplitudes[0] = Scalar(1);
    return state;
}

namespace detail {

template <typename Scalar>
void check_qubit_index(const StateVector<Scalar>& state, int qubit,
                       const char* where) {
    if (qubit < 0 || qubit >= state.n_qubits) {
        throw IndexError(std::string(where) + ": qubit " +
                         std::to_string(qubit) + " outside register of size " +
                         std::to_string(state.n_qubits));
    }
}

// Applies [[u00, u01], [u10, u11]] to one qubit over the whole register.
template <typename Scalar, typename T00, typename T01, typename T10,
          typename T11>
void apply_one_qubit(StateVector<Scalar>& state, int qubit, T00 u00, T01 u01,
                     T10 u10, T11 u11) {
    const Eigen::Index dim = state.dim();
    const Eigen::Index stride = Eigen::Index(1) << qubit;
    auto& amp = state.amplitudes;
    for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
        for (Eigen::Index low = base; low < base + stride; ++low) {
            const auto a = amp[low];
            const auto b = amp[low + stride];
            amp[low] = u00 * a + u01 * b;
            amp[low + stride] = u10 * a + u11 * b;
        }
    }
}

} // namespace detail

/// Hadamard on every qubit.
template <typename Scalar>
void apply_hadamard_all(StateVector<Scalar>& state) {
    const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
    for (int q = 0; q < state.n_qubits; ++q) {
        detail::apply_one_qubit(state, q, inv_sqrt2, inv_sqrt2, inv_sqrt2,
                                -inv_sqrt2);
    }
}

/// RY(theta) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]] on one qubit.
template <typename Scalar>
void apply_ry(StateVector<Scalar>& state, int qubit, Scalar angle) {
    detail::check_qubit_index(state, qubit, "apply_ry");
    const Scalar c = std::cos(angle / Scalar(2));
    const Scalar s = std::sin(angle / Scalar(2));
    detail::apply_one_qubit(state, qubit, c, -s, s, c);
}

/// CNOT: flips the target bit of every basis state whose control bit is 1.
template <typename Scalar>
void apply_cx(StateVector<Scalar>& state, int control, int target) {
    detail::check_qubit_index(state, control, "apply_cx");
    detail::check_qubit_index(state, target, "apply_cx");
    if (control == target) {
        throw IndexError("apply_cx: control and target must differ");
    }
    const Eigen::Index dim = state.dim();
    const std::uint64_t cmask = 1ULL << control;
    const std::uint64_t tmask = 1ULL << target;
    auto& amp = state.amplitudes;
    for (Eigen::Index b = 0; b < dim; ++b) {
        const std::uint64_t bits = static_cast<std::uint64_t>(b);
        if ((bits & cmask) && !(bits & tmask)) {
            std::swap(amp[b], amp[static_cast<Eigen::Index>(bits | tmask)]);
        }
    }
}

/// Multiplies amplitude b by exp(i * phases[b]); magnitudes unchanged.
template <typename Scalar, typename Derived>
void apply_diagonal_phase(StateVector<Scalar>& state,
                          const Eigen::MatrixBase<Derived>& phases) {
    static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                  "phase scalar type must match the state");
    if (phases.size() != state.dim()) {
        throw ShapeError("apply_diagonal_phase: " + std::to_string(phases.size()) +
                         " phases for dimension " + std::to_string(state.dim()));
    }
    auto& amp = state.amplitudes;
    for (Eigen::Index b = 0; b < state.dim(); ++b) {
        amp[b] *= std::polar(Scalar(1), phases.derived()(b));
    }
}

/// <a|b> = sum_b conj(a_b) * b_b.
template <typename Scalar>
std::complex<Scalar> inner_product(const StateVector<Scalar>& a,
                                   const StateVector<Scalar>& b) {
    if (a.n_qubits != b.n_qubits) {
        throw ShapeError("inner_product: register sizes " +
                         std::to_string(a.n_qubits) + " and " +
                         std::to_string(b.n_qubits) + " differ");
    }
    return a.amplitudes.dot(b.amplitudes);
}

/// <state| Z-string |state> = sum_b |amp_b|^2 * (-1)^popcount(b & support).
template <typename Scalar>
Scalar expectation_z_string(const StateVector<Scalar>& state,
                            const PauliZString& obs) {
    if (obs.n_qubits != state.n_qubits) {
        throw ShapeError("expectation_z_string: observable on " +
                         std::to_string(obs.n_qubits) + " qubits, state on " +
                         std::to_string(state.n_qubits));
    }
    Scalar acc = 0;
    const auto& amp = state.amplitudes;
    for (Eigen::Index b = 0; b < state.dim(); ++b) {
        const int parity =
            std::popcount(static_cast<std::uint64_t>(b) & obs.support_mask) & 1;
        const Scalar weight = std::norm(amp[b]);
        acc += parity ? -weight : weight;
    }
    return acc;
}

} // namespace qsfe
