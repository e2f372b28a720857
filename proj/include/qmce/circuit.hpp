// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "qmce/statevector.hpp"

namespace qmce {

/// One chip's circuit: angle embedding, `num_layers` convolution+pooling
/// rounds, a final U3 on each surviving qubit, and a Pauli-Z string
/// measurement over the survivors.
///
/// kept_per_layer[i] lists the qubits active during convolution layer i;
/// kept_per_layer[num_layers] is the post-pooling survivor set (also the
/// measurement support). Pooling is a pure discard: discarded qubits are
/// simply never touched again, which matches the partial-trace semantics for
/// every observable supported on the kept qubits (the density-matrix oracle
/// checks exactly this).
struct CircuitSpec {
    int num_qubits = 8;
    int num_layers = 2;
    std::vector<std::vector<Gate>> layer_gates;
    std::vector<Gate> final_gates;
    std::vector<std::vector<int>> kept_per_layer;
    std::vector<int> measurement;
    int num_params = 0;
};

/// Builds the chip circuit for `num_qubits` (a power of two) and
/// `num_layers` pooling rounds; requires num_qubits >= 2^num_layers.
///
/// Each layer, over the currently kept qubits: one U3 per qubit, then
/// IsingXX, IsingYY, IsingZZ on each adjacent pair in ring order (the
/// closing last-to-first pair is included when more than two qubits are
/// kept). Pooling keeps the even positions of the kept list.
CircuitSpec build_qcnn(int num_qubits, int num_layers);

/// Structural invariants (nesting of kept sets, gate support, parameter
/// slot accounting). Throws ContractError on violation.
void validate(const CircuitSpec& spec);

/// Angle embedding |psi> = (x) RY(x_j) |0...0>; features.size() must equal
/// the register width.
StateVector embed(std::span<const double> features, int num_qubits);

/// Expectation of the measurement Z-string after running the circuit on the
/// embedded input. Pure and reentrant; result lies in [-1, 1].
double qcnn_forward(const CircuitSpec& spec, std::span<const double> params,
                    std::span<const double> features);

/// Versioned text form of the circuit structure (gates, targets, parameter
/// slots); round-trips exactly.
std::string circuit_to_text(const CircuitSpec& spec);
CircuitSpec circuit_from_text(const std::string& text);

} // namespace qmce
