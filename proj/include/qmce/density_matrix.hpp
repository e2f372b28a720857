// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>

#include "qmce/statevector.hpp"

namespace qmce {

/// Dense mixed state of a small register (1 <= n <= 6). This is the test
/// oracle for pooling semantics: the production forward path never builds
/// one. Evolution goes through explicit dense unitaries so the two code
/// paths share as little as possible.
class DensityMatrix {
  public:
    explicit DensityMatrix(int num_qubits);
    DensityMatrix(int num_qubits, Eigen::MatrixXcd matrix);

    static DensityMatrix from_statevector(const StateVector& state);

    int num_qubits() const { return num_qubits_; }
    const Eigen::MatrixXcd& matrix() const { return mat_; }

    double trace_real() const;
    /// Max |rho - rho^dagger| entry; 0 for an exactly Hermitian matrix.
    double hermiticity_defect() const;
    double min_eigenvalue() const;

    void apply(const Gate& gate, std::span<const double> params);

  private:
    int num_qubits_;
    Eigen::MatrixXcd mat_;
};

DensityMatrix apply_gate(const DensityMatrix& dm, const Gate& gate,
                         std::span<const double> params);

double expectation_z(const DensityMatrix& dm, std::span<const int> qubits);

/// Reduced state over the kept qubits (kept order preserved, indices
/// renumbered 0..m-1 by ascending original label). `discard` must be
/// distinct, in range, and leave at least one qubit.
DensityMatrix partial_trace(const DensityMatrix& dm,
                            std::span<const int> discard);

/// Full 2^n x 2^n unitary of a gate embedded in an n-qubit register,
/// assembled from Kronecker products. Oracle building block.
Eigen::MatrixXcd gate_unitary(const Gate& gate, std::span<const double> params,
                              int num_qubits);

} // namespace qmce
