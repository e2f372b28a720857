// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qmce {

using cplx = std::complex<double>;

/// Gate set of the chip architecture. Conventions (fixed once, used
/// everywhere):
///   RY(t)       = exp(-i t Y / 2)
///   U3(t,p,m)   = [[cos(t/2), -e^{im} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+m)} cos(t/2)]]
///   IsingAA(t)  = exp(-i t (A x A) / 2),  A in {X, Y, Z}
/// U3(0,0,0) is the identity; all generators have eigenvalue spread 1, which
/// is what makes the two-term parameter-shift rule exact.
enum class GateKind : std::uint8_t { U3, RY, IsingXX, IsingYY, IsingZZ };

int gate_target_count(GateKind kind);
int gate_param_count(GateKind kind);
std::string_view gate_name(GateKind kind);
GateKind gate_kind_from_name(std::string_view name);

/// One gate instance inside a circuit: wire targets plus indices into the
/// circuit's parameter store. Unused slots stay -1.
struct Gate {
    GateKind kind = GateKind::RY;
    std::array<int, 2> targets{-1, -1};
    std::array<int, 3> param_slots{-1, -1, -1};

    int target_count() const { return gate_target_count(kind); }
    int param_count() const { return gate_param_count(kind); }
};

Gate make_gate(GateKind kind, std::span<const int> targets,
               std::span<const int> param_slots);

/// Dense pure state of an n-qubit register (1 <= n <= 12). Qubit 0 is the
/// most significant bit of the amplitude index; this ordering is shared by
/// every module that touches amplitudes.
class StateVector {
  public:
    explicit StateVector(int num_qubits);
    StateVector(int num_qubits, std::vector<cplx> amplitudes);

    int num_qubits() const { return num_qubits_; }
    std::size_t size() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    double norm() const;

    /// In-place unitary application; the free apply_gate below is the
    /// value-returning variant. `params` holds the gate's own parameter
    /// values (3 for U3, 1 otherwise).
    void apply(const Gate& gate, std::span<const double> params);

  private:
    int num_qubits_;
    std::vector<cplx> amps_;
};

StateVector apply_gate(const StateVector& state, const Gate& gate,
                       std::span<const double> params);

/// <Z_{q1} x ... x Z_{qm}> of the state; qubits must be distinct, in range,
/// and non-empty. Result lies in [-1, 1].
double expectation_z(const StateVector& state, std::span<const int> qubits);

} // namespace qmce
