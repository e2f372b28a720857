// SPDX-License-Identifier: Apache-2.0
#include "qmce/statevector.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qmce/errors.hpp"

namespace qmce {

namespace {

constexpr int kMaxQubits = 12;

void check_register_size(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
        throw ContractError("state register must have 1.." +
                            std::to_string(kMaxQubits) + " qubits, got " +
                            std::to_string(num_qubits));
}

void check_finite(std::span<const double> params) {
    for (double p : params)
        if (!std::isfinite(p)) throw NumericError("non-finite gate parameter");
}

// Mask of qubit q under the qubit-0-is-MSB ordering.
std::size_t qubit_mask(int num_qubits, int q) {
    return std::size_t{1} << (num_qubits - 1 - q);
}

void check_targets(const Gate& gate, int num_qubits) {
    const int nt = gate.target_count();
    for (int i = 0; i < nt; ++i) {
        const int t = gate.targets[i];
        if (t < 0 || t >= num_qubits)
            throw IndexError("gate target " + std::to_string(t) +
                             " out of range for " + std::to_string(num_qubits) +
                             "-qubit register");
    }
    if (nt == 2 && gate.targets[0] == gate.targets[1])
        throw IndexError("two-qubit gate targets must be distinct");
}

} // namespace

int gate_target_count(GateKind kind) {
    switch (kind) {
        case GateKind::U3:
        case GateKind::RY: return 1;
        default: return 2;
    }
}

int gate_param_count(GateKind kind) {
    return kind == GateKind::U3 ? 3 : 1;
}

std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::U3: return "U3";
        case GateKind::RY: return "RY";
        case GateKind::IsingXX: return "IsingXX";
        case GateKind::IsingYY: return "IsingYY";
        case GateKind::IsingZZ: return "IsingZZ";
    }
    throw ContractError("unknown gate kind");
}

GateKind gate_kind_from_name(std::string_view name) {
    if (name == "U3") return GateKind::U3;
    if (name == "RY") return GateKind::RY;
    if (name == "IsingXX") return GateKind::IsingXX;
    if (name == "IsingYY") return GateKind::IsingYY;
    if (name == "IsingZZ") return GateKind::IsingZZ;
    throw ParseError("unknown gate name '" + std::string(name) + "'");
}

Gate make_gate(GateKind kind, std::span<const int> targets,
               std::span<const int> param_slots) {
    Gate g;
    g.kind = kind;
    if (static_cast<int>(targets.size()) != gate_target_count(kind))
        throw ContractError("gate target count mismatch");
    if (static_cast<int>(param_slots.size()) != gate_param_count(kind))
        throw ContractError("gate parameter slot count mismatch");
    for (std::size_t i = 0; i < targets.size(); ++i) g.targets[i] = targets[i];
    for (std::size_t i = 0; i < param_slots.size(); ++i)
        g.param_slots[i] = param_slots[i];
    return g;
}

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
    check_register_size(num_qubits);
    amps_.assign(std::size_t{1} << num_qubits, cplx{0.0, 0.0});
    amps_[0] = cplx{1.0, 0.0};
}

StateVector::StateVector(int num_qubits, std::vector<cplx> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    check_register_size(num_qubits);
    if (amps_.size() != (std::size_t{1} << num_qubits))
        throw ContractError("amplitude vector length must be 2^num_qubits");
}

double StateVector::norm() const {
    double s = 0.0;
    for (const cplx& a : amps_) s += std::norm(a);
    return std::sqrt(s);
}

void StateVector::apply(const Gate& gate, std::span<const double> params) {
    if (static_cast<int>(params.size()) != gate.param_count())
        throw ContractError("gate parameter count mismatch");
    check_targets(gate, num_qubits_);
    check_finite(params);

    const std::size_t dim = amps_.size();
    switch (gate.kind) {
        case GateKind::U3:
        case GateKind::RY: {
            cplx u00, u01, u10, u11;
            if (gate.kind == GateKind::RY) {
                const double c = std::cos(params[0] / 2.0);
                const double s = std::sin(params[0] / 2.0);
                u00 = c, u01 = -s, u10 = s, u11 = c;
            } else {
                const double c = std::cos(params[0] / 2.0);
                const double s = std::sin(params[0] / 2.0);
                const cplx eip = std::polar(1.0, params[1]);
                const cplx eim = std::polar(1.0, params[2]);
                u00 = c, u01 = -eim * s, u10 = eip * s, u11 = eip * eim * c;
            }
            const std::size_t m = qubit_mask(num_qubits_, gate.targets[0]);
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & m) continue;
                const std::size_t j = i | m;
                const cplx a = amps_[i], b = amps_[j];
                amps_[i] = u00 * a + u01 * b;
                amps_[j] = u10 * a + u11 * b;
            }
            break;
        }
        case GateKind::IsingZZ: {
            const std::size_t ma = qubit_mask(num_qubits_, gate.targets[0]);
            const std::size_t mb = qubit_mask(num_qubits_, gate.targets[1]);
            // Z x Z eigenvalue is +1 on equal bits, -1 otherwise.
            const cplx phase_eq = std::polar(1.0, -params[0] / 2.0);
            const cplx phase_ne = std::polar(1.0, params[0] / 2.0);
            for (std::size_t i = 0; i < dim; ++i) {
                const bool eq = ((i & ma) != 0) == ((i & mb) != 0);
                amps_[i] *= eq ? phase_eq : phase_ne;
            }
            break;
        }
        case GateKind::IsingXX:
        case GateKind::IsingYY: {
            const std::size_t ma = qubit_mask(num_qubits_, gate.targets[0]);
            const std::size_t mb = qubit_mask(num_qubits_, gate.targets[1]);
            const std::size_t both = ma | mb;
            const double c = std::cos(params[0] / 2.0);
            const double s = std::sin(params[0] / 2.0);
            const cplx mis{0.0, -s}; // -i sin(t/2)
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & ma) continue; // each flip-pair visited once
                const std::size_t j = i ^ both;
                const cplx a = amps_[i], b = amps_[j];
                if (gate.kind == GateKind::IsingXX) {
                    amps_[i] = c * a + mis * b;
                    amps_[j] = c * b + mis * a;
                } else {
                    // <i|YxY|j> = -1 when the two target bits agree,
                    // +1 when they differ. Here bit a of i is 0, so the
                    // bits agree iff bit b of i is 0 as well.
                    const bool eq = ((i & mb) == 0);
                    const cplx off = eq ? -mis : mis;
                    amps_[i] = c * a + off * b;
                    amps_[j] = c * b + off * a;
                }
            }
            break;
        }
    }
}

StateVector apply_gate(const StateVector& state, const Gate& gate,
                       std::span<const double> params) {
    StateVector out = state;
    out.apply(gate, params);
    return out;
}

double expectation_z(const StateVector& state, std::span<const int> qubits) {
    if (qubits.empty())
        throw ContractError("expectation_z needs at least one qubit");
    std::size_t mask = 0;
    for (int q : qubits) {
        if (q < 0 || q >= state.num_qubits())
            throw IndexError("expectation qubit out of range");
        const std::size_t m = qubit_mask(state.num_qubits(), q);
        if (mask & m) throw IndexError("expectation qubits must be distinct");
        mask |= m;
    }
    double value = 0.0;
    const auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        value += (std::popcount(i & mask) & 1) ? -p : p;
    }
    return value;
}

} // namespace qmce
