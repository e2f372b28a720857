// SPDX-License-Identifier: Apache-2.0
#include "qmce/density_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "qmce/errors.hpp"

namespace qmce {

namespace {

constexpr int kMaxDmQubits = 6;

void check_dm_size(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxDmQubits)
        throw ContractError("density matrix register must have 1.." +
                            std::to_string(kMaxDmQubits) + " qubits");
}

int bit_of(std::size_t index, int qubit, int num_qubits) {
    return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1u);
}

// exp(-i t H / 2) for Hermitian H, via eigendecomposition. Deliberately a
// different route than the closed-form kernels in statevector.cpp.
Eigen::MatrixXcd hermitian_half_angle_exp(const Eigen::MatrixXcd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd evals = es.eigenvalues();
    Eigen::VectorXcd phases(evals.size());
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        phases[i] = std::polar(1.0, -t * evals[i] / 2.0);
    return es.eigenvectors() * phases.asDiagonal() *
           es.eigenvectors().adjoint();
}

Eigen::MatrixXcd pauli(char which) {
    Eigen::MatrixXcd m(2, 2);
    const cplx I{0.0, 1.0};
    switch (which) {
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -I, I, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

Eigen::MatrixXcd kron2(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

// Local gate matrix (2x2 or 4x4) under the shared conventions, assembled
// from exponentials and diagonal phase factors rather than closed-form
// trigonometric entries.
Eigen::MatrixXcd local_unitary(const Gate& gate,
                               std::span<const double> params) {
    switch (gate.kind) {
        case GateKind::RY: return hermitian_half_angle_exp(pauli('Y'), params[0]);
        case GateKind::U3: {
            Eigen::MatrixXcd phase_p = Eigen::MatrixXcd::Identity(2, 2);
            Eigen::MatrixXcd phase_m = Eigen::MatrixXcd::Identity(2, 2);
            phase_p(1, 1) = std::polar(1.0, params[1]);
            phase_m(1, 1) = std::polar(1.0, params[2]);
            return phase_p * hermitian_half_angle_exp(pauli('Y'), params[0]) *
                   phase_m;
        }
        case GateKind::IsingXX:
            return hermitian_half_angle_exp(kron2(pauli('X'), pauli('X')),
                                            params[0]);
        case GateKind::IsingYY:
            return hermitian_half_angle_exp(kron2(pauli('Y'), pauli('Y')),
                                            params[0]);
        case GateKind::IsingZZ:
            return hermitian_half_angle_exp(kron2(pauli('Z'), pauli('Z')),
                                            params[0]);
    }
    throw ContractError("unknown gate kind");
}

} // namespace

DensityMatrix::DensityMatrix(int num_qubits) : num_qubits_(num_qubits) {
    check_dm_size(num_qubits);
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    mat_ = Eigen::MatrixXcd::Zero(dim, dim);
    mat_(0, 0) = 1.0;
}

DensityMatrix::DensityMatrix(int num_qubits, Eigen::MatrixXcd matrix)
    : num_qubits_(num_qubits), mat_(std::move(matrix)) {
    check_dm_size(num_qubits);
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    if (mat_.rows() != dim || mat_.cols() != dim)
        throw ContractError("density matrix must be 2^n x 2^n");
}

DensityMatrix DensityMatrix::from_statevector(const StateVector& state) {
    check_dm_size(state.num_qubits());
    const auto& amps = state.amplitudes();
    Eigen::VectorXcd psi(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i)
        psi[static_cast<Eigen::Index>(i)] = amps[i];
    return DensityMatrix(state.num_qubits(), psi * psi.adjoint());
}

double DensityMatrix::trace_real() const { return mat_.trace().real(); }

double DensityMatrix::hermiticity_defect() const {
    return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::MatrixXcd sym = 0.5 * (mat_ + mat_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::apply(const Gate& gate, std::span<const double> params) {
    const Eigen::MatrixXcd u = gate_unitary(gate, params, num_qubits_);
    mat_ = u * mat_ * u.adjoint();
}

DensityMatrix apply_gate(const DensityMatrix& dm, const Gate& gate,
                         std::span<const double> params) {
    DensityMatrix out = dm;
    out.apply(gate, params);
    return out;
}

double expectation_z(const DensityMatrix& dm, std::span<const int> qubits) {
    if (qubits.empty())
        throw ContractError("expectation_z needs at least one qubit");
    std::size_t mask = 0;
    for (int q : qubits) {
        if (q < 0 || q >= dm.num_qubits())
            throw IndexError("expectation qubit out of range");
        const std::size_t m = std::size_t{1} << (dm.num_qubits() - 1 - q);
        if (mask & m) throw IndexError("expectation qubits must be distinct");
        mask |= m;
    }
    double value = 0.0;
    for (Eigen::Index i = 0; i < dm.matrix().rows(); ++i) {
        const double d = dm.matrix()(i, i).real();
        value += (std::popcount(static_cast<std::size_t>(i) & mask) & 1) ? -d : d;
    }
    return value;
}

DensityMatrix partial_trace(const DensityMatrix& dm,
                            std::span<const int> discard) {
    const int n = dm.num_qubits();
    std::vector<bool> dropped(n, false);
    for (int q : discard) {
        if (q < 0 || q >= n) throw IndexError("discard qubit out of range");
        if (dropped[q]) throw IndexError("discard qubits must be distinct");
        dropped[q] = true;
    }
    if (static_cast<int>(discard.size()) >= n)
        throw ContractError("cannot discard every qubit");

    std::vector<int> kept;
    std::vector<int> traced;
    for (int q = 0; q < n; ++q) (dropped[q] ? traced : kept).push_back(q);

    const int m = static_cast<int>(kept.size());
    const std::size_t dim_kept = std::size_t{1} << m;
    const std::size_t dim_traced = std::size_t{1} << traced.size();

    // Rebuild a full-register index from a kept-bit pattern and a traced-bit
    // pattern; bit i of a pattern addresses the i-th qubit of its list, MSB
    // first, matching the global ordering.
    auto compose = [&](std::size_t kept_bits, std::size_t traced_bits) {
        std::size_t idx = 0;
        for (int i = 0; i < m; ++i)
            idx |= ((kept_bits >> (m - 1 - i)) & 1u) << (n - 1 - kept[i]);
        for (std::size_t i = 0; i < traced.size(); ++i)
            idx |= ((traced_bits >> (traced.size() - 1 - i)) & 1u)
                   << (n - 1 - traced[i]);
        return static_cast<Eigen::Index>(idx);
    };

    Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(
        static_cast<Eigen::Index>(dim_kept), static_cast<Eigen::Index>(dim_kept));
    for (std::size_t a = 0; a < dim_kept; ++a)
        for (std::size_t b = 0; b < dim_kept; ++b)
            for (std::size_t t = 0; t < dim_traced; ++t)
                reduced(static_cast<Eigen::Index>(a),
                        static_cast<Eigen::Index>(b)) +=
                    dm.matrix()(compose(a, t), compose(b, t));
    return DensityMatrix(m, std::move(reduced));
}

Eigen::MatrixXcd gate_unitary(const Gate& gate, std::span<const double> params,
                              int num_qubits) {
    if (static_cast<int>(params.size()) != gate.param_count())
        throw ContractError("gate parameter count mismatch");
    for (double p : params)
        if (!std::isfinite(p)) throw NumericError("non-finite gate parameter");
    const int nt = gate.target_count();
    std::size_t target_mask = 0;
    for (int i = 0; i < nt; ++i) {
        const int t = gate.targets[i];
        if (t < 0 || t >= num_qubits)
            throw IndexError("gate target out of range");
        target_mask |= std::size_t{1} << (num_qubits - 1 - t);
    }
    if (nt == 2 && gate.targets[0] == gate.targets[1])
        throw IndexError("two-qubit gate targets must be distinct");

    const Eigen::MatrixXcd local = local_unitary(gate, params);
    const std::size_t dim = std::size_t{1} << num_qubits;
    const std::size_t rest_mask = (dim - 1) & ~target_mask;
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(
        static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & rest_mask) != (c & rest_mask)) continue;
            int lr = 0, lc = 0;
            for (int i = 0; i < nt; ++i) {
                lr = (lr << 1) | bit_of(r, gate.targets[i], num_qubits);
                lc = (lc << 1) | bit_of(c, gate.targets[i], num_qubits);
            }
            full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                local(lr, lc);
        }
    }
    return full;
}

} // namespace qmce
