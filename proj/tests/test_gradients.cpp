// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qmce/errors.hpp"
#include "qmce/gradients.hpp"
#include "qmce/rng.hpp"

using namespace qmce;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-kPi, kPi);
    return v;
}

// Single qubit, no conv layers: forward(x) = <Z> of RY(x)|0> = cos(x) when
// the final U3 stays at zero.
CircuitSpec cosine_circuit() { return build_qcnn(1, 0); }

} // namespace

TEST_CASE("single-qubit cosine: shift rule reproduces -sin") {
    const CircuitSpec spec = cosine_circuit();
    const std::vector<double> params(spec.num_params, 0.0);

    auto d_input = [&](double x) {
        const std::vector<double> input = {x};
        return grad_parameter_shift(spec, params, input).d_inputs[0];
    };
    CHECK(d_input(kPi / 2.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(d_input(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d_input(1.0) == doctest::Approx(-std::sin(1.0)).epsilon(1e-12));
}

TEST_CASE("finite-difference oracle: analytic cosine slope") {
    const CircuitSpec spec = cosine_circuit();
    const std::vector<double> params(spec.num_params, 0.0);
    const std::vector<double> input = {1.0};
    const GradientRecord g = grad_finite_difference(spec, params, input, 1e-4);
    CHECK(std::abs(g.d_inputs[0] - (-0.8414709848)) < 1e-6);

    CHECK_THROWS_AS(grad_finite_difference(spec, params, input, 0.0),
                    ContractError);
    CHECK_THROWS_AS(grad_finite_difference(spec, params, input, -1e-3),
                    ContractError);
}

TEST_CASE("parameter shift matches finite differences on small chips") {
    Rng rng(71);
    for (int l : {2, 4}) {
        const CircuitSpec spec = build_qcnn(l, 1);
        const auto params = random_vec(spec.num_params, rng);
        const auto input = random_vec(l, rng);
        const GradientRecord shift = grad_parameter_shift(spec, params, input);
        const GradientRecord fd = grad_finite_difference(spec, params, input, 1e-4);
        for (std::size_t i = 0; i < shift.d_params.size(); ++i)
            CHECK(std::abs(shift.d_params[i] - fd.d_params[i]) < 1e-6);
        for (std::size_t i = 0; i < shift.d_inputs.size(); ++i)
            CHECK(std::abs(shift.d_inputs[i] - fd.d_inputs[i]) < 1e-6);
    }
}

TEST_CASE("exactness across sizes: 24 seeded points on l in {2,4,8}") {
    Rng rng(72);
    for (int l : {2, 4, 8}) {
        const int layers = l == 2 ? 1 : 2;
        const CircuitSpec spec = build_qcnn(l, layers);
        for (int point = 0; point < 8; ++point) {
            const auto params = random_vec(spec.num_params, rng);
            const auto input = random_vec(l, rng);
            const GradientRecord shift =
                grad_parameter_shift(spec, params, input);
            const GradientRecord fd =
                grad_finite_difference(spec, params, input, 1e-4);
            for (std::size_t i = 0; i < shift.d_params.size(); ++i)
                CHECK(std::abs(shift.d_params[i] - fd.d_params[i]) <= 1e-5);
            for (std::size_t i = 0; i < shift.d_inputs.size(); ++i)
                CHECK(std::abs(shift.d_inputs[i] - fd.d_inputs[i]) <= 1e-5);
        }
    }
}

TEST_CASE("gradient of a gate stranded on discarded qubits is null") {
    // Hand-built spec: one pooling round on two qubits, then a *final* U3 on
    // the kept qubit plus an extra U3 acting only on the discarded qubit.
    // That stranded gate cannot influence the measurement.
    CircuitSpec spec = build_qcnn(2, 1);
    Gate stranded;
    stranded.kind = GateKind::U3;
    stranded.targets = {1, -1};
    stranded.param_slots = {spec.num_params, spec.num_params + 1,
                            spec.num_params + 2};
    spec.final_gates.push_back(stranded);
    spec.num_params += 3;

    Rng rng(73);
    const auto params = random_vec(spec.num_params, rng);
    const auto input = random_vec(2, rng);
    const GradientRecord g = grad_parameter_shift(spec, params, input);
    for (int slot = spec.num_params - 3; slot < spec.num_params; ++slot)
        CHECK(std::abs(g.d_params[slot]) < 1e-12);
    // Sanity: the live parameters do move the output.
    double live = 0.0;
    for (int slot = 0; slot < spec.num_params - 3; ++slot)
        live += std::abs(g.d_params[slot]);
    CHECK(live > 1e-6);
}

TEST_CASE("size mismatches are contract errors") {
    const CircuitSpec spec = build_qcnn(2, 1);
    const std::vector<double> params(spec.num_params, 0.0);
    CHECK_THROWS_AS(
        grad_parameter_shift(spec, params, std::vector<double>{0.0}),
        ContractError);
    CHECK_THROWS_AS(grad_parameter_shift(spec, std::vector<double>{0.0},
                                         std::vector<double>{0.0, 0.0}),
                    ContractError);
}
