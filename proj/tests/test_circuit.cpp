// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qmce/circuit.hpp"
#include "qmce/density_matrix.hpp"
#include "qmce/errors.hpp"
#include "qmce/rng.hpp"

using namespace qmce;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_vec(std::size_t n, double lo, double hi, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Reference pipeline: embed, then per layer apply the convolution unitaries
// to a density matrix and *explicitly* trace out the pooled qubits before
// continuing on the smaller register. Gate targets are remapped to the
// shrinking register via the kept-qubit positions.
double dm_pipeline_forward(const CircuitSpec& spec,
                           std::span<const double> params,
                           std::span<const double> features) {
    DensityMatrix rho =
        DensityMatrix::from_statevector(embed(features, spec.num_qubits));
    std::vector<int> labels(spec.num_qubits); // current register -> original
    for (int q = 0; q < spec.num_qubits; ++q) labels[q] = q;

    auto position_of = [&labels](int original) {
        const auto it = std::find(labels.begin(), labels.end(), original);
        REQUIRE(it != labels.end());
        return static_cast<int>(it - labels.begin());
    };
    auto remap = [&](const Gate& g) {
        Gate out = g;
        for (int i = 0; i < g.target_count(); ++i)
            out.targets[i] = position_of(g.targets[i]);
        return out;
    };
    auto gate_values = [&params](const Gate& g) {
        std::vector<double> v(g.param_count());
        for (int i = 0; i < g.param_count(); ++i) v[i] = params[g.param_slots[i]];
        return v;
    };

    for (int layer = 0; layer < spec.num_layers; ++layer) {
        for (const Gate& g : spec.layer_gates[layer]) {
            const Gate local = remap(g);
            rho.apply(local, gate_values(g));
        }
        const auto& keep = spec.kept_per_layer[layer + 1];
        std::vector<int> discard;
        for (std::size_t pos = 0; pos < labels.size(); ++pos)
            if (std::find(keep.begin(), keep.end(), labels[pos]) == keep.end())
                discard.push_back(static_cast<int>(pos));
        rho = partial_trace(rho, discard);
        std::vector<int> next;
        for (int lab : labels)
            if (std::find(keep.begin(), keep.end(), lab) != keep.end())
                next.push_back(lab);
        labels = std::move(next);
    }
    for (const Gate& g : spec.final_gates) {
        const Gate local = remap(g);
        rho.apply(local, gate_values(g));
    }
    std::vector<int> measure;
    for (int q : spec.measurement) measure.push_back(position_of(q));
    return expectation_z(rho, measure);
}

} // namespace

TEST_CASE("build_qcnn(8,2): kept sets and parameter count by enumeration") {
    const CircuitSpec spec = build_qcnn(8, 2);
    REQUIRE(spec.kept_per_layer.size() == 3);
    CHECK(spec.kept_per_layer[0] == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(spec.kept_per_layer[1] == std::vector<int>{0, 2, 4, 6});
    CHECK(spec.kept_per_layer[2] == std::vector<int>{0, 4});
    CHECK(spec.measurement == std::vector<int>{0, 4});

    int slots = 0;
    int u3 = 0, ising = 0;
    for (const auto& layer : spec.layer_gates)
        for (const Gate& g : layer) {
            slots += g.param_count();
            (g.target_count() == 1 ? u3 : ising) += 1;
        }
    for (const Gate& g : spec.final_gates) {
        slots += g.param_count();
        u3 += 1;
    }
    CHECK(u3 == 8 + 4 + 2);
    CHECK(ising == 3 * (8 + 4));
    CHECK(slots == spec.num_params);
    // Regression pin: first derivation of the count for the default chip.
    CHECK(spec.num_params == 78);
}

TEST_CASE("build_qcnn(2,1): smallest instance") {
    const CircuitSpec spec = build_qcnn(2, 1);
    REQUIRE(spec.layer_gates.size() == 1);
    CHECK(spec.layer_gates[0].size() == 2 + 3); // two U3, one Ising triple
    CHECK(spec.kept_per_layer[1] == std::vector<int>{0});
    CHECK(spec.final_gates.size() == 1);
    CHECK(spec.measurement == std::vector<int>{0});
    CHECK(spec.num_params == 12);
}

TEST_CASE("build_qcnn rejects impossible pooling depths") {
    CHECK_THROWS_AS(build_qcnn(4, 3), ContractError);
    CHECK_THROWS_AS(build_qcnn(6, 1), ContractError); // not a power of two
}

TEST_CASE("embedding analytic cases") {
    const std::vector<double> zeros(4, 0.0);
    StateVector s = embed(zeros, 4);
    CHECK(std::abs(s.amplitudes()[0] - cplx{1.0, 0.0}) < 1e-12);
    for (int q = 0; q < 4; ++q) {
        const int qs[] = {q};
        CHECK(expectation_z(s, qs) == doctest::Approx(1.0));
    }

    std::vector<double> flip = {kPi, 0.0, 0.0, 0.0};
    StateVector f = embed(flip, 4);
    const int q0[] = {0};
    CHECK(expectation_z(f, q0) == doctest::Approx(-1.0));

    for (double theta : {0.0, 0.4, 1.3, -2.2}) {
        const std::vector<double> one = {theta};
        CHECK(expectation_z(embed(one, 1), q0) ==
              doctest::Approx(std::cos(theta)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(embed(zeros, 3), ContractError);
}

TEST_CASE("forward analytic cases") {
    const CircuitSpec tiny = build_qcnn(2, 1);
    const std::vector<double> zero_params(tiny.num_params, 0.0);
    CHECK(qcnn_forward(tiny, zero_params, std::vector<double>{0.0, 0.0}) ==
          doctest::Approx(1.0));
    CHECK(qcnn_forward(tiny, zero_params, std::vector<double>{kPi, 0.0}) ==
          doctest::Approx(-1.0));

    const CircuitSpec spec = build_qcnn(8, 2);
    const std::vector<double> zeros(spec.num_params, 0.0);
    CHECK(qcnn_forward(spec, zeros, std::vector<double>(8, 0.0)) ==
          doctest::Approx(1.0));

    CHECK_THROWS_AS(
        qcnn_forward(spec, std::vector<double>(3, 0.0), std::vector<double>(8, 0.0)),
        ContractError);
}

TEST_CASE("forward stays within [-1, 1]") {
    Rng rng(40);
    const CircuitSpec spec = build_qcnn(4, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto params = random_vec(spec.num_params, -kPi, kPi, rng);
        const auto input = random_vec(4, -kPi, kPi, rng);
        const double v = qcnn_forward(spec, params, input);
        CHECK(v <= 1.0 + 1e-12);
        CHECK(v >= -1.0 - 1e-12);
    }
}

TEST_CASE("pure-state forward equals explicit partial-trace pipeline") {
    Rng rng(41);
    for (int l : {2, 4}) {
        for (int L = 1; (1 << L) <= l && L <= 2; ++L) {
            const CircuitSpec spec = build_qcnn(l, L);
            for (int trial = 0; trial < 8; ++trial) {
                const auto params = random_vec(spec.num_params, -kPi, kPi, rng);
                const auto input = random_vec(l, -kPi, kPi, rng);
                const double pure = qcnn_forward(spec, params, input);
                const double mixed = dm_pipeline_forward(spec, params, input);
                CHECK(std::abs(pure - mixed) < 1e-9);
            }
        }
    }
}

TEST_CASE("consistent wire relabeling leaves forward unchanged") {
    Rng rng(42);
    const CircuitSpec spec = build_qcnn(4, 1);
    // Reverse labeling keeps the structure intact under a pure relabel.
    const std::vector<int> perm = {3, 2, 1, 0};
    CircuitSpec relabeled = spec;
    auto map_gate = [&perm](Gate& g) {
        for (int i = 0; i < g.target_count(); ++i)
            g.targets[i] = perm[g.targets[i]];
    };
    for (auto& layer : relabeled.layer_gates)
        for (auto& g : layer) map_gate(g);
    for (auto& g : relabeled.final_gates) map_gate(g);
    for (auto& kept : relabeled.kept_per_layer)
        for (auto& q : kept) q = perm[q];
    for (auto& q : relabeled.measurement) q = perm[q];

    for (int trial = 0; trial < 10; ++trial) {
        const auto params = random_vec(spec.num_params, -kPi, kPi, rng);
        const auto input = random_vec(4, -kPi, kPi, rng);
        std::vector<double> permuted_input(4);
        for (int q = 0; q < 4; ++q) permuted_input[perm[q]] = input[q];
        CHECK(qcnn_forward(spec, params, input) ==
              doctest::Approx(qcnn_forward(relabeled, params, permuted_input))
                  .epsilon(1e-12));
    }
}

TEST_CASE("circuit text round trip") {
    const CircuitSpec spec = build_qcnn(8, 2);
    const std::string text = circuit_to_text(spec);
    const CircuitSpec back = circuit_from_text(text);
    CHECK(circuit_to_text(back) == text);
    CHECK(back.num_params == spec.num_params);
    CHECK(back.measurement == spec.measurement);

    Rng rng(43);
    const auto params = random_vec(spec.num_params, -kPi, kPi, rng);
    const auto input = random_vec(8, -kPi, kPi, rng);
    CHECK(qcnn_forward(spec, params, input) ==
          doctest::Approx(qcnn_forward(back, params, input)).epsilon(1e-15));

    CHECK_THROWS_AS(circuit_from_text("bogus"), ParseError);
    CHECK_THROWS_AS(circuit_from_text("qcnn v1\nqubits 2\n"), ParseError);
}
