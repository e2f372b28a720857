// SPDX-License-Identifier: Apache-2.0
#include "qmce/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "qmce/errors.hpp"

namespace qmce {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

Gate one_qubit(GateKind kind, int target, int& next_slot) {
    Gate g;
    g.kind = kind;
    g.targets = {target, -1};
    for (int i = 0; i < g.param_count(); ++i) g.param_slots[i] = next_slot++;
    return g;
}

Gate two_qubit(GateKind kind, int a, int b, int& next_slot) {
    Gate g;
    g.kind = kind;
    g.targets = {a, b};
    g.param_slots = {next_slot++, -1, -1};
    return g;
}

std::vector<double> gather_params(const Gate& gate,
                                  std::span<const double> store) {
    std::vector<double> values(gate.param_count());
    for (int i = 0; i < gate.param_count(); ++i) {
        const int slot = gate.param_slots[i];
        if (slot < 0 || slot >= static_cast<int>(store.size()))
            throw ContractError("gate parameter slot out of range");
        values[i] = store[slot];
    }
    return values;
}

} // namespace

CircuitSpec build_qcnn(int num_qubits, int num_layers) {
    if (!is_power_of_two(num_qubits))
        throw ContractError("chip qubit count must be a power of two");
    if (num_layers < 0) throw ContractError("layer count must be >= 0");
    if (num_qubits < (1 << num_layers))
        throw ContractError("need num_qubits >= 2^num_layers to pool " +
                            std::to_string(num_layers) + " times");

    CircuitSpec spec;
    spec.num_qubits = num_qubits;
    spec.num_layers = num_layers;

    std::vector<int> kept(num_qubits);
    for (int q = 0; q < num_qubits; ++q) kept[q] = q;
    spec.kept_per_layer.push_back(kept);

    int next_slot = 0;
    for (int layer = 0; layer < num_layers; ++layer) {
        std::vector<Gate> gates;
        for (int q : kept) gates.push_back(one_qubit(GateKind::U3, q, next_slot));
        const int m = static_cast<int>(kept.size());
        const int pairs = m == 2 ? 1 : m;
        for (int p = 0; p < pairs; ++p) {
            const int a = kept[p];
            const int b = kept[(p + 1) % m];
            gates.push_back(two_qubit(GateKind::IsingXX, a, b, next_slot));
            gates.push_back(two_qubit(GateKind::IsingYY, a, b, next_slot));
            gates.push_back(two_qubit(GateKind::IsingZZ, a, b, next_slot));
        }
        spec.layer_gates.push_back(std::move(gates));

        std::vector<int> pooled;
        for (std::size_t i = 0; i < kept.size(); i += 2) pooled.push_back(kept[i]);
        kept = std::move(pooled);
        spec.kept_per_layer.push_back(kept);
    }

    for (int q : kept)
        spec.final_gates.push_back(one_qubit(GateKind::U3, q, next_slot));
    spec.measurement = kept;
    spec.num_params = next_slot;
    validate(spec);
    return spec;
}

void validate(const CircuitSpec& spec) {
    if (spec.num_qubits < 1) throw ContractError("circuit has no qubits");
    if (static_cast<int>(spec.kept_per_layer.size()) != spec.num_layers + 1 ||
        static_cast<int>(spec.layer_gates.size()) != spec.num_layers)
        throw ContractError("circuit layer bookkeeping is inconsistent");

    std::set<int> prev;
    for (int layer = 0; layer <= spec.num_layers; ++layer) {
        const auto& kept = spec.kept_per_layer[layer];
        std::set<int> current(kept.begin(), kept.end());
        if (current.size() != kept.size())
            throw ContractError("kept set contains duplicates");
        for (int q : kept)
            if (q < 0 || q >= spec.num_qubits)
                throw ContractError("kept qubit out of range");
        if (layer == 0) {
            if (static_cast<int>(kept.size()) != spec.num_qubits)
                throw ContractError("layer 0 must keep every qubit");
        } else {
            if (!std::includes(prev.begin(), prev.end(), current.begin(),
                               current.end()))
                throw ContractError("kept sets must be nested");
            const auto& before = spec.kept_per_layer[layer - 1];
            std::vector<int> expected;
            for (std::size_t i = 0; i < before.size(); i += 2)
                expected.push_back(before[i]);
            if (expected != kept)
                throw ContractError("pooling must keep even positions");
        }
        prev = std::move(current);
    }

    int slots = 0;
    for (int layer = 0; layer < spec.num_layers; ++layer) {
        const auto& kept = spec.kept_per_layer[layer];
        const std::set<int> support(kept.begin(), kept.end());
        for (const Gate& g : spec.layer_gates[layer]) {
            for (int i = 0; i < g.target_count(); ++i)
                if (!support.count(g.targets[i]))
                    throw ContractError(
                        "layer gate touches a qubit outside its kept set");
            slots += g.param_count();
        }
    }
    const auto& last = spec.kept_per_layer[spec.num_layers];
    const std::set<int> support(last.begin(), last.end());
    for (const Gate& g : spec.final_gates) {
        for (int i = 0; i < g.target_count(); ++i)
            if (!support.count(g.targets[i]))
                throw ContractError("final gate touches a discarded qubit");
        slots += g.param_count();
    }
    if (slots != spec.num_params)
        throw ContractError("num_params disagrees with gate slot total");
    if (spec.measurement.empty())
        throw ContractError("circuit needs a measurement support");
    for (int q : spec.measurement)
        if (!support.count(q))
            throw ContractError("measurement touches a discarded qubit");
}

StateVector embed(std::span<const double> features, int num_qubits) {
    if (static_cast<int>(features.size()) != num_qubits)
        throw ContractError("embedding expects one angle per qubit");
    for (double f : features)
        if (!std::isfinite(f)) throw NumericError("non-finite embedding angle");

    // Product state (x)_j (cos(x_j/2)|0> + sin(x_j/2)|1>), assembled
    // directly instead of through per-gate applications.
    std::vector<cplx> amps(std::size_t{1} << num_qubits);
    const std::size_t dim = amps.size();
    for (std::size_t i = 0; i < dim; ++i) {
        double a = 1.0;
        for (int q = 0; q < num_qubits; ++q) {
            const bool one = (i >> (num_qubits - 1 - q)) & 1u;
            a *= one ? std::sin(features[q] / 2.0)
                     : std::cos(features[q] / 2.0);
        }
        amps[i] = cplx{a, 0.0};
    }
    return StateVector(num_qubits, std::move(amps));
}

double qcnn_forward(const CircuitSpec& spec, std::span<const double> params,
                    std::span<const double> features) {
    if (static_cast<int>(params.size()) != spec.num_params)
        throw ContractError("parameter store size mismatch");
    StateVector psi = embed(features, spec.num_qubits);
    for (const auto& layer : spec.layer_gates)
        for (const Gate& g : layer) psi.apply(g, gather_params(g, params));
    for (const Gate& g : spec.final_gates) psi.apply(g, gather_params(g, params));
    return expectation_z(psi, spec.measurement);
}

std::string circuit_to_text(const CircuitSpec& spec) {
    std::ostringstream out;
    out << "qcnn v1\n";
    out << "qubits " << spec.num_qubits << "\n";
    out << "layers " << spec.num_layers << "\n";
    out << "params " << spec.num_params << "\n";
    for (const auto& kept : spec.kept_per_layer) {
        out << "kept";
        for (int q : kept) out << ' ' << q;
        out << "\n";
    }
    auto emit = [&out](const Gate& g) {
        out << "gate " << gate_name(g.kind);
        for (int i = 0; i < g.target_count(); ++i) out << ' ' << g.targets[i];
        out << " :";
        for (int i = 0; i < g.param_count(); ++i) out << ' ' << g.param_slots[i];
        out << "\n";
    };
    for (int layer = 0; layer < spec.num_layers; ++layer) {
        out << "layer " << layer << "\n";
        for (const Gate& g : spec.layer_gates[layer]) emit(g);
    }
    out << "final\n";
    for (const Gate& g : spec.final_gates) emit(g);
    out << "measure";
    for (int q : spec.measurement) out << ' ' << q;
    out << "\n";
    return out.str();
}

CircuitSpec circuit_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&line_no](const std::string& what) {
        throw ParseError("circuit text line " + std::to_string(line_no) + ": " +
                         what);
    };

    CircuitSpec spec;
    spec.num_qubits = 0;
    spec.num_layers = -1;
    spec.kept_per_layer.clear();
    spec.num_params = 0;

    if (!std::getline(in, line)) throw ParseError("empty circuit text");
    ++line_no;
    if (line != "qcnn v1") fail("expected header 'qcnn v1'");

    enum class Section { Preamble, Layer, Final } section = Section::Preamble;
    std::vector<Gate>* sink = nullptr;
    bool have_measure = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "qubits") {
            if (!(ls >> spec.num_qubits)) fail("bad qubit count");
        } else if (tag == "layers") {
            if (!(ls >> spec.num_layers)) fail("bad layer count");
        } else if (tag == "params") {
            if (!(ls >> spec.num_params)) fail("bad parameter count");
        } else if (tag == "kept") {
            std::vector<int> kept;
            int q;
            while (ls >> q) kept.push_back(q);
            spec.kept_per_layer.push_back(std::move(kept));
        } else if (tag == "layer") {
            int idx;
            if (!(ls >> idx) ||
                idx != static_cast<int>(spec.layer_gates.size()))
                fail("layers must appear in order");
            spec.layer_gates.emplace_back();
            sink = &spec.layer_gates.back();
            section = Section::Layer;
        } else if (tag == "final") {
            sink = &spec.final_gates;
            section = Section::Final;
        } else if (tag == "gate") {
            if (section == Section::Preamble || sink == nullptr)
                fail("gate outside a layer/final section");
            std::string name;
            if (!(ls >> name)) fail("missing gate name");
            Gate g;
            g.kind = gate_kind_from_name(name);
            for (int i = 0; i < g.target_count(); ++i)
                if (!(ls >> g.targets[i])) fail("missing gate target");
            std::string colon;
            if (!(ls >> colon) || colon != ":") fail("expected ':'");
            for (int i = 0; i < g.param_count(); ++i)
                if (!(ls >> g.param_slots[i])) fail("missing parameter slot");
            sink->push_back(g);
        } else if (tag == "measure") {
            int q;
            while (ls >> q) spec.measurement.push_back(q);
            have_measure = true;
        } else {
            fail("unknown directive '" + tag + "'");
        }
    }
    if (!have_measure) throw ParseError("circuit text has no measure line");
    validate(spec);
    return spec;
}

} // namespace qmce
