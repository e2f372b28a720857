// SPDX-License-Identifier: Apache-2.0
#include "qmce/gradients.hpp"

#include <cmath>
#include <numbers>

#include "qmce/errors.hpp"

namespace qmce {

namespace {

GradientRecord shifted_gradient(const CircuitSpec& spec,
                                std::span<const double> params,
                                std::span<const double> features, double shift,
                                double denom) {
    if (static_cast<int>(params.size()) != spec.num_params)
        throw ContractError("parameter store size mismatch");
    if (static_cast<int>(features.size()) != spec.num_qubits)
        throw ContractError("input size mismatch");

    GradientRecord rec;
    rec.d_params.resize(params.size());
    rec.d_inputs.resize(features.size());

    std::vector<double> scratch(params.begin(), params.end());
    for (std::size_t i = 0; i < scratch.size(); ++i) {
        const double original = scratch[i];
        scratch[i] = original + shift;
        const double plus = qcnn_forward(spec, scratch, features);
        scratch[i] = original - shift;
        const double minus = qcnn_forward(spec, scratch, features);
        scratch[i] = original;
        rec.d_params[i] = (plus - minus) / denom;
    }

    std::vector<double> input(features.begin(), features.end());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double original = input[i];
        input[i] = original + shift;
        const double plus = qcnn_forward(spec, params, input);
        input[i] = original - shift;
        const double minus = qcnn_forward(spec, params, input);
        input[i] = original;
        rec.d_inputs[i] = (plus - minus) / denom;
    }
    return rec;
}

} // namespace

GradientRecord grad_parameter_shift(const CircuitSpec& spec,
                                    std::span<const double> params,
                                    std::span<const double> features) {
    return shifted_gradient(spec, params, features, std::numbers::pi / 2.0,
                            2.0);
}

GradientRecord grad_finite_difference(const CircuitSpec& spec,
                                      std::span<const double> params,
                                      std::span<const double> features,
                                      double h) {
    if (!(h > 0.0)) throw ContractError("finite-difference step must be > 0");
    return shifted_gradient(spec, params, features, h, 2.0 * h);
}

} // namespace qmce
