// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "qmce/circuit.hpp"

namespace qmce {

/// Gradient of a chip forward value with respect to every circuit parameter
/// and every embedding angle.
struct GradientRecord {
    std::vector<double> d_params;
    std::vector<double> d_inputs;
};

/// Exact two-term parameter-shift gradient,
///   df/dt = (f(t + pi/2) - f(t - pi/2)) / 2,
/// valid for the whole gate set (all generators have eigenvalue spread 1)
/// and for the RY embedding angles, so the classical pre-layer can be
/// trained through the chip by the chain rule. Cost: two forward
/// evaluations per scalar. Evaluation order is fixed, so results are
/// bit-reproducible.
GradientRecord grad_parameter_shift(const CircuitSpec& spec,
                                    std::span<const double> params,
                                    std::span<const double> features);

/// Central finite-difference oracle, (f(t+h) - f(t-h)) / (2h). Test-only
/// companion to the shift rule; requires h > 0.
GradientRecord grad_finite_difference(const CircuitSpec& spec,
                                      std::span<const double> params,
                                      std::span<const double> features,
                                      double h);

} // namespace qmce
