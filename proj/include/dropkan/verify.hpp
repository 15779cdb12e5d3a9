#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dropkan/layer.hpp"

namespace dropkan {

struct VerifyCheck {
    std::string name;
    std::string detail;
    double tolerance = 0.0;
    double observed = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;

    bool all_pass() const;
    /// One line per check: status, name, detail, tolerance, observed value.
    /// Deterministic for a given seed (no timestamps).
    std::string to_text() const;
};

/// Worst absolute expectation gap (per unit magnitude) between the
/// mask-enumerated dropkan_pa node sums of `layer` and its unmasked sums,
/// over all nodes, for one input row. Enumerates all 2^n_in masks with
/// Bernoulli weights; at p = 0.5 this is the plain average. The masked
/// node sums are computed through layer_forward with frozen masks; with
/// `mutate_drop_scale` the scale factor is deliberately omitted, which a
/// sound check must reject.
double pa_expectation_gap(const KanLayer& layer, const std::vector<double>& input_row, double p,
                          bool mutate_drop_scale = false);

/// Worst gap of the two-point post-spline enumeration against the closed
/// forms: unscaled expectation = w_b*b(x) + (1-p)*w_s*spline(x), scaled
/// expectation = w_b*b(x) + w_s*spline(x).
double ps_expectation_gap(const EdgeActivation& edge, const EdgeGrid& grid, double x, double p);

/// The full oracle suite: mask-enumeration checks of the expectation
/// identities, the finite-difference gradient suite, and the dropout
/// pathology witnesses. All tolerances are fixed here.
VerifyReport run_verify(std::uint64_t seed);

}  // namespace dropkan
