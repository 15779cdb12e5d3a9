#pragma once

#include <cstddef>
#include <vector>

#include "dropkan/rng.hpp"

namespace dropkan {

/// Uniform B-spline grid shared by all edges of a layer.
///
/// The knot vector has `intervals + 2*degree + 1` entries: `intervals`
/// uniform pieces over [lo, hi] plus `degree` extra uniformly extended knots
/// on each side (extended, not clamped). This yields `intervals + degree`
/// basis functions, and the basis is a partition of unity on [lo, hi].
class EdgeGrid {
public:
    EdgeGrid(int degree, int intervals, double lo, double hi);

    int degree() const { return degree_; }
    int intervals() const { return intervals_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<double>& knots() const { return knots_; }

    /// Number of B-spline basis functions (= coefficient count per edge).
    std::size_t basis_count() const { return static_cast<std::size_t>(intervals_ + degree_); }

    /// All basis function values at x. Zero outside the knot span.
    std::vector<double> basis_eval(double x) const;
    void basis_eval(double x, double* out) const;

    /// First derivative of every basis function at x, via degree reduction.
    std::vector<double> basis_deriv(double x) const;
    void basis_deriv(double x, double* out) const;

private:
    int degree_;
    int intervals_;
    double lo_;
    double hi_;
    std::vector<double> knots_;
};

/// silu(x) = x * sigmoid(x), the base function of each edge activation.
double silu(double x);
double silu_deriv(double x);

/// One trainable edge activation: phi(x) = w_b * silu(x) + w_s * spline(x),
/// spline(x) = sum_k coeffs[k] * B_k(x) over the owning layer's grid.
struct EdgeActivation {
    double w_b = 1.0;
    double w_s = 1.0;
    std::vector<double> coeffs;
};

/// Draw a fresh edge for `grid`: w_b = w_s = 1, coeffs i.i.d. N(0, sigma^2).
/// Coefficients are drawn in index order so a given rng state is reproducible.
EdgeActivation init_edge(const EdgeGrid& grid, double sigma, Rng& rng);

double activation_eval(const EdgeActivation& edge, const EdgeGrid& grid, double x);

/// Spline term alone: w_s * dot(coeffs, basis).
double spline_eval(const EdgeActivation& edge, const EdgeGrid& grid, double x);

}  // namespace dropkan
