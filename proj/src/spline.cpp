#include "dropkan/spline.hpp"

#include <cmath>
#include <stdexcept>

namespace dropkan {

EdgeGrid::EdgeGrid(int degree, int intervals, double lo, double hi)
    : degree_(degree), intervals_(intervals), lo_(lo), hi_(hi) {
    if (degree < 0) throw std::invalid_argument("EdgeGrid: degree must be >= 0");
    if (intervals < 1) throw std::invalid_argument("EdgeGrid: intervals must be >= 1");
    if (!(lo < hi)) throw std::invalid_argument("EdgeGrid: range_lo must be < range_hi");
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("EdgeGrid: range must be finite");

    const double h = (hi - lo) / intervals;
    const int n_knots = intervals + 2 * degree + 1;
    knots_.resize(n_knots);
    for (int j = 0; j < n_knots; ++j) knots_[j] = lo + (j - degree) * h;
}

void EdgeGrid::basis_eval(double x, double* out) const {
    const int k = degree_;
    const std::size_t n = basis_count();
    const std::size_t n_knots = knots_.size();

    // Outside the knot span every basis function is identically zero.
    if (!(x >= knots_.front() && x < knots_.back())) {
        for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
        return;
    }

    // Degree-0 indicators on [t_j, t_{j+1}), then Cox-de Boor elevation.
    std::vector<double> b(n_knots - 1);
    for (std::size_t j = 0; j + 1 < n_knots; ++j)
        b[j] = (x >= knots_[j] && x < knots_[j + 1]) ? 1.0 : 0.0;

    for (int d = 1; d <= k; ++d) {
        for (std::size_t j = 0; j + d + 1 < n_knots; ++j) {
            double left = 0.0, right = 0.0;
            const double den_l = knots_[j + d] - knots_[j];
            if (den_l != 0.0) left = (x - knots_[j]) / den_l * b[j];
            const double den_r = knots_[j + d + 1] - knots_[j + 1];
            if (den_r != 0.0) right = (knots_[j + d + 1] - x) / den_r * b[j + 1];
            b[j] = left + right;
        }
    }
    for (std::size_t j = 0; j < n; ++j) out[j] = b[j];
}

std::vector<double> EdgeGrid::basis_eval(double x) const {
    std::vector<double> out(basis_count());
    basis_eval(x, out.data());
    return out;
}

void EdgeGrid::basis_deriv(double x, double* out) const {
    const int k = degree_;
    const std::size_t n = basis_count();
    if (k == 0) {
        // Piecewise constant: derivative zero a.e.; breakpoints ignored.
        for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
        return;
    }
    if (!(x >= knots_.front() && x < knots_.back())) {
        for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
        return;
    }

    // B'_{j,k} = k * ( B_{j,k-1}/(t_{j+k}-t_j) - B_{j+1,k-1}/(t_{j+k+1}-t_{j+1}) )
    // with the degree-(k-1) functions evaluated on the same knot vector.
    std::vector<double> bkm1(knots_.size() - 1);
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j)
        bkm1[j] = (x >= knots_[j] && x < knots_[j + 1]) ? 1.0 : 0.0;
    for (int d = 1; d <= k - 1; ++d) {
        for (std::size_t j = 0; j + d + 1 < knots_.size(); ++j) {
            double left = 0.0, right = 0.0;
            const double den_l = knots_[j + d] - knots_[j];
            if (den_l != 0.0) left = (x - knots_[j]) / den_l * bkm1[j];
            const double den_r = knots_[j + d + 1] - knots_[j + 1];
            if (den_r != 0.0) right = (knots_[j + d + 1] - x) / den_r * bkm1[j + 1];
            bkm1[j] = left + right;
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        double left = 0.0, right = 0.0;
        const double den_l = knots_[j + k] - knots_[j];
        if (den_l != 0.0) left = bkm1[j] / den_l;
        const double den_r = knots_[j + k + 1] - knots_[j + 1];
        if (den_r != 0.0) right = bkm1[j + 1] / den_r;
        out[j] = k * (left - right);
    }
}

std::vector<double> EdgeGrid::basis_deriv(double x) const {
    std::vector<double> out(basis_count());
    basis_deriv(x, out.data());
    return out;
}

double silu(double x) {
    return x / (1.0 + std::exp(-x));
}

double silu_deriv(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

EdgeActivation init_edge(const EdgeGrid& grid, double sigma, Rng& rng) {
    EdgeActivation e;
    e.coeffs.resize(grid.basis_count());
    for (double& c : e.coeffs) c = rng.normal(0.0, sigma);
    return e;
}

double spline_eval(const EdgeActivation& edge, const EdgeGrid& grid, double x) {
    std::vector<double> b = grid.basis_eval(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) acc += edge.coeffs[j] * b[j];
    return edge.w_s * acc;
}

double activation_eval(const EdgeActivation& edge, const EdgeGrid& grid, double x) {
    return edge.w_b * silu(x) + spline_eval(edge, grid, x);
}

}  // namespace dropkan
