#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coefficients.hpp"

namespace ssde {

// K_alpha = -2 pi cot(alpha pi / 2) / alpha, strictly positive on (1,2).
double k_alpha(double alpha);

// Quadrature controls for the nonlocal generator.
struct QuadratureSpec {
    double inner_cutoff = 1e-3; // initial radius of the Taylor-compensated panel
    double outer_cutoff = 50.0; // split between mid panels and the 1/y-substituted tail
    double tolerance = 1e-6;    // relative target
};

// A twice-differentiable function with a declared growth envelope
// |f(z)| <= growth_c (1 + |z|^{growth_exponent}).
struct SmoothFn {
    std::function<double(double)> value;
    std::function<double(double)> d2; // needed only at the evaluation point
    // Optional cancellation-free evaluator for f(x+y) + f(x-y) - 2 f(x).
    // Without it, the symmetrized difference is formed naively and rounding
    // noise amplified by y^{-1-alpha} limits how small y can be resolved.
    std::function<double(double, double)> sym_diff;
    double growth_c = 1.0;
    double growth_exponent = 0.0;
};

struct GeneratorValue {
    double value = 0.0;
    double error_est = 0.0;
};

// L f(x) = int [f(x+y) - f(x) - 1_{|y|<=1} y f'(x)] |y|^{-1-alpha} dy.
// Computed symmetrized (the odd compensator cancels): a Taylor panel near 0,
// adaptive mid panels, and a 1/y-substituted far panel that needs no
// truncation beyond the growth envelope.
GeneratorValue apply_generator(const SmoothFn& f, double x, double alpha,
                               const QuadratureSpec& spec = {});

struct IdentityRow {
    double x = 0.0;
    double lhs = 0.0;     // L u_m(x)
    double rhs = 0.0;     // K_alpha phi_m(x)
    double rel_err = 0.0; // |lhs - rhs| / (1 + rhs)
};

struct IdentityReport {
    bool pass = false;
    double max_rel_err = 0.0;
    double tolerance = 1e-3;
    std::vector<IdentityRow> rows;
};

// Checks L u_m = K_alpha phi_m on the grid; PASS iff the max relative error
// (normalized by 1 + K_alpha phi_m) stays within 1e-3.
IdentityReport verify_identity(const MollifierFamily& family, int m,
                               const std::vector<double>& x_grid,
                               const QuadratureSpec& spec = {});

// Default grid for identity checks: 200 points covering
// [-2 a_{m-1}, 2 a_{m-1}] plus a handful of far-field points.
std::vector<double> identity_default_grid(double a_hi, std::size_t points = 200);

} // namespace ssde
