// Least-squares array calibration from a labeled TDOA dataset.
//
// A classic Levenberg-Marquardt loop (finite-difference Jacobian, multiplicative
// damping) fits the geometry parameters (b, c_x, c_y) so the geometric TDOA
// model best matches the recorded triples. Records carrying a source distance
// are evaluated at that distance; others fall back to the far-field radius.
#pragma once

#include <functional>
#include <vector>

#include "tridoa/geometry.hpp"
#include "tridoa/lattice.hpp"

namespace tridoa {

struct LmSettings {
    double lambda0 = 1e-3;       // initial damping
    double scale = 10.0;         // damping multiplier on reject / divisor on accept
    int max_iter = 200;
    double step_tol = 1e-10;     // stop when |dx| falls below
    double residual_tol = 1e-12; // stop on relative cost decrease below
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct LmResult {
    std::vector<double> x;
    double rms = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> accepted_costs;  // cost after each accepted step (diagnostics)
};

/// Minimizes |residual_fn(x)|^2 starting from x0. Steps solve
/// (J^T J + lambda diag(J^T J)) dx = -J^T r with J from central differences
/// (step max(1e-7, 1e-7 |x_i|)); a step is accepted only if the cost
/// decreases. Damping growth past 1e12 aborts with converged = false.
LmResult lm_minimize(const ResidualFn& residual_fn, std::vector<double> x0,
                     const LmSettings& settings = {});

enum class FdScheme { kCentral, kForward };

/// Finite-difference Jacobian of fn at x (row r, column c = d res_r / d x_c).
/// Exposed for verification against independent difference schemes.
std::vector<std::vector<double>> numeric_jacobian(const ResidualFn& fn,
                                                  const std::vector<double>& x,
                                                  FdScheme scheme = FdScheme::kCentral);

struct CalibrationResult {
    ArrayGeometry geometry;
    double rms_residual = 0.0;  // meters
    int iterations = 0;
    bool converged = false;
};

/// Fits (b, c_x, c_y) to the dataset. Requires >= 10 records spanning at
/// least 90 degrees of azimuth. Non-convergence is reported, the best
/// iterate is still returned.
CalibrationResult calibrate_geometry(const FieldDataset& ds, const ArrayGeometry& init,
                                     FarFieldRadius r, const LmSettings& settings = {});

}  // namespace tridoa
