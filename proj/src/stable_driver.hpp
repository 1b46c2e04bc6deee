#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rng.hpp"

namespace ssde {

// Driving process parameters: stability index alpha and horizon T.
// The simulation engine requires 1 < alpha < 2; density utilities accept
// the wider range (0, 2] so that the Gaussian (alpha = 2) and Cauchy
// (alpha = 1) closed forms can serve as oracles.
struct StableParams {
    double alpha = 1.5;
    double horizon = 1.0;
};

void validate_sim_alpha(double alpha);

// A realized driver path stored as increments over a time grid.
// times has n+1 entries, 0 = times[0] < ... < times[n] = T, and dz[k] is
// the increment of Z over (times[k], times[k+1]]. Cumulative sums give
// Z(times[k]) with Z(0) = 0.
struct IncrementGrid {
    std::vector<double> times;
    std::vector<double> dz;
    ReplicationSeed seed;

    std::size_t steps() const { return dz.size(); }
    // Z evaluated at every grid time (size times.size(), starts at 0).
    std::vector<double> cumulative() const;
};

// One draw with characteristic function exp(-|xi|^alpha), symmetric case,
// via the Chambers-Mallows-Stuck transform. Valid for alpha in (1,2).
double sample_standard_stable(std::mt19937_64& stream, double alpha);

// Independent stable increments on the given grid; increment over
// (t_k, t_{k+1}] has scale (t_{k+1}-t_k)^{1/alpha}. Deterministic in seed.
IncrementGrid sample_increments(ReplicationSeed seed, const StableParams& params,
                                const std::vector<double>& times);

// Aggregate fine increments onto a sub-grid. coarse_times must be a subset
// of fine.times; path values at shared times are preserved exactly.
IncrementGrid coarsen(const IncrementGrid& fine, const std::vector<double>& coarse_times);

// p_s(a) = (1/pi) int_0^inf exp(-s xi^alpha) cos(a xi) dxi.
// Requires s > 0 and alpha in (0, 2].
double transition_density(double s, double a, double alpha);

// int_0^S p_s(a) ds for S > 0.
double integrated_density(double big_s, double a, double alpha);

struct IntegratedDensitySup {
    double value = 0.0;       // sup over |a| <= M+1 of int_0^{K^alpha T} p_s(a) ds
    double argmax = 0.0;      // grid point attaining the maximum
    std::vector<double> a_grid;
    std::vector<double> values;
};

// Evaluates sup_{|a| <= M+1} int_0^{K^alpha T} p_s(a) ds on an a-grid
// (p_s is even and unimodal in a, so the grid covers [0, M+1]).
IntegratedDensitySup integrated_density_sup(double alpha, double m_radius, double k_upper,
                                            double horizon, std::size_t grid_points = 41);

} // namespace ssde
