#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "stable_driver.hpp"

namespace ssde {

// A partition 0 = t_0 < ... < t_n = T of the simulation interval.
struct Partition {
    std::vector<double> times;

    // max_k (t_k - t_{k-1}), recomputed on demand.
    double mesh() const;
    double horizon() const { return times.back(); }

    static Partition uniform(double horizon, std::size_t steps);
    // Every stride-th knot of a finer partition (exact subset by construction).
    static Partition subset_by_stride(const std::vector<double>& fine_times, std::size_t stride);
};

// eta_Delta(t): the largest knot t_k <= t. At exactly t = T returns T so the
// bookkeeping is total; the scheme itself never queries t = T.
double eta(const Partition& partition, double t);

// X at grid points with its provenance.
struct PathGrid {
    std::vector<double> times;
    std::vector<double> values;
    double x0 = 0.0;
    std::string coefficient_id;
};

// The Euler-Maruyama scheme on the driver's grid:
//   X(t_{k+1}) = X(t_k) + sigma(t_k, X(t_k)) dZ_k.
// The stored grid value realizes the left limit X(t_k-): fixed grid times
// are a.s. not jump times of Z.
PathGrid euler_maruyama(const Coefficient& coeff, double x0, const IncrementGrid& driver);

// The coarse-partition approximation evaluated at every fine knot: the
// coefficient is frozen at the most recent coarse knot while the fine driver
// increments accumulate, which is X_Delta(t) sampled on the fine grid.
PathGrid materialize_on_fine(const Coefficient& coeff, double x0, const IncrementGrid& fine_driver,
                             const Partition& coarse);

struct CoupledRun {
    PathGrid reference;            // EM on the fine grid itself
    std::vector<PathGrid> coarse;  // one per coarse partition, on the fine grid
};

// All paths share the one realized driver; a coarse partition equal to the
// fine one reproduces the reference exactly.
CoupledRun coupled_run(const Coefficient& coeff, double x0, const IncrementGrid& fine_driver,
                       const std::vector<Partition>& coarse_partitions);

// Cauchy / Borel-Cantelli construction of the strong solution.
struct CauchyBudget {
    std::vector<Partition> partitions; // nested, meshes decreasing
    std::vector<double> eps;           // declared bounds, one per consecutive pair
};

struct CauchyReport {
    bool pass = false;
    std::vector<double> estimates;     // empirical E[D_i^beta]
    std::vector<double> eps;           // the declared budget
    double sum_4i_eps = 0.0;           // Borel-Cantelli tail sum_{i} 4^i eps_i
    int offending_index = -1;          // first i with estimate > eps_i, else -1
};

// D_i = sup-grid distance between consecutive EM paths; the finest path is
// declared the limit. eps must have partitions.size()-1 entries.
CauchyReport cauchy_construction(const Coefficient& coeff, double x0, const CauchyBudget& budget,
                                 const StableParams& params, std::size_t fine_steps, double beta,
                                 int replications, std::uint64_t master_seed);

} // namespace ssde
