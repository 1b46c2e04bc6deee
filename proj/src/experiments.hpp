#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "em.hpp"

namespace ssde {

// --- estimators ---------------------------------------------------------------

enum class Estimator { Auto, Mean, MedianOfMeans };

struct McEstimate {
    double estimate = 0.0;
    double dispersion = 0.0;
    std::string estimator; // which one was actually used
};

// Mean or median-of-means (k = floor(sqrt(N)) groups, index-defined so the
// result is schedule-independent). Auto picks median-of-means in the
// heavy-tail regime beta >= (1+alpha)/2.
McEstimate mc_estimate(const std::vector<double>& values, Estimator estimator, double beta,
                       double alpha);

// --- path comparison ------------------------------------------------------------

// (max over shared knots of |a - b|)^beta; grids must coincide.
double sup_error_beta(const PathGrid& a, const PathGrid& b, double beta);

// Extend a coarse path onto a finer monitoring grid as a step function via
// eta (used when no driver is available, e.g. on serialized paths).
PathGrid step_extend(const PathGrid& coarse, const std::vector<double>& fine_times);

// |a(t) - b(t)|^exponent at one monitoring knot.
double moment_term(const PathGrid& a, const PathGrid& b, double t, double exponent);

// --- study outputs ---------------------------------------------------------------

struct ErrorTable {
    std::string index_name;            // "mesh" or "n"
    std::vector<double> index;         // sorted: mesh descending / n ascending
    std::vector<double> estimates;     // E[sup|.|^beta] estimates
    std::vector<double> dispersions;
    std::vector<double> moment_at_horizon; // companion E[|.|^{alpha-1}] at t = T
    double beta = 0.0;
    double alpha = 0.0;
    int replications = 0;
    std::string estimator;

    // BO study extras (empty otherwise).
    std::vector<int> m_n;
    std::vector<double> lemma6_bounds;
    std::vector<int> clip_events;
    double clip_radius = 0.0;
};

struct TailReport {
    std::vector<double> lambdas;
    std::vector<double> probabilities; // empirical exceedance, non-increasing
    double slope = 0.0;                // fitted log-log slope, largest-lambda half
    bool slope_reliable = true;
    std::string advisory;
    double fitted_c = 0.0; // the Gine-Marcus constant treated as a fit
    double alpha = 0.0;
};

// --- studies -----------------------------------------------------------------------

// Strong-error table versus the finest-grid reference on one coupled driver
// per replication. ladder_steps are step counts dividing fine_steps.
ErrorTable convergence_study(const Coefficient& coeff, const StableParams& params,
                             const std::vector<std::size_t>& ladder_steps, std::size_t fine_steps,
                             double x0, double beta, int replications, std::uint64_t master_seed,
                             Estimator estimator = Estimator::Auto);

// Coefficient-stability table: both SDEs simulated on the same driver per
// replication. Refuses to run when the certificate fails.
ErrorTable stability_study(const CoefficientSequence& seq, double x0,
                           const std::function<double(int)>& x0_n, const StableParams& params,
                           std::size_t fine_steps, double beta, int replications,
                           std::uint64_t master_seed, const std::vector<int>& n_list,
                           Estimator estimator = Estimator::Auto);

// As stability_study for the Belfadli-Ouknine track, plus the Lemma-6 bound
// 2 K_alpha (M+1) ||f||_inf / (d^alpha m_n) * sup_a int_0^{K^alpha T} p_s(a) ds
// evaluated per n.
ErrorTable stability_study_bo(const CoefficientSequence& seq, double x0,
                              const std::function<double(int)>& x0_n, const StableParams& params,
                              std::size_t fine_steps, double beta, int replications,
                              std::uint64_t master_seed, const std::vector<int>& n_list,
                              double clip_radius = 10.0, Estimator estimator = Estimator::Auto);

// Exceedance tail of sup_t |H Z(t)| for constant H, with a log-log slope fit
// on the largest-lambda half and the Gine-Marcus right-hand side with C
// treated as a fitted constant.
TailReport tail_check(double h_const, const StableParams& params, std::vector<double> lambdas,
                      std::size_t fine_steps, int replications, std::uint64_t master_seed);

} // namespace ssde
