#include "em.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "parallel.hpp"

namespace ssde {

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k)
        m = std::max(m, times[k] - times[k - 1]);
    return m;
}

Partition Partition::uniform(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps == 0)
        throw ParameterError("uniform partition requires T > 0 and steps >= 1");
    Partition p;
    p.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        p.times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    p.times.back() = horizon;
    return p;
}

Partition Partition::subset_by_stride(const std::vector<double>& fine_times, std::size_t stride) {
    if (stride == 0 || (fine_times.size() - 1) % stride != 0)
        throw GridError("stride must divide the fine step count");
    Partition p;
    for (std::size_t k = 0; k < fine_times.size(); k += stride)
        p.times.push_back(fine_times[k]);
    return p;
}

double eta(const Partition& partition, double t) {
    const auto& ts = partition.times;
    if (t < ts.front() || t > ts.back())
        throw ParameterError("eta: t outside [0, T]");
    if (t == ts.back())
        return ts.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    return *(it - 1);
}

PathGrid euler_maruyama(const Coefficient& coeff, double x0, const IncrementGrid& driver) {
    if (driver.times.size() != driver.dz.size() + 1 || driver.times.size() < 2)
        throw AlignmentError("driver increments do not match the time grid");
    PathGrid path;
    path.times = driver.times;
    path.x0 = x0;
    path.coefficient_id = coeff.id;
    path.values.resize(driver.times.size());
    path.values[0] = x0;
    for (std::size_t k = 0; k < driver.dz.size(); ++k)
        path.values[k + 1] =
            path.values[k] + coeff(driver.times[k], path.values[k]) * driver.dz[k];
    return path;
}

PathGrid materialize_on_fine(const Coefficient& coeff, double x0, const IncrementGrid& fine_driver,
                             const Partition& coarse) {
    const auto& ft = fine_driver.times;
    PathGrid path;
    path.times = ft;
    path.x0 = x0;
    path.coefficient_id = coeff.id;
    path.values.resize(ft.size());
    path.values[0] = x0;

    std::size_t j = 0; // index of the current coarse knot within coarse.times
    if (coarse.times.front() != ft.front() || coarse.times.back() != ft.back())
        throw AlignmentError("coarse partition must span the fine grid");
    double frozen = coeff(coarse.times[0], x0);
    for (std::size_t k = 0; k < fine_driver.dz.size(); ++k) {
        // Advance the frozen coefficient when a coarse knot is reached.
        while (j + 1 < coarse.times.size() && coarse.times[j + 1] <= ft[k]) {
            ++j;
            if (coarse.times[j] != ft[k])
                throw AlignmentError("coarse partition is not a subset of the fine grid");
            frozen = coeff(coarse.times[j], path.values[k]);
        }
        path.values[k + 1] = path.values[k] + frozen * fine_driver.dz[k];
    }
    return path;
}

CoupledRun coupled_run(const Coefficient& coeff, double x0, const IncrementGrid& fine_driver,
                       const std::vector<Partition>& coarse_partitions) {
    CoupledRun run;
    run.reference = euler_maruyama(coeff, x0, fine_driver);
    run.coarse.reserve(coarse_partitions.size());
    for (const auto& p : coarse_partitions)
        run.coarse.push_back(materialize_on_fine(coeff, x0, fine_driver, p));
    return run;
}

CauchyReport cauchy_construction(const Coefficient& coeff, double x0, const CauchyBudget& budget,
                                 const StableParams& params, std::size_t fine_steps, double beta,
                                 int replications, std::uint64_t master_seed) {
    if (budget.partitions.size() < 2)
        throw ParameterError("cauchy construction needs at least two partitions");
    if (budget.eps.size() + 1 != budget.partitions.size())
        throw ParameterError("budget needs one eps per consecutive partition pair");
    if (!(beta > 1.0 && beta < params.alpha))
        throw ParameterError("beta must lie in (1, alpha)");

    const Partition fine = Partition::uniform(params.horizon, fine_steps);
    const std::size_t n_pairs = budget.partitions.size() - 1;

    std::vector<std::vector<double>> d_pow(n_pairs, std::vector<double>(replications));
    parallel_for(replications, [&](int r) {
        IncrementGrid driver = sample_increments(
            {master_seed, static_cast<std::uint64_t>(r)}, params, fine.times);
        std::vector<PathGrid> paths;
        paths.reserve(budget.partitions.size());
        for (const auto& p : budget.partitions)
            paths.push_back(materialize_on_fine(coeff, x0, driver, p));
        for (std::size_t i = 0; i + 1 < paths.size(); ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k < paths[i].values.size(); ++k)
                sup = std::max(sup, std::abs(paths[i].values[k] - paths[i + 1].values[k]));
            d_pow[i][r] = std::pow(sup, beta);
        }
    });

    CauchyReport report;
    report.eps = budget.eps;
    report.estimates.resize(n_pairs);
    report.pass = true;
    double weight = 4.0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        double mean = 0.0;
        for (double v : d_pow[i])
            mean += v;
        report.estimates[i] = mean / static_cast<double>(replications);
        if (report.estimates[i] > budget.eps[i] && report.offending_index < 0) {
            report.pass = false;
            report.offending_index = static_cast<int>(i);
        }
        report.sum_4i_eps += weight * budget.eps[i];
        weight *= 4.0;
    }
    return report;
}

} // namespace ssde
