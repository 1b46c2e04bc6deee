#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "generator.hpp"
#include "parallel.hpp"

namespace ssde {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1)
        return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (hi + v[n / 2 - 1]);
}

void validate_study(double beta, double alpha, int replications) {
    if (!(beta > 1.0 && beta < alpha))
        throw ParameterError("beta must lie in (1, alpha)");
    if (replications < 30)
        throw ParameterError("need at least 30 replications");
}

} // namespace

McEstimate mc_estimate(const std::vector<double>& values, Estimator estimator, double beta,
                       double alpha) {
    if (values.size() < 30)
        throw ParameterError("mc_estimate needs N >= 30");
    for (double v : values)
        if (v < 0.0)
            throw ParameterError("replication values must be nonnegative");

    bool heavy = beta >= 0.5 * (1.0 + alpha);
    bool use_mom = estimator == Estimator::MedianOfMeans ||
                   (estimator == Estimator::Auto && heavy);

    McEstimate out;
    const auto n = static_cast<double>(values.size());
    if (!use_mom) {
        out.estimator = "mean";
        out.estimate = mean_of(values);
        double ss = 0.0;
        for (double v : values)
            ss += (v - out.estimate) * (v - out.estimate);
        out.dispersion = std::sqrt(ss / (n * (n - 1.0)));
        return out;
    }

    out.estimator = "median-of-means";
    // k = floor(sqrt(N)) groups. The values are sorted and dealt round-robin,
    // so every group is a stratified sample: the estimate keeps the outlier
    // damping of median-of-means and does not depend on replication order.
    std::size_t k = static_cast<std::size_t>(std::floor(std::sqrt(n)));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> group_means(k, 0.0);
    std::vector<std::size_t> group_sizes(k, 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        std::size_t g = i % k;
        group_means[g] += sorted[i];
        ++group_sizes[g];
    }
    for (std::size_t g = 0; g < k; ++g)
        group_means[g] /= static_cast<double>(group_sizes[g]);
    out.estimate = median_of(group_means);
    std::vector<double> dev(k);
    for (std::size_t g = 0; g < k; ++g)
        dev[g] = std::abs(group_means[g] - out.estimate);
    out.dispersion = 1.4826 * median_of(dev) / std::sqrt(static_cast<double>(k));
    return out;
}

double sup_error_beta(const PathGrid& a, const PathGrid& b, double beta) {
    if (a.times.size() != b.times.size() || a.times != b.times)
        throw AlignmentError("sup_error_beta requires a shared monitoring grid");
    double sup = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        sup = std::max(sup, std::abs(a.values[k] - b.values[k]));
    return std::pow(sup, beta);
}

PathGrid step_extend(const PathGrid& coarse, const std::vector<double>& fine_times) {
    Partition p{coarse.times};
    PathGrid out;
    out.times = fine_times;
    out.x0 = coarse.x0;
    out.coefficient_id = coarse.coefficient_id;
    out.values.resize(fine_times.size());
    std::size_t j = 0;
    for (std::size_t k = 0; k < fine_times.size(); ++k) {
        double knot = eta(p, fine_times[k]);
        while (j + 1 < coarse.times.size() && coarse.times[j] < knot)
            ++j;
        if (coarse.times[j] != knot)
            throw AlignmentError("step_extend: monitoring grid outside the coarse span");
        out.values[k] = coarse.values[j];
    }
    return out;
}

double moment_term(const PathGrid& a, const PathGrid& b, double t, double exponent) {
    auto it = std::lower_bound(a.times.begin(), a.times.end(), t);
    if (it == a.times.end() || *it != t)
        throw AlignmentError("moment_term: t is not a monitoring knot");
    std::size_t k = static_cast<std::size_t>(it - a.times.begin());
    if (b.times.size() != a.times.size() || b.times[k] != t)
        throw AlignmentError("moment_term: grids disagree at t");
    return std::pow(std::abs(a.values[k] - b.values[k]), exponent);
}

ErrorTable convergence_study(const Coefficient& coeff, const StableParams& params,
                             const std::vector<std::size_t>& ladder_steps, std::size_t fine_steps,
                             double x0, double beta, int replications, std::uint64_t master_seed,
                             Estimator estimator) {
    validate_study(beta, params.alpha, replications);
    const Partition fine = Partition::uniform(params.horizon, fine_steps);
    std::vector<Partition> coarse;
    for (std::size_t steps : ladder_steps) {
        if (steps == 0 || fine_steps % steps != 0)
            throw GridError("ladder step counts must divide the fine step count");
        coarse.push_back(Partition::subset_by_stride(fine.times, fine_steps / steps));
    }

    const std::size_t n_meshes = coarse.size();
    std::vector<std::vector<double>> sup_pow(n_meshes, std::vector<double>(replications));
    std::vector<std::vector<double>> moment(n_meshes, std::vector<double>(replications));
    parallel_for(replications, [&](int r) {
        IncrementGrid driver = sample_increments(
            {master_seed, static_cast<std::uint64_t>(r)}, params, fine.times);
        CoupledRun run = coupled_run(coeff, x0, driver, coarse);
        for (std::size_t i = 0; i < n_meshes; ++i) {
            sup_pow[i][r] = sup_error_beta(run.coarse[i], run.reference, beta);
            moment[i][r] = moment_term(run.coarse[i], run.reference, params.horizon,
                                       params.alpha - 1.0);
        }
    });

    ErrorTable table;
    table.index_name = "mesh";
    table.beta = beta;
    table.alpha = params.alpha;
    table.replications = replications;
    for (std::size_t i = 0; i < n_meshes; ++i) {
        table.index.push_back(coarse[i].mesh());
        McEstimate e = mc_estimate(sup_pow[i], estimator, beta, params.alpha);
        table.estimates.push_back(e.estimate);
        table.dispersions.push_back(e.dispersion);
        table.moment_at_horizon.push_back(mean_of(moment[i]));
        table.estimator = e.estimator;
    }
    // Sorted by mesh descending (coarsest first).
    std::vector<std::size_t> order(n_meshes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return table.index[a] > table.index[b]; });
    ErrorTable sorted = table;
    for (std::size_t i = 0; i < n_meshes; ++i) {
        sorted.index[i] = table.index[order[i]];
        sorted.estimates[i] = table.estimates[order[i]];
        sorted.dispersions[i] = table.dispersions[order[i]];
        sorted.moment_at_horizon[i] = table.moment_at_horizon[order[i]];
    }
    return sorted;
}

namespace {

ErrorTable stability_core(const CoefficientSequence& seq, double x0,
                          const std::function<double(int)>& x0_n, const StableParams& params,
                          std::size_t fine_steps, double beta, int replications,
                          std::uint64_t master_seed, const std::vector<int>& n_list,
                          Estimator estimator) {
    validate_study(beta, params.alpha, replications);
    SamplePlan plan;
    plan.t_max = params.horizon;
    plan.members = n_list;
    CertificateReport cert = check_certificate(seq, params.alpha, plan);
    if (!cert.pass)
        throw CertificateError("coefficient sequence failed its certificate: " + cert.summary);

    const Partition fine = Partition::uniform(params.horizon, fine_steps);
    std::vector<std::vector<double>> sup_pow(n_list.size(), std::vector<double>(replications));
    std::vector<std::vector<double>> moment(n_list.size(), std::vector<double>(replications));
    std::vector<Coefficient> members;
    members.reserve(n_list.size());
    for (int n : n_list)
        members.push_back(seq.member(n));

    parallel_for(replications, [&](int r) {
        IncrementGrid driver = sample_increments(
            {master_seed, static_cast<std::uint64_t>(r)}, params, fine.times);
        PathGrid limit_path = euler_maruyama(seq.limit, x0, driver);
        for (std::size_t i = 0; i < members.size(); ++i) {
            PathGrid member_path = euler_maruyama(members[i], x0_n(n_list[i]), driver);
            sup_pow[i][r] = sup_error_beta(member_path, limit_path, beta);
            moment[i][r] = moment_term(member_path, limit_path, params.horizon,
                                       params.alpha - 1.0);
        }
    });

    ErrorTable table;
    table.index_name = "n";
    table.beta = beta;
    table.alpha = params.alpha;
    table.replications = replications;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        table.index.push_back(static_cast<double>(n_list[i]));
        McEstimate e = mc_estimate(sup_pow[i], estimator, beta, params.alpha);
        table.estimates.push_back(e.estimate);
        table.dispersions.push_back(e.dispersion);
        table.moment_at_horizon.push_back(mean_of(moment[i]));
        table.estimator = e.estimator;
    }
    return table;
}

} // namespace

ErrorTable stability_study(const CoefficientSequence& seq, double x0,
                           const std::function<double(int)>& x0_n, const StableParams& params,
                           std::size_t fine_steps, double beta, int replications,
                           std::uint64_t master_seed, const std::vector<int>& n_list,
                           Estimator estimator) {
    return stability_core(seq, x0, x0_n, params, fine_steps, beta, replications, master_seed,
                          n_list, estimator);
}

ErrorTable stability_study_bo(const CoefficientSequence& seq, double x0,
                              const std::function<double(int)>& x0_n, const StableParams& params,
                              std::size_t fine_steps, double beta, int replications,
                              std::uint64_t master_seed, const std::vector<int>& n_list,
                              double clip_radius, Estimator estimator) {
    if (seq.limit.kind != ConditionKind::C)
        throw CertificateError("BO stability study requires a (C)-certified coefficient");
    ErrorTable table = stability_core(seq, x0, x0_n, params, fine_steps, beta, replications,
                                      master_seed, n_list, estimator);

    // Lemma-6 bound: 2 K_alpha (M+1) ||f||_inf / (d^alpha m_n) * sup_a int p_s(a) ds.
    // m_n is the largest index with a_{m_n} >= sup|sigma_n - sigma| (paper's
    // eps_n / a_{m_n} <= 1 rule); the declared eps bounds |.|^alpha, so take
    // the 1/alpha root.
    const double ka = k_alpha(params.alpha);
    IntegratedDensitySup dens = integrated_density_sup(params.alpha, clip_radius, seq.limit.k,
                                                       params.horizon);
    std::vector<double> a_seq = bo_a_sequence(60);
    table.clip_radius = clip_radius;
    for (int n : n_list) {
        double eps_unpowered = std::pow(seq.eps(n), 1.0 / params.alpha);
        int m_n = 1;
        for (std::size_t m = 1; m < a_seq.size(); ++m) {
            if (a_seq[m] >= eps_unpowered)
                m_n = static_cast<int>(m);
            else
                break;
        }
        table.m_n.push_back(m_n);
        table.lemma6_bounds.push_back(2.0 * ka * (clip_radius + 1.0) * seq.limit.f_sup /
                                      (std::pow(seq.limit.d, params.alpha) * m_n) * dens.value);
    }

    // Count replications whose paths leave the compact set |x| <= M.
    const Partition fine = Partition::uniform(params.horizon, fine_steps);
    std::vector<int> clips(n_list.size(), 0);
    std::vector<std::vector<int>> clip_hits(n_list.size(), std::vector<int>(replications, 0));
    parallel_for(replications, [&](int r) {
        IncrementGrid driver = sample_increments(
            {master_seed, static_cast<std::uint64_t>(r)}, params, fine.times);
        PathGrid limit_path = euler_maruyama(seq.limit, x0, driver);
        double limit_max = 0.0;
        for (double v : limit_path.values)
            limit_max = std::max(limit_max, std::abs(v));
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            PathGrid member_path = euler_maruyama(seq.member(n_list[i]), x0_n(n_list[i]), driver);
            double mx = limit_max;
            for (double v : member_path.values)
                mx = std::max(mx, std::abs(v));
            clip_hits[i][r] = mx > clip_radius ? 1 : 0;
        }
    });
    for (std::size_t i = 0; i < n_list.size(); ++i)
        clips[i] = std::accumulate(clip_hits[i].begin(), clip_hits[i].end(), 0);
    table.clip_events = clips;
    return table;
}

TailReport tail_check(double h_const, const StableParams& params, std::vector<double> lambdas,
                      std::size_t fine_steps, int replications, std::uint64_t master_seed) {
    if (lambdas.size() < 2)
        throw ParameterError("tail check needs a lambda grid");
    std::sort(lambdas.begin(), lambdas.end());
    if (!(lambdas.back() / lambdas.front() >= std::pow(10.0, 1.5)))
        throw ParameterError("lambda grid must span at least 1.5 decades");
    if (replications < 10000)
        throw ParameterError("tail check needs N >= 10^4");

    const Partition fine = Partition::uniform(params.horizon, fine_steps);
    std::vector<double> sup_vals(replications);
    parallel_for(replications, [&](int r) {
        IncrementGrid driver = sample_increments(
            {master_seed, static_cast<std::uint64_t>(r)}, params, fine.times);
        double z = 0.0, sup = 0.0;
        for (double dz : driver.dz) {
            z += dz;
            sup = std::max(sup, std::abs(h_const * z));
        }
        sup_vals[r] = sup;
    });

    TailReport report;
    report.alpha = params.alpha;
    report.lambdas = lambdas;
    report.probabilities.resize(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        int count = 0;
        for (double s : sup_vals)
            if (s > lambdas[i])
                ++count;
        report.probabilities[i] = static_cast<double>(count) / replications;
    }

    // Fit log P = slope * log lambda + const on the largest-lambda half.
    std::size_t half = lambdas.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (std::size_t i = half; i < lambdas.size(); ++i) {
        if (report.probabilities[i] <= 0.0)
            continue;
        double lx = std::log(lambdas[i]);
        double ly = std::log(report.probabilities[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++used;
    }
    if (used >= 2) {
        double n = static_cast<double>(used);
        report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        // Gine-Marcus RHS with constant fitted: P ~ C T |H|^alpha lambda^{-alpha}.
        double log_c = (sy + params.alpha * sx) / n;
        report.fitted_c = std::exp(log_c) /
                          (params.horizon * std::pow(std::abs(h_const), params.alpha));
    } else {
        report.slope_reliable = false;
        report.advisory = "too few nonzero exceedance probabilities to fit a slope";
    }
    double top_exceed = report.probabilities.back() * replications;
    if (top_exceed < 20.0) {
        report.slope_reliable = false;
        report.advisory = "fewer than 20 exceedances at the largest lambda; widen N";
    }
    return report;
}

} // namespace ssde
