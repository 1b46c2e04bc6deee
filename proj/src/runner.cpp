#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "coefficients.hpp"
#include "em.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "generator.hpp"
#include "parallel.hpp"
#include "stable_driver.hpp"

namespace ssde {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

template <typename T>
T require(const json& config, const std::string& field) {
    if (!config.contains(field))
        throw ConfigError("missing required config field: " + field);
    try {
        return config.at(field).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field has the wrong type: " + field);
    }
}

template <typename T>
T get_or(const json& config, const std::string& field, T fallback) {
    if (!config.contains(field))
        return fallback;
    try {
        return config.at(field).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field has the wrong type: " + field);
    }
}

struct Context {
    json config;
    std::string hash;
    fs::path out_dir;
    std::vector<std::string> files;

    std::ofstream open_csv(const std::string& name) {
        fs::create_directories(out_dir);
        fs::path p = out_dir / name;
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw ConfigError("cannot open output file: " + p.string());
        out << "# config_hash=" << hash << "\n";
        files.push_back(p.string());
        return out;
    }
};

StableParams params_from(const json& config) {
    StableParams p;
    p.alpha = require<double>(config, "alpha");
    p.horizon = get_or<double>(config, "T", 1.0);
    if (!(p.horizon > 0.0))
        throw ConfigError("config field T must be positive");
    return p;
}

Coefficient coefficient_from(const json& config, double alpha) {
    if (!config.contains("coefficient"))
        throw ConfigError("missing required config field: coefficient");
    const json& c = config.at("coefficient");
    std::string name = require<std::string>(c, "name");
    return catalog_coefficient(name, alpha, get_or<double>(c, "param", 1.0),
                               get_or<double>(c, "d", 1.0), get_or<double>(c, "k", 2.0));
}

Estimator estimator_from(const json& config) {
    std::string s = get_or<std::string>(config, "estimator", "auto");
    if (s == "auto")
        return Estimator::Auto;
    if (s == "mean")
        return Estimator::Mean;
    if (s == "median-of-means")
        return Estimator::MedianOfMeans;
    throw ConfigError("config field estimator must be auto|mean|median-of-means");
}

Modulus modulus_from(const json& m) {
    std::string type = get_or<std::string>(m, "type", "linear");
    double coeff = get_or<double>(m, "coefficient", 1.0);
    if (type == "linear")
        return Modulus::linear(coeff);
    if (type == "power")
        return Modulus::power(coeff, require<double>(m, "exponent"));
    throw ConfigError("config field modulus.type must be linear|power");
}

// sigma_n = clip(sigma + shift/n), eps_n = (shift/n)^alpha. The clip keeps
// condition (B)(i)/(C)(i) bounds; it contracts increments, so the limit's
// modulus / f certificate carries over to every member.
CoefficientSequence shifted_sequence(const Coefficient& limit, double alpha, double shift) {
    CoefficientSequence seq;
    seq.limit = limit;
    seq.member = [limit, shift](int n) {
        Coefficient member = limit;
        member.id = limit.id + "+1/" + std::to_string(n);
        double offset = shift / static_cast<double>(n);
        if (limit.kind == ConditionKind::A) {
            auto base = limit.sigma;
            member.sigma = [base, offset](double t, double x) { return base(t, x) + offset; };
            member.m1 = limit.m1 + std::abs(offset);
        } else {
            auto base = limit.sigma;
            double cap = limit.k;
            member.sigma = [base, offset, cap](double t, double x) {
                return std::min(base(t, x) + offset, cap);
            };
        }
        return member;
    };
    seq.eps = [shift, alpha](int n) {
        return std::pow(std::abs(shift) / static_cast<double>(n), alpha);
    };
    return seq;
}

json table_to_json(const ErrorTable& table) {
    json j;
    j["index_name"] = table.index_name;
    j["index"] = table.index;
    j["estimates"] = table.estimates;
    j["dispersions"] = table.dispersions;
    j["moment_at_horizon"] = table.moment_at_horizon;
    j["beta"] = table.beta;
    j["alpha"] = table.alpha;
    j["replications"] = table.replications;
    j["estimator"] = table.estimator;
    if (!table.lemma6_bounds.empty()) {
        j["m_n"] = table.m_n;
        j["lemma6_bounds"] = table.lemma6_bounds;
        j["clip_events"] = table.clip_events;
        j["clip_radius"] = table.clip_radius;
    }
    return j;
}

void write_table_csv(Context& ctx, const ErrorTable& table, const std::string& name) {
    auto out = ctx.open_csv(name);
    out << table.index_name << ",estimate,dispersion,moment_at_horizon";
    if (!table.lemma6_bounds.empty())
        out << ",m_n,lemma6_bound,clip_events";
    out << "\n";
    for (std::size_t i = 0; i < table.index.size(); ++i) {
        out << fmt(table.index[i]) << ',' << fmt(table.estimates[i]) << ','
            << fmt(table.dispersions[i]) << ',' << fmt(table.moment_at_horizon[i]);
        if (!table.lemma6_bounds.empty())
            out << ',' << table.m_n[i] << ',' << fmt(table.lemma6_bounds[i]) << ','
                << table.clip_events[i];
        out << "\n";
    }
}

std::string study_file_name(const std::string& stem, const json& config,
                            const std::string& coeff_id) {
    return stem + "_alpha" + fmt(require<double>(config, "alpha")) + "_beta" +
           fmt(get_or<double>(config, "beta", 0.0)) + "_" + coeff_id + ".csv";
}

// ---- subcommands ------------------------------------------------------------

json run_sample_stable(Context& ctx, int& exit_code) {
    StableParams params = params_from(ctx.config);
    validate_sim_alpha(params.alpha);
    int n = get_or<int>(ctx.config, "N", 100000);
    std::uint64_t seed = get_or<std::uint64_t>(ctx.config, "seed", 42);
    std::vector<double> xis = get_or<std::vector<double>>(ctx.config, "xi_list", {0.5, 1.0, 2.0});
    std::vector<double> ts = get_or<std::vector<double>>(ctx.config, "t_list", {0.5, 1.0});

    auto stream = make_stream({seed, 0});
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i)
        draws[i] = sample_standard_stable(stream, params.alpha);

    auto out = ctx.open_csv("sample_stable_alpha" + fmt(params.alpha) + ".csv");
    out << "t,xi,empirical_cf,target_cf,bound,pass\n";
    bool all_pass = true;
    json rows = json::array();
    double bound = 3.0 / std::sqrt(static_cast<double>(n));
    for (double t : ts) {
        double scale = std::pow(t, 1.0 / params.alpha);
        for (double xi : xis) {
            double acc = 0.0;
            for (double d : draws)
                acc += std::cos(xi * scale * d);
            double emp = acc / n;
            double target = std::exp(-t * std::pow(std::abs(xi), params.alpha));
            bool pass = std::abs(emp - target) <= bound;
            all_pass = all_pass && pass;
            out << fmt(t) << ',' << fmt(xi) << ',' << fmt(emp) << ',' << fmt(target) << ','
                << fmt(bound) << ',' << (pass ? 1 : 0) << "\n";
            rows.push_back({{"t", t}, {"xi", xi}, {"empirical", emp}, {"target", target},
                            {"pass", pass}});
        }
    }
    if (!all_pass)
        exit_code = 2;
    return json{{"pass", all_pass}, {"rows", rows}, {"N", n}};
}

json run_simulate(Context& ctx, int&) {
    StableParams params = params_from(ctx.config);
    Coefficient coeff = coefficient_from(ctx.config, params.alpha);
    double x0 = get_or<double>(ctx.config, "x0", 0.0);
    std::size_t steps = get_or<std::size_t>(ctx.config, "steps", 1024);
    std::uint64_t seed = get_or<std::uint64_t>(ctx.config, "seed", 42);

    Partition grid = Partition::uniform(params.horizon, steps);
    IncrementGrid driver = sample_increments({seed, 0}, params, grid.times);
    PathGrid path = euler_maruyama(coeff, x0, driver);

    auto out = ctx.open_csv("path_alpha" + fmt(params.alpha) + "_" + coeff.id + ".csv");
    out << "t,X\n";
    for (std::size_t k = 0; k < path.times.size(); ++k)
        out << fmt(path.times[k]) << ',' << fmt(path.values[k]) << "\n";

    auto drv = ctx.open_csv("driver_alpha" + fmt(params.alpha) + ".csv");
    drv << "t_start,t_end,dZ\n";
    for (std::size_t k = 0; k < driver.dz.size(); ++k)
        drv << fmt(driver.times[k]) << ',' << fmt(driver.times[k + 1]) << ','
            << fmt(driver.dz[k]) << "\n";

    return json{{"steps", steps}, {"final_value", path.values.back()}};
}

json run_converge(Context& ctx, int&) {
    StableParams params = params_from(ctx.config);
    Coefficient coeff = coefficient_from(ctx.config, params.alpha);
    double beta = require<double>(ctx.config, "beta");
    int n = require<int>(ctx.config, "N");
    std::uint64_t seed = get_or<std::uint64_t>(ctx.config, "seed", 42);
    auto ladder = require<std::vector<std::size_t>>(ctx.config, "ladder_steps");
    std::size_t fine_steps = get_or<std::size_t>(ctx.config, "fine_steps", 16384);
    double x0 = get_or<double>(ctx.config, "x0", 0.0);

    ErrorTable table = convergence_study(coeff, params, ladder, fine_steps, x0, beta, n, seed,
                                         estimator_from(ctx.config));
    write_table_csv(ctx, table, study_file_name("converge", ctx.config, coeff.id));
    return table_to_json(table);
}

json run_stability(Context& ctx, int& exit_code, bool bo) {
    StableParams params = params_from(ctx.config);
    Coefficient limit = coefficient_from(ctx.config, params.alpha);
    double beta = require<double>(ctx.config, "beta");
    int n_reps = require<int>(ctx.config, "N");
    std::uint64_t seed = get_or<std::uint64_t>(ctx.config, "seed", 42);
    std::size_t fine_steps = get_or<std::size_t>(ctx.config, "fine_steps", 16384);
    double x0 = get_or<double>(ctx.config, "x0", 0.0);
    double x0_offset = get_or<double>(ctx.config, "x0_offset", 0.0);
    double shift = get_or<double>(ctx.config, "sigma_shift", 1.0);
    std::vector<int> n_list = get_or<std::vector<int>>(ctx.config, "n_list", {1, 2, 4, 8, 16});

    CoefficientSequence seq = shifted_sequence(limit, params.alpha, shift);
    auto x0_n = [x0, x0_offset](int n) { return x0 + x0_offset / static_cast<double>(n); };

    try {
        ErrorTable table =
            bo ? stability_study_bo(seq, x0, x0_n, params, fine_steps, beta, n_reps, seed, n_list,
                                    get_or<double>(ctx.config, "clip_radius", 10.0),
                                    estimator_from(ctx.config))
               : stability_study(seq, x0, x0_n, params, fine_steps, beta, n_reps, seed, n_list,
                                 estimator_from(ctx.config));
        write_table_csv(ctx, table,
                        study_file_name(bo ? "stability_bo" : "stability", ctx.config, limit.id));
        return table_to_json(table);
    } catch (const CertificateError& e) {
        exit_code = 2;
        return json{{"refused", true}, {"reason", e.what()}};
    }
}

json run_verify_generator(Context& ctx, int& exit_code) {
    double alpha = require<double>(ctx.config, "alpha");
    json mspec = ctx.config.contains("mollifier") ? ctx.config.at("mollifier") : json::object();
    std::string variant = get_or<std::string>(mspec, "variant", "komatsu");
    std::vector<int> ms = get_or<std::vector<int>>(mspec, "m", {1});
    int m_max = *std::max_element(ms.begin(), ms.end());
    std::size_t grid_points = get_or<std::size_t>(mspec, "grid_points", 200);

    MollifierFamily family;
    if (variant == "komatsu") {
        Modulus mod = mspec.contains("modulus") ? modulus_from(mspec.at("modulus"))
                                                : Modulus::linear(1.0);
        family = MollifierFamily::komatsu(mod, alpha, m_max);
    } else if (variant == "bo") {
        family = MollifierFamily::bo(alpha, m_max);
    } else {
        throw ConfigError("config field mollifier.variant must be komatsu|bo");
    }

    bool all_pass = true;
    json results = json::array();
    for (int m : ms) {
        auto grid = identity_default_grid(family.a[m - 1], grid_points);
        IdentityReport report = verify_identity(family, m, grid);
        all_pass = all_pass && report.pass;
        auto out = ctx.open_csv("verify_generator_alpha" + fmt(alpha) + "_m" +
                                std::to_string(m) + ".csv");
        out << "x,L_u_m,K_alpha_phi_m,rel_err\n";
        for (const auto& row : report.rows)
            out << fmt(row.x) << ',' << fmt(row.lhs) << ',' << fmt(row.rhs) << ','
                << fmt(row.rel_err) << "\n";
        results.push_back({{"m", m}, {"pass", report.pass},
                           {"max_rel_err", report.max_rel_err},
                           {"tolerance", report.tolerance}});
    }
    if (!all_pass)
        exit_code = 2;
    return json{{"pass", all_pass}, {"k_alpha", k_alpha(alpha)}, {"reports", results}};
}

json run_cauchy(Context& ctx, int& exit_code) {
    StableParams params = params_from(ctx.config);
    Coefficient coeff = coefficient_from(ctx.config, params.alpha);
    double beta = require<double>(ctx.config, "beta");
    int n_reps = require<int>(ctx.config, "N");
    std::uint64_t seed = get_or<std::uint64_t>(ctx.config, "seed", 42);
    std::size_t fine_steps = get_or<std::size_t>(ctx.config, "fine_steps", 16384);
    double x0 = get_or<double>(ctx.config, "x0", 0.0);
    auto ladder = require<std::vector<std::size_t>>(ctx.config, "ladder_steps");
    auto eps = require<std::vector<double>>(ctx.config, "eps");

    Partition fine = Partition::uniform(params.horizon, fine_steps);
    CauchyBudget budget;
    budget.eps = eps;
    for (std::size_t steps : ladder) {
        if (steps == 0 || fine_steps % steps != 0)
            throw ConfigError("config field ladder_steps must divide fine_steps");
        budget.partitions.push_back(Partition::subset_by_stride(fine.times, fine_steps / steps));
    }

    CauchyReport report =
        cauchy_construction(coeff, x0, budget, params, fine_steps, beta, n_reps, seed);
    auto out = ctx.open_csv(study_file_name("cauchy", ctx.config, coeff.id));
    out << "i,steps_i,steps_ip1,estimate,eps,pass\n";
    for (std::size_t i = 0; i < report.estimates.size(); ++i)
        out << i + 1 << ',' << ladder[i] << ',' << ladder[i + 1] << ','
            << fmt(report.estimates[i]) << ',' << fmt(report.eps[i]) << ','
            << (report.estimates[i] <= report.eps[i] ? 1 : 0) << "\n";
    if (!report.pass)
        exit_code = 2;
    return json{{"pass", report.pass},
                {"estimates", report.estimates},
                {"eps", report.eps},
                {"sum_4i_eps", report.sum_4i_eps},
                {"offending_index", report.offending_index}};
}

json run_tail_check(Context& ctx, int& exit_code) {
    StableParams params = params_from(ctx.config);
    int n_reps = get_or<int>(ctx.config, "N", 100000);
    std::uint64_t seed = get_or<std::uint64_t>(ctx.config, "seed", 42);
    std::size_t fine_steps = get_or<std::size_t>(ctx.config, "fine_steps", 1024);
    double h = get_or<double>(ctx.config, "h", 1.0);
    std::vector<double> lambdas = get_or<std::vector<double>>(ctx.config, "lambdas", {});
    if (lambdas.empty()) {
        // Log-spaced default spanning 1.5 decades, placed so the top lambda
        // keeps enough exceedances at N = 1e5 for a stable slope fit.
        for (int i = 0; i <= 16; ++i)
            lambdas.push_back(std::abs(h) * std::pow(10.0, 0.25 + 1.5 * i / 16.0));
    }

    TailReport report = tail_check(h, params, lambdas, fine_steps, n_reps, seed);
    auto out = ctx.open_csv("tail_check_alpha" + fmt(params.alpha) + ".csv");
    out << "lambda,exceedance_probability\n";
    for (std::size_t i = 0; i < report.lambdas.size(); ++i)
        out << fmt(report.lambdas[i]) << ',' << fmt(report.probabilities[i]) << "\n";
    if (!report.slope_reliable)
        exit_code = 2;
    return json{{"slope", report.slope},
                {"slope_reliable", report.slope_reliable},
                {"fitted_c", report.fitted_c},
                {"advisory", report.advisory},
                {"alpha", params.alpha}};
}

} // namespace

std::string config_hash(const std::string& canonical_json) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunResult run_subcommand(const std::string& subcommand, const std::string& config_json,
                         const std::string& out_dir) {
    json config;
    try {
        config = json::parse(config_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!config.is_object())
        throw ConfigError("config must be a JSON object");

    Context ctx;
    ctx.config = config;
    ctx.hash = config_hash(config.dump());
    ctx.out_dir = out_dir;

    if (config.contains("threads"))
        set_max_threads(require<unsigned>(config, "threads"));

    int exit_code = 0;
    json results;
    if (subcommand == "sample-stable")
        results = run_sample_stable(ctx, exit_code);
    else if (subcommand == "simulate")
        results = run_simulate(ctx, exit_code);
    else if (subcommand == "converge")
        results = run_converge(ctx, exit_code);
    else if (subcommand == "stability")
        results = run_stability(ctx, exit_code, false);
    else if (subcommand == "stability-bo")
        results = run_stability(ctx, exit_code, true);
    else if (subcommand == "verify-generator")
        results = run_verify_generator(ctx, exit_code);
    else if (subcommand == "cauchy")
        results = run_cauchy(ctx, exit_code);
    else if (subcommand == "tail-check")
        results = run_tail_check(ctx, exit_code);
    else
        throw ConfigError("unknown subcommand: " + subcommand);

    json summary;
    summary["subcommand"] = subcommand;
    summary["config"] = config;
    summary["config_hash"] = ctx.hash;
    summary["results"] = results;
    summary["exit_code"] = exit_code;
    summary["files"] = ctx.files;
    summary["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();

    fs::create_directories(ctx.out_dir);
    fs::path summary_path = ctx.out_dir / (subcommand + "_summary.json");
    std::ofstream sout(summary_path, std::ios::binary);
    sout << summary.dump(2) << "\n";
    ctx.files.push_back(summary_path.string());

    RunResult result;
    result.exit_code = exit_code;
    result.summary_json = summary.dump();
    result.files_written = ctx.files;
    return result;
}

} // namespace ssde
