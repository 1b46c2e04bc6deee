#include "stablesde.h"

#include <cstdlib>
#include <cstring>
#include <random>
#include <string>

#include "coefficients.hpp"
#include "errors.hpp"
#include "generator.hpp"
#include "parallel.hpp"
#include "runner.hpp"
#include "stable_driver.hpp"

namespace {

thread_local std::string g_last_error;

ssde_status fail(ssde_status code, const char* what) {
    g_last_error = what;
    return code;
}

template <typename Fn>
ssde_status guarded(Fn&& fn) {
    try {
        fn();
        return SSDE_OK;
    } catch (const ssde::ParameterError& e) {
        return fail(SSDE_ERR_PARAMETER, e.what());
    } catch (const ssde::GridError& e) {
        return fail(SSDE_ERR_GRID, e.what());
    } catch (const ssde::AlignmentError& e) {
        return fail(SSDE_ERR_ALIGNMENT, e.what());
    } catch (const ssde::CertificateError& e) {
        return fail(SSDE_ERR_CERTIFICATE, e.what());
    } catch (const ssde::FeasibilityError& e) {
        return fail(SSDE_ERR_FEASIBILITY, e.what());
    } catch (const ssde::NumericalError& e) {
        return fail(SSDE_ERR_NUMERICAL, e.what());
    } catch (const ssde::ConfigError& e) {
        return fail(SSDE_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(SSDE_ERR_UNKNOWN, e.what());
    } catch (...) {
        return fail(SSDE_ERR_UNKNOWN, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out)
        std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

struct ssde_sampler {
    std::mt19937_64 stream;
    double alpha;
};

struct ssde_mollifier {
    ssde::Mollifier impl;
};

extern "C" {

const char* ssde_version(void) { return "1.0.0"; }

const char* ssde_last_error(void) { return g_last_error.c_str(); }

void ssde_set_max_threads(unsigned n) { ssde::set_max_threads(n); }

ssde_status ssde_run(const char* subcommand, const char* config_json, const char* out_dir,
                     int* report_exit_code, char** summary_json) {
    if (!subcommand || !config_json || !out_dir)
        return fail(SSDE_ERR_PARAMETER, "null argument to ssde_run");
    return guarded([&] {
        ssde::RunResult result = ssde::run_subcommand(subcommand, config_json, out_dir);
        if (report_exit_code)
            *report_exit_code = result.exit_code;
        if (summary_json)
            *summary_json = dup_string(result.summary_json);
    });
}

void ssde_string_free(char* str) { std::free(str); }

ssde_status ssde_k_alpha(double alpha, double* out) {
    if (!out)
        return fail(SSDE_ERR_PARAMETER, "null output pointer");
    return guarded([&] { *out = ssde::k_alpha(alpha); });
}

ssde_status ssde_transition_density(double s, double a, double alpha, double* out) {
    if (!out)
        return fail(SSDE_ERR_PARAMETER, "null output pointer");
    return guarded([&] { *out = ssde::transition_density(s, a, alpha); });
}

ssde_status ssde_sampler_create(uint64_t master_seed, uint64_t replication_index, double alpha,
                                ssde_sampler** out) {
    if (!out)
        return fail(SSDE_ERR_PARAMETER, "null output pointer");
    return guarded([&] {
        ssde::validate_sim_alpha(alpha);
        *out = new ssde_sampler{ssde::make_stream({master_seed, replication_index}), alpha};
    });
}

ssde_status ssde_sampler_draw(ssde_sampler* sampler, double* out) {
    if (!sampler || !out)
        return fail(SSDE_ERR_PARAMETER, "null argument to ssde_sampler_draw");
    return guarded([&] { *out = ssde::sample_standard_stable(sampler->stream, sampler->alpha); });
}

void ssde_sampler_destroy(ssde_sampler* sampler) { delete sampler; }

ssde_status ssde_mollifier_create(int variant, double rho_coefficient, double alpha, int m,
                                  ssde_mollifier** out) {
    if (!out)
        return fail(SSDE_ERR_PARAMETER, "null output pointer");
    return guarded([&] {
        ssde::MollifierFamily family =
            variant == 0
                ? ssde::MollifierFamily::komatsu(ssde::Modulus::linear(rho_coefficient), alpha, m)
                : ssde::MollifierFamily::bo(alpha, m);
        *out = new ssde_mollifier{family.build(m)};
    });
}

ssde_status ssde_mollifier_phi(const ssde_mollifier* moll, double x, double* out) {
    if (!moll || !out)
        return fail(SSDE_ERR_PARAMETER, "null argument to ssde_mollifier_phi");
    return guarded([&] { *out = moll->impl.phi(x); });
}

ssde_status ssde_mollifier_u(const ssde_mollifier* moll, double x, double* out) {
    if (!moll || !out)
        return fail(SSDE_ERR_PARAMETER, "null argument to ssde_mollifier_u");
    return guarded([&] { *out = moll->impl.u(x); });
}

void ssde_mollifier_destroy(ssde_mollifier* moll) { delete moll; }

ssde_status ssde_mollifier_support(const ssde_mollifier* moll, double* a_m, double* a_m_minus_1) {
    if (!moll)
        return fail(SSDE_ERR_PARAMETER, "null mollifier");
    if (a_m)
        *a_m = moll->impl.a_lo();
    if (a_m_minus_1)
        *a_m_minus_1 = moll->impl.a_hi();
    return SSDE_OK;
}

} // extern "C"
