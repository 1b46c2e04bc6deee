#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ssde {

// Modulus of continuity rho controlling |sigma(t,x) - sigma(t,y)|^alpha.
// rho must be increasing with rho(0) = 0; admissibility means
// int_{0+} dx/rho(x) = infinity, witnessed by solve_a_sequence succeeding.
// inv_antideriv, when present, is an antiderivative of 1/rho and lets the
// mollifier construction evaluate mass coordinates in closed form.
struct Modulus {
    std::function<double(double)> rho;
    std::optional<std::function<double(double)>> inv_antideriv;
    // First and second derivatives of rho when known in closed form; the
    // mollifier falls back to finite differences of rho otherwise.
    std::optional<std::function<double(double)>> rho_d1;
    std::optional<std::function<double(double)>> rho_d2;
    std::string description;

    static Modulus linear(double coefficient = 1.0);
    static Modulus power(double coefficient, double exponent);
};

enum class ConditionKind { A, C };

// A coefficient function together with its condition certificate.
// Kind A carries the Komatsu data (bound m1, modulus); kind C carries the
// Belfadli-Ouknine data (lower d, upper k, increasing f with sup f_sup).
// Condition-C coefficients are time-homogeneous; sigma ignores t.
struct Coefficient {
    std::string id;
    std::function<double(double, double)> sigma; // (t, x)
    ConditionKind kind = ConditionKind::A;

    double m1 = 0.0;
    Modulus modulus;

    double d = 0.0;
    double k = 0.0;
    std::function<double(double)> f;
    double f_sup = 0.0;

    double operator()(double t, double x) const { return sigma(t, x); }
};

// An indexed family sigma_n with its limit and the declared sup-distance
// schedule eps_n (verified, never inferred).
struct CoefficientSequence {
    Coefficient limit;
    std::function<Coefficient(int)> member; // n >= 1
    std::function<double(int)> eps;         // declared bound on sup|sigma_n - sigma|^alpha
};

// --- a_m sequence ---------------------------------------------------------

// Solves int_{a_m}^{a_{m-1}} dx/rho(x) = m for m = 1..m_max with a_0 = 1.
// Residuals satisfy |integral - m| <= 1e-8 * m. Throws CertificateError if
// the modulus is inadmissible (the integral cannot reach m).
std::vector<double> solve_a_sequence(const Modulus& modulus, int m_max);

// --- mollifiers ------------------------------------------------------------

enum class MollifierVariant { Komatsu, BO };

// Decreasing a_m sequence for the BO track, a_m = a_{m-1} e^{-m}, which
// makes the cap integral per side equal to 1 for every m.
std::vector<double> bo_a_sequence(int m_max);

// A smooth even bump phi_m supported on (a_m, a_{m-1}) mirrored, lying under
// the cap 1/(m rho(x)) (Komatsu) or 1/(m x) (BO), with total integral 1.
// u(x) = |x|^{alpha-1} convolved with phi_m, plus its derivatives, evaluated
// by adaptive quadrature.
class Mollifier {
public:
    Mollifier(int m, double a_lo, double a_hi, MollifierVariant variant,
              const Modulus& modulus, double alpha);

    int index() const { return m_; }
    double a_lo() const { return a_lo_; }
    double a_hi() const { return a_hi_; }
    double alpha() const { return alpha_; }
    MollifierVariant variant() const { return variant_; }

    double phi(double x) const;
    double phi_d2(double x) const;
    // Support breakpoints {a_m, ramp end, ramp start, a_{m-1}}: phi is smooth
    // between consecutive entries and only C^2 across them.
    std::array<double, 4> breakpoints() const;
    double cap(double x) const; // the dominating envelope on the support
    double sup_phi() const;     // max of phi on a dense support grid

    // u_m and u_m'' via convolution with phi and phi'' (relative target 1e-8).
    double u(double x) const;
    double u_d2(double x) const;

private:
    double tau(double x) const;     // normalized cumulative cap mass in [0,1]
    double shape(double u) const;   // C^2 plateau on [0,1]
    double shape_d1(double u) const;
    double shape_d2(double u) const;

    int m_;
    double a_lo_, a_hi_;
    MollifierVariant variant_;
    double alpha_;
    std::function<double(double)> rho_;
    std::function<double(double)> rho_d1_, rho_d2_;
    std::function<double(double)> antideriv_; // antiderivative of 1/(cap denominator)
    double mass_lo_ = 0.0, mass_span_ = 0.0;  // cumulative mass normalization
    double scale_ = 0.0;                      // multiplier fixing int phi = 1
    mutable std::array<double, 4> breaks_{};  // cached support breakpoints
};

// The a_m sequence together with mollifiers built on demand.
struct MollifierFamily {
    std::vector<double> a; // a[0] = 1 > a[1] > ...
    MollifierVariant variant = MollifierVariant::Komatsu;
    Modulus modulus;
    double alpha = 1.5;

    static MollifierFamily komatsu(const Modulus& modulus, double alpha, int m_max);
    static MollifierFamily bo(double alpha, int m_max);

    Mollifier build(int m) const;
};

// Convenience wrapper matching the operation contract.
double convolve_u(const Mollifier& phi_m, double alpha, double x);

// --- certificate checking ---------------------------------------------------

struct SamplePlan {
    double t_max = 1.0;
    double x_lo = -5.0;
    double x_hi = 5.0;
    int pair_count = 10000;
    std::uint64_t seed = 0;
    // When checking a sequence: which members to sample.
    std::vector<int> members = {1, 2, 4, 8, 16};
};

struct CertificateReport {
    bool pass = false;
    // (check name, worst margin); PASS iff every margin >= -1e-12.
    std::vector<std::pair<std::string, double>> margins;
    std::string summary;
};

CertificateReport check_certificate(const Coefficient& coeff, double alpha,
                                    const SamplePlan& plan);
CertificateReport check_certificate(const CoefficientSequence& seq, double alpha,
                                    const SamplePlan& plan);

// --- built-in catalog --------------------------------------------------------

// Entries addressable by name from the CLI: "constant" (parameter value),
// "holder" (1 + min(|x|,1)^{1/alpha}, modulus 2^alpha x), "bo-step"
// (d + (k-d) 1_{x>0} with f a scaled copy of sigma).
Coefficient catalog_coefficient(const std::string& name, double alpha,
                                double param = 1.0, double d = 1.0, double k = 2.0);

} // namespace ssde
