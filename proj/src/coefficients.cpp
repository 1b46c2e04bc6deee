#include "coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "errors.hpp"

namespace ssde {

namespace {

using boost::math::quadrature::gauss_kronrod;

double quad(const std::function<double(double)>& f, double lo, double hi,
            double tol = 1e-11, unsigned depth = 17) {
    double err = 0.0;
    double v = gauss_kronrod<double, 15>::integrate(f, lo, hi, depth, tol, &err);
    if (!std::isfinite(v))
        throw NumericalError("quadrature failed to converge");
    return v;
}

} // namespace

Modulus Modulus::linear(double coefficient) {
    Modulus m;
    m.rho = [coefficient](double x) { return coefficient * x; };
    m.inv_antideriv = [coefficient](double x) { return std::log(x) / coefficient; };
    m.rho_d1 = [coefficient](double) { return coefficient; };
    m.rho_d2 = [](double) { return 0.0; };
    m.description = "rho(x) = " + std::to_string(coefficient) + " x";
    return m;
}

Modulus Modulus::power(double coefficient, double exponent) {
    Modulus m;
    m.rho = [coefficient, exponent](double x) { return coefficient * std::pow(x, exponent); };
    if (exponent == 1.0) {
        m.inv_antideriv = [coefficient](double x) { return std::log(x) / coefficient; };
    } else {
        m.inv_antideriv = [coefficient, exponent](double x) {
            return std::pow(x, 1.0 - exponent) / (coefficient * (1.0 - exponent));
        };
    }
    m.rho_d1 = [coefficient, exponent](double x) {
        return coefficient * exponent * std::pow(x, exponent - 1.0);
    };
    m.rho_d2 = [coefficient, exponent](double x) {
        return coefficient * exponent * (exponent - 1.0) * std::pow(x, exponent - 2.0);
    };
    m.description = "rho(x) = " + std::to_string(coefficient) + " x^" + std::to_string(exponent);
    return m;
}

// --- a_m sequence ------------------------------------------------------------

std::vector<double> solve_a_sequence(const Modulus& modulus, int m_max) {
    if (m_max < 1)
        throw ParameterError("solve_a_sequence requires m_max >= 1");
    if (!modulus.rho)
        throw ParameterError("modulus has no rho callable");

    auto integral = [&](double lo, double hi) {
        if (modulus.inv_antideriv) {
            const auto& r = *modulus.inv_antideriv;
            return r(hi) - r(lo);
        }
        return quad([&](double x) { return 1.0 / modulus.rho(x); }, lo, hi);
    };

    std::vector<double> a(static_cast<std::size_t>(m_max) + 1);
    a[0] = 1.0;
    for (int m = 1; m <= m_max; ++m) {
        double hi = a[m - 1];
        double target = static_cast<double>(m);
        // Bracket: halve until the integral reaches m.
        double lo = hi * 0.5;
        while (integral(lo, hi) < target) {
            lo *= 0.5;
            if (lo < 1e-300)
                throw CertificateError(
                    "modulus is inadmissible: int dx/rho(x) stays below m near 0");
        }
        double bracket_hi = std::min(hi, lo * 2.0);
        auto g = [&](double x) { return integral(x, hi) - target; };
        auto tol = [](double l, double r) { return r - l <= l * 1e-14; };
        std::uintmax_t iters = 200;
        auto [rl, rr] = boost::math::tools::toms748_solve(g, lo, bracket_hi, tol, iters);
        double root = 0.5 * (rl + rr);
        double residual = std::abs(integral(root, hi) - target);
        if (residual > 1e-8 * target)
            throw NumericalError("a_m residual exceeds tolerance");
        a[m] = root;
    }
    return a;
}

std::vector<double> bo_a_sequence(int m_max) {
    if (m_max < 1)
        throw ParameterError("bo_a_sequence requires m_max >= 1");
    std::vector<double> a(static_cast<std::size_t>(m_max) + 1);
    a[0] = 1.0;
    for (int m = 1; m <= m_max; ++m)
        a[m] = a[m - 1] * std::exp(-static_cast<double>(m));
    return a;
}

// --- mollifier ----------------------------------------------------------------

namespace {

// C^2 smoothstep: 0 at 0, 1 at 1, first and second derivatives vanish at both ends.
double smoothstep5(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep5_d1(double u) {
    if (u <= 0.0 || u >= 1.0)
        return 0.0;
    double w = u * (1.0 - u);
    return 30.0 * w * w;
}

double smoothstep5_d2(double u) {
    if (u <= 0.0 || u >= 1.0)
        return 0.0;
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

constexpr double kRampFraction = 0.1; // fraction of the mass coordinate spent ramping

// Numeric antiderivative table for caps without a closed form: log-spaced
// cumulative quadrature with C^1 monotone Hermite interpolation (slopes are
// the exact integrand values).
struct CumulativeTable {
    std::vector<double> x, g, slope;

    double eval(double xq) const {
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        std::size_t i = std::clamp<std::size_t>(
            static_cast<std::size_t>(it - x.begin()), 1, x.size() - 1) - 1;
        double h = x[i + 1] - x[i];
        double t = (xq - x[i]) / h;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * g[i] + h10 * h * slope[i] + h01 * g[i + 1] + h11 * h * slope[i + 1];
    }
};

std::function<double(double)> make_numeric_antideriv(const std::function<double(double)>& f,
                                                     double lo, double hi) {
    auto table = std::make_shared<CumulativeTable>();
    constexpr std::size_t n = 512;
    table->x.resize(n + 1);
    table->g.resize(n + 1);
    table->slope.resize(n + 1);
    double lr = std::log(hi / lo);
    for (std::size_t i = 0; i <= n; ++i) {
        table->x[i] = lo * std::exp(lr * static_cast<double>(i) / n);
        table->slope[i] = f(table->x[i]);
    }
    table->g[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        table->g[i + 1] = table->g[i] + quad(f, table->x[i], table->x[i + 1], 1e-12, 10);
    return [table](double x) { return table->eval(x); };
}

} // namespace

Mollifier::Mollifier(int m, double a_lo, double a_hi, MollifierVariant variant,
                     const Modulus& modulus, double alpha)
    : m_(m), a_lo_(a_lo), a_hi_(a_hi), variant_(variant), alpha_(alpha) {
    if (!(a_lo > 0.0 && a_lo < a_hi))
        throw ParameterError("mollifier support requires 0 < a_m < a_{m-1}");
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ParameterError("mollifier potential requires alpha in (1,2)");
    double md = static_cast<double>(m);
    if (variant == MollifierVariant::Komatsu) {
        if (!modulus.rho)
            throw ParameterError("Komatsu mollifier requires a modulus");
        auto rho = modulus.rho;
        rho_ = [rho, md](double x) { return md * rho(x); };
        if (modulus.rho_d1) {
            auto r1 = *modulus.rho_d1;
            rho_d1_ = [r1, md](double x) { return md * r1(x); };
        } else {
            rho_d1_ = [rho, md](double x) {
                double h = 1e-5 * x;
                return md * (rho(x + h) - rho(x - h)) / (2.0 * h);
            };
        }
        if (modulus.rho_d2) {
            auto r2 = *modulus.rho_d2;
            rho_d2_ = [r2, md](double x) { return md * r2(x); };
        } else {
            rho_d2_ = [rho, md](double x) {
                double h = 1e-4 * x;
                return md * (rho(x + h) - 2.0 * rho(x) + rho(x - h)) / (h * h);
            };
        }
        if (modulus.inv_antideriv) {
            auto r = *modulus.inv_antideriv;
            antideriv_ = [r, md](double x) { return r(x) / md; };
        } else {
            antideriv_ = make_numeric_antideriv([this](double x) { return 1.0 / rho_(x); },
                                                a_lo, a_hi);
        }
    } else {
        rho_ = [md](double x) { return md * x; };
        rho_d1_ = [md](double) { return md; };
        rho_d2_ = [](double) { return 0.0; };
        antideriv_ = [md](double x) { return std::log(x) / md; };
    }
    mass_lo_ = antideriv_(a_lo_);
    mass_span_ = antideriv_(a_hi_) - mass_lo_;
    if (!(mass_span_ > 0.0))
        throw NumericalError("cap mass over the support is not positive");

    double shape_integral = 1.0 - kRampFraction; // int_0^1 shape(u) du
    scale_ = 1.0 / (2.0 * mass_span_ * shape_integral);
    if (scale_ > 1.0 + 1e-12)
        throw FeasibilityError(
            "cap integral over the support is too small to normalize phi; "
            "decrease a_m (widen the support) so the cap mass per side reaches "
            + std::to_string(1.0 / (2.0 * shape_integral)));

}

double Mollifier::shape(double u) const {
    if (u <= 0.0 || u >= 1.0)
        return 0.0;
    if (u < kRampFraction)
        return smoothstep5(u / kRampFraction);
    if (u > 1.0 - kRampFraction)
        return smoothstep5((1.0 - u) / kRampFraction);
    return 1.0;
}

double Mollifier::shape_d1(double u) const {
    if (u <= 0.0 || u >= 1.0)
        return 0.0;
    if (u < kRampFraction)
        return smoothstep5_d1(u / kRampFraction) / kRampFraction;
    if (u > 1.0 - kRampFraction)
        return -smoothstep5_d1((1.0 - u) / kRampFraction) / kRampFraction;
    return 0.0;
}

double Mollifier::shape_d2(double u) const {
    if (u <= 0.0 || u >= 1.0)
        return 0.0;
    if (u < kRampFraction)
        return smoothstep5_d2(u / kRampFraction) / (kRampFraction * kRampFraction);
    if (u > 1.0 - kRampFraction)
        return smoothstep5_d2((1.0 - u) / kRampFraction) / (kRampFraction * kRampFraction);
    return 0.0;
}

double Mollifier::tau(double x) const {
    return (antideriv_(x) - mass_lo_) / mass_span_;
}

double Mollifier::cap(double x) const { return 1.0 / rho_(std::abs(x)); }

double Mollifier::phi(double x) const {
    double ax = std::abs(x);
    if (ax <= a_lo_ || ax >= a_hi_)
        return 0.0;
    return scale_ * shape(tau(ax)) / rho_(ax);
}

double Mollifier::phi_d2(double x) const {
    // phi = scale * S(tau(x)) * c(x) with c = 1/rho_ and tau' = c / mass_span,
    // so phi'' = scale * (S'' c^3 / M^2 + 3 S' c c' / M + S c'') with M the
    // mass span. Closed form: finite differences of the piecewise shape leak
    // O(h) errors at the joins, which the u'' convolution does not forgive.
    double ax = std::abs(x);
    if (ax <= a_lo_ || ax >= a_hi_)
        return 0.0;
    double r = rho_(ax);
    double r1 = rho_d1_(ax);
    double r2 = rho_d2_(ax);
    double c = 1.0 / r;
    double c1 = -r1 / (r * r);
    double c2 = (2.0 * r1 * r1 - r * r2) / (r * r * r);
    double t = tau(ax);
    double M = mass_span_;
    return scale_ * (shape_d2(t) * c * c * c / (M * M) + 3.0 * shape_d1(t) * c * c1 / M +
                     shape(t) * c2);
}

std::array<double, 4> Mollifier::breakpoints() const {
    if (breaks_[3] > 0.0)
        return breaks_;
    auto invert = [&](double target_tau) {
        auto g = [&](double x) { return tau(x) - target_tau; };
        auto tol = [](double l, double r) { return r - l <= l * 1e-14; };
        std::uintmax_t iters = 200;
        auto [lo, hi] = boost::math::tools::toms748_solve(g, a_lo_, a_hi_, tol, iters);
        return 0.5 * (lo + hi);
    };
    breaks_ = {a_lo_, invert(kRampFraction), invert(1.0 - kRampFraction), a_hi_};
    return breaks_;
}

double Mollifier::sup_phi() const {
    double best = 0.0;
    constexpr int n = 2048;
    for (int i = 0; i <= n; ++i) {
        double x = a_lo_ + (a_hi_ - a_lo_) * static_cast<double>(i) / n;
        best = std::max(best, phi(x));
    }
    return best;
}

namespace {

// Convolution of |.|^{alpha-1} with a compactly supported integrand g over
// the support (mirrored), split at the kernel cusp and at the given interior
// join points. tanh-sinh handles the algebraic cusp at a panel end with
// near-machine accuracy, and fixed panel geometry keeps the quadrature error
// a smooth function of x: downstream spline tables differentiate this result
// three times, so point-to-point noise is far more damaging than bias.
double convolve_kernel(const std::function<double(double)>& g, double alpha, double x,
                       const std::array<double, 4>& joins) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    auto k = [alpha, x](double y) { return std::pow(std::abs(x - y), alpha - 1.0); };
    auto piece = [&](double sign) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < joins.size(); ++i) {
            std::array<double, 3> cuts{sign * joins[i], sign * joins[i + 1], 0.0};
            std::size_t n = 2;
            double lo = std::min(cuts[0], cuts[1]);
            double hi = std::max(cuts[0], cuts[1]);
            cuts[0] = lo;
            cuts[1] = hi;
            if (x > lo && x < hi) {
                cuts[1] = x;
                cuts[2] = hi;
                n = 3;
            }
            for (std::size_t j = 0; j + 1 < n; ++j)
                total += ts.integrate([&](double y) { return k(y) * g(y); }, cuts[j],
                                      cuts[j + 1], 1e-12);
        }
        return total;
    };
    return piece(-1.0) + piece(1.0);
}

} // namespace

double Mollifier::u(double x) const {
    return convolve_kernel([this](double y) { return phi(y); }, alpha_, x, breakpoints());
}

double Mollifier::u_d2(double x) const {
    // Differentiation passed onto the bump: u_m'' = |.|^{alpha-1} * phi'',
    // which keeps the kernel continuous.
    return convolve_kernel([this](double y) { return phi_d2(y); }, alpha_, x, breakpoints());
}

double convolve_u(const Mollifier& phi_m, double alpha, double x) {
    return convolve_kernel([&phi_m](double y) { return phi_m.phi(y); }, alpha, x,
                           phi_m.breakpoints());
}

MollifierFamily MollifierFamily::komatsu(const Modulus& modulus, double alpha, int m_max) {
    MollifierFamily f;
    f.a = solve_a_sequence(modulus, m_max);
    f.variant = MollifierVariant::Komatsu;
    f.modulus = modulus;
    f.alpha = alpha;
    return f;
}

MollifierFamily MollifierFamily::bo(double alpha, int m_max) {
    MollifierFamily f;
    f.a = bo_a_sequence(m_max);
    f.variant = MollifierVariant::BO;
    f.alpha = alpha;
    return f;
}

Mollifier MollifierFamily::build(int m) const {
    if (m < 1 || static_cast<std::size_t>(m) >= a.size())
        throw ParameterError("mollifier index m outside the built a-sequence");
    return Mollifier(m, a[m], a[m - 1], variant, modulus, alpha);
}

// --- certificate checking -------------------------------------------------------

namespace {

void check_one(const Coefficient& c, double alpha, const SamplePlan& plan,
               const std::string& prefix, std::vector<std::pair<std::string, double>>& margins) {
    std::mt19937_64 gen(plan.seed);
    std::uniform_real_distribution<double> ut(0.0, plan.t_max);
    std::uniform_real_distribution<double> ux(plan.x_lo, plan.x_hi);

    if (c.kind == ConditionKind::A) {
        double bound = std::numeric_limits<double>::infinity();
        double mod = std::numeric_limits<double>::infinity();
        for (int i = 0; i < plan.pair_count; ++i) {
            double t = ut(gen), x = ux(gen), y = ux(gen);
            bound = std::min(bound, c.m1 - std::abs(c(t, x)));
            bound = std::min(bound, c.m1 - std::abs(c(t, y)));
            mod = std::min(mod, c.modulus.rho(std::abs(x - y)) -
                                    std::pow(std::abs(c(t, x) - c(t, y)), alpha));
        }
        margins.emplace_back(prefix + "bound |sigma| <= M1", bound);
        margins.emplace_back(prefix + "modulus domination", mod);
    } else {
        double lower = std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        double fdom = std::numeric_limits<double>::infinity();
        double finc = std::numeric_limits<double>::infinity();
        double fsup = std::numeric_limits<double>::infinity();
        for (int i = 0; i < plan.pair_count; ++i) {
            double x = ux(gen), y = ux(gen);
            double sx = c(0.0, x), sy = c(0.0, y);
            lower = std::min({lower, sx - c.d, sy - c.d});
            upper = std::min({upper, c.k - sx, c.k - sy});
            double fx = c.f(x), fy = c.f(y);
            fdom = std::min(fdom, std::abs(fx - fy) - std::pow(std::abs(sx - sy), alpha));
            finc = std::min(finc, x <= y ? fy - fx : fx - fy);
            fsup = std::min({fsup, c.f_sup - std::abs(fx), c.f_sup - std::abs(fy)});
        }
        margins.emplace_back(prefix + "lower bound d <= sigma", lower);
        margins.emplace_back(prefix + "upper bound sigma <= K", upper);
        margins.emplace_back(prefix + "f domination", fdom);
        margins.emplace_back(prefix + "f increasing", finc);
        margins.emplace_back(prefix + "|f| <= f_sup", fsup);
    }
}

CertificateReport finalize(std::vector<std::pair<std::string, double>> margins) {
    CertificateReport report;
    report.margins = std::move(margins);
    report.pass = true;
    double worst = std::numeric_limits<double>::infinity();
    std::string worst_name;
    for (const auto& [name, margin] : report.margins) {
        if (margin < -1e-12)
            report.pass = false;
        if (margin < worst) {
            worst = margin;
            worst_name = name;
        }
    }
    report.summary = std::string(report.pass ? "PASS" : "FAIL") + "; worst margin " +
                     std::to_string(worst) + " (" + worst_name + ")";
    return report;
}

} // namespace

CertificateReport check_certificate(const Coefficient& coeff, double alpha,
                                    const SamplePlan& plan) {
    std::vector<std::pair<std::string, double>> margins;
    check_one(coeff, alpha, plan, "", margins);
    return finalize(std::move(margins));
}

CertificateReport check_certificate(const CoefficientSequence& seq, double alpha,
                                    const SamplePlan& plan) {
    std::vector<std::pair<std::string, double>> margins;
    check_one(seq.limit, alpha, plan, "limit: ", margins);
    for (int n : plan.members) {
        Coefficient member = seq.member(n);
        check_one(member, alpha, plan, "n=" + std::to_string(n) + ": ", margins);
        // Eq.-(15)-style sup-distance check against the declared schedule.
        std::mt19937_64 gen(plan.seed);
        std::uniform_real_distribution<double> ut(0.0, plan.t_max);
        std::uniform_real_distribution<double> ux(plan.x_lo, plan.x_hi);
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < plan.pair_count; ++i) {
            double t = ut(gen), x = ux(gen);
            double dist = std::pow(std::abs(member(t, x) - seq.limit(t, x)), alpha);
            worst = std::min(worst, seq.eps(n) - dist);
        }
        margins.emplace_back("n=" + std::to_string(n) + ": eps schedule", worst);
    }
    for (std::size_t i = 0; i + 1 < plan.members.size(); ++i)
        margins.emplace_back("eps decreasing", seq.eps(plan.members[i]) -
                                                    seq.eps(plan.members[i + 1]));
    return finalize(std::move(margins));
}

// --- catalog -----------------------------------------------------------------

Coefficient catalog_coefficient(const std::string& name, double alpha, double param,
                                double d, double k) {
    Coefficient c;
    c.id = name;
    if (name == "constant") {
        c.kind = ConditionKind::A;
        c.sigma = [param](double, double) { return param; };
        c.m1 = std::abs(param);
        c.modulus = Modulus::linear(1.0);
    } else if (name == "holder") {
        // 1 + min(|x|,1)^{1/alpha}; |a^{1/alpha} - b^{1/alpha}|^alpha <= |a-b|
        // on [0,1], so rho(x) = 2^alpha x dominates with slack.
        c.kind = ConditionKind::A;
        double inv_alpha = 1.0 / alpha;
        c.sigma = [inv_alpha](double, double x) {
            return 1.0 + std::pow(std::min(std::abs(x), 1.0), inv_alpha);
        };
        c.m1 = 2.0;
        c.modulus = Modulus::linear(std::pow(2.0, alpha));
    } else if (name == "bo-step") {
        c.kind = ConditionKind::C;
        c.d = d;
        c.k = k;
        c.sigma = [d, k](double, double x) { return x > 0.0 ? k : d; };
        double scale = std::pow(k - d, alpha - 1.0);
        c.f = [d, k, scale](double x) { return scale * (x > 0.0 ? k : d); };
        c.f_sup = scale * k;
    } else if (name == "bo-constant") {
        if (!(d <= param && param <= k))
            throw ParameterError("bo-constant requires d <= value <= k");
        c.kind = ConditionKind::C;
        c.d = d;
        c.k = k;
        c.sigma = [param](double, double) { return param; };
        c.f = [](double x) { return 0.5 * (1.0 + std::tanh(x)); };
        c.f_sup = 1.0;
    } else {
        throw ParameterError("unknown catalog coefficient: " + name);
    }
    return c;
}

} // namespace ssde
