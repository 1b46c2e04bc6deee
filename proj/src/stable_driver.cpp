#include "stable_driver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace ssde {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_grid(const std::vector<double>& times) {
    if (times.size() < 2)
        throw GridError("time grid needs at least two knots");
    if (times.front() != 0.0)
        throw GridError("time grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw GridError("time grid must be strictly increasing");
}

} // namespace

void validate_sim_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ParameterError("alpha must lie in (1,2) for simulation");
}

std::vector<double> IncrementGrid::cumulative() const {
    std::vector<double> z(times.size(), 0.0);
    for (std::size_t k = 0; k < dz.size(); ++k)
        z[k + 1] = z[k] + dz[k];
    return z;
}

double sample_standard_stable(std::mt19937_64& stream, double alpha) {
    validate_sim_alpha(alpha);
    // Chambers-Mallows-Stuck, symmetric case (skewness 0):
    //   X = sin(alpha U) / cos(U)^{1/alpha} * (cos((1-alpha)U) / W)^{(1-alpha)/alpha}
    // with U uniform on (-pi/2, pi/2) and W unit exponential.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = kPi * (unif(stream) - 0.5);
    double w = -std::log1p(-unif(stream)); // Exp(1), avoids log(0)
    // Guard against w == 0 from the open-interval edge.
    if (w <= 0.0)
        w = std::numeric_limits<double>::min();
    double s = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
    double t = std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
    return s * t;
}

IncrementGrid sample_increments(ReplicationSeed seed, const StableParams& params,
                                const std::vector<double>& times) {
    validate_sim_alpha(params.alpha);
    validate_grid(times);
    if (times.back() != params.horizon)
        throw GridError("time grid must end at the horizon T");

    auto stream = make_stream(seed);
    IncrementGrid grid;
    grid.times = times;
    grid.seed = seed;
    grid.dz.resize(times.size() - 1);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        double dt = times[k + 1] - times[k];
        grid.dz[k] = std::pow(dt, 1.0 / params.alpha) * sample_standard_stable(stream, params.alpha);
    }
    return grid;
}

IncrementGrid coarsen(const IncrementGrid& fine, const std::vector<double>& coarse_times) {
    validate_grid(coarse_times);
    IncrementGrid out;
    out.times = coarse_times;
    out.seed = fine.seed;
    out.dz.resize(coarse_times.size() - 1);

    std::size_t j = 0; // index into fine.times
    if (fine.times.empty() || coarse_times.front() != fine.times.front())
        throw AlignmentError("coarse grid must start where the fine grid starts");
    for (std::size_t k = 0; k + 1 < coarse_times.size(); ++k) {
        double sum = 0.0;
        double target = coarse_times[k + 1];
        while (j < fine.dz.size() && fine.times[j + 1] <= target) {
            sum += fine.dz[j];
            ++j;
        }
        if (j > fine.dz.size() || fine.times[j] != target)
            throw AlignmentError("coarse grid is not a subset of the fine grid");
        out.dz[k] = sum;
    }
    return out;
}

namespace {

// int_0^inf exp(-s xi^alpha) dxi = Gamma(1 + 1/alpha) s^{-1/alpha}.
double exp_power_integral(double s, double alpha) {
    return boost::math::tgamma(1.0 + 1.0 / alpha) * std::pow(s, -1.0 / alpha);
}

} // namespace

double transition_density(double s, double a, double alpha) {
    if (!(s > 0.0))
        throw ParameterError("transition density requires s > 0");
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw ParameterError("transition density requires alpha in (0,2]");

    a = std::abs(a); // p_s is even in a
    if (a == 0.0)
        return exp_power_integral(s, alpha) / kPi;

    // Deep tail (s << a^alpha): the oscillatory integral cancels to a value
    // far below the integrand scale, so quadrature loses all relative
    // accuracy. Use the tail expansion
    //   p_s(a) = -(1/pi) sum_{k>=1} (-s)^k Gamma(alpha k + 1)
    //            sin(pi alpha k / 2) / (k! a^{alpha k + 1}),
    // whose k-th term is O((s/a^alpha)^k); four terms reach ~1e-16 here.
    if (s <= 1e-5 * std::pow(a, alpha)) {
        double sum = 0.0;
        double sk = 1.0; // (-s)^k / k!
        for (int k = 1; k <= 4; ++k) {
            sk *= -s / k;
            sum += sk * boost::math::tgamma(alpha * k + 1.0) *
                   std::sin(kPi * alpha * k / 2.0) / std::pow(a, alpha * k + 1.0);
        }
        return -sum / kPi;
    }

    // Cutoff beyond which exp(-s xi^alpha) < 1e-16; the remaining tail of the
    // integrand is bounded by the exponential envelope and negligible.
    double cutoff = std::pow(16.0 * std::numbers::ln10 / s, 1.0 / alpha);
    if (a * cutoff < 30.0) {
        // Few oscillations: plain adaptive quadrature on [0, cutoff].
        auto f = [&](double xi) { return std::exp(-s * std::pow(xi, alpha)) * std::cos(a * xi); };
        double err = 0.0;
        double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, 0.0, cutoff, 12, 1e-10, &err);
        if (!(std::isfinite(v)))
            throw NumericalError("transition density quadrature failed to converge");
        return v / kPi;
    }

    // Oscillatory regime: Ooura-Mori Fourier cosine quadrature.
    static thread_local boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-10);
    auto g = [&](double xi) { return std::exp(-s * std::pow(xi, alpha)); };
    auto [v, rel_err] = integrator.integrate(g, a);
    if (!std::isfinite(v))
        throw NumericalError("transition density Fourier quadrature failed to converge");
    if (rel_err > 1e-6) {
        // Relative accuracy is unattainable when the oscillations cancel to a
        // value exponentially below the integrand scale (e.g. the Gaussian
        // corner alpha = 2 far from the mode). Accept the result if it is
        // negligible against the mode height p_s(0); otherwise fail.
        double mode = exp_power_integral(s, alpha);
        if (std::abs(v) > 1e-7 * mode)
            throw NumericalError("transition density Fourier quadrature failed to converge");
        v = std::max(v, 0.0);
    }
    return v / kPi;
}

double integrated_density(double big_s, double a, double alpha) {
    if (!(big_s > 0.0))
        throw ParameterError("integrated density requires S > 0");
    a = std::abs(a);
    if (a == 0.0) {
        // Closed form: int_0^S Gamma(1+1/alpha) s^{-1/alpha} / pi ds.
        if (alpha <= 1.0)
            throw ParameterError("integrated density at a = 0 diverges for alpha <= 1");
        double q = 1.0 - 1.0 / alpha;
        return boost::math::tgamma(1.0 + 1.0 / alpha) * std::pow(big_s, q) / (q * kPi);
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double s) { return transition_density(s, a, alpha); };
    double v = ts.integrate(f, 0.0, big_s, 1e-8);
    if (!std::isfinite(v))
        throw NumericalError("integrated density quadrature failed to converge");
    return v;
}

IntegratedDensitySup integrated_density_sup(double alpha, double m_radius, double k_upper,
                                            double horizon, std::size_t grid_points) {
    if (!(m_radius > 0.0 && k_upper > 0.0 && horizon > 0.0))
        throw ParameterError("integrated_density_sup requires M, K, T > 0");
    if (grid_points < 2)
        throw ParameterError("integrated_density_sup needs at least two grid points");

    double big_s = std::pow(k_upper, alpha) * horizon;
    IntegratedDensitySup out;
    out.a_grid.resize(grid_points);
    out.values.resize(grid_points);
    double hi = m_radius + 1.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        double a = hi * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        out.a_grid[i] = a;
        out.values[i] = integrated_density(big_s, a, alpha);
        if (out.values[i] > out.value) {
            out.value = out.values[i];
            out.argmax = a;
        }
    }
    return out;
}

} // namespace ssde
