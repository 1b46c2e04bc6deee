#include "generator.hpp"

#include <cmath>
#include <array>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace ssde {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;
constexpr double kPi = std::numbers::pi;

// Clamped cubic spline on a uniform grid over [0, n h] that can evaluate the
// symmetric second difference s(a+y) + s(a-y) - 2 s(a) without cancellation.
// A C^2 piecewise cubic equals its leftmost-cell polynomial plus one-sided
// jumps J_k (t - t_k)_+^3 / 6, so differences can be formed term by term with
// the linear part factored out analytically.
class CubicTable {
public:
    CubicTable(std::vector<double> values, double h, double d_left, double d_right)
        : y_(std::move(values)), h_(h) {
        const std::size_t n = y_.size();
        // Tridiagonal system for the knot second derivatives, clamped ends.
        std::vector<double> diag(n, 4.0), rhs(n);
        diag.front() = diag.back() = 2.0;
        rhs[0] = 6.0 * ((y_[1] - y_[0]) / h - d_left) / h;
        for (std::size_t i = 1; i + 1 < n; ++i)
            rhs[i] = 6.0 * (y_[i - 1] - 2.0 * y_[i] + y_[i + 1]) / (h * h);
        rhs[n - 1] = 6.0 * (d_right - (y_[n - 1] - y_[n - 2]) / h) / h;
        m_.resize(n);
        std::vector<double> scratch(n);
        scratch[0] = 1.0 / diag[0];
        rhs[0] *= scratch[0];
        for (std::size_t i = 1; i < n; ++i) {
            double w = 1.0 / (diag[i] - scratch[i - 1]);
            scratch[i] = w;
            rhs[i] = (rhs[i] - rhs[i - 1]) * w;
        }
        m_[n - 1] = rhs[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            m_[i] = rhs[i] - scratch[i] * m_[i + 1];
    }

    double upper() const { return h_ * static_cast<double>(y_.size() - 1); }

    double eval(double z) const {
        auto [i, xi] = locate(z);
        double b = slope(i);
        double c3 = third(i);
        return y_[i] + xi * (b + xi * (0.5 * m_[i] + xi * c3 / 6.0));
    }

    double d1(double z) const {
        auto [i, xi] = locate(z);
        return slope(i) + xi * (m_[i] + 0.5 * xi * third(i));
    }

    double d2(double z) const {
        auto [i, xi] = locate(z);
        return m_[i] + xi * third(i);
    }

    // s(b) - s(a), accurate relative to the difference itself rather than to
    // the function values.
    double diff(double a, double b) const {
        if (b < a)
            return -diff(b, a);
        auto [ia, xia] = locate(a);
        double d = b - a;
        double base = d * (d1(a) + d * (0.5 * d2(a) + d * third(ia) / 6.0));
        auto [ib, xib] = locate(b);
        for (std::size_t k = ia + 1; k <= ib; ++k) {
            double t = b - static_cast<double>(k) * h_;
            base += (third(k) - third(k - 1)) * t * t * t / 6.0;
        }
        return base;
    }

private:
    std::pair<std::size_t, double> locate(double z) const {
        double pos = z / h_;
        auto i = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), y_.size() - 2);
        return {i, z - static_cast<double>(i) * h_};
    }

    double slope(std::size_t i) const {
        return (y_[i + 1] - y_[i]) / h_ - h_ * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    }

    double third(std::size_t i) const { return (m_[i + 1] - m_[i]) / h_; }

    std::vector<double> y_, m_;
    double h_;
};

// Stable |s+y|^p + |s-y|^p - 2 |s|^p: series in y/|s| once the naive form
// would cancel below its own noise.
double kernel_sym_diff(double s, double y, double p) {
    s = std::abs(s);
    double r = y / s;
    if (r < 1e-3) {
        double r2 = r * r;
        double c2 = p * (p - 1.0);
        double c4 = c2 * (p - 2.0) * (p - 3.0) / 12.0;
        double c6 = c4 * (p - 4.0) * (p - 5.0) / 30.0;
        return std::pow(s, p) * r2 * (c2 + r2 * (c4 + r2 * c6));
    }
    return std::pow(std::abs(s + y), p) + std::pow(std::abs(s - y), p) -
           2.0 * std::pow(s, p);
}

// Fast evaluator for u_m. The generator quadrature samples u_m tens of
// thousands of times per grid point, so the convolution integral cannot be
// recomputed on every call. Inside |z| <= 2 a_{m-1} (where the kernel cusp
// can sit in the support) u_m is tabulated on a dense uniform grid; outside,
// the integrand is smooth and a fixed Gauss rule over the exact convolution
// is cheap.
class PotentialTable {
public:
    PotentialTable(const Mollifier& moll, double alpha)
        : moll_(&moll), alpha_(alpha), pieces_(moll.breakpoints()) {
        // The hand-off point must sit well inside the table: a value jump at
        // the seam is magnified by y^{-1-alpha} when a query point lands on
        // it, so the seam may only be crossed at order-one distances.
        const double z0 = 2.0 * moll.a_hi() + 0.5;
        const double h = z0 / 16384.0;
        const std::size_t n = static_cast<std::size_t>(std::ceil(z0 / h)) + 8;
        std::vector<double> table(n);
        for (std::size_t i = 0; i < n; ++i)
            table[i] = moll.u(static_cast<double>(i) * h);
        double top = static_cast<double>(n - 1) * h;
        // u is even, so the left end is clamped flat; the right end slope
        // comes from a five-point stencil on the exact convolution.
        double d_right = (moll.u(top - 2.0 * h) - 8.0 * moll.u(top - h) +
                          8.0 * moll.u(top + h) - moll.u(top + 2.0 * h)) /
                         (12.0 * h);
        spline_.emplace(std::move(table), h, 0.0, d_right);
        switch_ = 2.0 * moll.a_hi() + 0.25;
        stable_top_ = spline_->upper() - 4.0 * h;
    }

    double operator()(double z) const {
        z = std::abs(z);
        if (z < switch_)
            return spline_->eval(z);
        return far_convolution([&](double w) {
            return std::pow(std::abs(z - w), alpha_ - 1.0) +
                   std::pow(z + w, alpha_ - 1.0);
        });
    }

    // Second derivative consistent with the tabulated values, so the Taylor
    // panel of the generator matches the function the mid panels sample.
    double d2(double z) const {
        z = std::abs(z);
        if (z < stable_top_)
            return spline_->d2(z);
        return moll_->u_d2(z);
    }

    // f(x+y) + f(x-y) - 2 f(x) for f(z) = u(|z|), formed without catastrophic
    // cancellation at small y.
    double sym_diff(double x, double y) const {
        double a = std::abs(x);
        if (a + y <= stable_top_)
            return spline_->diff(a, a + y) + spline_->diff(a, std::abs(a - y));
        if (a - y >= switch_) {
            double p = alpha_ - 1.0;
            return far_convolution([&](double w) {
                return kernel_sym_diff(a - w, y, p) + kernel_sym_diff(a + w, y, p);
            });
        }
        // Mixed region: only reachable at order-one y, where the naive form
        // loses nothing.
        return (*this)(a + y) + (*this)(std::abs(a - y)) - 2.0 * (*this)(a);
    }

private:
    // Integrate g against phi piecewise between the ramp joins: phi is only
    // C^2 across them and the join error would survive into second
    // differences of the result.
    double far_convolution(const std::function<double(double)>& g) const {
        auto integrand = [&](double w) { return moll_->phi(w) * g(w); };
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
            total += gauss<double, 64>::integrate(integrand, pieces_[i], pieces_[i + 1]);
        return total;
    }

    const Mollifier* moll_;
    double alpha_;
    std::array<double, 4> pieces_{};
    double switch_ = 0.0;
    double stable_top_ = 0.0;
    std::optional<CubicTable> spline_;
};

} // namespace

double k_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ParameterError("k_alpha requires alpha in (1,2)");
    return -2.0 * kPi / alpha / std::tan(alpha * kPi / 2.0);
}

GeneratorValue apply_generator(const SmoothFn& f, double x, double alpha,
                               const QuadratureSpec& spec) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ParameterError("apply_generator requires alpha in (1,2)");
    if (!(spec.inner_cutoff > 0.0) || !(spec.tolerance > 0.0 && spec.tolerance <= 1e-2))
        throw ParameterError("invalid quadrature spec");

    const double fx = f.value(x);
    // Spot-check the growth envelope at a few probe points.
    for (double probe : {x + 1.0, x - 1.0, x + spec.outer_cutoff, x - spec.outer_cutoff}) {
        double envelope = f.growth_c * (1.0 + std::pow(std::abs(probe), f.growth_exponent));
        if (std::abs(f.value(probe)) > envelope * (1.0 + 1e-9))
            throw NumericalError("growth envelope violated at probe point");
    }

    auto symmetrized = [&](double y) {
        double diff = f.sym_diff ? f.sym_diff(x, y)
                                 : f.value(x + y) + f.value(x - y) - 2.0 * fx;
        return diff * std::pow(y, -1.0 - alpha);
    };

    const double big_r = std::max(spec.outer_cutoff, std::abs(x) + 2.0);
    double err_total = 0.0;

    // Mid panels [y0, big_r], split at 1 so the adaptive quadrature does not
    // straddle widely different scales.
    auto mid_integral = [&](double lo, double hi) {
        double err = 0.0;
        double v = gauss_kronrod<double, 15>::integrate(symmetrized, lo, hi, 10,
                                                        spec.tolerance * 0.05, &err);
        err_total += err;
        return v;
    };

    // Far tail via t = 1/y: int_{R}^{inf} -> int_0^{1/R} g(1/t) t^{alpha-1} dt,
    // bounded near t = 0 by the growth envelope.
    auto tail_integrand = [&](double t) {
        double y = 1.0 / t;
        return (f.value(x + y) + f.value(x - y) - 2.0 * fx) * std::pow(t, alpha - 1.0);
    };
    double tail_err = 0.0;
    double tail = gauss_kronrod<double, 15>::integrate(tail_integrand, 0.0, 1.0 / big_r, 10,
                                                       spec.tolerance * 0.05, &tail_err);
    err_total += tail_err;

    // Inner panel: int_0^{y0} ~ f''(x) y0^{2-alpha} / (2 - alpha). Shrink y0
    // until the replaced-by-Taylor region stops mattering.
    const double fdd = f.d2(x);
    double y0 = spec.inner_cutoff;
    double mid = mid_integral(y0, std::min(1.0, big_r));
    if (big_r > 1.0)
        mid += mid_integral(1.0, big_r);
    // Below this scale the naive symmetrized difference cancels to rounding
    // noise and y^{-1-alpha} blows it back up, so refinement cannot resolve
    // more. A stable sym_diff pushes the floor much lower.
    const double noise_floor =
        f.sym_diff ? 1e-8
                   : std::pow(4e-14 * std::max(std::abs(fx), 1.0) / spec.tolerance,
                              1.0 / alpha);
    double near = fdd * std::pow(y0, 2.0 - alpha) / (2.0 - alpha);
    double total = near + mid + tail;
    double change = 0.0;
    bool converged = false;
    for (int pass = 0; pass < 24; ++pass) {
        double y1 = y0 * 0.5;
        if (y1 < noise_floor)
            break;
        mid += mid_integral(y1, y0);
        double near1 = fdd * std::pow(y1, 2.0 - alpha) / (2.0 - alpha);
        double total1 = near1 + mid + tail;
        change = std::abs(total1 - total);
        y0 = y1;
        near = near1;
        total = total1;
        if (change <= spec.tolerance * 0.1 * std::max(std::abs(total), 1.0)) {
            converged = true;
            break;
        }
    }
    err_total += change;
    if (!converged && change > 100.0 * spec.tolerance)
        throw NumericalError("inner panel refinement stalled; achieved change " +
                             std::to_string(change));

    return GeneratorValue{total, err_total};
}

IdentityReport verify_identity(const MollifierFamily& family, int m,
                               const std::vector<double>& x_grid, const QuadratureSpec& spec) {
    Mollifier moll = family.build(m);
    const double alpha = family.alpha;
    const double ka = k_alpha(alpha);

    PotentialTable u_table(moll, alpha);
    SmoothFn fn;
    fn.value = [&u_table](double z) { return u_table(z); };
    fn.d2 = [&u_table](double z) { return u_table.d2(z); };
    fn.sym_diff = [&u_table](double z, double y) { return u_table.sym_diff(z, y); };
    // Eq.-(6) sandwich: |u_m(z)| <= |z|^{alpha-1} + a_{m-1}^{alpha-1}.
    fn.growth_c = 1.0 + std::pow(moll.a_hi(), alpha - 1.0);
    fn.growth_exponent = alpha - 1.0;

    IdentityReport report;
    report.rows.reserve(x_grid.size());
    for (double x : x_grid) {
        GeneratorValue lhs = apply_generator(fn, x, alpha, spec);
        double rhs = ka * moll.phi(x);
        double rel = std::abs(lhs.value - rhs) / (1.0 + rhs);
        report.rows.push_back({x, lhs.value, rhs, rel});
        report.max_rel_err = std::max(report.max_rel_err, rel);
    }
    report.pass = report.max_rel_err <= report.tolerance;
    return report;
}

std::vector<double> identity_default_grid(double a_hi, std::size_t points) {
    std::vector<double> grid;
    grid.reserve(points);
    const std::vector<double> far = {-a_hi - 10.0, -a_hi - 1.0, a_hi + 1.0, a_hi + 10.0};
    std::size_t core = points - far.size();
    for (std::size_t i = 0; i < core; ++i)
        grid.push_back(-2.0 * a_hi + 4.0 * a_hi * static_cast<double>(i) /
                                         static_cast<double>(core - 1));
    grid.insert(grid.end(), far.begin(), far.end());
    return grid;
}

} // namespace ssde
