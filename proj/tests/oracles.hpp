#pragma once

// Reference computations used only by the tests. None of them calls into the
// library's numerical routines.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

// Adaptive Gauss-Kronrod (7/15) quadrature.
inline double gk15(const std::function<double(double)>& f, double a, double b, double& err)
{
    static constexpr std::array<double, 8> xk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                              0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                              0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                              0.207784955007898467600689403773245, 0.0};
    static constexpr std::array<double, 8> wk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                              0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                              0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                              0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = wk[7] * fc;
    double gauss = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double v = f(c - h * xk[i]) + f(c + h * xk[i]);
        kronrod += wk[i] * v;
        if (i % 2 == 1) gauss += wg[i / 2] * v;
    }
    err = std::abs((kronrod - gauss) * h);
    return kronrod * h;
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 0)
{
    double err = 0.0;
    const double whole = gk15(f, a, b, err);
    if (err <= tol || depth > 40) return whole;
    const double m = 0.5 * (a + b);
    return integrate(f, a, m, 0.5 * tol, depth + 1) + integrate(f, m, b, 0.5 * tol, depth + 1);
}

inline double beta_density(double x, double a, double b)
{
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    return std::exp(log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
}

// Splits at the mode so the peak of a concentrated density is never straddled
// by a single coarse panel.
inline double beta_mass(double a, double b, double lo, double hi)
{
    if (hi <= lo) return 0.0;
    const auto f = [a, b](double x) { return beta_density(x, a, b); };
    std::vector<double> cuts{lo, hi};
    if (a > 1.0 && b > 1.0) {
        const double mode = (a - 1.0) / (a + b - 2.0);
        if (mode > lo && mode < hi) cuts.insert(cuts.begin() + 1, mode);
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1]);
    return total;
}

// Stage-1 rule applied to quadrature masses. Codes follow the engine's order:
// 0 de-escalate and exclude, 1 de-escalate, 2 stay, 3 escalate.
inline int stage1(int n, int x, double target, double eps1, double eps2, double gamma, double exclusion = 0.95,
                  double prior_a = 1.0, double prior_b = 1.0)
{
    const double a = prior_a + x;
    const double b = prior_b + (n - x);
    const double d1 = target - eps1;
    const double d2 = target + eps2;
    const double under = beta_mass(a, b, 0.0, d1) / d1;
    const double mid = beta_mass(a, b, d1, d2) / (d2 - d1);
    const double p_over = beta_mass(a, b, d2, 1.0);
    const double over = p_over / (1.0 - d2);
    int code = 1;
    double best = over;
    if (mid > best) {
        code = 2;
        best = mid;
    }
    if (under > best) code = 3;
    if (p_over >= gamma) code = std::min(code, 1);
    if (p_over >= exclusion) code = 0;
    return code;
}

struct Binomial {
    double x;
    double y;
    double n;
    double w;
};

inline double loglik(const std::vector<Binomial>& data, double a, double b)
{
    double ll = 0.0;
    for (const auto& d : data) {
        const double eta = a + b * d.x;
        // log p = -log(1+e^-eta), log(1-p) = -log(1+e^eta)
        const double log_p = -std::log1p(std::exp(-eta));
        const double log_q = -std::log1p(std::exp(eta));
        ll += d.w * (d.y * log_p + (d.n - d.y) * log_q);
    }
    return ll;
}

// Grid search followed by repeated zooming. The grid lives on a centred and
// scaled covariate so that one box fits every test dataset; the optimum is
// mapped back to the caller's scale.
inline std::pair<double, double> logistic_mle(std::vector<Binomial> data)
{
    double lo = data.front().x;
    double hi = lo;
    for (const auto& d : data) {
        lo = std::min(lo, d.x);
        hi = std::max(hi, d.x);
    }
    const double centre = 0.5 * (lo + hi);
    const double scale = 0.5 * (hi - lo);
    for (auto& d : data) d.x = (d.x - centre) / scale;

    double ca = 0.0;
    double cb = 0.0;
    double half = 12.0;
    const int steps = 60;
    while (half > 1e-10) {
        double best = -std::numeric_limits<double>::infinity();
        double ba = ca;
        double bb = cb;
        for (int i = -steps; i <= steps; ++i)
            for (int j = -steps; j <= steps; ++j) {
                const double a = ca + half * i / steps;
                const double b = cb + half * j / steps;
                const double ll = loglik(data, a, b);
                if (ll > best) {
                    best = ll;
                    ba = a;
                    bb = b;
                }
            }
        ca = ba;
        cb = bb;
        half *= 4.0 / steps;
    }
    return {ca - cb * centre / scale, cb / scale};
}

// Exhaustive minimum of sum w_i (r_i - v_i)^2 over nondecreasing v on the grid
// {0, step, 2 step, ..., 1}; dynamic programming enumerates the feasible set
// without listing it.
inline std::vector<double> isotonic_grid(const std::vector<double>& r, const std::vector<double>& w,
                                         double step = 1e-4)
{
    const int g = static_cast<int>(std::lround(1.0 / step));
    const std::size_t n = r.size();
    std::vector<std::vector<double>> cost(n, std::vector<double>(g + 1));
    std::vector<std::vector<int>> arg(n, std::vector<int>(g + 1));
    for (std::size_t i = 0; i < n; ++i) {
        double run_best = std::numeric_limits<double>::infinity();
        int run_arg = 0;
        for (int k = 0; k <= g; ++k) {
            if (i > 0 && cost[i - 1][k] < run_best) {
                run_best = cost[i - 1][k];
                run_arg = k;
            }
            const double v = k * step;
            cost[i][k] = w[i] * (r[i] - v) * (r[i] - v) + (i > 0 ? run_best : 0.0);
            arg[i][k] = run_arg;
        }
    }
    std::vector<double> out(n);
    int k = static_cast<int>(std::min_element(cost[n - 1].begin(), cost[n - 1].end()) - cost[n - 1].begin());
    for (std::size_t i = n; i-- > 0;) {
        out[i] = k * step;
        k = arg[i][k];
    }
    return out;
}

// 2x2 Cholesky draw from N(mean, cov).
inline std::array<double, 2> mvn2(std::mt19937_64& rng, std::array<double, 2> mean, double s00, double s01,
                                  double s11)
{
    std::normal_distribution<double> z;
    const double l00 = std::sqrt(s00);
    const double l10 = s01 / l00;
    const double l11 = std::sqrt(std::max(0.0, s11 - l10 * l10));
    const double z0 = z(rng);
    const double z1 = z(rng);
    return {mean[0] + l00 * z0, mean[1] + l10 * z0 + l11 * z1};
}

inline double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - i;
    return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
}

} // namespace oracle
