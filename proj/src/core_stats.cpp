#include "doseopt/core_stats.hpp"

#include "doseopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace doseopt {

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double x, double a, double b)
{
    constexpr int max_iterations = 100000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double log_beta_function(double a, double b)
{
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double softplus(double z)
{
    return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

void check_probability_open(double p, const char* what)
{
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError(std::string(what) + " must lie in (0, 1)");
}

bool invert2(const Matrix2& m, Matrix2& out)
{
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double scale = std::fabs(m[0][0] * m[1][1]) + std::fabs(m[0][1] * m[1][0]);
    if (!(std::fabs(det) > 1e-14 * scale) || !std::isfinite(det)) return false;
    out[0][0] = m[1][1] / det;
    out[1][1] = m[0][0] / det;
    out[0][1] = -m[0][1] / det;
    out[1][0] = -m[1][0] / det;
    return true;
}

struct Standardized {
    double u = 0.0;
    double y = 0.0;
    double n = 0.0;
    double w = 0.0;
};

struct Moments {
    double loglik = 0.0;
    std::array<double, 2> score{};
    Matrix2 info{};
};

Moments evaluate_standardized(const std::vector<Standardized>& obs, double alpha, double beta)
{
    Moments m;
    for (const auto& o : obs) {
        const double eta = alpha + beta * o.u;
        const double p = inverse_logit(eta);
        m.loglik += o.w * (-o.y * softplus(-eta) - (o.n - o.y) * softplus(eta));
        const double resid = o.w * (o.y - o.n * p);
        m.score[0] += resid;
        m.score[1] += resid * o.u;
        const double v = o.w * o.n * p * (1.0 - p);
        m.info[0][0] += v;
        m.info[0][1] += v * o.u;
        m.info[1][1] += v * o.u * o.u;
    }
    m.info[1][0] = m.info[0][1];
    return m;
}

// 1-D (quasi-)separation: all responses sit on one side of all non-responses,
// or one of the two outcome classes is empty. No finite maximizer exists.
bool is_separated(const std::vector<Standardized>& obs)
{
    double event_min = std::numeric_limits<double>::infinity();
    double event_max = -event_min;
    double none_min = event_min;
    double none_max = -event_min;
    for (const auto& o : obs) {
        if (o.y > 0) {
            event_min = std::min(event_min, o.u);
            event_max = std::max(event_max, o.u);
        }
        if (o.n - o.y > 0) {
            none_min = std::min(none_min, o.u);
            none_max = std::max(none_max, o.u);
        }
    }
    if (!std::isfinite(event_min) || !std::isfinite(none_min)) return true;
    return none_max <= event_min || event_max <= none_min;
}

} // namespace

void validate(const BetaParams& params)
{
    if (!(params.alpha > 0.0 && std::isfinite(params.alpha)) || !(params.beta > 0.0 && std::isfinite(params.beta)))
        throw ArgumentError("beta shape parameters must be finite and positive");
}

BetaParams beta_posterior(const BetaParams& prior, std::uint64_t events, std::uint64_t non_events)
{
    validate(prior);
    return {prior.alpha + static_cast<double>(events), prior.beta + static_cast<double>(non_events)};
}

double regularized_incomplete_beta(double x, double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete beta requires positive shapes");
    if (std::isnan(x)) throw ArgumentError("incomplete beta evaluated at NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta_function(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
    return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double beta_interval_prob(const BetaParams& params, double lo, double hi)
{
    validate(params);
    if (!(lo >= 0.0 && lo <= 1.0) || !(hi >= 0.0 && hi <= 1.0))
        throw ArgumentError("interval endpoints must lie in [0, 1]");
    if (lo > hi) throw ArgumentError("interval lower endpoint exceeds upper endpoint");
    if (lo == hi) return 0.0;
    // Work in whichever tail keeps both terms small.
    double p;
    if (lo > params.mean())
        p = regularized_incomplete_beta(1.0 - lo, params.beta, params.alpha) -
            regularized_incomplete_beta(1.0 - hi, params.beta, params.alpha);
    else
        p = regularized_incomplete_beta(hi, params.alpha, params.beta) -
            regularized_incomplete_beta(lo, params.alpha, params.beta);
    return std::clamp(p, 0.0, 1.0);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw ArgumentError("normal quantile requires p in [0, 1]");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double logit(double p)
{
    check_probability_open(p, "logit argument");
    return std::log(p) - std::log1p(-p);
}

double inverse_logit(double eta)
{
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double LogisticCurve::transformed(double x) const
{
    if (transform == CovariateTransform::NaturalLog) {
        if (!(x > 0.0)) throw ArgumentError("log-transformed covariate must be positive");
        return std::log(x);
    }
    return x;
}

double weighted_log_likelihood(std::span<const BinomialObservation> data, const LogisticCurve& curve)
{
    double ll = 0.0;
    for (const auto& o : data) {
        if (o.weight == 0.0 || o.total == 0) continue;
        const double eta = curve.linear_predictor(o.covariate);
        const double y = static_cast<double>(o.responders);
        const double n = static_cast<double>(o.total);
        ll += o.weight * (-y * softplus(-eta) - (n - y) * softplus(eta));
    }
    return ll;
}

std::array<double, 2> logistic_score(std::span<const BinomialObservation> data, const LogisticCurve& curve)
{
    std::array<double, 2> g{};
    for (const auto& o : data) {
        if (o.weight == 0.0 || o.total == 0) continue;
        const double t = curve.transformed(o.covariate);
        const double p = inverse_logit(curve.intercept + curve.slope * t);
        const double resid =
            o.weight * (static_cast<double>(o.responders) - static_cast<double>(o.total) * p);
        g[0] += resid;
        g[1] += resid * t;
    }
    return g;
}

FitResult fit_logistic_weighted(std::span<const BinomialObservation> data, CovariateTransform transform,
                                const LogisticFitOptions& options)
{
    const LogisticCurve probe{0.0, 0.0, transform};
    std::vector<double> t;
    std::vector<const BinomialObservation*> used;
    for (const auto& o : data) {
        if (o.responders > o.total) throw ArgumentError("responders exceed total");
        if (!(o.weight >= 0.0 && o.weight <= 1.0)) throw ArgumentError("observation weight must lie in [0, 1]");
        if (!std::isfinite(o.covariate)) throw ArgumentError("covariate must be finite");
        if (o.weight == 0.0 || o.total == 0) continue;
        t.push_back(probe.transformed(o.covariate));
        used.push_back(&o);
    }
    if (std::set<double>(t.begin(), t.end()).size() < 2)
        throw DegenerateDesignError("logistic fit needs at least two distinct positively weighted covariates");

    double mass = 0.0;
    double centre = 0.0;
    for (std::size_t i = 0; i < used.size(); ++i) {
        const double m = used[i]->weight * static_cast<double>(used[i]->total);
        mass += m;
        centre += m * t[i];
    }
    centre /= mass;
    double half_range = 0.0;
    for (double ti : t) half_range = std::max(half_range, std::fabs(ti - centre));

    std::vector<Standardized> obs;
    obs.reserve(used.size());
    double events = 0.0;
    for (std::size_t i = 0; i < used.size(); ++i) {
        const auto& o = *used[i];
        obs.push_back({(t[i] - centre) / half_range, static_cast<double>(o.responders),
                       static_cast<double>(o.total), o.weight});
        events += o.weight * static_cast<double>(o.responders);
    }
    const bool separated = is_separated(obs);

    const auto to_curve = [&](double alpha, double beta) {
        return LogisticCurve{alpha - beta * centre / half_range, beta / half_range, transform};
    };
    const auto original_score_norm = [&](const std::array<double, 2>& g_std) {
        // g_b = (g_beta * s) + c * g_a in the original parameterisation.
        const double g_a = g_std[0];
        const double g_b = g_std[1] * half_range + centre * g_std[0];
        return std::max(std::fabs(g_a), std::fabs(g_b));
    };

    const double pooled = (events + 0.5) / (mass + 1.0);
    double alpha = std::log(pooled) - std::log1p(-pooled);
    double beta = 0.0;

    FitResult result;
    Moments m = evaluate_standardized(obs, alpha, beta);
    int iteration = 0;
    bool converged = false;
    bool failed = false;
    for (; iteration < options.max_iterations; ++iteration) {
        if (!separated && original_score_norm(m.score) < options.score_tolerance) {
            converged = true;
            break;
        }
        if (std::fabs(alpha) + std::fabs(beta) > options.separation_bound) break;
        Matrix2 inv;
        if (!invert2(m.info, inv)) {
            failed = true;
            break;
        }
        const double step_a = inv[0][0] * m.score[0] + inv[0][1] * m.score[1];
        const double step_b = inv[1][0] * m.score[0] + inv[1][1] * m.score[1];
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
            const Moments trial = evaluate_standardized(obs, alpha + lambda * step_a, beta + lambda * step_b);
            if (std::isfinite(trial.loglik) && trial.loglik >= m.loglik - 1e-12 * (1.0 + std::fabs(m.loglik))) {
                alpha += lambda * step_a;
                beta += lambda * step_b;
                m = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            failed = true;
            break;
        }
    }
    (void)failed;

    // One more Newton step once inside the tolerance; quadratic convergence takes
    // the score to rounding level, so equal likelihoods give equal parameters.
    if (converged) {
        Matrix2 inv;
        if (invert2(m.info, inv)) {
            const double a2 = alpha + inv[0][0] * m.score[0] + inv[0][1] * m.score[1];
            const double b2 = beta + inv[1][0] * m.score[0] + inv[1][1] * m.score[1];
            const Moments polished = evaluate_standardized(obs, a2, b2);
            if (original_score_norm(polished.score) <= original_score_norm(m.score)) {
                alpha = a2;
                beta = b2;
                m = polished;
            }
        }
    }

    result.curve = to_curve(alpha, beta);
    result.iterations = iteration;
    result.log_likelihood = weighted_log_likelihood(data, result.curve);
    result.converged = converged && !separated;

    Matrix2 inv_std{};
    if (invert2(m.info, inv_std)) {
        // Jacobian of (a, b) with respect to the standardized (alpha, beta).
        const Matrix2 jac{{{1.0, -centre / half_range}, {0.0, 1.0 / half_range}}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) acc += jac[i][k] * inv_std[k][l] * jac[j][l];
                result.covariance[i][j] = acc;
            }
        result.covariance[1][0] = result.covariance[0][1];
    } else {
        result.converged = false;
        const double inf = std::numeric_limits<double>::infinity();
        result.covariance = Matrix2{{{inf, 0.0}, {0.0, inf}}};
    }
    if (result.converged && !(result.covariance[0][0] >= 0.0 && result.covariance[1][1] >= 0.0))
        result.converged = false;
    return result;
}

double logistic_invert(const LogisticCurve& curve, double target)
{
    check_probability_open(target, "inversion target");
    if (curve.slope == 0.0 || !std::isfinite(curve.slope))
        throw NonInvertibleError("logistic curve with zero slope cannot be inverted");
    const double t = (logit(target) - curve.intercept) / curve.slope;
    return curve.transform == CovariateTransform::NaturalLog ? std::exp(t) : t;
}

ResponseInterval fitted_response_ci(const FitResult& fit, double x, double level)
{
    if (!fit.converged) throw ArgumentError("confidence band requires a converged fit");
    check_probability_open(level, "confidence level");
    const double t = fit.curve.transformed(x);
    const double eta = fit.curve.intercept + fit.curve.slope * t;
    const auto& s = fit.covariance;
    const double variance = std::max(0.0, s[0][0] + 2.0 * t * s[0][1] + t * t * s[1][1]);
    const double half = normal_quantile(0.5 + 0.5 * level) * std::sqrt(variance);
    return {inverse_logit(eta - half), inverse_logit(eta), inverse_logit(eta + half)};
}

std::vector<double> pava_isotonic(std::span<const double> rates, std::span<const double> weights)
{
    if (rates.size() != weights.size()) throw ArgumentError("rates and weights differ in length");
    if (rates.empty()) throw ArgumentError("isotonic regression needs at least one value");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("isotonic weights must be positive");

    struct Block {
        double value;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        blocks.push_back({rates[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double w = prev.weight + top.weight;
            prev.value = (prev.weight * prev.value + top.weight * top.value) / w;
            prev.weight = w;
            prev.count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(rates.size());
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.value);
    return out;
}

} // namespace doseopt
