#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace doseopt {

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;

    double mean() const { return alpha / (alpha + beta); }
    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

// Throws ArgumentError unless both shapes are finite and positive.
void validate(const BetaParams& params);

BetaParams beta_posterior(const BetaParams& prior, std::uint64_t events, std::uint64_t non_events);

// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

// Pr(lo < p <= hi) for p ~ Beta(params).
double beta_interval_prob(const BetaParams& params, double lo, double hi);

// Standard normal quantile (Wichura AS241, relative accuracy ~1e-16).
double normal_quantile(double p);

double logit(double p);
double inverse_logit(double eta);

enum class CovariateTransform { Identity, NaturalLog };

// p(x) = 1 / (1 + exp(-(intercept + slope * t(x)))).
struct LogisticCurve {
    double intercept = 0.0;
    double slope = 0.0;
    CovariateTransform transform = CovariateTransform::Identity;

    double transformed(double x) const;
    double linear_predictor(double x) const { return intercept + slope * transformed(x); }
    double evaluate(double x) const { return inverse_logit(linear_predictor(x)); }
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct FitResult {
    LogisticCurve curve;
    Matrix2 covariance{};
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct BinomialObservation {
    double covariate = 0.0;
    std::uint64_t responders = 0;
    std::uint64_t total = 0;
    double weight = 1.0;
};

struct LogisticFitOptions {
    int max_iterations = 100;
    double score_tolerance = 1e-8;
    // Bound on |a'| + |b'| for the standardized covariate (centred at the
    // weighted mean, scaled to unit half-range). Exceeding it marks separation.
    double separation_bound = 50.0;
};

// Maximizes sum_i w_i [y_i log p_i + (n_i - y_i) log(1 - p_i)] by Newton/IRLS
// with step-halving. Separation yields converged = false, never an exception.
FitResult fit_logistic_weighted(std::span<const BinomialObservation> data, CovariateTransform transform,
                                const LogisticFitOptions& options = {});

// Gradient of the weighted log-likelihood at `curve` with respect to (a, b).
std::array<double, 2> logistic_score(std::span<const BinomialObservation> data, const LogisticCurve& curve);

double weighted_log_likelihood(std::span<const BinomialObservation> data, const LogisticCurve& curve);

double logistic_invert(const LogisticCurve& curve, double target);

struct ResponseInterval {
    double lower = 0.0;
    double point = 0.0;
    double upper = 0.0;
};

// Wald interval on the linear predictor, mapped through the inverse logit.
ResponseInterval fitted_response_ci(const FitResult& fit, double x, double level);

// Weighted least-squares projection onto nondecreasing sequences.
std::vector<double> pava_isotonic(std::span<const double> rates, std::span<const double> weights);

} // namespace doseopt
