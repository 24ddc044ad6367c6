#include "doseopt/rde.hpp"

#include "doseopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace doseopt {

namespace {

ExposureFit fit_endpoint(const std::vector<ExposureObservation>& data, bool efficacy)
{
    std::vector<BinomialObservation> obs;
    std::set<double> distinct;
    std::uint64_t events = 0;
    std::uint64_t total = 0;
    for (const auto& o : data) {
        const auto& counts = efficacy ? o.efficacy : o.toxicity;
        if (!counts) continue;
        if (!(o.exposure > 0.0)) throw ArgumentError("exposure must be positive");
        if (counts->events > counts->total) throw ArgumentError("event count exceeds total");
        if (counts->total == 0) continue;
        obs.push_back({o.exposure, counts->events, counts->total, 1.0});
        distinct.insert(o.exposure);
        events += counts->events;
        total += counts->total;
    }
    // Missing toxicity data carries no ceiling, like data without events.
    if (!efficacy && obs.empty()) {
        ExposureFit none;
        none.uninformative = true;
        return none;
    }
    if (distinct.size() < 2)
        throw DegenerateDesignError(std::string(efficacy ? "efficacy" : "toxicity") +
                                    " data need at least two distinct exposures");
    ExposureFit f;
    f.fit = fit_logistic_weighted(obs, CovariateTransform::NaturalLog);
    f.uninformative = events == 0 || events == total;
    f.negative_slope = f.fit.curve.slope < 0.0;
    return f;
}

// Bisection on log exposure for the boundary of a monotone predicate that is
// false at `bad` and true at `good`.
double bisect_log(double bad, double good, const std::function<bool(double)>& holds)
{
    double lo = std::log(bad);
    double hi = std::log(good);
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (holds(std::exp(mid)) ? hi : lo) = mid;
    }
    return std::exp(hi);
}

} // namespace

ExposureModels fit_exposure_models(const std::vector<ExposureObservation>& data)
{
    for (const auto& o : data) {
        if (!o.efficacy && !o.toxicity) throw ArgumentError("observation carries neither efficacy nor toxicity data");
        if (!(o.dose > 0.0)) throw ArgumentError("dose must be positive");
    }
    return {fit_endpoint(data, true), fit_endpoint(data, false)};
}

WindowResult derive_exposure_window(const ExposureFit& efficacy, const ExposureFit& toxicity,
                                    const WindowSearch& search)
{
    if (!(search.range_lower > 0.0 && search.range_lower < search.range_upper))
        throw ArgumentError("exposure search range must satisfy 0 < lower < upper");
    if (!(search.efficacy_floor >= 0.0 && search.efficacy_floor < 1.0))
        throw ArgumentError("efficacy_floor must lie in [0, 1)");
    if (!(search.toxicity_ceiling > 0.0 && search.toxicity_ceiling <= 1.0))
        throw ArgumentError("toxicity_ceiling must lie in (0, 1]");
    if (!efficacy.fit.converged || !(efficacy.fit.curve.slope > 0.0))
        throw PolicyError("efficacy curve is not increasing in exposure; fall back to point estimates");

    WindowResult out;
    out.ceiling_dropped = toxicity.uninformative;
    if (!out.ceiling_dropped && (!toxicity.fit.converged || !(toxicity.fit.curve.slope > 0.0)))
        throw PolicyError("toxicity curve is not increasing in exposure; fall back to point estimates");

    const auto efficacy_ok = [&](double e) {
        return fitted_response_ci(efficacy.fit, e, search.level).lower >= search.efficacy_floor;
    };
    double lower;
    if (efficacy_ok(search.range_lower)) {
        lower = search.range_lower;
    } else if (!efficacy_ok(search.range_upper)) {
        out.infeasibility = "efficacy lower bound never reaches the floor within the exposure range";
        return out;
    } else {
        lower = bisect_log(search.range_lower, search.range_upper, efficacy_ok);
    }

    double upper = search.range_upper;
    if (!out.ceiling_dropped) {
        const auto toxicity_ok = [&](double e) {
            return fitted_response_ci(toxicity.fit, e, search.level).upper <= search.toxicity_ceiling;
        };
        if (!toxicity_ok(search.range_lower)) {
            out.infeasibility = "toxicity upper bound exceeds the ceiling across the exposure range";
            return out;
        }
        if (!toxicity_ok(search.range_upper))
            upper = bisect_log(search.range_upper, search.range_lower, toxicity_ok);
    }

    if (lower > upper) {
        out.infeasibility = "efficacy floor is reached only above the toxicity ceiling";
        return out;
    }
    out.window = ExposureWindow{lower, upper, search.efficacy_floor, search.toxicity_ceiling};
    return out;
}

double DoseExposureModel::predict(double dose) const
{
    return std::exp(log_intercept + log_slope * std::log(dose));
}

double DoseExposureModel::invert(double exposure) const
{
    if (!(log_slope > 0.0)) throw ArgumentError("dose-exposure slope must be positive to invert");
    return std::exp((std::log(exposure) - log_intercept) / log_slope);
}

DoseExposureModel fit_dose_exposure(const std::vector<ExposureObservation>& data)
{
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& o : data) {
        if (!(o.dose > 0.0) || !(o.exposure > 0.0)) throw ArgumentError("dose and exposure must be positive");
        x.push_back(std::log(o.dose));
        y.push_back(std::log(o.exposure));
    }
    if (std::set<double>(x.begin(), x.end()).size() < 2)
        throw DegenerateDesignError("dose-exposure fit needs at least two distinct doses");

    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    DoseExposureModel m;
    m.log_slope = sxy / sxx;
    m.log_intercept = my - m.log_slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - m.log_intercept - m.log_slope * x[i];
            rss += r * r;
        }
        m.residual_sd = std::sqrt(rss / (n - 2.0));
    }
    return m;
}

std::string_view to_string(RdeRole role)
{
    switch (role) {
    case RdeRole::MinimumActive: return "minimum-active";
    case RdeRole::Intermediate: return "intermediate";
    case RdeRole::NearMtd: return "near-MTD";
    }
    return "?";
}

RdeSet propose_rdes(const ExposureWindow& window, const DoseExposureModel& model, double mtd_or_mad,
                    const RdeOptions& options)
{
    if (!(window.lower_exposure > 0.0) || !(window.lower_exposure <= window.upper_exposure))
        throw ArgumentError("exposure window is infeasible");
    if (!(model.log_slope > 0.0)) throw ArgumentError("dose-exposure slope must be positive");
    if (!(mtd_or_mad > 0.0)) throw ArgumentError("MTD/MAD must be positive");
    if (options.count < 3) throw ArgumentError("at least three RDEs must be requested");
    if (!(options.granularity > 0.0)) throw ArgumentError("dose granularity must be positive");

    const double g = options.granularity;
    double dose_max = std::min(model.invert(window.upper_exposure), mtd_or_mad);
    double dose_min = std::min(model.invert(window.lower_exposure), dose_max);

    const auto snap = [&](double d) {
        double r = std::round(d / g) * g;
        if (r > mtd_or_mad) r = std::floor(mtd_or_mad / g) * g;
        if (r <= 0.0) r = std::min(g, mtd_or_mad);
        return r;
    };

    RdeSet set;
    const double ratio = dose_max / dose_min;
    for (std::size_t i = 0; i < options.count; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(options.count - 1);
        const double d = snap(dose_min * std::pow(ratio, frac));
        if (set.doses.empty() || d > set.doses.back()) set.doses.push_back(d);
    }
    for (std::size_t i = 0; i < set.doses.size(); ++i) {
        if (i + 1 == set.doses.size())
            set.roles.push_back(RdeRole::NearMtd);
        else
            set.roles.push_back(i == 0 ? RdeRole::MinimumActive : RdeRole::Intermediate);
    }
    if (set.doses.size() < 3) {
        std::ostringstream note;
        note << "only " << set.doses.size() << " distinct dose(s) remain after clamping to " << mtd_or_mad
             << " mg and rounding to a " << g << " mg grid";
        set.note = note.str();
    }
    return set;
}

} // namespace doseopt
