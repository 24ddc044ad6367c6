#pragma once

#include "doseopt/core_stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace doseopt {

struct CountPair {
    std::uint64_t events = 0;
    std::uint64_t total = 0;
};

struct ExposureObservation {
    double dose = 0.0;
    double exposure = 0.0;
    std::optional<CountPair> efficacy;
    std::optional<CountPair> toxicity;
};

struct ExposureFit {
    FitResult fit;
    bool negative_slope = false;
    // No events (or no non-events) at all: the curve carries no exposure signal.
    bool uninformative = false;
};

struct ExposureModels {
    ExposureFit efficacy;
    ExposureFit toxicity;
};

// Logistic fits on natural-log exposure for both endpoints.
ExposureModels fit_exposure_models(const std::vector<ExposureObservation>& data);

struct ExposureWindow {
    double lower_exposure = 0.0;
    double upper_exposure = 0.0;
    double efficacy_floor = 0.0;
    double toxicity_ceiling = 0.0;
};

struct WindowSearch {
    double efficacy_floor = 0.0;
    double toxicity_ceiling = 1.0;
    double level = 0.95;
    double range_lower = 0.0; // exposure search range
    double range_upper = 0.0;
};

struct WindowResult {
    std::optional<ExposureWindow> window; // empty: infeasible
    std::string infeasibility;
    bool ceiling_dropped = false;
};

WindowResult derive_exposure_window(const ExposureFit& efficacy, const ExposureFit& toxicity,
                                    const WindowSearch& search);

struct DoseExposureModel {
    double log_intercept = 0.0;
    double log_slope = 0.0;
    double residual_sd = 0.0;

    double predict(double dose) const;
    double invert(double exposure) const;
};

DoseExposureModel fit_dose_exposure(const std::vector<ExposureObservation>& data);

enum class RdeRole { MinimumActive, Intermediate, NearMtd };
std::string_view to_string(RdeRole role);

struct RdeSet {
    std::vector<double> doses;
    std::vector<RdeRole> roles;
    std::string note; // non-empty when fewer than three distinct doses survive
};

struct RdeOptions {
    std::size_t count = 3;
    double granularity = 25.0;
};

RdeSet propose_rdes(const ExposureWindow& window, const DoseExposureModel& model, double mtd_or_mad,
                    const RdeOptions& options = {});

} // namespace doseopt
