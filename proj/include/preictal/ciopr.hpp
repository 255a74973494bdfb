#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "preictal/curvefit.hpp"

namespace preictal {

struct TransitionPeriod {
    double start_x = 0;    // minutes since window start
    double end_x = 0;
    double start_min = 0;  // minutes before onset
    double end_min = 0;
    double tp_min = 0;
};

/// Bounds where the fitted curve crosses d + 0.05a and d + 0.95a: c -/+ ln(19)/b.
/// Throws ValidationError for unconverged fits or b <= 0.
TransitionPeriod transition_period(const SigmoidFit& fit);

/// Transition start minus the first prediction time (window start), clamped to [0, window].
double negative_duration(const SmoothedSeries& sm, double transition_start_x);

struct SpcResult {
    double spc_min = 0;            // start of convergence, minutes before onset
    std::size_t n_spc = 0;         // smoothed blocks from SPC start to onset
    std::size_t start_index = 0;   // first entry of the SPC region (== entries.size() when empty)
    double max_mean = 0;           // maximum 3-block mean
};

/// Convergence from trailing 3-block means: the earliest block of the final run, ending at
/// onset, whose 3-block means all stay >= 99% of the maximum 3-block mean.
SpcResult spc(const SmoothedSeries& sm, double fraction = 0.99, std::size_t window = 3);

struct RegionErrors {
    double spc_err = 0;
    double nd_err = 0;
    std::size_t n_spc = 0;
    std::size_t n_nd = 0;
};

/// Mean |1 - y| over blocks inside the SPC region and mean |y| over blocks whose midpoint
/// lies in the ND region [window start, window start + nd_min]. Empty regions give 0.
RegionErrors region_errors(const SmoothedSeries& sm, double spc_min, double nd_min);

struct CioprReport {
    int definition_min = 0;
    double nd_min = 0, tp_min = 0, spc_min = 0;
    double spc_err = 0, nd_err = 0;
    double spc_eff = 0, nd_eff = 0;
    double infl_comp = 0, eta = 0;
    double ciopc = 0;
    std::optional<double> ciopr;  // empty when every CIOPC in the group is <= 0
    std::size_t n_spc = 0, n_nd = 0;
    double transition_start_min = 0, transition_end_min = 0;
    double inflection_min = 0;
    double window_min = 0;
    SigmoidFit fit;
};

/// Per-curve terms (ND, TP, SPC, errors, effective values). Infl_comp, eta, CIOPC and CIOPR
/// need the comparison group; see compute_ciopc and ciopr_normalize.
CioprReport evaluate_curve(const SmoothedSeries& sm, const SigmoidFit& fit, int definition_min);

constexpr double kEtaFloor = 1e-9;

/// min(1, SPC_eff / max(ND_eff + Infl_comp, 1e-9))
double eta_weight(double spc_eff, double nd_eff, double infl_comp);

/// SPC_eff + eta * (ND_eff + Infl_comp)
double ciopc_value(double spc_eff, double nd_eff, double infl_comp);

/// Fills infl_comp, eta and ciopc for one seizure's reports across definitions.
/// Infl_comp_k = max(0, c_k - min_j c_j) * (1 - ND_err_k), c in minutes before onset.
void compute_ciopc(std::vector<CioprReport>& group);

/// CIOPR_k = CIOPC_k / max_j CIOPC_j. Leaves ciopr empty when the maximum is <= 0.
void ciopr_normalize(std::vector<CioprReport>& group);
std::vector<std::optional<double>> ciopr_normalize(const std::vector<double>& ciopc);

struct SeriesByDefinition {
    int definition_min;
    PredictionSeries series;
};

struct GroupResult {
    std::vector<CioprReport> reports;
    bool excluded = false;
    std::string reason;
};

/// Smooths, fits and scores one seizure's series across definitions. A failed fit for any
/// definition excludes the whole group.
GroupResult evaluate_group(const std::vector<SeriesByDefinition>& series, const FitOptions& options = {},
                           double block_min = 8.0);

}  // namespace preictal
