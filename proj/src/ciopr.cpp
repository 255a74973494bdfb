#include "preictal/ciopr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "preictal/error.hpp"

namespace preictal {

TransitionPeriod transition_period(const SigmoidFit& fit) {
    if (!fit.converged) throw ValidationError("transition period needs a converged fit (" + fit.status + ")");
    if (!(fit.b > 0)) throw ValidationError("transition period needs b > 0");
    const double half = std::log(19.0) / fit.b;
    TransitionPeriod tp;
    tp.start_x = fit.c - half;
    tp.end_x = fit.c + half;
    tp.start_min = fit.window_min - tp.start_x;
    tp.end_min = fit.window_min - tp.end_x;
    tp.tp_min = 2.0 * half;
    return tp;
}

double negative_duration(const SmoothedSeries& sm, double transition_start_x) {
    return std::clamp(transition_start_x, 0.0, sm.window_min);
}

SpcResult spc(const SmoothedSeries& sm, double fraction, std::size_t window) {
    const auto& e = sm.entries;
    if (e.size() < window) throw ValidationError("SPC needs at least " + std::to_string(window) + " blocks");
    std::vector<double> means(e.size(), 0.0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = window - 1; i < e.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < window; ++k) s += e[i - k].y;
        means[i] = s / static_cast<double>(window);
        best = std::max(best, means[i]);
    }
    const double threshold = fraction * best;
    std::size_t i = e.size();
    while (i > window - 1 && means[i - 1] >= threshold) --i;
    SpcResult r;
    r.max_mean = best;
    if (i == e.size()) {
        // Output has fallen away from its maximum by onset: no convergence run.
        r.start_index = e.size();
        return r;
    }
    // means[i] covers blocks i-window+1 .. i; convergence starts at the first of them.
    r.start_index = i - (window - 1);
    r.spc_min = e[r.start_index].t_onset_min + sm.block_min / 2.0;
    r.n_spc = e.size() - r.start_index;
    return r;
}

RegionErrors region_errors(const SmoothedSeries& sm, double spc_min, double nd_min) {
    RegionErrors r;
    double spc_sum = 0.0, nd_sum = 0.0;
    for (const auto& p : sm.entries) {
        if (p.t_onset_min < spc_min) {
            spc_sum += std::abs(1.0 - p.y);
            ++r.n_spc;
        }
        if (sm.x_of(p) <= nd_min) {
            nd_sum += std::abs(p.y);
            ++r.n_nd;
        }
    }
    r.spc_err = r.n_spc ? spc_sum / static_cast<double>(r.n_spc) : 0.0;
    r.nd_err = r.n_nd ? nd_sum / static_cast<double>(r.n_nd) : 0.0;
    r.spc_err = std::clamp(r.spc_err, 0.0, 1.0);
    r.nd_err = std::clamp(r.nd_err, 0.0, 1.0);
    return r;
}

CioprReport evaluate_curve(const SmoothedSeries& sm, const SigmoidFit& fit, int definition_min) {
    CioprReport r;
    r.definition_min = definition_min;
    r.fit = fit;
    r.window_min = sm.window_min;
    const auto tp = transition_period(fit);
    r.tp_min = tp.tp_min;
    r.transition_start_min = tp.start_min;
    r.transition_end_min = tp.end_min;
    r.inflection_min = fit.inflection_min();
    r.nd_min = negative_duration(sm, tp.start_x);
    const auto s = spc(sm);
    r.spc_min = s.spc_min;
    const auto err = region_errors(sm, r.spc_min, r.nd_min);
    r.spc_err = err.spc_err;
    r.nd_err = err.nd_err;
    r.n_spc = err.n_spc;
    r.n_nd = err.n_nd;
    r.spc_eff = r.spc_min * (1.0 - r.spc_err);
    r.nd_eff = r.nd_min * (1.0 - r.nd_err);
    return r;
}

double eta_weight(double spc_eff, double nd_eff, double infl_comp) {
    return std::min(1.0, spc_eff / std::max(nd_eff + infl_comp, kEtaFloor));
}

double ciopc_value(double spc_eff, double nd_eff, double infl_comp) {
    return spc_eff + eta_weight(spc_eff, nd_eff, infl_comp) * (nd_eff + infl_comp);
}

void compute_ciopc(std::vector<CioprReport>& group) {
    if (group.empty()) return;
    double latest_inflection = std::numeric_limits<double>::infinity();
    for (const auto& r : group) latest_inflection = std::min(latest_inflection, r.inflection_min);
    for (auto& r : group) {
        r.infl_comp = std::max(0.0, r.inflection_min - latest_inflection) * (1.0 - r.nd_err);
        r.eta = eta_weight(r.spc_eff, r.nd_eff, r.infl_comp);
        r.ciopc = r.spc_eff + r.eta * (r.nd_eff + r.infl_comp);
    }
}

std::vector<std::optional<double>> ciopr_normalize(const std::vector<double>& ciopc) {
    if (ciopc.empty()) throw ValidationError("CIOPR normalization needs at least one definition");
    const double best = *std::max_element(ciopc.begin(), ciopc.end());
    std::vector<std::optional<double>> out;
    for (double v : ciopc) {
        if (best > 0) out.emplace_back(v / best);
        else out.emplace_back(std::nullopt);
    }
    return out;
}

void ciopr_normalize(std::vector<CioprReport>& group) {
    if (group.empty()) return;
    std::vector<double> v;
    for (const auto& r : group) v.push_back(r.ciopc);
    const auto n = ciopr_normalize(v);
    for (std::size_t i = 0; i < group.size(); ++i) group[i].ciopr = n[i];
}

GroupResult evaluate_group(const std::vector<SeriesByDefinition>& series, const FitOptions& options,
                           double block_min) {
    GroupResult g;
    for (const auto& s : series) {
        SmoothedSeries sm;
        try {
            sm = smooth(s.series, block_min);
        } catch (const ValidationError& e) {
            g.excluded = true;
            g.reason = std::to_string(s.definition_min) + " min: " + e.what();
            return g;
        }
        const auto fit = fit_4pl(sm, options);
        if (!fit.converged) {
            g.excluded = true;
            g.reason = std::to_string(s.definition_min) + " min: curve could not be fitted (" + fit.status + ")";
            g.reports.clear();
            return g;
        }
        g.reports.push_back(evaluate_curve(sm, fit, s.definition_min));
    }
    compute_ciopc(g.reports);
    ciopr_normalize(g.reports);
    return g;
}

}  // namespace preictal
