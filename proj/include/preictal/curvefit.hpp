#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "preictal/classifier.hpp"

namespace preictal {

struct SmoothedPoint {
    double t_onset_min;  // block midpoint, minutes before onset
    double y;
    std::size_t n_raw;   // raw outputs averaged into this block
};

/// Block means of a prediction series; blocks are anchored at onset, oldest first.
struct SmoothedSeries {
    std::vector<SmoothedPoint> entries;
    double block_min = 8.0;
    double window_min = 0.0;  // span from the oldest complete block's start to onset

    /// Minutes since window start; later means closer to onset.
    double x_of(const SmoothedPoint& p) const noexcept { return window_min - p.t_onset_min; }
    std::vector<double> xs() const;
    std::vector<double> ys() const;
};

/// Non-overlapping onset-anchored blocks; the partial leading block is dropped.
/// Throws ValidationError when the series spans less than one block.
SmoothedSeries smooth(const PredictionSeries& series, double block_min = 8.0);

/// f(x) = a / (1 + exp(-b (x - c))) + d
double logistic4(double x, double a, double b, double c, double d);

struct FitBounds {
    double a_lo = 0.05, a_hi = 1.5;
    double b_lo = 1e-4, b_hi = 10.0;
    double d_lo = -0.25, d_hi = 0.5;
    double c_margin = 120.0;  // c may leave the observed x range by this much
};

struct FitOptions {
    FitBounds bounds;
    int max_iterations = 500;
    double relative_tolerance = 1e-10;
    double initial_damping = 1e-3;
    double min_b_span = 8.0;  // floor on the 25%-75% span used to seed b
    /// Range c is bounded against; defaults to [min x, max x].
    std::optional<double> window_lo;
    std::optional<double> window_hi;
};

struct SigmoidFit {
    double a = 0, b = 0, c = 0, d = 0;  // c in the x coordinates of the fit
    std::optional<double> rho;          // empty when either side has zero variance
    bool converged = false;
    std::string status;                 // "ok" or why the fit is flagged
    double residual_norm = 0;
    int iterations = 0;
    double window_min = 0;              // x of onset for fits of a SmoothedSeries

    double operator()(double x) const { return logistic4(x, a, b, c, d); }
    /// Inflection point in minutes before onset.
    double inflection_min() const noexcept { return window_min - c; }
};

/// Bounded least-squares fit (Levenberg-Marquardt with analytic Jacobian, bounds by
/// projection). Never throws on a bad fit; check `converged`.
SigmoidFit fit_logistic4(std::span<const double> x, std::span<const double> y, const FitOptions& options = {});

/// Fits block means against x = minutes since window start; c is bounded to window +- 120 min.
SigmoidFit fit_4pl(const SmoothedSeries& sm, FitOptions options = {});

/// Jacobian row [df/da, df/db, df/dc, df/dd].
std::array<double, 4> logistic4_gradient(double x, double a, double b, double c, double d);

std::optional<double> pearson(std::span<const double> u, std::span<const double> v);
/// Correlation between block means and the fit at block midpoints.
std::optional<double> pearson(const SmoothedSeries& sm, const SigmoidFit& fit);

}  // namespace preictal
