#include "preictal/curvefit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "preictal/error.hpp"

namespace preictal {

namespace {

constexpr double kTol = 1e-9;

double logistic(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// x where y first reaches `level`, linearly interpolated; nullopt when never reached.
std::optional<double> first_crossing(std::span<const double> x, std::span<const double> y, double level) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] >= level) {
            if (i == 0 || y[i] == y[i - 1]) return x[i];
            const double f = (level - y[i - 1]) / (y[i] - y[i - 1]);
            return x[i - 1] + f * (x[i] - x[i - 1]);
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<double> SmoothedSeries::xs() const {
    std::vector<double> out;
    for (const auto& p : entries) out.push_back(x_of(p));
    return out;
}

std::vector<double> SmoothedSeries::ys() const {
    std::vector<double> out;
    for (const auto& p : entries) out.push_back(p.y);
    return out;
}

SmoothedSeries smooth(const PredictionSeries& series, double block_min) {
    if (!(block_min > 0)) throw ValidationError("block length must be positive");
    double max_t = 0.0;
    for (const auto& e : series.entries) max_t = std::max(max_t, e.t_onset_min);
    const auto n_blocks = static_cast<long>(std::floor(max_t / block_min + kTol));
    if (series.entries.empty() || n_blocks < 1) {
        throw ValidationError("prediction series spans less than one " + std::to_string(block_min) + "-minute block");
    }
    std::vector<double> sum(static_cast<std::size_t>(n_blocks), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(n_blocks), 0);
    for (const auto& e : series.entries) {
        // Block j holds t in (j*block, (j+1)*block].
        long j = static_cast<long>(std::ceil(e.t_onset_min / block_min - kTol)) - 1;
        j = std::max(j, 0L);
        if (j >= n_blocks) continue;
        sum[static_cast<std::size_t>(j)] += e.y;
        ++count[static_cast<std::size_t>(j)];
    }
    SmoothedSeries out;
    out.block_min = block_min;
    out.window_min = static_cast<double>(n_blocks) * block_min;
    for (long j = n_blocks - 1; j >= 0; --j) {
        const auto u = static_cast<std::size_t>(j);
        if (count[u] == 0) continue;
        out.entries.push_back({(static_cast<double>(j) + 0.5) * block_min, sum[u] / static_cast<double>(count[u]), count[u]});
    }
    return out;
}

double logistic4(double x, double a, double b, double c, double d) { return a * logistic(b * (x - c)) + d; }

std::array<double, 4> logistic4_gradient(double x, double a, double b, double c, double /*d*/) {
    const double s = logistic(b * (x - c));
    const double ds = s * (1.0 - s);
    return {s, a * ds * (x - c), -a * b * ds, 1.0};
}

SigmoidFit fit_logistic4(std::span<const double> x, std::span<const double> y, const FitOptions& options) {
    if (x.size() != y.size()) throw ValidationError("x and y lengths differ");
    SigmoidFit fit;
    if (x.size() < 4) {
        fit.status = "fewer than four points";
        return fit;
    }
    const auto& bd = options.bounds;
    const double x_lo = options.window_lo.value_or(*std::min_element(x.begin(), x.end()));
    const double x_hi = options.window_hi.value_or(*std::max_element(x.begin(), x.end()));
    const std::array<double, 4> lo{bd.a_lo, bd.b_lo, x_lo - bd.c_margin, bd.d_lo};
    const std::array<double, 4> hi{bd.a_hi, bd.b_hi, x_hi + bd.c_margin, bd.d_hi};
    auto project = [&](Eigen::Vector4d& p) {
        for (int i = 0; i < 4; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    };

    // Initial guess from the data's range and crossings.
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    const double a0 = *ymax_it - *ymin_it;
    const double d0 = *ymin_it;
    const double c0 = first_crossing(x, y, d0 + 0.5 * a0).value_or(0.5 * (x_lo + x_hi));
    const auto x25 = first_crossing(x, y, d0 + 0.25 * a0);
    const auto x75 = first_crossing(x, y, d0 + 0.75 * a0);
    double span = (x25 && x75) ? std::abs(*x75 - *x25) : (x_hi - x_lo) / 2.0;
    span = std::max(span, options.min_b_span);
    Eigen::Vector4d p(a0, 4.0 / span, c0, d0);
    project(p);

    const std::size_t n = x.size();
    auto cost_of = [&](const Eigen::Vector4d& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = logistic4(x[i], q[0], q[1], q[2], q[3]) - y[i];
            s += r * r;
        }
        return 0.5 * s;
    };

    double cost = cost_of(p);
    double lambda = options.initial_damping;
    bool done = false;
    int it = 0;
    for (; it < options.max_iterations && !done; ++it) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = logistic4_gradient(x[i], p[0], p[1], p[2], p[3]);
            const Eigen::Vector4d gj(g[0], g[1], g[2], g[3]);
            const double r = logistic4(x[i], p[0], p[1], p[2], p[3]) - y[i];
            jtj.noalias() += gj * gj.transpose();
            jtr.noalias() += gj * r;
        }
        if (cost < 1e-30) {
            done = true;
            break;
        }
        while (true) {
            Eigen::Matrix4d damped = jtj;
            for (int k = 0; k < 4; ++k) damped(k, k) += lambda * jtj(k, k) + 1e-15;
            const Eigen::Vector4d step = damped.ldlt().solve(-jtr);
            Eigen::Vector4d trial = p + step;
            project(trial);
            const double trial_cost = cost_of(trial);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
                const double moved = (trial - p).cwiseAbs().maxCoeff();
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                if (rel < options.relative_tolerance || moved < 1e-14) done = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e16) {
                // No descent direction left at machine precision: stationary point.
                done = true;
                break;
            }
        }
    }

    fit.a = p[0];
    fit.b = p[1];
    fit.c = p[2];
    fit.d = p[3];
    fit.iterations = it;
    fit.residual_norm = std::sqrt(2.0 * cost);
    std::vector<double> model(n);
    for (std::size_t i = 0; i < n; ++i) model[i] = fit(x[i]);
    fit.rho = pearson(y, model);

    auto at = [](double v, double bound) { return std::abs(v - bound) <= 1e-9 * std::max(1.0, std::abs(bound)); };
    if (!done) fit.status = "iteration limit reached";
    else if (at(fit.a, lo[0])) fit.status = "amplitude at lower bound (no transition)";
    else if (at(fit.b, lo[1])) fit.status = "slope at lower bound (no transition)";
    else if (at(fit.c, lo[2]) || at(fit.c, hi[2])) fit.status = "inflection at window bound";
    else fit.status = "ok";
    fit.converged = fit.status == "ok";
    return fit;
}

SigmoidFit fit_4pl(const SmoothedSeries& sm, FitOptions options) {
    const auto x = sm.xs();
    const auto y = sm.ys();
    options.window_lo = 0.0;
    options.window_hi = sm.window_min;
    options.min_b_span = std::max(options.min_b_span, sm.block_min);
    if (x.size() < 8) {
        SigmoidFit f;
        f.window_min = sm.window_min;
        f.status = "fewer than eight blocks";
        return f;
    }
    auto fit = fit_logistic4(x, y, options);
    fit.window_min = sm.window_min;
    return fit;
}

std::optional<double> pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.size() < 2) return std::nullopt;
    const double n = static_cast<double>(u.size());
    double mu = 0, mv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= n;
    mv /= n;
    double suv = 0, suu = 0, svv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suv += (u[i] - mu) * (v[i] - mv);
        suu += (u[i] - mu) * (u[i] - mu);
        svv += (v[i] - mv) * (v[i] - mv);
    }
    if (suu <= 0 || svv <= 0) return std::nullopt;
    return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

std::optional<double> pearson(const SmoothedSeries& sm, const SigmoidFit& fit) {
    std::vector<double> model;
    for (const auto& p : sm.entries) model.push_back(fit(sm.x_of(p)));
    return pearson(sm.ys(), model);
}

}  // namespace preictal
