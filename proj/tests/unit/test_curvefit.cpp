#include <doctest.h>

#include <cmath>
#include <vector>

#include "preictal/curvefit.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

using namespace preictal;

namespace {

PredictionSeries series(std::size_t n, auto&& y_of_t) {
    PredictionSeries s;
    for (std::size_t k = n; k >= 1; --k) {
        const double t = static_cast<double>(k) * 5.0 / 60.0;
        s.entries.push_back({t, y_of_t(t)});
    }
    return s;
}

std::vector<double> grid(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 4.0 + 8.0 * static_cast<double>(i);
    return x;
}

std::vector<double> model(const std::vector<double>& x, double a, double b, double c, double d) {
    std::vector<double> y;
    for (double v : x) y.push_back(a / (1.0 + std::exp(-b * (v - c))) + d);
    return y;
}

}  // namespace

TEST_CASE("smoothing into 8-minute blocks") {
    const auto constant = smooth(series(7200, [](double) { return 0.7; }));
    CHECK(constant.entries.size() == 75);
    CHECK(constant.window_min == doctest::Approx(600.0));
    for (const auto& p : constant.entries) {
        CHECK(p.y == doctest::Approx(0.7));
        CHECK(p.n_raw == 96);
    }
    CHECK(constant.entries.front().t_onset_min == doctest::Approx(596.0));
    CHECK(constant.entries.back().t_onset_min == doctest::Approx(4.0));

    const auto step = smooth(series(7200, [](double t) { return t <= 8.0 + 1e-9 ? 1.0 : 0.0; }));
    CHECK(step.entries.back().y == 1.0);
    CHECK(step.entries[step.entries.size() - 2].y == 0.0);

    // A partial leading block is dropped.
    CHECK(smooth(series(200, [](double) { return 0.1; })).entries.size() == 2);
    CHECK_THROWS_AS(smooth(series(50, [](double) { return 0.1; })), ValidationError);
}

TEST_CASE("analytic gradient matches finite differences") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = rng.uniform(0.1, 1.5), b = rng.uniform(0.01, 0.5), c = rng.uniform(50, 550);
        const double d = rng.uniform(-0.2, 0.4), x = rng.uniform(0, 600);
        const auto g = logistic4_gradient(x, a, b, c, d);
        const double h = 1e-6;
        const double num[4] = {
            (logistic4(x, a + h, b, c, d) - logistic4(x, a - h, b, c, d)) / (2 * h),
            (logistic4(x, a, b + h, c, d) - logistic4(x, a, b - h, c, d)) / (2 * h),
            (logistic4(x, a, b, c + h, d) - logistic4(x, a, b, c - h, d)) / (2 * h),
            (logistic4(x, a, b, c, d + h) - logistic4(x, a, b, c, d - h)) / (2 * h),
        };
        for (int k = 0; k < 4; ++k) CHECK(std::abs(g[k] - num[k]) <= 1e-6 * std::max(1.0, std::abs(num[k])));
    }
}

TEST_CASE("noiseless logistic data is recovered exactly") {
    const auto x = grid(75);
    const auto fit = fit_logistic4(x, model(x, 1.0, 0.1, 300.0, 0.0));
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.a - 1.0) <= 1e-6);
    CHECK(std::abs(fit.b - 0.1) <= 1e-6);
    CHECK(std::abs(fit.c - 300.0) <= 1e-6);
    CHECK(std::abs(fit.d) <= 1e-6);
    REQUIRE(fit.rho);
    CHECK(*fit.rho > 1.0 - 1e-9);
}

TEST_CASE("noisy fits reach the Cramer-Rao bound") {
    // Fisher information of the four parameters under white noise on the block means.
    const double a = 1.0, b = 0.1, c = 300.0, d = 0.0, sigma = 0.05;
    const auto x = grid(75);
    double fisher[4][4] = {};
    for (double v : x) {
        const double s = 1.0 / (1.0 + std::exp(-b * (v - c)));
        const double row[4] = {s, a * s * (1 - s) * (v - c), -a * b * s * (1 - s), 1.0};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) fisher[i][j] += row[i] * row[j] / (sigma * sigma);
    }
    // Gauss-Jordan inverse.
    double m[4][8] = {};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) m[i][j] = fisher[i][j];
        m[i][4 + i] = 1.0;
    }
    for (int col = 0; col < 4; ++col) {
        const double piv = m[col][col];
        for (int j = 0; j < 8; ++j) m[col][j] /= piv;
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = m[r][col];
            for (int j = 0; j < 8; ++j) m[r][j] -= f * m[col][j];
        }
    }
    const double bound[4] = {std::sqrt(m[0][4]), std::sqrt(m[1][5]), std::sqrt(m[2][6]), std::sqrt(m[3][7])};

    const auto clean = model(x, a, b, c, d);
    const double truth[4] = {a, b, c, d};
    double sq[4] = {}, rho = 0;
    const int n = 200;
    for (int seed = 0; seed < n; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        auto y = clean;
        for (auto& v : y) v += sigma * rng.normal();
        const auto fit = fit_logistic4(x, y);
        REQUIRE(fit.converged);
        const double est[4] = {fit.a, fit.b, fit.c, fit.d};
        for (int k = 0; k < 4; ++k) sq[k] += (est[k] - truth[k]) * (est[k] - truth[k]);
        rho += *fit.rho;
    }
    for (int k = 0; k < 4; ++k) {
        const double rms = std::sqrt(sq[k] / n);
        CHECK(rms <= 1.3 * bound[k]);
        CHECK(rms >= 0.7 * bound[k]);
    }
    CHECK(rho / n >= 0.95);
}

TEST_CASE("flat series is flagged") {
    const auto x = grid(75);
    const std::vector<double> y(75, 0.5);
    const auto fit = fit_logistic4(x, y);
    CHECK_FALSE(fit.converged);
    CHECK(fit.status != "ok");
    CHECK(fit_logistic4(grid(3), std::vector<double>(3, 0.2)).status == "fewer than four points");
}

TEST_CASE("shifting time shifts the inflection") {
    const auto x = grid(75);
    const auto y = model(x, 0.8, 0.07, 250.0, 0.1);
    auto shifted = x;
    for (auto& v : shifted) v += 37.0;
    const auto f0 = fit_logistic4(x, y);
    const auto f1 = fit_logistic4(shifted, y);
    REQUIRE(f0.converged);
    REQUIRE(f1.converged);
    CHECK(f1.c - f0.c == doctest::Approx(37.0).epsilon(1e-6));
    CHECK(f1.b == doctest::Approx(f0.b).epsilon(1e-6));
}

TEST_CASE("affine change of outputs maps amplitude and offset") {
    const auto x = grid(75);
    const auto y = model(x, 1.0, 0.1, 300.0, 0.0);
    std::vector<double> z;
    for (double v : y) z.push_back(0.6 * v + 0.2);
    const auto f = fit_logistic4(x, z);
    REQUIRE(f.converged);
    CHECK(f.a == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(f.d == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(f.b == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(f.c == doctest::Approx(300.0).epsilon(1e-6));
}

TEST_CASE("fit of a smoothed series uses minutes since window start") {
    const auto sm = smooth(series(7200, [](double t) { return 1.0 / (1.0 + std::exp(-0.1 * ((600.0 - t) - 300.0))); }));
    const auto fit = fit_4pl(sm);
    REQUIRE(fit.converged);
    CHECK(fit.window_min == doctest::Approx(600.0));
    CHECK(fit.inflection_min() == doctest::Approx(300.0).epsilon(1e-3));
    REQUIRE(pearson(sm, fit));
    CHECK(*pearson(sm, fit) > 0.999);
}

TEST_CASE("pearson correlation") {
    const std::vector<double> u{1, 2, 3, 4, 5};
    std::vector<double> v = u, w;
    for (double e : u) w.push_back(6.0 - e);
    CHECK(*pearson(u, v) == doctest::Approx(1.0));
    CHECK(*pearson(u, w) == doctest::Approx(-1.0));
    CHECK_FALSE(pearson(u, std::vector<double>(5, 2.0)));
}
