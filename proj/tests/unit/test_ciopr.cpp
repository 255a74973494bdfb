#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "preictal/ciopr.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

using namespace preictal;

namespace {

// Block means, oldest first, in 8-minute blocks ending at onset.
SmoothedSeries blocks(const std::vector<double>& y) {
    SmoothedSeries sm;
    sm.block_min = 8.0;
    sm.window_min = 8.0 * static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        sm.entries.push_back({(static_cast<double>(y.size() - i) - 0.5) * 8.0, y[i], 96});
    }
    return sm;
}

SigmoidFit converged_fit(double a, double b, double c, double d, double window) {
    SigmoidFit f;
    f.a = a;
    f.b = b;
    f.c = c;
    f.d = d;
    f.window_min = window;
    f.converged = true;
    f.status = "ok";
    return f;
}

double bisect(auto&& g, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(lo) < 0) == (g(mid) < 0) ? lo = mid : hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Exhaustive scan: earliest block j such that every 3-block mean ending at or after j + 2 clears the threshold.
double spc_oracle(const SmoothedSeries& sm) {
    const auto& e = sm.entries;
    double best = -1e300;
    for (std::size_t i = 2; i < e.size(); ++i) best = std::max(best, (e[i].y + e[i - 1].y + e[i - 2].y) / 3.0);
    for (std::size_t j = 0; j + 2 < e.size(); ++j) {
        bool ok = true;
        for (std::size_t i = j + 2; i < e.size(); ++i) ok = ok && (e[i].y + e[i - 1].y + e[i - 2].y) / 3.0 >= 0.99 * best;
        if (ok) return e[j].t_onset_min + 4.0;
    }
    return 0.0;
}

PredictionSeries rising(double inflection_min, double slope, double window_min) {
    PredictionSeries s;
    const auto n = static_cast<std::size_t>(window_min * 12.0);
    for (std::size_t k = n; k >= 1; --k) {
        const double t = static_cast<double>(k) / 12.0;
        s.entries.push_back({t, 0.02 + 0.96 / (1.0 + std::exp(-slope * (inflection_min - t)))});
    }
    return s;
}

}  // namespace

TEST_CASE("transition period closed form") {
    const auto tp = transition_period(converged_fit(1, std::log(19.0) / 30.0, 300, 0, 600));
    CHECK(tp.tp_min == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(tp.start_x == doctest::Approx(270.0));
    CHECK(tp.start_min == doctest::Approx(330.0));
    CHECK(transition_period(converged_fit(1, 10, 300, 0, 600)).tp_min == doctest::Approx(0.5889).epsilon(1e-3));

    const auto f = converged_fit(0.8, 0.07, 250, 0.1, 600);
    const double lo = bisect([&](double x) { return f(x) - (f.d + 0.05 * f.a); }, 0, 600);
    const double hi = bisect([&](double x) { return f(x) - (f.d + 0.95 * f.a); }, 0, 600);
    const auto t = transition_period(f);
    CHECK(std::abs(t.start_x - lo) < 1e-9);
    CHECK(std::abs(t.end_x - hi) < 1e-9);
    CHECK(std::abs(t.tp_min - (hi - lo)) < 1e-9);

    auto bad = f;
    bad.converged = false;
    CHECK_THROWS_AS(transition_period(bad), ValidationError);
}

TEST_CASE("negative duration") {
    const auto sm = blocks(std::vector<double>(75, 0.5));
    CHECK(negative_duration(sm, 600.0 - 150.0) == doctest::Approx(450.0));
    CHECK(negative_duration(sm, -20.0) == 0.0);
    CHECK(negative_duration(sm, 700.0) == 600.0);
}

TEST_CASE("start of preictal convergence") {
    std::vector<double> step(75, 0.0);
    std::fill(step.end() - 8, step.end(), 1.0);
    const auto s = spc(blocks(step));
    CHECK(s.spc_min == doctest::Approx(64.0));
    CHECK(s.n_spc == 8);

    std::vector<double> ramp(75);
    for (std::size_t i = 0; i < 75; ++i) ramp[i] = (static_cast<double>(i) + 0.5) / 75.0;
    CHECK(spc(blocks(ramp)).spc_min == doctest::Approx(spc_oracle(blocks(ramp))));

    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> y(20 + rng.below(60));
        for (auto& v : y) v = rng.uniform() < 0.3 ? 1.0 : rng.uniform(0.9, 1.0);
        const auto sm = blocks(y);
        CHECK(spc(sm).spc_min == doctest::Approx(spc_oracle(sm)));
    }

    CHECK(spc(blocks(std::vector<double>(75, 0.3))).spc_min == doctest::Approx(600.0));
    CHECK_THROWS_AS(spc(blocks({1.0, 1.0})), ValidationError);
}

TEST_CASE("region errors") {
    std::vector<double> y{0.0, 0.1, 0.2, 0.5, 0.5, 0.5, 0.5, 0.9, 0.8, 1.0};
    const auto e = region_errors(blocks(y), 24.0, 20.0);
    CHECK(e.n_spc == 3);
    CHECK(e.spc_err == doctest::Approx(0.1));
    CHECK(e.n_nd == 3);
    CHECK(e.nd_err == doctest::Approx(0.1));
    CHECK(region_errors(blocks({0, 0, 0, 1, 1, 1}), 24.0, 0.0).spc_err == 0.0);
    const auto empty = region_errors(blocks(y), 0.0, -1.0);
    CHECK(empty.n_spc == 0);
    CHECK(empty.n_nd == 0);
    CHECK(empty.spc_err == 0.0);
}

TEST_CASE("optimal period components") {
    CHECK(eta_weight(60, 120, 0) == doctest::Approx(0.5));
    CHECK(ciopc_value(60, 120, 0) == doctest::Approx(120.0));
    CHECK(eta_weight(100, 50, 0) == 1.0);
    CHECK(ciopc_value(100, 50, 0) == doctest::Approx(150.0));
    CHECK(ciopc_value(40, 0, 0) == doctest::Approx(40.0));
    CHECK(ciopc_value(0, 0, 0) == 0.0);

    std::vector<CioprReport> group(2);
    group[0].inflection_min = 80;
    group[0].nd_err = 0.25;
    group[0].spc_eff = 50;
    group[1].inflection_min = 30;
    compute_ciopc(group);
    CHECK(group[0].infl_comp == doctest::Approx(50 * 0.75));
    CHECK(group[1].infl_comp == 0.0);
    CHECK(group[0].ciopc == doctest::Approx(50 + 37.5));
}

TEST_CASE("normalization") {
    const auto n = ciopr_normalize(std::vector<double>{120, 90, 60, 30});
    CHECK(*n[0] == 1.0);
    CHECK(*n[1] == 0.75);
    CHECK(*n[2] == 0.5);
    CHECK(*n[3] == 0.25);
    CHECK(*ciopr_normalize(std::vector<double>{42})[0] == 1.0);
    for (const auto& v : ciopr_normalize(std::vector<double>{0, -1})) CHECK_FALSE(v);
    CHECK_THROWS_AS(ciopr_normalize(std::vector<double>{}), ValidationError);
}

TEST_CASE("normalization invariances over random groups") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(4);
        for (auto& x : v) x = rng.uniform(0.1, 300.0);
        const double k = rng.uniform(0.01, 100.0);
        std::vector<double> w;
        for (double x : v) w.push_back(k * x);
        const auto a = ciopr_normalize(v), b = ciopr_normalize(w);
        std::size_t arg_a = 0, arg_b = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(*a[i] - *b[i]) < 1e-12);
            CHECK(*a[i] <= 1.0);
            if (*a[i] > *a[arg_a]) arg_a = i;
            if (*b[i] > *b[arg_b]) arg_b = i;
        }
        CHECK(arg_a == arg_b);
        CHECK(*a[arg_a] == 1.0);
    }
}

TEST_CASE("larger convergence error never raises the score") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const double spc_min = rng.uniform(0, 600), nd_eff = rng.uniform(0, 600), infl = rng.uniform(0, 100);
        const double e1 = rng.uniform(), e2 = rng.uniform();
        const double lo = std::min(e1, e2), hi = std::max(e1, e2);
        CHECK(ciopc_value(spc_min * (1 - hi), nd_eff, infl) <= ciopc_value(spc_min * (1 - lo), nd_eff, infl) + 1e-12);
    }
}

TEST_CASE("earlier convergence ranks higher") {
    std::vector<SeriesByDefinition> group;
    for (int d : {60, 45, 30, 15}) group.push_back({d, rising(static_cast<double>(d), 0.4, 600.0)});
    const auto g = evaluate_group(group);
    REQUIRE_FALSE(g.excluded);
    REQUIRE(g.reports.size() == 4);
    for (std::size_t i = 0; i + 1 < 4; ++i) CHECK(*g.reports[i].ciopr > *g.reports[i + 1].ciopr);
    CHECK(*g.reports[0].ciopr == 1.0);
}

TEST_CASE("a flat curve excludes the whole group") {
    PredictionSeries flat;
    for (std::size_t k = 7200; k >= 1; --k) flat.entries.push_back({k / 12.0, 0.5});
    const auto g = evaluate_group({{60, rising(60, 0.4, 600)}, {45, flat}});
    CHECK(g.excluded);
    CHECK(g.reports.empty());
    CHECK(g.reason.find("45 min") != std::string::npos);
}
