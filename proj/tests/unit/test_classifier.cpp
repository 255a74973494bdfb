#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "preictal/classifier.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"
#include "support.hpp"

using namespace preictal;

namespace {

Segment sine_segment(double f, double amp, std::size_t channels = 2) {
    Segment s;
    s.n_channels = channels;
    s.n_samples = 1280;
    s.samples.resize(channels * 1280);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < 1280; ++i) {
            s.samples[c * 1280 + i] = amp * std::sin(2 * std::numbers::pi * f * i / 256.0 + 0.4 * c);
        }
    }
    return s;
}

struct Blobs {
    FeatureTable x{3};
    std::vector<int> y;
};

// Two Gaussian clouds separated along a fixed direction with a clear margin.
Blobs separable(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Blobs b;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double shift = label ? 3.0 : -3.0;
        const std::vector<double> row{shift + 0.7 * rng.normal(), 0.5 * shift + rng.normal(), rng.normal()};
        b.x.push_back(row);
        b.y.push_back(label);
    }
    return b;
}

// Plain full-batch gradient descent logistic regression on raw features.
std::vector<double> reference_logistic(const Blobs& b) {
    std::vector<double> w(4, 0.0);
    for (int it = 0; it < 2000; ++it) {
        std::vector<double> g(4, 0.0);
        for (std::size_t i = 0; i < b.x.rows(); ++i) {
            const auto r = b.x.row(i);
            double z = w[0];
            for (std::size_t j = 0; j < 3; ++j) z += w[j + 1] * r[j];
            const double e = 1.0 / (1.0 + std::exp(-z)) - b.y[i];
            g[0] += e;
            for (std::size_t j = 0; j < 3; ++j) g[j + 1] += e * r[j];
        }
        for (std::size_t j = 0; j < 4; ++j) w[j] -= 0.1 * g[j] / static_cast<double>(b.x.rows());
    }
    return w;
}

}  // namespace

TEST_CASE("alpha sinusoid dominates the alpha band") {
    const auto f = extract_features(sine_segment(10.0, 1.0));
    REQUIRE(f.size() == 10);
    for (std::size_t c = 0; c < 2; ++c) {
        const double alpha = f[c * 5 + 2];
        for (std::size_t b = 0; b < 5; ++b) {
            if (b != 2) CHECK(alpha >= f[c * 5 + b] + 2.0);
        }
    }
}

TEST_CASE("band power scales with amplitude squared") {
    const auto one = extract_features(sine_segment(20.0, 1.0));
    const auto two = extract_features(sine_segment(20.0, 2.0));
    CHECK(two[3] - one[3] == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("all-zero segment hits the log floor") {
    Segment s;
    s.n_channels = 3;
    s.n_samples = 1280;
    s.samples.assign(3 * 1280, 0.0);
    for (double v : extract_features(s)) CHECK(v == doctest::Approx(std::log(kLogPowerFloor)));
}

TEST_CASE("training separates a separable set") {
    const auto train = separable(600, 1);
    const auto val = separable(100, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.max_epochs = 60;
    cfg.seed = 3;
    const auto model = train_baseline(train.x, train.y, val.x, val.y, cfg);
    const auto p = predict(model, train.x);
    std::size_t correct = 0, agree = 0;
    const auto ref = reference_logistic(train);
    for (std::size_t i = 0; i < p.size(); ++i) {
        correct += (p[i] >= 0.5) == (train.y[i] == 1);
        const auto r = train.x.row(i);
        const double z = ref[0] + ref[1] * r[0] + ref[2] * r[1] + ref[3] * r[2];
        agree += (p[i] >= 0.5) == (z >= 0.0);
    }
    CHECK(static_cast<double>(correct) / p.size() >= 0.99);
    CHECK(static_cast<double>(agree) / p.size() >= 0.99);
    CHECK(model.meta.best_epoch >= 1);
    CHECK(model.meta.best_epoch <= model.meta.epochs_run);
}

TEST_CASE("flipping every label negates the weights") {
    const auto train = separable(300, 4);
    const auto val = separable(60, 5);
    auto flip = [](std::vector<int> y) {
        for (auto& v : y) v = 1 - v;
        return y;
    };
    TrainConfig cfg;
    cfg.max_epochs = 15;
    cfg.seed = 9;
    const auto a = train_baseline(train.x, train.y, val.x, val.y, cfg);
    const auto b = train_baseline(train.x, flip(train.y), val.x, flip(val.y), cfg);
    REQUIRE(a.weights.size() == b.weights.size());
    for (std::size_t i = 0; i < a.weights.size(); ++i) CHECK(std::abs(a.weights[i] + b.weights[i]) < 1e-2);
}

TEST_CASE("training configuration errors") {
    const auto train = separable(20, 1);
    TrainConfig cfg;
    cfg.max_epochs = 0;
    CHECK_THROWS_AS(train_baseline(train.x, train.y, train.x, train.y, cfg), ValidationError);
    std::vector<int> same(train.y.size(), 1);
    CHECK_THROWS_AS(train_baseline(train.x, same, train.x, same, {}), ValidationError);
}

TEST_CASE("zero model predicts one half") {
    const auto model = BaselineModel::zeros(3);
    const auto data = separable(50, 7);
    for (double p : predict(model, data.x)) CHECK(p == 0.5);
}

TEST_CASE("probability is monotone in the score") {
    auto model = BaselineModel::zeros(1);
    model.weights = {0.2, 1.5};
    double prev = -1.0;
    for (double x = -5; x <= 5; x += 0.25) {
        const std::vector<double> f{x};
        const double p = model.probability(f);
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("prediction series over 600 minutes") {
    const auto model = BaselineModel::zeros(1);
    FeatureTable table(1);
    std::vector<SegmentRef> refs(7200);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        table.push_back(std::vector<double>{0.0});
        refs[i].t_onset_min = (7200.0 - static_cast<double>(i)) * 5.0 / 60.0;
    }
    const auto s = predict_series(model, table, refs);
    CHECK(s.entries.size() == 7200);
    CHECK(s.entries.front().t_onset_min == doctest::Approx(600.0));
    refs[3].t_onset_min.reset();
    CHECK_THROWS_AS(predict_series(model, table, refs), ValidationError);
}

TEST_CASE("prediction exchange format") {
    testing::TempDir dir("pred");
    PredictionSeries s;
    s.entries = {{10.0, 0.123456789}, {5.0, 0.5}, {0.0833333, 1.0}};
    export_predictions(s, dir / "p.csv");
    const auto text = testing::slurp(dir / "p.csv");
    CHECK(text.rfind("t_onset_min,y\n10.000000,0.123457\n", 0) == 0);
    const auto back = import_predictions(dir / "p.csv");
    REQUIRE(back.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(back.entries[i].y - s.entries[i].y) <= 1e-6);
        CHECK(std::abs(back.entries[i].t_onset_min - s.entries[i].t_onset_min) <= 1e-6);
    }

    CHECK(parse_predictions("t_onset_min,y\n1.0,0.2\n0.5,0.3\n").entries.size() == 2);
    const auto sorted = parse_predictions("t_onset_min,y\n0.5,0.3\n2.0,0.1\n1.0,0.2\n");
    CHECK(sorted.entries[0].t_onset_min == 2.0);
    CHECK(sorted.entries[2].t_onset_min == 0.5);

    try {
        parse_predictions("t_onset_min,y\n1.0,0.2\n0.5,1.2\n");
        FAIL("expected rejection");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_predictions("t_onset_min,y\n1.0,0.2\n1.0,0.3\n"), ValidationError);
    CHECK_THROWS_AS(parse_predictions("time,y\n1.0,0.2\n"), ValidationError);
    CHECK_THROWS_AS(import_predictions(dir / "missing.csv"), IoError);
}

TEST_CASE("model files round trip") {
    testing::TempDir dir("model");
    auto m = BaselineModel::zeros(2);
    m.weights = {0.1, -0.25, 3.5};
    m.feature_mean = {1.0, 2.0};
    m.feature_scale = {0.5, 4.0};
    m.meta.epochs_run = 7;
    save_model(m, dir / "m.json");
    const auto back = load_model(dir / "m.json");
    CHECK(back.weights == m.weights);
    CHECK(back.feature_mean == m.feature_mean);
    CHECK(back.feature_scale == m.feature_scale);
    CHECK(back.meta.epochs_run == 7);
}
