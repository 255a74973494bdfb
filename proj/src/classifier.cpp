#include "preictal/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <fftw3.h>
#include <json.hpp>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal {

const std::vector<Band>& feature_bands() {
    static const std::vector<Band> bands{
        {"delta", 0.5, 4.0}, {"theta", 4.0, 8.0}, {"alpha", 8.0, 13.0}, {"beta", 13.0, 30.0}, {"gamma", 30.0, 45.0}};
    return bands;
}

void FeatureTable::push_back(std::span<const double> row) {
    if (dim_ == 0) dim_ = row.size();
    if (row.size() != dim_) throw ValidationError("feature length mismatch");
    values_.insert(values_.end(), row.begin(), row.end());
}

struct FeatureExtractor::Plan {
    std::size_t n = 0;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    void reset(std::size_t size) {
        release();
        n = size;
        in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    void release() {
        if (plan) fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
        plan = nullptr;
        in = nullptr;
        out = nullptr;
    }
    ~Plan() { release(); }
};

FeatureExtractor::FeatureExtractor(double sample_rate_hz) : rate_(sample_rate_hz), plan_(std::make_unique<Plan>()) {}
FeatureExtractor::~FeatureExtractor() = default;

FeatureVector FeatureExtractor::compute(std::span<const double> channel_major, std::size_t n_channels, std::size_t n) {
    if (plan_->n != n) plan_->reset(n);
    const auto& bands = feature_bands();
    const double df = rate_ / static_cast<double>(n);
    FeatureVector out;
    out.reserve(n_channels * bands.size());
    for (std::size_t c = 0; c < n_channels; ++c) {
        std::copy_n(channel_major.begin() + static_cast<std::ptrdiff_t>(c * n), n, plan_->in);
        fftw_execute(plan_->plan);
        std::vector<double> power(bands.size(), 0.0);
        for (std::size_t k = 1; k <= n / 2; ++k) {
            const double f = static_cast<double>(k) * df;
            const double re = plan_->out[k][0], im = plan_->out[k][1];
            // One-sided periodogram density times bin width.
            const double fold = (2 * k == n) ? 1.0 : 2.0;
            const double p = fold * (re * re + im * im) / (rate_ * static_cast<double>(n)) * df;
            for (std::size_t b = 0; b < bands.size(); ++b) {
                if (f >= bands[b].low_hz && f < bands[b].high_hz) power[b] += p;
            }
        }
        for (double p : power) out.push_back(std::log(p + kLogPowerFloor));
    }
    return out;
}

FeatureVector FeatureExtractor::operator()(const Segment& seg) {
    return compute(seg.samples, seg.n_channels, seg.n_samples);
}

FeatureVector FeatureExtractor::operator()(const Recording& rec, std::int64_t offset_sample, std::size_t length) {
    if (offset_sample < 0 || static_cast<std::size_t>(offset_sample) + length > rec.n_samples()) {
        throw ValidationError("feature window exceeds recording");
    }
    std::vector<double> buf(rec.n_channels() * length);
    for (std::size_t c = 0; c < rec.n_channels(); ++c) {
        std::copy_n(rec.channel(c).begin() + offset_sample, length, buf.begin() + static_cast<std::ptrdiff_t>(c * length));
    }
    return compute(buf, rec.n_channels(), length);
}

FeatureVector extract_features(const Segment& seg, double sample_rate_hz) {
    FeatureExtractor fx(sample_rate_hz);
    return fx(seg);
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double BaselineModel::score(std::span<const double> features) const {
    if (features.size() != feature_dim()) {
        throw ValidationError("feature length " + std::to_string(features.size()) + " does not match model (" +
                              std::to_string(feature_dim()) + ")");
    }
    double z = weights[0];
    for (std::size_t i = 0; i < features.size(); ++i) {
        z += weights[i + 1] * (features[i] - feature_mean[i]) / feature_scale[i];
    }
    return z;
}

double BaselineModel::probability(std::span<const double> features) const { return sigmoid(score(features)); }

BaselineModel BaselineModel::zeros(std::size_t feature_dim) {
    BaselineModel m;
    m.weights.assign(feature_dim + 1, 0.0);
    m.feature_mean.assign(feature_dim, 0.0);
    m.feature_scale.assign(feature_dim, 1.0);
    return m;
}

double binary_cross_entropy(const BaselineModel& model, const FeatureTable& x, std::span<const int> labels) {
    if (x.rows() == 0) return 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double z = model.score(x.row(i));
        // -[y log s(z) + (1-y) log(1 - s(z))]
        loss += labels[i] ? softplus(-z) : softplus(z);
    }
    return loss / static_cast<double>(x.rows());
}

BaselineModel train_baseline(const FeatureTable& train, std::span<const int> train_labels, const FeatureTable& val,
                             std::span<const int> val_labels, const TrainConfig& config) {
    if (config.max_epochs <= 0) throw ValidationError("training needs at least one epoch");
    if (config.batch_size <= 0 || !(config.learning_rate > 0)) throw ValidationError("invalid optimizer settings");
    if (train.rows() == 0 || train.rows() != train_labels.size()) throw ValidationError("training set is empty or mislabeled");
    if (val.rows() != val_labels.size()) throw ValidationError("validation labels do not match features");
    const auto positives = std::count(train_labels.begin(), train_labels.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(train_labels.size())) {
        throw ValidationError("training set contains a single class");
    }

    const std::size_t dim = train.dim();
    const std::size_t n = train.rows();
    BaselineModel model = BaselineModel::zeros(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) model.feature_mean[j] += train.row(i)[j];
    }
    for (auto& m : model.feature_mean) m /= static_cast<double>(n);
    std::vector<double> var(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = train.row(i)[j] - model.feature_mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(n));
        model.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
    }

    // Standardized design matrix with a leading 1 for the bias.
    const std::size_t w = dim + 1;
    std::vector<double> z(n * w);
    for (std::size_t i = 0; i < n; ++i) {
        z[i * w] = 1.0;
        for (std::size_t j = 0; j < dim; ++j) {
            z[i * w + j + 1] = (train.row(i)[j] - model.feature_mean[j]) / model.feature_scale[j];
        }
    }

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-7;
    std::vector<double> m(w, 0.0), v(w, 0.0), vhat(w, 0.0), grad(w);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t step = 0;

    const bool use_val = val.rows() > 0;
    BaselineModel best = model;
    double best_loss = INFINITY;
    int since_best = 0;
    model.meta.seed = config.seed;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = start; b < end; ++b) {
                const double* row = &z[order[b] * w];
                double s = 0.0;
                for (std::size_t j = 0; j < w; ++j) s += model.weights[j] * row[j];
                const double err = sigmoid(s) - train_labels[order[b]];
                for (std::size_t j = 0; j < w; ++j) grad[j] += err * row[j];
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t j = 0; j < w; ++j) {
                const double g = grad[j] * inv;
                m[j] = beta1 * m[j] + (1 - beta1) * g;
                v[j] = beta2 * v[j] + (1 - beta2) * g * g;
                vhat[j] = std::max(vhat[j], v[j]);
                model.weights[j] -= config.learning_rate * (m[j] / bc1) / (std::sqrt(vhat[j] / bc2) + eps);
            }
        }
        const double tr_loss = binary_cross_entropy(model, train, train_labels);
        const double va_loss = use_val ? binary_cross_entropy(model, val, val_labels) : tr_loss;
        model.meta.train_loss.push_back(tr_loss);
        model.meta.validation_loss.push_back(va_loss);
        model.meta.epochs_run = epoch;
        if (va_loss < best_loss) {
            best_loss = va_loss;
            best.weights = model.weights;
            best.meta.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    best.feature_mean = model.feature_mean;
    best.feature_scale = model.feature_scale;
    const int best_epoch = best.meta.best_epoch;
    best.meta = model.meta;
    best.meta.best_epoch = best_epoch;
    return best;
}

void save_model(const BaselineModel& model, const std::filesystem::path& path) {
    nlohmann::json j = {{"weights", model.weights},
                        {"feature_mean", model.feature_mean},
                        {"feature_scale", model.feature_scale},
                        {"epochs_run", model.meta.epochs_run},
                        {"best_epoch", model.meta.best_epoch},
                        {"train_loss", model.meta.train_loss},
                        {"validation_loss", model.meta.validation_loss},
                        {"seed", model.meta.seed}};
    auto out = csv::open_out(path);
    out << j.dump(1) << '\n';
}

BaselineModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(csv::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    BaselineModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_scale = j.at("feature_scale").get<std::vector<double>>();
    m.meta.epochs_run = j.value("epochs_run", 0);
    m.meta.best_epoch = j.value("best_epoch", 0);
    m.meta.train_loss = j.value("train_loss", std::vector<double>{});
    m.meta.validation_loss = j.value("validation_loss", std::vector<double>{});
    m.meta.seed = j.value("seed", std::uint64_t{0});
    if (m.weights.size() != m.feature_mean.size() + 1 || m.feature_mean.size() != m.feature_scale.size()) {
        throw ValidationError(path.string() + ": weight length does not match feature length + 1");
    }
    return m;
}

std::vector<double> predict(const BaselineModel& model, const FeatureTable& features) {
    std::vector<double> out;
    out.reserve(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) out.push_back(model.probability(features.row(i)));
    return out;
}

PredictionSeries predict_series(const BaselineModel& model, const FeatureTable& features,
                                std::span<const SegmentRef> segments, std::string source) {
    if (features.rows() != segments.size()) throw ValidationError("one feature row per segment required");
    PredictionSeries s;
    s.source = std::move(source);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (!segments[i].t_onset_min) throw ValidationError("segment without time-to-onset in prediction series");
        s.entries.push_back({*segments[i].t_onset_min, model.probability(features.row(i))});
    }
    std::stable_sort(s.entries.begin(), s.entries.end(),
                     [](const auto& a, const auto& b) { return a.t_onset_min > b.t_onset_min; });
    return s;
}

void export_predictions(const PredictionSeries& series, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "t_onset_min,y\n";
    for (const auto& e : series.entries) out << csv::fixed(e.t_onset_min) << ',' << csv::fixed(e.y) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

PredictionSeries parse_predictions(std::string_view text, const std::string& source) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "t_onset_min,y") {
        throw ValidationError(source + ": expected header 't_onset_min,y'");
    }
    PredictionSeries s;
    s.source = source;
    std::map<double, std::size_t> seen;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        const auto ctx = source + " row " + std::to_string(row);
        if (cells.size() != 2) throw ValidationError(ctx + ": expected 2 cells");
        const double t = csv::to_double(cells[0], ctx);
        const double y = csv::to_double(cells[1], ctx);
        if (y < 0.0 || y > 1.0) throw ValidationError(ctx + ": y = " + std::string(csv::trim(cells[1])) + " outside [0, 1]");
        if (t < 0.0) throw ValidationError(ctx + ": negative t_onset_min");
        if (const auto [it, fresh] = seen.emplace(t, row); !fresh) {
            throw ValidationError(ctx + ": duplicate t_onset_min (first at row " + std::to_string(it->second) + ")");
        }
        s.entries.push_back({t, y});
    }
    std::stable_sort(s.entries.begin(), s.entries.end(),
                     [](const auto& a, const auto& b) { return a.t_onset_min > b.t_onset_min; });
    return s;
}

PredictionSeries import_predictions(const std::filesystem::path& path) {
    return parse_predictions(csv::read_text(path), path.string());
}

}  // namespace preictal
