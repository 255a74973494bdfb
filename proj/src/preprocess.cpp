#include "preictal/preprocess.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include <fftw3.h>

#include "preictal/error.hpp"

namespace preictal {

namespace {

std::vector<double> windowed_lowpass(double cutoff_hz, double rate, int order) {
    const double fc = cutoff_hz / rate;
    const double half = order / 2.0;
    std::vector<double> h(static_cast<std::size_t>(order) + 1);
    double sum = 0.0;
    for (int n = 0; n <= order; ++n) {
        const double m = n - half;
        const double sinc = m == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
        const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / order);
        h[n] = sinc * w;
        sum += h[n];
    }
    for (auto& v : h) v /= sum;
    return h;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct PlanFree {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanFree>;

/// Overlap-add convolver for one kernel.
class FftConvolver {
public:
    explicit FftConvolver(std::span<const double> kernel) : klen_(kernel.size()) {
        n_ = 1;
        while (n_ < 4 * klen_) n_ <<= 1;
        block_ = n_ - klen_ + 1;
        time_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n_)));
        freq_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n_ / 2 + 1))));
        forward_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n_), time_.get(), freq_.get(), FFTW_ESTIMATE));
        inverse_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n_), freq_.get(), time_.get(), FFTW_ESTIMATE));
        std::fill(time_.get(), time_.get() + n_, 0.0);
        std::copy(kernel.begin(), kernel.end(), time_.get());
        fftw_execute(forward_.get());
        kspec_.resize(n_ / 2 + 1);
        for (std::size_t k = 0; k <= n_ / 2; ++k) kspec_[k] = {freq_.get()[k][0], freq_.get()[k][1]};
    }

    /// Full linear convolution, length x.size() + klen - 1.
    std::vector<double> convolve(std::span<const double> x) {
        std::vector<double> y(x.size() + klen_ - 1, 0.0);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t start = 0; start < x.size(); start += block_) {
            const std::size_t len = std::min(block_, x.size() - start);
            std::fill(time_.get(), time_.get() + n_, 0.0);
            std::copy(x.begin() + start, x.begin() + start + len, time_.get());
            fftw_execute(forward_.get());
            for (std::size_t k = 0; k <= n_ / 2; ++k) {
                const std::complex<double> v(freq_.get()[k][0], freq_.get()[k][1]);
                const auto p = v * kspec_[k];
                freq_.get()[k][0] = p.real();
                freq_.get()[k][1] = p.imag();
            }
            fftw_execute(inverse_.get());
            const std::size_t out_len = std::min(len + klen_ - 1, y.size() - start);
            for (std::size_t i = 0; i < out_len; ++i) y[start + i] += time_.get()[i] * scale;
        }
        return y;
    }

private:
    std::size_t klen_, n_ = 0, block_ = 0;
    std::unique_ptr<double, FftwFree> time_;
    std::unique_ptr<fftw_complex, FftwFree> freq_;
    PlanPtr forward_, inverse_;
    std::vector<std::complex<double>> kspec_;
};

}  // namespace

FilterKernel design_fir_bandpass(double sample_rate_hz, double low_hz, double high_hz, int order) {
    if (!(sample_rate_hz > 0)) throw ValidationError("sample rate must be positive");
    if (!(low_hz > 0 && low_hz < high_hz && high_hz < sample_rate_hz / 2)) {
        throw ValidationError("band edges must satisfy 0 < low < high < Nyquist");
    }
    if (order < 2 || order % 2 != 0) throw ValidationError("filter order must be even and positive");

    const auto hi = windowed_lowpass(high_hz, sample_rate_hz, order);
    const auto lo = windowed_lowpass(low_hz, sample_rate_hz, order);
    FilterKernel k;
    k.order = order;
    k.design = {low_hz, high_hz, WindowKind::hamming, sample_rate_hz};
    k.taps.resize(hi.size());
    for (std::size_t i = 0; i < hi.size(); ++i) k.taps[i] = hi[i] - lo[i];
    // Exact symmetry regardless of rounding in the two designs.
    for (std::size_t i = 0; i < k.taps.size() / 2; ++i) k.taps[k.taps.size() - 1 - i] = k.taps[i];
    return k;
}

double magnitude_response(const FilterKernel& kernel, double freq_hz) {
    const double w = 2.0 * std::numbers::pi * freq_hz / kernel.design.sample_rate_hz;
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < kernel.taps.size(); ++n) {
        re += kernel.taps[n] * std::cos(w * static_cast<double>(n));
        im -= kernel.taps[n] * std::sin(w * static_cast<double>(n));
    }
    return std::hypot(re, im);
}

Recording common_average_reference(const Recording& rec) {
    const std::size_t nc = rec.n_channels();
    if (nc < 2) throw ValidationError("common average reference needs at least two channels");
    const std::size_t ns = rec.n_samples();
    std::vector<double> mean(ns, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto ch = rec.channel(c);
        for (std::size_t t = 0; t < ns; ++t) mean[t] += ch[t];
    }
    for (auto& m : mean) m /= static_cast<double>(nc);
    std::vector<double> out(rec.data().begin(), rec.data().end());
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t t = 0; t < ns; ++t) out[c * ns + t] -= mean[t];
    }
    return rec.with_data(std::move(out));
}

namespace {

std::vector<double> zero_phase(FftConvolver& conv, std::span<const double> x, std::size_t half) {
    std::vector<double> padded(x.size() + 2 * half);
    for (std::size_t i = 0; i < half; ++i) {
        padded[half - 1 - i] = x[i + 1];
        padded[half + x.size() + i] = x[x.size() - 2 - i];
    }
    std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(half));
    const auto full = conv.convolve(padded);
    return {full.begin() + static_cast<std::ptrdiff_t>(2 * half),
            full.begin() + static_cast<std::ptrdiff_t>(2 * half + x.size())};
}

}  // namespace

std::vector<double> filter_channel(std::span<const double> x, const FilterKernel& kernel) {
    if (x.size() <= kernel.taps.size()) throw ValidationError("signal is shorter than the filter kernel");
    FftConvolver conv(kernel.taps);
    return zero_phase(conv, x, static_cast<std::size_t>(kernel.order) / 2);
}

Recording apply_filter(const Recording& rec, const FilterKernel& kernel) {
    if (rec.n_samples() <= kernel.taps.size()) throw ValidationError("recording is shorter than the filter kernel");
    if (std::abs(rec.sample_rate_hz() - kernel.design.sample_rate_hz) > 1e-9) {
        throw ValidationError("kernel was designed for a different sample rate");
    }
    const std::size_t ns = rec.n_samples();
    std::vector<double> out(rec.data().size());
    FftConvolver conv(kernel.taps);
    for (std::size_t c = 0; c < rec.n_channels(); ++c) {
        const auto y = zero_phase(conv, rec.channel(c), static_cast<std::size_t>(kernel.order) / 2);
        std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(c * ns));
    }
    return rec.with_data(std::move(out));
}

const char* to_string(Label label) {
    switch (label) {
        case Label::interictal: return "0";
        case Label::preictal: return "1";
        default: return "unlabeled";
    }
}

Label label_from_string(const std::string& s) {
    if (s == "0") return Label::interictal;
    if (s == "1") return Label::preictal;
    if (s == "unlabeled") return Label::unlabeled;
    throw ValidationError("unknown label '" + s + "'");
}

std::vector<std::int64_t> epoch_offsets(std::size_t n_samples, double sample_rate_hz, double epoch_s) {
    const auto len = static_cast<std::int64_t>(std::llround(epoch_s * sample_rate_hz));
    if (len <= 0) throw ValidationError("epoch length must be positive");
    std::vector<std::int64_t> out;
    for (std::int64_t off = 0; off + len <= static_cast<std::int64_t>(n_samples); off += len) out.push_back(off);
    return out;
}

std::vector<Segment> epoch(const Recording& rec, double epoch_s, const std::string& file) {
    const auto len = static_cast<std::size_t>(std::llround(epoch_s * rec.sample_rate_hz()));
    std::vector<Segment> out;
    for (const auto off : epoch_offsets(rec.n_samples(), rec.sample_rate_hz(), epoch_s)) {
        SegmentRef ref;
        ref.patient_id = rec.patient_id();
        ref.file = file;
        ref.offset_sample = off;
        out.push_back(extract_segment(rec, ref, len));
    }
    return out;
}

Segment extract_segment(const Recording& rec, const SegmentRef& ref, std::size_t epoch_samples) {
    if (ref.offset_sample < 0 || static_cast<std::size_t>(ref.offset_sample) + epoch_samples > rec.n_samples()) {
        throw ValidationError("segment at sample " + std::to_string(ref.offset_sample) + " exceeds recording " +
                              ref.file);
    }
    Segment s;
    s.ref = ref;
    s.n_channels = rec.n_channels();
    s.n_samples = epoch_samples;
    s.samples.resize(s.n_channels * epoch_samples);
    for (std::size_t c = 0; c < s.n_channels; ++c) {
        const auto ch = rec.channel(c);
        std::copy_n(ch.begin() + ref.offset_sample, epoch_samples, s.samples.begin() + static_cast<std::ptrdiff_t>(c * epoch_samples));
    }
    return s;
}

}  // namespace preictal
