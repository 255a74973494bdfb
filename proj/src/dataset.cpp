#include "preictal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal {

namespace {

constexpr double kEps = 1e-9;

Interval intersect(Interval a, Interval b) { return {std::max(a.start, b.start), std::min(a.end, b.end)}; }

/// Removes every `cut` from `iv`; result pieces are ordered and non-empty.
std::vector<Interval> subtract(Interval iv, const std::vector<Interval>& cuts) {
    std::vector<Interval> out{iv};
    for (const auto& c : cuts) {
        std::vector<Interval> next;
        for (const auto& p : out) {
            if (c.end <= p.start || c.start >= p.end) {
                next.push_back(p);
                continue;
            }
            if (c.start > p.start) next.push_back({p.start, c.start});
            if (c.end < p.end) next.push_back({c.end, p.end});
        }
        out = std::move(next);
    }
    std::erase_if(out, [](const Interval& p) { return p.length() <= kEps; });
    return out;
}

std::int64_t to_sample(double seconds, double rate) { return std::llround(seconds * rate); }

}  // namespace

PreictalDefinition::PreictalDefinition(int minutes) : minutes_(minutes) {
    if (minutes != 60 && minutes != 45 && minutes != 30 && minutes != 15) {
        throw ValidationError("preictal definition must be one of 60, 45, 30, 15 minutes (got " +
                              std::to_string(minutes) + ")");
    }
}

const std::vector<PreictalDefinition>& PreictalDefinition::all() {
    static const std::vector<PreictalDefinition> defs{PreictalDefinition(60), PreictalDefinition(45),
                                                      PreictalDefinition(30), PreictalDefinition(15)};
    return defs;
}

const FileSpan* PatientTimeline::file_at(double t) const {
    for (const auto& f : files) {
        if (f.has_data && t >= f.start_s - kEps && t < f.end_s() - kEps) return &f;
    }
    return nullptr;
}

const FileSpan* PatientTimeline::file_named(const std::string& name) const {
    for (const auto& f : files) {
        if (f.file == name) return &f;
    }
    return nullptr;
}

PatientTimeline build_timeline(const std::string& patient_id, const Summary& summary,
                               const std::map<std::string, double>& durations_s, double sample_rate_hz) {
    PatientTimeline tl;
    tl.patient_id = patient_id;
    tl.sample_rate_hz = sample_rate_hz;
    double day = 0.0;
    double prev_start = -1.0;
    double prev_end = 0.0;
    for (const auto& sf : summary.files) {
        FileSpan span;
        span.file = sf.file_name;
        const auto dur = durations_s.find(sf.file_name);
        span.has_data = dur != durations_s.end();
        if (span.has_data) {
            span.duration_s = dur->second;
        } else if (sf.start_clock_s && sf.end_clock_s) {
            span.duration_s = std::fmod(*sf.end_clock_s - *sf.start_clock_s + 86400.0, 86400.0);
        }
        if (sf.start_clock_s) {
            double t = *sf.start_clock_s + day;
            while (prev_start >= 0.0 && t < prev_start) {
                day += 86400.0;
                t += 86400.0;
            }
            span.start_s = t;
        } else {
            span.start_s = prev_start < 0.0 ? 0.0 : prev_end + 86400.0;
        }
        prev_start = span.start_s;
        prev_end = span.end_s();
        tl.files.push_back(span);
    }
    std::stable_sort(tl.files.begin(), tl.files.end(),
                     [](const FileSpan& a, const FileSpan& b) { return a.start_s < b.start_s; });

    for (const auto& f : tl.files) {
        const auto* sf = summary.find(f.file);
        for (const auto& s : sf->seizures) {
            tl.seizures.push_back({"", f.file, f.start_s + s.onset_s, f.start_s + s.offset_s});
        }
    }
    std::sort(tl.seizures.begin(), tl.seizures.end(),
              [](const Seizure& a, const Seizure& b) { return a.onset_s < b.onset_s; });
    for (std::size_t i = 0; i < tl.seizures.size(); ++i) {
        tl.seizures[i].id = patient_id + "_s" + std::to_string(i + 1);
    }
    return tl;
}

std::vector<const SeizureRanges*> LabeledRanges::eligible_seizures() const {
    std::vector<const SeizureRanges*> out;
    for (const auto& s : seizures) {
        if (s.eligible) out.push_back(&s);
    }
    return out;
}

std::vector<const SeizureRanges*> LabeledRanges::ciopr_seizures() const {
    std::vector<const SeizureRanges*> out;
    for (const auto& s : seizures) {
        if (s.ciopr_eligible) out.push_back(&s);
    }
    return out;
}

LabeledRanges classify_time_ranges(const PatientTimeline& timeline, const RuleConfig& rules) {
    LabeledRanges out;
    out.patient_id = timeline.patient_id;

    std::vector<Interval> exclusion;
    for (const auto& s : timeline.seizures) {
        exclusion.push_back({s.onset_s - rules.interictal_pre_h * 3600.0, s.offset_s + rules.interictal_post_h * 3600.0});
    }
    for (const auto& f : timeline.files) {
        if (!f.has_data) continue;
        for (const auto& p : subtract({f.start_s, f.end_s()}, exclusion)) out.interictal.push_back(p);
    }

    for (const auto& s : timeline.seizures) {
        SeizureRanges r;
        r.seizure = s;
        double prior_offset = -1e300;
        for (const auto& o : timeline.seizures) {
            if (o.offset_s <= s.onset_s && o.onset_s < s.onset_s) prior_offset = std::max(prior_offset, o.offset_s);
        }
        const Interval candidate{std::max(s.onset_s - rules.preictal_max_min * 60.0,
                                          prior_offset + rules.postictal_guard_h * 3600.0),
                                 s.onset_s};
        for (const auto& f : timeline.files) {
            if (!f.has_data) continue;
            const auto piece = intersect(candidate, {f.start_s, f.end_s()});
            if (piece.length() > kEps) {
                r.preictal.push_back(piece);
                r.preictal_available_s += piece.length();
            }
        }
        r.eligible = r.preictal_available_s >= rules.min_preictal_min * 60.0 - kEps;
        if (!r.eligible) {
            r.exclusion_reason = r.preictal_available_s <= 0.0
                                     ? "no preictal data"
                                     : "preictal data shorter than " + csv::fixed(rules.min_preictal_min, 1) + " min";
        }

        // Walk back through adjacent files for uninterrupted EEG ending at onset.
        const FileSpan* cur = timeline.file_at(s.onset_s - kEps);
        if (cur != nullptr) {
            double start = cur->start_s;
            bool extended = true;
            while (extended) {
                extended = false;
                for (const auto& f : timeline.files) {
                    if (!f.has_data || f.start_s >= start) continue;
                    if (f.end_s() >= start - rules.gap_tolerance_s && f.end_s() <= start + kEps) {
                        start = f.start_s;
                        extended = true;
                        break;
                    }
                }
            }
            start = std::max(start, prior_offset);
            r.continuous_pre_onset_s = std::max(0.0, s.onset_s - start);
            r.ciopr_window = {std::max(start, s.onset_s - rules.ciopr_max_h * 3600.0), s.onset_s};
        }
        r.ciopr_eligible = r.eligible && r.continuous_pre_onset_s > rules.ciopr_min_h * 3600.0;
        out.seizures.push_back(std::move(r));
    }

    double interictal_total = 0.0;
    for (const auto& iv : out.interictal) interictal_total += iv.length();
    const auto n_eligible = out.eligible_seizures().size();
    if (interictal_total <= 0.0) {
        out.patient_reason = "no interictal data";
    } else if (n_eligible < 2) {
        out.patient_reason = "fewer than two eligible seizures";
    }
    out.patient_eligible = out.patient_reason.empty();
    if (!out.patient_eligible) {
        for (auto& r : out.seizures) r.ciopr_eligible = false;
    }
    return out;
}

std::vector<SegmentRef> oversample(const Stretch& stretch, double overlap, double sample_rate_hz, double epoch_s) {
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ValidationError("overlap must lie in [0, 1)");
    if (stretch.end_s - stretch.start_s < epoch_s - kEps) {
        throw ValidationError("preictal stretch of " + csv::fixed(stretch.end_s - stretch.start_s, 3) +
                              " s is shorter than one epoch");
    }
    const double stride = epoch_s * (1.0 - overlap);
    const auto epoch_samples = to_sample(epoch_s, sample_rate_hz);
    const auto k0 = static_cast<std::int64_t>(std::ceil((stretch.onset_s - stretch.end_s) / stride - kEps));
    std::vector<SegmentRef> out;
    for (std::int64_t k = std::max<std::int64_t>(k0, 0);; ++k) {
        const double seg_start = stretch.onset_s - epoch_s - static_cast<double>(k) * stride;
        if (seg_start < stretch.start_s - kEps) break;
        SegmentRef ref;
        ref.patient_id = stretch.patient_id;
        ref.file = stretch.file;
        ref.offset_sample = to_sample(seg_start - stretch.file_start_s, sample_rate_hz);
        if (ref.offset_sample < 0) break;
        const double end_limit = (stretch.end_s - stretch.file_start_s) * sample_rate_hz;
        if (static_cast<double>(ref.offset_sample + epoch_samples) > end_limit + 0.5) continue;
        ref.label = Label::preictal;
        ref.t_onset_min = (stretch.onset_s - seg_start) / 60.0;
        ref.seizure_id = stretch.seizure_id;
        out.push_back(std::move(ref));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Stretch> preictal_stretches(const PatientTimeline& timeline, const SeizureRanges& seizure,
                                        PreictalDefinition def) {
    std::vector<Stretch> out;
    const double onset = seizure.seizure.onset_s;
    for (const auto& piece : seizure.preictal) {
        const Interval kept{std::max(piece.start, onset - def.seconds()), piece.end};
        if (kept.length() <= kEps) continue;
        const FileSpan* f = timeline.file_at(kept.start);
        if (f == nullptr) continue;
        out.push_back({timeline.patient_id, f->file, seizure.seizure.id, f->start_s, kept.start,
                       std::min(kept.end, f->end_s()), onset});
    }
    return out;
}

std::vector<SegmentRef> extract_preictal(const PatientTimeline& timeline, const SeizureRanges& seizure,
                                         PreictalDefinition def, double epoch_s) {
    std::vector<SegmentRef> out;
    for (const auto& st : preictal_stretches(timeline, seizure, def)) {
        if (st.end_s - st.start_s < epoch_s - kEps) continue;
        auto segs = oversample(st, 0.0, timeline.sample_rate_hz, epoch_s);
        out.insert(out.end(), segs.begin(), segs.end());
    }
    return out;
}

std::vector<SegmentRef> interictal_pool(const PatientTimeline& timeline, const LabeledRanges& ranges, double epoch_s) {
    std::vector<SegmentRef> out;
    const double rate = timeline.sample_rate_hz;
    for (const auto& iv : ranges.interictal) {
        const FileSpan* f = timeline.file_at(iv.start);
        if (f == nullptr) continue;
        const auto n = static_cast<std::int64_t>(std::floor(iv.length() / epoch_s + kEps));
        for (std::int64_t j = 0; j < n; ++j) {
            SegmentRef ref;
            ref.patient_id = timeline.patient_id;
            ref.file = f->file;
            ref.offset_sample = to_sample(iv.start - f->start_s + static_cast<double>(j) * epoch_s, rate);
            ref.label = Label::interictal;
            out.push_back(std::move(ref));
        }
    }
    return out;
}

std::vector<SegmentRef> continuous_segments(const PatientTimeline& timeline, const SeizureRanges& seizure,
                                            double epoch_s) {
    std::vector<SegmentRef> out;
    const double onset = seizure.seizure.onset_s;
    const double rate = timeline.sample_rate_hz;
    for (std::int64_t k = 0;; ++k) {
        const double start = onset - epoch_s * static_cast<double>(k + 1);
        if (start < seizure.ciopr_window.start - kEps) break;
        const FileSpan* f = timeline.file_at(start);
        if (f == nullptr || start + epoch_s > f->end_s() + kEps) continue;
        SegmentRef ref;
        ref.patient_id = timeline.patient_id;
        ref.file = f->file;
        ref.offset_sample = to_sample(start - f->start_s, rate);
        ref.label = Label::unlabeled;
        ref.t_onset_min = (onset - start) / 60.0;
        ref.seizure_id = seizure.seizure.id;
        out.push_back(std::move(ref));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

SampleResult sample_interictal(const std::vector<SegmentRef>& pool, std::size_t n, std::uint64_t seed) {
    if (pool.empty()) throw ValidationError("interictal pool is empty");
    SampleResult res;
    res.short_pool = pool.size() < n;
    const std::size_t take = std::min(n, pool.size());
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) res.segments.push_back(pool[i]);
    return res;
}

std::vector<SplitSpec> loocv_splits(const PatientTimeline& timeline, const LabeledRanges& ranges,
                                    PreictalDefinition def, std::uint64_t seed, const SplitConfig& config) {
    const auto eligible = ranges.eligible_seizures();
    if (eligible.size() < 2) {
        throw ValidationError("patient " + timeline.patient_id + " has fewer than two eligible seizures");
    }
    std::vector<std::vector<SegmentRef>> augmented;
    for (const auto* s : eligible) {
        std::vector<SegmentRef> segs;
        for (const auto& st : preictal_stretches(timeline, *s, def)) {
            if (st.end_s - st.start_s < config.epoch_s - kEps) continue;
            auto part = oversample(st, config.overlap, timeline.sample_rate_hz, config.epoch_s);
            segs.insert(segs.end(), part.begin(), part.end());
        }
        augmented.push_back(std::move(segs));
    }
    const auto pool = interictal_pool(timeline, ranges, config.epoch_s);
    if (pool.empty()) throw ValidationError("patient " + timeline.patient_id + " has no interictal data");

    std::vector<SplitSpec> out;
    for (std::size_t si = 0; si < eligible.size(); ++si) {
        for (int run = 0; run < config.n_runs; ++run) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(def.minutes()), si, static_cast<std::uint64_t>(run)));
            SplitSpec split;
            split.patient_id = timeline.patient_id;
            split.test_seizure_id = eligible[si]->seizure.id;
            split.run_index = run;
            split.definition = def;

            std::vector<std::size_t> idx(pool.size());
            std::iota(idx.begin(), idx.end(), 0);
            rng.shuffle(std::span<std::size_t>(idx));

            const auto& test_pre = augmented[si];
            const std::size_t n_test = std::min(test_pre.size(), idx.size());
            if (n_test < test_pre.size()) split.warnings.push_back("interictal pool smaller than test preictal set");
            std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
            std::sort(test_idx.begin(), test_idx.end());
            split.test = test_pre;
            for (auto i : test_idx) split.test.push_back(pool[i]);

            std::vector<SegmentRef> train_pre;
            for (std::size_t o = 0; o < eligible.size(); ++o) {
                if (o != si) train_pre.insert(train_pre.end(), augmented[o].begin(), augmented[o].end());
            }
            const std::size_t remaining = idx.size() - n_test;
            const std::size_t n_train_int = std::min(train_pre.size(), remaining);
            if (n_train_int < train_pre.size()) {
                split.warnings.push_back("interictal pool smaller than training preictal set; sampled all " +
                                         std::to_string(remaining));
            }
            std::vector<SegmentRef> train_int;
            for (std::size_t i = 0; i < n_train_int; ++i) train_int.push_back(pool[idx[n_test + i]]);

            // Stratified validation split, then shuffle each role.
            auto take_val = [&](std::vector<SegmentRef>& cls) {
                rng.shuffle(std::span<SegmentRef>(cls));
                const auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(cls.size())));
                split.validation.insert(split.validation.end(), cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(n_val));
                split.train.insert(split.train.end(), cls.begin() + static_cast<std::ptrdiff_t>(n_val), cls.end());
            };
            take_val(train_pre);
            take_val(train_int);
            rng.shuffle(std::span<SegmentRef>(split.train));
            rng.shuffle(std::span<SegmentRef>(split.validation));
            out.push_back(std::move(split));
        }
    }
    return out;
}

void write_manifest(const std::vector<SplitSpec>& splits, double sample_rate_hz, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "patient,seizure,run,role,file,offset_s,label,t_onset_min\n";
    for (const auto& sp : splits) {
        auto emit = [&](const std::vector<SegmentRef>& segs, const char* role) {
            for (const auto& s : segs) {
                out << sp.patient_id << ',' << sp.test_seizure_id << ',' << sp.run_index << ',' << role << ','
                    << s.file << ',' << csv::fixed(static_cast<double>(s.offset_sample) / sample_rate_hz) << ','
                    << to_string(s.label) << ',' << (s.t_onset_min ? csv::fixed(*s.t_onset_min) : "") << '\n';
            }
        };
        emit(sp.train, "train");
        emit(sp.validation, "validation");
        emit(sp.test, "test");
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<SplitSpec> read_manifest(const std::filesystem::path& path, double sample_rate_hz, PreictalDefinition def) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (csv::trim(line) != "patient,seizure,run,role,file,offset_s,label,t_onset_min") {
        throw ValidationError(path.string() + ": unexpected manifest header");
    }
    std::vector<SplitSpec> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (csv::trim(line).empty()) continue;
        const auto c = csv::split(line);
        const auto ctx = path.string() + " row " + std::to_string(row);
        if (c.size() != 8) throw ValidationError(ctx + ": expected 8 cells");
        const int run = static_cast<int>(csv::to_double(c[2], ctx));
        if (out.empty() || out.back().test_seizure_id != c[1] || out.back().run_index != run ||
            out.back().patient_id != c[0]) {
            SplitSpec sp;
            sp.patient_id = c[0];
            sp.test_seizure_id = c[1];
            sp.run_index = run;
            sp.definition = def;
            out.push_back(std::move(sp));
        }
        SegmentRef ref;
        ref.patient_id = c[0];
        ref.file = c[4];
        ref.offset_sample = std::llround(csv::to_double(c[5], ctx) * sample_rate_hz);
        ref.label = label_from_string(std::string(csv::trim(c[6])));
        if (!csv::trim(c[7]).empty()) ref.t_onset_min = csv::to_double(c[7], ctx);
        auto& sp = out.back();
        if (c[3] == "train") sp.train.push_back(std::move(ref));
        else if (c[3] == "validation") sp.validation.push_back(std::move(ref));
        else if (c[3] == "test") sp.test.push_back(std::move(ref));
        else throw ValidationError(ctx + ": unknown role '" + c[3] + "'");
    }
    return out;
}

void write_eligibility(const std::vector<LabeledRanges>& patients, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "patient,patient_eligible,patient_reason,seizure,file,onset_s,offset_s,preictal_available_min,"
           "eligible,exclusion_reason,continuous_pre_onset_h,ciopr_eligible,interictal_h\n";
    for (const auto& p : patients) {
        double inter = 0.0;
        for (const auto& iv : p.interictal) inter += iv.length();
        for (const auto& s : p.seizures) {
            out << p.patient_id << ',' << (p.patient_eligible ? 1 : 0) << ',' << p.patient_reason << ','
                << s.seizure.id << ',' << s.seizure.file << ',' << csv::fixed(s.seizure.onset_s, 3) << ','
                << csv::fixed(s.seizure.offset_s, 3) << ',' << csv::fixed(s.preictal_available_s / 60.0, 3) << ','
                << (s.eligible ? 1 : 0) << ',' << s.exclusion_reason << ','
                << csv::fixed(s.continuous_pre_onset_s / 3600.0, 3) << ',' << (s.ciopr_eligible ? 1 : 0) << ','
                << csv::fixed(inter / 3600.0, 3) << '\n';
        }
        if (p.seizures.empty()) {
            out << p.patient_id << ',' << (p.patient_eligible ? 1 : 0) << ',' << p.patient_reason
                << ",,,,,,,,,," << csv::fixed(inter / 3600.0, 3) << '\n';
        }
    }
}

}  // namespace preictal
