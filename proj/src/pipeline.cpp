#include "preictal/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <regex>
#include <set>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"
#include "preictal/metrics.hpp"
#include "preictal/rng.hpp"
#include "preictal/synth.hpp"

namespace preictal {

namespace fs = std::filesystem;

namespace {

std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void note(const std::string& msg) { std::cerr << msg << '\n'; }

std::vector<int> labels_of(const std::vector<SegmentRef>& refs) {
    std::vector<int> out;
    out.reserve(refs.size());
    for (const auto& r : refs) out.push_back(r.label == Label::preictal ? 1 : 0);
    return out;
}

std::string def_tag(int def) { return "D" + std::to_string(def); }

std::vector<std::string> subdirs(const fs::path& dir) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

fs::path model_path(const fs::path& work, const std::string& pid, int def, const std::string& seizure, int run) {
    return work / "models" / pid / def_tag(def) / (seizure + "_r" + std::to_string(run) + ".json");
}

fs::path series_path(const fs::path& work, const std::string& pid, const std::string& seizure, int def, int run) {
    return work / "eval" / pid / "series" / (seizure + "_" + def_tag(def) + "_r" + std::to_string(run) + ".csv");
}

// Preprocessed patient directory: summary.txt plus files.csv listing what was kept.
struct PreprocessedPatient {
    std::string patient_id;
    fs::path dir;
    Summary summary;
    std::map<std::string, double> durations;
    double sample_rate_hz = 256.0;
};

PreprocessedPatient load_preprocessed(const fs::path& work, const std::string& pid) {
    PreprocessedPatient p;
    p.patient_id = pid;
    p.dir = work / "preprocessed" / pid;
    p.summary = parse_summary(csv::read_text(p.dir / "summary.txt"));
    const auto lines = csv::read_lines(p.dir / "files.csv");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto c = csv::split(lines[i]);
        const auto ctx = (p.dir / "files.csv").string() + " row " + std::to_string(i + 1);
        if (c.size() < 5) throw ValidationError(ctx + ": expected 5 cells");
        p.sample_rate_hz = csv::to_double(c[3], ctx);
        if (csv::trim(c[1]) == "1") p.durations[c[0]] = csv::to_double(c[4], ctx);
    }
    return p;
}

RecordingLoader prec_loader(const fs::path& dir) {
    return [dir](const std::string& file) {
        return read_prec(dir / (fs::path(file).stem().string() + ".prec"));
    };
}

PatientContext context_of(const PreprocessedPatient& p, const Config& config) {
    return make_context(p.patient_id, p.summary, p.durations, p.sample_rate_hz, config.rules);
}

std::vector<SplitSpec> read_splits(const fs::path& work, const std::string& pid, int def, double rate) {
    return read_manifest(work / "dataset" / pid / ("manifest_" + def_tag(def) + ".csv"), rate, PreictalDefinition(def));
}

void append(std::vector<SegmentRef>& dst, const std::vector<SegmentRef>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

struct PatientRun {
    PatientMetrics metrics;
    std::vector<CioprRow> ciopr;
};

PatientRun analyze_patient(const PatientContext& ctx, const RecordingLoader& loader, const Config& config) {
    const auto& pid = ctx.timeline.patient_id;
    std::map<int, std::vector<SplitSpec>> splits;
    std::vector<SegmentRef> needed;
    for (const auto& def : config.preictal_definitions()) {
        auto& s = splits[def.minutes()] = make_splits(ctx, def, config);
        for (const auto& sp : s) {
            append(needed, sp.train);
            append(needed, sp.validation);
            append(needed, sp.test);
        }
    }
    std::map<std::string, std::vector<SegmentRef>> continuous;
    for (const auto* s : ctx.ranges.ciopr_seizures()) {
        continuous[s->seizure.id] = continuous_segments(ctx.timeline, *s, config.epoch_s);
        append(needed, continuous[s->seizure.id]);
    }
    FeatureCache cache(loader, ctx.timeline.sample_rate_hz, config.epoch_s);
    cache.ensure(needed);
    needed.clear();

    std::map<int, std::vector<SplitScores>> scores;
    std::map<std::pair<std::string, int>, std::vector<SeriesByDefinition>> series;
    std::map<std::string, FeatureTable> continuous_features;
    for (const auto& [id, refs] : continuous) continuous_features.emplace(id, cache.table(refs));
    for (const auto& [def, list] : splits) {
        for (const auto& sp : list) {
            const auto model = train_split(sp, cache, config);
            scores[def].push_back(score_split(sp, model, cache));
            const auto it = continuous.find(sp.test_seizure_id);
            if (it != continuous.end()) {
                series[{sp.test_seizure_id, sp.run_index}].push_back(
                    {def, predict_series(model, continuous_features.at(it->first), it->second)});
            }
        }
    }
    PatientRun out;
    out.metrics = patient_metrics(pid, ctx.ranges.eligible_seizures().size(), scores, config.epoch_s);
    out.ciopr = ciopr_rows(pid, series, config.smoothing_block_min);
    return out;
}

std::vector<int> configured_definitions(const Config& config) {
    std::vector<int> out;
    for (const auto& d : config.preictal_definitions()) out.push_back(d.minutes());
    return out;
}

std::vector<OppDecision> decide(const std::vector<PatientMetrics>& metrics, const std::vector<SeizureCiopr>& seizures) {
    std::vector<OppDecision> out;
    for (const auto& m : metrics) {
        std::map<int, double> f1;
        for (const auto& d : m.by_definition) {
            if (d.report.f1) f1[d.definition_min] = *d.report.f1;
        }
        out.push_back(select_opp(m.patient_id, ciopr_means(seizures, m.patient_id), f1));
    }
    return out;
}

}  // namespace

FeatureCache::FeatureCache(RecordingLoader loader, double sample_rate_hz, double epoch_s)
    : loader_(std::move(loader)), rate_(sample_rate_hz),
      epoch_samples_(static_cast<std::size_t>(std::llround(epoch_s * sample_rate_hz))) {}

void FeatureCache::ensure(const std::vector<SegmentRef>& refs) {
    std::map<std::string, std::set<std::int64_t>> missing;
    for (const auto& r : refs) {
        if (!features_.count({r.file, r.offset_sample})) missing[r.file].insert(r.offset_sample);
    }
    FeatureExtractor fx(rate_);
    for (const auto& [file, offsets] : missing) {
        const auto rec = loader_(file);
        for (auto off : offsets) {
            if (off < 0 || static_cast<std::size_t>(off) + epoch_samples_ > rec.n_samples()) {
                throw ValidationError("segment at sample " + std::to_string(off) + " lies outside " + file);
            }
            features_[{file, off}] = fx(rec, off, epoch_samples_);
        }
    }
}

FeatureTable FeatureCache::table(const std::vector<SegmentRef>& refs) const {
    FeatureTable t(features_.empty() ? 0 : features_.begin()->second.size());
    for (const auto& r : refs) {
        const auto it = features_.find({r.file, r.offset_sample});
        if (it == features_.end()) {
            throw ValidationError("no features for " + r.file + " at sample " + std::to_string(r.offset_sample));
        }
        t.push_back(it->second);
    }
    return t;
}

PatientContext make_context(const std::string& patient_id, const Summary& summary,
                            const std::map<std::string, double>& durations_s, double sample_rate_hz,
                            const RuleConfig& rules) {
    PatientContext ctx;
    ctx.timeline = build_timeline(patient_id, summary, durations_s, sample_rate_hz);
    ctx.ranges = classify_time_ranges(ctx.timeline, rules);
    return ctx;
}

std::uint64_t patient_seed(std::uint64_t seed, const std::string& patient_id) {
    return derive_seed(seed, hash_string(patient_id));
}

std::vector<SplitSpec> make_splits(const PatientContext& ctx, PreictalDefinition def, const Config& config) {
    return loocv_splits(ctx.timeline, ctx.ranges, def, patient_seed(config.seed, ctx.timeline.patient_id),
                        config.split_config());
}

BaselineModel train_split(const SplitSpec& split, const FeatureCache& cache, const Config& config) {
    TrainConfig tc = config.train;
    tc.seed = derive_seed(patient_seed(config.seed, split.patient_id), static_cast<std::uint64_t>(split.definition.minutes()),
                          hash_string(split.test_seizure_id), static_cast<std::uint64_t>(split.run_index));
    const auto train = cache.table(split.train);
    const auto val = cache.table(split.validation);
    const auto train_labels = labels_of(split.train);
    const auto val_labels = labels_of(split.validation);
    return train_baseline(train, train_labels, val, val_labels, tc);
}

SplitScores score_split(const SplitSpec& split, const BaselineModel& model, const FeatureCache& cache) {
    SplitScores s;
    s.seizure_id = split.test_seizure_id;
    s.run = split.run_index;
    s.labels = labels_of(split.test);
    s.scores = predict(model, cache.table(split.test));
    return s;
}

PatientMetrics patient_metrics(const std::string& patient_id, std::size_t n_seizures,
                               const std::map<int, std::vector<SplitScores>>& by_definition, double epoch_s) {
    PatientMetrics m;
    m.patient_id = patient_id;
    m.n_seizures = n_seizures;
    for (const auto& [def, list] : by_definition) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& s : list) {
            scores.insert(scores.end(), s.scores.begin(), s.scores.end());
            labels.insert(labels.end(), s.labels.begin(), s.labels.end());
        }
        DefinitionMetrics d;
        d.definition_min = def;
        d.report = confusion_metrics(scores, labels);
        const auto& c = d.report.counts;
        if (c.tp + c.fn > 0 && c.tn + c.fp > 0) d.report.auc = auc(scores, labels);
        if (c.tn + c.fp > 0) d.report.far_per_hour = far_from_counts(c.fp, c.tn + c.fp, epoch_s);
        m.by_definition.push_back(std::move(d));
    }
    // Longest definition first, matching the configured order.
    std::sort(m.by_definition.begin(), m.by_definition.end(),
              [](const DefinitionMetrics& a, const DefinitionMetrics& b) { return a.definition_min > b.definition_min; });
    return m;
}

std::vector<CioprRow> ciopr_rows(const std::string& patient_id,
                                 const std::map<std::pair<std::string, int>, std::vector<SeriesByDefinition>>& series,
                                 double block_min) {
    std::vector<CioprRow> out;
    for (const auto& [key, list] : series) {
        const auto g = evaluate_group(list, FitOptions{}, block_min);
        if (g.excluded) {
            for (const auto& s : list) {
                CioprRow row;
                row.patient_id = patient_id;
                row.seizure_id = key.first;
                row.run = key.second;
                row.excluded = true;
                row.reason = g.reason;
                row.report.definition_min = s.definition_min;
                out.push_back(std::move(row));
            }
            continue;
        }
        for (const auto& r : g.reports) out.push_back({patient_id, key.first, key.second, false, {}, r});
    }
    return out;
}

Recording preprocess_recording(const Recording& rec, const FilterKernel& kernel) {
    return apply_filter(common_average_reference(rec), kernel);
}

CorpusResult run_synthetic_in_memory(const Config& config) {
    CorpusResult out;
    const auto kernel = design_fir_bandpass(config.synth.sample_rate_hz, config.filter.low_hz, config.filter.high_hz,
                                            config.filter.order);
    for (int p = 0; p < config.synth.patients; ++p) {
        const auto patient = plan_synthetic_patient(config.synth, p, config.seed);
        const auto summary = parse_summary(synthetic_summary(patient, config.synth.sample_rate_hz));
        std::map<std::string, double> durations;
        for (const auto& f : patient.files) durations[f] = patient.file_s;
        const auto ctx = make_context(patient.id, summary, durations, config.synth.sample_rate_hz, config.rules);
        if (!ctx.ranges.patient_eligible) continue;
        RecordingLoader loader = [&](const std::string& file) {
            const auto it = std::find(patient.files.begin(), patient.files.end(), file);
            const auto index = static_cast<std::size_t>(it - patient.files.begin());
            return preprocess_recording(render_synthetic_file(config.synth, patient, index), kernel);
        };
        auto run = analyze_patient(ctx, loader, config);
        out.metrics.push_back(std::move(run.metrics));
        out.ciopr.insert(out.ciopr.end(), run.ciopr.begin(), run.ciopr.end());
    }
    out.seizures = summarize_ciopr(out.ciopr);
    out.opp = decide(out.metrics, out.seizures);
    return out;
}

// ---------------------------------------------------------------- CLI stages

void stage_synth(const Config& config, const fs::path& work) {
    const auto patients = write_synthetic_corpus(config.synth, config.seed, work / "raw");
    for (const auto& p : patients) {
        note("synth " + p.id + ": " + std::to_string(p.files.size()) + " files, " +
             std::to_string(p.seizures.size()) + " seizures");
    }
}

void stage_preprocess(const Config& config, const fs::path& work, const std::optional<fs::path>& raw_dir) {
    const fs::path raw = raw_dir ? *raw_dir : work / "raw";
    if (!fs::is_directory(raw)) throw IoError("raw data directory not found: " + raw.string());
    for (const auto& pid : subdirs(raw)) {
        const auto dir = raw / pid;
        fs::path summary_path;
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (name.size() > 12 && name.ends_with("-summary.txt")) summary_path = e.path();
        }
        if (summary_path.empty()) continue;
        const auto text = csv::read_text(summary_path);
        const auto summary = parse_summary(text);

        std::vector<std::string> channels = config.channels;
        std::optional<FilterKernel> kernel;
        const auto out_dir = work / "preprocessed" / pid;
        auto listing = csv::open_out(out_dir / "files.csv");
        listing << "file,has_data,n_samples,sample_rate_hz,duration_s,note\n";
        std::size_t kept = 0;
        double rate = summary.sample_rate_hz.value_or(256.0);
        for (const auto& f : summary.files) {
            const auto path = dir / f.file_name;
            if (!fs::exists(path)) {
                listing << f.file_name << ",0,0," << csv::fixed(rate, 3) << ",0,missing file\n";
                continue;
            }
            const auto rec = read_edf(path, pid);
            rate = rec.sample_rate_hz();
            if (channels.empty()) {
                for (const auto& l : rec.channel_labels()) {
                    if (l.empty() || l == "-" || l == "--") continue;
                    if (std::find(channels.begin(), channels.end(), l) == channels.end()) channels.push_back(l);
                }
            }
            const auto& labels = rec.channel_labels();
            const bool complete = std::all_of(channels.begin(), channels.end(), [&](const std::string& c) {
                return std::find(labels.begin(), labels.end(), c) != labels.end();
            });
            if (!complete) {
                listing << f.file_name << ",0," << rec.n_samples() << ',' << csv::fixed(rate, 3) << ','
                        << csv::fixed(rec.duration_s(), 6) << ",missing canonical channels\n";
                continue;
            }
            if (!kernel || kernel->design.sample_rate_hz != rate) {
                kernel = design_fir_bandpass(rate, config.filter.low_hz, config.filter.high_hz, config.filter.order);
            }
            const auto clean = preprocess_recording(rec.select_channels(channels), *kernel);
            write_prec(clean, out_dir / (fs::path(f.file_name).stem().string() + ".prec"));
            listing << f.file_name << ",1," << clean.n_samples() << ',' << csv::fixed(rate, 3) << ','
                    << csv::fixed(clean.duration_s(), 6) << ",\n";
            ++kept;
        }
        listing.flush();
        if (!listing) throw IoError("failed writing " + (out_dir / "files.csv").string());
        auto copy = csv::open_out(out_dir / "summary.txt");
        copy << text;
        note("preprocess " + pid + ": " + std::to_string(kept) + " of " + std::to_string(summary.files.size()) +
             " files kept");
    }
}

void stage_dataset(const Config& config, const fs::path& work) {
    std::vector<LabeledRanges> all;
    for (const auto& pid : subdirs(work / "preprocessed")) {
        const auto pp = load_preprocessed(work, pid);
        const auto ctx = context_of(pp, config);
        all.push_back(ctx.ranges);
        if (!ctx.ranges.patient_eligible) {
            note("dataset " + pid + ": excluded (" + ctx.ranges.patient_reason + ")");
            continue;
        }
        for (const auto& def : config.preictal_definitions()) {
            const auto splits = make_splits(ctx, def, config);
            std::set<std::string> warned;
            for (const auto& sp : splits) {
                for (const auto& w : sp.warnings) {
                    if (warned.insert(w).second) note("warning: " + pid + " " + def_tag(def.minutes()) + ": " + w);
                }
            }
            write_manifest(splits, pp.sample_rate_hz, work / "dataset" / pid / ("manifest_" + def_tag(def.minutes()) + ".csv"));
        }
        note("dataset " + pid + ": " + std::to_string(ctx.ranges.eligible_seizures().size()) + " eligible seizures, " +
             std::to_string(ctx.ranges.ciopr_seizures().size()) + " for CIOPR");
    }
    write_eligibility(all, work / "dataset" / "eligibility.csv");
}

void stage_train(const Config& config, const fs::path& work) {
    for (const auto& pid : subdirs(work / "dataset")) {
        const auto pp = load_preprocessed(work, pid);
        std::map<int, std::vector<SplitSpec>> splits;
        std::vector<SegmentRef> needed;
        for (int def : configured_definitions(config)) {
            splits[def] = read_splits(work, pid, def, pp.sample_rate_hz);
            for (const auto& sp : splits[def]) {
                append(needed, sp.train);
                append(needed, sp.validation);
            }
        }
        FeatureCache cache(prec_loader(pp.dir), pp.sample_rate_hz, config.epoch_s);
        cache.ensure(needed);
        std::size_t n = 0;
        for (const auto& [def, list] : splits) {
            for (auto sp : list) {
                sp.definition = PreictalDefinition(def);
                save_model(train_split(sp, cache, config), model_path(work, pid, def, sp.test_seizure_id, sp.run_index));
                ++n;
            }
        }
        note("train " + pid + ": " + std::to_string(n) + " models");
    }
}

void stage_evaluate(const Config& config, const fs::path& work) {
    for (const auto& pid : subdirs(work / "dataset")) {
        const auto pp = load_preprocessed(work, pid);
        const auto ctx = context_of(pp, config);
        std::map<int, std::vector<SplitSpec>> splits;
        std::vector<SegmentRef> needed;
        for (int def : configured_definitions(config)) {
            splits[def] = read_splits(work, pid, def, pp.sample_rate_hz);
            for (const auto& sp : splits[def]) append(needed, sp.test);
        }
        std::map<std::string, std::vector<SegmentRef>> continuous;
        for (const auto* s : ctx.ranges.ciopr_seizures()) {
            continuous[s->seizure.id] = continuous_segments(ctx.timeline, *s, config.epoch_s);
            append(needed, continuous[s->seizure.id]);
        }
        FeatureCache cache(prec_loader(pp.dir), pp.sample_rate_hz, config.epoch_s);
        cache.ensure(needed);
        for (const auto& [def, list] : splits) {
            const auto path = work / "eval" / pid / ("test_" + def_tag(def) + ".csv");
            auto out = csv::open_out(path);
            out << "seizure,run,file,offset_s,label,y\n";
            for (const auto& sp : list) {
                const auto model = load_model(model_path(work, pid, def, sp.test_seizure_id, sp.run_index));
                const auto s = score_split(sp, model, cache);
                for (std::size_t i = 0; i < sp.test.size(); ++i) {
                    out << sp.test_seizure_id << ',' << sp.run_index << ',' << sp.test[i].file << ','
                        << csv::fixed(static_cast<double>(sp.test[i].offset_sample) / pp.sample_rate_hz) << ','
                        << s.labels[i] << ',' << csv::fixed(s.scores[i]) << '\n';
                }
                const auto it = continuous.find(sp.test_seizure_id);
                if (it != continuous.end()) {
                    const auto series = predict_series(model, cache.table(it->second), it->second);
                    export_predictions(series, series_path(work, pid, sp.test_seizure_id, def, sp.run_index));
                }
            }
            out.flush();
            if (!out) throw IoError("failed writing " + path.string());
        }
        note("evaluate " + pid + ": " + std::to_string(continuous.size()) + " seizures with continuous output");
    }
}

void stage_ciopr(const Config& config, const fs::path& work) {
    std::vector<CioprRow> rows;
    const std::regex name_re(R"((.+)_D(\d+)_r(\d+)\.csv)");
    const auto defs = configured_definitions(config);
    for (const auto& pid : subdirs(work / "eval")) {
        const auto dir = work / "eval" / pid / "series";
        if (!fs::is_directory(dir)) continue;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        std::map<std::pair<std::string, int>, std::vector<SeriesByDefinition>> series;
        for (const auto& f : files) {
            std::smatch m;
            const auto name = f.filename().string();
            if (!std::regex_match(name, m, name_re)) continue;
            const int def = std::stoi(m[2]);
            if (std::find(defs.begin(), defs.end(), def) == defs.end()) continue;
            series[{m[1], std::stoi(m[3])}].push_back({def, import_predictions(f)});
        }
        // Keep the configured definition order inside each group.
        for (auto& [key, list] : series) {
            std::sort(list.begin(), list.end(), [&](const SeriesByDefinition& a, const SeriesByDefinition& b) {
                return std::find(defs.begin(), defs.end(), a.definition_min) <
                       std::find(defs.begin(), defs.end(), b.definition_min);
            });
        }
        auto part = ciopr_rows(pid, series, config.smoothing_block_min);
        rows.insert(rows.end(), part.begin(), part.end());
        note("ciopr " + pid + ": " + std::to_string(series.size()) + " seizure runs");
    }
    write_ciopr_rows(rows, work / "ciopr" / "terms.csv");
    write_ciopr_table(summarize_ciopr(rows), defs, work / "ciopr" / "table.csv");
}

namespace {

std::vector<PatientMetrics> metrics_from_eval(const Config& config, const fs::path& work) {
    std::vector<PatientMetrics> out;
    for (const auto& pid : subdirs(work / "eval")) {
        std::map<int, std::vector<SplitScores>> by_def;
        std::set<std::string> seizures;
        for (int def : configured_definitions(config)) {
            const auto path = work / "eval" / pid / ("test_" + def_tag(def) + ".csv");
            if (!fs::exists(path)) continue;
            const auto lines = csv::read_lines(path);
            auto& list = by_def[def];
            for (std::size_t i = 1; i < lines.size(); ++i) {
                const auto c = csv::split(lines[i]);
                const auto ctx = path.string() + " row " + std::to_string(i + 1);
                if (c.size() != 6) throw ValidationError(ctx + ": expected 6 cells");
                const int run = static_cast<int>(csv::to_double(c[1], ctx));
                if (list.empty() || list.back().seizure_id != c[0] || list.back().run != run) {
                    list.push_back({c[0], run, {}, {}});
                    seizures.insert(c[0]);
                }
                list.back().labels.push_back(static_cast<int>(csv::to_double(c[4], ctx)));
                list.back().scores.push_back(csv::to_double(c[5], ctx));
            }
        }
        if (!by_def.empty()) out.push_back(patient_metrics(pid, seizures.size(), by_def, config.epoch_s));
    }
    return out;
}

std::vector<CioprRow> ciopr_from_disk(const fs::path& work) {
    const auto path = work / "ciopr" / "terms.csv";
    return fs::exists(path) ? read_ciopr_rows(path) : std::vector<CioprRow>{};
}

std::vector<PatientMetrics> metrics_from_disk(const fs::path& work) {
    const auto path = work / "opp" / "metrics.csv";
    return fs::exists(path) ? read_metrics_long(path) : std::vector<PatientMetrics>{};
}

}  // namespace

void stage_opp(const Config& config, const fs::path& work) {
    const auto metrics = metrics_from_eval(config, work);
    const auto seizures = summarize_ciopr(ciopr_from_disk(work));
    const auto decisions = decide(metrics, seizures);
    write_metrics_long(metrics, work / "opp" / "metrics.csv");
    write_opp_summary(decisions, metrics, configured_definitions(config), work / "opp" / "opp.csv");
    for (const auto& d : decisions) {
        note("opp " + d.patient_id + ": " + (d.opp_min ? std::to_string(*d.opp_min) + " min by " + to_string(d.criterion)
                                                        : std::string("undetermined")));
    }
}

void stage_stats(const Config& config, const fs::path& work) {
    const auto stats = definition_stats(metrics_from_disk(work), summarize_ciopr(ciopr_from_disk(work)),
                                        configured_definitions(config));
    write_stats(stats, configured_definitions(config), work / "stats" / "stats.csv");
}

void stage_report(const Config& config, const fs::path& work) {
    const auto defs = configured_definitions(config);
    const auto metrics = metrics_from_disk(work);
    const auto rows = ciopr_from_disk(work);
    const auto seizures = summarize_ciopr(rows);
    const auto dir = work / "report";
    for (const auto& m : metrics) write_patient_metrics(m, dir / "patients" / (m.patient_id + ".csv"));
    write_ciopr_table(seizures, defs, dir / "ciopr.csv");
    write_opp_summary(decide(metrics, seizures), metrics, defs, dir / "summary.csv");
    write_stats(definition_stats(metrics, seizures, defs), defs, dir / "stats.csv");

    // One profile per seizure and definition, from the first fitted run.
    std::set<std::string> plotted;
    std::size_t n_plots = 0;
    for (const auto& r : rows) {
        if (r.excluded) continue;
        const auto key = r.patient_id + "/" + r.seizure_id + "/" + std::to_string(r.report.definition_min);
        if (!plotted.insert(key).second) continue;
        const auto series = import_predictions(series_path(work, r.patient_id, r.seizure_id, r.report.definition_min, r.run));
        const auto sm = smooth(series, config.smoothing_block_min);
        const auto title = r.seizure_id + ", " + std::to_string(r.report.definition_min) + " min preictal, run " +
                           std::to_string(r.run);
        auto out = csv::open_out(dir / "plots" / (r.seizure_id + "_" + def_tag(r.report.definition_min) + ".svg"));
        out << profile_svg(sm, r.report, title);
        out.flush();
        if (!out) throw IoError("failed writing plot for " + key);
        ++n_plots;
    }
    note("report: " + std::to_string(metrics.size()) + " patients, " + std::to_string(n_plots) + " plots");
}

}  // namespace preictal
