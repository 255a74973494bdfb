#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "preictal/dataset.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"
#include "support.hpp"

using namespace preictal;

namespace {

constexpr double H = 3600.0;

PatientTimeline one_file(double hours, std::vector<Seizure> seizures) {
    PatientTimeline t;
    t.patient_id = "p";
    t.files.push_back({"p_01.edf", 0.0, hours * H, true});
    t.seizures = std::move(seizures);
    return t;
}

using Key = std::pair<std::string, std::int64_t>;

std::set<Key> keys(const std::vector<SegmentRef>& refs) {
    std::set<Key> out;
    for (const auto& r : refs) out.insert({r.file, r.offset_sample});
    return out;
}

}  // namespace

TEST_CASE("single seizure in an 8 h record") {
    const double dur = 60.0;
    const auto t = one_file(8.0, {{"s1", "p_01.edf", 5 * H, 5 * H + dur}});
    const auto r = classify_time_ranges(t);
    REQUIRE(r.interictal.size() == 2);
    CHECK(r.interictal[0].start == 0.0);
    CHECK(r.interictal[0].end == doctest::Approx(1 * H));
    CHECK(r.interictal[1].start == doctest::Approx(6 * H + dur));
    CHECK(r.interictal[1].end == doctest::Approx(8 * H));
    REQUIRE(r.seizures.size() == 1);
    REQUIRE(r.seizures[0].preictal.size() == 1);
    CHECK(r.seizures[0].preictal[0].start == doctest::Approx(4 * H));
    CHECK(r.seizures[0].preictal[0].end == doctest::Approx(5 * H));
    CHECK(r.seizures[0].eligible);
    // One eligible seizure cannot supply both training and test data.
    CHECK_FALSE(r.patient_eligible);
}

TEST_CASE("seizure soon after another loses its preictal window") {
    const auto t = one_file(12.0, {{"s1", "p_01.edf", 5 * H, 5 * H + 60},
                                   {"s2", "p_01.edf", 5 * H + 60 + 1800, 5 * H + 60 + 1860}});
    const auto r = classify_time_ranges(t);
    REQUIRE(r.seizures.size() == 2);
    CHECK(r.seizures[0].eligible);
    CHECK(r.seizures[1].preictal_available_s < 60.0);
    CHECK_FALSE(r.seizures[1].eligible);
    CHECK_FALSE(r.seizures[1].exclusion_reason.empty());
    CHECK(r.eligible_seizures().size() == 1);
    CHECK_FALSE(r.patient_eligible);
    CHECK(r.ciopr_seizures().empty());
}

TEST_CASE("two well separated seizures make an eligible patient") {
    const auto t = one_file(24.0, {{"s1", "p_01.edf", 6 * H, 6 * H + 60}, {"s2", "p_01.edf", 18 * H, 18 * H + 60}});
    const auto r = classify_time_ranges(t);
    CHECK(r.patient_eligible);
    CHECK(r.eligible_seizures().size() == 2);
    // 6 h of uninterrupted data before s1, capped window of 10 h is not reached.
    CHECK(r.seizures[0].ciopr_eligible);
    CHECK(r.seizures[0].ciopr_window.length() == doctest::Approx(6 * H));
    CHECK(r.seizures[1].ciopr_window.length() == doctest::Approx(10 * H));
}

TEST_CASE("short continuous history blocks the continuous-output analysis") {
    PatientTimeline t;
    t.patient_id = "p";
    t.files.push_back({"a.edf", 0.0, 10 * H, true});
    t.files.push_back({"b.edf", 11 * H, 2 * H, true});
    t.files.push_back({"c.edf", 14 * H, 12 * H, true});
    t.seizures = {{"s1", "b.edf", 12.5 * H, 12.5 * H + 60}, {"s2", "c.edf", 24 * H, 24 * H + 60}};
    const auto r = classify_time_ranges(t);
    CHECK(r.seizures[0].eligible);
    CHECK(r.seizures[0].continuous_pre_onset_s == doctest::Approx(1.5 * H));
    CHECK_FALSE(r.seizures[0].ciopr_eligible);
    CHECK(r.seizures[1].ciopr_eligible);
}

TEST_CASE("preictal extraction keeps the last D minutes") {
    const double onset = 8 * H;
    SUBCASE("60 min available, 45 min definition") {
        const auto t = one_file(10.0, {{"s1", "p_01.edf", onset, onset + 60}});
        const auto r = classify_time_ranges(t);
        const auto segs = extract_preictal(t, r.seizures[0], PreictalDefinition(45));
        CHECK(segs.size() == 540);
        CHECK(*segs.front().t_onset_min == doctest::Approx(45.0));
        CHECK(segs.front().offset_sample == std::llround((onset - 45 * 60.0) * 256.0));
        CHECK(*segs.back().t_onset_min == doctest::Approx(5.0 / 60.0));
    }
    SUBCASE("20 min available") {
        PatientTimeline t;
        t.patient_id = "p";
        t.files.push_back({"a.edf", 0.0, 6 * H, true});
        t.files.push_back({"b.edf", onset - 20 * 60.0, 2 * H, true});
        t.seizures = {{"s1", "b.edf", onset, onset + 60}};
        const auto r = classify_time_ranges(t);
        CHECK(r.seizures[0].preictal_available_s == doctest::Approx(20 * 60.0));
        CHECK(extract_preictal(t, r.seizures[0], PreictalDefinition(45)).size() == 240);
        const auto d15 = extract_preictal(t, r.seizures[0], PreictalDefinition(15));
        CHECK(d15.size() == 180);
        CHECK(*d15.front().t_onset_min == doctest::Approx(15.0));
    }
}

TEST_CASE("definition validation") {
    CHECK_NOTHROW(PreictalDefinition(15));
    CHECK_THROWS_AS(PreictalDefinition(20), ValidationError);
    CHECK(PreictalDefinition::all().size() == 4);
}

TEST_CASE("oversampling stride arithmetic") {
    const Stretch s{"p", "f.edf", "s1", 0.0, 1000.0, 1900.0, 1900.0};
    const auto segs = oversample(s, 0.66, 256.0);
    const auto expected = static_cast<std::size_t>(std::floor((900.0 - 5.0) / 1.7)) + 1;
    CHECK(expected == 527);
    CHECK(segs.size() == expected);
    for (const auto& r : segs) {
        CHECK(r.offset_sample >= 1000 * 256);
        CHECK(r.offset_sample + 1280 <= 1900 * 256);
    }
    CHECK(segs.back().offset_sample == (1900 - 5) * 256);

    const Stretch five{"p", "f.edf", "s1", 0.0, 100.0, 105.0, 105.0};
    CHECK(oversample(five, 0.66, 256.0).size() == 1);
    const Stretch tiny{"p", "f.edf", "s1", 0.0, 100.0, 103.0, 103.0};
    CHECK_THROWS_AS(oversample(tiny, 0.66, 256.0), ValidationError);
    CHECK_THROWS_AS(oversample(s, 1.0, 256.0), ValidationError);
}

TEST_CASE("zero overlap matches plain epoching") {
    const Stretch s{"p", "f.edf", "s1", 0.0, 0.0, 600.0, 600.0};
    const auto segs = oversample(s, 0.0, 256.0);
    const auto offsets = epoch_offsets(600 * 256, 256.0);
    REQUIRE(segs.size() == offsets.size());
    for (std::size_t i = 0; i < segs.size(); ++i) CHECK(segs[i].offset_sample == offsets[i]);
}

TEST_CASE("interictal sampling") {
    std::vector<SegmentRef> pool(1000);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i].offset_sample = static_cast<std::int64_t>(i) * 1280;
    const auto a = sample_interictal(pool, 600, 5);
    CHECK(a.segments.size() == 600);
    CHECK_FALSE(a.short_pool);
    CHECK(keys(a.segments).size() == 600);
    const auto b = sample_interictal(pool, 600, 5);
    for (std::size_t i = 0; i < 600; ++i) CHECK(a.segments[i].offset_sample == b.segments[i].offset_sample);
    const auto c = sample_interictal(pool, 600, 6);
    CHECK(keys(a.segments) != keys(c.segments));

    std::vector<SegmentRef> small(pool.begin(), pool.begin() + 100);
    const auto d = sample_interictal(small, 600, 5);
    CHECK(d.segments.size() == 100);
    CHECK(d.short_pool);
    CHECK_THROWS_AS(sample_interictal({}, 10, 1), ValidationError);
}

TEST_CASE("leave-one-seizure-out splits") {
    const auto t = one_file(40.0, {{"s1", "p_01.edf", 8 * H, 8 * H + 60},
                                   {"s2", "p_01.edf", 20 * H, 20 * H + 60},
                                   {"s3", "p_01.edf", 32 * H, 32 * H + 60}});
    const auto r = classify_time_ranges(t);
    const auto splits = loocv_splits(t, r, PreictalDefinition(30), 11);
    CHECK(splits.size() == 12);
    for (const auto& sp : splits) {
        const auto train = keys(sp.train), val = keys(sp.validation), test = keys(sp.test);
        for (const auto& k : test) {
            CHECK(train.count(k) == 0);
            CHECK(val.count(k) == 0);
        }
        for (const auto& k : val) CHECK(train.count(k) == 0);
        std::size_t pre = 0, inter = 0;
        for (const auto& s : sp.test) {
            if (s.label == Label::preictal) {
                ++pre;
                CHECK(s.seizure_id == sp.test_seizure_id);
            } else {
                ++inter;
            }
        }
        CHECK(pre == inter);
        for (const auto& s : sp.train) {
            if (s.label == Label::preictal) CHECK(s.seizure_id != sp.test_seizure_id);
        }
    }
}

TEST_CASE("preictal sets nest across definitions") {
    Rng rng(2024);
    int checked = 0;
    for (int layout = 0; layout < 100; ++layout) {
        PatientTimeline t;
        t.patient_id = "p";
        double cursor = 0.0;
        const int n_files = 3 + static_cast<int>(rng.below(6));
        for (int f = 0; f < n_files; ++f) {
            const double len = std::round(rng.uniform(0.5, 4.0) * H);
            const std::string name = "f" + std::to_string(f) + ".edf";
            t.files.push_back({name, cursor, len, true});
            cursor += len + (rng.uniform() < 0.5 ? 0.0 : std::round(rng.uniform(1.0, 3000.0)));
        }
        for (const auto& f : t.files) {
            if (rng.uniform() < 0.4 && f.duration_s > 600.0) {
                const double onset = std::round(f.start_s + rng.uniform(300.0, f.duration_s - 200.0));
                if (!t.seizures.empty() && onset <= t.seizures.back().offset_s) continue;
                t.seizures.push_back({"s" + std::to_string(t.seizures.size() + 1), f.file, onset, onset + 60.0});
            }
        }
        const auto r = classify_time_ranges(t);
        for (const auto* s : r.eligible_seizures()) {
            std::set<Key> prev;
            bool first = true;
            for (int d : {15, 30, 45, 60}) {
                const auto cur = keys(extract_preictal(t, *s, PreictalDefinition(d)));
                if (!first) CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
                prev = cur;
                first = false;
            }
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("manifests are reproducible under a fixed seed") {
    const auto t = one_file(30.0, {{"s1", "p_01.edf", 8 * H, 8 * H + 60}, {"s2", "p_01.edf", 20 * H, 20 * H + 60}});
    const auto r = classify_time_ranges(t);
    testing::TempDir dir("manifest");
    write_manifest(loocv_splits(t, r, PreictalDefinition(45), 7), 256.0, dir / "a.csv");
    write_manifest(loocv_splits(t, r, PreictalDefinition(45), 7), 256.0, dir / "b.csv");
    write_manifest(loocv_splits(t, r, PreictalDefinition(45), 8), 256.0, dir / "c.csv");
    const auto a = testing::slurp(dir / "a.csv");
    CHECK(a.rfind("patient,seizure,run,role,file,offset_s,label,t_onset_min\n", 0) == 0);
    CHECK(a == testing::slurp(dir / "b.csv"));
    CHECK(a != testing::slurp(dir / "c.csv"));

    const auto back = read_manifest(dir / "a.csv", 256.0, PreictalDefinition(45));
    const auto orig = loocv_splits(t, r, PreictalDefinition(45), 7);
    REQUIRE(back.size() == orig.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].train.size() == orig[i].train.size());
        CHECK(back[i].test.size() == orig[i].test.size());
    }
    write_manifest(back, 256.0, dir / "d.csv");
    CHECK(a == testing::slurp(dir / "d.csv"));
}
