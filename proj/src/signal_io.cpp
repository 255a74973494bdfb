#include "preictal/signal_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"

namespace preictal {

Recording::Recording(std::string patient_id, std::vector<std::string> channel_labels,
                     double sample_rate_hz, std::vector<double> channel_major, double start_time_s)
    : patient_id_(std::move(patient_id)),
      labels_(std::move(channel_labels)),
      rate_(sample_rate_hz),
      data_(std::move(channel_major)),
      start_time_(start_time_s) {
    if (labels_.empty()) throw ValidationError("recording needs at least one channel");
    if (!(rate_ > 0.0) || !std::isfinite(rate_)) throw ValidationError("sample rate must be positive");
    if (data_.empty() || data_.size() % labels_.size() != 0) {
        throw ValidationError("recording data is empty or not divisible by the channel count");
    }
    n_samples_ = data_.size() / labels_.size();
}

Recording Recording::with_data(std::vector<double> channel_major) const {
    if (channel_major.size() != data_.size()) throw ValidationError("replacement data has a different shape");
    return Recording(patient_id_, labels_, rate_, std::move(channel_major), start_time_);
}

Recording Recording::with_start_time(double start_time_s) const {
    Recording r = *this;
    r.start_time_ = start_time_s;
    return r;
}

Recording Recording::select_channels(std::span<const std::string> labels) const {
    std::vector<double> out;
    out.reserve(labels.size() * n_samples_);
    for (const auto& want : labels) {
        const auto it = std::find(labels_.begin(), labels_.end(), want);
        if (it == labels_.end()) throw ValidationError("channel '" + want + "' not present");
        const auto ch = channel(static_cast<std::size_t>(it - labels_.begin()));
        out.insert(out.end(), ch.begin(), ch.end());
    }
    return Recording(patient_id_, {labels.begin(), labels.end()}, rate_, std::move(out), start_time_);
}

// ---------------------------------------------------------------------------
// EDF

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string text(std::size_t width) {
        if (pos_ + width > bytes_.size()) throw ParseError("EDF header truncated", pos_);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), width);
        pos_ += width;
        return std::string(csv::trim(s));
    }

    double number(std::size_t width, const char* field) {
        const auto at = pos_;
        const auto s = text(width);
        try {
            return csv::to_double(s, field);
        } catch (const ValidationError&) {
            throw ParseError(std::string("EDF field '") + field + "' is not numeric: '" + s + "'", at);
        }
    }

    std::size_t pos() const noexcept { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

struct SignalHeader {
    std::string label;
    double phys_min, phys_max, dig_min, dig_max;
    std::size_t samples_per_record;
};

}  // namespace

Recording parse_edf(std::span<const std::uint8_t> bytes, std::string patient_id) {
    HeaderReader h(bytes);
    const auto version = h.text(8);
    if (version != "0") throw ParseError("unsupported EDF version '" + version + "'", 0);
    h.text(80);  // patient
    h.text(80);  // recording
    h.text(8);   // start date
    h.text(8);   // start time
    const auto header_bytes_at = h.pos();
    const auto header_bytes = static_cast<std::size_t>(h.number(8, "header bytes"));
    const auto reserved_at = h.pos();
    const auto reserved = h.text(44);
    if (reserved.rfind("EDF+D", 0) == 0) throw ParseError("discontinuous EDF+ is not supported", reserved_at);
    const auto n_records_at = h.pos();
    const double n_records_raw = h.number(8, "number of data records");
    const double record_duration = h.number(8, "record duration");
    const auto ns_at = h.pos();
    const double ns_raw = h.number(4, "number of signals");
    if (ns_raw < 1 || ns_raw != std::floor(ns_raw)) throw ParseError("EDF declares no signals", ns_at);
    if (!(record_duration > 0)) throw ParseError("record duration must be positive", ns_at - 8);
    const auto ns = static_cast<std::size_t>(ns_raw);
    if (header_bytes != 256 * (ns + 1)) {
        throw ParseError("header byte count does not match signal count", header_bytes_at);
    }

    std::vector<SignalHeader> sig(ns);
    for (auto& s : sig) s.label = h.text(16);
    for (std::size_t i = 0; i < ns; ++i) h.text(80);  // transducer
    for (std::size_t i = 0; i < ns; ++i) h.text(8);   // physical dimension
    for (auto& s : sig) s.phys_min = h.number(8, "physical minimum");
    for (auto& s : sig) s.phys_max = h.number(8, "physical maximum");
    for (auto& s : sig) s.dig_min = h.number(8, "digital minimum");
    for (auto& s : sig) s.dig_max = h.number(8, "digital maximum");
    for (std::size_t i = 0; i < ns; ++i) h.text(80);  // prefiltering
    const auto spr_at = h.pos();
    for (auto& s : sig) {
        const double v = h.number(8, "samples per record");
        if (v < 1 || v != std::floor(v)) throw ParseError("invalid samples per record", spr_at);
        s.samples_per_record = static_cast<std::size_t>(v);
    }
    for (std::size_t i = 0; i < ns; ++i) h.text(32);

    for (std::size_t i = 0; i < ns; ++i) {
        if (sig[i].label == "EDF Annotations") {
            throw ParseError("EDF+ annotation channels are not supported", 256 + 16 * i);
        }
        if (sig[i].samples_per_record != sig[0].samples_per_record) {
            throw ParseError("signal '" + sig[i].label + "' has a different sampling rate", spr_at + 8 * i);
        }
        if (sig[i].dig_max <= sig[i].dig_min) {
            throw ParseError("digital range of '" + sig[i].label + "' is empty", spr_at);
        }
    }

    const std::size_t spr = sig[0].samples_per_record;
    const std::size_t record_bytes = 2 * spr * ns;
    const std::size_t payload = bytes.size() - std::min(bytes.size(), header_bytes);
    std::size_t n_records;
    if (n_records_raw == -1) {
        n_records = payload / record_bytes;
    } else {
        if (n_records_raw < 0 || n_records_raw != std::floor(n_records_raw)) {
            throw ParseError("invalid number of data records", n_records_at);
        }
        n_records = static_cast<std::size_t>(n_records_raw);
    }
    if (n_records == 0) throw ParseError("EDF contains no data records", n_records_at);
    if (payload < n_records * record_bytes) {
        const std::size_t bad = payload / record_bytes;
        throw ParseError("data record " + std::to_string(bad) + " is truncated",
                         header_bytes + bad * record_bytes);
    }

    const std::size_t n_samples = spr * n_records;
    std::vector<double> data(n_samples * ns);
    std::vector<double> gain(ns), offset(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        gain[i] = (sig[i].phys_max - sig[i].phys_min) / (sig[i].dig_max - sig[i].dig_min);
        offset[i] = sig[i].phys_min - gain[i] * sig[i].dig_min;
    }
    const std::uint8_t* p = bytes.data() + header_bytes;
    for (std::size_t r = 0; r < n_records; ++r) {
        for (std::size_t i = 0; i < ns; ++i) {
            double* dst = data.data() + i * n_samples + r * spr;
            for (std::size_t k = 0; k < spr; ++k, p += 2) {
                const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
                const double dig = raw;
                // Endpoints map exactly onto the declared physical range.
                if (dig == sig[i].dig_min) dst[k] = sig[i].phys_min;
                else if (dig == sig[i].dig_max) dst[k] = sig[i].phys_max;
                else dst[k] = offset[i] + gain[i] * dig;
            }
        }
    }

    std::vector<std::string> labels;
    labels.reserve(ns);
    for (const auto& s : sig) labels.push_back(s.label);
    return Recording(std::move(patient_id), std::move(labels), static_cast<double>(spr) / record_duration,
                     std::move(data));
}

Recording read_edf(const std::filesystem::path& path, std::string patient_id) {
    const auto text = csv::read_text(path);
    std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
    try {
        return parse_edf(bytes, std::move(patient_id));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.byte_offset());
    }
}

std::vector<std::uint8_t> encode_edf(const Recording& rec, double physical_min, double physical_max,
                                     int record_seconds) {
    const double rate = rec.sample_rate_hz();
    const double spr_d = rate * record_seconds;
    if (spr_d != std::floor(spr_d)) throw ValidationError("sample rate times record length must be integral");
    const auto spr = static_cast<std::size_t>(spr_d);
    const std::size_t ns = rec.n_channels();
    const std::size_t n_records = rec.n_samples() / spr;
    if (n_records == 0) throw ValidationError("recording shorter than one EDF record");

    std::string header;
    auto field = [&header](std::string s, std::size_t width) {
        s.resize(width, ' ');
        header += s;
    };
    auto num = [&field](double v, std::size_t width) {
        std::ostringstream ss;
        ss.precision(8);
        ss << v;
        auto s = ss.str();
        if (s.size() > width) s.resize(width);
        field(s, width);
    };
    field("0", 8);
    field(rec.patient_id().empty() ? "X" : rec.patient_id(), 80);
    field("Startdate X", 80);
    field("01.01.00", 8);
    field("00.00.00", 8);
    num(static_cast<double>(256 * (ns + 1)), 8);
    field("", 44);
    num(static_cast<double>(n_records), 8);
    num(record_seconds, 8);
    num(static_cast<double>(ns), 4);
    for (const auto& l : rec.channel_labels()) field(l, 16);
    for (std::size_t i = 0; i < ns; ++i) field("", 80);
    for (std::size_t i = 0; i < ns; ++i) field("uV", 8);
    for (std::size_t i = 0; i < ns; ++i) num(physical_min, 8);
    for (std::size_t i = 0; i < ns; ++i) num(physical_max, 8);
    for (std::size_t i = 0; i < ns; ++i) num(-32768, 8);
    for (std::size_t i = 0; i < ns; ++i) num(32767, 8);
    for (std::size_t i = 0; i < ns; ++i) field("", 80);
    for (std::size_t i = 0; i < ns; ++i) num(static_cast<double>(spr), 8);
    for (std::size_t i = 0; i < ns; ++i) field("", 32);

    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + n_records * spr * ns * 2);
    const double gain = (physical_max - physical_min) / 65535.0;
    for (std::size_t r = 0; r < n_records; ++r) {
        for (std::size_t c = 0; c < ns; ++c) {
            const auto ch = rec.channel(c);
            for (std::size_t k = 0; k < spr; ++k) {
                const double dig = std::round((ch[r * spr + k] - physical_min) / gain) - 32768.0;
                const auto v = static_cast<std::int16_t>(std::clamp(dig, -32768.0, 32767.0));
                const auto u = static_cast<std::uint16_t>(v);
                out.push_back(static_cast<std::uint8_t>(u & 0xff));
                out.push_back(static_cast<std::uint8_t>(u >> 8));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Summary text

std::map<std::string, AnnotationSet> Summary::annotations() const {
    std::map<std::string, AnnotationSet> out;
    for (const auto& f : files) out[f.file_name] = f.seizures;
    return out;
}

const SummaryFile* Summary::find(std::string_view file_name) const {
    for (const auto& f : files) {
        if (f.file_name == file_name) return &f;
    }
    return nullptr;
}

namespace {

std::optional<double> parse_clock(std::string_view s) {
    int h = 0, m = 0, sec = 0;
    const std::string str(csv::trim(s));
    if (std::sscanf(str.c_str(), "%d:%d:%d", &h, &m, &sec) != 3) return std::nullopt;
    return h * 3600.0 + m * 60.0 + sec;
}

}  // namespace

Summary parse_summary(std::string_view text) {
    static const std::regex rate_re(R"(^\s*Data Sampling Rate:\s*([0-9.]+)\s*Hz)");
    static const std::regex file_re(R"(^\s*File Name:\s*(\S+))");
    static const std::regex start_re(R"(^\s*File Start Time:\s*(\S+))");
    static const std::regex end_re(R"(^\s*File End Time:\s*(\S+))");
    static const std::regex count_re(R"(^\s*Number of Seizures in File:\s*(\d+))");
    static const std::regex sz_re(R"(^\s*Seizure\s*(\d*)\s*(Start|End)\s+Time\s*:\s*([0-9.]+)\s*(seconds?)?)");

    Summary out;
    struct Pending {
        SummaryFile file;
        std::optional<int> declared;
        std::vector<double> starts, ends;
        std::size_t offset = 0;
    };
    std::optional<Pending> cur;

    auto finish = [&]() {
        if (!cur) return;
        auto& p = *cur;
        const int declared = p.declared.value_or(static_cast<int>(p.starts.size()));
        if (p.starts.size() != p.ends.size() || static_cast<int>(p.starts.size()) != declared) {
            throw ParseError("seizure count mismatch in block for " + p.file.file_name + ": declared " +
                                 std::to_string(declared) + ", found " + std::to_string(p.starts.size()) +
                                 " start and " + std::to_string(p.ends.size()) + " end times",
                             p.offset);
        }
        for (std::size_t i = 0; i < p.starts.size(); ++i) {
            if (!(p.ends[i] > p.starts[i])) {
                throw ParseError("seizure end precedes start in " + p.file.file_name, p.offset);
            }
            p.file.seizures.push_back({0, p.starts[i], p.ends[i]});
        }
        std::sort(p.file.seizures.begin(), p.file.seizures.end(),
                  [](const auto& a, const auto& b) { return a.onset_s < b.onset_s; });
        for (std::size_t i = 0; i < p.file.seizures.size(); ++i) {
            p.file.seizures[i].index_in_file = static_cast<int>(i + 1);
            if (i > 0 && p.file.seizures[i].onset_s < p.file.seizures[i - 1].offset_s) {
                throw ParseError("overlapping seizures in " + p.file.file_name, p.offset);
            }
        }
        out.files.push_back(std::move(p.file));
        cur.reset();
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string line(text.substr(pos, nl - pos));
        const auto line_at = pos;
        pos = nl + 1;
        std::smatch m;
        if (std::regex_search(line, m, file_re)) {
            finish();
            cur.emplace();
            cur->file.file_name = m[1];
            cur->offset = line_at;
        } else if (std::regex_search(line, m, rate_re)) {
            out.sample_rate_hz = std::stod(m[1]);
        } else if (!cur) {
            continue;
        } else if (std::regex_search(line, m, start_re)) {
            cur->file.start_clock_s = parse_clock(m[1].str());
        } else if (std::regex_search(line, m, end_re)) {
            cur->file.end_clock_s = parse_clock(m[1].str());
        } else if (std::regex_search(line, m, count_re)) {
            cur->declared = std::stoi(m[1]);
        } else if (std::regex_search(line, m, sz_re)) {
            (m[2] == "Start" ? cur->starts : cur->ends).push_back(std::stod(m[3]));
        }
        if (nl == text.size()) break;
    }
    finish();
    return out;
}

std::map<std::string, AnnotationSet> parse_summary_annotations(std::string_view text) {
    return parse_summary(text).annotations();
}

// ---------------------------------------------------------------------------
// CSV

Recording load_csv(const std::filesystem::path& path, double sample_rate_hz, std::vector<std::string> labels,
                   std::string patient_id) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ValidationError(path.string() + ": empty CSV");
    auto header = csv::split(lines[0]);
    for (auto& h : header) h = std::string(csv::trim(h));
    const std::size_t nc = header.size();
    if (!labels.empty() && labels.size() != nc) {
        throw ValidationError(path.string() + ": " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(nc) + " columns");
    }
    const std::size_t ns = lines.size() - 1;
    if (ns == 0) throw ValidationError(path.string() + ": CSV has a header but no samples");
    std::vector<double> data(ns * nc);
    for (std::size_t r = 0; r < ns; ++r) {
        const auto cells = csv::split(lines[r + 1]);
        const auto row_ctx = path.string() + " row " + std::to_string(r + 2);
        if (cells.size() != nc) {
            throw ValidationError(row_ctx + ": expected " + std::to_string(nc) + " cells, found " +
                                  std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < nc; ++c) data[c * ns + r] = csv::to_double(cells[c], row_ctx);
    }
    return Recording(std::move(patient_id), labels.empty() ? std::move(header) : std::move(labels),
                     sample_rate_hz, std::move(data));
}

void save_csv(const Recording& rec, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    const auto& labels = rec.channel_labels();
    for (std::size_t c = 0; c < labels.size(); ++c) out << (c ? "," : "") << labels[c];
    out << '\n';
    char buf[40];
    for (std::size_t t = 0; t < rec.n_samples(); ++t) {
        for (std::size_t c = 0; c < rec.n_channels(); ++c) {
            std::snprintf(buf, sizeof buf, "%.10g", rec.at(t, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Engine binary format

void write_prec(const Recording& rec, const std::filesystem::path& path) {
    nlohmann::json meta = {{"format", "prec1"},
                           {"patient", rec.patient_id()},
                           {"labels", rec.channel_labels()},
                           {"sample_rate_hz", rec.sample_rate_hz()},
                           {"start_time_s", rec.start_time_s()},
                           {"n_samples", rec.n_samples()}};
    auto out = csv::open_out(path);
    out << meta.dump() << '\n';
    std::vector<std::uint8_t> buf(rec.data().size() * 4);
    std::size_t i = 0;
    for (double v : rec.data()) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        buf[i++] = static_cast<std::uint8_t>(u);
        buf[i++] = static_cast<std::uint8_t>(u >> 8);
        buf[i++] = static_cast<std::uint8_t>(u >> 16);
        buf[i++] = static_cast<std::uint8_t>(u >> 24);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Recording read_prec(const std::filesystem::path& path) {
    const auto text = csv::read_text(path);
    const auto nl = text.find('\n');
    if (nl == std::string::npos) throw ParseError(path.string() + ": missing header line", 0);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(text.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": bad header: " + e.what(), 0);
    }
    if (meta.value("format", "") != "prec1") throw ParseError(path.string() + ": not a prec1 file", 0);
    const auto labels = meta.at("labels").get<std::vector<std::string>>();
    const auto n = meta.at("n_samples").get<std::size_t>();
    const std::size_t count = n * labels.size();
    if (text.size() - nl - 1 != count * 4) throw ParseError(path.string() + ": sample payload truncated", nl + 1);
    std::vector<double> data(count);
    const auto* p = reinterpret_cast<const std::uint8_t*>(text.data() + nl + 1);
    for (std::size_t i = 0; i < count; ++i, p += 4) {
        const std::uint32_t u = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
        data[i] = std::bit_cast<float>(u);
    }
    return Recording(meta.value("patient", ""), labels, meta.at("sample_rate_hz").get<double>(), std::move(data),
                     meta.value("start_time_s", 0.0));
}

}  // namespace preictal
