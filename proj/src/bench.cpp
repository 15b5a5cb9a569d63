#include "featstream/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "featstream/bitstream.hpp"
#include "featstream/container.hpp"
#include "featstream/error.hpp"

namespace featstream {

double compression_rate(std::uint64_t compressed_len, std::uint64_t original_len) {
    if (original_len == 0) throw ArgumentError("compression rate of an empty input is undefined");
    return static_cast<double>(compressed_len) / static_cast<double>(original_len);
}

CompressionRecord measure(const FeatureTensor& t, CodecId codec, const CodecParams& params, int repeat,
                          std::string sample_id) {
    if (repeat < 1) throw ArgumentError("repeat must be at least 1");
    validate(t);
    const auto raw = to_f32le(t.values);

    std::vector<double> times;
    std::vector<std::uint8_t> payload;
    for (int i = 0; i < repeat; ++i) {
        auto start = std::chrono::steady_clock::now();
        payload = compress_payload(raw, codec, params);
        auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    const double median = times.size() % 2 ? times[times.size() / 2]
                                           : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);

    CompressionRecord r;
    r.network = t.meta.network;
    r.layer = t.meta.layer;
    r.dims = t.dims;
    r.codec = codec;
    r.sample_id = std::move(sample_id);
    r.original_len = t.volume_bytes();
    r.compressed_len = header_size(t.dims.size(), Mode::Lossless, encode_meta_text(FeatureMeta{}).size()) +
                       payload.size();
    r.compression_rate = compression_rate(r.compressed_len, r.original_len);
    r.wall_time_seconds = median;
    r.nonzero_rate = compute_stats(t).nonzero_rate;
    return r;
}

std::vector<std::filesystem::path> list_containers(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> out;
    for (const auto& entry : it) {
        if (entry.is_regular_file() && entry.path().extension() == ".ftc") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

BenchResult run_benchmark(std::span<const std::filesystem::path> inputs, std::span<const CodecId> codecs,
                          int repeat, const CodecParams& params) {
    if (repeat < 1) throw ArgumentError("repeat must be at least 1");
    if (inputs.empty()) throw ArgumentError("no benchmark inputs");
    BenchResult result;
    for (const auto& path : inputs) {
        FeatureTensor t;
        try {
            t = load_container(path);
        } catch (const Error& e) {
            result.failures.push_back({path, e.what()});
            continue;
        }
        const auto sample = t.meta.source.empty() ? path.stem().string() : t.meta.source;
        for (auto codec : codecs) result.records.push_back(measure(t, codec, params, repeat, sample));
    }
    if (result.failures.size() == inputs.size())
        throw Error("all " + std::to_string(inputs.size()) + " benchmark inputs failed; first: " +
                    result.failures.front().message);
    return result;
}

namespace {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

// Two-pass mean and sample standard deviation.
template <class Get>
Moments moments(const std::vector<const CompressionRecord*>& group, Get get) {
    double sum = 0.0;
    for (auto* r : group) sum += get(*r);
    Moments m;
    m.mean = sum / static_cast<double>(group.size());
    if (group.size() > 1) {
        double ss = 0.0;
        for (auto* r : group) {
            const double d = get(*r) - m.mean;
            ss += d * d;
        }
        m.std = std::sqrt(ss / static_cast<double>(group.size() - 1));
    }
    return m;
}

}  // namespace

std::vector<AggregateRow> aggregate(std::span<const CompressionRecord> records) {
    using Key = std::tuple<std::string, std::string, std::uint8_t>;
    std::map<Key, std::size_t> index;
    std::vector<std::vector<const CompressionRecord*>> groups;
    for (const auto& r : records) {
        auto [it, fresh] = index.try_emplace(Key{r.network, r.layer, r.codec.to_byte()}, groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(&r);
    }

    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (const auto& g : groups) {
        AggregateRow row;
        row.network = g.front()->network;
        row.layer = g.front()->layer;
        row.dims = g.front()->dims;
        row.codec = g.front()->codec;
        row.count = g.size();
        auto rate = moments(g, [](const CompressionRecord& r) { return r.compression_rate; });
        auto time = moments(g, [](const CompressionRecord& r) { return r.wall_time_seconds; });
        auto nz = moments(g, [](const CompressionRecord& r) { return r.nonzero_rate; });
        row.mean_rate = rate.mean;
        row.std_rate = rate.std;
        row.mean_time = time.mean;
        row.std_time = time.std;
        row.mean_nonzero = nz.mean;
        row.std_nonzero = nz.std;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_volume(std::uint64_t bytes) {
    constexpr std::uint64_t kib = 1024;
    if (bytes == 0 || bytes % kib != 0) return std::to_string(bytes);
    if (bytes < 2 * kib * kib) return std::to_string(bytes / kib) + "K";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(bytes) / static_cast<double>(kib * kib));
    std::string s = buf;
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s + "M";
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Values below 0.01 switch to milli units, as in "5.204m±0.662m".
std::string pm(double mean, double std, bool milli_ok) {
    char buf[64];
    if (milli_ok && mean < 0.01)
        std::snprintf(buf, sizeof buf, "%.3fm±%.3fm", mean * 1e3, std * 1e3);
    else
        std::snprintf(buf, sizeof buf, "%.3f±%.3f", mean, std);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::string csv_report(std::span<const AggregateRow> rows) {
    std::string out =
        "feat_type,feat_shape,data_volume,nonzero_mean,nonzero_std,codec,rate_mean,rate_std,time_mean,time_std,"
        "network,count\n";
    for (const auto& r : rows) {
        std::uint64_t volume = 4;
        for (auto d : r.dims) volume *= d;
        out += csv_field(r.layer) + ',' + format_shape(r.dims) + ',' + std::to_string(volume) + ',';
        out += num(r.mean_nonzero) + ',' + num(r.std_nonzero) + ',' + codec_name(r.codec) + ',';
        out += num(r.mean_rate) + ',' + num(r.std_rate) + ',' + num(r.mean_time) + ',' + num(r.std_time) + ',';
        out += csv_field(r.network) + ',' + std::to_string(r.count) + '\n';
    }
    return out;
}

std::string markdown_table(std::span<const AggregateRow* const> rows) {
    std::vector<CodecId> codecs;
    std::vector<std::string> layers;
    for (auto* r : rows) {
        if (std::find(codecs.begin(), codecs.end(), r->codec) == codecs.end()) codecs.push_back(r->codec);
        if (std::find(layers.begin(), layers.end(), r->layer) == layers.end()) layers.push_back(r->layer);
    }
    std::string out = "| Feat. Type | Feat. Shape | Data Volume | Non-zero |";
    std::string rule = "|---|---|---|---|";
    for (auto c : codecs) {
        out += ' ' + codec_name(c) + " Rate | " + codec_name(c) + " Time (s) |";
        rule += "---|---|";
    }
    out += '\n' + rule + '\n';
    for (const auto& layer : layers) {
        const AggregateRow* first = nullptr;
        for (auto* r : rows)
            if (r->layer == layer) {
                first = r;
                break;
            }
        std::uint64_t volume = 4;
        for (auto d : first->dims) volume *= d;
        out += "| " + layer + " | " + format_shape(first->dims) + " | " + format_volume(volume) + " | " +
               pm(first->mean_nonzero, first->std_nonzero, false) + " |";
        for (auto c : codecs) {
            auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const AggregateRow* r) { return r->layer == layer && r->codec == c; });
            if (it == rows.end()) {
                out += " - | - |";
            } else {
                out += ' ' + pm((*it)->mean_rate, (*it)->std_rate, true) + " | " +
                       pm((*it)->mean_time, (*it)->std_time, true) + " |";
            }
        }
        out += '\n';
    }
    return out;
}

std::string markdown_report(std::span<const AggregateRow> rows) {
    if (rows.empty()) return markdown_table({});
    std::vector<std::string> networks;
    for (const auto& r : rows)
        if (std::find(networks.begin(), networks.end(), r.network) == networks.end()) networks.push_back(r.network);
    std::string out;
    for (const auto& net : networks) {
        std::vector<const AggregateRow*> subset;
        for (const auto& r : rows)
            if (r.network == net) subset.push_back(&r);
        if (!out.empty()) out += '\n';
        out += "### " + (net.empty() ? std::string("(unnamed)") : net) + "\n\n";
        out += markdown_table(subset);
    }
    return out;
}

}  // namespace

std::string emit_report(std::span<const AggregateRow> rows, ReportFormat format) {
    return format == ReportFormat::Csv ? csv_report(rows) : markdown_report(rows);
}

}  // namespace featstream
