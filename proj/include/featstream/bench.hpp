#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "featstream/codec.hpp"
#include "featstream/tensor.hpp"

namespace featstream {

/// compressed / original. Throws ArgumentError when original is zero.
double compression_rate(std::uint64_t compressed_len, std::uint64_t original_len);

/// One (tensor, codec) measurement.
struct CompressionRecord {
    std::string network;
    std::string layer;
    std::vector<std::uint32_t> dims;
    CodecId codec;
    std::string sample_id;
    std::uint64_t original_len = 0;
    /// Full bitstream length: header with empty meta fields plus payload.
    std::uint64_t compressed_len = 0;
    double compression_rate = 0.0;
    double wall_time_seconds = 0.0;
    double nonzero_rate = 0.0;
};

/// Encodes `t` with `codec` and times compress_payload alone: the median of
/// `repeat` single-threaded runs. The rate counts the fixed bitstream header
/// (meta stripped) in the numerator.
CompressionRecord measure(const FeatureTensor& t, CodecId codec, const CodecParams& params, int repeat,
                          std::string sample_id = {});

struct BenchFailure {
    std::filesystem::path path;
    std::string message;
};

struct BenchResult {
    std::vector<CompressionRecord> records;
    std::vector<BenchFailure> failures;
};

/// One record per readable container and codec, in input order. Unreadable
/// files are reported in `failures`; if every file fails, throws Error.
BenchResult run_benchmark(std::span<const std::filesystem::path> inputs, std::span<const CodecId> codecs,
                          int repeat, const CodecParams& params = {});

/// *.ftc files directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_containers(const std::filesystem::path& dir);

/// mean +- sample standard deviation per (network, layer, codec).
struct AggregateRow {
    std::string network;
    std::string layer;
    std::vector<std::uint32_t> dims;
    CodecId codec;
    std::size_t count = 0;
    double mean_rate = 0.0, std_rate = 0.0;
    double mean_time = 0.0, std_time = 0.0;
    double mean_nonzero = 0.0, std_nonzero = 0.0;
};

/// Groups in order of first appearance. Standard deviations use n - 1 and are
/// zero for single-record groups.
std::vector<AggregateRow> aggregate(std::span<const CompressionRecord> records);

enum class ReportFormat { Csv, Markdown };

/// CSV: header row then one line per AggregateRow with columns
///   feat_type, feat_shape, data_volume, nonzero_mean, nonzero_std, codec,
///   rate_mean, rate_std, time_mean, time_std, network, count
/// Markdown: one table per network, one line per feature type, and a
/// rate/time column pair per codec, values as mean±std.
std::string emit_report(std::span<const AggregateRow> rows, ReportFormat format);

/// "392K", "12.25M", "4000": byte counts in the tables' notation.
std::string format_volume(std::uint64_t bytes);

}  // namespace featstream
