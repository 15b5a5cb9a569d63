#include <gtest/gtest.h>

#include <cmath>

#include "featstream/bench.hpp"
#include "featstream/bitstream.hpp"
#include "featstream/container.hpp"
#include "featstream/error.hpp"
#include "test_helpers.hpp"

using namespace featstream;

namespace {

CompressionRecord record(std::string net, std::string layer, CodecId codec, double rate, double time, double nz) {
    CompressionRecord r;
    r.network = std::move(net);
    r.layer = std::move(layer);
    r.dims = {14, 14, 512};
    r.codec = codec;
    r.compression_rate = rate;
    r.wall_time_seconds = time;
    r.nonzero_rate = nz;
    return r;
}

}  // namespace

TEST(Bench, CompressionRateIsExactQuotient) {
    EXPECT_EQ(compression_rate(250, 1000), 0.25);
    EXPECT_EQ(compression_rate(423, 401408), 423.0 / 401408.0);
    EXPECT_EQ(compression_rate(1092, 1000), 1.092);
    EXPECT_THROW(compression_rate(5, 0), ArgumentError);
}

TEST(Bench, MeasureCountsHeaderAndPayload) {
    auto t = fstest::small_tensor(4, 0.2);
    for (auto codec : all_codec_ids()) {
        auto r = measure(t, codec, {}, 3, "x");
        const auto payload = compress_payload(to_f32le(t.values), codec).size();
        const auto header = header_size(t.dims.size(), Mode::Lossless, encode_meta_text(FeatureMeta{}).size());
        EXPECT_EQ(r.compressed_len, header + payload);
        EXPECT_EQ(r.original_len, t.volume_bytes());
        EXPECT_EQ(r.compression_rate, static_cast<double>(header + payload) / t.volume_bytes());
        EXPECT_EQ(r.nonzero_rate, compute_stats(t).nonzero_rate);
        EXPECT_GE(r.wall_time_seconds, 0.0);
        EXPECT_EQ(r.sample_id, "x");
    }
    EXPECT_THROW(measure(t, CodecId::gzip(), {}, 0), ArgumentError);
}

TEST(Bench, AggregateHandComputed) {
    std::vector<CompressionRecord> rs = {
        record("vgg16", "conv5", CodecId::gzip(), 0.1, 1.0, 0.05),
        record("vgg16", "fc1", CodecId::gzip(), 0.9, 2.0, 0.5),
        record("vgg16", "conv5", CodecId::gzip(), 0.3, 3.0, 0.07),
        record("vgg16", "conv5", CodecId::bzip2(), 0.2, 4.0, 0.05),
    };
    auto rows = aggregate(rs);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].layer, "conv5");
    EXPECT_EQ(rows[0].codec, CodecId::gzip());
    EXPECT_EQ(rows[0].count, 2u);
    EXPECT_NEAR(rows[0].mean_rate, 0.2, 1e-15);
    // sample std of {0.1, 0.3} = sqrt(0.02) = 0.141421...
    EXPECT_NEAR(rows[0].std_rate, std::sqrt(0.02), 1e-15);
    EXPECT_NEAR(rows[0].mean_time, 2.0, 1e-15);
    EXPECT_NEAR(rows[0].std_time, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(rows[1].layer, "fc1");
    EXPECT_EQ(rows[1].std_rate, 0.0);
    EXPECT_EQ(rows[2].codec, CodecId::bzip2());
    EXPECT_TRUE(aggregate({}).empty());
}

TEST(Bench, FormatVolume) {
    EXPECT_EQ(format_volume(401408), "392K");
    EXPECT_EQ(format_volume(12845056), "12.25M");
    EXPECT_EQ(format_volume(3211264), "3.0625M");
    EXPECT_EQ(format_volume(4000), "4000");
    EXPECT_EQ(format_volume(16384), "16K");
    EXPECT_EQ(format_volume(2 * 1024 * 1024), "2M");
}

TEST(Bench, CsvReport) {
    std::vector<CompressionRecord> rs = {record("vgg16", "conv5", CodecId::gzip(), 0.25, 0.5, 0.125)};
    auto csv = emit_report(aggregate(rs), ReportFormat::Csv);
    EXPECT_EQ(csv,
              "feat_type,feat_shape,data_volume,nonzero_mean,nonzero_std,codec,rate_mean,rate_std,time_mean,time_std,"
              "network,count\n"
              "conv5,14x14x512,401408,0.125,0,gzip,0.25,0,0.5,0,vgg16,1\n");

    std::vector<CompressionRecord> odd = {record("net,\"x\"", "l", CodecId::zlib(), 1, 1, 1)};
    auto quoted = emit_report(aggregate(odd), ReportFormat::Csv);
    EXPECT_NE(quoted.find(",\"net,\"\"x\"\"\",1\n"), std::string::npos) << quoted;
}

TEST(Bench, MarkdownReport) {
    std::vector<CompressionRecord> rs = {
        record("vgg16", "conv5", CodecId::gzip(), 0.079, 0.0052, 0.068),
        record("vgg16", "conv5", CodecId::gzip(), 0.079, 0.0052, 0.068),
        record("resnet50", "fc1", CodecId::bzip2(), 1.2, 0.5, 0.9),
    };
    auto md = emit_report(aggregate(rs), ReportFormat::Markdown);
    EXPECT_NE(md.find("### vgg16"), std::string::npos);
    EXPECT_NE(md.find("### resnet50"), std::string::npos);
    EXPECT_NE(md.find("| conv5 | 14x14x512 | 392K | 0.068±0.000 | 0.079±0.000 | 5.200m±0.000m |"), std::string::npos)
        << md;
    EXPECT_NE(md.find("| 1.200±0.000 | 0.500±0.000 |"), std::string::npos) << md;
}

TEST(Bench, RunOverDirectory) {
    fstest::TempDir dir;
    for (int i = 0; i < 3; ++i) save_container(dir / ("s" + std::to_string(i) + ".ftc"), fstest::small_tensor(i));
    write_file(dir / "broken.ftc", std::vector<std::uint8_t>{'F', 'T', 'C', '1'});
    write_file(dir / "ignored.txt", std::vector<std::uint8_t>{1, 2, 3});

    auto files = list_containers(dir.path);
    ASSERT_EQ(files.size(), 4u);
    EXPECT_EQ(files.front().filename(), "broken.ftc");

    const std::vector<CodecId> codecs{CodecId::gzip(), CodecId::zeromask(Backend::Bzip2)};
    auto result = run_benchmark(files, codecs, 1);
    EXPECT_EQ(result.records.size(), 6u);
    ASSERT_EQ(result.failures.size(), 1u);
    EXPECT_EQ(result.failures[0].path.filename(), "broken.ftc");
    EXPECT_EQ(result.records[0].sample_id, "img0.jpg");

    std::vector<std::filesystem::path> only_broken{dir / "broken.ftc"};
    EXPECT_THROW(run_benchmark(only_broken, codecs, 1), Error);
    EXPECT_THROW(run_benchmark({}, codecs, 1), ArgumentError);
    EXPECT_THROW(list_containers(dir / "nope"), IoError);
}
