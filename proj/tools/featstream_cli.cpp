// featstream: command-line front end for the feature container, codec,
// benchmark and transport modules.
//
// Exit codes: 0 success, 1 usage, 2 data/format error, 3 network error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "featstream/bench.hpp"
#include "featstream/bitstream.hpp"
#include "featstream/container.hpp"
#include "featstream/log.hpp"
#include "featstream/registry.hpp"
#include "featstream/synthetic.hpp"
#include "featstream/transport.hpp"

namespace fs = featstream;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNetwork = 3;

struct CompressArgs {
    std::string input, output, codec = "gzip";
    std::optional<int> level;
    int quant_bits = 0;
};

struct GenArgs {
    std::string shape, profile, output, dist = "relu", network, layer, source, category;
    double nonzero = 0.1;
    std::uint64_t seed = 0;
    double sigma = 1.0, lo = 0.0, hi = 1.0;
};

struct BenchArgs {
    std::string dir, output = "-", codecs = "gzip,zlib,bzip2,lzma", format = "csv";
    int repeat = 3;
};

struct FetchArgs {
    std::string endpoint, network, layer, source, codec = "gzip", output;
    int quant_bits = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw fs::IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw fs::IoError("failed writing " + path);
}

void run_compress(const CompressArgs& a) {
    auto t = fs::load_container(a.input);
    auto codec = fs::parse_codec(a.codec);
    fs::Mode mode = a.quant_bits > 0 ? fs::Mode::Quantized : fs::Mode::Lossless;
    std::optional<fs::QuantParams> q;
    if (mode == fs::Mode::Quantized) q = fs::auto_range(t, a.quant_bits);
    auto b = fs::encode_feature(t, codec, {a.level}, mode, q);
    fs::write_file(a.output, b.serialize());
    fs::log_info(a.input + " -> " + a.output + ": " + std::to_string(b.total_size()) + " bytes, rate " +
                 std::to_string(fs::compression_rate(b.total_size(), b.header.original_len)));
}

void run_decompress(const std::string& in, const std::string& out) {
    auto t = fs::decode_feature(fs::read_file(in));
    fs::save_container(out, t);
}

std::string describe_container(const fs::FeatureTensor& t) {
    auto s = fs::compute_stats(t);
    std::ostringstream o;
    o << "format: FTC1\n"
      << "category: " << fs::to_string(t.meta.category) << "\n"
      << "dims: " << fs::format_shape(t.dims) << "\n"
      << "elements: " << t.size() << "\n"
      << "volumeBytes: " << s.volume_bytes << "\n"
      << "nonZeroRate: " << s.nonzero_rate << "\n"
      << "min: " << s.min_val << "\n"
      << "max: " << s.max_val << "\n"
      << "network: " << t.meta.network << "\n"
      << "layer: " << t.meta.layer << "\n"
      << "source: " << t.meta.source << "\n";
    return o.str();
}

std::string describe_bitstream(std::span<const std::uint8_t> bytes) {
    std::size_t header_len = 0;
    auto h = fs::parse_header(bytes, &header_len);
    std::ostringstream o;
    o << "format: FDF1\n"
      << "version: " << int{h.version} << "\n"
      << "codec: " << fs::codec_name(h.codec) << "\n"
      << "mode: " << fs::to_string(h.mode) << "\n"
      << "category: " << fs::to_string(h.category) << "\n"
      << "dims: " << fs::format_shape(h.dims) << "\n";
    if (h.quant) {
        o << "quantBits: " << h.quant->bits << "\n"
          << "quantMin: " << h.quant->min_val << "\n"
          << "quantMax: " << h.quant->max_val << "\n";
    }
    char crc[16];
    std::snprintf(crc, sizeof crc, "0x%08x", h.payload_crc);
    o << "originalLen: " << h.original_len << "\n"
      << "compressedLen: " << h.compressed_len << "\n"
      << "headerBytes: " << header_len << "\n"
      << "payloadCrc: " << crc << "\n"
      << "rate: " << fs::compression_rate(header_len + h.compressed_len, h.original_len) << "\n"
      << "network: " << h.meta.network << "\n"
      << "layer: " << h.meta.layer << "\n"
      << "source: " << h.meta.source << "\n";
    return o.str();
}

void run_inspect(const std::string& path) {
    auto bytes = fs::read_file(path);
    if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, fs::kBitstreamMagic))
        std::cout << describe_bitstream(bytes);
    else
        std::cout << describe_container(fs::read_container(bytes));
}

void run_gen(const GenArgs& a) {
    std::vector<std::uint32_t> dims;
    std::optional<fs::Category> category;
    fs::FeatureMeta meta;
    if (!a.profile.empty()) {
        auto slash = a.profile.find('/');
        if (slash == std::string::npos) throw fs::ArgumentError("--profile expects network/layer");
        auto p = fs::lookup_profile(a.profile.substr(0, slash), a.profile.substr(slash + 1));
        if (!p) throw fs::ArgumentError("no registry entry for " + a.profile);
        dims = p->dims;
        category = p->category;
        meta.network = p->network;
        meta.layer = p->layer;
    } else {
        dims = fs::parse_shape(a.shape);
    }
    if (!a.category.empty()) {
        category = fs::parse_category(a.category);
        if (!category) throw fs::ArgumentError("unknown category " + a.category);
    }
    fs::ValueDistribution dist;
    if (a.dist == "relu")
        dist = fs::ReluGaussian{a.sigma};
    else if (a.dist == "uniform")
        dist = fs::UniformValues{a.lo, a.hi};
    else
        throw fs::ArgumentError("unknown distribution " + a.dist);

    auto t = fs::generate_synthetic(dims, a.nonzero, dist, a.seed, category);
    t.meta.network = a.network.empty() ? meta.network : a.network;
    t.meta.layer = a.layer.empty() ? meta.layer : a.layer;
    t.meta.source = a.source;
    fs::save_container(a.output, t);
}

void run_bench(const BenchArgs& a) {
    std::vector<fs::CodecId> codecs;
    for (const auto& name : split(a.codecs, ',')) codecs.push_back(fs::parse_codec(name));
    if (codecs.empty()) throw fs::ArgumentError("--codecs is empty");
    auto inputs = fs::list_containers(a.dir);
    if (inputs.empty()) throw fs::IoError("no .ftc files in " + a.dir);
    auto result = fs::run_benchmark(inputs, codecs, a.repeat);
    for (const auto& f : result.failures) fs::log_error("skipped " + f.path.string() + ": " + f.message);
    auto rows = fs::aggregate(result.records);
    write_text(a.output, fs::emit_report(rows, a.format == "md" ? fs::ReportFormat::Markdown : fs::ReportFormat::Csv));
}

int run_serve(const std::string& store_dir, const std::string& listen) {
    // Block termination signals before any thread starts so sigwait sees them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto store = std::make_shared<const fs::FeatureStore>(store_dir);
    fs::EdgeServer server(store, fs::Endpoint::parse(listen));
    // Announce the bound port on stdout so scripts can use port 0.
    std::cout << "listening " << fs::Endpoint{fs::Endpoint::parse(listen).host, server.port()}.to_string() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    fs::log_info("signal " + std::to_string(sig) + " received; shutting down");
    server.stop();
    return 0;
}

void run_fetch(const FetchArgs& a) {
    fs::RequestMessage req;
    req.network = a.network;
    req.layer = a.layer;
    req.source = a.source;
    req.codec = fs::parse_codec(a.codec);
    req.mode = a.quant_bits > 0 ? fs::Mode::Quantized : fs::Mode::Lossless;
    req.quant_bits = static_cast<std::uint8_t>(a.quant_bits);
    auto r = fs::request_feature(fs::Endpoint::parse(a.endpoint), req);
    fs::save_container(a.output, r.tensor);
    std::cout << "dims=" << fs::format_shape(r.tensor.dims) << " wire_bytes=" << r.wire_bytes
              << " request_bytes=" << r.request_bytes << " elapsed_s=" << r.elapsed_seconds << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intermediate deep feature containers, codecs, benchmarks and transport"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "featstream 0.1.0");

    CompressArgs ca;
    auto* compress = app.add_subcommand("compress", "Encode an FTC1 container into an FDF1 bitstream");
    compress->add_option("input", ca.input, "FTC1 container")->required();
    compress->add_option("output", ca.output, "FDF1 bitstream to write")->required();
    compress->add_option("--codec", ca.codec, "gzip|zlib|bzip2|lzma|zeromask[+backend]")->capture_default_str();
    compress->add_option("--level", ca.level, "backend effort level (default: backend default)");
    compress->add_option("--quant-bits", ca.quant_bits, "quantize to N bits (2-16) over the observed range")
        ->check(CLI::Range(2, 16));

    std::string dec_in, dec_out;
    auto* decompress = app.add_subcommand("decompress", "Decode an FDF1 bitstream back into an FTC1 container");
    decompress->add_option("input", dec_in, "FDF1 bitstream")->required();
    decompress->add_option("output", dec_out, "FTC1 container to write")->required();

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Print the header fields of an FTC1 or FDF1 file");
    inspect->add_option("file", inspect_path)->required();

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Write a synthetic sparse feature container");
    auto* shape = gen->add_option("--shape", ga.shape, "HxWxC or N");
    auto* profile = gen->add_option("--profile", ga.profile, "take the shape from the registry, e.g. vgg16/conv5");
    shape->excludes(profile);
    profile->excludes(shape);
    gen->add_option("--nonzero", ga.nonzero, "fraction of nonzero elements")->required()->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", ga.seed)->required();
    gen->add_option("--dist", ga.dist, "relu|uniform")->capture_default_str();
    gen->add_option("--sigma", ga.sigma, "relu gaussian sigma")->capture_default_str();
    gen->add_option("--lo", ga.lo, "uniform lower bound")->capture_default_str();
    gen->add_option("--hi", ga.hi, "uniform upper bound")->capture_default_str();
    gen->add_option("--network", ga.network);
    gen->add_option("--layer", ga.layer);
    gen->add_option("--source", ga.source);
    gen->add_option("--category", ga.category, "conv|pool|fc");
    gen->add_option("output", ga.output, "FTC1 container to write")->required();

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Benchmark codecs over every .ftc file in a directory");
    bench->add_option("dir", ba.dir)->required()->check(CLI::ExistingDirectory);
    bench->add_option("--codecs", ba.codecs, "comma-separated codec names")->capture_default_str();
    bench->add_option("--repeat", ba.repeat, "timed runs per measurement (median reported)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench->add_option("--format", ba.format)->check(CLI::IsMember({"csv", "md"}))->capture_default_str();
    bench->add_option("output", ba.output, "report path, or - for stdout")->capture_default_str();

    std::string store_dir, listen;
    auto* serve = app.add_subcommand("serve", "Serve a directory of FTC1 containers to cloud peers");
    serve->add_option("--store", store_dir)->required()->check(CLI::ExistingDirectory);
    serve->add_option("--listen", listen, "host:port")->required();

    FetchArgs fa;
    auto* fetch = app.add_subcommand("fetch", "Request one feature from an edge server");
    fetch->add_option("--endpoint", fa.endpoint, "host:port")->required();
    fetch->add_option("--network", fa.network);
    fetch->add_option("--layer", fa.layer)->required();
    fetch->add_option("--source", fa.source);
    fetch->add_option("--codec", fa.codec)->capture_default_str();
    fetch->add_option("--quant-bits", fa.quant_bits)->check(CLI::Range(2, 16));
    fetch->add_option("output", fa.output, "FTC1 container to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*compress) run_compress(ca);
        else if (*decompress) run_decompress(dec_in, dec_out);
        else if (*inspect) run_inspect(inspect_path);
        else if (*gen) {
            if (ga.shape.empty() && ga.profile.empty()) {
                std::cerr << "gen: one of --shape or --profile is required\n" << gen->help();
                return kExitUsage;
            }
            run_gen(ga);
        } else if (*bench) run_bench(ba);
        else if (*serve) return run_serve(store_dir, listen);
        else if (*fetch) run_fetch(fa);
    } catch (const fs::ArgumentError& e) {
        fs::log_error(e.what());
        return kExitUsage;
    } catch (const fs::ConnectionError& e) {
        fs::log_error(e.what());
        return kExitNetwork;
    } catch (const fs::ProtocolError& e) {
        fs::log_error(e.what());
        return kExitNetwork;
    } catch (const fs::RemoteStatusError& e) {
        fs::log_error(e.what());
        return kExitNetwork;
    } catch (const fs::Error& e) {
        fs::log_error(e.what());
        return kExitData;
    } catch (const std::exception& e) {
        fs::log_error(e.what());
        return kExitData;
    }
    return 0;
}
