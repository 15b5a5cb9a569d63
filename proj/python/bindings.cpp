#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "featstream/bench.hpp"
#include "featstream/bitstream.hpp"
#include "featstream/container.hpp"
#include "featstream/registry.hpp"
#include "featstream/synthetic.hpp"
#include "featstream/transport.hpp"

namespace py = pybind11;
namespace fs = featstream;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<std::uint8_t> to_vec(const py::bytes& b) {
    std::string_view s = b;
    return {s.begin(), s.end()};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

fs::Category category_arg(const std::string& s) {
    auto c = fs::parse_category(s);
    if (!c) throw fs::ArgumentError("unknown category '" + s + "'");
    return *c;
}

fs::FeatureTensor make_tensor(const FloatArray& values, const std::string& network, const std::string& layer,
                              const std::optional<std::string>& category, const std::string& source) {
    fs::FeatureTensor t;
    for (py::ssize_t i = 0; i < values.ndim(); ++i) {
        if (values.shape(i) < 0 || values.shape(i) > 0xffffffffLL) throw fs::ValidationError("extent out of range");
        t.dims.push_back(static_cast<std::uint32_t>(values.shape(i)));
    }
    t.values.assign(values.data(), values.data() + values.size());
    t.meta.network = network;
    t.meta.layer = layer;
    t.meta.source = source;
    if (category)
        t.meta.category = category_arg(*category);
    else
        t.meta.category = t.dims.size() == 1 ? fs::Category::Fc : fs::Category::Conv;
    fs::validate(t);
    return t;
}

FloatArray values_array(const fs::FeatureTensor& t) {
    std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
    FloatArray out(shape);
    std::copy(t.values.begin(), t.values.end(), out.mutable_data());
    return out;
}

py::dict header_dict(const fs::BitstreamHeader& h, std::size_t header_len) {
    py::dict d;
    d["version"] = h.version;
    d["codec"] = fs::codec_name(h.codec);
    d["mode"] = std::string(fs::to_string(h.mode));
    d["category"] = std::string(fs::to_string(h.category));
    d["dims"] = h.dims;
    if (h.quant) {
        d["quant_bits"] = h.quant->bits;
        d["quant_min"] = h.quant->min_val;
        d["quant_max"] = h.quant->max_val;
    }
    d["original_len"] = h.original_len;
    d["compressed_len"] = h.compressed_len;
    d["payload_crc"] = h.payload_crc;
    d["header_len"] = header_len;
    d["network"] = h.meta.network;
    d["layer"] = h.meta.layer;
    d["source"] = h.meta.source;
    return d;
}

py::dict record_dict(const fs::CompressionRecord& r) {
    py::dict d;
    d["network"] = r.network;
    d["layer"] = r.layer;
    d["dims"] = r.dims;
    d["codec"] = fs::codec_name(r.codec);
    d["sample_id"] = r.sample_id;
    d["original_len"] = r.original_len;
    d["compressed_len"] = r.compressed_len;
    d["compression_rate"] = r.compression_rate;
    d["wall_time_seconds"] = r.wall_time_seconds;
    d["nonzero_rate"] = r.nonzero_rate;
    return d;
}

std::vector<fs::CodecId> codec_list(const std::vector<std::string>& names) {
    std::vector<fs::CodecId> out;
    for (const auto& n : names) out.push_back(fs::parse_codec(n));
    return out;
}

fs::RequestMessage make_request(const std::string& network, const std::string& layer, const std::string& source,
                                const std::string& codec, std::optional<int> quant_bits) {
    fs::RequestMessage r;
    r.network = network;
    r.layer = layer;
    r.source = source;
    r.codec = fs::parse_codec(codec);
    if (quant_bits) {
        if (*quant_bits < 0 || *quant_bits > 255) throw fs::ArgumentError("quant_bits out of range");
        r.mode = fs::Mode::Quantized;
        r.quant_bits = static_cast<std::uint8_t>(*quant_bits);
    }
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Intermediate deep feature containers, codecs, benchmarks and transport";

    // Translators registered later are tried first, so bases go before subclasses.
    auto& error = py::register_exception<fs::Error>(m, "Error");
    py::register_exception<fs::ArgumentError>(m, "ArgumentError", error.ptr());
    py::register_exception<fs::ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<fs::FormatError>(m, "FormatError", error.ptr());
    auto& corruption = py::register_exception<fs::CorruptionError>(m, "CorruptionError", error.ptr());
    py::register_exception<fs::IntegrityError>(m, "IntegrityError", corruption.ptr());
    py::register_exception<fs::IoError>(m, "IoError", error.ptr());
    auto& protocol = py::register_exception<fs::ProtocolError>(m, "ProtocolError", error.ptr());
    py::register_exception<fs::OversizeFrameError>(m, "OversizeFrameError", protocol.ptr());
    py::register_exception<fs::ConnectionError>(m, "ConnectionError", error.ptr());

    static py::handle remote_status =
        py::exception<fs::RemoteStatusError>(m, "RemoteStatusError", error.ptr()).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const fs::RemoteStatusError& e) {
            py::object exc = py::reinterpret_borrow<py::object>(remote_status)(e.what());
            exc.attr("status") = std::string(fs::to_string(e.status()));
            py::set_error(remote_status, exc);
        }
    });

    py::class_<fs::FeatureTensor>(m, "FeatureTensor")
        .def(py::init(&make_tensor), py::arg("values"), py::arg("network") = "", py::arg("layer") = "",
             py::arg("category") = py::none(), py::arg("source") = "")
        .def_property_readonly("values", &values_array)
        .def_property_readonly("dims", [](const fs::FeatureTensor& t) { return t.dims; })
        .def_property_readonly("shape", [](const fs::FeatureTensor& t) { return fs::format_shape(t.dims); })
        .def_property_readonly("category",
                               [](const fs::FeatureTensor& t) { return std::string(fs::to_string(t.meta.category)); })
        .def_property("network", [](const fs::FeatureTensor& t) { return t.meta.network; },
                      [](fs::FeatureTensor& t, std::string v) { t.meta.network = std::move(v); })
        .def_property("layer", [](const fs::FeatureTensor& t) { return t.meta.layer; },
                      [](fs::FeatureTensor& t, std::string v) { t.meta.layer = std::move(v); })
        .def_property("source", [](const fs::FeatureTensor& t) { return t.meta.source; },
                      [](fs::FeatureTensor& t, std::string v) { t.meta.source = std::move(v); })
        .def_property_readonly("volume_bytes", &fs::FeatureTensor::volume_bytes)
        .def("__len__", &fs::FeatureTensor::size)
        .def("bit_equal", [](const fs::FeatureTensor& a, const fs::FeatureTensor& b) { return fs::bit_equal(a, b); })
        .def("__repr__", [](const fs::FeatureTensor& t) {
            return "<FeatureTensor " + t.meta.network + "/" + t.meta.layer + " " + fs::format_shape(t.dims) + ">";
        });

    m.def("compute_stats", [](const fs::FeatureTensor& t) {
        auto s = fs::compute_stats(t);
        py::dict d;
        d["nonzero_rate"] = s.nonzero_rate;
        d["nonzero_count"] = s.nonzero_count;
        d["min"] = s.min_val;
        d["max"] = s.max_val;
        d["volume_bytes"] = s.volume_bytes;
        return d;
    });

    m.def(
        "generate_synthetic",
        [](std::vector<std::uint32_t> dims, double rate, std::uint64_t seed, const std::string& dist, double sigma,
           double lo, double hi, std::optional<std::string> category) {
            fs::ValueDistribution d;
            if (dist == "relu")
                d = fs::ReluGaussian{sigma};
            else if (dist == "uniform")
                d = fs::UniformValues{lo, hi};
            else
                throw fs::ArgumentError("unknown distribution '" + dist + "'");
            std::optional<fs::Category> cat;
            if (category) cat = category_arg(*category);
            py::gil_scoped_release release;
            return fs::generate_synthetic(dims, rate, d, seed, cat);
        },
        py::arg("dims"), py::arg("nonzero_rate"), py::arg("seed") = 0, py::arg("dist") = "relu",
        py::arg("sigma") = 1.0, py::arg("lo") = 0.0, py::arg("hi") = 1.0, py::arg("category") = py::none());

    m.def("profile_dims", [](const std::string& network, const std::string& layer) {
        auto p = fs::lookup_profile(network, layer);
        if (!p) throw fs::ArgumentError("no registry entry for " + network + "/" + layer);
        return p->dims;
    });

    m.def("write_container", [](const fs::FeatureTensor& t) { return to_bytes(fs::write_container(t)); });
    m.def("read_container", [](const py::bytes& b) { return fs::read_container(to_vec(b)); });
    m.def("save_container", &fs::save_container, py::arg("path"), py::arg("tensor"));
    m.def("load_container", &fs::load_container, py::arg("path"));

    m.def("codec_names", [] {
        std::vector<std::string> out;
        for (auto c : fs::all_codec_ids()) out.push_back(fs::codec_name(c));
        return out;
    });
    m.def(
        "compress_payload",
        [](const py::bytes& raw, const std::string& codec, std::optional<int> level) {
            auto in = to_vec(raw);
            auto id = fs::parse_codec(codec);
            std::vector<std::uint8_t> out;
            {
                py::gil_scoped_release release;
                out = fs::compress_payload(in, id, {level});
            }
            return to_bytes(out);
        },
        py::arg("raw"), py::arg("codec"), py::arg("level") = py::none());
    m.def(
        "decompress_payload",
        [](const py::bytes& data, const std::string& codec) {
            auto in = to_vec(data);
            auto id = fs::parse_codec(codec);
            std::vector<std::uint8_t> out;
            {
                py::gil_scoped_release release;
                out = fs::decompress_payload(in, id);
            }
            return to_bytes(out);
        },
        py::arg("data"), py::arg("codec"));

    m.def(
        "encode_feature",
        [](const fs::FeatureTensor& t, const std::string& codec, std::optional<int> level,
           std::optional<int> quant_bits) {
            auto id = fs::parse_codec(codec);
            std::vector<std::uint8_t> out;
            {
                py::gil_scoped_release release;
                if (quant_bits)
                    out = fs::encode_feature(t, id, {level}, fs::Mode::Quantized, fs::auto_range(t, *quant_bits))
                              .serialize();
                else
                    out = fs::encode_feature(t, id, {level}).serialize();
            }
            return to_bytes(out);
        },
        py::arg("tensor"), py::arg("codec") = "gzip", py::arg("level") = py::none(),
        py::arg("quant_bits") = py::none());
    m.def("decode_feature", [](const py::bytes& b) {
        auto in = to_vec(b);
        py::gil_scoped_release release;
        return fs::decode_feature(in);
    });
    m.def("parse_header", [](const py::bytes& b) {
        auto in = to_vec(b);
        std::size_t consumed = 0;
        auto h = fs::parse_header(in, &consumed);
        return header_dict(h, consumed);
    });
    m.def("header_size", [](std::size_t ndims, bool quantized, std::size_t meta_len) {
        return fs::header_size(ndims, quantized ? fs::Mode::Quantized : fs::Mode::Lossless, meta_len);
    }, py::arg("ndims"), py::arg("quantized") = false, py::arg("meta_len") = 0);

    m.def("compression_rate", &fs::compression_rate, py::arg("compressed_len"), py::arg("original_len"));
    m.def(
        "measure",
        [](const fs::FeatureTensor& t, const std::string& codec, int repeat) {
            auto id = fs::parse_codec(codec);
            fs::CompressionRecord r;
            {
                py::gil_scoped_release release;
                r = fs::measure(t, id, {}, repeat);
            }
            return record_dict(r);
        },
        py::arg("tensor"), py::arg("codec") = "gzip", py::arg("repeat") = 1);
    m.def(
        "run_benchmark",
        [](const std::filesystem::path& dir, const std::vector<std::string>& codecs, int repeat,
           const std::string& format) {
            if (format != "csv" && format != "md") throw fs::ArgumentError("format must be 'csv' or 'md'");
            auto ids = codec_list(codecs);
            std::string report;
            std::vector<fs::CompressionRecord> records;
            {
                py::gil_scoped_release release;
                auto result = fs::run_benchmark(fs::list_containers(dir), ids, repeat);
                report = fs::emit_report(fs::aggregate(result.records),
                                         format == "md" ? fs::ReportFormat::Markdown : fs::ReportFormat::Csv);
                records = std::move(result.records);
            }
            py::list rs;
            for (const auto& r : records) rs.append(record_dict(r));
            return py::make_tuple(report, rs);
        },
        py::arg("directory"), py::arg("codecs") = std::vector<std::string>{"gzip", "zlib", "bzip2", "lzma"},
        py::arg("repeat") = 1, py::arg("format") = "csv");
    m.def("format_volume", &fs::format_volume);

    py::class_<fs::EdgeServer>(m, "EdgeServer")
        .def(py::init([](const std::filesystem::path& store, const std::string& listen) {
                 auto s = std::make_shared<const fs::FeatureStore>(store);
                 return std::make_unique<fs::EdgeServer>(s, fs::Endpoint::parse(listen));
             }),
             py::arg("store"), py::arg("listen") = "127.0.0.1:0")
        .def_property_readonly("port", &fs::EdgeServer::port)
        .def("stop", &fs::EdgeServer::stop, py::call_guard<py::gil_scoped_release>())
        .def("__enter__", [](fs::EdgeServer& s) -> fs::EdgeServer& { return s; }, py::return_value_policy::reference)
        .def("__exit__", [](fs::EdgeServer& s, py::args) {
            py::gil_scoped_release release;
            s.stop();
        });

    m.def(
        "request_feature",
        [](const std::string& endpoint, const std::string& network, const std::string& layer,
           const std::string& source, const std::string& codec, std::optional<int> quant_bits, int timeout_ms) {
            auto ep = fs::Endpoint::parse(endpoint);
            auto req = make_request(network, layer, source, codec, quant_bits);
            fs::ClientOptions opts;
            opts.timeout_ms = timeout_ms;
            fs::FetchResult r;
            {
                py::gil_scoped_release release;
                r = fs::request_feature(ep, req, opts);
            }
            py::dict stats;
            stats["wire_bytes"] = r.wire_bytes;
            stats["request_bytes"] = r.request_bytes;
            stats["elapsed_seconds"] = r.elapsed_seconds;
            return py::make_tuple(std::move(r.tensor), stats);
        },
        py::arg("endpoint"), py::arg("network") = "", py::arg("layer"), py::arg("source") = "",
        py::arg("codec") = "gzip", py::arg("quant_bits") = py::none(), py::arg("timeout_ms") = 30000);
}
