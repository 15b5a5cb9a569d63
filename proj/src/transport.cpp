#include "featstream/transport.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <limits>
#include <list>
#include <mutex>
#include <thread>

#include "byte_io.hpp"
#include "featstream/container.hpp"
#include "featstream/log.hpp"
#include "featstream/quantizer.hpp"
#include "socket.hpp"

namespace featstream {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Ok: return "OK";
        case Status::NotFound: return "NOT_FOUND";
        case Status::CodecError: return "CODEC_ERROR";
        case Status::BadRequest: return "BAD_REQUEST";
    }
    return "UNKNOWN";
}

void validate_request(const RequestMessage& r) {
    if (r.layer.empty()) throw InvalidRequestError("request layer is empty");
    if (r.mode == Mode::Lossless) {
        if (r.quant_bits != 0) throw InvalidRequestError("lossless request must have quantBits 0");
    } else {
        if (r.quant_bits < QuantParams::kMinBits || r.quant_bits > QuantParams::kMaxBits)
            throw InvalidRequestError("quantBits must be in [2, 16]");
        if (r.codec.zero_mask) throw InvalidRequestError("zeromask codecs cannot carry quantized codes");
    }
}

namespace {

void put_string(detail::ByteWriter& w, const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) throw ArgumentError("request string too long");
    w.u16(static_cast<std::uint16_t>(s.size()));
    w.text(s);
}

RequestMessage parse_request(detail::ByteReader& r) {
    RequestMessage m;
    m.network = r.text(r.u16());
    m.layer = r.text(r.u16());
    m.source = r.text(r.u16());
    const auto codec = r.u8();
    const auto mode = r.u8();
    m.quant_bits = r.u8();
    if (r.remaining() != 0) throw ProtocolError("trailing bytes in request body");
    try {
        m.codec = CodecId::from_byte(codec);
    } catch (const ArgumentError& e) {
        throw InvalidRequestError(e.what());
    }
    if (mode > 1) throw InvalidRequestError("unknown mode " + std::to_string(mode));
    m.mode = static_cast<Mode>(mode);
    validate_request(m);
    return m;
}

ResponseMessage parse_response(detail::ByteReader& r) {
    ResponseMessage m;
    const auto status = r.u8();
    if (status > 3) throw ProtocolError("unknown status " + std::to_string(status));
    m.status = static_cast<Status>(status);
    const auto len = r.u64();
    if (len != r.remaining()) throw ProtocolError("response payload length mismatch");
    auto payload = r.bytes(static_cast<std::size_t>(len));
    if (m.status != Status::Ok && !payload.empty()) throw ProtocolError("non-OK response carries a payload");
    m.payload.assign(payload.begin(), payload.end());
    return m;
}

}  // namespace

std::vector<std::uint8_t> frame(const Message& m) {
    std::vector<std::uint8_t> out(4, 0);
    detail::ByteWriter w(out);
    if (const auto* req = std::get_if<RequestMessage>(&m)) {
        try {
            validate_request(*req);
        } catch (const InvalidRequestError& e) {
            throw ArgumentError(e.what());
        }
        w.u8(static_cast<std::uint8_t>(MessageType::Request));
        put_string(w, req->network);
        put_string(w, req->layer);
        put_string(w, req->source);
        w.u8(req->codec.to_byte());
        w.u8(static_cast<std::uint8_t>(req->mode));
        w.u8(req->quant_bits);
    } else {
        const auto& resp = std::get<ResponseMessage>(m);
        if (resp.status != Status::Ok && !resp.payload.empty())
            throw ArgumentError("non-OK response may not carry a payload");
        w.u8(static_cast<std::uint8_t>(MessageType::Response));
        w.u8(static_cast<std::uint8_t>(resp.status));
        w.u64(resp.payload.size());
        w.bytes(resp.payload);
    }
    const std::uint64_t len = out.size() - 4;
    if (len > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("message too large to frame");
    for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(len >> (8 * i));
    return out;
}

Message deframe(std::span<const std::uint8_t> bytes, std::uint32_t max_frame) {
    if (bytes.size() < 4) throw ProtocolError("truncated frame header");
    detail::ByteReader r(bytes);
    const auto len = r.u32();
    if (len > max_frame)
        throw OversizeFrameError("frame of " + std::to_string(len) + " bytes exceeds limit of " +
                                 std::to_string(max_frame));
    if (r.remaining() < len) throw ProtocolError("truncated frame body");
    if (r.remaining() > len) throw ProtocolError("trailing bytes after frame");
    if (len == 0) throw ProtocolError("empty frame");
    try {
        const auto type = r.u8();
        if (type == static_cast<std::uint8_t>(MessageType::Request)) return parse_request(r);
        if (type == static_cast<std::uint8_t>(MessageType::Response)) return parse_response(r);
        throw ProtocolError("unknown message type " + std::to_string(type));
    } catch (const CorruptionError& e) {
        throw ProtocolError(std::string("malformed frame body: ") + e.what());
    }
}

Endpoint Endpoint::parse(std::string_view s) {
    auto colon = s.rfind(':');
    if (colon == std::string_view::npos || colon + 1 == s.size())
        throw ArgumentError("endpoint must be host:port, got '" + std::string(s) + "'");
    Endpoint e;
    auto host = s.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    e.host = std::string(host);
    auto port = s.substr(colon + 1);
    unsigned v = 0;
    auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), v);
    if (ec != std::errc{} || p != port.data() + port.size() || v > 65535)
        throw ArgumentError("bad port in endpoint '" + std::string(s) + "'");
    e.port = static_cast<std::uint16_t>(v);
    return e;
}

std::string Endpoint::to_string() const {
    if (host.find(':') != std::string::npos) return "[" + host + "]:" + std::to_string(port);
    return host + ":" + std::to_string(port);
}

FeatureStore::FeatureStore(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) throw IoError("cannot open feature store " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : it)
        if (entry.is_regular_file() && entry.path().extension() == ".ftc") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            auto t = load_container(f);
            index_.try_emplace(Key{t.meta.network, t.meta.layer, t.meta.source}, f);
        } catch (const Error& e) {
            log_error("skipping " + f.string() + ": " + e.what());
        }
    }
}

std::optional<std::filesystem::path> FeatureStore::locate(std::string_view network, std::string_view layer,
                                                          std::string_view source) const {
    Key key{std::string(network), std::string(layer), std::string(source)};
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    if (!source.empty()) return std::nullopt;
    // Empty source sorts first, so lower_bound lands on the first candidate.
    auto it = index_.lower_bound(key);
    if (it != index_.end() && std::get<0>(it->first) == network && std::get<1>(it->first) == layer)
        return it->second;
    return std::nullopt;
}

ResponseMessage answer_request(const FeatureStore& store, const RequestMessage& request) {
    try {
        validate_request(request);
    } catch (const InvalidRequestError&) {
        return {Status::BadRequest, {}};
    }
    auto path = store.locate(request.network, request.layer, request.source);
    if (!path) return {Status::NotFound, {}};
    try {
        auto t = load_container(*path);
        std::optional<QuantParams> q;
        if (request.mode == Mode::Quantized) q = auto_range(t, request.quant_bits);
        auto b = encode_feature(t, request.codec, {}, request.mode, q);
        return {Status::Ok, b.serialize()};
    } catch (const Error& e) {
        log_error("encoding " + path->string() + " failed: " + e.what());
        return {Status::CodecError, {}};
    }
}

// ---- server ---------------------------------------------------------------

struct EdgeServer::Impl {
    struct Connection {
        detail::Socket sock;
        std::thread thread;
        std::atomic<bool> done{false};
    };

    std::shared_ptr<const FeatureStore> store;
    ServerOptions options;
    detail::Socket listener;
    std::uint16_t port = 0;
    int wake[2] = {-1, -1};
    std::thread acceptor;
    std::mutex mu;
    std::list<std::unique_ptr<Connection>> connections;
    std::atomic<bool> stopping{false};

    ~Impl() {
        for (int fd : wake)
            if (fd >= 0) ::close(fd);
    }

    void serve(Connection& c) {
        try {
            while (true) {
                auto bytes = detail::read_frame(c.sock, options.max_frame);
                if (!bytes) break;
                ResponseMessage reply;
                try {
                    auto msg = deframe(*bytes, options.max_frame);
                    const auto* req = std::get_if<RequestMessage>(&msg);
                    if (!req) throw ProtocolError("peer sent a response frame");
                    reply = answer_request(*store, *req);
                    log_debug("request " + req->network + "/" + req->layer + "/" + req->source + " -> " +
                              std::string(to_string(reply.status)));
                } catch (const InvalidRequestError& e) {
                    log_debug(std::string("bad request: ") + e.what());
                    reply = {Status::BadRequest, {}};
                }
                c.sock.send_all(frame(reply));
            }
        } catch (const Error& e) {
            if (!stopping) log_debug(std::string("closing connection: ") + e.what());
        }
        c.sock.shutdown();
        c.done = true;
    }

    void reap() {
        std::lock_guard lock(mu);
        for (auto it = connections.begin(); it != connections.end();) {
            if ((*it)->done) {
                (*it)->thread.join();
                it = connections.erase(it);
            } else {
                ++it;
            }
        }
    }

    void accept_loop() {
        while (!stopping) {
            pollfd fds[2] = {{listener.fd(), POLLIN, 0}, {wake[0], POLLIN, 0}};
            if (::poll(fds, 2, -1) < 0) {
                if (errno == EINTR) continue;
                log_error("poll failed; edge server stopping");
                return;
            }
            if (fds[1].revents) return;
            if (!(fds[0].revents & POLLIN)) continue;
            int fd = ::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC);
            if (fd < 0) continue;
            reap();
            auto conn = std::make_unique<Connection>();
            conn->sock = detail::Socket(fd);
            auto* raw = conn.get();
            std::lock_guard lock(mu);
            connections.push_back(std::move(conn));
            raw->thread = std::thread([this, raw] { serve(*raw); });
        }
    }

    void stop() {
        if (stopping.exchange(true)) return;
        const char byte = 1;
        [[maybe_unused]] auto n = ::write(wake[1], &byte, 1);
        if (acceptor.joinable()) acceptor.join();
        std::lock_guard lock(mu);
        for (auto& c : connections) c->sock.shutdown();
        for (auto& c : connections)
            if (c->thread.joinable()) c->thread.join();
        connections.clear();
        listener.close();
    }
};

EdgeServer::EdgeServer(std::shared_ptr<const FeatureStore> store, const Endpoint& listen, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
    if (!store) throw ArgumentError("edge server needs a feature store");
    impl_->store = std::move(store);
    impl_->options = options;
    impl_->listener = detail::listen_tcp(listen.host, listen.port, options.backlog);
    impl_->port = detail::local_port(impl_->listener);
    if (::pipe2(impl_->wake, O_CLOEXEC) != 0) throw ConnectionError("cannot create wake pipe");
    impl_->acceptor = std::thread([impl = impl_.get()] { impl->accept_loop(); });
    log_info("edge server listening on " + listen.host + ":" + std::to_string(impl_->port) + " with " +
             std::to_string(impl_->store->size()) + " features");
}

EdgeServer::~EdgeServer() {
    if (impl_) impl_->stop();
}

std::uint16_t EdgeServer::port() const { return impl_->port; }

void EdgeServer::stop() { impl_->stop(); }

// ---- client ---------------------------------------------------------------

FetchResult request_feature(const Endpoint& endpoint, const RequestMessage& request, const ClientOptions& options) {
    const auto out = frame(request);
    const auto start = std::chrono::steady_clock::now();
    auto sock = detail::connect_tcp(endpoint.host, endpoint.port, options.timeout_ms);
    sock.send_all(out);
    auto in = detail::read_frame(sock, options.max_frame);
    if (!in) throw ConnectionError("edge closed the connection without replying");
    const auto stop = std::chrono::steady_clock::now();

    auto msg = deframe(*in, options.max_frame);
    auto* resp = std::get_if<ResponseMessage>(&msg);
    if (!resp) throw ProtocolError("edge replied with a request frame");
    if (resp->status != Status::Ok)
        throw RemoteStatusError(resp->status, "edge answered " + std::string(to_string(resp->status)) + " for " +
                                                  request.network + "/" + request.layer + "/" + request.source);
    FetchResult result;
    result.tensor = decode_feature(resp->payload);
    result.wire_bytes = in->size();
    result.request_bytes = out.size();
    result.elapsed_seconds = std::chrono::duration<double>(stop - start).count();
    return result;
}

}  // namespace featstream
