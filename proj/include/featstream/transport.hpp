#pragma once

// Layer-on-demand protocol between a cloud peer and an edge peer holding
// extracted features. One request in flight per connection.
//
// Frame (little-endian): u32 frameLen | u8 msgType | body
//   frameLen counts msgType plus body; bytes on the wire = 4 + frameLen.
// REQUEST  (msgType 1): u16-prefixed UTF-8 network, layer, sourceId;
//                       u8 codecId, u8 mode, u8 quantBits (0 = lossless)
// RESPONSE (msgType 2): u8 status, u64 payloadLen, payload (FDF1 bitstream)

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "featstream/bitstream.hpp"
#include "featstream/codec.hpp"
#include "featstream/error.hpp"
#include "featstream/tensor.hpp"

namespace featstream {

inline constexpr std::uint32_t kDefaultMaxFrame = 256u << 20;

enum class MessageType : std::uint8_t { Request = 1, Response = 2 };

enum class Status : std::uint8_t { Ok = 0, NotFound = 1, CodecError = 2, BadRequest = 3 };

std::string_view to_string(Status s);

struct RequestMessage {
    std::string network;
    std::string layer;
    std::string source;
    CodecId codec = CodecId::gzip();
    Mode mode = Mode::Lossless;
    std::uint8_t quant_bits = 0;

    bool operator==(const RequestMessage&) const = default;
};

struct ResponseMessage {
    Status status = Status::Ok;
    std::vector<std::uint8_t> payload;  // empty unless status == Ok

    bool operator==(const ResponseMessage&) const = default;
};

using Message = std::variant<RequestMessage, ResponseMessage>;

/// Malformed framing: truncated, unknown type, inconsistent body length.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Declared frame length exceeds the configured maximum.
class OversizeFrameError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

/// Well-framed request with invalid field values; answered with BAD_REQUEST.
class InvalidRequestError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

class ConnectionError : public Error {
public:
    using Error::Error;
};

/// The edge answered with a non-OK status.
class RemoteStatusError : public Error {
public:
    RemoteStatusError(Status status, const std::string& what) : Error(what), status_(status) {}
    Status status() const { return status_; }

private:
    Status status_;
};

/// Throws ArgumentError for messages that violate their invariants.
std::vector<std::uint8_t> frame(const Message& m);

/// Parses exactly one frame spanning all of `bytes`.
Message deframe(std::span<const std::uint8_t> bytes, std::uint32_t max_frame = kDefaultMaxFrame);

/// Checks request field invariants; throws InvalidRequestError.
void validate_request(const RequestMessage& r);

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    /// "host:port"; throws ArgumentError.
    static Endpoint parse(std::string_view s);
    std::string to_string() const;
};

/// Read-only index of a directory of FTC1 containers keyed by
/// (network, layer, source).
class FeatureStore {
public:
    explicit FeatureStore(const std::filesystem::path& dir);

    /// An empty source matches the first container of that network and layer.
    std::optional<std::filesystem::path> locate(std::string_view network, std::string_view layer,
                                                std::string_view source) const;
    std::size_t size() const { return index_.size(); }

private:
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, std::filesystem::path, std::less<>> index_;
};

/// Builds the edge's answer to one request.
ResponseMessage answer_request(const FeatureStore& store, const RequestMessage& request);

struct ServerOptions {
    std::uint32_t max_frame = kDefaultMaxFrame;
    int backlog = 64;
};

/// Serves a FeatureStore over TCP, one thread per connection. Stops and joins
/// all threads on stop() or destruction.
class EdgeServer {
public:
    EdgeServer(std::shared_ptr<const FeatureStore> store, const Endpoint& listen, ServerOptions options = {});
    ~EdgeServer();
    EdgeServer(const EdgeServer&) = delete;
    EdgeServer& operator=(const EdgeServer&) = delete;

    /// Bound port (useful when listening on port 0).
    std::uint16_t port() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct FetchResult {
    FeatureTensor tensor;
    std::uint64_t wire_bytes = 0;     // response frame, 4 + frameLen
    std::uint64_t request_bytes = 0;  // request frame
    double elapsed_seconds = 0.0;
};

struct ClientOptions {
    std::uint32_t max_frame = kDefaultMaxFrame;
    int timeout_ms = 30000;
};

/// Connects, sends one request and decodes the reply. Throws ConnectionError,
/// ProtocolError, RemoteStatusError or IntegrityError; never returns a partial
/// tensor.
FetchResult request_feature(const Endpoint& endpoint, const RequestMessage& request,
                            const ClientOptions& options = {});

}  // namespace featstream
