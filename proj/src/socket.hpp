#pragma once

// Minimal blocking TCP helpers over POSIX sockets.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace featstream::detail {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket() { close(); }
    Socket(Socket&& o) noexcept : fd_(o.release()) {}
    Socket& operator=(Socket&& o) noexcept {
        if (this != &o) {
            close();
            fd_ = o.release();
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    int release() {
        int f = fd_;
        fd_ = -1;
        return f;
    }
    void close();
    /// Wakes any thread blocked on this socket.
    void shutdown();

    /// Throws ConnectionError on failure.
    void send_all(std::span<const std::uint8_t> bytes);
    /// False on orderly EOF before the first byte; throws ProtocolError on EOF
    /// mid-buffer and ConnectionError on socket errors.
    bool recv_exact(std::span<std::uint8_t> out);

private:
    int fd_ = -1;
};

/// Reads one frame. Returns nullopt on EOF at a frame boundary. Oversize
/// declarations are rejected before any body byte is read.
std::optional<std::vector<std::uint8_t>> read_frame(Socket& s, std::uint32_t max_frame);

Socket connect_tcp(const std::string& host, std::uint16_t port, int timeout_ms);
Socket listen_tcp(const std::string& host, std::uint16_t port, int backlog);
std::uint16_t local_port(const Socket& s);

}  // namespace featstream::detail
