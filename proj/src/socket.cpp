#include "socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "featstream/transport.hpp"

namespace featstream::detail {

namespace {

std::string errno_text() { return std::strerror(errno); }

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo() {
        if (head) freeaddrinfo(head);
    }
};

void resolve(const std::string& host, std::uint16_t port, bool passive, AddrInfo& out) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    const auto service = std::to_string(port);
    int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.head);
    if (rc != 0) throw ConnectionError("cannot resolve " + host + ": " + gai_strerror(rc));
}

}  // namespace

void Socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::send_all(std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConnectionError("send failed: " + errno_text());
        }
        sent += static_cast<std::size_t>(n);
    }
}

bool Socket::recv_exact(std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
        ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw ConnectionError("receive timed out");
            throw ConnectionError("receive failed: " + errno_text());
        }
        if (n == 0) {
            if (got == 0) return false;
            throw ProtocolError("connection closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

std::optional<std::vector<std::uint8_t>> read_frame(Socket& s, std::uint32_t max_frame) {
    std::vector<std::uint8_t> buf(4);
    if (!s.recv_exact(buf)) return std::nullopt;
    const std::uint32_t len = std::uint32_t{buf[0]} | std::uint32_t{buf[1]} << 8 | std::uint32_t{buf[2]} << 16 |
                              std::uint32_t{buf[3]} << 24;
    if (len > max_frame)
        throw OversizeFrameError("frame of " + std::to_string(len) + " bytes exceeds limit of " +
                                 std::to_string(max_frame));
    buf.resize(4 + std::size_t{len});
    if (len > 0 && !s.recv_exact(std::span(buf).subspan(4))) throw ProtocolError("connection closed mid-frame");
    return buf;
}

Socket connect_tcp(const std::string& host, std::uint16_t port, int timeout_ms) {
    AddrInfo ai;
    resolve(host, port, false, ai);
    std::string last = "no addresses";
    for (auto* p = ai.head; p; p = p->ai_next) {
        Socket s(::socket(p->ai_family, p->ai_socktype, p->ai_protocol));
        if (!s.valid()) {
            last = errno_text();
            continue;
        }
        if (timeout_ms > 0) {
            timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
            ::setsockopt(s.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
            ::setsockopt(s.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        }
        if (::connect(s.fd(), p->ai_addr, p->ai_addrlen) == 0) {
            int one = 1;
            ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return s;
        }
        last = errno_text();
    }
    throw ConnectionError("cannot connect to " + host + ":" + std::to_string(port) + ": " + last);
}

Socket listen_tcp(const std::string& host, std::uint16_t port, int backlog) {
    AddrInfo ai;
    resolve(host, port, true, ai);
    std::string last = "no addresses";
    for (auto* p = ai.head; p; p = p->ai_next) {
        Socket s(::socket(p->ai_family, p->ai_socktype, p->ai_protocol));
        if (!s.valid()) {
            last = errno_text();
            continue;
        }
        int one = 1;
        ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(s.fd(), p->ai_addr, p->ai_addrlen) == 0 && ::listen(s.fd(), backlog) == 0) return s;
        last = errno_text();
    }
    throw ConnectionError("cannot listen on " + host + ":" + std::to_string(port) + ": " + last);
}

std::uint16_t local_port(const Socket& s) {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        throw ConnectionError("getsockname failed: " + errno_text());
    if (addr.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

}  // namespace featstream::detail
