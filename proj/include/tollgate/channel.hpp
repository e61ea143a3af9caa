#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "tollgate/bytes.hpp"

namespace tollgate {

struct ChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One unit of transit between the gateways: a media packet or a signalling
// message, already serialized. The tag lets the adversary and the receiving
// side dispatch without sniffing payload bytes.
struct Datagram {
    enum class Kind : uint8_t { Media = 0, Signalling = 1 };
    Kind kind = Kind::Media;
    ByteVec bytes;

    bool operator==(const Datagram&) const = default;

    ByteVec frame() const {
        ByteVec out;
        out.push_back(static_cast<uint8_t>(kind));
        out.insert(out.end(), bytes.begin(), bytes.end());
        return out;
    }

    static Datagram unframe(std::span<const uint8_t> wire) {
        if (wire.empty()) throw ChannelError("Datagram::unframe: empty frame");
        if (wire[0] > 1) throw ChannelError("Datagram::unframe: unknown kind tag");
        Datagram d;
        d.kind = static_cast<Kind>(wire[0]);
        d.bytes.assign(wire.begin() + 1, wire.end());
        return d;
    }
};

// Unidirectional, ordered, unreliable-in-principle transport. recv returns
// nullopt when nothing is pending (memory: queue empty; UDP: poll timeout).
class Channel {
  public:
    virtual ~Channel() = default;
    virtual void send(Datagram d) = 0;
    virtual std::optional<Datagram> recv() = 0;
};

class InMemoryChannel : public Channel {
  public:
    void send(Datagram d) override { queue_.push_back(std::move(d)); }

    std::optional<Datagram> recv() override {
        if (queue_.empty()) return std::nullopt;
        Datagram d = std::move(queue_.front());
        queue_.pop_front();
        return d;
    }

  private:
    std::deque<Datagram> queue_;
};

// Real datagrams over the loopback interface: one UDP packet per Datagram,
// kind byte prefixed. The simulator runs both ends in lock-step (a window is
// fully sent before the receiver drains), so a poll timeout reliably means
// "nothing more in flight" rather than "still propagating".
class UdpChannel : public Channel {
  public:
    UdpChannel(int tx_fd, int rx_fd, sockaddr_in peer, int recv_timeout_ms)
        : tx_fd_(tx_fd), rx_fd_(rx_fd), peer_(peer), recv_timeout_ms_(recv_timeout_ms) {}

    UdpChannel(const UdpChannel&) = delete;
    UdpChannel& operator=(const UdpChannel&) = delete;

    ~UdpChannel() override {
        if (tx_fd_ >= 0) ::close(tx_fd_);
        if (rx_fd_ >= 0) ::close(rx_fd_);
    }

    void send(Datagram d) override {
        ByteVec frame = d.frame();
        ssize_t n = ::sendto(tx_fd_, frame.data(), frame.size(), 0,
                             reinterpret_cast<const sockaddr*>(&peer_), sizeof(peer_));
        if (n < 0 || static_cast<size_t>(n) != frame.size())
            throw ChannelError("UdpChannel::send: sendto failed");
    }

    std::optional<Datagram> recv() override {
        pollfd pfd{rx_fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, recv_timeout_ms_);
        if (rc < 0) throw ChannelError("UdpChannel::recv: poll failed");
        if (rc == 0) return std::nullopt;
        uint8_t buf[65536];
        ssize_t n = ::recvfrom(rx_fd_, buf, sizeof(buf), 0, nullptr, nullptr);
        if (n < 0) throw ChannelError("UdpChannel::recv: recvfrom failed");
        return Datagram::unframe(std::span<const uint8_t>(buf, static_cast<size_t>(n)));
    }

  private:
    int tx_fd_;
    int rx_fd_;
    sockaddr_in peer_;
    int recv_timeout_ms_;
};

// A full link is one channel per direction.
struct DuplexLink {
    std::unique_ptr<Channel> a_to_b;
    std::unique_ptr<Channel> b_to_a;
};

inline DuplexLink make_memory_link() {
    return DuplexLink{std::make_unique<InMemoryChannel>(), std::make_unique<InMemoryChannel>()};
}

namespace detail {

inline int bound_udp_socket(sockaddr_in& addr_out) {
    int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw ChannelError("make_udp_link: socket() failed");
    int rcvbuf = 1 << 20;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;  // kernel-assigned
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(fd);
        throw ChannelError("make_udp_link: bind() failed");
    }
    socklen_t len = sizeof(addr_out);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr_out), &len) < 0) {
        ::close(fd);
        throw ChannelError("make_udp_link: getsockname() failed");
    }
    return fd;
}

inline int plain_udp_socket() {
    int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw ChannelError("make_udp_link: socket() failed");
    return fd;
}

}  // namespace detail

inline DuplexLink make_udp_link(int recv_timeout_ms = 50) {
    sockaddr_in rx_ab_addr{}, rx_ba_addr{};
    int rx_ab = detail::bound_udp_socket(rx_ab_addr);
    int rx_ba = detail::bound_udp_socket(rx_ba_addr);
    int tx_ab = detail::plain_udp_socket();
    int tx_ba = detail::plain_udp_socket();
    return DuplexLink{
        std::make_unique<UdpChannel>(tx_ab, rx_ab, rx_ab_addr, recv_timeout_ms),
        std::make_unique<UdpChannel>(tx_ba, rx_ba, rx_ba_addr, recv_timeout_ms),
    };
}

}  // namespace tollgate
