#include "clawguard/serve.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <ostream>
#include <thread>

namespace clawguard::serve {
namespace fs = std::filesystem;

gateway::ChannelOrigin classify_peer(const std::string& peer_ip) {
  if (peer_ip.rfind("127.", 0) == 0 || peer_ip == "::1") {
    return gateway::ChannelOrigin::LOOPBACK;
  }
  if (peer_ip.rfind("10.", 0) == 0 || peer_ip.rfind("192.168.", 0) == 0) {
    return gateway::ChannelOrigin::LAN;
  }
  if (peer_ip.rfind("172.", 0) == 0) {
    const auto second_dot = peer_ip.find('.', 4);
    const int octet = std::atoi(peer_ip.substr(4, second_dot - 4).c_str());
    if (octet >= 16 && octet <= 31) return gateway::ChannelOrigin::LAN;
  }
  return gateway::ChannelOrigin::REMOTE;
}

namespace {

void connection_loop(gateway::Gateway& gw, int fd, gateway::ChannelOrigin origin) {
  gateway::Connection conn;
  conn.origin = origin;
  std::string buffer;
  char chunk[4096];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    while (true) {
      auto decoded = wire::try_decode(buffer);
      if (!decoded.ok()) {
        wire::Envelope error;
        error.kind = wire::EnvelopeKind::ERROR;
        error.payload = {{"code", decoded.error().code}, {"message", decoded.error().message}};
        const std::string frame = wire::frame(error);
        (void)::send(fd, frame.data(), frame.size(), 0);
        ::close(fd);
        return;
      }
      if (!decoded.value().has_value()) break;
      const auto responses = gw.handle(*decoded.value(), conn);
      for (const auto& response : responses) {
        const std::string frame = wire::frame(response);
        if (::send(fd, frame.data(), frame.size(), 0) < 0) {
          ::close(fd);
          return;
        }
      }
    }
  }
  ::close(fd);
}

}  // namespace

int serve_forever(gateway::GatewayConfig config, const std::string& profiles_dir,
                  std::ostream& out, std::ostream& err) {
  std::string host = "127.0.0.1";
  int port = 7433;
  const auto colon = config.listen_endpoint.rfind(':');
  if (colon != std::string::npos) {
    host = config.listen_endpoint.substr(0, colon);
    port = std::atoi(config.listen_endpoint.substr(colon + 1).c_str());
  }

  gateway::Gateway gw(config);
  if (!profiles_dir.empty() && fs::is_directory(profiles_dir)) {
    for (const auto& entry : fs::directory_iterator(profiles_dir)) {
      if (entry.path().extension() != ".json") continue;
      auto profile = policy::load_profile_file(entry.path().string());
      if (profile.ok()) gw.put_profile(profile.take());
    }
  }

  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) {
    err << "serve: cannot create socket\n";
    return 1;
  }
  const int reuse = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    err << "serve: bad listen address " << host << "\n";
    ::close(listener);
    return 1;
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listener, 16) < 0) {
    err << "serve: cannot bind " << config.listen_endpoint << "\n";
    ::close(listener);
    return 1;
  }
  out << "listening on " << config.listen_endpoint << "\n" << std::flush;

  while (true) {
    sockaddr_in peer{};
    socklen_t peer_len = sizeof(peer);
    const int fd = ::accept(listener, reinterpret_cast<sockaddr*>(&peer), &peer_len);
    if (fd < 0) break;
    char ip[INET_ADDRSTRLEN] = {0};
    ::inet_ntop(AF_INET, &peer.sin_addr, ip, sizeof(ip));
    std::thread(connection_loop, std::ref(gw), fd, classify_peer(ip)).detach();
  }
  ::close(listener);
  return 1;
}

}  // namespace clawguard::serve
