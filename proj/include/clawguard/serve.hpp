#pragma once

#include <iosfwd>
#include <string>

#include "clawguard/gateway.hpp"

namespace clawguard::serve {

// Classification of a peer address into a channel origin; 127.0.0.0/8 is
// LOOPBACK, RFC1918 ranges are LAN, everything else REMOTE.
gateway::ChannelOrigin classify_peer(const std::string& peer_ip);

// Blocking accept loop over the configured TCP endpoint; one thread per
// connection, length-prefixed envelopes both ways. Returns only on a fatal
// socket error.
int serve_forever(gateway::GatewayConfig config, const std::string& profiles_dir,
                  std::ostream& out, std::ostream& err);

}  // namespace clawguard::serve
