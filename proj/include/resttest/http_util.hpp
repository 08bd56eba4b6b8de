#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace resttest {

struct ParsedUrl {
  std::string scheme;  // http or https
  std::string host;
  int port = 80;
  std::string base_path;  // without trailing slash, may be empty

  // scheme://host:port
  std::string origin() const;
};

std::optional<ParsedUrl> parse_url(std::string_view url);

// Listening-socket options for servers: address reuse for quick restarts,
// but never port sharing, so a second server on a busy port fails to bind.
void exclusive_listen_options(int sock);

// RFC 3986 percent-encoding of everything except unreserved characters.
std::string url_encode(std::string_view text);

}  // namespace resttest
