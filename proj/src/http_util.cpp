#include "resttest/http_util.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <cctype>

namespace resttest {

void exclusive_listen_options(int sock) {
  int yes = 1;
  setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
}

std::string ParsedUrl::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

std::optional<ParsedUrl> parse_url(std::string_view url) {
  ParsedUrl out;
  std::size_t sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  out.scheme = std::string(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;
  std::string_view rest = url;
  rest.remove_prefix(sep + 3);
  auto slash_it = std::find(rest.begin(), rest.end(), '/');
  std::size_t slash = slash_it == rest.end() ? std::string_view::npos
                                             : static_cast<std::size_t>(slash_it - rest.begin());
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) out.base_path = std::string(rest.substr(slash));
  while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  out.port = out.scheme == "https" ? 443 : 80;
  std::size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    try {
      out.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  out.host = std::string(authority);
  return out;
}

std::string url_encode(std::string_view text) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

}  // namespace resttest
