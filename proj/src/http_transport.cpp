#include "atlas/http_transport.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "atlas/error.hpp"

namespace atlas {

HttplibTransport::HttplibTransport(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

HttpResponse HttplibTransport::get(const std::string& target) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_follow_location(true);
  const httplib::Headers headers{{"User-Agent", "keyword-atlas/1.0"}, {"Accept", "application/json"}};
  auto result = client.Get(target, headers);
  if (!result) {
    throw TransportError("GET " + base_url_ + target + " failed: " + httplib::to_string(result.error()));
  }
  return {result->status, result->body};
}

}  // namespace atlas
