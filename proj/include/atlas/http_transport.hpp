#pragma once

#include <chrono>
#include <string>

#include "atlas/openalex.hpp"

namespace atlas {

inline constexpr const char* kOpenAlexBaseUrl = "https://api.openalex.org";

// Transport over cpp-httplib. `base_url` is scheme://host[:port]; https needs
// the OpenSSL-enabled build. A fresh connection is opened per request.
class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(std::string base_url = kOpenAlexBaseUrl,
                            std::chrono::seconds timeout = std::chrono::seconds(30));
  HttpResponse get(const std::string& target) override;

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
};

}  // namespace atlas
