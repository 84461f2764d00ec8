// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace storygraph {

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_body_size = 8 * 1024 * 1024;
  std::string user_agent = "storygraph/1.0";
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
  std::string location;  // raw Location header, empty when absent
};

/// One HTTP exchange, no redirect following. Implementations throw
/// storygraph::Error with FetchTimeout, BodyTooLarge, or NetworkError and
/// must be safe to call from several threads at once.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

}  // namespace storygraph
