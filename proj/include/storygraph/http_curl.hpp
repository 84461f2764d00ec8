// SPDX-License-Identifier: Apache-2.0
#pragma once

// libcurl-backed HttpClient. Link with CURL::libcurl.

#include <curl/curl.h>

#include <memory>
#include <mutex>
#include <string>

#include "storygraph/error.hpp"
#include "storygraph/http.hpp"

namespace storygraph {

class CurlHttpClient final : public HttpClient {
 public:
  CurlHttpClient() {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  }

  HttpResponse send(const HttpRequest& request) override {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> handle(curl_easy_init(), &curl_easy_cleanup);
    if (!handle) throw Error(ErrorCode::NetworkError, "curl_easy_init failed");
    CURL* curl = handle.get();

    Sink sink{request.max_body_size, {}, false};
    curl_easy_setopt(curl, CURLOPT_URL, request.url.c_str());
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 0L);
    curl_easy_setopt(curl, CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(curl, CURLOPT_TIMEOUT_MS, static_cast<long>(request.timeout.count()));
    curl_easy_setopt(curl, CURLOPT_USERAGENT, request.user_agent.c_str());
    curl_easy_setopt(curl, CURLOPT_ACCEPT_ENCODING, "");
    curl_easy_setopt(curl, CURLOPT_PROTOCOLS, static_cast<long>(CURLPROTO_HTTP | CURLPROTO_HTTPS));
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, &Sink::write);
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, &sink);

    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> headers(nullptr, &curl_slist_free_all);
    for (const auto& [name, value] : request.headers) {
      std::string line = name + ": " + value;
      headers.reset(curl_slist_append(headers.release(), line.c_str()));
    }
    if (headers) curl_easy_setopt(curl, CURLOPT_HTTPHEADER, headers.get());
    if (request.method == "POST") {
      curl_easy_setopt(curl, CURLOPT_POST, 1L);
      curl_easy_setopt(curl, CURLOPT_POSTFIELDS, request.body.data());
      curl_easy_setopt(curl, CURLOPT_POSTFIELDSIZE_LARGE, static_cast<curl_off_t>(request.body.size()));
    } else if (request.method != "GET") {
      curl_easy_setopt(curl, CURLOPT_CUSTOMREQUEST, request.method.c_str());
    }

    CURLcode rc = curl_easy_perform(curl);
    if (sink.overflow) {
      throw Error(ErrorCode::BodyTooLarge, request.url + " exceeds " + std::to_string(request.max_body_size) + " bytes");
    }
    if (rc == CURLE_OPERATION_TIMEDOUT) throw Error(ErrorCode::FetchTimeout, request.url);
    if (rc != CURLE_OK) throw Error(ErrorCode::NetworkError, request.url + ": " + curl_easy_strerror(rc));

    HttpResponse response;
    long status = 0;
    curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &status);
    response.status = static_cast<int>(status);
    char* content_type = nullptr;
    if (curl_easy_getinfo(curl, CURLINFO_CONTENT_TYPE, &content_type) == CURLE_OK && content_type)
      response.content_type = content_type;
    char* location = nullptr;
    if (curl_easy_getinfo(curl, CURLINFO_REDIRECT_URL, &location) == CURLE_OK && location)
      response.location = location;
    response.body = std::move(sink.data);
    return response;
  }

 private:
  struct Sink {
    std::size_t limit;
    std::string data;
    bool overflow;

    static size_t write(char* ptr, size_t size, size_t nmemb, void* user) {
      auto* self = static_cast<Sink*>(user);
      std::size_t n = size * nmemb;
      if (self->data.size() + n > self->limit) {
        self->overflow = true;
        return 0;  // aborts the transfer
      }
      self->data.append(ptr, n);
      return n;
    }
  };
};

}  // namespace storygraph
