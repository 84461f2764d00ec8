// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace storygraph {

enum class ErrorCode {
  // feed_ingest
  UnparseableFeed,
  EmptyFeed,
  FetchTimeout,
  TooManyRedirects,
  HttpError,
  BodyTooLarge,
  NetworkError,
  AllFeedsFailed,
  // content_extract
  NoContent,
  // entity_extract
  AnnotatorUnreachable,
  AnnotatorProtocolError,
  // snapshot_store
  SchemaVersionMismatch,
  CorruptSnapshot,
  StoreWriteError,
  // service
  ConfigInvalid,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnparseableFeed: return "UnparseableFeed";
    case ErrorCode::EmptyFeed: return "EmptyFeed";
    case ErrorCode::FetchTimeout: return "FetchTimeout";
    case ErrorCode::TooManyRedirects: return "TooManyRedirects";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::BodyTooLarge: return "BodyTooLarge";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::AllFeedsFailed: return "AllFeedsFailed";
    case ErrorCode::NoContent: return "NoContent";
    case ErrorCode::AnnotatorUnreachable: return "AnnotatorUnreachable";
    case ErrorCode::AnnotatorProtocolError: return "AnnotatorProtocolError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::StoreWriteError: return "StoreWriteError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every recoverable failure in the pipeline surfaces as an Error carrying a
/// code. Callers decide per code whether the failure drops one article, skips
/// one feed, or ends the cycle.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int http_status = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        http_status_(http_status) {}

  ErrorCode code() const noexcept { return code_; }

  // Only meaningful for ErrorCode::HttpError.
  int http_status() const noexcept { return http_status_; }

 private:
  ErrorCode code_;
  int http_status_;
};

}  // namespace storygraph
