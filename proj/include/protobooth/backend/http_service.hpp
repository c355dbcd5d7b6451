#pragma once

// JSON-over-HTTP wire API in front of a Repository.
//
//   POST  /api/captures                       multipart: manifest + one part per angle
//   GET   /api/captures?user=&booth=&project=&from=&to=
//   GET   /api/captures/{id}                  record, capturer, codes, audit log
//   PATCH /api/captures/{id}                  annotation fields
//   POST  /api/captures/{id}/timestamp        {timestamp, note}
//   GET   /api/captures/{id}/views/{angle}    image bytes
//   GET   /api/captures/{id}/codes/{scheme}
//   PUT   /api/captures/{id}/codes/{scheme}   {categories}
//   GET   /api/users         POST /api/users  {display_name, user_id?}
//   POST  /api/cards                          {card_id, user_id}
//   GET   /api/projects      POST /api/projects {title, description, creator}
//   GET   /api/projects/{id}
//   POST  /api/projects/{id}/contributors     {user_id}
//   POST  /api/projects/{id}/members          {capture_ids}
//   GET   /api/projects/{id}/links  PUT /api/projects/{id}/links
//   POST  /api/projects/{id}/links/edges      {from, to}
//   PUT   /api/projects/{id}/links/nodes/{capture}  {class}
//   GET   /api/schemes       POST /api/schemes
//   GET   /api/analytics/{figure}?project=&scheme=&seed=&tz=&mode=&window=&threshold=&format=
//   GET   /api/export?project=                ustar archive
//   POST  /api/import                         ustar archive body
//   GET   /api/verify
//
// Failures answer {"error": code, "message": text, "violations": [...]}.

#include <memory>
#include <string>

#include "protobooth/backend/repository.hpp"
#include "protobooth/error.hpp"

namespace protobooth::backend {

/// HTTP status used for a domain error.
int http_status(ErrorCode code);

class HttpService {
 public:
  explicit HttpService(Repository& repo);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the
  /// bound port. Throws Error(kStorage) when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void serve();
  /// Serves on a background thread. Requires bind().
  void start();
  /// Stops accepting, finishes in-flight requests and joins the thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace protobooth::backend
