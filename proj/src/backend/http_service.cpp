#include "protobooth/backend/http_service.hpp"

#include <httplib.h>

#include <charconv>
#include <thread>

#include <fmt/format.h>

#include "protobooth/analytics/report.hpp"
#include "protobooth/backend/archive.hpp"
#include "protobooth/serialize.hpp"

namespace protobooth::backend {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kUnknownCategory:
    case ErrorCode::kHashMismatch:
    case ErrorCode::kChronology:
      return 422;
    case ErrorCode::kUnknownScheme:
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kStorage:
      return 503;
    case ErrorCode::kBadRequest:
    case ErrorCode::kUnsupportedFormat:
      return 400;
  }
  return 500;
}

namespace {

using httplib::Request;
using httplib::Response;

constexpr const char* kJson = "application/json";

void send_json(Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(Response& res, ErrorCode code, const std::string& message,
                const std::vector<std::string>& violations = {}) {
  send_json(res,
            {{"error", std::string(to_string(code))},
             {"message", message},
             {"violations", violations}},
            http_status(code));
}

Json parse_body(const Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBadRequest, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T field(const Json& body, const char* name) {
  if (!body.is_object() || !body.contains(name))
    throw Error(ErrorCode::kBadRequest, fmt::format("missing field \"{}\"", name));
  try {
    return body.at(name).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kBadRequest, fmt::format("field \"{}\" has the wrong type", name));
  }
}

std::optional<std::string> param(const Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  auto v = req.get_param_value(name);
  if (v.empty()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> int_param(const Request& req, const char* name) {
  auto text = param(req, name);
  if (!text) return std::nullopt;
  Int value{};
  auto [end, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (ec != std::errc() || end != text->data() + text->size())
    throw Error(ErrorCode::kBadRequest, fmt::format("parameter {} is not an integer", name));
  return value;
}

// Captures as listed by the API: the stored record plus the late-bound
// capturer name.
Json capture_summary(const Repository& repo, const CaptureRecord& record) {
  Json j = record;
  j["capturer"] = repo.capturer(record);
  return j;
}

}  // namespace

struct HttpService::Impl {
  explicit Impl(Repository& r) : repo(r) { routes(); }

  Repository& repo;
  httplib::Server server;
  std::thread thread;
  bool bound = false;

  // Runs a handler, translating failures into error responses.
  template <typename Fn>
  auto guarded(Fn fn) {
    return [fn](const Request& req, Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what(), e.violations());
      } catch (const Json::exception& e) {
        send_error(res, ErrorCode::kBadRequest, e.what());
      } catch (const std::exception& e) {
        send_json(res, {{"error", "internal"}, {"message", e.what()}, {"violations", Json::array()}},
                  500);
      }
    };
  }

  const CaptureRecord require_capture(const std::string& id) const {
    auto c = repo.capture(id);
    if (!c) throw Error(ErrorCode::kNotFound, fmt::format("unknown capture {}", id));
    return *c;
  }

  void routes() {
    server.set_payload_max_length(256u << 20);
    // httplib also sets SO_REUSEPORT by default, which would let a second
    // server silently share the port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
                 sizeof(yes));
    });

    server.Post("/api/captures", guarded([this](const Request& req, Response& res) {
      ingest(req, res);
    }));

    server.Get("/api/captures", guarded([this](const Request& req, Response& res) {
      CaptureFilter filter;
      filter.user = param(req, "user");
      filter.booth = param(req, "booth");
      filter.project = param(req, "project");
      filter.from = int_param<Timestamp>(req, "from");
      filter.to = int_param<Timestamp>(req, "to");
      Json out = Json::array();
      for (const auto& c : repo.query_captures(filter)) out.push_back(capture_summary(repo, c));
      send_json(res, out);
    }));

    server.Get(R"(/api/captures/([^/]+))", guarded([this](const Request& req, Response& res) {
      const auto record = require_capture(req.matches[1]);
      Json j = capture_summary(repo, record);
      Json codes = Json::object();
      for (const auto& s : repo.schemes())
        if (auto a = repo.assignment(record.capture_id, s.scheme_id))
          codes[s.scheme_id] = a->categories;
      j["codes"] = codes;
      j["audit"] = repo.audit_log(record.capture_id);
      send_json(res, j);
    }));

    server.Patch(R"(/api/captures/([^/]+))", guarded([this](const Request& req, Response& res) {
      const Json body = parse_body(req);
      if (!body.is_object()) throw Error(ErrorCode::kBadRequest, "expected a JSON object");
      Annotation patch;
      from_json(body, patch);
      send_json(res, repo.annotate(req.matches[1], patch));
    }));

    server.Post(R"(/api/captures/([^/]+)/timestamp)",
                guarded([this](const Request& req, Response& res) {
                  const Json body = parse_body(req);
                  const auto ts = field<Timestamp>(body, "timestamp");
                  const auto note = body.value("note", std::string());
                  send_json(res, repo.correct_timestamp(req.matches[1], ts, note));
                }));

    server.Get(R"(/api/captures/([^/]+)/views/([^/]+))",
               guarded([this](const Request& req, Response& res) {
                 const auto record = require_capture(req.matches[1]);
                 const auto angle = parse_view_angle(req.matches[2].str());
                 if (!angle)
                   throw Error(ErrorCode::kNotFound,
                               fmt::format("unknown view angle {}", req.matches[2].str()));
                 auto bytes = repo.view_bytes(record.capture_id, *angle);
                 if (!bytes) throw Error(ErrorCode::kNotFound, "image blob missing");
                 res.set_content(to_text(*bytes), record.views.at(*angle).media_type);
               }));

    server.Get(R"(/api/captures/([^/]+)/codes/([^/]+))",
               guarded([this](const Request& req, Response& res) {
                 const auto record = require_capture(req.matches[1]);
                 const std::string scheme = req.matches[2];
                 if (!repo.scheme(scheme))
                   throw Error(ErrorCode::kUnknownScheme, fmt::format("unknown scheme {}", scheme));
                 auto a = repo.assignment(record.capture_id, scheme);
                 send_json(res, a ? Json(*a) : Json(CodeAssignment{record.capture_id, scheme, {}}));
               }));

    server.Put(R"(/api/captures/([^/]+)/codes/([^/]+))",
               guarded([this](const Request& req, Response& res) {
                 const Json body = parse_body(req);
                 auto categories = field<std::vector<std::string>>(body, "categories");
                 send_json(res, repo.set_codes(req.matches[1], req.matches[2], categories));
               }));

    server.Get("/api/users", guarded([this](const Request&, Response& res) {
      send_json(res, repo.users());
    }));

    server.Post("/api/users", guarded([this](const Request& req, Response& res) {
      const Json body = parse_body(req);
      std::optional<UserId> id;
      if (body.contains("user_id")) id = field<std::string>(body, "user_id");
      send_json(res, repo.create_user(field<std::string>(body, "display_name"), id), 201);
    }));

    server.Post("/api/cards", guarded([this](const Request& req, Response& res) {
      const Json body = parse_body(req);
      send_json(res, repo.register_card(field<std::string>(body, "card_id"),
                                        field<std::string>(body, "user_id")));
    }));

    server.Get("/api/projects", guarded([this](const Request&, Response& res) {
      send_json(res, repo.projects());
    }));

    server.Post("/api/projects", guarded([this](const Request& req, Response& res) {
      const Json body = parse_body(req);
      std::optional<ProjectId> id;
      if (body.contains("project_id")) id = field<std::string>(body, "project_id");
      send_json(res,
                repo.create_project(field<std::string>(body, "title"),
                                    body.value("description", std::string()),
                                    field<std::string>(body, "creator"), id),
                201);
    }));

    server.Get(R"(/api/projects/([^/]+))", guarded([this](const Request& req, Response& res) {
      auto p = repo.project(req.matches[1]);
      if (!p) throw Error(ErrorCode::kNotFound, fmt::format("unknown project {}", req.matches[1].str()));
      send_json(res, *p);
    }));

    server.Post(R"(/api/projects/([^/]+)/contributors)",
                guarded([this](const Request& req, Response& res) {
                  const Json body = parse_body(req);
                  send_json(res, repo.add_contributor(req.matches[1],
                                                      field<std::string>(body, "user_id")));
                }));

    server.Post(R"(/api/projects/([^/]+)/members)",
                guarded([this](const Request& req, Response& res) {
                  const Json body = parse_body(req);
                  send_json(res, repo.assign_to_project(
                                     req.matches[1],
                                     field<std::vector<std::string>>(body, "capture_ids")));
                }));

    server.Get(R"(/api/projects/([^/]+)/links)",
               guarded([this](const Request& req, Response& res) {
                 if (!repo.project(req.matches[1]))
                   throw Error(ErrorCode::kNotFound,
                               fmt::format("unknown project {}", req.matches[1].str()));
                 send_json(res, repo.links(req.matches[1]));
               }));

    server.Put(R"(/api/projects/([^/]+)/links)",
               guarded([this](const Request& req, Response& res) {
                 LinkGraph graph = parse_body(req).get<LinkGraph>();
                 send_json(res, repo.put_links(req.matches[1], std::move(graph)));
               }));

    server.Post(R"(/api/projects/([^/]+)/links/edges)",
                guarded([this](const Request& req, Response& res) {
                  const Json body = parse_body(req);
                  send_json(res, repo.add_link(req.matches[1], field<std::string>(body, "from"),
                                               field<std::string>(body, "to")));
                }));

    server.Put(R"(/api/projects/([^/]+)/links/nodes/([^/]+))",
               guarded([this](const Request& req, Response& res) {
                 const Json body = parse_body(req);
                 const auto name = field<std::string>(body, "class");
                 auto cls = parse_node_class(name);
                 if (!cls)
                   throw Error(ErrorCode::kBadRequest, fmt::format("unknown node class {}", name));
                 send_json(res, repo.set_node_class(req.matches[1], req.matches[2], *cls));
               }));

    server.Get("/api/schemes", guarded([this](const Request&, Response& res) {
      send_json(res, repo.schemes());
    }));

    server.Post("/api/schemes", guarded([this](const Request& req, Response& res) {
      send_json(res, repo.put_scheme(parse_body(req).get<CodingScheme>()), 201);
    }));

    server.Get(R"(/api/analytics/([^/]+))", guarded([this](const Request& req, Response& res) {
      analytics::FigureRequest fr;
      fr.kind = analytics::parse_figure_kind(req.matches[1].str());
      fr.project = param(req, "project");
      fr.scheme = param(req, "scheme");
      if (auto seed = int_param<std::uint64_t>(req, "seed")) fr.seed = *seed;
      if (auto tz = param(req, "tz")) fr.timezone = *tz;
      if (auto mode = param(req, "mode")) {
        auto m = analytics::parse_cumulative_mode(*mode);
        if (!m) throw Error(ErrorCode::kBadRequest, fmt::format("unknown mode {}", *mode));
        fr.mode = *m;
      }
      if (auto w = int_param<std::int64_t>(req, "window")) fr.window_seconds = *w;
      if (auto t = int_param<int>(req, "threshold")) fr.threshold = *t;
      const auto format = analytics::parse_render_format(param(req, "format").value_or("json"));
      const auto figure = analytics::compute_figure(repo, fr);
      res.set_content(analytics::render(figure, format),
                      std::string(analytics::content_type(format)));
    }));

    server.Get("/api/export", guarded([this](const Request& req, Response& res) {
      const auto archive = export_raw(repo, param(req, "project"));
      const auto name = param(req, "project").value_or("repository");
      res.set_header("Content-Disposition",
                     fmt::format("attachment; filename=\"protobooth-{}.tar\"", name));
      res.set_content(to_text(archive.to_tar()), "application/x-tar");
    }));

    server.Post("/api/import", guarded([this](const Request& req, Response& res) {
      const auto bytes = to_bytes(req.body);
      send_json(res, import_archive(repo, Archive::from_tar(bytes)));
    }));

    server.Get("/api/verify", guarded([this](const Request&, Response& res) {
      send_json(res, repo.verify());
    }));
  }

  void ingest(const Request& req, Response& res) {
    if (!req.is_multipart_form_data())
      throw Error(ErrorCode::kBadRequest, "expected multipart/form-data");
    std::vector<std::string> violations;
    std::map<std::string, int> parts;
    for (const auto& [name, file] : req.files) ++parts[name];
    if (!parts.count("manifest")) throw Error(ErrorCode::kBadRequest, "missing manifest part");

    Json manifest;
    try {
      manifest = Json::parse(req.get_file_value("manifest").content);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kBadRequest, std::string("malformed manifest: ") + e.what());
    }
    CaptureRecord record;
    auto problems = parse_capture_manifest(manifest, record);
    violations.insert(violations.end(), problems.begin(), problems.end());

    ImagePayloads images;
    for (const auto& [name, count] : parts) {
      if (name == "manifest") {
        if (count > 1) violations.push_back("duplicate part: manifest");
        continue;
      }
      auto angle = parse_view_angle(name);
      if (!angle) {
        violations.push_back("unknown part: " + name);
        continue;
      }
      if (count > 1) violations.push_back("duplicate part: " + name);
      images.emplace(*angle, to_bytes(req.get_file_value(name).content));
    }
    if (!violations.empty())
      throw Error(ErrorCode::kValidation, "capture rejected", violations);

    const auto receipt = repo.ingest_capture(record, images);
    send_json(res, receipt, receipt.created ? 201 : 200);
  }
};

HttpService::HttpService(Repository& repo) : impl_(std::make_unique<Impl>(repo)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0)
    throw Error(ErrorCode::kStorage, fmt::format("cannot listen on {}:{}", host, port));
  impl_->bound = true;
  return bound;
}

void HttpService::serve() {
  if (!impl_->bound) throw Error(ErrorCode::kBadRequest, "serve() before bind()");
  impl_->server.listen_after_bind();
}

void HttpService::start() {
  if (!impl_->bound) throw Error(ErrorCode::kBadRequest, "start() before bind()");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace protobooth::backend
