// protobooth — single entry point for the capture system.
//
//   protobooth serve    [--bind HOST:PORT]
//   protobooth node     --simulate --swipes FILE [--server URL] [--booth ID]
//   protobooth node     --flush [--server URL]
//   protobooth swipe    --card ID [--server URL]
//   protobooth fixture  [--seed N] [--bulk]
//   protobooth analyze  FIGURE [--project P] [--scheme S] [--seed N] [--format F] [-o FILE]
//   protobooth export   -o PATH [--project P]
//   protobooth import   PATH
//   protobooth verify
//
// Settings come from flags, then PROTOBOOTH_DATA_DIR / PROTOBOOTH_BIND /
// PROTOBOOTH_CONFIG, then the key-value config file, then defaults. Reports
// are JSON on stdout; failures are JSON on stderr with a nonzero exit code.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <fmt/format.h>

#include "protobooth/analytics/fixture.hpp"
#include "protobooth/analytics/report.hpp"
#include "protobooth/backend/archive.hpp"
#include "protobooth/backend/http_service.hpp"
#include "protobooth/config.hpp"
#include "protobooth/error.hpp"
#include "protobooth/hash.hpp"
#include "protobooth/node/capture_node.hpp"
#include "protobooth/node/spool.hpp"
#include "protobooth/node/uplink.hpp"
#include "protobooth/serialize.hpp"

namespace fs = std::filesystem;
using namespace protobooth;

namespace {

constexpr int kExitFailure = 2;
constexpr int kExitViolations = 1;

struct Settings {
  std::string config_path;
  std::string data_dir;
  std::string bind;
  KeyValueConfig file;

  // flag > environment > config file > default
  std::string resolve(const std::string& flag, const char* env, const char* key,
                      const std::string& fallback) const {
    if (!flag.empty()) return flag;
    if (env)
      if (const char* v = std::getenv(env); v && *v) return v;
    return file.get_or(key, fallback);
  }

  std::string data() const {
    return resolve(data_dir, "PROTOBOOTH_DATA_DIR", "data_dir", "protobooth-data");
  }
  std::string bind_address() const {
    return resolve(bind, "PROTOBOOTH_BIND", "bind", "127.0.0.1:8080");
  }
};

void print(const Json& j) { std::cout << j.dump(2) << std::endl; }

std::unique_ptr<backend::Repository> open_repository(const Settings& s) {
  return backend::Repository::open(s.data());
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::kBadRequest, fmt::format("bind address {} lacks a port", bind));
  try {
    std::size_t used = 0;
    int port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("");
    return {bind.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kBadRequest, fmt::format("bad port in bind address {}", bind));
  }
}

// ---- serve ----------------------------------------------------------------

int cmd_serve(const Settings& s) {
  // Block the shutdown signals before any thread starts so only the waiter
  // below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto repo = open_repository(s);
  backend::HttpService service(*repo);
  const auto [host, requested] = split_bind(s.bind_address());
  const int port = service.bind(host, requested);
  print({{"listening", fmt::format("http://{}:{}", host, port)},
         {"data_dir", s.data()},
         {"captures", repo->capture_count()}});

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.serve();
  // serve() also returns if the listener fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  print({{"stopped", true}, {"captures", repo->capture_count()}});
  return 0;
}

// ---- node / swipe -------------------------------------------------------------

struct NodeFlags {
  bool simulate = false;
  bool flush_only = false;
  std::string swipes;
  std::string server;
  std::string booth;
  std::string spool;
  long long frame_latency_ms = -1;
  long long notify_interval_ms = -1;
  long long epoch_ms = -1;
  std::string card;
};

struct NodeSetup {
  std::string server;
  node::NodeOptions options;
  node::MockRigOptions rig;
  fs::path spool_dir;
};

NodeSetup node_setup(const Settings& s, const NodeFlags& f) {
  NodeSetup n;
  n.server = s.resolve(f.server, "PROTOBOOTH_SERVER", "server", "");
  if (n.server.empty()) n.server = "http://" + s.bind_address();
  n.options.booth_id = s.resolve(f.booth, nullptr, "booth_id", "booth-1");
  if (!is_safe_id(n.options.booth_id))
    throw Error(ErrorCode::kBadRequest, fmt::format("unsafe booth id {}", n.options.booth_id));
  n.options.notify_interval = std::chrono::milliseconds(
      f.notify_interval_ms >= 0 ? f.notify_interval_ms
                                : s.file.get_int_or("notify_interval_ms", 3000));
  n.rig.frame_latency = std::chrono::milliseconds(
      f.frame_latency_ms >= 0 ? f.frame_latency_ms : s.file.get_int_or("frame_latency_ms", 1200));
  n.spool_dir = s.resolve(f.spool, "PROTOBOOTH_SPOOL", "spool_dir",
                          fmt::format("spool-{}", n.options.booth_id));
  return n;
}

Json delivery_json(const node::DeliveryReport& d) {
  return {{"delivered", d.delivered},
          {"deferred", d.deferred},
          {"rejected", d.rejected},
          {"receipts", d.receipts},
          {"errors", d.errors}};
}

Json outcome_json(const node::SwipeOutcome& o) {
  static constexpr const char* kKinds[] = {"captured", "ignored", "fault"};
  Json j = {{"outcome", kKinds[static_cast<int>(o.kind)]}, {"detail", o.detail}};
  if (o.record) j["capture_id"] = o.record->capture_id;
  if (o.session) j["duration_s"] = node::capture_duration(*o.session);
  return j;
}

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

int cmd_node(const Settings& s, const NodeFlags& f) {
  const auto setup = node_setup(s, f);
  node::DirectorySpool spool(setup.spool_dir);
  node::HttpUplink uplink(setup.server);

  if (f.flush_only) {
    node::SystemClock clock;
    auto report = node::flush_spool(spool, uplink, clock, {.ignore_schedule = true});
    print({{"flushed", delivery_json(report)}, {"spooled", spool.size()}});
    return 0;
  }
  if (!f.simulate)
    throw Error(ErrorCode::kBadRequest,
                "no hardware rig adapter is built in; run with --simulate");
  std::ifstream in(f.swipes);
  if (!in) throw Error(ErrorCode::kNotFound, fmt::format("cannot read swipe script {}", f.swipes));
  const auto script = node::parse_swipe_script(in);

  const std::int64_t epoch = f.epoch_ms >= 0 ? f.epoch_ms : wall_ms();
  node::SimulatedClock clock(epoch);
  node::MockRig rig(clock, setup.rig);
  node::CaptureNode booth(setup.options, rig, spool, clock);
  auto report = node::run_script(booth, clock, script, epoch, &uplink);

  Json outcomes = Json::array();
  for (const auto& o : report.outcomes) outcomes.push_back(outcome_json(o));
  print({{"booth_id", setup.options.booth_id},
         {"server", setup.server},
         {"captured", report.captured},
         {"ignored", report.ignored},
         {"faults", report.faults},
         {"outcomes", outcomes},
         {"delivery", delivery_json(report.delivery)},
         {"spooled", spool.size()}});
  return 0;
}

int cmd_swipe(const Settings& s, const NodeFlags& f) {
  const auto setup = node_setup(s, f);
  node::DirectorySpool spool(setup.spool_dir);
  node::HttpUplink uplink(setup.server);
  node::SimulatedClock clock(f.epoch_ms >= 0 ? f.epoch_ms : wall_ms());
  node::MockRig rig(clock, setup.rig);
  node::CaptureNode booth(setup.options, rig, spool, clock);
  auto outcome = booth.swipe(f.card);
  auto delivery = booth.flush(uplink, {.ignore_schedule = true});
  Json j = outcome_json(outcome);
  j["delivery"] = delivery_json(delivery);
  j["spooled"] = spool.size();
  print(j);
  return outcome.kind == node::SwipeOutcome::Kind::Fault ? kExitFailure : 0;
}

// ---- fixture / analyze ----------------------------------------------------------

int cmd_fixture(const Settings& s, std::uint64_t seed, bool bulk) {
  const auto start = std::chrono::steady_clock::now();
  auto repo = open_repository(s);
  auto fx = analytics::synthesize_case_fixture(seed, {.inject_bulk = bulk});
  auto loaded = analytics::load_fixture(*repo, fx);
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  print({{"data_dir", s.data()},
         {"seed", seed},
         {"captures", loaded.captures},
         {"prototypes", fx.captures.size()},
         {"bulk_captures", fx.bulk_captures.size()},
         {"user_id", loaded.user_id},
         {"project_id", loaded.project_id},
         {"elapsed_s", elapsed.count()}});
  return 0;
}

struct AnalyzeFlags {
  std::string figure;
  std::string project;
  std::string scheme;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string format = "json";
  std::string tz;
  std::string mode = "distinct";
  std::int64_t window = analytics::kDefaultBulkWindow;
  int threshold = analytics::kDefaultBulkThreshold;
  std::string output = "-";
};

int cmd_analyze(const Settings& s, const AnalyzeFlags& f) {
  analytics::FigureRequest req;
  req.kind = analytics::parse_figure_kind(f.figure);
  if (!f.project.empty()) req.project = f.project;
  if (!f.scheme.empty()) req.scheme = f.scheme;
  req.seed = f.seed_given ? f.seed : static_cast<std::uint64_t>(s.file.get_int_or("seed", 1));
  req.timezone = s.resolve(f.tz, nullptr, "timezone", "UTC");
  auto mode = analytics::parse_cumulative_mode(f.mode);
  if (!mode) throw Error(ErrorCode::kBadRequest, fmt::format("unknown mode {}", f.mode));
  req.mode = *mode;
  req.window_seconds = f.window;
  req.threshold = f.threshold;
  const auto format = analytics::parse_render_format(f.format);

  if (!fs::exists(fs::path(s.data()) / "docs"))
    throw Error(ErrorCode::kNotFound, fmt::format("no repository at {}", s.data()));
  auto repo = open_repository(s);
  // With a single project there is only one graph to draw.
  if (req.kind == analytics::FigureKind::Graph && !req.project) {
    const auto projects = repo->projects();
    if (projects.size() == 1) req.project = projects.front().project_id;
  }
  const auto bytes = analytics::render(analytics::compute_figure(*repo, req), format);
  if (f.output == "-") {
    std::cout << bytes << std::flush;
  } else {
    std::ofstream out(f.output, std::ios::binary);
    if (!(out << bytes))
      throw Error(ErrorCode::kStorage, fmt::format("cannot write {}", f.output));
    std::cerr << Json{{"figure", f.figure}, {"output", f.output}, {"bytes", bytes.size()}}.dump()
              << std::endl;
  }
  return 0;
}

// ---- export / import / verify -----------------------------------------------

int cmd_export(const Settings& s, const std::string& output, const std::string& project,
               bool tar) {
  auto repo = open_repository(s);
  std::optional<ProjectId> pid;
  if (!project.empty()) pid = project;
  const auto archive = backend::export_raw(*repo, pid);
  const bool as_tar = tar || fs::path(output).extension() == ".tar";
  if (as_tar) {
    const auto bytes = archive.to_tar();
    std::ofstream out(output, std::ios::binary);
    if (!out.write(reinterpret_cast<const char*>(bytes.data()),
                   static_cast<std::streamsize>(bytes.size())))
      throw Error(ErrorCode::kStorage, fmt::format("cannot write {}", output));
  } else {
    if (fs::exists(output) && !fs::is_empty(output))
      throw Error(ErrorCode::kConflict, fmt::format("{} exists and is not empty", output));
    archive.write_directory(output);
  }
  const auto manifest = Json::parse(to_text(archive.files.at("manifest.json")));
  print({{"output", output},
         {"layout", as_tar ? "tar" : "directory"},
         {"files", archive.files.size()},
         {"captures", manifest.at("captures").size()}});
  return 0;
}

int cmd_import(const Settings& s, const std::string& input) {
  if (!fs::exists(input)) throw Error(ErrorCode::kNotFound, fmt::format("no archive at {}", input));
  auto repo = open_repository(s);
  const auto report = backend::import_archive(*repo, backend::Archive::load(input));
  print(report);
  return 0;
}

int cmd_verify(const Settings& s) {
  if (!fs::exists(fs::path(s.data()) / "docs"))
    throw Error(ErrorCode::kNotFound, fmt::format("no repository at {}", s.data()));
  auto repo = open_repository(s);
  const auto report = repo->verify();
  print(report);
  return report.ok() ? 0 : kExitViolations;
}

void print_error(const std::string& code, const std::string& message,
                 const std::vector<std::string>& violations = {}) {
  std::cerr << Json{{"error", code}, {"message", message}, {"violations", violations}}.dump(2)
            << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prototype capture booth, backend and analytics"};
  app.require_subcommand(1);
  Settings settings;
  app.add_option("--config", settings.config_path, "key = value settings file")
      ->envname("PROTOBOOTH_CONFIG");
  app.add_option("--data-dir", settings.data_dir, "repository directory")
      ->envname("PROTOBOOTH_DATA_DIR");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--bind", settings.bind, "HOST:PORT (port 0 picks a free one)")
      ->envname("PROTOBOOTH_BIND");

  NodeFlags nf;
  auto add_node_flags = [&](CLI::App* cmd) {
    cmd->add_option("--server", nf.server, "backend base URL");
    cmd->add_option("--booth", nf.booth, "booth id");
    cmd->add_option("--spool", nf.spool, "spool directory");
    cmd->add_option("--frame-latency-ms", nf.frame_latency_ms, "mock rig latency per frame");
    cmd->add_option("--notify-interval-ms", nf.notify_interval_ms, "completion LED blink time");
    cmd->add_option("--epoch-ms", nf.epoch_ms, "simulated clock start (default: now)");
  };
  auto* node_cmd = app.add_subcommand("node", "Run a booth against the mock rig");
  node_cmd->add_flag("--simulate", nf.simulate, "use the mock camera rig");
  node_cmd->add_option("--swipes", nf.swipes, "swipe script: `<offset_seconds> <card>` lines");
  node_cmd->add_flag("--flush", nf.flush_only, "only retry delivery of spooled captures");
  add_node_flags(node_cmd);
  node_cmd->callback([&] {
    if (!nf.flush_only && nf.swipes.empty())
      throw CLI::ValidationError("--swipes", "required unless --flush");
  });

  auto* swipe = app.add_subcommand("swipe", "One capture on the mock rig, then deliver");
  swipe->add_option("--card", nf.card, "card id")->required();
  add_node_flags(swipe);

  std::uint64_t fixture_seed = 42;
  bool fixture_bulk = false;
  auto* fixture = app.add_subcommand("fixture", "Load the synthetic 82-prototype case project");
  fixture->add_option("--seed", fixture_seed, "fixture seed")->capture_default_str();
  fixture->add_flag("--bulk", fixture_bulk, "add a 25-capture bulk session by a second card");

  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "Compute and render a figure");
  analyze->add_option("figure", af.figure, "fig3 | fig4 | fig5 | matrix | graph | bulk")
      ->required();
  analyze->add_option("--project", af.project, "restrict to a project's captures");
  analyze->add_option("--scheme", af.scheme, "coding scheme id");
  analyze->add_option("--seed", af.seed, "jitter seed")->each([&](const std::string&) {
    af.seed_given = true;
  });
  analyze->add_option("--format", af.format, "svg | csv | json")->capture_default_str();
  analyze->add_option("--tz", af.tz, "time zone for fig3 (UTC, POSIX rule or IANA name)");
  analyze->add_option("--mode", af.mode, "fig5: distinct | summed")->capture_default_str();
  analyze->add_option("--window", af.window, "bulk: max gap in seconds")->capture_default_str();
  analyze->add_option("--threshold", af.threshold, "bulk: sessions need more captures than this")
      ->capture_default_str();
  analyze->add_option("-o,--output", af.output, "output file, - for stdout")
      ->capture_default_str();

  std::string export_out, export_project;
  bool export_tar = false;
  auto* exp = app.add_subcommand("export", "Write the raw-data archive");
  exp->add_option("-o,--output", export_out, "directory, or .tar file")->required();
  exp->add_option("--project", export_project, "only this project");
  exp->add_flag("--tar", export_tar, "write a tar file whatever the extension");

  std::string import_in;
  auto* imp = app.add_subcommand("import", "Merge an archive into the repository");
  imp->add_option("archive", import_in, "archive directory or tar file")->required();

  auto* verify = app.add_subcommand("verify", "Integrity scan; exit 1 on violations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!settings.config_path.empty()) settings.file = KeyValueConfig::load(settings.config_path);
    if (*serve) return cmd_serve(settings);
    if (*node_cmd) return cmd_node(settings, nf);
    if (*swipe) return cmd_swipe(settings, nf);
    if (*fixture) return cmd_fixture(settings, fixture_seed, fixture_bulk);
    if (*analyze) return cmd_analyze(settings, af);
    if (*exp) return cmd_export(settings, export_out, export_project, export_tar);
    if (*imp) return cmd_import(settings, import_in);
    if (*verify) return cmd_verify(settings);
  } catch (const Error& e) {
    print_error(std::string(to_string(e.code())), e.what(), e.violations());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
