#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gliq/gradual.hpp"
#include "gliq/report.hpp"

namespace httplib {
class Server;
}

namespace gliq {

// Runs one inference in the background and serves its report.
//   GET  /          live explorer page (once done)
//   GET  /report    200 with the report, 503 {"status":"running"} before
//   GET  /events    server-sent events: one `sc` per safe concretization, then `done`
//   POST /recheck   {"sources": {...}, "occurrences": {...}} -> {"ok", "errors"}
class Service {
 public:
  Service(Program program, EngineOptions opts);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on the calling thread until stop(). port 0 picks one.
  bool listen(const std::string& host, int port);
  // Binds, then serves on a background thread. Returns the port or -1.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  void wait_done();
  bool done();
  std::vector<nlohmann::json> events_snapshot();

 private:
  void run_inference();
  void routes();

  Program program_;
  EngineOptions opts_;
  std::unique_ptr<httplib::Server> server_;
  std::thread worker_, listener_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<nlohmann::json> events_;
  bool done_ = false;
  std::optional<Inference> inf_;
  std::optional<ReportDocument> report_;
  std::string failure_;
};

}  // namespace gliq
