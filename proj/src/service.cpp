#include "gliq/service.hpp"

#include <chrono>

#include <httplib.h>

namespace gliq {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

Service::Service(Program program, EngineOptions opts)
    : program_(std::move(program)), opts_(std::move(opts)), server_(std::make_unique<httplib::Server>()) {
  routes();
  worker_ = std::thread([this] { run_inference(); });
}

Service::~Service() {
  stop();
  if (worker_.joinable()) worker_.join();
}

void Service::run_inference() {
  auto on_sc = [this](const Inference& inf, const SafeConcretization& sc) {
    const auto& part = inf.partitions[sc.partition];
    json choice = json::array();
    for (size_t j = 0; j < sc.choice.size(); ++j) {
      const auto& o = inf.occurrences[part.occurrences[j]];
      const auto& src = inf.program.sources[o.source];
      choice.push_back(json{{"occurrence", o.id}, {"refinement", show(inf.candidates.at(o.source).at(sc.choice[j]), src.binder)}});
    }
    std::lock_guard<std::mutex> lock(mu_);
    events_.push_back(json{{"type", "sc"}, {"partition", sc.partition}, {"index", sc.index}, {"choice", choice}});
    cv_.notify_all();
  };
  std::optional<Inference> inf;
  std::string failure;
  try {
    inf = ginfer(program_, opts_, on_sc);
  } catch (const std::exception& e) {
    failure = e.what();
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (inf) {
    report_ = build_report(*inf, opts_);
    events_.push_back(json{{"type", "done"}, {"verdict", inf->verdict}, {"ok", inf->ok}});
    inf_ = std::move(inf);
  } else {
    failure_ = failure;
    events_.push_back(json{{"type", "done"}, {"verdict", "failed"}, {"ok", false}, {"error", failure}});
  }
  done_ = true;
  cv_.notify_all();
}

void Service::routes() {
  auto& s = *server_;

  s.Get("/", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!done_) {
      res.status = 503;
      res.set_header("Retry-After", "1");
      res.set_content("<!DOCTYPE html><meta http-equiv=\"refresh\" content=\"1\"><p>inference running</p>\n", "text/html");
      return;
    }
    if (!report_) {
      res.status = 500;
      res.set_content("inference failed: " + failure_ + "\n", "text/plain");
      return;
    }
    res.set_content(export_html(*report_, true), "text/html");
  });

  s.Get("/report", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!done_) {
      res.set_header("Retry-After", "1");
      send_json(res, 503, json{{"status", "running"}, {"events", events_.size()}});
    } else if (!report_) {
      send_json(res, 500, json{{"status", "failed"}, {"error", failure_}});
    } else {
      send_json(res, 200, to_json(*report_));
    }
  });

  s.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<size_t>(0);
    res.set_chunked_content_provider("text/event-stream", [this, cursor](size_t, httplib::DataSink& sink) {
      std::vector<json> batch;
      bool finished = false;
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait_for(lock, std::chrono::milliseconds(200), [&] { return events_.size() > *cursor; });
        batch.assign(events_.begin() + static_cast<long>(*cursor), events_.end());
        *cursor = events_.size();
        finished = done_ && *cursor == events_.size();
      }
      for (const auto& e : batch) {
        std::string frame = "event: " + e.at("type").get<std::string>() + "\ndata: " + e.dump() + "\n\n";
        if (!sink.write(frame.data(), frame.size())) return false;
      }
      if (finished) sink.done();
      return true;
    });
  });

  s.Post("/recheck", [this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock<std::mutex> lock(mu_);
    if (!done_) return send_json(res, 503, json{{"status", "running"}});
    if (!inf_) return send_json(res, 500, json{{"status", "failed"}, {"error", failure_}});
    const Inference& inf = *inf_;
    lock.unlock();  // inf_ is immutable once done_

    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return send_json(res, 400, json{{"error", "request body is not JSON"}});
    RecheckRequest rq;
    try {
      rq = parse_recheck(body, inf);
    } catch (const SourceError& e) {
      return send_json(res, 400, json{{"error", e.what()}, {"span", span_json(e.span())}});
    } catch (const std::invalid_argument& e) {
      return send_json(res, 400, json{{"error", e.what()}});
    }
    // Holes left out by the client take the partition's first safe
    // concretization when there is one.
    for (const auto& part : inf.partitions) {
      auto it = inf.scs.find(part.id);
      if (it == inf.scs.end() || it->second.empty()) continue;
      const auto& first = it->second.front();
      for (size_t j = 0; j < part.occurrences.size(); ++j) {
        const auto& o = inf.occurrences[part.occurrences[j]];
        if (rq.by_occurrence.count(o.id) || rq.by_source.count(o.source)) continue;
        rq.by_occurrence[o.id] = inf.candidates.at(o.source).at(first.choice[j]);
      }
    }
    try {
      EngineOptions opts = opts_;
      send_json(res, 200, recheck_json(recheck(inf, rq.by_source, rq.by_occurrence, opts)));
    } catch (const std::invalid_argument& e) {
      send_json(res, 400, json{{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, json{{"error", e.what()}});
    }
  });
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::stop() {
  if (server_) server_->stop();
  if (listener_.joinable()) listener_.join();
}

void Service::wait_done() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return done_; });
}

bool Service::done() {
  std::lock_guard<std::mutex> lock(mu_);
  return done_;
}

std::vector<json> Service::events_snapshot() {
  std::lock_guard<std::mutex> lock(mu_);
  return events_;
}

}  // namespace gliq
