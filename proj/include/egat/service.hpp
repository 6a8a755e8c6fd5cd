#pragma once

// Transport-independent prediction service behind the HTTP endpoints. It
// reaches the engine only through the C API so that it exercises the same
// surface as external clients.

#include "egat/egat.h"

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace egat::serve {

struct ServiceConfig {
  std::string checkpoint_path;
  std::string example_path;
  std::size_t max_upload_bytes = 20u << 20;
  double artifact_ttl_hours = 24.0;
  std::size_t max_residues = 2000;
};

// Reads PORT, CHECKPOINT_PATH, MAX_UPLOAD_BYTES and ARTIFACT_TTL_HOURS on top
// of `base`. Throws std::invalid_argument on malformed values.
ServiceConfig config_from_env(ServiceConfig base, int* port);

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

enum class JobStatus { Queued, Running, Done, Failed };
const char* job_status_name(JobStatus s);

struct Job {
  std::string id;
  std::string structure_id;
  JobStatus status = JobStatus::Queued;
  std::chrono::system_clock::time_point created;
  std::map<std::string, std::string> artifacts;  // class key -> B-factor PDB
  std::string error;
};

class PredictionService {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  // Loads the checkpoint; throws std::runtime_error when it cannot be used.
  explicit PredictionService(ServiceConfig config, Clock clock = {});
  ~PredictionService();
  PredictionService(const PredictionService&) = delete;
  PredictionService& operator=(const PredictionService&) = delete;

  HttpResponse chains(const std::string& body) const;
  // `threshold` is the raw query value, if given.
  HttpResponse predict(const std::string& body, const std::string& chains,
                       const std::optional<std::string>& threshold);
  HttpResponse download(const std::string& job_id, const std::string& class_key);
  HttpResponse example() const;

  // Drops jobs older than the TTL; later downloads of them answer 410.
  std::size_t purge_expired();
  std::size_t job_count() const;
  std::optional<Job> job(const std::string& id) const;
  const ServiceConfig& config() const { return config_; }
  std::string checkpoint_id() const;

 private:
  bool expired(const Job& j, std::chrono::system_clock::time_point now) const;
  std::string new_job_id();

  ServiceConfig config_;
  Clock clock_;
  egat_model* model_ = nullptr;
  mutable std::mutex mutex_;
  std::map<std::string, Job> jobs_;
  std::set<std::string> expired_ids_;
  std::mt19937_64 id_rng_;
};

}  // namespace egat::serve
