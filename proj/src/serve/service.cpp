#include "egat/service.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace egat::serve {

namespace {

using nlohmann::json;

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"error", code}, {"message", message}});
}

// HTTP status for a failed C API call on user input.
int http_status(egat_status s) {
  switch (s) {
    case EGAT_ERR_NO_SELECTED_CHAIN: return 422;
    case EGAT_ERR_NON_FINITE:
    case EGAT_ERR_CONFIG_HASH_MISMATCH:
    case EGAT_ERR_DIMENSION_MISMATCH:
    case EGAT_ERR_SHAPE_MISMATCH:
    case EGAT_ERR_INTERNAL: return 500;
    default: return 400;
  }
}

HttpResponse status_response(egat_status s) {
  const int code = http_status(s);
  if (code >= 500) std::cerr << "predserve: " << egat_status_name(s) << ": " << egat_last_error() << "\n";
  return error_response(code, egat_status_name(s), egat_last_error());
}

struct StructureHandle {
  egat_structure* ptr = nullptr;
  ~StructureHandle() { egat_structure_free(ptr); }
};
struct PredictionHandle {
  egat_prediction* ptr = nullptr;
  ~PredictionHandle() { egat_prediction_free(ptr); }
};

// Lower-case PDB id from the HEADER record, or "upload".
std::string header_id(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("HEADER", 0) != 0) continue;
    if (line.size() < 66) break;
    std::string id;
    for (char c : line.substr(62, 4))
      if (std::isalnum(static_cast<unsigned char>(c))) id.push_back(static_cast<char>(std::tolower(c)));
    if (!id.empty()) return id;
    break;
  }
  return "upload";
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return {};
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::optional<HttpResponse> check_body(const std::string& body, std::size_t limit) {
  if (body.size() > limit)
    return error_response(413, "payload_too_large",
                          "upload exceeds " + std::to_string(limit) + " bytes");
  if (body.empty()) return error_response(400, "empty_body", "request body must contain PDB text");
  return std::nullopt;
}

}  // namespace

const char* job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "unknown";
}

ServiceConfig config_from_env(ServiceConfig base, int* port) {
  const auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (port) {
    *port = 5000;
    if (auto v = env("PORT")) {
      const auto p = parse_double(*v);
      if (!p || *p < 1 || *p > 65535 || *p != static_cast<int>(*p)) throw std::invalid_argument("PORT: " + *v);
      *port = static_cast<int>(*p);
    }
  }
  if (auto v = env("CHECKPOINT_PATH")) base.checkpoint_path = *v;
  if (auto v = env("MAX_UPLOAD_BYTES")) {
    const auto b = parse_double(*v);
    if (!b || *b < 1) throw std::invalid_argument("MAX_UPLOAD_BYTES: " + *v);
    base.max_upload_bytes = static_cast<std::size_t>(*b);
  }
  if (auto v = env("ARTIFACT_TTL_HOURS")) {
    const auto h = parse_double(*v);
    if (!h || *h < 0) throw std::invalid_argument("ARTIFACT_TTL_HOURS: " + *v);
    base.artifact_ttl_hours = *h;
  }
  return base;
}

PredictionService::PredictionService(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)), id_rng_(std::random_device{}()) {
  if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
  if (egat_model_load(config_.checkpoint_path.c_str(), &model_) != EGAT_OK)
    throw std::runtime_error("cannot load checkpoint " + config_.checkpoint_path + ": " + egat_last_error());
}

PredictionService::~PredictionService() { egat_model_free(model_); }

std::string PredictionService::checkpoint_id() const { return egat_model_id(model_); }

HttpResponse PredictionService::chains(const std::string& body) const {
  if (auto bad = check_body(body, config_.max_upload_bytes)) return *bad;
  StructureHandle s;
  const egat_status st = egat_structure_parse(body.data(), body.size(), "upload", &s.ptr);
  if (st != EGAT_OK) return error_response(400, egat_status_name(st), egat_last_error());
  json chains = json::array();
  for (std::size_t i = 0; i < egat_structure_chain_count(s.ptr); ++i) {
    char id = ' ';
    std::size_t residues = 0;
    const char* kind = "";
    egat_structure_chain(s.ptr, i, &id, &residues, &kind);
    chains.push_back({{"id", std::string(1, id)}, {"residues", residues}, {"kind", kind}});
  }
  return json_response(200, {{"chains", chains}});
}

HttpResponse PredictionService::predict(const std::string& body, const std::string& chains,
                                        const std::optional<std::string>& threshold_text) {
  purge_expired();
  if (auto bad = check_body(body, config_.max_upload_bytes)) return *bad;
  double threshold = 0.5;
  if (threshold_text) {
    const auto t = parse_double(*threshold_text);
    if (!t || !(*t >= 0.0 && *t <= 1.0))
      return error_response(400, "invalid_threshold", "threshold must be a number in [0,1]");
    threshold = *t;
  }

  StructureHandle s;
  const std::string id = header_id(body);
  egat_status st = egat_structure_parse(body.data(), body.size(), id.c_str(), &s.ptr);
  if (st != EGAT_OK) return error_response(400, egat_status_name(st), egat_last_error());

  std::size_t residues = 0;
  st = egat_structure_subunit_residues(s.ptr, chains.c_str(), &residues);
  if (st != EGAT_OK) return status_response(st);
  if (residues > config_.max_residues)
    return error_response(413, "too_many_residues",
                          "selected chains have " + std::to_string(residues) + " residues; the limit is " +
                              std::to_string(config_.max_residues));

  PredictionHandle p;
  st = egat_predict(model_, s.ptr, chains.c_str(), &p.ptr);
  if (st != EGAT_OK) return status_response(st);

  Job job;
  job.structure_id = egat_prediction_structure_id(p.ptr);
  json classes = json::object();
  for (int c = 0; c < EGAT_NUM_CLASSES; ++c) {
    char* pdb = nullptr;
    if ((st = egat_prediction_bfactor_pdb(p.ptr, c, &pdb)) != EGAT_OK) return status_response(st);
    job.artifacts[egat_class_name(c)] = pdb;
    egat_free_string(pdb);
    std::size_t sites = 0;
    egat_prediction_site_count(p.ptr, c, threshold, &sites);
    classes[egat_class_name(c)] = {{"n_sites", sites}};
  }

  json rows = json::array();
  for (std::size_t i = 0; i < egat_prediction_residue_count(p.ptr); ++i) {
    char chain = ' ', icode = ' ';
    int resid = 0;
    const char* name = "";
    double probs[EGAT_NUM_CLASSES];
    egat_prediction_residue(p.ptr, i, &chain, &resid, &icode, &name, probs);
    json pr = json::object();
    for (int c = 0; c < EGAT_NUM_CLASSES; ++c) pr[egat_class_name(c)] = probs[c];
    rows.push_back({{"chain", std::string(1, chain)},
                    {"residue_id", resid},
                    {"insertion_code", icode == ' ' ? std::string() : std::string(1, icode)},
                    {"residue_name", name},
                    {"probs", pr}});
  }

  job.status = JobStatus::Done;
  job.created = clock_();
  {
    std::lock_guard lock(mutex_);
    job.id = new_job_id();
    jobs_[job.id] = job;
  }
  json summary = {{"structure_id", job.structure_id},
                  {"threshold", threshold},
                  {"checkpoint_id", checkpoint_id()},
                  {"residue_count", rows.size()},
                  {"classes", classes}};
  return json_response(200, {{"job_id", job.id}, {"summary", summary}, {"residues", rows}});
}

HttpResponse PredictionService::download(const std::string& job_id, const std::string& class_key) {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) {
    if (expired_ids_.count(job_id)) return error_response(410, "expired", "artifacts for this job have expired");
    return error_response(404, "unknown_job", "no job " + job_id);
  }
  if (expired(it->second, now)) {
    expired_ids_.insert(job_id);
    jobs_.erase(it);
    return error_response(410, "expired", "artifacts for this job have expired");
  }
  const auto art = it->second.artifacts.find(class_key);
  if (art == it->second.artifacts.end()) return error_response(404, "unknown_class", "no class " + class_key);
  HttpResponse r;
  r.content_type = "chemical/x-pdb";
  r.body = art->second;
  r.headers.emplace_back("Content-Disposition",
                         "attachment; filename=\"" + it->second.structure_id + "_" + class_key + ".pdb\"");
  return r;
}

HttpResponse PredictionService::example() const {
  const std::string text = read_file(config_.example_path);
  if (text.empty()) return error_response(500, "example_missing", "example structure is not available");
  HttpResponse r;
  r.content_type = "text/plain";
  r.body = text;
  return r;
}

bool PredictionService::expired(const Job& j, std::chrono::system_clock::time_point now) const {
  const auto ttl = std::chrono::duration<double, std::ratio<3600>>(config_.artifact_ttl_hours);
  return now - j.created >= std::chrono::duration_cast<std::chrono::system_clock::duration>(ttl);
}

std::size_t PredictionService::purge_expired() {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (auto it = jobs_.begin(); it != jobs_.end();) {
    if (expired(it->second, now)) {
      expired_ids_.insert(it->first);
      it = jobs_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

std::size_t PredictionService::job_count() const {
  std::lock_guard lock(mutex_);
  return jobs_.size();
}

std::optional<Job> PredictionService::job(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::string PredictionService::new_job_id() {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id_rng_()),
                static_cast<unsigned long long>(id_rng_()));
  return buf;
}

}  // namespace egat::serve
