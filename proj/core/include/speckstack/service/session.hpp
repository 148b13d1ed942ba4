#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "speckstack/image.hpp"
#include "speckstack/pipeline.hpp"
#include "speckstack/roi.hpp"
#include "speckstack/stack_filter.hpp"

namespace speckstack::service {

enum class JobState { Idle, Running, Done, Failed };
std::string to_string(JobState state);

struct JobStatus {
    JobState state = JobState::Idle;
    std::string kind;   // "train" or "apply"
    int target = 0;     // requested iteration count for apply
    int completed = 0;  // iterations finished so far
    std::string error;
};

/// One uploaded image and everything derived from it. Data members are
/// guarded by `mutex`; the job slot has its own lock so that status polls
/// never wait on a running computation.
struct Session {
    std::string id;
    FloatImage original;
    Quantized observed;
    RoiSet rois;  // ideals resolved on observed.image
    std::optional<PositiveBooleanFunction> filter;
    std::uint64_t generation = 0;  // bumped whenever the filter or ROIs change
    std::map<int, QuantizedImage> iterates;  // k -> filter applied k times
    std::optional<QuantizedImage> ideal;
    std::optional<LabelMap> classification;

    mutable std::shared_mutex mutex;

    /// Claims the session's single job slot. False when a job is running.
    bool try_begin_job(const std::string& kind, int target);
    void progress(int completed);
    void end_job(std::optional<std::string> error = std::nullopt);
    JobStatus job() const;

    /// Largest cached iteration count <= k, or 0 for the observed image.
    int cached_prefix(int k) const;
    const QuantizedImage& iterate(int k) const;

  private:
    mutable std::mutex job_mutex_;
    JobStatus job_;
};

class SessionStore {
  public:
    std::shared_ptr<Session> create(Observed observed);
    std::shared_ptr<Session> find(const std::string& id) const;
    void insert(std::shared_ptr<Session> session);
    bool erase(const std::string& id);
    std::vector<std::string> ids() const;

  private:
    std::string next_id();

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_ = 0;
};

/// Writes <dir>/<id>/ with original.f64, observed.pgm, quantizer.json and,
/// when present, rois.json, filter.pbf and ideal.pgm. Caller holds at least
/// a shared lock.
void save_session(const Session& session, const std::filesystem::path& dir);

/// Reads a directory written by save_session. Iterates are recomputed on
/// demand, not stored.
std::shared_ptr<Session> load_session(const std::filesystem::path& session_dir);

}  // namespace speckstack::service
