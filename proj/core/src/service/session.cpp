#include "speckstack/service/session.hpp"

#include <cstdio>
#include <random>

#include <json.hpp>

#include "speckstack/error.hpp"
#include "speckstack/io.hpp"
#include "speckstack/rng.hpp"

namespace speckstack::service {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(JobState state)
{
    switch (state) {
    case JobState::Idle:
        return "idle";
    case JobState::Running:
        return "running";
    case JobState::Done:
        return "done";
    case JobState::Failed:
        return "failed";
    }
    return "idle";
}

bool Session::try_begin_job(const std::string& kind, int target)
{
    std::lock_guard lock(job_mutex_);
    if (job_.state == JobState::Running)
        return false;
    job_ = JobStatus{JobState::Running, kind, target, 0, {}};
    return true;
}

void Session::progress(int completed)
{
    std::lock_guard lock(job_mutex_);
    job_.completed = completed;
}

void Session::end_job(std::optional<std::string> error)
{
    std::lock_guard lock(job_mutex_);
    job_.state = error ? JobState::Failed : JobState::Done;
    job_.error = error.value_or("");
}

JobStatus Session::job() const
{
    std::lock_guard lock(job_mutex_);
    return job_;
}

int Session::cached_prefix(int k) const
{
    auto it = iterates.upper_bound(k);
    if (it == iterates.begin())
        return 0;
    return std::prev(it)->first;
}

const QuantizedImage& Session::iterate(int k) const
{
    if (k == 0)
        return observed.image;
    return iterates.at(k);
}

std::string SessionStore::next_id()
{
    if (salt_ == 0)
        salt_ = (std::uint64_t{std::random_device{}()} << 32) | std::random_device{}();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(derive_seed(salt_, counter_++)));
    return buf;
}

std::shared_ptr<Session> SessionStore::create(Observed observed)
{
    auto session = std::make_shared<Session>();
    session->original = std::move(observed.original);
    session->observed = std::move(observed.quantized);
    std::lock_guard lock(mutex_);
    do {
        session->id = next_id();
    } while (sessions_.contains(session->id));
    sessions_.emplace(session->id, session);
    return session;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void SessionStore::insert(std::shared_ptr<Session> session)
{
    std::lock_guard lock(mutex_);
    sessions_[session->id] = std::move(session);
}

bool SessionStore::erase(const std::string& id)
{
    std::lock_guard lock(mutex_);
    return sessions_.erase(id) > 0;
}

std::vector<std::string> SessionStore::ids() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_)
        out.push_back(id);
    return out;
}

void save_session(const Session& session, const fs::path& dir)
{
    const fs::path root = dir / session.id;
    fs::create_directories(root);
    write_file(root / "original.f64", encode_f64(session.original));
    write_file(root / "observed.pgm", encode_pgm(session.observed.image));
    const auto& spec = session.observed.spec;
    json quantizer{{"levels", spec.levels},
                   {"clip_percentile", spec.clip_percentile},
                   {"lo", spec.lo ? json(*spec.lo) : json(nullptr)},
                   {"hi", spec.hi ? json(*spec.hi) : json(nullptr)}};
    if (session.observed.warning)
        quantizer["warning"] = *session.observed.warning;
    write_file(root / "quantizer.json", quantizer.dump(2));

    auto sync = [&](const char* name, bool present, const auto& make) {
        if (present)
            write_file(root / name, make());
        else
            fs::remove(root / name);
    };
    sync("rois.json", !session.rois.regions.empty(), [&] { return to_json(session.rois); });
    sync("filter.pbf", session.filter.has_value(), [&] { return to_text(*session.filter); });
    sync("ideal.pgm", session.ideal.has_value(), [&] { return encode_pgm(*session.ideal); });
}

std::shared_ptr<Session> load_session(const fs::path& session_dir)
{
    auto session = std::make_shared<Session>();
    session->id = session_dir.filename().string();
    session->original = decode_f64(read_file(session_dir / "original.f64"));
    session->observed.image = decode_pgm(read_file(session_dir / "observed.pgm"));

    json quantizer;
    try {
        quantizer = json::parse(read_file(session_dir / "quantizer.json"));
        auto& spec = session->observed.spec;
        spec.levels = quantizer.at("levels").get<int>();
        spec.clip_percentile = quantizer.at("clip_percentile").get<double>();
        if (!quantizer.at("lo").is_null())
            spec.lo = quantizer.at("lo").get<double>();
        if (!quantizer.at("hi").is_null())
            spec.hi = quantizer.at("hi").get<double>();
        if (quantizer.contains("warning"))
            session->observed.warning = quantizer.at("warning").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError("invalid quantizer.json in " + session_dir.string() + ": " + e.what());
    }

    if (fs::exists(session_dir / "rois.json"))
        session->rois = parse_roi_json(read_file(session_dir / "rois.json"));
    if (fs::exists(session_dir / "filter.pbf"))
        session->filter = parse_pbf(read_file(session_dir / "filter.pbf"));
    if (fs::exists(session_dir / "ideal.pgm"))
        session->ideal = decode_pgm(read_file(session_dir / "ideal.pgm"));
    return session;
}

}  // namespace speckstack::service
