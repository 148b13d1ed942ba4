#include "speckstack/service/server.hpp"

#include <chrono>
#include <atomic>
#include <charconv>
#include <functional>
#include <list>
#include <stop_token>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "speckstack/classic_filters.hpp"
#include "speckstack/error.hpp"
#include "speckstack/gmlc.hpp"
#include "speckstack/io.hpp"
#include "speckstack/metrics.hpp"
#include "speckstack/training.hpp"

namespace speckstack::service {

using nlohmann::json;
using httplib::Request;
using httplib::Response;
namespace fs = std::filesystem;

namespace {

struct HttpError {
    int status;
    std::string detail;
};

[[noreturn]] void fail(int status, std::string detail)
{
    throw HttpError{status, std::move(detail)};
}

void send_problem(Response& res, int status, const std::string& detail)
{
    json doc{{"type", "about:blank"},
             {"title", httplib::status_message(status)},
             {"status", status},
             {"detail", detail}};
    res.status = status;
    res.set_content(doc.dump(), "application/problem+json");
}

void send_json(Response& res, const json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(2), "application/json");
}

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
        .count();
}

std::optional<int> parse_int(const std::string& text)
{
    int value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        return std::nullopt;
    return value;
}

int int_param(const Request& req, const char* name, int fallback)
{
    if (!req.has_param(name))
        return fallback;
    auto v = parse_int(req.get_param_value(name));
    if (!v)
        fail(422, std::string("query parameter '") + name + "' must be an integer");
    return *v;
}

double double_param(const Request& req, const char* name, double fallback)
{
    if (!req.has_param(name))
        return fallback;
    try {
        std::size_t used = 0;
        const std::string text = req.get_param_value(name);
        double v = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument(name);
        return v;
    } catch (const std::exception&) {
        fail(422, std::string("query parameter '") + name + "' must be a number");
    }
}

int iteration_param(const Request& req, int fallback, int minimum)
{
    const int k = int_param(req, "k", fallback);
    if (k < minimum)
        fail(422, "iteration count k must be >= " + std::to_string(minimum));
    return k;
}

void send_image(Response& res, const QuantizedImage& img, const std::string& ext)
{
    if (ext == "png")
        res.set_content(encode_png(img), "image/png");
    else
        res.set_content(encode_pgm(img), "image/x-portable-graymap");
}

json job_json(const JobStatus& job)
{
    return {{"state", to_string(job.state)},
            {"kind", job.kind},
            {"target", job.target},
            {"completed", job.completed},
            {"error", job.error.empty() ? json(nullptr) : json(job.error)}};
}

}  // namespace

struct Server::Impl {
    ServiceOptions options;
    SessionStore store;
    httplib::Server http;

    struct Job {
        std::shared_ptr<std::atomic<bool>> done;
        std::jthread thread;
    };
    std::mutex jobs_mutex;
    std::list<Job> jobs;

    explicit Impl(ServiceOptions opts) : options(std::move(opts))
    {
        options.quantizer.validate();
        restore();
        routes();
    }

    ~Impl()
    {
        http.stop();
        std::lock_guard lock(jobs_mutex);
        jobs.clear();  // requests stop and joins
    }

    void restore()
    {
        if (!options.persist_dir || !fs::exists(*options.persist_dir))
            return;
        for (const auto& entry : fs::directory_iterator(*options.persist_dir)) {
            if (!entry.is_directory())
                continue;
            auto session = load_session(entry.path());
            if (!session->rois.regions.empty())
                session->rois = resolve_ideals(session->observed.image, session->rois);
            store.insert(std::move(session));
        }
    }

    void persist(const Session& s)
    {
        if (options.persist_dir)
            save_session(s, *options.persist_dir);
    }

    std::shared_ptr<Session> session(const Request& req)
    {
        auto s = store.find(req.matches[1]);
        if (!s)
            fail(404, "no session '" + std::string(req.matches[1]) + "'");
        return s;
    }

    using Handler = std::function<void(const Request&, Response&)>;

    static httplib::Server::Handler guarded(Handler h)
    {
        return [h = std::move(h)](const Request& req, Response& res) {
            try {
                h(req, res);
            } catch (const HttpError& e) {
                send_problem(res, e.status, e.detail);
            } catch (const ParseError& e) {
                send_problem(res, 400, e.what());
            } catch (const DomainError& e) {
                send_problem(res, 422, e.what());
            } catch (const UndefinedMetricError& e) {
                send_problem(res, 422, e.what());
            } catch (const std::exception& e) {
                send_problem(res, 500, e.what());
            }
        };
    }

    void routes()
    {
        http.set_payload_max_length(options.max_body_bytes);
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods",
                                   "GET, POST, PUT, DELETE, OPTIONS"}});
        http.Options(R"(.*)", [](const Request&, Response& res) { res.status = 204; });

        const std::string sid = R"(/sessions/([0-9a-f]+))";
        http.Post("/sessions", guarded([this](auto& q, auto& r) { create(q, r); }));
        http.Get(sid, guarded([this](auto& q, auto& r) { describe(q, r); }));
        http.Delete(sid, guarded([this](auto& q, auto& r) { remove(q, r); }));
        http.Put(sid + "/rois", guarded([this](auto& q, auto& r) { put_rois(q, r); }));
        http.Get(sid + "/rois", guarded([this](auto& q, auto& r) { get_rois(q, r); }));
        http.Get(sid + "/regions/stats", guarded([this](auto& q, auto& r) { stats(q, r); }));
        http.Post(sid + "/train", guarded([this](auto& q, auto& r) { train(q, r); }));
        http.Get(sid + "/filter", guarded([this](auto& q, auto& r) { get_filter(q, r); }));
        http.Post(sid + "/apply", guarded([this](auto& q, auto& r) { apply(q, r); }));
        http.Get(sid + "/jobs/current", guarded([this](auto& q, auto& r) { job(q, r); }));
        http.Get(sid + R"(/result/(\d+)\.(png|pgm))",
                 guarded([this](auto& q, auto& r) { result(q, r); }));
        http.Get(sid + R"(/original\.(png|pgm))",
                 guarded([this](auto& q, auto& r) { original(q, r); }));
        http.Get(sid + R"(/baseline/(lee|frost)\.(png|pgm))",
                 guarded([this](auto& q, auto& r) { baseline(q, r); }));
        http.Post(sid + "/classify", guarded([this](auto& q, auto& r) { post_classify(q, r); }));
        http.Get(sid + R"(/classification\.(png|pgm))",
                 guarded([this](auto& q, auto& r) { classification(q, r); }));
        http.Post(sid + "/ideal", guarded([this](auto& q, auto& r) { put_ideal(q, r); }));
        http.Get(sid + "/metrics", guarded([this](auto& q, auto& r) { metrics(q, r); }));
    }

    // ---- sessions ------------------------------------------------------

    void create(const Request& req, Response& res)
    {
        QuantizerSpec spec = options.quantizer;
        spec.levels = int_param(req, "levels", spec.levels);
        spec.clip_percentile = double_param(req, "clip_pct", spec.clip_percentile);
        try {
            spec.validate();
        } catch (const DomainError& e) {
            fail(422, e.what());
        }
        Observed observed;
        try {
            observed = load_observed(req.body, spec);
        } catch (const std::exception& e) {
            fail(400, e.what());
        }
        auto s = store.create(std::move(observed));
        std::shared_lock lock(s->mutex);
        persist(*s);
        send_json(res, summary(*s));
    }

    json summary(const Session& s) const
    {
        const auto& spec = s.observed.spec;
        json iterations = json::array();
        for (const auto& [k, _] : s.iterates)
            iterations.push_back(k);
        return {{"id", s.id},
                {"width", s.observed.image.width()},
                {"height", s.observed.image.height()},
                {"levels", s.observed.image.levels()},
                {"quantizer",
                 {{"levels", spec.levels},
                  {"clip_percentile", spec.clip_percentile},
                  {"lo", spec.lo ? json(*spec.lo) : json(nullptr)},
                  {"hi", spec.hi ? json(*spec.hi) : json(nullptr)}}},
                {"warning", s.observed.warning ? json(*s.observed.warning) : json(nullptr)},
                {"regions", s.rois.regions.size()},
                {"trained", s.filter.has_value()},
                {"window", s.filter ? json(s.filter->window().to_string()) : json(nullptr)},
                {"iterations", iterations},
                {"has_ideal", s.ideal.has_value()},
                {"job", job_json(s.job())}};
    }

    void describe(const Request& req, Response& res)
    {
        auto s = session(req);
        std::shared_lock lock(s->mutex);
        send_json(res, summary(*s));
    }

    void remove(const Request& req, Response& res)
    {
        auto s = session(req);
        if (s->job().state == JobState::Running)
            fail(409, "a job is running on this session");
        store.erase(s->id);
        if (options.persist_dir)
            fs::remove_all(*options.persist_dir / s->id);
        res.status = 204;
    }

    // ---- regions -------------------------------------------------------

    void put_rois(const Request& req, Response& res)
    {
        auto s = session(req);
        RoiSet rois = parse_roi_json(req.body);
        if (rois.regions.empty())
            fail(422, "the ROI set is empty");
        const auto& img = s->observed.image;
        for (const auto& region : rois.regions)
            check_in_bounds(region, img.width(), img.height());
        rois = resolve_ideals(img, std::move(rois));

        if (!s->try_begin_job("rois", 0))
            fail(409, "a job is running on this session");
        {
            std::unique_lock lock(s->mutex);
            s->rois = std::move(rois);
            s->filter.reset();
            s->iterates.clear();
            s->classification.reset();
            ++s->generation;
        }
        s->end_job();
        std::shared_lock lock(s->mutex);
        persist(*s);
        res.set_content(region_stats_json(img, s->rois), "application/json");
    }

    void get_rois(const Request& req, Response& res)
    {
        auto s = session(req);
        std::shared_lock lock(s->mutex);
        res.set_content(to_json(s->rois), "application/json");
    }

    void stats(const Request& req, Response& res)
    {
        auto s = session(req);
        std::shared_lock lock(s->mutex);
        res.set_content(region_stats_json(s->observed.image, s->rois), "application/json");
    }

    // ---- training and filtering ----------------------------------------

    void train(const Request& req, Response& res)
    {
        auto s = session(req);
        const WindowShape window =
            WindowShape::parse(req.has_param("window") ? req.get_param_value("window") : "3x3");
        const int workers = std::max(1, int_param(req, "workers", options.workers));
        RoiSet rois;
        {
            std::shared_lock lock(s->mutex);
            rois = s->rois;
        }
        if (rois.regions.empty())
            fail(409, "define regions of interest before training");
        // ROI edits need the job slot too, so `rois` stays current.
        if (!s->try_begin_job("train", 0))
            fail(409, "a job is running on this session");
        try {

            // The job slot blocks every mutation, so the observed image can
            // be read without holding the lock.
            const auto& observed = s->observed.image;
            const auto t0 = std::chrono::steady_clock::now();
            const auto samples = roi_training_samples(observed, rois);
            const PatternStats pstats = accumulate_stats(observed, samples, window, workers);
            const double accumulate_ms = elapsed_ms(t0);
            const auto t1 = std::chrono::steady_clock::now();
            MonotoneFit fit = fit_monotone_detailed(pstats);
            const double fit_ms = elapsed_ms(t1);

            json body{{"window", window.to_string()},
                      {"samples", samples.size()},
                      {"patterns", pstats.counts().size()},
                      {"terms", fit.function.term_count()},
                      {"cost", fit.cost},
                      {"pbf", to_text(fit.function)},
                      {"timings_ms", {{"accumulate", accumulate_ms}, {"fit", fit_ms}}}};
            {
                std::unique_lock lock(s->mutex);
                s->filter = std::move(fit.function);
                s->iterates.clear();
                s->classification.reset();
                ++s->generation;
            }
            s->end_job();
            std::shared_lock lock(s->mutex);
            persist(*s);
            send_json(res, body);
        } catch (...) {
            s->end_job("training failed");
            throw;
        }
    }

    void get_filter(const Request& req, Response& res)
    {
        auto s = session(req);
        std::shared_lock lock(s->mutex);
        if (!s->filter)
            fail(409, "the filter has not been trained");
        res.set_content(to_text(*s->filter), "text/plain");
    }

    json apply_body(const Session& s, int k, int from, bool cached, double apply_ms) const
    {
        return {{"k", k},
                {"cached", cached},
                {"from", from},
                {"pbf", to_text(*s.filter)},
                {"result", "/sessions/" + s.id + "/result/" + std::to_string(k) + ".png"},
                {"timings_ms", {{"apply", apply_ms}}}};
    }

    // Extends the iterate cache from `from` to `k`, one pass at a time, so
    // that intermediate counts are served from the cache afterwards.
    void run_apply(Session& s, int k, std::stop_token stop)
    {
        std::optional<PositiveBooleanFunction> f;
        std::uint64_t generation = 0;
        int from = 0;
        QuantizedImage current;
        {
            std::shared_lock lock(s.mutex);
            f = *s.filter;
            generation = s.generation;
            from = s.cached_prefix(k);
            current = s.iterate(from);
        }
        for (int i = from + 1; i <= k; ++i) {
            if (stop.stop_requested())
                throw std::runtime_error("server shutting down");
            current = apply_stack_fast(*f, current, options.workers);
            std::unique_lock lock(s.mutex);
            if (s.generation != generation)
                throw std::runtime_error("filter changed while applying");
            s.iterates.emplace(i, current);
            lock.unlock();
            s.progress(i - from);
        }
    }

    void apply(const Request& req, Response& res)
    {
        auto s = session(req);
        const int k = iteration_param(req, 1, 1);
        const bool async = req.has_param("async") && req.get_param_value("async") != "0";
        {
            std::shared_lock lock(s->mutex);
            if (!s->filter)
                fail(409, "train the filter before applying it");
            if (s->iterates.contains(k))
                return send_json(res, apply_body(*s, k, k, true, 0.0));
        }
        if (!s->try_begin_job("apply", k))
            fail(409, "a job is running on this session");

        int from = 0;
        {
            std::shared_lock lock(s->mutex);
            from = s->cached_prefix(k);
        }
        if (async) {
            std::lock_guard lock(jobs_mutex);
            prune_jobs();
            auto done = std::make_shared<std::atomic<bool>>(false);
            jobs.push_back({done, std::jthread([this, s, k, done](std::stop_token stop) {
                                try {
                                    run_apply(*s, k, stop);
                                    s->end_job();
                                } catch (const std::exception& e) {
                                    s->end_job(e.what());
                                }
                                done->store(true);
                            })});
            json body{{"k", k},
                      {"from", from},
                      {"job", "/sessions/" + s->id + "/jobs/current"},
                      {"state", "running"}};
            return send_json(res, body, 202);
        }

        const auto t0 = std::chrono::steady_clock::now();
        try {
            run_apply(*s, k, {});
        } catch (const std::exception& e) {
            s->end_job(e.what());
            fail(409, e.what());
        }
        const double apply_ms = elapsed_ms(t0);
        s->end_job();
        std::shared_lock lock(s->mutex);
        send_json(res, apply_body(*s, k, from, false, apply_ms));
    }

    void prune_jobs()
    {
        // Joining a finished thread is immediate; running ones stay.
        for (auto it = jobs.begin(); it != jobs.end();) {
            if (it->done->load())
                it = jobs.erase(it);
            else
                ++it;
        }
    }

    void job(const Request& req, Response& res)
    {
        auto s = session(req);
        send_json(res, job_json(s->job()));
    }

    void result(const Request& req, Response& res)
    {
        auto s = session(req);
        const auto k = parse_int(req.matches[2]);
        std::shared_lock lock(s->mutex);
        if (!k || !s->iterates.contains(*k))
            fail(404, "iteration " + std::string(req.matches[2]) + " has not been computed");
        send_image(res, s->iterates.at(*k), req.matches[3]);
    }

    void original(const Request& req, Response& res)
    {
        auto s = session(req);
        std::shared_lock lock(s->mutex);
        send_image(res, s->observed.image, req.matches[2]);
    }

    void baseline(const Request& req, Response& res)
    {
        auto s = session(req);
        SpeckleFilterParams params;
        params.window = int_param(req, "window", params.window);
        params.looks = double_param(req, "looks", params.looks);
        params.damping = double_param(req, "damping", params.damping);
        params.validate();
        std::shared_lock lock(s->mutex);
        const FloatImage filtered = req.matches[2] == "lee" ? lee_filter(s->original, params)
                                                            : frost_filter(s->original, params);
        send_image(res, quantize_like(filtered, s->observed.spec), req.matches[3]);
    }

    // ---- classification and metrics -----------------------------------

    void post_classify(const Request& req, Response& res)
    {
        auto s = session(req);
        const int k = iteration_param(req, 1, 0);
        std::unique_lock lock(s->mutex);
        if (!s->filter)
            fail(409, "train the filter before classifying");
        if (k > 0 && !s->iterates.contains(k))
            fail(409, "apply the filter " + std::to_string(k) + " times before classifying");
        const QuantizedImage& img = s->iterate(k);
        const FloatImage values = to_float(img);
        const auto classes = fit_classes(values, s->rois);
        LabelMap labels = classify(values, classes);
        const LabelMap truth = roi_label_map(s->rois, img.width(), img.height());
        const ConfusionStats cs =
            confusion_stats(labels, truth, static_cast<int>(classes.size()));
        s->classification = std::move(labels);

        json cls = json::array();
        for (std::size_t i = 0; i < classes.size(); ++i) {
            cls.push_back({{"label", i},
                           {"name", classes[i].label},
                           {"mean", classes[i].mean},
                           {"variance", classes[i].variance},
                           {"prior", classes[i].prior}});
        }
        json acc = json::array();
        for (const auto& a : cs.accuracy)
            acc.push_back(a ? json(*a) : json(nullptr));
        send_json(res, {{"k", k},
                        {"classes", cls},
                        {"accuracy", acc},
                        {"matrix", cs.matrix},
                        {"warnings", cs.warnings},
                        {"labels", "/sessions/" + s->id + "/classification.png"}});
    }

    void classification(const Request& req, Response& res)
    {
        auto s = session(req);
        std::shared_lock lock(s->mutex);
        if (!s->classification)
            fail(404, "no classification has been computed");
        const LabelMap& labels = *s->classification;
        if (req.matches[2] == "pgm")
            return res.set_content(encode_pgm(labels), "image/x-portable-graymap");
        int top = 1;
        for (auto v : labels.pixels())
            top = std::max<int>(top, v);
        QuantizedImage view(labels.width(), labels.height(), top);
        for (int y = 0; y < labels.height(); ++y) {
            for (int x = 0; x < labels.width(); ++x)
                view.set(x, y, labels(x, y));
        }
        res.set_content(encode_png(view), "image/png");
    }

    void put_ideal(const Request& req, Response& res)
    {
        auto s = session(req);
        LoadedImage loaded;
        try {
            loaded = decode_image(req.body);
        } catch (const std::exception& e) {
            fail(400, e.what());
        }
        if (s->job().state == JobState::Running)
            fail(409, "a job is running on this session");
        std::unique_lock lock(s->mutex);
        QuantizedImage ideal;
        if (auto* q = std::get_if<QuantizedImage>(&loaded)) {
            if (q->levels() != s->observed.image.levels())
                fail(422, "ideal image has " + std::to_string(q->levels())
                              + " levels, session has "
                              + std::to_string(s->observed.image.levels()));
            ideal = std::move(*q);
        } else {
            ideal = quantize_like(std::get<FloatImage>(loaded), s->observed.spec);
        }
        if (!ideal.same_shape(s->observed.image))
            fail(422, "ideal image shape differs from the session image");
        s->ideal = std::move(ideal);
        persist(*s);
        send_json(res, {{"width", s->ideal->width()},
                        {"height", s->ideal->height()},
                        {"levels", s->ideal->levels()}});
    }

    void metrics(const Request& req, Response& res)
    {
        auto s = session(req);
        const int k = iteration_param(req, 1, 0);
        const std::string against =
            req.has_param("against") ? req.get_param_value("against") : "original";
        if (against != "original" && against != "ideal")
            fail(422, "'against' must be 'original' or 'ideal'");
        std::shared_lock lock(s->mutex);
        if (k > 0 && !s->iterates.contains(k))
            fail(409, "apply the filter " + std::to_string(k) + " times first");
        if (against == "ideal" && !s->ideal)
            fail(409, "upload an ideal image first");
        const QuantizedImage& reference = against == "ideal" ? *s->ideal : s->observed.image;
        json body = json::parse(compare_quality(s->iterate(k), reference).to_json());
        body["k"] = k;
        body["against"] = against;
        send_json(res, body);
    }
};

Server::Server(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() = default;

int Server::bind_to_any_port(const std::string& host)
{
    return impl_->http.bind_to_any_port(host);
}

bool Server::bind(const std::string& host, int port)
{
    return impl_->http.bind_to_port(host, port);
}

bool Server::listen_after_bind()
{
    return impl_->http.listen_after_bind();
}

void Server::stop()
{
    impl_->http.stop();
}

void Server::wait_until_ready() const
{
    impl_->http.wait_until_ready();
}

SessionStore& Server::sessions()
{
    return impl_->store;
}

}  // namespace speckstack::service
