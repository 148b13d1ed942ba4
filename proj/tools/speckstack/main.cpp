// speckstack: command-line front end for simulation, training, filtering,
// classification, metrics, the Monte Carlo experiments and the ROI service.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "speckstack/classic_filters.hpp"
#include "speckstack/error.hpp"
#include "speckstack/experiments.hpp"
#include "speckstack/gmlc.hpp"
#include "speckstack/io.hpp"
#include "speckstack/metrics.hpp"
#include "speckstack/phantom.hpp"
#include "speckstack/pipeline.hpp"
#include "speckstack/service/server.hpp"
#include "speckstack/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace speckstack;

namespace {

struct QuantizerFlags {
    int levels = 255;
    double clip_pct = 99.0;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--levels", levels, "Gray levels M for F64 inputs")
            ->check(CLI::Range(1, 65535));
        cmd->add_option("--clip-pct", clip_pct, "Upper clip percentile for F64 inputs")
            ->check(CLI::Range(0.0, 100.0));
    }

    QuantizerSpec spec() const
    {
        QuantizerSpec s;
        s.levels = levels;
        s.clip_percentile = clip_pct;
        return s;
    }
};

Observed load(const std::string& path, const QuantizerFlags& q)
{
    Observed obs = load_observed(read_file(path), q.spec());
    if (obs.quantized.warning)
        std::cerr << "warning: " << path << ": " << *obs.quantized.warning << '\n';
    return obs;
}

void write_output(const std::string& path, const std::string& bytes)
{
    if (path.empty() || path == "-")
        std::cout << bytes;
    else
        write_file(path, bytes);
}

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
    std::string kind = "two-region";
    int width = 128;
    int height = 128;
    std::vector<double> alphas;
    std::vector<double> means;
    double looks = 1.0;
    std::uint64_t seed = 1;
    std::string out = ".";
    QuantizerFlags quantizer;
};

void run_simulate(const SimulateArgs& a)
{
    PhantomSpec spec;
    spec.width = a.width;
    spec.height = a.height;
    spec.seed = a.seed;
    std::vector<double> alphas = a.alphas;
    std::vector<double> means = a.means;
    if (a.kind == "two-region") {
        spec.kind = PhantomKind::TwoRegionVertical;
        if (alphas.empty())
            alphas = {-1.5, -10.0};
        if (means.empty())
            means = {1.0, 10.0};
    } else if (a.kind == "strips") {
        spec.kind = PhantomKind::StripsAndPoints;
        if (alphas.empty())
            alphas = {-12.0, -3.0};
        if (means.empty())
            means = {1.0, 3.0};
    } else {
        throw DomainError("unknown phantom kind '" + a.kind + "' (two-region, strips)");
    }
    if (alphas.size() != 2 || means.size() != 2)
        throw DomainError("--alpha and --mean take exactly two values");
    for (int i = 0; i < 2; ++i)
        spec.regions.push_back({alphas[i], a.looks, means[i]});

    const Phantom ph = make_phantom(spec);
    const Quantized noisy = quantize(ph.noisy, a.quantizer.spec());
    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_file(dir / "noisy.f64", encode_f64(ph.noisy));
    write_file(dir / "ideal.f64", encode_f64(ph.ideal));
    write_file(dir / "noisy.pgm", encode_pgm(noisy.image));
    write_file(dir / "ideal.pgm", encode_pgm(quantize_like(ph.ideal, noisy.spec)));
    write_file(dir / "labels.pgm", encode_pgm(ph.labels));
    json info{{"kind", a.kind},
              {"width", a.width},
              {"height", a.height},
              {"seed", a.seed},
              {"alpha", alphas},
              {"mean", means},
              {"looks", a.looks},
              {"quantizer", {{"levels", noisy.spec.levels}, {"lo", *noisy.spec.lo},
                             {"hi", *noisy.spec.hi}}}};
    write_file(dir / "phantom.json", info.dump(2));
    std::cout << info.dump(2) << '\n';
}

// ---- train / apply --------------------------------------------------------

struct TrainArgs {
    std::string image;
    std::string rois;
    std::string ideal;
    std::string window = "3x3";
    std::string out = "-";
    std::string stats_out;
    int workers = 1;
    QuantizerFlags quantizer;
};

void run_train(const TrainArgs& a)
{
    const Observed obs = load(a.image, a.quantizer);
    const WindowShape window = WindowShape::parse(a.window);
    PatternStats stats;
    if (!a.ideal.empty()) {
        const Observed ideal = load(a.ideal, a.quantizer);
        QuantizedImage target = ideal.quantized.image;
        if (std::holds_alternative<FloatImage>(decode_image(read_file(a.ideal))))
            target = quantize_like(ideal.original, obs.quantized.spec);
        stats = accumulate_stats(obs.quantized.image, target, window, a.workers);
    } else {
        if (a.rois.empty())
            throw DomainError("train needs --rois or --ideal");
        const RoiSet rois = parse_roi_json(read_file(a.rois));
        const auto samples = roi_training_samples(obs.quantized.image, rois);
        stats = accumulate_stats(obs.quantized.image, samples, window, a.workers);
    }
    if (!a.stats_out.empty())
        write_file(a.stats_out, stats.dump());
    const MonotoneFit fit = fit_monotone_detailed(stats);
    write_output(a.out, to_text(fit.function));
    std::cerr << "trained " << window.to_string() << " filter: " << fit.function.term_count()
              << " terms, training error " << fit.cost << '\n';
}

struct ApplyArgs {
    std::string image;
    std::string filter;
    int iterations = 1;
    std::string out = "-";
    std::string png;
    int workers = 1;
    QuantizerFlags quantizer;
};

void run_apply(const ApplyArgs& a)
{
    const Observed obs = load(a.image, a.quantizer);
    const PositiveBooleanFunction f = parse_pbf(read_file(a.filter));
    const QuantizedImage out = apply_iterated(f, obs.quantized.image, a.iterations, a.workers);
    write_output(a.out, encode_pgm(out));
    if (!a.png.empty())
        write_file(a.png, encode_png(out));
}

// ---- baseline filters -----------------------------------------------------

struct BaselineArgs {
    std::string kind = "lee";
    std::string image;
    SpeckleFilterParams params;
    std::string out = "-";
    QuantizerFlags quantizer;
};

void run_baseline(const BaselineArgs& a)
{
    const Observed obs = load(a.image, a.quantizer);
    FloatImage filtered;
    if (a.kind == "lee")
        filtered = lee_filter(obs.original, a.params);
    else if (a.kind == "frost")
        filtered = frost_filter(obs.original, a.params);
    else if (a.kind == "boxcar")
        filtered = boxcar_filter(obs.original, a.params.window);
    else
        throw DomainError("unknown baseline '" + a.kind + "' (lee, frost, boxcar)");
    write_output(a.out, encode_pgm(quantize_like(filtered, obs.quantized.spec)));
}

// ---- classify / metrics -------------------------------------------------------

struct ClassifyArgs {
    std::string image;
    std::string rois;
    std::string truth;
    std::string out;
    QuantizerFlags quantizer;
};

void run_classify(const ClassifyArgs& a)
{
    const Observed obs = load(a.image, a.quantizer);
    const RoiSet rois = parse_roi_json(read_file(a.rois));
    const FloatImage values = to_float(obs.quantized.image);
    const auto classes = fit_classes(values, rois);
    const LabelMap labels = classify(values, classes);
    const LabelMap truth = a.truth.empty() ? roi_label_map(rois, values.width(), values.height())
                                           : decode_labels(read_file(a.truth));
    const ConfusionStats cs = confusion_stats(labels, truth, static_cast<int>(classes.size()));
    if (!a.out.empty())
        write_file(a.out, encode_pgm(labels));

    json cls = json::array();
    for (std::size_t i = 0; i < classes.size(); ++i)
        cls.push_back({{"label", i},
                       {"name", classes[i].label},
                       {"mean", classes[i].mean},
                       {"variance", classes[i].variance},
                       {"prior", classes[i].prior}});
    json acc = json::array();
    for (const auto& v : cs.accuracy)
        acc.push_back(v ? json(*v) : json(nullptr));
    std::cout << json{{"classes", cls},
                      {"accuracy", acc},
                      {"matrix", cs.matrix},
                      {"warnings", cs.warnings}}
                     .dump(2)
              << '\n';
}

struct MetricsArgs {
    std::string image;
    std::string reference;
    std::string rois;
    QuantizerFlags quantizer;
};

void run_metrics(const MetricsArgs& a)
{
    const Observed obs = load(a.image, a.quantizer);
    if (!a.rois.empty()) {
        const RoiSet rois = parse_roi_json(read_file(a.rois));
        std::cout << region_stats_json(obs.quantized.image, rois) << '\n';
        return;
    }
    if (a.reference.empty())
        throw DomainError("metrics needs --reference or --rois");
    const Observed ref = load(a.reference, a.quantizer);
    QuantizedImage reference = ref.quantized.image;
    if (std::holds_alternative<FloatImage>(decode_image(read_file(a.reference))))
        reference = quantize_like(ref.original, obs.quantized.spec);
    std::cout << compare_quality(obs.quantized.image, reference).to_json() << '\n';
}

// ---- experiment -------------------------------------------------------------

struct ExperimentArgs {
    std::string kind;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<int> size;
    std::vector<std::string> ratios;
    std::optional<std::string> window;
    std::vector<int> iterations;
    std::optional<int> levels;
    std::optional<double> clip_pct;
    std::optional<int> workers;
    std::optional<int> lee_window;
    std::optional<int> frost_window;
    bool empirical = false;
    bool full = false;
    std::string out;
};

int parse_ratio(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string tail = colon == std::string::npos ? text : text.substr(colon + 1);
    if (colon != std::string::npos && text.substr(0, colon) != "10")
        throw DomainError("ratio '" + text + "' must have the form 10:c");
    try {
        std::size_t used = 0;
        const int c = std::stoi(tail, &used);
        if (used != tail.size())
            throw std::invalid_argument(text);
        return c;
    } catch (const std::logic_error&) {
        throw DomainError("ratio '" + text + "' must have the form 10:c");
    }
}

void emit(const std::string& out_dir, const std::string& stem, const std::string& markdown,
          const std::string& csv, const std::string& json_text)
{
    std::cout << markdown;
    if (out_dir.empty())
        return;
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    write_file(dir / (stem + ".md"), markdown);
    write_file(dir / (stem + ".csv"), csv);
    write_file(dir / (stem + ".json"), json_text);
}

void run_experiment(const ExperimentArgs& a)
{
    const ExperimentKind kind = parse_experiment_kind(a.kind);
    ExperimentConfig cfg = ExperimentConfig::defaults_for(kind);
    if (a.full)
        cfg = cfg.full_scale();
    if (a.seed)
        cfg.seed = *a.seed;
    if (a.reps)
        cfg.replications = *a.reps;
    if (a.size)
        cfg.size = *a.size;
    if (!a.ratios.empty()) {
        cfg.ratios.clear();
        for (const auto& r : a.ratios)
            cfg.ratios.push_back(parse_ratio(r));
    }
    if (a.window)
        cfg.window = WindowShape::parse(*a.window);
    if (!a.iterations.empty())
        cfg.iterations = a.iterations;
    if (a.levels)
        cfg.levels = *a.levels;
    if (a.clip_pct)
        cfg.clip_percentile = *a.clip_pct;
    if (a.workers)
        cfg.workers = *a.workers;
    if (a.lee_window)
        cfg.lee.window = *a.lee_window;
    if (a.frost_window)
        cfg.frost.window = *a.frost_window;
    if (a.empirical)
        cfg.contrast_mode = ContrastMode::Empirical;
    cfg.validate();

    const std::string stem = to_string(kind);
    switch (kind) {
    case ExperimentKind::McQuality: {
        const auto r = run_mc_quality(cfg);
        emit(a.out, stem, to_markdown(r), to_csv(r), to_json(r));
        break;
    }
    case ExperimentKind::Classification: {
        const auto r = run_classification(cfg);
        emit(a.out, stem, to_markdown(r), to_csv(r), to_json(r));
        break;
    }
    case ExperimentKind::Contrast: {
        const auto r = run_contrast(cfg);
        emit(a.out, stem, to_markdown(r), to_csv(r), to_json(r));
        break;
    }
    }
}

// ---- serve --------------------------------------------------------------------

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string persist_dir;
    int workers = 1;
    QuantizerFlags quantizer;
};

void run_serve(const ServeArgs& a)
{
    service::ServiceOptions options;
    options.quantizer = a.quantizer.spec();
    options.workers = a.workers;
    if (!a.persist_dir.empty())
        options.persist_dir = a.persist_dir;
    service::Server server(options);
    int port = a.port;
    if (port == 0) {
        port = server.bind_to_any_port(a.host);
        if (port < 0)
            throw std::runtime_error("cannot bind " + a.host);
    } else if (!server.bind(a.host, port)) {
        throw std::runtime_error("cannot bind " + a.host + ":" + std::to_string(port));
    }
    std::cout << "listening on http://" << a.host << ':' << port << std::endl;
    server.listen_after_bind();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive stack filters for speckled imagery"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a G0 phantom");
    simulate->add_option("--kind", sim.kind, "two-region or strips");
    simulate->add_option("--size", sim.width, "Square size (sets width and height)")
        ->each([&](const std::string& v) { sim.height = std::stoi(v); });
    simulate->add_option("--width", sim.width);
    simulate->add_option("--height", sim.height);
    simulate->add_option("--alpha", sim.alphas, "Two roughness values")->delimiter(',');
    simulate->add_option("--mean", sim.means, "Two region means")->delimiter(',');
    simulate->add_option("--looks", sim.looks);
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--out", sim.out, "Output directory");
    sim.quantizer.add_to(simulate);
    simulate->callback([&] { run_simulate(sim); });

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train a stack filter from ROIs or an ideal image");
    train->add_option("--image", tr.image, "Observed PGM/F64 image")->required();
    train->add_option("--rois", tr.rois, "RoiSet JSON");
    train->add_option("--ideal", tr.ideal, "Ideal image for full-image training");
    train->add_option("--window", tr.window, "Window shape, e.g. 3x3");
    train->add_option("--out", tr.out, "PBF output file");
    train->add_option("--stats-out", tr.stats_out, "Dump pattern statistics");
    train->add_option("--workers", tr.workers)->check(CLI::PositiveNumber);
    tr.quantizer.add_to(train);
    train->callback([&] { run_train(tr); });

    ApplyArgs ap;
    auto* apply = app.add_subcommand("apply", "Apply a trained filter k times");
    apply->add_option("--image", ap.image)->required();
    apply->add_option("--filter", ap.filter, "PBF file")->required();
    apply->add_option("--iters", ap.iterations)->check(CLI::PositiveNumber);
    apply->add_option("--out", ap.out, "PGM output");
    apply->add_option("--png", ap.png, "Also write a PNG preview");
    apply->add_option("--workers", ap.workers)->check(CLI::PositiveNumber);
    ap.quantizer.add_to(apply);
    apply->callback([&] { run_apply(ap); });

    BaselineArgs bl;
    auto* baseline = app.add_subcommand("baseline", "Lee, Frost or boxcar filtering");
    baseline->add_option("kind", bl.kind, "lee, frost or boxcar")->required();
    baseline->add_option("--image", bl.image)->required();
    baseline->add_option("--window", bl.params.window);
    baseline->add_option("--looks", bl.params.looks);
    baseline->add_option("--damping", bl.params.damping);
    baseline->add_option("--out", bl.out);
    bl.quantizer.add_to(baseline);
    baseline->callback([&] { run_baseline(bl); });

    ClassifyArgs cl;
    auto* classify_cmd = app.add_subcommand("classify", "Gaussian ML classification from ROIs");
    classify_cmd->add_option("--image", cl.image)->required();
    classify_cmd->add_option("--rois", cl.rois)->required();
    classify_cmd->add_option("--truth", cl.truth, "Label map PGM (default: ROI pixels)");
    classify_cmd->add_option("--out", cl.out, "Label map output");
    cl.quantizer.add_to(classify_cmd);
    classify_cmd->callback([&] { run_classify(cl); });

    MetricsArgs me;
    auto* metrics = app.add_subcommand("metrics", "Quality indexes or region statistics");
    metrics->add_option("--image", me.image)->required();
    metrics->add_option("--reference", me.reference);
    metrics->add_option("--rois", me.rois, "Print per-region statistics instead");
    me.quantizer.add_to(metrics);
    metrics->callback([&] { run_metrics(me); });

    ExperimentArgs ex;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo experiments");
    experiment->add_option("kind", ex.kind, "mc-quality, classification or contrast")
        ->required();
    experiment->add_option("--seed", ex.seed);
    experiment->add_option("--reps", ex.reps)->check(CLI::PositiveNumber);
    experiment->add_option("--size", ex.size)->check(CLI::PositiveNumber);
    experiment->add_option("--ratio", ex.ratios, "10:c, repeatable")->delimiter(',');
    experiment->add_option("--window", ex.window);
    experiment->add_option("--iters", ex.iterations, "Stack iteration counts")->delimiter(',');
    experiment->add_option("--levels", ex.levels);
    experiment->add_option("--clip-pct", ex.clip_pct);
    experiment->add_option("--workers", ex.workers)->check(CLI::PositiveNumber);
    experiment->add_option("--lee-window", ex.lee_window);
    experiment->add_option("--frost-window", ex.frost_window);
    experiment->add_flag("--empirical", ex.empirical, "Contrast reference from unfiltered data");
    experiment->add_flag("--full", ex.full, "Full-scale replication counts and sizes");
    experiment->add_option("--out", ex.out, "Directory for .md/.csv/.json tables");
    experiment->callback([&] { run_experiment(ex); });

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "Run the ROI HTTP service");
    serve->add_option("--host", sv.host);
    serve->add_option("--port", sv.port, "0 picks a free port");
    serve->add_option("--persist-dir", sv.persist_dir);
    serve->add_option("--workers", sv.workers)->check(CLI::PositiveNumber);
    sv.quantizer.add_to(serve);
    serve->callback([&] { run_serve(sv); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
