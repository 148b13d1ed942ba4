#include <cstdio>
#include <filesystem>
#include <thread>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "speckstack/io.hpp"
#include "speckstack/service/server.hpp"

#ifdef SPECKSTACK_CLI

namespace {

using namespace speckstack;
using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
    int exit_code = -1;
    std::string out;
};

Outcome run(const std::string& args)
{
    const std::string cmd = std::string(SPECKSTACK_CLI) + " " + args + " 2>/dev/null";
    Outcome o;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return o;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
        o.out.append(buf, n);
    const int status = pclose(pipe);
    o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

const char* kRois = R"({"regions": [
    {"name": "left", "rect": {"x": 4, "y": 12, "width": 12, "height": 24}},
    {"name": "right", "rect": {"x": 30, "y": 12, "width": 12, "height": 24}}]})";

class Cli : public ::testing::Test {
  protected:
    static void SetUpTestSuite()
    {
        dir_ = fs::temp_directory_path() / "speckstack_cli_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        write_file(dir_ / "rois.json", kRois);
        const auto sim = run("simulate --size 48 --seed 9 --out " + path("sim"));
        ASSERT_EQ(sim.exit_code, 0);
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static std::string path(const std::string& name) { return (dir_ / name).string(); }

    static fs::path dir_;
};

fs::path Cli::dir_;

TEST_F(Cli, SimulateWritesAllOutputs)
{
    for (const char* f : {"noisy.f64", "ideal.f64", "noisy.pgm", "ideal.pgm", "labels.pgm",
                          "phantom.json"})
        EXPECT_TRUE(fs::exists(dir_ / "sim" / f)) << f;
    const auto info = json::parse(read_file(dir_ / "sim" / "phantom.json"));
    EXPECT_EQ(info["seed"], 9);
    EXPECT_EQ(decode_pgm(read_file(dir_ / "sim" / "noisy.pgm")).width(), 48);
    // Same seed, same bytes.
    ASSERT_EQ(run("simulate --size 48 --seed 9 --out " + path("sim2")).exit_code, 0);
    EXPECT_EQ(read_file(dir_ / "sim" / "noisy.f64"), read_file(dir_ / "sim2" / "noisy.f64"));
}

// The CLI and the service share the core, so the same inputs must give
// byte-identical filters, images and statistics.
TEST_F(Cli, MatchesServiceBitForBit)
{
    const auto noisy = path("sim/noisy.f64");
    const auto train = run("train --image " + noisy + " --rois " + path("rois.json"));
    ASSERT_EQ(train.exit_code, 0);
    write_file(dir_ / "f.pbf", train.out);
    const auto apply = run("apply --image " + noisy + " --filter " + path("f.pbf") + " --iters 2");
    ASSERT_EQ(apply.exit_code, 0);
    const auto stats = run("metrics --image " + noisy + " --rois " + path("rois.json"));
    ASSERT_EQ(stats.exit_code, 0);
    const auto lee = run("baseline lee --image " + noisy + " --window 5");
    ASSERT_EQ(lee.exit_code, 0);

    service::Server server;
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client http("127.0.0.1", port);
    http.set_read_timeout(120, 0);
    auto res = http.Post("/sessions", read_file(noisy), "application/octet-stream");
    ASSERT_EQ(res->status, 200);
    const std::string base = "/sessions/" + json::parse(res->body)["id"].get<std::string>();
    res = http.Put(base + "/rois", kRois, "application/json");
    EXPECT_EQ(res->body + "\n", stats.out);
    res = http.Post(base + "/train", "", "text/plain");
    EXPECT_EQ(json::parse(res->body)["pbf"], train.out);
    http.Post(base + "/apply?k=2", "", "text/plain");
    EXPECT_EQ(http.Get(base + "/result/2.pgm")->body, apply.out);
    EXPECT_EQ(http.Get(base + "/baseline/lee.pgm?window=5")->body, lee.out);
    server.stop();
    t.join();
}

TEST_F(Cli, FullImageTrainingAndMetrics)
{
    const auto train = run("train --image " + path("sim/noisy.pgm") + " --ideal "
                           + path("sim/ideal.pgm") + " --window 3x3 --stats-out "
                           + path("stats.txt") + " --out " + path("full.pbf"));
    ASSERT_EQ(train.exit_code, 0);
    EXPECT_EQ(read_file(dir_ / "stats.txt").rfind("PSTATS", 0), 0u);
    ASSERT_EQ(run("apply --image " + path("sim/noisy.pgm") + " --filter " + path("full.pbf")
                  + " --out " + path("out.pgm") + " --png " + path("out.png"))
                  .exit_code,
              0);
    EXPECT_TRUE(fs::exists(dir_ / "out.png"));
    const auto m = run("metrics --image " + path("out.pgm") + " --reference " + path("sim/ideal.pgm"));
    ASSERT_EQ(m.exit_code, 0);
    const auto doc = json::parse(m.out);
    EXPECT_TRUE(doc["q_index"].is_number());
    EXPECT_TRUE(doc["beta_index"].is_number());
}

TEST_F(Cli, ClassifyPrintsAccuracy)
{
    const auto c = run("classify --image " + path("sim/noisy.f64") + " --rois " + path("rois.json")
                       + " --truth " + path("sim/labels.pgm") + " --out " + path("labels.pgm"));
    ASSERT_EQ(c.exit_code, 0);
    const auto doc = json::parse(c.out);
    EXPECT_EQ(doc["accuracy"].size(), 2u);
    EXPECT_EQ(decode_labels(read_file(dir_ / "labels.pgm")).width(), 48);
}

TEST_F(Cli, ExperimentWritesTables)
{
    const auto e = run("experiment mc-quality --reps 2 --size 32 --ratio 10:1,10:8 --out "
                       + path("exp"));
    ASSERT_EQ(e.exit_code, 0);
    EXPECT_NE(e.out.find("10:8"), std::string::npos);
    for (const char* ext : {".md", ".csv", ".json"})
        EXPECT_TRUE(fs::exists(dir_ / "exp" / (std::string("mc-quality") + ext))) << ext;
}

TEST_F(Cli, ErrorsSetExitCodes)
{
    EXPECT_EQ(run("train --image " + path("missing.pgm") + " --rois " + path("rois.json")).exit_code,
              1);
    write_file(dir_ / "bad.json", "{");
    EXPECT_EQ(run("train --image " + path("sim/noisy.pgm") + " --rois " + path("bad.json")).exit_code,
              2);
    EXPECT_NE(run("frobnicate").exit_code, 0);
    EXPECT_NE(run("apply --image " + path("sim/noisy.pgm")).exit_code, 0);
}

}  // namespace

#endif
