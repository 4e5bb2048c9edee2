#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "evflow/io.hpp"

using namespace evflow;
namespace fs = std::filesystem;

namespace {

const char* kCli = EVFLOW_CLI_PATH;

struct CliDir {
    fs::path dir;
    CliDir() {
        dir = fs::temp_directory_path() / "evflow_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    std::string operator/(const char* name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& out_file = "") {
    std::string cmd = std::string(kCli) + " " + args;
    if (!out_file.empty()) cmd += " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool same_bytes(const std::string& a, const std::string& b) {
    return slurp(a) == slurp(b);
}

void write_scene(const std::string& path) {
    std::ofstream f(path);
    f << "-0.3 -0.1 0.3 -0.1 1.0 400\n";
    f << "-0.1 -0.25 -0.1 0.25 1.5 400\n";
    f << "0.0 0.05 0.25 0.3 2.0 400\n";
}

} // namespace

TEST_CASE("simulate is reproducible byte for byte") {
    CliDir tmp;
    write_scene(tmp / "scene.txt");
    const std::string base = "simulate --scene " + (tmp / "scene.txt") +
                             " --v 0.2,0.1,1 --w 0,0,0.3 --t 0.1 --seed 7";
    CHECK(run(base + " --events-out " + (tmp / "a.evt1") + " --gt-out " + (tmp / "a.csv"),
              tmp / "log1.txt") == 0);
    CHECK(run(base + " --events-out " + (tmp / "b.evt1") + " --gt-out " + (tmp / "b.csv"),
              tmp / "log2.txt") == 0);
    CHECK(same_bytes(tmp / "a.evt1", tmp / "b.evt1"));
    CHECK(same_bytes(tmp / "a.csv", tmp / "b.csv"));
}

TEST_CASE("missing scene file exits with code 2 and names the path") {
    CliDir tmp;
    const std::string log = tmp / "log.txt";
    CHECK(run("simulate --scene " + (tmp / "nope.txt"), log) == 2);
    CHECK(slurp(log).find("nope.txt") != std::string::npos);
}

TEST_CASE("print-config lists the paper defaults") {
    CliDir tmp;
    const std::string log = tmp / "config.txt";
    CHECK(run("--print-config", log) == 0);
    const std::string text = slurp(log);
    CHECK(text.find("dt=0.02") != std::string::npos);
    CHECK(text.find("dx=0.02") != std::string::npos);
    CHECK(text.find("eps=0.1") != std::string::npos);
    CHECK(text.find("dim=384") != std::string::npos);
    CHECK(text.find("ensembles=5") != std::string::npos);
    CHECK(text.find("unc-thresh=0.3") != std::string::npos);
}

TEST_CASE("tiny end-to-end pipeline") {
    CliDir tmp;
    write_scene(tmp / "scene.txt");
    REQUIRE(run("simulate --scene " + (tmp / "scene.txt") +
                    " --v 0.3,0,1 --w 0,0,0.2 --t 0.2 --seed 3 --events-out " +
                    (tmp / "ev.evt1") + " --gt-out " + (tmp / "gt.csv"),
                tmp / "sim.txt") == 0);

    // Small dimensions keep this a smoke test, not a training run.
    REQUIRE(run("train --events " + (tmp / "ev.evt1") + " --flows " + (tmp / "gt.csv") +
                    " --out " + (tmp / "model.nfm") +
                    " --dim 32 --hidden 24,24 --epochs 2 --steps 6 --seed 1 --log " +
                    (tmp / "train.log"),
                tmp / "train.txt") == 0);
    CHECK(slurp(tmp / "train.log").find(',') != std::string::npos);

    REQUIRE(run("infer --model " + (tmp / "model.nfm") + " --events " + (tmp / "ev.evt1") +
                    " --out " + (tmp / "pred.csv") + " --ensembles 2 --seed 4",
                tmp / "infer.txt") == 0);
    const PredictionRows pred = read_predictions_csv(tmp / "pred.csv");
    const GtRows gt = read_gt_csv(tmp / "gt.csv");
    REQUIRE(pred.t.size() == gt.t.size());

    const std::string eval_log = tmp / "eval.txt";
    REQUIRE(run("eval-flow --pred " + (tmp / "pred.csv") + " --gt " + (tmp / "gt.csv"), eval_log) ==
            0);
    const std::string eval_text = slurp(eval_log);
    CHECK(eval_text.find("PEE=") != std::string::npos);
    CHECK(eval_text.find("PosPct=") != std::string::npos);

    // IMU file matching the simulated motion (omega constant).
    ImuSamples imu;
    for (int i = 0; i <= 20; ++i) {
        imu.t.push_back(0.01 * i);
        imu.w.emplace_back(0.0, 0.0, 0.2);
    }
    write_imu_csv(tmp / "imu.csv", imu);
    REQUIRE(run("egomotion --pred " + (tmp / "pred.csv") + " --imu " + (tmp / "imu.csv") +
                    " --solver svm --out " + (tmp / "ego.csv"),
                tmp / "ego.txt") == 0);
    CHECK(read_egomotion_csv(tmp / "ego.csv").size() >= 1);

    REQUIRE(run("plot --pred " + (tmp / "pred.csv") + " --out " + (tmp / "flow.ppm"),
                tmp / "plot.txt") == 0);
    CHECK(slurp(tmp / "flow.ppm").substr(0, 2) == "P6");
}

TEST_CASE("infer with a single ensemble member marks everything valid") {
    CliDir tmp;
    write_scene(tmp / "scene.txt");
    REQUIRE(run("simulate --scene " + (tmp / "scene.txt") +
                    " --v 0,0,1 --w 0,0,0 --t 0.06 --seed 5 --events-out " + (tmp / "ev.evt1") +
                    " --gt-out " + (tmp / "gt.csv"),
                tmp / "sim.txt") == 0);
    REQUIRE(run("train --events " + (tmp / "ev.evt1") + " --flows " + (tmp / "gt.csv") +
                    " --out " + (tmp / "model.nfm") +
                    " --dim 24 --hidden 16 --epochs 1 --steps 3 --seed 2",
                tmp / "train.txt") == 0);
    REQUIRE(run("infer --model " + (tmp / "model.nfm") + " --events " + (tmp / "ev.evt1") +
                    " --out " + (tmp / "pred.csv") + " --ensembles 1",
                tmp / "infer.txt") == 0);
    const PredictionRows pred = read_predictions_csv(tmp / "pred.csv");
    for (std::size_t i = 0; i < pred.t.size(); ++i) {
        CHECK(pred.sigma[i] == 0.0);
        CHECK(pred.valid[i]);
    }
}

TEST_CASE("eval-flow on ground truth against itself is exact") {
    CliDir tmp;
    write_scene(tmp / "scene.txt");
    REQUIRE(run("simulate --scene " + (tmp / "scene.txt") +
                    " --v 0.1,0.2,1 --w 0.1,0,0.1 --t 0.08 --seed 11 --events-out " +
                    (tmp / "ev.evt1") + " --gt-out " + (tmp / "gt.csv"),
                tmp / "sim.txt") == 0);

    // Predictions = the exact ground-truth normal flow.
    const GtRows gt = read_gt_csv(tmp / "gt.csv");
    EventCloud cloud = read_events_evt1(tmp / "ev.evt1");
    std::vector<NormalFlowPrediction> preds(gt.t.size());
    for (std::size_t i = 0; i < gt.t.size(); ++i)
        preds[i] = NormalFlowPrediction{gt.n[i], 0.0, true};
    write_predictions_csv(tmp / "oracle_pred.csv", cloud, preds);

    const std::string log = tmp / "eval.txt";
    REQUIRE(run("eval-flow --pred " + (tmp / "oracle_pred.csv") + " --gt " + (tmp / "gt.csv"),
                log) == 0);
    const std::string text = slurp(log);
    double pee = -1.0, pos = -1.0;
    REQUIRE(std::sscanf(text.c_str(), "PEE=%lf PosPct=%lf", &pee, &pos) == 2);
    CHECK(pee < 1e-6);
    CHECK(pos == doctest::Approx(100.0));
}
