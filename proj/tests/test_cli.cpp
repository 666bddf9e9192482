// Copyright 2026 The qsfe Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = QSFE_CLI_BIN;
const std::string kData = std::string(QSFE_DATA_DIR) + "/sfe_synthetic.csv";

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run(const std::string& args) {
    static int counter = 0;
    const fs::path out_file =
        fs::temp_directory_path() /
        ("qsfe_cli_out_" + std::to_string(::getpid()) + "_" + std::to_string(counter));
    const fs::path err_file =
        fs::temp_directory_path() /
        ("qsfe_cli_err_" + std::to_string(::getpid()) + "_" + std::to_string(counter));
    ++counter;
    const std::string command = kCli + " " + args + " > " + out_file.string() +
                                " 2> " + err_file.string();
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    fs::remove(out_file);
    fs::remove(err_file);
    return result;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("qsfe_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const std::string kQuickProtocol = " --repeats 3 --quiet ";

} // namespace

TEST_CASE("help lists every subcommand and flags") {
    const auto top = run("--help");
    CHECK(top.exit_code == 0);
    for (const char* name : {"tune", "train", "predict", "kernel", "report"}) {
        CHECK(top.out.find(name) != std::string::npos);
    }
    const auto tune = run("tune --help");
    CHECK(tune.exit_code == 0);
    for (const char* flag :
         {"--task", "--data", "--out", "--seed", "--jobs", "--reps", "--c",
          "--epsilon", "--entanglement", "--label-convention", "--scale-max",
          "--protocol", "--repeats", "--folds"}) {
        CHECK(tune.out.find(flag) != std::string::npos);
    }
}

TEST_CASE("tune writes the report and heatmaps") {
    TempDir dir("tune");
    const auto result =
        run("tune --task svc --data " + kData + " --seed 7 --out " +
            dir.path.string() + kQuickProtocol + "--reps 1 2 --c 1 10");
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(dir.path / "report.json"));
    for (const char* pattern : {"circular", "full", "linear"}) {
        CHECK(fs::exists(dir.path /
                         (std::string("heatmap_svc_") + pattern + ".csv")));
    }
    const auto json = nlohmann::json::parse(slurp(dir.path / "report.json"));
    CHECK(json.at("results").size() == 12); // 2 reps x 2 C x 3 patterns
    CHECK(json.at("seed").get<int>() == 7);
}

TEST_CASE("missing dataset fails with the path in the message") {
    const auto result = run("tune --task svc --data /no/such/file.csv");
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("/no/such/file.csv") != std::string::npos);
}

TEST_CASE("reps below one is a usage error") {
    const auto result =
        run("tune --task svc --data " + kData + " --reps 0");
    CHECK(result.exit_code == 64);
    CHECK(result.err.find("at least 1") != std::string::npos);
}

TEST_CASE("unknown task and missing task are usage errors") {
    CHECK(run("tune --task foo --data " + kData).exit_code == 64);
    CHECK(run("tune --data " + kData).exit_code == 64);
}

TEST_CASE("identical seeds give byte-identical outputs") {
    TempDir a("det_a"), b("det_b");
    const std::string common = "tune --task svc --data " + kData + " --seed 42" +
                               kQuickProtocol + "--reps 1 --c 1 10 " +
                               "--entanglement linear full --out ";
    REQUIRE(run(common + a.path.string()).exit_code == 0);
    REQUIRE(run(common + b.path.string()).exit_code == 0);
    CHECK(slurp(a.path / "report.json") == slurp(b.path / "report.json"));
    CHECK(slurp(a.path / "heatmap_svc_linear.csv") ==
          slurp(b.path / "heatmap_svc_linear.csv"));
    CHECK(slurp(a.path / "heatmap_svc_full.csv") ==
          slurp(b.path / "heatmap_svc_full.csv"));
}

TEST_CASE("svr train and predict round trip") {
    TempDir dir("svr_train");
    const auto train =
        run("train --task svr --data " + kData + " --out " + dir.path.string() +
            " --seed 3 --reps 1 --c 10 --epsilon 0.01 --entanglement full --quiet");
    REQUIRE(train.exit_code == 0);
    REQUIRE(fs::exists(dir.path / "model.json"));

    TempDir out_a("pred_a"), out_b("pred_b");
    const std::string predict_cmd = "predict --model " +
                                    (dir.path / "model.json").string() +
                                    " --data " + kData + " --quiet --out ";
    const auto first = run(predict_cmd + out_a.path.string());
    REQUIRE(first.exit_code == 0);
    const auto second = run(predict_cmd + out_b.path.string());
    REQUIRE(second.exit_code == 0);

    const std::string predictions = slurp(out_a.path / "predictions.csv");
    CHECK(predictions == slurp(out_b.path / "predictions.csv"));
    CHECK(predictions.find("element,predicted_sfe_mj_m2\r\n") == 0);
    CHECK(std::count(predictions.begin(), predictions.end(), '\n') == 22);

    // training-set predictions stay within the observed target range plus
    // the model's own slack
    std::istringstream lines(predictions);
    std::string line;
    std::getline(lines, line); // header
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        const double value = std::stod(line.substr(comma + 1));
        CHECK(value > -60.0);
        CHECK(value < 90.0);
        ++rows;
    }
    CHECK(rows == 21);
}

TEST_CASE("svc train emits labels on predict") {
    TempDir dir("svc_train");
    REQUIRE(run("train --task svc --data " + kData + " --out " +
                dir.path.string() +
                " --seed 5 --reps 2 --c 10 --entanglement circular --quiet")
                .exit_code == 0);
    TempDir out("svc_pred");
    REQUIRE(run("predict --model " + (dir.path / "model.json").string() +
                " --data " + kData + " --out " + out.path.string() + " --quiet")
                .exit_code == 0);
    const std::string predictions = slurp(out.path / "predictions.csv");
    CHECK(predictions.find("element,predicted_label\r\n") == 0);
    std::istringstream lines(predictions);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto comma = line.find(',');
        const std::string label = line.substr(comma + 1, 1);
        CHECK((label == "0" || label == "1"));
    }
}

TEST_CASE("predict rejects a model with a different feature width") {
    TempDir dir("width");
    REQUIRE(run("train --task svr --data " + kData + " --out " +
                dir.path.string() +
                " --reps 1 --c 1 --epsilon 0.01 --entanglement full --quiet")
                .exit_code == 0);
    // shrink the stored model to two features
    auto model = nlohmann::ordered_json::parse(slurp(dir.path / "model.json"));
    model["scaler"]["feat_min"] = std::vector<double>{0.0, 0.0};
    model["scaler"]["feat_max"] = std::vector<double>{1.0, 1.0};
    std::ofstream(dir.path / "model2.json") << model.dump(2);

    const auto result = run("predict --model " + (dir.path / "model2.json").string() +
                            " --data " + kData + " --quiet");
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("2 features") != std::string::npos);
    CHECK(result.err.find("3") != std::string::npos);
}

TEST_CASE("kernel dump has element headers and a unit diagonal") {
    TempDir full_dir("kernel_full"), circ_dir("kernel_circ");
    REQUIRE(run("kernel --data " + kData + " --reps 2 --entanglement full --out " +
                full_dir.path.string() + " --quiet")
                .exit_code == 0);
    REQUIRE(run("kernel --data " + kData +
                " --reps 2 --entanglement circular --out " +
                circ_dir.path.string() + " --quiet")
                .exit_code == 0);

    const std::string kernel = slurp(full_dir.path / "kernel.csv");
    CHECK(std::count(kernel.begin(), kernel.end(), '\n') == 22);
    CHECK(kernel.find("element,Sc,Ti,") == 0);
    std::istringstream lines(kernel);
    std::string line;
    std::getline(lines, line);
    int row = 0;
    while (std::getline(lines, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        std::istringstream fields(line);
        std::string field;
        std::getline(fields, field, ','); // element
        for (int col = 0; std::getline(fields, field, ','); ++col) {
            if (col == row) {
                CHECK(std::stod(field) == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
        ++row;
    }

    // the three-qubit pair sets coincide, so the files match byte for byte
    CHECK(kernel == slurp(circ_dir.path / "kernel.csv"));

    const auto empty = run("kernel --data /no/such.csv --quiet");
    CHECK(empty.exit_code == 1);
}

TEST_CASE("report summarizes a finished sweep") {
    TempDir dir("report");
    REQUIRE(run("tune --task svc --data " + kData + " --seed 1 --out " +
                dir.path.string() + kQuickProtocol + "--reps 1 --c 1")
                .exit_code == 0);
    const auto result = run("report " + (dir.path / "report.json").string());
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("task: svc") != std::string::npos);
    CHECK(result.out.find("best classification") != std::string::npos);

    CHECK(run("report /no/such/report.json").exit_code == 1);
}

TEST_CASE("config file values are used and flags override them") {
    TempDir dir("config");
    fs::create_directories(dir.path);
    const fs::path config_path = dir.path / "config.json";
    {
        nlohmann::ordered_json config;
        config["task"] = "svc";
        config["data"] = kData;
        config["seed"] = 11;
        config["grid"] = {{"c", {1.0}}, {"reps", {1}}, {"entanglement", {"linear"}}};
        config["protocol"] = {{"repeats", 2}, {"tests", 1}};
        std::ofstream(config_path) << config.dump(2);
    }
    TempDir out_a("cfg_a");
    const auto from_config = run("tune --config " + config_path.string() +
                                 " --out " + out_a.path.string() + " --quiet");
    REQUIRE(from_config.exit_code == 0);
    auto report = nlohmann::json::parse(slurp(out_a.path / "report.json"));
    CHECK(report.at("seed").get<int>() == 11);
    CHECK(report.at("results").size() == 1);

    TempDir out_b("cfg_b");
    const auto with_flag = run("tune --config " + config_path.string() +
                               " --seed 99 --out " + out_b.path.string() +
                               " --quiet");
    REQUIRE(with_flag.exit_code == 0);
    report = nlohmann::json::parse(slurp(out_b.path / "report.json"));
    CHECK(report.at("seed").get<int>() == 99);
}

TEST_CASE("quick qnn train writes a loss history") {
    TempDir dir("qnn_train");
    fs::create_directories(dir.path);
    const fs::path config_path = dir.path / "config.json";
    {
        nlohmann::ordered_json config;
        config["qnn"] = {{"epochs", 3}, {"learning_rate", 0.05}};
        std::ofstream(config_path) << config.dump(2);
    }
    const auto result =
        run("train --task hybrid-qnn --objective regression --config " +
            config_path.string() + " --data " + kData + " --out " +
            dir.path.string() + " --reps 1 --entanglement full --seed 2 --quiet");
    REQUIRE(result.exit_code == 0);
    const std::string history = slurp(dir.path / "loss_history.csv");
    CHECK(history.find("epoch,loss\r\n") == 0);
    CHECK(std::count(history.begin(), history.end(), '\n') == 4);
    CHECK(fs::exists(dir.path / "model.json"));

    TempDir out("qnn_pred");
    REQUIRE(run("predict --model " + (dir.path / "model.json").string() +
                " --data " + kData + " --out " + out.path.string() + " --quiet")
                .exit_code == 0);
    CHECK(slurp(out.path / "predictions.csv")
              .find("element,predicted_sfe_mj_m2\r\n") == 0);
}
