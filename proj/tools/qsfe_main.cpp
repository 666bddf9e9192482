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
//
// qsfe command line: tune | train | predict | kernel | report
//
// Exit codes: 0 success, 1 fatal error, 2 sweep finished with failed cells,
// 64 usage error.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsfe/experiment.hpp"
#include "qsfe/kernel.hpp"
#include "qsfe/metrics.hpp"
#include "qsfe/model_io.hpp"
#include "qsfe/rng.hpp"
#include "qsfe/svm.hpp"
#include "qsfe/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace qsfe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;

struct CliValues {
    std::string config;
    std::string task;
    std::string data;
    std::string out = "qsfe_out";
    std::string model;
    std::string objective;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::vector<int> reps;
    std::vector<double> c_values;
    std::vector<double> epsilons;
    std::vector<std::string> entanglements;
    std::string label_convention;
    double scale_max = -1;
    std::string protocol;
    int repeats = -1;
    int folds = -1;
    bool quiet = false;
};

struct RunConfig {
    TaskKind task = TaskKind::svc;
    Objective objective = Objective::regression;
    std::string data;
    std::string out = "qsfe_out";
    std::uint64_t seed = 0;
    int jobs = 0; // 0 = hardware concurrency
    GridSpec grid;
    Protocol protocol;
    RunSettings settings;
};

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

bool g_quiet = false;

void log_progress(const std::string& message) {
    if (!g_quiet) {
        std::cerr << "qsfe: " << message << "\n";
    }
}

ordered_json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open config file '" + path + "'");
    }
    try {
        ordered_json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("cannot parse config file '" + path + "': " + e.what());
    }
}

// Precedence: built-in defaults < config file < command-line flags.
RunConfig assemble_config(const CliValues& cli, const CLI::App* cmd,
                          bool task_required) {
    ordered_json file;
    if (!cli.config.empty()) {
        file = load_config_file(cli.config);
    }
    auto file_str = [&](const char* key) -> std::optional<std::string> {
        if (file.contains(key)) {
            return file.at(key).get<std::string>();
        }
        return std::nullopt;
    };

    RunConfig config;
    std::string task_name;
    if (const auto v = file_str("task")) {
        task_name = *v;
    }
    if (cmd->count("--task") > 0) {
        task_name = cli.task;
    }
    if (task_name.empty()) {
        if (task_required) {
            throw UsageError("--task is required (svc, svr, qnn or hybrid-qnn)");
        }
        task_name = "svc";
    }
    try {
        config.task = parse_task(task_name);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }

    config.grid = GridSpec::defaults_for(config.task);
    if (const auto v = file_str("data")) {
        config.data = *v;
    }
    if (const auto v = file_str("out")) {
        config.out = *v;
    }
    if (file.contains("seed")) {
        config.seed = file.at("seed").get<std::uint64_t>();
    }
    if (file.contains("jobs")) {
        config.jobs = file.at("jobs").get<int>();
    }
    if (file.contains("grid")) {
        const auto& grid = file.at("grid");
        if (grid.contains("c")) {
            config.grid.c_values = grid.at("c").get<std::vector<double>>();
        }
        if (grid.contains("epsilon")) {
            config.grid.epsilon_values =
                grid.at("epsilon").get<std::vector<double>>();
        }
        if (grid.contains("reps")) {
            config.grid.reps_values = grid.at("reps").get<std::vector<int>>();
        }
        if (grid.contains("entanglement")) {
            config.grid.patterns.clear();
            for (const auto& name : grid.at("entanglement")) {
                config.grid.patterns.push_back(
                    parse_entanglement(name.get<std::string>()));
            }
        }
    }
    if (file.contains("protocol")) {
        const auto& protocol = file.at("protocol");
        if (protocol.contains("scheme")) {
            const auto scheme = protocol.at("scheme").get<std::string>();
            if (scheme != "shuffle" && scheme != "kfold") {
                throw UsageError("protocol scheme must be shuffle or kfold");
            }
            config.protocol.scheme.kind = scheme == "shuffle"
                                              ? SplitScheme::Kind::shuffle
                                              : SplitScheme::Kind::kfold;
        }
        if (protocol.contains("fraction")) {
            config.protocol.scheme.fraction = protocol.at("fraction").get<double>();
        }
        if (protocol.contains("repeats")) {
            config.protocol.scheme.repeats = protocol.at("repeats").get<int>();
        }
        if (protocol.contains("folds")) {
            config.protocol.scheme.folds = protocol.at("folds").get<int>();
        }
        if (protocol.contains("tests")) {
            config.protocol.tests = protocol.at("tests").get<int>();
        }
    }
    if (const auto v = file_str("label_convention")) {
        config.settings.label_convention =
            *v == "dataset" ? LabelConvention::dataset : LabelConvention::methods;
    }
    if (file.contains("sfe_threshold")) {
        config.settings.sfe_threshold = file.at("sfe_threshold").get<double>();
    }
    if (file.contains("scale_max")) {
        config.settings.scale_max = file.at("scale_max").get<double>();
    }
    if (file.contains("svm")) {
        if (file.at("svm").contains("tol")) {
            config.settings.svm_tol = file.at("svm").at("tol").get<double>();
        }
        if (file.at("svm").contains("max_passes")) {
            config.settings.svm_max_passes =
                file.at("svm").at("max_passes").get<Eigen::Index>();
        }
    }
    if (file.contains("qnn")) {
        if (file.at("qnn").contains("epochs")) {
            config.settings.qnn_epochs = file.at("qnn").at("epochs").get<int>();
        }
        if (file.at("qnn").contains("learning_rate")) {
            config.settings.qnn_learning_rate =
                file.at("qnn").at("learning_rate").get<double>();
        }
    }
    if (const auto v = file_str("objective")) {
        config.objective = *v == "classification" ? Objective::classification
                                                  : Objective::regression;
    }

    // flag overrides
    if (cmd->count("--data") > 0) {
        config.data = cli.data;
    }
    if (cmd->count("--out") > 0) {
        config.out = cli.out;
    }
    if (cmd->count("--seed") > 0) {
        config.seed = cli.seed;
    }
    if (cmd->count("--jobs") > 0) {
        config.jobs = cli.jobs;
    }
    if (cmd->count("--reps") > 0) {
        config.grid.reps_values = cli.reps;
    }
    if (cmd->count("--c") > 0) {
        config.grid.c_values = cli.c_values;
    }
    if (cmd->count("--epsilon") > 0) {
        config.grid.epsilon_values = cli.epsilons;
    }
    if (cmd->count("--entanglement") > 0) {
        config.grid.patterns.clear();
        for (const auto& name : cli.entanglements) {
            try {
                config.grid.patterns.push_back(parse_entanglement(name));
            } catch (const ConfigError& e) {
                throw UsageError(e.what());
            }
        }
    }
    if (cmd->count("--label-convention") > 0) {
        if (cli.label_convention != "methods" && cli.label_convention != "dataset") {
            throw UsageError("--label-convention must be methods or dataset");
        }
        config.settings.label_convention = cli.label_convention == "dataset"
                                               ? LabelConvention::dataset
                                               : LabelConvention::methods;
    }
    if (cmd->count("--scale-max") > 0) {
        config.settings.scale_max = cli.scale_max;
    }
    if (cmd->count("--protocol") > 0) {
        if (cli.protocol != "shuffle" && cli.protocol != "kfold") {
            throw UsageError("--protocol must be shuffle or kfold");
        }
        config.protocol.scheme.kind = cli.protocol == "shuffle"
                                          ? SplitScheme::Kind::shuffle
                                          : SplitScheme::Kind::kfold;
    }
    if (cmd->count("--repeats") > 0) {
        config.protocol.scheme.repeats = cli.repeats;
    }
    if (cmd->count("--folds") > 0) {
        config.protocol.scheme.folds = cli.folds;
    }
    if (cmd->count("--objective") > 0) {
        if (cli.objective != "classification" && cli.objective != "regression") {
            throw UsageError("--objective must be classification or regression");
        }
        config.objective = cli.objective == "classification"
                               ? Objective::classification
                               : Objective::regression;
    }

    // validation shared by every command
    for (const int reps : config.grid.reps_values) {
        if (reps < 1) {
            throw UsageError("--reps values must be an integer and at least 1");
        }
    }
    for (const double c : config.grid.c_values) {
        if (!(c > 0)) {
            throw UsageError("--c values must be positive");
        }
    }
    for (const double eps : config.grid.epsilon_values) {
        if (eps < 0) {
            throw UsageError("--epsilon values must be non-negative");
        }
    }
    if (config.grid.patterns.empty() || config.grid.reps_values.empty() ||
        config.grid.c_values.empty() || config.grid.epsilon_values.empty()) {
        throw UsageError("grid lists must be non-empty");
    }
    if (!(config.settings.scale_max > 0)) {
        throw UsageError("--scale-max must be positive");
    }
    if (config.protocol.scheme.repeats < 1) {
        throw UsageError("--repeats must be at least 1");
    }
    if (config.protocol.scheme.folds < 2) {
        throw UsageError("--folds must be at least 2");
    }
    if (config.jobs < 0) {
        throw UsageError("--jobs must be non-negative");
    }
    if (config.jobs == 0) {
        config.jobs = int(std::max(1u, std::thread::hardware_concurrency()));
    }
    config.settings.jobs = config.jobs;
    return config;
}

// Single values for train/kernel, taken from the (possibly overridden) grid
// lists; multi-valued lists are a usage error there.
template <typename T>
T singleton(const std::vector<T>& values, const char* flag) {
    if (values.size() != 1) {
        throw UsageError(std::string(flag) +
                         " must hold exactly one value for this command");
    }
    return values.front();
}

std::vector<Sample> load_dataset(const RunConfig& config, SfePolicy policy) {
    if (config.data.empty()) {
        throw UsageError("--data is required");
    }
    return load_table(config.data, policy);
}

int cmd_tune(const CliValues& cli, const CLI::App* cmd) {
    const RunConfig config = assemble_config(cli, cmd, true);
    const auto samples = load_dataset(config, SfePolicy::required);
    log_progress("loaded " + std::to_string(samples.size()) + " samples from " +
                 config.data);

    const auto start = std::chrono::steady_clock::now();
    const Report report = run_grid(config.task, config.grid, samples,
                                   config.protocol, config.settings, config.seed,
                                   config.data);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    emit_outputs(report, config.out);

    std::size_t failed = 0;
    for (const auto& r : report.results) {
        failed += r.failed ? 1 : 0;
    }
    log_progress("evaluated " + std::to_string(report.results.size()) +
                 " cells in " + format_number(seconds) + " s (" +
                 std::to_string(failed) + " failed)");
    for (const auto& best : report.best) {
        const auto& r = report.results[std::size_t(best.index)];
        log_progress(std::string("best ") +
                     (best.objective == Objective::classification
                          ? "classification"
                          : "regression") +
                     " cell: mean " + format_number(r.mean) + " at C=" +
                     format_number(r.cell.c) + " reps=" +
                     std::to_string(r.cell.reps) + " entanglement=" +
                     to_string(r.cell.pattern) +
                     (r.cell.epsilon > 0
                          ? " epsilon=" + format_number(r.cell.epsilon)
                          : ""));
    }
    log_progress("outputs written to " + config.out);
    return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_train(const CliValues& cli, const CLI::App* cmd) {
    const RunConfig config = assemble_config(cli, cmd, true);
    auto samples = load_dataset(config, SfePolicy::required);
    derive_labels(samples, config.settings.sfe_threshold,
                  config.settings.label_convention);
    const Eigen::MatrixXd features = features_of(samples);
    const auto scaler = fit_scaler(features, config.settings.scale_max);
    const Eigen::MatrixXd scaled = apply_scaler(scaler, features);

    const int reps = singleton(config.grid.reps_values, "--reps");
    const EntanglementPattern pattern =
        singleton(config.grid.patterns, "--entanglement");

    ModelBundle bundle;
    bundle.task = config.task;
    bundle.scaler = scaler;

    fs::create_directories(config.out);
    const std::string model_path = (fs::path(config.out) / "model.json").string();

    if (config.task == TaskKind::svc || config.task == TaskKind::svr) {
        const FeatureMapSpec spec{int(features.cols()), reps, pattern};
        const Eigen::MatrixXd K = gram_matrix(scaled, spec, config.jobs).values;
        SvmOptions<double> opts;
        opts.C = singleton(config.grid.c_values, "--c");
        opts.tol = config.settings.svm_tol;
        opts.max_passes = config.settings.svm_max_passes;
        bundle.feature_map = spec;
        bundle.training_features = features;
        for (const auto& s : samples) {
            bundle.training_elements.push_back(s.element);
        }
        bundle.c = opts.C;
        if (config.task == TaskKind::svc) {
            bundle.objective = Objective::classification;
            const Eigen::VectorXi labels = labels_of(samples);
            Eigen::VectorXd y(labels.size());
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                y[i] = labels[i] == 1 ? 1.0 : -1.0;
            }
            const auto model = train_svc(K, y, opts);
            bundle.dual_coefs = model.dual_coefs;
            bundle.bias = model.bias;
            log_progress("svc trained: " +
                         std::to_string(model.support_indices.size()) +
                         " support vectors, kkt gap " +
                         format_number(model.kkt_gap));
        } else {
            bundle.objective = Objective::regression;
            opts.epsilon = singleton(config.grid.epsilon_values, "--epsilon");
            bundle.epsilon = opts.epsilon;
            const auto model = train_svr(K, targets_of(samples), opts);
            bundle.dual_coefs = model.dual_coefs;
            bundle.bias = model.bias;
            log_progress("svr trained: " +
                         std::to_string(model.support_indices.size()) +
                         " support vectors, kkt gap " +
                         format_number(model.kkt_gap));
        }
    } else {
        bundle.objective = config.objective;
        HybridModeld model;
        {
            // same construction as the sweep harness
            FeatureMapSpec fm{int(features.cols()), reps, pattern};
            AnsatzSpec ansatz{int(features.cols()), reps, pattern};
            model.qnn.feature_map = fm;
            model.qnn.ansatz = ansatz;
            model.qnn.weights =
                init_weights(ansatz, mix_seed({config.seed, 0x7E7AULL}));
            model.qnn.observable = PauliZString::all(int(features.cols()));
            model.task = config.objective == Objective::classification
                             ? Task::classification
                             : Task::regression;
            if (config.task == TaskKind::hybrid_qnn) {
                Rng rng(mix_seed({config.seed, 0x7E7AULL, 0xAFF1ULL}));
                model.pre.weight.resize(features.cols(), features.cols());
                const double scale = 1.0 / std::sqrt(double(features.cols()));
                for (Eigen::Index c2 = 0; c2 < model.pre.weight.cols(); ++c2) {
                    for (Eigen::Index r2 = 0; r2 < model.pre.weight.rows(); ++r2) {
                        model.pre.weight(r2, c2) = rng.uniform(-1.0, 1.0) * scale;
                    }
                }
                model.pre.bias = Eigen::VectorXd::Zero(features.cols());
                model.angle_clamp = true;
            } else {
                model.pre = AffineLayer<double>::identity(features.cols());
                model.angle_clamp = false;
            }
            model.post.weight = Eigen::MatrixXd::Identity(1, 1);
            model.post.bias = Eigen::VectorXd::Zero(1);
        }
        TrainConfig train_config;
        train_config.epochs = config.settings.qnn_epochs;
        train_config.learning_rate = config.settings.qnn_learning_rate;
        train_config.seed = config.seed;
        if (config.task == TaskKind::qnn) {
            train_config.freeze_pre = true;
            train_config.freeze_post = true;
        }

        std::vector<double> history;
        if (config.objective == Objective::classification) {
            const Eigen::VectorXd targets = labels_of(samples).cast<double>();
            history = train_hybrid(scaled, targets, model, train_config);
        } else {
            const Eigen::VectorXd raw = targets_of(samples);
            bundle.target_scaler = TargetScaler<double>::fit(raw);
            bundle.has_target_scaler = true;
            Eigen::VectorXd targets(raw.size());
            for (Eigen::Index i = 0; i < raw.size(); ++i) {
                targets[i] = bundle.target_scaler.scale(raw[i]);
            }
            history = train_hybrid(scaled, targets, model, train_config);
        }
        bundle.hybrid = model;

        std::ofstream loss_csv(fs::path(config.out) / "loss_history.csv",
                               std::ios::binary | std::ios::trunc);
        loss_csv << "epoch,loss\r\n";
        for (std::size_t e = 0; e < history.size(); ++e) {
            loss_csv << (e + 1) << "," << format_number(history[e]) << "\r\n";
        }
        log_progress("trained " + std::string(to_string(config.task)) + " for " +
                     std::to_string(history.size()) + " epochs, final loss " +
                     format_number(history.back()));
    }

    save_model(model_path, bundle);
    log_progress("model written to " + model_path);
    return kExitOk;
}

int cmd_predict(const CliValues& cli, const CLI::App* cmd) {
    const RunConfig config = assemble_config(cli, cmd, false);
    if (cli.model.empty()) {
        throw UsageError("--model is required");
    }
    const auto bundle = load_model(cli.model);
    const auto samples = load_dataset(config, SfePolicy::optional);
    const Eigen::MatrixXd features = features_of(samples);
    if (features.cols() != bundle.scaler.feat_min.size()) {
        throw ShapeError("predict: model expects " +
                         std::to_string(bundle.scaler.feat_min.size()) +
                         " features, dataset has " +
                         std::to_string(features.cols()));
    }
    const auto output = model_predict(bundle, features);

    fs::create_directories(config.out);
    const fs::path path = fs::path(config.out) / "predictions.csv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << (output.is_label ? "element,predicted_label"
                            : "element,predicted_sfe_mj_m2")
        << "\r\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (output.is_label) {
            out << samples[i].element << ","
                << int(output.values[Eigen::Index(i)]) << "\r\n";
        } else {
            out << samples[i].element << ","
                << format_number(output.values[Eigen::Index(i)]) << "\r\n";
        }
    }
    log_progress("predictions written to " + path.string());
    return kExitOk;
}

int cmd_kernel(const CliValues& cli, const CLI::App* cmd) {
    const RunConfig config = assemble_config(cli, cmd, false);
    const auto samples = load_dataset(config, SfePolicy::optional);
    const Eigen::MatrixXd features = features_of(samples);
    const auto scaler = fit_scaler(features, config.settings.scale_max);
    const Eigen::MatrixXd scaled = apply_scaler(scaler, features);
    const FeatureMapSpec spec{int(features.cols()),
                              singleton(config.grid.reps_values, "--reps"),
                              singleton(config.grid.patterns, "--entanglement")};
    const auto gram = gram_matrix(scaled, spec, config.jobs);

    fs::create_directories(config.out);
    const fs::path path = fs::path(config.out) / "kernel.csv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << "element";
    for (const auto& s : samples) {
        out << "," << s.element;
    }
    out << "\r\n";
    for (Eigen::Index i = 0; i < gram.values.rows(); ++i) {
        out << samples[std::size_t(i)].element;
        for (Eigen::Index j = 0; j < gram.values.cols(); ++j) {
            out << "," << format_number(gram.values(i, j));
        }
        out << "\r\n";
    }
    log_progress("kernel matrix written to " + path.string());
    return kExitOk;
}

int cmd_report(const std::string& path) {
    const Report report = load_report(path);
    std::cout << "task: " << to_string(report.task) << "\n";
    std::cout << "tool version: " << report.tool_version << "\n";
    std::cout << "seed: " << report.seed << "\n";
    std::cout << "dataset: " << report.dataset_path << " ("
              << report.dataset_fingerprint << ")\n";
    std::size_t failed = 0;
    for (const auto& r : report.results) {
        failed += r.failed ? 1 : 0;
    }
    std::cout << "cells: " << report.results.size() << " (" << failed
              << " failed)\n";
    for (const auto& best : report.best) {
        const auto& r = report.results[std::size_t(best.index)];
        std::cout << "best "
                  << (best.objective == Objective::classification
                          ? "classification"
                          : "regression")
                  << ": mean " << format_number(r.mean) << " +- "
                  << format_number(r.stddev) << " | C=" << format_number(r.cell.c)
                  << " reps=" << r.cell.reps
                  << " entanglement=" << to_string(r.cell.pattern);
        if (r.cell.epsilon > 0) {
            std::cout << " epsilon=" << format_number(r.cell.epsilon);
        }
        if (best.tie_break_applied) {
            std::cout << " (tie broken)";
        }
        std::cout << "\n";
    }
    return kExitOk;
}

void add_common_flags(CLI::App* cmd, CliValues& cli) {
    cmd->add_option("--config", cli.config, "JSON config file (flags override it)");
    cmd->add_option("--task", cli.task, "svc, svr, qnn or hybrid-qnn");
    cmd->add_option("--data", cli.data, "dataset CSV path");
    cmd->add_option("--out", cli.out, "output directory (default qsfe_out)");
    cmd->add_option("--seed", cli.seed, "random seed (default 0)");
    cmd->add_option("--jobs", cli.jobs,
                    "worker threads, 0 = all cores (default 0)");
    cmd->add_option("--reps", cli.reps, "circuit depth values (default task grid)");
    cmd->add_option("--c", cli.c_values, "SVM C values (default task grid)");
    cmd->add_option("--epsilon", cli.epsilons,
                    "SVR epsilon values (default task grid)");
    cmd->add_option("--entanglement", cli.entanglements,
                    "entanglement patterns (default task grid)");
    cmd->add_option("--label-convention", cli.label_convention,
                    "methods (SFE above threshold is 0) or dataset (default methods)");
    cmd->add_option("--scale-max", cli.scale_max,
                    "upper end of the feature scaling range in radians (default pi)");
    cmd->add_option("--protocol", cli.protocol, "shuffle or kfold (default shuffle)");
    cmd->add_option("--repeats", cli.repeats,
                    "shuffle-split repeats per test (default 20)");
    cmd->add_option("--folds", cli.folds, "k-fold fold count (default 5)");
    cmd->add_option("--objective", cli.objective,
                    "classification or regression for the QNN tasks "
                    "(default regression)");
    cmd->add_flag("--quiet", cli.quiet, "suppress progress output");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-kernel and quantum-neural-network models for "
                 "stacking-fault-energy prediction"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CliValues cli;
    std::string report_path;

    CLI::App* tune = app.add_subcommand(
        "tune", "hyperparameter sweep with cross-validated scoring");
    add_common_flags(tune, cli);
    CLI::App* train =
        app.add_subcommand("train", "train one model on the full dataset");
    add_common_flags(train, cli);
    CLI::App* predict =
        app.add_subcommand("predict", "predict with a serialized model");
    add_common_flags(predict, cli);
    predict->add_option("--model", cli.model, "model.json produced by train");
    CLI::App* kernel = app.add_subcommand(
        "kernel", "dump the Gram matrix of the dataset as CSV");
    add_common_flags(kernel, cli);
    CLI::App* report =
        app.add_subcommand("report", "summarize a report.json to stdout");
    report->add_option("path", report_path, "path to report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "qsfe: " << e.what() << "\n";
        return kExitUsage;
    }
    g_quiet = cli.quiet;

    try {
        if (tune->parsed()) {
            return cmd_tune(cli, tune);
        }
        if (train->parsed()) {
            return cmd_train(cli, train);
        }
        if (predict->parsed()) {
            return cmd_predict(cli, predict);
        }
        if (kernel->parsed()) {
            return cmd_kernel(cli, kernel);
        }
        if (report->parsed()) {
            return cmd_report(report_path);
        }
    } catch (const UsageError& e) {
        std::cerr << "qsfe: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "qsfe: " << e.what() << "\n";
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << "qsfe: unexpected error: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitUsage;
}
