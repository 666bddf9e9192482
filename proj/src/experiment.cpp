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
#include "qsfe/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qsfe/kernel.hpp"
#include "qsfe/metrics.hpp"
#include "qsfe/rng.hpp"
#include "qsfe/svm.hpp"
#include "qsfe/version.hpp"

namespace qsfe {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const char* to_string(TaskKind task) {
    switch (task) {
    case TaskKind::svc:
        return "svc";
    case TaskKind::svr:
        return "svr";
    case TaskKind::qnn:
        return "qnn";
    case TaskKind::hybrid_qnn:
        return "hybrid-qnn";
    }
    return "?";
}

TaskKind parse_task(const std::string& name) {
    if (name == "svc") {
        return TaskKind::svc;
    }
    if (name == "svr") {
        return TaskKind::svr;
    }
    if (name == "qnn") {
        return TaskKind::qnn;
    }
    if (name == "hybrid-qnn") {
        return TaskKind::hybrid_qnn;
    }
    throw ConfigError("unknown task '" + name +
                      "' (expected svc, svr, qnn or hybrid-qnn)");
}

GridSpec GridSpec::defaults_for(TaskKind task) {
    GridSpec grid;
    switch (task) {
    case TaskKind::svc:
        grid.epsilon_values = {0.0};
        break;
    case TaskKind::svr:
        break;
    case TaskKind::qnn:
    case TaskKind::hybrid_qnn:
        // The QNN studies vary only the depth; feature-map and ansatz
        // repetitions are tied to the same l.
        grid.c_values = {1.0};
        grid.epsilon_values = {0.0};
        grid.reps_values = {1, 2, 3};
        grid.patterns = {EntanglementPattern::full};
        break;
    }
    return grid;
}

std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

namespace {

int pattern_rank(EntanglementPattern pattern) {
    switch (pattern) {
    case EntanglementPattern::circular:
        return 0;
    case EntanglementPattern::full:
        return 1;
    case EntanglementPattern::linear:
        return 2;
    }
    return 3;
}

std::vector<CellParams> enumerate_cells(TaskKind task, const GridSpec& grid) {
    std::vector<CellParams> cells;
    switch (task) {
    case TaskKind::svc:
        for (const auto pattern : grid.patterns) {
            for (const int reps : grid.reps_values) {
                for (const double c : grid.c_values) {
                    cells.push_back(
                        {Objective::classification, c, 0.0, reps, pattern});
                }
            }
        }
        break;
    case TaskKind::svr:
        for (const auto pattern : grid.patterns) {
            for (const int reps : grid.reps_values) {
                for (const double c : grid.c_values) {
                    for (const double eps : grid.epsilon_values) {
                        cells.push_back(
                            {Objective::regression, c, eps, reps, pattern});
                    }
                }
            }
        }
        break;
    case TaskKind::qnn:
    case TaskKind::hybrid_qnn:
        for (const auto objective :
             {Objective::classification, Objective::regression}) {
            for (const auto pattern : grid.patterns) {
                for (const int reps : grid.reps_values) {
                    cells.push_back({objective, 0.0, 0.0, reps, pattern});
                }
            }
        }
        break;
    }
    if (cells.empty()) {
        throw ConfigError("run_grid: grid has no cells");
    }
    return cells;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v,
                     const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    }
    return out;
}

Eigen::VectorXi take(const Eigen::VectorXi& v,
                     const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    }
    return out;
}

struct SplitContext {
    const CellParams& cell;
    const RunSettings& settings;
    const Eigen::MatrixXd& features;    // raw, all samples
    const Eigen::VectorXd& sfe;         // all samples
    const Eigen::VectorXi& labels;      // all samples
    const SplitPlan& plan;
    std::uint64_t theta_seed = 0;
    TrialResult& result;                // out-of-fold aggregation target
    std::vector<double>& pearsons;
};

HybridModeld build_qnn_model(TaskKind task, const CellParams& cell, int n_features,
                             std::uint64_t theta_seed) {
    FeatureMapSpec fm{n_features, cell.reps, cell.pattern};
    AnsatzSpec ansatz{n_features, cell.reps, cell.pattern};
    HybridModeld model;
    model.qnn.feature_map = fm;
    model.qnn.ansatz = ansatz;
    model.qnn.weights = init_weights(ansatz, theta_seed);
    model.qnn.observable = PauliZString::all(n_features);
    model.task = cell.objective == Objective::classification
                     ? Task::classification
                     : Task::regression;
    if (task == TaskKind::hybrid_qnn) {
        Rng rng(mix_seed({theta_seed, 0xAFF1ULL}));
        model.pre.weight.resize(n_features, n_features);
        const double scale = 1.0 / std::sqrt(double(n_features));
        for (Eigen::Index c = 0; c < model.pre.weight.cols(); ++c) {
            for (Eigen::Index r = 0; r < model.pre.weight.rows(); ++r) {
                model.pre.weight(r, c) = rng.uniform(-1.0, 1.0) * scale;
            }
        }
        model.pre.bias = Eigen::VectorXd::Zero(n_features);
        model.angle_clamp = true;
    } else {
        model.pre = AffineLayer<double>::identity(n_features);
        model.angle_clamp = false;
    }
    model.post.weight = Eigen::MatrixXd::Identity(1, 1);
    model.post.bias = Eigen::VectorXd::Zero(1);
    return model;
}

TrainConfig qnn_train_config(TaskKind task, const RunSettings& settings,
                             std::uint64_t theta_seed) {
    TrainConfig config;
    config.epochs = settings.qnn_epochs;
    config.learning_rate = settings.qnn_learning_rate;
    config.seed = theta_seed;
    if (task == TaskKind::qnn) {
        config.freeze_pre = true;
        config.freeze_post = true;
    }
    return config;
}

double run_split_svm(TaskKind task, const SplitContext& ctx) {
    const auto scaler =
        fit_scaler(take_rows(ctx.features, ctx.plan.train), ctx.settings.scale_max);
    const Eigen::MatrixXd x_train =
        apply_scaler(scaler, take_rows(ctx.features, ctx.plan.train));
    const Eigen::MatrixXd x_val =
        apply_scaler(scaler, take_rows(ctx.features, ctx.plan.validation));
    const FeatureMapSpec spec{static_cast<int>(ctx.features.cols()), ctx.cell.reps,
                              ctx.cell.pattern};
    const Eigen::MatrixXd k_train = gram_matrix(x_train, spec).values;
    const Eigen::MatrixXd k_cross = cross_matrix(x_val, x_train, spec).values;

    SvmOptions<double> opts;
    opts.C = ctx.cell.c;
    opts.epsilon = ctx.cell.epsilon;
    opts.tol = ctx.settings.svm_tol;
    opts.max_passes = ctx.settings.svm_max_passes;

    if (task == TaskKind::svc) {
        const Eigen::VectorXi y01 = take(ctx.labels, ctx.plan.train);
        Eigen::VectorXd y(y01.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            y[i] = y01[i] == 1 ? 1.0 : -1.0;
        }
        const auto model = train_svc(k_train, y, opts);
        const auto prediction = predict_svc(model, k_cross);
        Eigen::VectorXi predicted(prediction.labels.size());
        for (Eigen::Index i = 0; i < predicted.size(); ++i) {
            predicted[i] = prediction.labels[i] == 1 ? 1 : 0;
            const Eigen::Index sample = ctx.plan.validation[size_t(i)];
            ctx.result.oof_votes_total[sample] += 1;
            ctx.result.oof_votes_label1[sample] += predicted[i];
        }
        return accuracy(predicted, take(ctx.labels, ctx.plan.validation));
    }

    const Eigen::VectorXd t_train = take(ctx.sfe, ctx.plan.train);
    const auto model = train_svr(k_train, t_train, opts);
    const Eigen::VectorXd predicted = predict_svr(model, k_cross);
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        const Eigen::Index sample = ctx.plan.validation[size_t(i)];
        ctx.result.oof_prediction_sum[sample] += predicted[i];
        ctx.result.oof_prediction_count[sample] += 1;
    }
    const auto scores =
        r2_scores(predicted, take(ctx.sfe, ctx.plan.validation));
    ctx.pearsons.push_back(scores.pearson_r2);
    return scores.coefficient_of_determination;
}

double run_split_qnn(TaskKind task, const SplitContext& ctx) {
    const auto scaler =
        fit_scaler(take_rows(ctx.features, ctx.plan.train), ctx.settings.scale_max);
    const Eigen::MatrixXd x_train =
        apply_scaler(scaler, take_rows(ctx.features, ctx.plan.train));
    const Eigen::MatrixXd x_val =
        apply_scaler(scaler, take_rows(ctx.features, ctx.plan.validation));
    auto model = build_qnn_model(task, ctx.cell,
                                 static_cast<int>(ctx.features.cols()),
                                 ctx.theta_seed);
    const auto config = qnn_train_config(task, ctx.settings, ctx.theta_seed);

    if (ctx.cell.objective == Objective::classification) {
        const Eigen::VectorXi y01 = take(ctx.labels, ctx.plan.train);
        const Eigen::VectorXd targets = y01.cast<double>();
        train_hybrid(x_train, targets, model, config);
        Eigen::VectorXi predicted(x_val.rows());
        for (Eigen::Index i = 0; i < x_val.rows(); ++i) {
            predicted[i] = hybrid_classify(x_val.row(i).transpose(), model);
            const Eigen::Index sample = ctx.plan.validation[size_t(i)];
            ctx.result.oof_votes_total[sample] += 1;
            ctx.result.oof_votes_label1[sample] += predicted[i];
        }
        return accuracy(predicted, take(ctx.labels, ctx.plan.validation));
    }

    const Eigen::VectorXd t_train = take(ctx.sfe, ctx.plan.train);
    const auto target_scaler = TargetScaler<double>::fit(t_train);
    Eigen::VectorXd scaled(t_train.size());
    for (Eigen::Index i = 0; i < scaled.size(); ++i) {
        scaled[i] = target_scaler.scale(t_train[i]);
    }
    train_hybrid(x_train, scaled, model, config);
    Eigen::VectorXd predicted(x_val.rows());
    for (Eigen::Index i = 0; i < x_val.rows(); ++i) {
        predicted[i] = target_scaler.unscale(
            hybrid_forward(x_val.row(i).transpose(), model));
        const Eigen::Index sample = ctx.plan.validation[size_t(i)];
        ctx.result.oof_prediction_sum[sample] += predicted[i];
        ctx.result.oof_prediction_count[sample] += 1;
    }
    const auto scores = r2_scores(predicted, take(ctx.sfe, ctx.plan.validation));
    ctx.pearsons.push_back(scores.pearson_r2);
    return scores.coefficient_of_determination;
}

} // namespace

TrialResult evaluate_cell(TaskKind task, const CellParams& cell,
                          const std::vector<Sample>& samples,
                          const Protocol& protocol, const RunSettings& settings,
                          std::uint64_t seed, std::uint64_t cell_stream) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    TrialResult result;
    result.cell = cell;
    result.oof_prediction_sum = Eigen::VectorXd::Zero(m);
    result.oof_prediction_count = Eigen::VectorXi::Zero(m);
    result.oof_votes_label1 = Eigen::VectorXi::Zero(m);
    result.oof_votes_total = Eigen::VectorXi::Zero(m);

    const Eigen::MatrixXd features = features_of(samples);
    const Eigen::VectorXd sfe = targets_of(samples);
    Eigen::VectorXi labels = Eigen::VectorXi::Zero(m);
    if (cell.objective == Objective::classification) {
        labels = labels_of(samples);
    }

    std::vector<double> pearsons;
    try {
        if (protocol.tests < 1) {
            throw ConfigError("protocol: tests must be at least 1");
        }
        for (int test = 0; test < protocol.tests; ++test) {
            // Split plans depend on the seed and test only, so every cell is
            // scored on the same folds.
            const std::uint64_t split_seed =
                mix_seed({seed, 0x53504C49ULL, std::uint64_t(test)});
            const auto plans = make_splits(m, protocol.scheme, split_seed);
            double test_sum = 0;
            for (std::size_t s = 0; s < plans.size(); ++s) {
                SplitContext ctx{cell,
                                 settings,
                                 features,
                                 sfe,
                                 labels,
                                 plans[s],
                                 mix_seed({seed, 0x7E7AULL, cell_stream,
                                           std::uint64_t(test), std::uint64_t(s)}),
                                 result,
                                 pearsons};
                const double score =
                    (task == TaskKind::svc || task == TaskKind::svr)
                        ? run_split_svm(task, ctx)
                        : run_split_qnn(task, ctx);
                result.split_scores.push_back(score);
                test_sum += score;
            }
            result.test_means.push_back(test_sum / double(plans.size()));
        }
        double sum = 0;
        for (const double score : result.split_scores) {
            sum += score;
        }
        result.mean = sum / double(result.split_scores.size());
        double var = 0;
        for (const double score : result.split_scores) {
            var += (score - result.mean) * (score - result.mean);
        }
        result.stddev = std::sqrt(var / double(result.split_scores.size()));
        if (!pearsons.empty()) {
            double psum = 0;
            for (const double p : pearsons) {
                psum += p;
            }
            result.pearson_mean = psum / double(pearsons.size());
        }
    } catch (const Error& e) {
        result.failed = true;
        result.failure_reason = e.what();
        result.split_scores.clear();
        result.test_means.clear();
        result.mean = 0;
        result.stddev = 0;
        result.pearson_mean = 0;
    }
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  t0)
            .count();
    return result;
}

namespace {

// Higher mean wins; ties fall to smaller reps, then smaller C, then
// circular < full < linear, then smaller epsilon.
bool cell_preferred(const TrialResult& a, const TrialResult& b) {
    if (a.mean != b.mean) {
        return a.mean > b.mean;
    }
    if (a.cell.reps != b.cell.reps) {
        return a.cell.reps < b.cell.reps;
    }
    if (a.cell.c != b.cell.c) {
        return a.cell.c < b.cell.c;
    }
    if (pattern_rank(a.cell.pattern) != pattern_rank(b.cell.pattern)) {
        return pattern_rank(a.cell.pattern) < pattern_rank(b.cell.pattern);
    }
    return a.cell.epsilon < b.cell.epsilon;
}

} // namespace

Report run_grid(TaskKind task, const GridSpec& grid,
                const std::vector<Sample>& samples, const Protocol& protocol,
                const RunSettings& settings, std::uint64_t seed,
                const std::string& dataset_path) {
    if (samples.empty()) {
        throw ConfigError("run_grid: empty dataset");
    }
    std::vector<Sample> labeled = samples;
    derive_labels(labeled, settings.sfe_threshold, settings.label_convention);

    const auto cells = enumerate_cells(task, grid);
    std::vector<TrialResult> results(cells.size());
    detail::parallel_for_index(
        static_cast<Eigen::Index>(cells.size()), settings.jobs,
        [&](Eigen::Index i) {
            results[size_t(i)] =
                evaluate_cell(task, cells[size_t(i)], labeled, protocol,
                              settings, seed, std::uint64_t(i));
        });

    Report report;
    report.task = task;
    report.grid = grid;
    report.protocol = protocol;
    report.settings = settings;
    report.seed = seed;
    report.dataset_path = dataset_path;
    report.dataset_fingerprint =
        dataset_path.empty() ? "unavailable" : file_fingerprint(dataset_path);
    for (const auto& sample : labeled) {
        report.elements.push_back(sample.element);
    }
    report.actual_sfe = targets_of(labeled);
    report.actual_labels = labels_of(labeled);
    report.results = std::move(results);
    report.tool_version = kVersion;

    std::size_t failed = 0;
    for (const auto& r : report.results) {
        failed += r.failed ? 1 : 0;
    }
    if (failed == report.results.size()) {
        throw TrainingError("run_grid: all " + std::to_string(failed) +
                            " cells failed; first reason: " +
                            report.results.front().failure_reason);
    }

    for (const auto objective :
         {Objective::classification, Objective::regression}) {
        Eigen::Index best_index = -1;
        bool tie = false;
        for (std::size_t i = 0; i < report.results.size(); ++i) {
            const auto& r = report.results[i];
            if (r.failed || r.cell.objective != objective) {
                continue;
            }
            if (best_index < 0) {
                best_index = static_cast<Eigen::Index>(i);
                continue;
            }
            const auto& current = report.results[size_t(best_index)];
            if (r.mean == current.mean) {
                tie = true;
            }
            if (cell_preferred(r, current)) {
                best_index = static_cast<Eigen::Index>(i);
            }
        }
        if (best_index >= 0) {
            report.best.push_back({objective, best_index, tie});
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output emission
// ---------------------------------------------------------------------------

namespace {

const char* to_string(Objective objective) {
    return objective == Objective::classification ? "classification"
                                                  : "regression";
}

Objective parse_objective(const std::string& name) {
    if (name == "classification") {
        return Objective::classification;
    }
    if (name == "regression") {
        return Objective::regression;
    }
    throw ConfigError("unknown objective '" + name + "'");
}

// RFC 4180: CRLF record separator; fields with commas/quotes/newlines are
// quoted with doubled inner quotes.
class CsvWriter {
  public:
    void field(const std::string& text) {
        if (!line_.empty()) {
            line_ += ',';
        }
        if (text.find_first_of(",\"\r\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : text) {
                if (c == '"') {
                    quoted += "\"\"";
                } else {
                    quoted += c;
                }
            }
            quoted += '"';
            line_ += quoted;
        } else {
            line_ += text;
        }
    }
    void field(double value) { field(format_number(value)); }
    void field(int value) { field(std::to_string(value)); }
    void empty_field() { field(std::string()); }
    void end_row() {
        body_ += line_;
        body_ += "\r\n";
        line_.clear();
    }
    const std::string& str() const { return body_; }

  private:
    std::string line_;
    std::string body_;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

ordered_json grid_to_json(const GridSpec& grid) {
    ordered_json j;
    j["c"] = grid.c_values;
    j["epsilon"] = grid.epsilon_values;
    j["reps"] = grid.reps_values;
    ordered_json patterns = ordered_json::array();
    for (const auto p : grid.patterns) {
        patterns.push_back(to_string(p));
    }
    j["entanglement"] = patterns;
    return j;
}

GridSpec grid_from_json(const ordered_json& j) {
    GridSpec grid;
    grid.c_values = j.at("c").get<std::vector<double>>();
    grid.epsilon_values = j.at("epsilon").get<std::vector<double>>();
    grid.reps_values = j.at("reps").get<std::vector<int>>();
    grid.patterns.clear();
    for (const auto& p : j.at("entanglement")) {
        grid.patterns.push_back(parse_entanglement(p.get<std::string>()));
    }
    return grid;
}

ordered_json report_to_json(const Report& report) {
    ordered_json j;
    j["schema_version"] = 1;
    j["tool_version"] = report.tool_version;
    j["task"] = to_string(report.task);
    j["seed"] = report.seed;
    j["dataset"] = {{"path", report.dataset_path},
                    {"fingerprint", report.dataset_fingerprint},
                    {"rows", report.elements.size()}};
    ordered_json protocol;
    protocol["scheme"] = report.protocol.scheme.kind == SplitScheme::Kind::shuffle
                             ? "shuffle"
                             : "kfold";
    protocol["fraction"] = report.protocol.scheme.fraction;
    protocol["repeats"] = report.protocol.scheme.repeats;
    protocol["folds"] = report.protocol.scheme.folds;
    protocol["tests"] = report.protocol.tests;
    j["protocol"] = protocol;
    ordered_json settings;
    settings["label_convention"] =
        report.settings.label_convention == LabelConvention::methods ? "methods"
                                                                     : "dataset";
    settings["sfe_threshold"] = report.settings.sfe_threshold;
    settings["scale_max"] = report.settings.scale_max;
    settings["svm_tol"] = report.settings.svm_tol;
    settings["svm_max_passes"] = report.settings.svm_max_passes;
    settings["qnn_epochs"] = report.settings.qnn_epochs;
    settings["qnn_learning_rate"] = report.settings.qnn_learning_rate;
    j["settings"] = settings;
    j["grid"] = grid_to_json(report.grid);
    j["elements"] = report.elements;
    j["actual_sfe"] =
        std::vector<double>(report.actual_sfe.data(),
                            report.actual_sfe.data() + report.actual_sfe.size());
    j["actual_labels"] = std::vector<int>(
        report.actual_labels.data(),
        report.actual_labels.data() + report.actual_labels.size());

    ordered_json results = ordered_json::array();
    for (const auto& r : report.results) {
        ordered_json cell;
        cell["objective"] = to_string(r.cell.objective);
        cell["C"] = r.cell.c;
        cell["epsilon"] = r.cell.epsilon;
        cell["reps"] = r.cell.reps;
        cell["entanglement"] = to_string(r.cell.pattern);
        cell["failed"] = r.failed;
        if (r.failed) {
            cell["failure_reason"] = r.failure_reason;
        } else {
            cell["mean"] = r.mean;
            cell["stddev"] = r.stddev;
            cell["test_means"] = r.test_means;
            cell["split_scores"] = r.split_scores;
            if (r.cell.objective == Objective::regression) {
                cell["pearson_r2_mean"] = r.pearson_mean;
            }
        }
        results.push_back(cell);
    }
    j["results"] = results;

    ordered_json best = ordered_json::array();
    for (const auto& b : report.best) {
        best.push_back({{"objective", to_string(b.objective)},
                        {"cell_index", b.index},
                        {"tie_break_applied", b.tie_break_applied}});
    }
    j["best"] = best;
    j["tie_break_rule"] =
        "mean desc, reps asc, C asc, circular<full<linear, epsilon asc";
    return j;
}

std::string heatmap_filename(const Report& report, EntanglementPattern pattern,
                             double epsilon) {
    std::string name = std::string("heatmap_") + to_string(report.task) + "_" +
                       to_string(pattern);
    if (report.task == TaskKind::svr) {
        name += "_eps" + format_number(epsilon);
    }
    return name + ".csv";
}

void emit_heatmaps(const Report& report, const fs::path& out_dir) {
    const auto& grid = report.grid;
    const std::vector<double> epsilons =
        report.task == TaskKind::svr ? grid.epsilon_values
                                     : std::vector<double>{0.0};
    for (const auto pattern : grid.patterns) {
        for (const double eps : epsilons) {
            CsvWriter csv;
            csv.field(std::string("reps"));
            for (const double c : grid.c_values) {
                csv.field(c);
            }
            csv.end_row();
            for (const int reps : grid.reps_values) {
                csv.field(reps);
                for (const double c : grid.c_values) {
                    const TrialResult* found = nullptr;
                    for (const auto& r : report.results) {
                        if (r.cell.pattern == pattern && r.cell.reps == reps &&
                            r.cell.c == c && r.cell.epsilon == eps) {
                            found = &r;
                            break;
                        }
                    }
                    if (found == nullptr || found->failed) {
                        csv.empty_field(); // failed cells stay visible as gaps
                    } else {
                        csv.field(found->mean);
                    }
                }
                csv.end_row();
            }
            write_file(out_dir / heatmap_filename(report, pattern, eps),
                       csv.str());
        }
    }
}

void emit_predictions(const Report& report, const fs::path& out_dir) {
    const BestCell* best_regression = nullptr;
    for (const auto& b : report.best) {
        if (b.objective == Objective::regression) {
            best_regression = &b;
        }
    }
    if (best_regression == nullptr) {
        return;
    }
    const auto& result = report.results[size_t(best_regression->index)];
    CsvWriter csv;
    csv.field(std::string("element"));
    csv.field(std::string("actual_sfe_mj_m2"));
    csv.field(std::string("predicted_sfe_mj_m2"));
    csv.end_row();
    for (std::size_t i = 0; i < report.elements.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        csv.field(report.elements[i]);
        csv.field(report.actual_sfe[idx]);
        if (result.oof_prediction_count[idx] > 0) {
            csv.field(result.oof_prediction_sum[idx] /
                      double(result.oof_prediction_count[idx]));
        } else {
            csv.empty_field();
        }
        csv.end_row();
    }
    write_file(out_dir / "predictions.csv", csv.str());
}

void emit_classification_bars(const Report& report, const fs::path& out_dir) {
    if (report.task != TaskKind::qnn && report.task != TaskKind::hybrid_qnn) {
        return;
    }
    std::vector<const TrialResult*> cls_cells;
    for (const auto& r : report.results) {
        if (r.cell.objective == Objective::classification && !r.failed) {
            cls_cells.push_back(&r);
        }
    }
    if (cls_cells.empty()) {
        return;
    }
    const bool multi_pattern = report.grid.patterns.size() > 1;
    CsvWriter csv;
    csv.field(std::string("element"));
    csv.field(std::string("actual_label"));
    for (const auto* r : cls_cells) {
        std::string name = "pred_l" + std::to_string(r->cell.reps);
        if (multi_pattern) {
            name += std::string("_") + to_string(r->cell.pattern);
        }
        csv.field(name);
    }
    csv.end_row();
    for (std::size_t i = 0; i < report.elements.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        csv.field(report.elements[i]);
        csv.field(report.actual_labels[idx]);
        for (const auto* r : cls_cells) {
            if (r->oof_votes_total[idx] == 0) {
                csv.empty_field();
            } else {
                // majority vote across held-out appearances; ties go to 1
                const int ones = r->oof_votes_label1[idx];
                const int total = r->oof_votes_total[idx];
                csv.field(2 * ones >= total ? 1 : 0);
            }
        }
        csv.end_row();
    }
    write_file(out_dir / "classification_bars.csv", csv.str());
}

} // namespace

void emit_outputs(const Report& report, const std::string& out_dir) {
    if (report.results.empty() || report.elements.empty()) {
        throw ConfigError("emit_outputs: empty report");
    }
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + out_dir +
                      "': " + ec.message());
    }
    write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
    if (report.task == TaskKind::svc || report.task == TaskKind::svr) {
        emit_heatmaps(report, dir);
    }
    emit_predictions(report, dir);
    emit_classification_bars(report, dir);
}

Report load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open report '" + path + "'");
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("cannot parse report '" + path + "': " + e.what());
    }
    Report report;
    report.tool_version = j.at("tool_version").get<std::string>();
    report.task = parse_task(j.at("task").get<std::string>());
    report.seed = j.at("seed").get<std::uint64_t>();
    report.dataset_path = j.at("dataset").at("path").get<std::string>();
    report.dataset_fingerprint =
        j.at("dataset").at("fingerprint").get<std::string>();
    const auto& protocol = j.at("protocol");
    report.protocol.scheme.kind =
        protocol.at("scheme").get<std::string>() == "shuffle"
            ? SplitScheme::Kind::shuffle
            : SplitScheme::Kind::kfold;
    report.protocol.scheme.fraction = protocol.at("fraction").get<double>();
    report.protocol.scheme.repeats = protocol.at("repeats").get<int>();
    report.protocol.scheme.folds = protocol.at("folds").get<int>();
    report.protocol.tests = protocol.at("tests").get<int>();
    const auto& settings = j.at("settings");
    report.settings.label_convention =
        settings.at("label_convention").get<std::string>() == "methods"
            ? LabelConvention::methods
            : LabelConvention::dataset;
    report.settings.sfe_threshold = settings.at("sfe_threshold").get<double>();
    report.settings.scale_max = settings.at("scale_max").get<double>();
    report.settings.svm_tol = settings.at("svm_tol").get<double>();
    report.settings.svm_max_passes =
        settings.at("svm_max_passes").get<Eigen::Index>();
    report.settings.qnn_epochs = settings.at("qnn_epochs").get<int>();
    report.settings.qnn_learning_rate =
        settings.at("qnn_learning_rate").get<double>();
    report.grid = grid_from_json(j.at("grid"));
    report.elements = j.at("elements").get<std::vector<std::string>>();
    const auto sfe = j.at("actual_sfe").get<std::vector<double>>();
    report.actual_sfe =
        Eigen::Map<const Eigen::VectorXd>(sfe.data(), Eigen::Index(sfe.size()));
    const auto labels = j.at("actual_labels").get<std::vector<int>>();
    report.actual_labels = Eigen::Map<const Eigen::VectorXi>(
        labels.data(), Eigen::Index(labels.size()));
    for (const auto& cell : j.at("results")) {
        TrialResult r;
        r.cell.objective = parse_objective(cell.at("objective").get<std::string>());
        r.cell.c = cell.at("C").get<double>();
        r.cell.epsilon = cell.at("epsilon").get<double>();
        r.cell.reps = cell.at("reps").get<int>();
        r.cell.pattern =
            parse_entanglement(cell.at("entanglement").get<std::string>());
        r.failed = cell.at("failed").get<bool>();
        if (r.failed) {
            r.failure_reason = cell.at("failure_reason").get<std::string>();
        } else {
            r.mean = cell.at("mean").get<double>();
            r.stddev = cell.at("stddev").get<double>();
            r.test_means = cell.at("test_means").get<std::vector<double>>();
            r.split_scores = cell.at("split_scores").get<std::vector<double>>();
            if (cell.contains("pearson_r2_mean")) {
                r.pearson_mean = cell.at("pearson_r2_mean").get<double>();
            }
        }
        report.results.push_back(std::move(r));
    }
    for (const auto& b : j.at("best")) {
        report.best.push_back(
            {parse_objective(b.at("objective").get<std::string>()),
             b.at("cell_index").get<Eigen::Index>(),
             b.at("tie_break_applied").get<bool>()});
    }
    return report;
}

} // namespace qsfe
