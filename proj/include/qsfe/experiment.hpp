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
#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/dataset.hpp"
#include "qsfe/feature_map.hpp"
#include "qsfe/hybrid.hpp"

namespace qsfe {

enum class TaskKind { svc, svr, qnn, hybrid_qnn };

const char* to_string(TaskKind task);
TaskKind parse_task(const std::string& name);

enum class Objective { classification, regression };

/// Hyperparameter ranges of one sweep. SVC ignores epsilon; the QNN tasks
/// use only depth and entanglement and evaluate both objectives.
struct GridSpec {
    std::vector<double> c_values = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> epsilon_values = {0.01, 0.001};
    std::vector<int> reps_values = {1, 2, 3, 4, 5};
    std::vector<EntanglementPattern> patterns = {EntanglementPattern::circular,
                                                 EntanglementPattern::full,
                                                 EntanglementPattern::linear};

    static GridSpec defaults_for(TaskKind task);
};

/// Evaluation protocol: repeated shuffled splits (or k-fold), the whole set
/// of splits repeated `tests` times with independent master seeds; cell
/// scores report the mean of the per-test means.
struct Protocol {
    SplitScheme scheme = SplitScheme::shuffle(0.2, 20);
    int tests = 3;
};

struct RunSettings {
    LabelConvention label_convention = LabelConvention::methods;
    double sfe_threshold = kDefaultSfeThreshold;
    double scale_max = std::numbers::pi;
    double svm_tol = 1e-3;
    Eigen::Index svm_max_passes = 0; // 0 = solver default of 10 * variables
    int qnn_epochs = 120;
    double qnn_learning_rate = 0.05;
    int jobs = 1;
};

/// One grid cell. epsilon applies to SVR cells only; C applies to the SVM
/// tasks only.
struct CellParams {
    Objective objective = Objective::classification;
    double c = 1.0;
    double epsilon = 0.0;
    int reps = 1;
    EntanglementPattern pattern = EntanglementPattern::full;
};

struct TrialResult {
    CellParams cell;
    std::vector<double> split_scores; // test-major order
    std::vector<double> test_means;
    double mean = 0;
    double stddev = 0;
    double pearson_mean = 0; // regression cells only
    bool failed = false;
    std::string failure_reason;
    // Out-of-fold aggregates for figure data, indexed by sample.
    Eigen::VectorXd oof_prediction_sum;
    Eigen::VectorXi oof_prediction_count;
    Eigen::VectorXi oof_votes_label1;
    Eigen::VectorXi oof_votes_total;
    double wall_ms = 0; // logged to stderr, never serialized
};

struct BestCell {
    Objective objective = Objective::classification;
    Eigen::Index index = -1;
    bool tie_break_applied = false;
};

struct Report {
    TaskKind task = TaskKind::svc;
    GridSpec grid;
    Protocol protocol;
    RunSettings settings;
    std::uint64_t seed = 0;
    std::string dataset_path;
    std::string dataset_fingerprint;
    std::vector<std::string> elements;
    Eigen::VectorXd actual_sfe;
    Eigen::VectorXi actual_labels;
    std::vector<TrialResult> results;
    std::vector<BestCell> best;
    std::string tool_version;
};

/// Runs the protocol for one cell: per split, scale with training-fold
/// statistics only, train, score on the held-out fold. A failure in any
/// split marks the whole cell failed with its reason.
TrialResult evaluate_cell(TaskKind task, const CellParams& cell,
                          const std::vector<Sample>& samples,
                          const Protocol& protocol, const RunSettings& settings,
                          std::uint64_t seed, std::uint64_t cell_stream = 0);

/// Evaluates every cell of the grid (in deterministic grid order, in
/// parallel up to settings.jobs) and assembles the report with per-objective
/// best cells.
Report run_grid(TaskKind task, const GridSpec& grid,
                const std::vector<Sample>& samples, const Protocol& protocol,
                const RunSettings& settings, std::uint64_t seed,
                const std::string& dataset_path);

/// Writes report.json plus the figure-ready CSVs into out_dir:
/// heatmap_<task>_<pattern>[_eps*].csv for the SVM tasks, predictions.csv
/// for regression results, classification_bars.csv for QNN classification
/// results. Fails upfront on an empty report; reruns with identical inputs
/// produce byte-identical files.
void emit_outputs(const Report& report, const std::string& out_dir);

/// Loads a report.json written by emit_outputs.
Report load_report(const std::string& path);

/// Deterministic short form like "1", "0.1" for file names and CSV headers.
std::string format_number(double value);

} // namespace qsfe
