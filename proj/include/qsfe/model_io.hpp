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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/dataset.hpp"
#include "qsfe/experiment.hpp"
#include "qsfe/hybrid.hpp"

namespace qsfe {

/// Everything needed to reload a trained model and predict on new rows:
/// circuit specs, feature scaler, and either the dual solution with its
/// training samples (SVM tasks) or the hybrid network parameters (QNN
/// tasks).
struct ModelBundle {
    TaskKind task = TaskKind::svc;
    Objective objective = Objective::classification;
    ScalerParams scaler;

    // SVM tasks
    FeatureMapSpec feature_map;
    std::vector<std::string> training_elements;
    Eigen::MatrixXd training_features; // raw units
    Eigen::VectorXd dual_coefs;
    double bias = 0;
    double c = 1;
    double epsilon = 0;

    // QNN tasks
    HybridModeld hybrid;
    bool has_target_scaler = false;
    TargetScaler<double> target_scaler;
};

void save_model(const std::string& path, const ModelBundle& bundle);
ModelBundle load_model(const std::string& path);

struct PredictOutput {
    Eigen::VectorXd values; // SFE in mJ/m^2, or 0/1 labels
    bool is_label = false;
};

/// Applies the stored scaler and model to raw feature rows.
PredictOutput model_predict(const ModelBundle& bundle,
                            const Eigen::MatrixXd& raw_features);

} // namespace qsfe
