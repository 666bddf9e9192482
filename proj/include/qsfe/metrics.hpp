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

#include <Eigen/Dense>

#include "qsfe/errors.hpp"

namespace qsfe {

/// Fraction of exact matches.
inline double accuracy(const Eigen::VectorXi& predictions,
                       const Eigen::VectorXi& labels) {
    if (predictions.size() != labels.size() || labels.size() == 0) {
        throw ShapeError("accuracy: need equal, non-empty prediction/label vectors");
    }
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        hits += predictions[i] == labels[i] ? 1 : 0;
    }
    return double(hits) / double(labels.size());
}

struct R2Scores {
    double pearson_r2 = 0;               // squared Pearson correlation
    double coefficient_of_determination = 0; // 1 - SS_res / SS_tot
};

/// Both regression scores; they differ away from the identity line.
inline R2Scores r2_scores(const Eigen::VectorXd& predictions,
                          const Eigen::VectorXd& targets) {
    if (predictions.size() != targets.size() || targets.size() < 2) {
        throw ShapeError("r2_scores: need two matched vectors of length >= 2");
    }
    const double t_mean = targets.mean();
    const double p_mean = predictions.mean();
    const Eigen::VectorXd dt = targets.array() - t_mean;
    const Eigen::VectorXd dp = predictions.array() - p_mean;
    const double ss_tot = dt.squaredNorm();
    if (!(ss_tot > 0)) {
        throw MetricError("r2_scores: zero target variance");
    }
    R2Scores scores;
    const double ss_res = (predictions - targets).squaredNorm();
    scores.coefficient_of_determination = 1.0 - ss_res / ss_tot;
    const double dp_norm2 = dp.squaredNorm();
    if (dp_norm2 > 0) {
        const double cov = dt.dot(dp);
        scores.pearson_r2 = (cov * cov) / (ss_tot * dp_norm2);
    } else {
        scores.pearson_r2 = 0.0; // constant predictions carry no correlation
    }
    return scores;
}

} // namespace qsfe
