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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsfe/errors.hpp"

namespace qsfe {

/// One solute row: element symbol, the three elemental descriptors and the
/// stacking-fault-energy target (absent in predict-only inputs).
struct Sample {
    std::string element;
    double bulk_modulus = 0;     // GPa
    double volume = 0;           // Angstrom^3
    double electronegativity = 0;
    std::optional<double> sfe;   // mJ/m^2
    std::optional<int> label;    // derived {0, 1}
};

/// Expected CSV header, in order.
inline constexpr const char* kCsvHeader =
    "element,bulk_modulus_gpa,volume_a3,electronegativity,sfe_mj_m2";

/// Bulk modulus substituted for Tc rows whose value is missing.
inline constexpr double kTcBulkModulusGpa = 281.0;

enum class SfePolicy { required, optional };

/// Parses the SFE table. Errors name the offending row and column. A Tc row
/// with an empty bulk-modulus field receives the documented substitute value.
std::vector<Sample> load_table(const std::string& path,
                               SfePolicy policy = SfePolicy::required);

/// Label rule selection; `methods` assigns label 0 to SFE above the
/// threshold, `dataset` is the flipped convention (0 below the threshold).
enum class LabelConvention { methods, dataset };

inline constexpr double kDefaultSfeThreshold = 19.0; // pure-Mg SFE, mJ/m^2

/// Derives binary labels from the SFE column in place.
void derive_labels(std::vector<Sample>& samples,
                   double threshold = kDefaultSfeThreshold,
                   LabelConvention convention = LabelConvention::methods);

/// Raw m x 3 feature matrix (bulk modulus, volume, electronegativity).
Eigen::MatrixXd features_of(std::span<const Sample> samples);
Eigen::VectorXd targets_of(std::span<const Sample> samples);
Eigen::VectorXi labels_of(std::span<const Sample> samples);

/// Per-feature min-max statistics from a training fold, mapping onto
/// [0, out_max] (default pi). Values outside the fitted range clamp.
struct ScalerParams {
    Eigen::VectorXd feat_min;
    Eigen::VectorXd feat_max;
    double out_max = 0;
};

ScalerParams fit_scaler(const Eigen::MatrixXd& train_features, double out_max);
Eigen::MatrixXd apply_scaler(const ScalerParams& params,
                             const Eigen::MatrixXd& features);

/// One train/validation split. `fold` is set by k-fold plans, `repeat` by
/// shuffle plans.
struct SplitPlan {
    std::uint64_t seed = 0;
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> validation;
    int fold = -1;
    int repeat = -1;
};

struct SplitScheme {
    enum class Kind { kfold, shuffle };
    Kind kind = Kind::shuffle;
    int folds = 5;
    double fraction = 0.2; // validation share for shuffle splits
    int repeats = 20;

    static SplitScheme kfold(int k) { return {Kind::kfold, k, 0.2, 0}; }
    static SplitScheme shuffle(double fraction, int repeats) {
        return {Kind::shuffle, 5, fraction, repeats};
    }
};

/// Deterministic split plans; k-fold partitions are disjoint and exhaustive,
/// shuffle plans hold out ceil(fraction * m) samples per repeat.
std::vector<SplitPlan> make_splits(Eigen::Index m, const SplitScheme& scheme,
                                   std::uint64_t seed);

/// FNV-1a content hash of a file, as a fixed-width hex string.
std::string file_fingerprint(const std::string& path);

} // namespace qsfe
