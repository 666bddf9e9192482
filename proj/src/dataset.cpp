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
#include "qsfe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qsfe/rng.hpp"

namespace qsfe {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
        if (quoted) {
            if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_number(const std::string& text, int row, const char* column) {
    double value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw IngestError("row " + std::to_string(row) + ", column " + column +
                          ": cannot parse '" + text + "' as a number");
    }
    return value;
}

void check_positive(double value, int row, const char* column) {
    if (!(value > 0)) {
        throw IngestError("row " + std::to_string(row) + ", column " + column +
                          ": value must be positive, got " +
                          std::to_string(value));
    }
}

} // namespace

std::vector<Sample> load_table(const std::string& path, SfePolicy policy) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError("cannot open dataset file '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestError("dataset file '" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw IngestError("unexpected header in '" + path + "': got '" + line +
                          "', expected '" + kCsvHeader + "'");
    }

    std::vector<Sample> samples;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) {
            throw IngestError("row " + std::to_string(row) + ": expected 5 fields, got " +
                              std::to_string(fields.size()));
        }
        Sample sample;
        sample.element = fields[0];
        if (sample.element.empty()) {
            throw IngestError("row " + std::to_string(row) +
                              ", column element: empty symbol");
        }
        if (fields[1].empty() && sample.element == "Tc") {
            sample.bulk_modulus = kTcBulkModulusGpa;
        } else {
            sample.bulk_modulus = parse_number(fields[1], row, "bulk_modulus_gpa");
        }
        sample.volume = parse_number(fields[2], row, "volume_a3");
        sample.electronegativity =
            parse_number(fields[3], row, "electronegativity");
        check_positive(sample.bulk_modulus, row, "bulk_modulus_gpa");
        check_positive(sample.volume, row, "volume_a3");
        check_positive(sample.electronegativity, row, "electronegativity");
        if (fields[4].empty()) {
            if (policy == SfePolicy::required) {
                throw IngestError("row " + std::to_string(row) +
                                  ", column sfe_mj_m2: value required");
            }
        } else {
            sample.sfe = parse_number(fields[4], row, "sfe_mj_m2");
        }
        samples.push_back(std::move(sample));
    }
    if (samples.empty()) {
        throw IngestError("dataset file '" + path + "' has no data rows");
    }
    return samples;
}

void derive_labels(std::vector<Sample>& samples, double threshold,
                   LabelConvention convention) {
    for (auto& sample : samples) {
        if (!sample.sfe) {
            throw ConfigError("derive_labels: sample '" + sample.element +
                              "' has no SFE value");
        }
        const bool above = *sample.sfe > threshold;
        sample.label = convention == LabelConvention::methods ? (above ? 0 : 1)
                                                              : (above ? 1 : 0);
    }
}

Eigen::MatrixXd features_of(std::span<const Sample> samples) {
    Eigen::MatrixXd features(static_cast<Eigen::Index>(samples.size()), 3);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        features(static_cast<Eigen::Index>(i), 0) = samples[i].bulk_modulus;
        features(static_cast<Eigen::Index>(i), 1) = samples[i].volume;
        features(static_cast<Eigen::Index>(i), 2) = samples[i].electronegativity;
    }
    return features;
}

Eigen::VectorXd targets_of(std::span<const Sample> samples) {
    Eigen::VectorXd targets(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].sfe) {
            throw ConfigError("targets_of: sample '" + samples[i].element +
                              "' has no SFE value");
        }
        targets[static_cast<Eigen::Index>(i)] = *samples[i].sfe;
    }
    return targets;
}

Eigen::VectorXi labels_of(std::span<const Sample> samples) {
    Eigen::VectorXi labels(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].label) {
            throw ConfigError("labels_of: sample '" + samples[i].element +
                              "' has no derived label");
        }
        labels[static_cast<Eigen::Index>(i)] = *samples[i].label;
    }
    return labels;
}

ScalerParams fit_scaler(const Eigen::MatrixXd& train_features, double out_max) {
    if (train_features.rows() == 0) {
        throw ConfigError("fit_scaler: empty training fold");
    }
    if (!(out_max > 0)) {
        throw ConfigError("fit_scaler: output range must be positive");
    }
    ScalerParams params;
    params.feat_min = train_features.colwise().minCoeff();
    params.feat_max = train_features.colwise().maxCoeff();
    params.out_max = out_max;
    for (Eigen::Index c = 0; c < train_features.cols(); ++c) {
        if (!(params.feat_max[c] > params.feat_min[c])) {
            throw ConfigError("fit_scaler: feature column " + std::to_string(c) +
                              " is constant on the training fold");
        }
    }
    return params;
}

Eigen::MatrixXd apply_scaler(const ScalerParams& params,
                             const Eigen::MatrixXd& features) {
    if (features.cols() != params.feat_min.size()) {
        throw ShapeError("apply_scaler: " + std::to_string(features.cols()) +
                         " features, scaler fitted on " +
                         std::to_string(params.feat_min.size()));
    }
    Eigen::MatrixXd scaled(features.rows(), features.cols());
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        const double span = params.feat_max[c] - params.feat_min[c];
        for (Eigen::Index r = 0; r < features.rows(); ++r) {
            const double unit = (features(r, c) - params.feat_min[c]) / span;
            scaled(r, c) = std::clamp(unit, 0.0, 1.0) * params.out_max;
        }
    }
    return scaled;
}

std::vector<SplitPlan> make_splits(Eigen::Index m, const SplitScheme& scheme,
                                   std::uint64_t seed) {
    std::vector<SplitPlan> plans;
    if (scheme.kind == SplitScheme::Kind::kfold) {
        if (scheme.folds < 2 || m < scheme.folds) {
            throw ConfigError("make_splits: need at least " +
                              std::to_string(std::max(scheme.folds, 2)) +
                              " samples for " + std::to_string(scheme.folds) +
                              "-fold splitting, got " + std::to_string(m));
        }
        std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix_seed({seed, 0x6B66ULL}));
        rng.shuffle(order);
        const Eigen::Index k = scheme.folds;
        Eigen::Index start = 0;
        for (Eigen::Index fold = 0; fold < k; ++fold) {
            const Eigen::Index size = m / k + (fold < m % k ? 1 : 0);
            SplitPlan plan;
            plan.seed = seed;
            plan.fold = static_cast<int>(fold);
            plan.validation.assign(order.begin() + start,
                                   order.begin() + start + size);
            for (Eigen::Index i = 0; i < m; ++i) {
                if (i < start || i >= start + size) {
                    plan.train.push_back(order[static_cast<std::size_t>(i)]);
                }
            }
            start += size;
            plans.push_back(std::move(plan));
        }
        return plans;
    }

    if (!(scheme.fraction > 0) || !(scheme.fraction < 1)) {
        throw ConfigError("make_splits: shuffle fraction must be in (0, 1)");
    }
    if (scheme.fraction * double(m) < 1.0) {
        throw ConfigError("make_splits: " + std::to_string(m) +
                          " samples are too few for a " +
                          std::to_string(scheme.fraction) + " holdout");
    }
    const auto holdout =
        static_cast<Eigen::Index>(std::ceil(scheme.fraction * double(m)));
    if (holdout >= m) {
        throw ConfigError("make_splits: " + std::to_string(m) +
                          " samples cannot hold out " + std::to_string(holdout));
    }
    if (scheme.repeats < 1) {
        throw ConfigError("make_splits: repeats must be at least 1");
    }
    for (int rep = 0; rep < scheme.repeats; ++rep) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix_seed({seed, 0x5348ULL, static_cast<std::uint64_t>(rep)}));
        rng.shuffle(order);
        SplitPlan plan;
        plan.seed = seed;
        plan.repeat = rep;
        plan.validation.assign(order.begin(), order.begin() + holdout);
        plan.train.assign(order.begin() + holdout, order.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for fingerprinting");
    }
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    char buffer[4096];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001B3ULL;
        }
    }
    std::ostringstream out;
    out << "fnv1a64:" << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

} // namespace qsfe
