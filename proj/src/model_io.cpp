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
#include "qsfe/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "qsfe/kernel.hpp"
#include "qsfe/svm.hpp"
#include "qsfe/version.hpp"

namespace qsfe {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             Eigen::Index(v.size()));
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = m(r, c);
        }
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
    const auto n_rows = static_cast<Eigen::Index>(j.size());
    if (n_rows == 0) {
        return Eigen::MatrixXd(0, 0);
    }
    const auto n_cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const auto row = j[static_cast<std::size_t>(r)].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != n_cols) {
            throw IngestError("model file: ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

ordered_json scaler_to_json(const ScalerParams& scaler) {
    return {{"feat_min", to_vector(scaler.feat_min)},
            {"feat_max", to_vector(scaler.feat_max)},
            {"out_max", scaler.out_max}};
}

ScalerParams scaler_from_json(const ordered_json& j) {
    ScalerParams scaler;
    scaler.feat_min = from_vector(j.at("feat_min").get<std::vector<double>>());
    scaler.feat_max = from_vector(j.at("feat_max").get<std::vector<double>>());
    scaler.out_max = j.at("out_max").get<double>();
    return scaler;
}

ordered_json feature_map_to_json(const FeatureMapSpec& spec) {
    return {{"qubits", spec.n_qubits},
            {"reps", spec.reps},
            {"entanglement", to_string(spec.pattern)}};
}

FeatureMapSpec feature_map_from_json(const ordered_json& j) {
    FeatureMapSpec spec;
    spec.n_qubits = j.at("qubits").get<int>();
    spec.reps = j.at("reps").get<int>();
    spec.pattern = parse_entanglement(j.at("entanglement").get<std::string>());
    return spec;
}

} // namespace

void save_model(const std::string& path, const ModelBundle& bundle) {
    ordered_json j;
    j["schema_version"] = 1;
    j["tool_version"] = kVersion;
    j["task"] = to_string(bundle.task);
    j["objective"] = bundle.objective == Objective::classification
                         ? "classification"
                         : "regression";
    j["scaler"] = scaler_to_json(bundle.scaler);

    if (bundle.task == TaskKind::svc || bundle.task == TaskKind::svr) {
        j["feature_map"] = feature_map_to_json(bundle.feature_map);
        j["training_elements"] = bundle.training_elements;
        j["training_features"] = matrix_to_json(bundle.training_features);
        j["dual_coefs"] = to_vector(bundle.dual_coefs);
        j["bias"] = bundle.bias;
        j["C"] = bundle.c;
        if (bundle.task == TaskKind::svr) {
            j["epsilon"] = bundle.epsilon;
        }
    } else {
        const auto& model = bundle.hybrid;
        j["feature_map"] = feature_map_to_json(model.qnn.feature_map);
        j["ansatz"] = {{"qubits", model.qnn.ansatz.n_qubits},
                       {"reps", model.qnn.ansatz.reps},
                       {"entanglement", to_string(model.qnn.ansatz.entanglement)}};
        j["observable_mask"] = model.qnn.observable.support_mask;
        j["weights"] = to_vector(model.qnn.weights);
        j["pre"] = {{"weight", matrix_to_json(model.pre.weight)},
                    {"bias", to_vector(model.pre.bias)}};
        j["post"] = {{"weight", matrix_to_json(model.post.weight)},
                     {"bias", to_vector(model.post.bias)}};
        j["angle_clamp"] = model.angle_clamp;
        if (bundle.has_target_scaler) {
            j["target_scaler"] = {{"min", bundle.target_scaler.t_min},
                                  {"max", bundle.target_scaler.t_max}};
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open model file '" + path + "'");
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("cannot parse model file '" + path + "': " + e.what());
    }

    ModelBundle bundle;
    bundle.task = parse_task(j.at("task").get<std::string>());
    bundle.objective =
        j.at("objective").get<std::string>() == "classification"
            ? Objective::classification
            : Objective::regression;
    bundle.scaler = scaler_from_json(j.at("scaler"));

    if (bundle.task == TaskKind::svc || bundle.task == TaskKind::svr) {
        bundle.feature_map = feature_map_from_json(j.at("feature_map"));
        bundle.training_elements =
            j.at("training_elements").get<std::vector<std::string>>();
        bundle.training_features = matrix_from_json(j.at("training_features"));
        bundle.dual_coefs =
            from_vector(j.at("dual_coefs").get<std::vector<double>>());
        bundle.bias = j.at("bias").get<double>();
        bundle.c = j.at("C").get<double>();
        if (bundle.task == TaskKind::svr) {
            bundle.epsilon = j.at("epsilon").get<double>();
        }
        if (bundle.training_features.rows() !=
            bundle.dual_coefs.size()) {
            throw IngestError("model file: dual/training size mismatch");
        }
    } else {
        auto& model = bundle.hybrid;
        model.qnn.feature_map = feature_map_from_json(j.at("feature_map"));
        model.qnn.ansatz.n_qubits = j.at("ansatz").at("qubits").get<int>();
        model.qnn.ansatz.reps = j.at("ansatz").at("reps").get<int>();
        model.qnn.ansatz.entanglement =
            parse_entanglement(j.at("ansatz").at("entanglement").get<std::string>());
        model.qnn.observable.n_qubits = model.qnn.feature_map.n_qubits;
        model.qnn.observable.support_mask =
            j.at("observable_mask").get<std::uint64_t>();
        model.qnn.weights = from_vector(j.at("weights").get<std::vector<double>>());
        model.pre.weight = matrix_from_json(j.at("pre").at("weight"));
        model.pre.bias = from_vector(j.at("pre").at("bias").get<std::vector<double>>());
        model.post.weight = matrix_from_json(j.at("post").at("weight"));
        model.post.bias = from_vector(j.at("post").at("bias").get<std::vector<double>>());
        model.angle_clamp = j.at("angle_clamp").get<bool>();
        model.task = bundle.objective == Objective::classification
                         ? Task::classification
                         : Task::regression;
        if (j.contains("target_scaler")) {
            bundle.has_target_scaler = true;
            bundle.target_scaler.t_min = j.at("target_scaler").at("min").get<double>();
            bundle.target_scaler.t_max = j.at("target_scaler").at("max").get<double>();
        }
        model.validate();
    }
    return bundle;
}

PredictOutput model_predict(const ModelBundle& bundle,
                            const Eigen::MatrixXd& raw_features) {
    if (raw_features.cols() != bundle.scaler.feat_min.size()) {
        throw ShapeError("model_predict: model expects " +
                         std::to_string(bundle.scaler.feat_min.size()) +
                         " features, got " + std::to_string(raw_features.cols()));
    }
    const Eigen::MatrixXd scaled = apply_scaler(bundle.scaler, raw_features);
    PredictOutput out;

    if (bundle.task == TaskKind::svc || bundle.task == TaskKind::svr) {
        const Eigen::MatrixXd train_scaled =
            apply_scaler(bundle.scaler, bundle.training_features);
        const Eigen::MatrixXd k_cross =
            cross_matrix(scaled, train_scaled, bundle.feature_map).values;
        if (bundle.task == TaskKind::svc) {
            SvcModel<double> model;
            model.dual_coefs = bundle.dual_coefs;
            model.bias = bundle.bias;
            model.C = bundle.c;
            const auto prediction = predict_svc(model, k_cross);
            out.is_label = true;
            out.values.resize(prediction.labels.size());
            for (Eigen::Index i = 0; i < prediction.labels.size(); ++i) {
                out.values[i] = prediction.labels[i] == 1 ? 1.0 : 0.0;
            }
        } else {
            SvrModel<double> model;
            model.dual_coefs = bundle.dual_coefs;
            model.bias = bundle.bias;
            model.C = bundle.c;
            model.epsilon = bundle.epsilon;
            out.values = predict_svr(model, k_cross);
        }
        return out;
    }

    out.is_label = bundle.objective == Objective::classification;
    out.values.resize(scaled.rows());
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
        if (out.is_label) {
            out.values[i] =
                hybrid_classify(scaled.row(i).transpose(), bundle.hybrid);
        } else {
            double z = hybrid_forward(scaled.row(i).transpose(),
                                              bundle.hybrid);
            if (bundle.has_target_scaler) {
                z = bundle.target_scaler.unscale(z);
            }
            out.values[i] = z;
        }
    }
    return out;
}

} // namespace qsfe
