// src/serialize.cpp

// Copyright 2026 woods contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "woods/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "woods/errors.hpp"

namespace woods {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;
constexpr int kReportSchemaVersion = 1;

json vector_to_json(const Vector& v) { return json(v); }

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw DataError("model file: expected array of numbers");
  return j.get<Vector>();
}

}  // namespace

std::string model_to_json(const MlpModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["layer_dims"] = model.layer_dims();
  j["activation"] = activation_name(model.activation);
  j["energy_slope_w"] = model.energy_slope_w;
  json weights = json::array();
  json biases = json::array();
  for (const Layer& l : model.layers) {
    weights.push_back(vector_to_json(l.weight.data()));
    biases.push_back(vector_to_json(l.bias));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  if (model.ood_head) {
    const OodHead& h = *model.ood_head;
    json head;
    head["hidden_dim"] = h.hidden_weight.rows();
    head["hidden_weight"] = vector_to_json(h.hidden_weight.data());
    head["hidden_bias"] = vector_to_json(h.hidden_bias);
    head["output_weight"] = vector_to_json(h.output_weight);
    head["output_bias"] = h.output_bias;
    j["ood_head"] = std::move(head);
  } else {
    j["ood_head"] = nullptr;
  }
  return j.dump(2) + "\n";
}

MlpModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw DataError("model file: unsupported format_version");
    }
    const std::vector<std::size_t> dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    if (dims.size() < 2) throw DataError("model file: bad layer_dims");
    MlpModel model;
    model.activation = activation_from_name(j.at("activation").get<std::string>());
    model.energy_slope_w = j.at("energy_slope_w").get<double>();
    const json& weights = j.at("weights");
    const json& biases = j.at("biases");
    if (weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1) {
      throw DataError("model file: layer count mismatch");
    }
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Layer layer;
      layer.weight = Matrix(dims[l + 1], dims[l]);
      const Vector flat = vector_from_json(weights[l]);
      if (flat.size() != layer.weight.size()) {
        throw DataError("model file: weight array size mismatch at layer " +
                        std::to_string(l));
      }
      layer.weight.data() = flat;
      layer.bias = vector_from_json(biases[l]);
      if (layer.bias.size() != dims[l + 1]) {
        throw DataError("model file: bias array size mismatch at layer " +
                        std::to_string(l));
      }
      model.layers.push_back(std::move(layer));
    }
    if (!j.at("ood_head").is_null()) {
      const json& head_json = j.at("ood_head");
      OodHead head;
      const std::size_t hidden = head_json.at("hidden_dim").get<std::size_t>();
      head.hidden_weight = Matrix(hidden, model.penultimate_dim());
      const Vector flat = vector_from_json(head_json.at("hidden_weight"));
      if (flat.size() != head.hidden_weight.size()) {
        throw DataError("model file: head hidden weight size mismatch");
      }
      head.hidden_weight.data() = flat;
      head.hidden_bias = vector_from_json(head_json.at("hidden_bias"));
      head.output_weight = vector_from_json(head_json.at("output_weight"));
      if (head.hidden_bias.size() != hidden || head.output_weight.size() != hidden) {
        throw DataError("model file: head vector size mismatch");
      }
      head.output_bias = head_json.at("output_bias").get<double>();
      model.ood_head = std::move(head);
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  write_text_file(path, model_to_json(model));
}

MlpModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

std::string report_to_json(const DetectionReport& report, const std::string& scorer) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scorer"] = scorer;
  j["fpr_at_95tpr"] = report.fpr_at_95tpr;
  j["auroc"] = report.auroc;
  j["accuracy"] = report.accuracy;
  j["threshold"] = report.threshold;
  j["n_id"] = report.n_id;
  j["n_ood"] = report.n_ood;
  return j.dump(2) + "\n";
}

void write_epoch_log_csv(const std::filesystem::path& path,
                         const std::vector<EpochLog>& logs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,ood_constraint,cls_constraint,objective,lambda1,lambda2,beta1,beta2\n";
  for (const EpochLog& log : logs) {
    out << log.epoch << ',' << format_double(log.ood_constraint) << ','
        << format_double(log.cls_constraint) << ',' << format_double(log.objective)
        << ',' << format_double(log.lambda1) << ',' << format_double(log.lambda2)
        << ',' << format_double(log.beta1) << ',' << format_double(log.beta2) << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<EpochLog> read_epoch_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::vector<EpochLog> logs;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    EpochLog log;
    std::stringstream ss(line);
    char comma;
    ss >> log.epoch >> comma >> log.ood_constraint >> comma >> log.cls_constraint >>
        comma >> log.objective >> comma >> log.lambda1 >> comma >> log.lambda2 >>
        comma >> log.beta1 >> comma >> log.beta2;
    if (ss.fail()) {
      throw DataError("epoch log line " + std::to_string(line_no) + ": parse error");
    }
    logs.push_back(log);
  }
  return logs;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreSet& scores) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "score,origin\n";
  for (double s : scores.id_scores) out << format_double(s) << ",id\n";
  for (double s : scores.ood_scores) out << format_double(s) << ",ood\n";
  if (!out) throw DataError("write failed: " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace woods
