// src/data.cpp

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

#include "woods/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "woods/errors.hpp"
#include "woods/rng.hpp"

namespace woods {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no,
                    const std::string& column) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric value '" +
                    text + "' in column " + column);
  }
  if (consumed != text.size()) {
    throw DataError("line " + std::to_string(line_no) + ": trailing junk in value '" +
                    text + "' in column " + column);
  }
  return v;
}

// Resolves the requested columns against the header; empty request means all
// columns except `exclude`.
std::vector<std::size_t> resolve_columns(const std::vector<std::string>& header,
                                         const std::vector<std::string>& requested,
                                         const std::string& exclude) {
  std::vector<std::size_t> idx;
  if (requested.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] != exclude) idx.push_back(i);
    }
    return idx;
  }
  for (const std::string& name : requested) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError("unknown column '" + name + "' in CSV header");
    }
    idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return idx;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // raw fields
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (line_no == 1) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw DataError("empty CSV: " + path.string());
  return table;
}

Vector sample_gaussian(const GaussianComponent& comp, const Matrix* chol, Rng& rng) {
  const std::size_t d = comp.mean.size();
  Vector z(d);
  for (double& v : z) v = rng.normal();
  Vector x(comp.mean);
  if (chol) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) x[i] += (*chol)(i, j) * z[j];
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) x[i] += std::sqrt(comp.cov_diag[i]) * z[i];
  }
  return x;
}

// nullptr for diagonal components; validated either way.
std::optional<Matrix> component_chol(const GaussianComponent& comp) {
  if (comp.cov_full.size() > 0) {
    if (comp.cov_full.rows() != comp.mean.size()) {
      throw ConfigError("gaussian component: covariance dim does not match mean");
    }
    return cholesky(comp.cov_full);
  }
  if (comp.cov_diag.size() != comp.mean.size()) {
    throw ConfigError("gaussian component: diagonal covariance dim does not match mean");
  }
  for (double v : comp.cov_diag) {
    if (v <= 0.0 || !std::isfinite(v)) {
      throw ConfigError("gaussian component: diagonal covariance not positive definite");
    }
  }
  return std::nullopt;
}

}  // namespace

void LabeledDataset::validate() const {
  if (features.size() != labels.size()) {
    throw ConfigError("dataset: features/labels length mismatch");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) throw ConfigError("dataset: ragged feature row");
    if (!all_finite(features[i])) throw ConfigError("dataset: non-finite feature");
    if (labels[i] >= num_classes) throw ConfigError("dataset: label out of range");
  }
}

double WildDataset::out_fraction() const {
  if (provenance.empty()) return 0.0;
  std::size_t n_out = 0;
  for (Provenance p : provenance) n_out += p == Provenance::kFromOut ? 1 : 0;
  return static_cast<double>(n_out) / static_cast<double>(provenance.size());
}

std::vector<Vector> gen_gaussian_samples(const GaussianComponent& component,
                                         std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ConfigError("gen_gaussian_samples: zero count");
  const std::optional<Matrix> chol = component_chol(component);
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sample_gaussian(component, chol ? &*chol : nullptr, rng));
  }
  return out;
}

LabeledDataset gen_gaussian_labeled(const std::vector<GaussianComponent>& components,
                                    const std::vector<std::size_t>& counts,
                                    std::uint64_t seed) {
  if (components.size() < 2) throw ConfigError("gaussian ID data: need K >= 2 classes");
  if (counts.size() != components.size()) {
    throw ConfigError("gaussian ID data: one count per class required");
  }
  LabeledDataset id;
  id.dim = components.front().mean.size();
  id.num_classes = components.size();
  Rng rng(seed);
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (counts[k] == 0) throw ConfigError("gaussian ID data: zero count for a class");
    if (components[k].mean.size() != id.dim) {
      throw ConfigError("gaussian ID data: mixed dimensions");
    }
    const std::optional<Matrix> chol = component_chol(components[k]);
    for (std::size_t i = 0; i < counts[k]; ++i) {
      id.features.push_back(sample_gaussian(components[k], chol ? &*chol : nullptr, rng));
      id.labels.push_back(k);
    }
  }
  return id;
}

std::pair<LabeledDataset, std::vector<Vector>> gen_gaussian_task(
    const GaussianTaskSpec& spec, std::uint64_t seed) {
  if (spec.id_components.size() < 2) {
    throw ConfigError("gaussian task: need at least 2 ID classes");
  }
  if (spec.id_counts.size() != spec.id_components.size()) {
    throw ConfigError("gaussian task: one count per ID class required");
  }
  for (std::size_t c : spec.id_counts) {
    if (c == 0) throw ConfigError("gaussian task: zero count for an ID class");
  }
  if (spec.ood_count == 0) throw ConfigError("gaussian task: zero OOD count");

  const std::size_t d = spec.id_components.front().mean.size();
  for (const GaussianComponent& comp : spec.id_components) {
    if (comp.mean.size() != d) throw ConfigError("gaussian task: mixed dimensions");
  }
  if (spec.ood_component.mean.size() != d) {
    throw ConfigError("gaussian task: OOD dimension differs from ID");
  }

  Rng rng(seed);
  LabeledDataset id;
  id.dim = d;
  id.num_classes = spec.id_components.size();
  for (std::size_t k = 0; k < spec.id_components.size(); ++k) {
    const std::optional<Matrix> chol = component_chol(spec.id_components[k]);
    for (std::size_t i = 0; i < spec.id_counts[k]; ++i) {
      id.features.push_back(
          sample_gaussian(spec.id_components[k], chol ? &*chol : nullptr, rng));
      id.labels.push_back(k);
    }
  }
  const std::optional<Matrix> ood_chol = component_chol(spec.ood_component);
  std::vector<Vector> ood_pool;
  ood_pool.reserve(spec.ood_count);
  for (std::size_t i = 0; i < spec.ood_count; ++i) {
    ood_pool.push_back(
        sample_gaussian(spec.ood_component, ood_chol ? &*ood_chol : nullptr, rng));
  }
  return {std::move(id), std::move(ood_pool)};
}

std::pair<LabeledDataset, std::vector<Vector>> gen_moons_ring_task(
    const MoonsRingSpec& spec, std::uint64_t seed) {
  if (spec.noise < 0.0) throw ConfigError("moons task: negative noise");
  if (spec.count_per_moon == 0) throw ConfigError("moons task: zero moon count");
  if (spec.ood_count == 0) throw ConfigError("moons task: zero OOD count");
  if (spec.ring_radius <= 0.0) throw ConfigError("moons task: ring radius must be > 0");

  Rng rng(seed);
  LabeledDataset id;
  id.dim = 2;
  id.num_classes = 2;
  // Upper moon: unit half-circle; lower moon shifted to interleave. The
  // noiseless points live in x in [-1, 2], y in [-0.5, 1].
  for (std::size_t i = 0; i < spec.count_per_moon; ++i) {
    const double t = rng.uniform(0.0, kPi);
    id.features.push_back({std::cos(t) + spec.noise * rng.normal(),
                           std::sin(t) + spec.noise * rng.normal()});
    id.labels.push_back(0);
  }
  for (std::size_t i = 0; i < spec.count_per_moon; ++i) {
    const double t = rng.uniform(0.0, kPi);
    id.features.push_back({1.0 - std::cos(t) + spec.noise * rng.normal(),
                           0.5 - std::sin(t) + spec.noise * rng.normal()});
    id.labels.push_back(1);
  }
  // OOD ring around the moons' midpoint.
  const double cx = 0.5;
  const double cy = 0.25;
  std::vector<Vector> ood_pool;
  ood_pool.reserve(spec.ood_count);
  for (std::size_t i = 0; i < spec.ood_count; ++i) {
    const double a = rng.uniform(0.0, 2.0 * kPi);
    const double r = spec.ring_radius + spec.noise * rng.normal();
    ood_pool.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return {std::move(id), std::move(ood_pool)};
}

WildDataset make_wild(const std::vector<Vector>& id_pool,
                      const std::vector<Vector>& ood_pool, const MixtureSpec& spec) {
  if (spec.pi <= 0.0 || spec.pi > 1.0) {
    throw ConfigError("make_wild: pi must be in (0, 1]");
  }
  if (ood_pool.empty()) throw ConfigError("make_wild: empty OOD pool");
  if (spec.pi < 1.0 && id_pool.empty()) {
    throw ConfigError("make_wild: empty ID pool with pi < 1");
  }

  Rng rng(spec.seed);
  WildDataset wild;
  wild.feats.reserve(spec.m);
  wild.provenance.reserve(spec.m);

  std::vector<bool> from_out(spec.m, false);
  if (spec.fixed_counts) {
    // Exact floor(pi*m) OOD positions, placed by a Fisher-Yates shuffle.
    const std::size_t n_out =
        static_cast<std::size_t>(std::floor(spec.pi * static_cast<double>(spec.m)));
    for (std::size_t i = 0; i < n_out; ++i) from_out[i] = true;
    for (std::size_t i = spec.m; i > 1; --i) {
      const std::size_t j = rng.index(i);
      std::swap(from_out[i - 1], from_out[j]);
    }
  } else {
    for (std::size_t i = 0; i < spec.m; ++i) from_out[i] = rng.bernoulli(spec.pi);
  }
  for (std::size_t i = 0; i < spec.m; ++i) {
    if (from_out[i]) {
      wild.feats.push_back(ood_pool[rng.index(ood_pool.size())]);
      wild.provenance.push_back(Provenance::kFromOut);
    } else {
      wild.feats.push_back(id_pool[rng.index(id_pool.size())]);
      wild.provenance.push_back(Provenance::kFromIn);
    }
  }
  return wild;
}

std::vector<LabeledDataset> split(const LabeledDataset& dataset,
                                  const std::vector<double>& fractions,
                                  std::uint64_t seed) {
  if (fractions.empty()) throw ConfigError("split: no fractions");
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0 || f > 1.0) throw ConfigError("split: fraction outside [0, 1]");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split: fractions sum to " + std::to_string(total));
  }

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.index(i);
    std::swap(order[i - 1], order[j]);
  }

  std::vector<LabeledDataset> parts;
  double cum = 0.0;
  std::size_t begin = 0;
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    cum += fractions[p];
    const std::size_t end =
        p + 1 == fractions.size()
            ? n
            : static_cast<std::size_t>(std::llround(cum * static_cast<double>(n)));
    LabeledDataset part;
    part.dim = dataset.dim;
    part.num_classes = dataset.num_classes;
    for (std::size_t i = begin; i < end; ++i) {
      part.features.push_back(dataset.features[order[i]]);
      part.labels.push_back(dataset.labels[order[i]]);
    }
    parts.push_back(std::move(part));
    begin = end;
  }
  return parts;
}

CsvLabeledData load_labeled_csv(const std::filesystem::path& path,
                                const std::string& label_column,
                                const std::vector<std::string>& feature_columns) {
  const CsvTable table = read_csv(path);
  auto label_it = std::find(table.header.begin(), table.header.end(), label_column);
  if (label_it == table.header.end()) {
    throw DataError("label column '" + label_column + "' not found in " + path.string());
  }
  const std::size_t label_idx = static_cast<std::size_t>(label_it - table.header.begin());
  const std::vector<std::size_t> feat_idx =
      resolve_columns(table.header, feature_columns, label_column);
  if (feat_idx.empty()) throw DataError("no feature columns in " + path.string());

  CsvLabeledData out;
  out.data.dim = feat_idx.size();
  std::map<std::string, std::size_t> label_map;  // string -> dense index
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::size_t line_no = r + 2;
    const auto& row = table.rows[r];
    Vector x;
    x.reserve(feat_idx.size());
    for (std::size_t c : feat_idx) {
      x.push_back(parse_double(row[c], line_no, table.header[c]));
    }
    const std::string& label_str = row[label_idx];
    auto [it, inserted] = label_map.try_emplace(label_str, out.label_names.size());
    if (inserted) out.label_names.push_back(label_str);
    out.data.features.push_back(std::move(x));
    out.data.labels.push_back(it->second);
  }
  out.data.num_classes = out.label_names.size();
  out.data.validate();
  return out;
}

std::vector<Vector> load_feature_csv(const std::filesystem::path& path,
                                     const std::vector<std::string>& feature_columns) {
  const CsvTable table = read_csv(path);
  const std::vector<std::size_t> feat_idx =
      resolve_columns(table.header, feature_columns, "");
  std::vector<Vector> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::size_t line_no = r + 2;
    Vector x;
    x.reserve(feat_idx.size());
    for (std::size_t c : feat_idx) {
      x.push_back(parse_double(table.rows[r][c], line_no, table.header[c]));
    }
    out.push_back(std::move(x));
  }
  return out;
}

void write_labeled_csv(const std::filesystem::path& path, const LabeledDataset& data,
                       const std::vector<std::string>& label_names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "label";
  for (std::size_t j = 0; j < data.dim; ++j) out << ",f" << j;
  out << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (label_names.empty()) {
      out << data.labels[i];
    } else {
      out << label_names[data.labels[i]];
    }
    for (double v : data.features[i]) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<Vector>& features) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const std::size_t dim = features.empty() ? 0 : features.front().size();
  for (std::size_t j = 0; j < dim; ++j) out << (j ? "," : "") << "f" << j;
  out << "\n";
  for (const Vector& x : features) {
    for (std::size_t j = 0; j < x.size(); ++j) out << (j ? "," : "") << format_double(x[j]);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void write_provenance_csv(const std::filesystem::path& path, const WildDataset& wild) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "index,origin\n";
  for (std::size_t i = 0; i < wild.provenance.size(); ++i) {
    out << i << "," << (wild.provenance[i] == Provenance::kFromOut ? "out" : "in") << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Provenance> load_provenance_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::vector<Provenance> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& origin = table.rows[r].back();
    if (origin == "in") {
      out.push_back(Provenance::kFromIn);
    } else if (origin == "out") {
      out.push_back(Provenance::kFromOut);
    } else {
      throw DataError("line " + std::to_string(r + 2) + ": bad origin '" + origin + "'");
    }
  }
  return out;
}

}  // namespace woods
