// include/woods/data.hpp

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

#ifndef WOODS_DATA_HPP_
#define WOODS_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "woods/matrix.hpp"
#include "woods/numeric.hpp"

namespace woods {

struct LabeledDataset {
  std::vector<Vector> features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::size_t dim = 0;

  std::size_t size() const { return features.size(); }
  void validate() const;  // throws ConfigError on broken invariants
};

enum class Provenance : std::uint8_t { kFromIn, kFromOut };

// Unlabeled mixture samples. The provenance flags exist for evaluation only;
// training code receives features() and cannot see them.
struct WildDataset {
  std::vector<Vector> feats;
  std::vector<Provenance> provenance;

  std::size_t size() const { return feats.size(); }
  const std::vector<Vector>& features() const { return feats; }
  double out_fraction() const;
};

struct MixtureSpec {
  double pi = 0.1;        // probability a wild sample comes from the OOD pool
  std::size_t m = 0;      // number of wild samples
  std::uint64_t seed = 0;
  bool fixed_counts = false;  // exact floor(pi*m) OOD samples instead of Bernoulli
};

// One Gaussian component; cov may be a diagonal given as a vector or a full
// symmetric positive definite matrix.
struct GaussianComponent {
  Vector mean;
  Vector cov_diag;  // used when cov_full is empty
  Matrix cov_full;  // optional full covariance
};

struct GaussianTaskSpec {
  std::vector<GaussianComponent> id_components;  // one per class, K >= 2
  std::vector<std::size_t> id_counts;            // per class
  GaussianComponent ood_component;
  std::size_t ood_count = 0;
};

std::pair<LabeledDataset, std::vector<Vector>> gen_gaussian_task(
    const GaussianTaskSpec& spec, std::uint64_t seed);

// Granular pieces used by the experiment pipeline.
std::vector<Vector> gen_gaussian_samples(const GaussianComponent& component,
                                         std::size_t count, std::uint64_t seed);
LabeledDataset gen_gaussian_labeled(const std::vector<GaussianComponent>& components,
                                    const std::vector<std::size_t>& counts,
                                    std::uint64_t seed);

struct MoonsRingSpec {
  double noise = 0.1;
  std::size_t count_per_moon = 500;
  std::size_t ood_count = 500;
  double ring_radius = 3.0;  // must exceed the moon extent; 0 is an error
};

// Two interleaved half-circles as ID classes, a surrounding ring as OOD.
std::pair<LabeledDataset, std::vector<Vector>> gen_moons_ring_task(
    const MoonsRingSpec& spec, std::uint64_t seed);

// Huber-contamination sampler: each of m draws picks the OOD pool with
// probability pi (or exact counts in fixed mode), then a uniform
// with-replacement element.
WildDataset make_wild(const std::vector<Vector>& id_pool,
                      const std::vector<Vector>& ood_pool, const MixtureSpec& spec);

// Deterministic disjoint shuffle-split; fractions must sum to 1 within 1e-9.
std::vector<LabeledDataset> split(const LabeledDataset& dataset,
                                  const std::vector<double>& fractions,
                                  std::uint64_t seed);

// --- CSV ingestion / emission ------------------------------------------

struct CsvLabeledData {
  LabeledDataset data;
  std::vector<std::string> label_names;  // dense index -> original string
};

// Parses a headered CSV. label_column names the class column; feature_columns
// may be empty meaning "all other columns in header order".
CsvLabeledData load_labeled_csv(const std::filesystem::path& path,
                                const std::string& label_column,
                                const std::vector<std::string>& feature_columns = {});

std::vector<Vector> load_feature_csv(const std::filesystem::path& path,
                                     const std::vector<std::string>& feature_columns = {});

void write_labeled_csv(const std::filesystem::path& path, const LabeledDataset& data,
                       const std::vector<std::string>& label_names = {});
void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<Vector>& features);
// Provenance side-file: index,origin rows with origin in {in, out}.
void write_provenance_csv(const std::filesystem::path& path, const WildDataset& wild);
std::vector<Provenance> load_provenance_csv(const std::filesystem::path& path);

}  // namespace woods

#endif  // WOODS_DATA_HPP_
