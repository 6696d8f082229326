// Copyright 2026 The tagsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tagsmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <set>

#include "parallel.hpp"
#include "tagsmc/error.hpp"

namespace tagsmc {

using nlohmann::json;

void PipelineConfig::validate() const {
  ssc.validate();
  if (k < 1) throw ConfigError("cluster.k", "must be >= 1");
  if (eigengap && eigengap_max < 1) throw ConfigError("cluster.eigengap_max", "must be >= 1");
  sharing.validate();
  refine.validate();
  if (eval_n.empty()) throw ConfigError("eval.n", "needs at least one cutoff");
  for (auto n : eval_n) {
    if (n < 1) throw ConfigError("eval.n", "cutoffs must be >= 1");
  }
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  if (!(tune.validation_fraction > 0.0 && tune.validation_fraction <= 1.0)) {
    throw ConfigError("tune.validation_fraction", "must be in (0,1]");
  }
  if (tune.eval_n < 1) throw ConfigError("tune.eval_n", "must be >= 1");
  if (tune.rank.empty() || tune.lambda1.empty() || tune.lambda2.empty() || tune.mu.empty()) {
    throw ConfigError("tune", "every grid axis needs at least one value");
  }
  for (double m : tune.mu) {
    if (!(m >= 0.0 && m < 1.0)) throw ConfigError("tune.mu", "values must be in [0,1)");
  }
}

json to_json(const PipelineConfig& c) {
  json j;
  j["manifest"] = c.manifest.string();
  j["output_dir"] = c.output_dir.string();
  j["threads"] = c.threads;
  j["ssc"] = {{"mu", c.ssc.mu},
              {"max_iters", c.ssc.max_iters},
              {"tol", c.ssc.tol},
              {"penalty_init", c.ssc.penalty_init},
              {"penalty_growth", c.ssc.penalty_growth},
              {"penalty_max", c.ssc.penalty_max},
              {"normalize_rows", c.ssc.normalize_rows}};
  j["cluster"] = {{"k", c.k},
                  {"seed", c.cluster_seed},
                  {"eigengap", c.eigengap},
                  {"eigengap_max", c.eigengap_max}};
  j["sharing"] = {{"n_neighbors", c.sharing.n_neighbors},
                  {"w_local", c.sharing.w_local},
                  {"w_cooc", c.sharing.w_cooc},
                  {"w_freq", c.sharing.w_freq},
                  {"max_added_per_image", c.sharing.max_added_per_image},
                  {"min_confidence", c.sharing.min_confidence},
                  {"neighbors", c.neighbors == NeighborSource::kAffinity ? "affinity" : "cosine"}};
  j["refine"] = {{"rank", c.refine.rank},
                 {"lambda1", c.refine.lambda1},
                 {"lambda2", c.refine.lambda2},
                 {"mu", c.refine.mu},
                 {"outer_iters", c.refine.outer_iters},
                 {"cg_iters", c.refine.cg_iters},
                 {"cg_tol", c.refine.cg_tol},
                 {"rel_tol", c.refine.rel_tol},
                 {"seed", c.refine.seed},
                 {"rectification", c.rectification == Rectification::kClamp ? "clamp" : "shift"}};
  j["eval"] = {{"n", c.eval_n},
               {"empty_truth", c.empty_truth == EmptyTruthPolicy::kExclude ? "exclude" : "zero"}};
  j["tune"] = {{"rank", c.tune.rank},
               {"lambda1", c.tune.lambda1},
               {"lambda2", c.tune.lambda2},
               {"mu", c.tune.mu},
               {"validation_fraction", c.tune.validation_fraction},
               {"validation_seed", c.tune.validation_seed},
               {"eval_n", c.tune.eval_n}};
  return j;
}

namespace {

// Reads typed fields from one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name(key), std::string("wrong type: ") + e.what());
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    static const json kEmpty = json::object();
    return Section(it == j_.end() ? kEmpty : *it, name(key));
  }

  template <typename Enum>
  void get_enum(const char* key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> map) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    for (const auto& [label, value] : map) {
      if (s == label) {
        out = value;
        return;
      }
    }
    throw ConfigError(name(key), "unknown value '" + s + "'");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(name(it.key().c_str()), "unknown key");
    }
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  Section root(j, "");
  std::string manifest = c.manifest.string(), out = c.output_dir.string();
  root.get("manifest", manifest);
  root.get("output_dir", out);
  c.manifest = manifest;
  c.output_dir = out;
  root.get("threads", c.threads);

  Section ssc = root.child("ssc");
  ssc.get("mu", c.ssc.mu);
  ssc.get("max_iters", c.ssc.max_iters);
  ssc.get("tol", c.ssc.tol);
  ssc.get("penalty_init", c.ssc.penalty_init);
  ssc.get("penalty_growth", c.ssc.penalty_growth);
  ssc.get("penalty_max", c.ssc.penalty_max);
  ssc.get("normalize_rows", c.ssc.normalize_rows);
  ssc.finish();

  Section cl = root.child("cluster");
  cl.get("k", c.k);
  cl.get("seed", c.cluster_seed);
  cl.get("eigengap", c.eigengap);
  cl.get("eigengap_max", c.eigengap_max);
  cl.finish();

  Section sh = root.child("sharing");
  sh.get("n_neighbors", c.sharing.n_neighbors);
  sh.get("w_local", c.sharing.w_local);
  sh.get("w_cooc", c.sharing.w_cooc);
  sh.get("w_freq", c.sharing.w_freq);
  sh.get("max_added_per_image", c.sharing.max_added_per_image);
  sh.get("min_confidence", c.sharing.min_confidence);
  sh.get_enum("neighbors", c.neighbors,
              {{"affinity", NeighborSource::kAffinity}, {"cosine", NeighborSource::kCosine}});
  sh.finish();

  Section rf = root.child("refine");
  rf.get("rank", c.refine.rank);
  rf.get("lambda1", c.refine.lambda1);
  rf.get("lambda2", c.refine.lambda2);
  rf.get("mu", c.refine.mu);
  rf.get("outer_iters", c.refine.outer_iters);
  rf.get("cg_iters", c.refine.cg_iters);
  rf.get("cg_tol", c.refine.cg_tol);
  rf.get("rel_tol", c.refine.rel_tol);
  rf.get("seed", c.refine.seed);
  rf.get_enum("rectification", c.rectification,
              {{"clamp", Rectification::kClamp}, {"shift", Rectification::kShift}});
  rf.finish();

  Section ev = root.child("eval");
  ev.get("n", c.eval_n);
  ev.get_enum("empty_truth", c.empty_truth,
              {{"exclude", EmptyTruthPolicy::kExclude}, {"zero", EmptyTruthPolicy::kCountAsZero}});
  ev.finish();

  Section tn = root.child("tune");
  tn.get("rank", c.tune.rank);
  tn.get("lambda1", c.tune.lambda1);
  tn.get("lambda2", c.tune.lambda2);
  tn.get("mu", c.tune.mu);
  tn.get("validation_fraction", c.tune.validation_fraction);
  tn.get("validation_seed", c.tune.validation_seed);
  tn.get("eval_n", c.tune.eval_n);
  tn.finish();

  root.finish();
  c.refine.threads = c.threads;
  c.validate();
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like section.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty key segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError(path, "is not a section");
      *node = json::object();
    }
    start = dot + 1;
  }
}

ClusterStage run_cluster(const DatasetBundle& bundle, const PipelineConfig& config) {
  ClusterStage st;
  st.rep = ssc_solve(bundle.image_features, config.ssc);
  st.affinity = affinity(st.rep);
  int k = config.k;
  if (config.eigengap) {
    k = estimate_k_eigengap(st.affinity,
                            std::min<int>(config.eigengap_max, static_cast<int>(st.affinity.size()) - 1));
  }
  st.assignment = spectral_cluster(st.affinity, k, config.cluster_seed);
  return st;
}

TagMatrix run_share(const DatasetBundle& bundle, const std::vector<int>& labels,
                    const SimilarityGraph& affinity, const PipelineConfig& config) {
  ClusterAssignment assignment;
  assignment.labels = labels;
  assignment.k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (config.neighbors == NeighborSource::kCosine) {
    return share_tags(bundle.tags, assignment,
                      cosine_similarity_graph(bundle.image_features, config.rectification),
                      config.sharing, config.threads);
  }
  return share_tags(bundle.tags, assignment, affinity, config.sharing, config.threads);
}

TagMatrix run_share(const DatasetBundle& bundle, const ClusterStage& clusters,
                    const PipelineConfig& config) {
  return run_share(bundle, clusters.assignment.labels, clusters.affinity, config);
}

RefineOutput run_refine(const DatasetBundle& bundle, const TagMatrix& tags,
                        const PipelineConfig& config) {
  const GraphLaplacian l_v =
      graph_laplacian(cosine_similarity_graph(bundle.image_features, config.rectification));
  const GraphLaplacian l_s =
      graph_laplacian(cosine_similarity_graph(bundle.tag_features, config.rectification));
  return refine({tags, bundle.image_features, bundle.tag_features, l_v, l_s}, config.refine);
}

std::vector<EvalReport> run_eval(const Eigen::MatrixXd& scores, const TagMatrix& truth,
                                 const PipelineConfig& config) {
  std::vector<EvalReport> out;
  for (auto n : config.eval_n) out.push_back(ap_ar_at_n(scores, truth, n, config.empty_truth));
  return out;
}

PipelineResult run_pipeline(const DatasetBundle& bundle, const PipelineConfig& config) {
  config.validate();
  PipelineResult r;
  r.clusters = run_cluster(bundle, config);
  r.completed = run_share(bundle, r.clusters, config);
  r.refined = run_refine(bundle, r.completed, config);
  if (bundle.ground_truth) r.reports = run_eval(r.refined.scores, *bundle.ground_truth, config);
  return r;
}

TuneResult tune(const DatasetBundle& bundle, const PipelineConfig& config) {
  config.validate();
  const ClusterStage clusters = run_cluster(bundle, config);
  return tune(bundle, run_share(bundle, clusters, config), config);
}

TuneResult tune(const DatasetBundle& bundle, const TagMatrix& completed,
                const PipelineConfig& config) {
  config.validate();
  if (!bundle.ground_truth) throw ValueError("tuning needs a ground_truth matrix in the manifest");
  const TagMatrix& truth = *bundle.ground_truth;

  TuneResult res;
  for (Index i = 0; i < truth.n_images(); ++i) {
    if (truth.matrix().row(i).nonZeros() > 0) res.validation_images.push_back(i);
  }
  if (res.validation_images.empty()) throw ValueError("ground truth has no annotated images");
  std::mt19937_64 rng(config.tune.validation_seed);
  std::shuffle(res.validation_images.begin(), res.validation_images.end(), rng);
  const auto keep = static_cast<std::size_t>(
      std::ceil(config.tune.validation_fraction * static_cast<double>(res.validation_images.size())));
  res.validation_images.resize(std::max<std::size_t>(1, keep));
  std::sort(res.validation_images.begin(), res.validation_images.end());

  for (int r : config.tune.rank) {
    for (double l1 : config.tune.lambda1) {
      for (double l2 : config.tune.lambda2) {
        for (double m : config.tune.mu) res.rows.push_back({r, l1, l2, m, 0.0});
      }
    }
  }

  const GraphLaplacian l_v =
      graph_laplacian(cosine_similarity_graph(bundle.image_features, config.rectification));
  const GraphLaplacian l_s =
      graph_laplacian(cosine_similarity_graph(bundle.tag_features, config.rectification));
  const RefineInputs in{completed, bundle.image_features, bundle.tag_features, l_v, l_s};
  detail::parallel_for(res.rows.size(), config.threads, [&](std::size_t g) {
    TuneRow& row = res.rows[g];
    RefineConfig rc = config.refine;
    rc.rank = row.rank;
    rc.lambda1 = row.lambda1;
    rc.lambda2 = row.lambda2;
    rc.mu = row.mu;
    rc.threads = 1;
    const RefineOutput out = refine(in, rc);
    row.ap = ap_ar_at_n(out.scores, truth, config.tune.eval_n, res.validation_images).ap;
  });

  res.best = res.rows.front();
  for (const auto& row : res.rows) {
    if (row.ap > res.best.ap) res.best = row;
  }
  return res;
}

}  // namespace tagsmc
