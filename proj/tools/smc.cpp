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

// smc: command-line runner for tag completion and refinement.
//
// Exit status: 0 on success, 2 for usage or configuration errors, 1 for
// everything else (bad data, solver failure, SSC non-convergence). Artifacts
// written before a failure are left in place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tagsmc/dataset.hpp"
#include "tagsmc/error.hpp"
#include "tagsmc/metrics.hpp"
#include "tagsmc/mmio.hpp"
#include "tagsmc/pipeline.hpp"
#include "tagsmc/testkit.hpp"

namespace fs = std::filesystem;
using namespace tagsmc;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_file;
  std::string manifest;
  std::string out;
  std::vector<std::string> overrides;
  int threads = 0;  // 0: keep the config value
};

struct StageOptions {
  std::string labels;          // share: precomputed cluster labels
  std::string affinity;        // share: precomputed affinity
  std::string tags;            // refine: tag matrix to refine instead of the manifest's
  std::string load_factors;    // refine: directory holding P.mtx and Q.mtx
  std::string predictions;     // eval
  std::string truth;           // eval
};

struct SynthOptions {
  testkit::TaggedBundleSpec spec;
  double missing = 0.3;
  double inaccurate = 0.3;
  std::uint64_t noise_seed = 99;
};

void log(const std::string& msg) { std::cerr << "smc: " << msg << '\n'; }

PipelineConfig resolve_config(const CommonOptions& opt) {
  json j = to_json(PipelineConfig{});
  if (!opt.config_file.empty()) {
    std::ifstream in(opt.config_file);
    if (!in) throw ConfigError("--config", "cannot open " + opt.config_file);
    json file = json::parse(in, nullptr, false);
    if (file.is_discarded()) throw ConfigError("--config", opt.config_file + " is not valid JSON");
    if (!file.is_object()) throw ConfigError("--config", "top level must be an object");
    j.merge_patch(file);
  }
  if (!opt.manifest.empty()) j["manifest"] = opt.manifest;
  if (!opt.out.empty()) j["output_dir"] = opt.out;
  if (opt.threads > 0) j["threads"] = opt.threads;
  for (const auto& s : opt.overrides) apply_override(j, s);
  return config_from_json(j);
}

fs::path prepare_output(const PipelineConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::ofstream(cfg.output_dir / "resolved_config.json") << to_json(cfg).dump(2) << '\n';
  return cfg.output_dir;
}

DatasetBundle load_bundle(const PipelineConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("manifest", "no manifest given (--manifest)");
  return load_dataset(cfg.manifest);
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  for (int l : labels) out << l << '\n';
  if (!out) throw FormatError("cannot write " + path.string());
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<int> labels;
  int l = 0;
  while (in >> l) labels.push_back(l);
  if (!in.eof()) throw FormatError(path.string() + ": labels must be integers");
  return labels;
}

void write_trace(const fs::path& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  char buf[32];
  for (double v : trace) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
}

// Returns false when SSC did not converge.
bool write_cluster_stage(const fs::path& dir, const ClusterStage& st, const SscConfig& cfg) {
  mm::write_dense(dir / "Z.mtx", st.rep.z, "self-representation coefficients, row i codes image i");
  mm::write_sparse_of(dir / "affinity.mtx", st.affinity.weights(), "|Z| + |Z|^T");
  write_labels(dir / "labels.txt", st.assignment.labels);
  std::ofstream rep(dir / "ssc_report.txt");
  rep << "converged: " << (st.rep.converged ? "true" : "false") << '\n'
      << "iterations: " << st.rep.iterations << '\n'
      << "max_iters: " << cfg.max_iters << '\n'
      << "reconstruction_residual: " << st.rep.reconstruction_residual << '\n'
      << "affine_residual: " << st.rep.affine_residual << '\n'
      << "split_residual: " << st.rep.split_residual << '\n'
      << "clusters: " << st.assignment.k << '\n'
      << "kmeans_inertia: " << st.assignment.inertia << '\n'
      << "empty_cluster_repairs: " << st.assignment.empty_cluster_repairs << '\n'
      << "unrepaired_empty_clusters: " << st.assignment.unrepaired_empty_clusters << '\n';
  if (!st.rep.converged) {
    log("SSC stopped at max_iters without meeting tol (see ssc_report.txt)");
  }
  return st.rep.converged;
}

void write_refine_stage(const fs::path& dir, const RefineOutput& out) {
  mm::write_tags(dir / "refined.mtx", out.tags, "refined scores clamped to [0,1]");
  mm::write_dense(dir / "scores.mtx", out.scores, "raw refined scores used for ranking");
  mm::write_dense(dir / "P.mtx", out.solve.factors.p);
  mm::write_dense(dir / "Q.mtx", out.solve.factors.q);
  write_trace(dir / "objective_trace.txt", out.solve.objective_trace);
}

void write_eval(const fs::path& dir, const std::vector<EvalReport>& reports) {
  write_eval_report(dir / "eval_report.txt", reports);
  write_eval_csv(dir / "eval_per_image.csv", reports);
  for (const auto& r : reports) {
    log("AP@" + std::to_string(r.n) + " = " + std::to_string(r.ap) + ", AR@" + std::to_string(r.n) +
        " = " + std::to_string(r.ar));
  }
}

Eigen::MatrixXd read_any_matrix(const fs::path& path) {
  std::ifstream in(path);
  std::string header;
  if (!in || !std::getline(in, header)) throw FormatError("cannot open " + path.string());
  if (header.find("coordinate") != std::string::npos) {
    const auto c = mm::read_coordinate(path);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(c.rows, c.cols);
    for (const auto& e : c.entries) m(e.row(), e.col()) += e.value();
    return m;
  }
  return mm::read_dense(path);
}

int cmd_cluster(const CommonOptions& opt) {
  const PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  const DatasetBundle b = load_bundle(cfg);
  const ClusterStage st = run_cluster(b, cfg);
  return write_cluster_stage(dir, st, cfg.ssc) ? 0 : 1;
}

int cmd_share(const CommonOptions& opt, const StageOptions& so) {
  const PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  const DatasetBundle b = load_bundle(cfg);
  bool converged = true;
  TagMatrix completed(1, 1);
  if (!so.labels.empty()) {
    const std::vector<int> labels = read_labels(so.labels);
    SimilarityGraph sims;
    if (cfg.neighbors == NeighborSource::kAffinity) {
      if (so.affinity.empty()) {
        throw ConfigError("--affinity", "needed with --labels when sharing.neighbors is affinity");
      }
      sims = SimilarityGraph(read_any_matrix(so.affinity));
    }
    completed = run_share(b, labels, sims, cfg);
  } else {
    const ClusterStage st = run_cluster(b, cfg);
    converged = write_cluster_stage(dir, st, cfg.ssc);
    completed = run_share(b, st, cfg);
  }
  mm::write_tags(dir / "completed.mtx", completed, "tags after cluster-local sharing");
  log("completed matrix: " + std::to_string(b.tags.nnz()) + " -> " + std::to_string(completed.nnz()) +
      " entries");
  return converged ? 0 : 1;
}

int cmd_refine(const CommonOptions& opt, const StageOptions& so) {
  const PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  const DatasetBundle b = load_bundle(cfg);
  if (!so.load_factors.empty()) {
    const fs::path src = so.load_factors;
    const FactorPair f{mm::read_dense(src / "P.mtx"), mm::read_dense(src / "Q.mtx")};
    if (f.p.rows() != b.image_features.dim() || f.q.rows() != b.tag_features.dim() ||
        f.p.cols() != f.q.cols()) {
      throw DimensionError("loaded factors do not match the feature dimensions");
    }
    const Eigen::MatrixXd scores = predict(b.image_features, b.tag_features, f);
    mm::write_dense(dir / "scores.mtx", scores, "raw refined scores used for ranking");
    mm::write_tags(dir / "refined.mtx", TagMatrix::from_dense_clamped(scores));
    if (b.ground_truth) write_eval(dir, run_eval(scores, *b.ground_truth, cfg));
    return 0;
  }
  const TagMatrix tags = so.tags.empty() ? b.tags : mm::read_tags(so.tags);
  const RefineOutput out = run_refine(b, tags, cfg);
  write_refine_stage(dir, out);
  return 0;
}

int cmd_pipeline(const CommonOptions& opt) {
  const PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  const DatasetBundle b = load_bundle(cfg);
  log("clustering " + std::to_string(b.tags.n_images()) + " images");
  const ClusterStage st = run_cluster(b, cfg);
  const bool converged = write_cluster_stage(dir, st, cfg.ssc);
  log("sharing tags within " + std::to_string(st.assignment.k) + " clusters");
  const TagMatrix completed = run_share(b, st, cfg);
  mm::write_tags(dir / "completed.mtx", completed, "tags after cluster-local sharing");
  log("refining");
  const RefineOutput out = run_refine(b, completed, cfg);
  write_refine_stage(dir, out);
  if (b.ground_truth) write_eval(dir, run_eval(out.scores, *b.ground_truth, cfg));
  return converged ? 0 : 1;
}

int cmd_eval(const CommonOptions& opt, const StageOptions& so) {
  const PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  if (so.predictions.empty()) throw ConfigError("--predictions", "required");
  std::optional<TagMatrix> truth;
  if (!so.truth.empty()) {
    truth = mm::read_tags(so.truth);
  } else {
    truth = load_bundle(cfg).ground_truth;
    if (!truth) throw ConfigError("--truth", "manifest has no ground_truth; pass --truth");
  }
  write_eval(dir, run_eval(read_any_matrix(so.predictions), *truth, cfg));
  return 0;
}

int cmd_synth(const CommonOptions& opt, const SynthOptions& so) {
  PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  DatasetBundle b = testkit::gen_tagged_bundle(so.spec);
  b.tags = inject_noise(*b.ground_truth, {so.missing, so.inaccurate, so.noise_seed});
  const fs::path manifest = save_dataset(b, dir);
  write_labels(dir / "true_labels.txt", testkit::tagged_bundle_labels(so.spec));
  log("wrote " + manifest.string());
  return 0;
}

int cmd_tune(const CommonOptions& opt) {
  const PipelineConfig cfg = resolve_config(opt);
  const fs::path dir = prepare_output(cfg);
  const DatasetBundle b = load_bundle(cfg);
  const TuneResult res = tune(b, cfg);
  std::ofstream csv(dir / "tune_results.csv");
  csv << "rank,lambda1,lambda2,mu,ap@" << cfg.tune.eval_n << '\n';
  char buf[160];
  for (const auto& r : res.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.rank, r.lambda1, r.lambda2, r.mu,
                  r.ap);
    csv << buf;
  }
  PipelineConfig best = cfg;
  best.refine.rank = res.best.rank;
  best.refine.lambda1 = res.best.lambda1;
  best.refine.lambda2 = res.best.lambda2;
  best.refine.mu = res.best.mu;
  std::ofstream(dir / "best_config.json") << to_json(best).dump(2) << '\n';
  log("best: rank " + std::to_string(res.best.rank) + ", lambda1 " + std::to_string(res.best.lambda1) +
      ", lambda2 " + std::to_string(res.best.lambda2) + ", mu " + std::to_string(res.best.mu) +
      ", validation AP " + std::to_string(res.best.ap));
  return 0;
}

void add_common(CLI::App* app, CommonOptions& opt) {
  app->add_option("--config", opt.config_file, "JSON config file");
  app->add_option("--manifest", opt.manifest, "dataset manifest");
  app->add_option("--out", opt.out, "output directory");
  app->add_option("--set", opt.overrides, "override a config value, e.g. refine.mu=0.6")
      ->allow_extra_args(false);
  app->add_option("--threads", opt.threads, "worker threads (default 1)")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tag completion by subspace clustering and refinement by matrix completion"};
  app.require_subcommand(1);
  CommonOptions opt;
  StageOptions so;
  SynthOptions synth;

  auto* cluster = app.add_subcommand("cluster", "SSC, affinity and spectral clustering");
  auto* share = app.add_subcommand("share", "cluster-local tag sharing");
  share->add_option("--labels", so.labels, "cluster labels (one per line); skips clustering");
  share->add_option("--affinity", so.affinity, "affinity .mtx to pair with --labels");
  auto* refine = app.add_subcommand("refine", "matrix-completion refinement");
  refine->add_option("--tags", so.tags, "tag matrix to refine (default: the manifest's tags)");
  refine->add_option("--load-factors", so.load_factors,
                     "directory with P.mtx and Q.mtx; scores the manifest's images without solving");
  auto* pipeline = app.add_subcommand("pipeline", "cluster, share, refine and evaluate");
  auto* eval = app.add_subcommand("eval", "AP@N and AR@N of a prediction matrix");
  eval->add_option("--predictions", so.predictions, "scores or tags .mtx")->required();
  eval->add_option("--truth", so.truth, "ground truth .mtx (default: manifest ground_truth)");
  auto* synthc = app.add_subcommand("synth", "write a synthetic noisy dataset");
  synthc->add_option("--clusters", synth.spec.n_clusters);
  synthc->add_option("--images-per-cluster", synth.spec.images_per_cluster);
  synthc->add_option("--tags", synth.spec.n_tags);
  synthc->add_option("--seed", synth.spec.seed);
  synthc->add_option("--missing", synth.missing, "fraction of true tags removed");
  synthc->add_option("--inaccurate", synth.inaccurate, "spurious tags, as a fraction of true tags");
  synthc->add_option("--noise-seed", synth.noise_seed);
  auto* tunec = app.add_subcommand("tune", "grid search of refinement parameters");

  for (auto* sub : {cluster, share, refine, pipeline, eval, synthc, tunec}) add_common(sub, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cluster->parsed()) return cmd_cluster(opt);
    if (share->parsed()) return cmd_share(opt, so);
    if (refine->parsed()) return cmd_refine(opt, so);
    if (pipeline->parsed()) return cmd_pipeline(opt);
    if (eval->parsed()) return cmd_eval(opt, so);
    if (synthc->parsed()) return cmd_synth(opt, synth);
    if (tunec->parsed()) return cmd_tune(opt);
  } catch (const ConfigError& e) {
    std::cerr << "smc: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "smc: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
