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

#include "tagsmc/refine.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "tagsmc/error.hpp"

namespace tagsmc {

void RefineConfig::validate() const {
  if (rank < 1) throw ConfigError("refine.rank", "must be >= 1");
  if (!(lambda1 >= 0.0)) throw ConfigError("refine.lambda1", "must be >= 0");
  if (!(lambda2 >= 0.0)) throw ConfigError("refine.lambda2", "must be >= 0");
  if (!(mu >= 0.0 && mu < 1.0)) throw ConfigError("refine.mu", "must be in [0,1), got " + std::to_string(mu));
  if (outer_iters < 1) throw ConfigError("refine.outer_iters", "must be >= 1");
  if (cg_iters < 1) throw ConfigError("refine.cg_iters", "must be >= 1");
  if (!(cg_tol > 0.0)) throw ConfigError("refine.cg_tol", "must be > 0");
  if (!(rel_tol >= 0.0)) throw ConfigError("refine.rel_tol", "must be >= 0");
  if (threads < 1) throw ConfigError("refine.threads", "must be >= 1");
}

WeightMask::WeightMask(const TagMatrix& tags, double mu) : tags_(&tags), mu_(mu) {
  if (!(mu >= 0.0 && mu < 1.0)) throw ValueError("mu must be in [0,1)");
}

double WeightMask::weight(Index image, Index tag) const {
  return tags_->annotated(image, tag) ? 1.0 : 1.0 - mu_;
}

Eigen::MatrixXd WeightMask::dense() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(tags_->n_images(), tags_->n_tags(), 1.0 - mu_);
  for (const auto& e : tags_->triplets()) w(e.row(), e.col()) = 1.0;
  return w;
}

namespace {

// One side of the bilinear model, oriented so that the free factor multiplies
// `x` from the right: O_hat(side) = x F B^T, with B the other side's x times
// its factor. For the P side this is O_hat itself; for Q it is O_hat^T.
struct Side {
  const Eigen::MatrixXd* x = nullptr;
  const Eigen::MatrixXd* lap = nullptr;
  SparseRowMatrix o;           // observed matrix with this side as rows
  Eigen::MatrixXd gram;        // x^T x
  Eigen::MatrixXd lap_gram;    // x^T L x
  Eigen::MatrixXd fixed_gram;  // (1 - mu) x^T x + lambda2 x^T L x
};

struct Problem {
  Side img;
  Side tag;
  double mu = 0;
  double lambda1 = 0;
  double lambda2 = 0;
  int threads = 1;
};

// Quantities that depend on the fixed factor during one half-step.
struct Frozen {
  Eigen::MatrixXd b;        // N_other x r
  Eigen::MatrixXd btb;      // b^T b
  Eigen::MatrixXd bt_lap_b; // b^T L_other b
};

void check_inputs(const RefineInputs& in, const RefineConfig& config) {
  config.validate();
  std::ostringstream os;
  if (in.v.n_rows() != in.tags.n_images()) {
    os << "image features have " << in.v.n_rows() << " rows, tag matrix has "
       << in.tags.n_images() << " images";
  } else if (in.t.n_rows() != in.tags.n_tags()) {
    os << "tag features have " << in.t.n_rows() << " rows, tag matrix has " << in.tags.n_tags()
       << " tags";
  } else if (in.l_v.size() != in.tags.n_images()) {
    os << "image Laplacian is " << in.l_v.size() << "x" << in.l_v.size() << ", expected "
       << in.tags.n_images();
  } else if (in.l_s.size() != in.tags.n_tags()) {
    os << "tag Laplacian is " << in.l_s.size() << "x" << in.l_s.size() << ", expected "
       << in.tags.n_tags();
  } else if (config.rank > std::min(in.v.dim(), in.t.dim())) {
    os << "rank " << config.rank << " exceeds feature dimensions (" << in.v.dim() << ", "
       << in.t.dim() << ")";
  }
  if (!os.str().empty()) throw DimensionError(os.str());
}

void check_factors(const RefineInputs& in, const FactorPair& f, const RefineConfig& config) {
  if (f.p.rows() != in.v.dim() || f.q.rows() != in.t.dim() || f.p.cols() != f.q.cols() ||
      f.p.cols() != config.rank) {
    std::ostringstream os;
    os << "factor shapes P " << f.p.rows() << "x" << f.p.cols() << " and Q " << f.q.rows() << "x"
       << f.q.cols() << " do not match f_i=" << in.v.dim() << ", f_t=" << in.t.dim()
       << ", rank=" << config.rank;
    throw DimensionError(os.str());
  }
}

Side make_side(const Eigen::MatrixXd& x, const Eigen::MatrixXd& lap, SparseRowMatrix o,
               double mu, double lambda2) {
  Side s;
  s.x = &x;
  s.lap = &lap;
  s.o = std::move(o);
  s.gram = x.transpose() * x;
  s.lap_gram = x.transpose() * (lap * x);
  s.fixed_gram = (1.0 - mu) * s.gram + lambda2 * s.lap_gram;
  return s;
}

Problem make_problem(const RefineInputs& in, const RefineConfig& config) {
  Problem pb;
  pb.mu = config.mu;
  pb.lambda1 = config.lambda1;
  pb.lambda2 = config.lambda2;
  pb.threads = config.threads;
  pb.img = make_side(in.v.data(), in.l_v.matrix(), in.tags.matrix(), config.mu, config.lambda2);
  pb.tag = make_side(in.t.data(), in.l_s.matrix(), SparseRowMatrix(in.tags.matrix().transpose()),
                     config.mu, config.lambda2);
  return pb;
}

Frozen freeze(const Side& other, const Eigen::MatrixXd& other_factor) {
  Frozen fz;
  fz.b = (*other.x) * other_factor;
  fz.btb = fz.b.transpose() * fz.b;
  fz.bt_lap_b = fz.b.transpose() * ((*other.lap) * fz.b);
  return fz;
}

// Rows i of sum_{j annotated} <xf_i, b_j> b_j.
Eigen::MatrixXd annotated_product(const Side& s, const Eigen::MatrixXd& xf, const Eigen::MatrixXd& b,
                                  int threads) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(xf.rows(), xf.cols());
  constexpr Index kChunk = 256;
  const auto chunks = static_cast<std::size_t>((xf.rows() + kChunk - 1) / kChunk);
  detail::parallel_for(chunks, threads, [&](std::size_t c) {
    const Index lo = static_cast<Index>(c) * kChunk;
    const Index hi = std::min(xf.rows(), lo + kChunk);
    for (Index i = lo; i < hi; ++i) {
      for (SparseRowMatrix::InnerIterator it(s.o, i); it; ++it) {
        m.row(i).noalias() += xf.row(i).dot(b.row(it.col())) * b.row(it.col());
      }
    }
  });
  return m;
}

// Hessian-vector product of the half-step quadratic (constant in the free factor).
Eigen::MatrixXd apply_hessian(const Problem& pb, const Side& s, const Frozen& fz,
                              const Eigen::MatrixXd& d) {
  Eigen::MatrixXd out = s.fixed_gram * d * fz.btb;
  if (pb.lambda2 != 0.0) out.noalias() += pb.lambda2 * (s.gram * d * fz.bt_lap_b);
  if (pb.mu != 0.0) {
    const Eigen::MatrixXd xd = (*s.x) * d;
    out.noalias() += pb.mu * (s.x->transpose() * annotated_product(s, xd, fz.b, pb.threads));
  }
  return 2.0 * out + pb.lambda1 * d;
}

Eigen::MatrixXd linear_term(const Side& s, const Frozen& fz) {
  return 2.0 * (s.x->transpose() * (s.o * fz.b));
}

// Data and Laplacian terms, with `f` the free factor of side `s`.
double smooth_terms(const Problem& pb, const Side& s, const Frozen& fz, const Eigen::MatrixXd& f) {
  const Eigen::MatrixXd xf = (*s.x) * f;
  double ann_residual = 0.0, ann_hat2 = 0.0;
  for (Index i = 0; i < s.o.outerSize(); ++i) {
    for (SparseRowMatrix::InnerIterator it(s.o, i); it; ++it) {
      const double hat = xf.row(i).dot(fz.b.row(it.col()));
      ann_residual += (it.value() - hat) * (it.value() - hat);
      ann_hat2 += hat * hat;
    }
  }
  const Eigen::MatrixXd f_btb = f * fz.btb;
  const double hat_norm2 = (s.gram * f).cwiseProduct(f_btb).sum();
  double total = ann_residual + (1.0 - pb.mu) * (hat_norm2 - ann_hat2);
  if (pb.lambda2 != 0.0) {
    const double same = (s.lap_gram * f).cwiseProduct(f_btb).sum();
    const double other = (s.gram * f).cwiseProduct(f * fz.bt_lap_b).sum();
    total += pb.lambda2 * (same + other);
  }
  return total;
}

double full_objective(const Problem& pb, const FactorPair& f) {
  const Frozen fz = freeze(pb.tag, f.q);
  return smooth_terms(pb, pb.img, fz, f.p) +
         0.5 * pb.lambda1 * (f.p.squaredNorm() + f.q.squaredNorm());
}

// Minimizes the half-step quadratic by CG starting from `x`; every iterate
// lowers the quadratic, so the returned point is never worse than the start.
void conjugate_gradient(const Problem& pb, const Side& s, const Frozen& fz, const RefineConfig& config,
                        Eigen::MatrixXd& x) {
  Eigen::MatrixXd r = linear_term(s, fz) - apply_hessian(pb, s, fz, x);
  double rr = r.squaredNorm();
  const double stop = config.cg_tol * config.cg_tol * rr;
  if (rr == 0.0) return;
  Eigen::MatrixXd p = r;
  for (int it = 0; it < config.cg_iters; ++it) {
    const Eigen::MatrixXd hp = apply_hessian(pb, s, fz, p);
    const double curvature = p.cwiseProduct(hp).sum();
    if (curvature < 0.0) {
      std::ostringstream os;
      os << "conjugate gradient met negative curvature " << curvature
         << "; the subproblem is not positive semidefinite (check lambda1, lambda2, mu)";
      throw SolverError(os.str());
    }
    if (curvature == 0.0) break;
    const double alpha = rr / curvature;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * hp;
    const double rr_next = r.squaredNorm();
    if (rr_next <= stop) break;
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
}

}  // namespace

double objective(const RefineInputs& in, const FactorPair& factors, const RefineConfig& config) {
  check_inputs(in, config);
  check_factors(in, factors, config);
  return full_objective(make_problem(in, config), factors);
}

Eigen::MatrixXd gradient(const RefineInputs& in, const FactorPair& factors, FreeFactor free,
                         const RefineConfig& config) {
  check_inputs(in, config);
  check_factors(in, factors, config);
  const Problem pb = make_problem(in, config);
  const bool p_free = free == FreeFactor::kP;
  const Side& s = p_free ? pb.img : pb.tag;
  const Frozen fz = p_free ? freeze(pb.tag, factors.q) : freeze(pb.img, factors.p);
  const Eigen::MatrixXd& f = p_free ? factors.p : factors.q;
  return apply_hessian(pb, s, fz, f) - linear_term(s, fz);
}

double weighted_loss(const TagMatrix& tags, const Eigen::MatrixXd& scores, double mu) {
  if (scores.rows() != tags.n_images() || scores.cols() != tags.n_tags()) {
    throw DimensionError("score matrix shape differs from tag matrix");
  }
  const WeightMask mask(tags, mu);
  const Eigen::MatrixXd o = tags.dense();
  double sum = 0.0;
  for (Index j = 0; j < o.cols(); ++j) {
    for (Index i = 0; i < o.rows(); ++i) {
      const double d = o(i, j) - scores(i, j);
      sum += mask.weight(i, j) * d * d;
    }
  }
  return sum;
}

double complex_error_loss(const TagMatrix& tags, const Eigen::MatrixXd& scores, double mu) {
  if (scores.rows() != tags.n_images() || scores.cols() != tags.n_tags()) {
    throw DimensionError("score matrix shape differs from tag matrix");
  }
  const Eigen::MatrixXd residual = tags.dense() - scores;
  Eigen::MatrixXd projected = residual;
  for (const auto& e : tags.triplets()) projected(e.row(), e.col()) = 0.0;
  return residual.squaredNorm() - mu * projected.squaredNorm();
}

FactorPair initial_factors(Index f_i, Index f_t, const RefineConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(config.rank)));
  FactorPair f{Eigen::MatrixXd(f_i, config.rank), Eigen::MatrixXd(f_t, config.rank)};
  for (Index k = 0; k < f.p.size(); ++k) f.p.data()[k] = nd(rng);
  for (Index k = 0; k < f.q.size(); ++k) f.q.data()[k] = nd(rng);
  return f;
}

SolveResult solve_alternating(const RefineInputs& in, const RefineConfig& config) {
  check_inputs(in, config);
  return solve_alternating(in, config, initial_factors(in.v.dim(), in.t.dim(), config));
}

SolveResult solve_alternating(const RefineInputs& in, const RefineConfig& config,
                              FactorPair start) {
  check_inputs(in, config);
  check_factors(in, start, config);
  const Problem pb = make_problem(in, config);
  SolveResult res;
  res.factors = std::move(start);
  double current = full_objective(pb, res.factors);
  res.objective_trace.push_back(current);
  for (int outer = 1; outer <= config.outer_iters; ++outer) {
    const double before = current;
    {
      const Frozen fz = freeze(pb.tag, res.factors.q);
      conjugate_gradient(pb, pb.img, fz, config, res.factors.p);
      res.objective_trace.push_back(full_objective(pb, res.factors));
    }
    {
      const Frozen fz = freeze(pb.img, res.factors.p);
      conjugate_gradient(pb, pb.tag, fz, config, res.factors.q);
      current = full_objective(pb, res.factors);
      res.objective_trace.push_back(current);
    }
    res.outer_iterations = outer;
    if (!std::isfinite(current)) throw SolverError("objective became non-finite");
    if (std::abs(before - current) <= config.rel_tol * std::max(std::abs(before), 1e-300)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Eigen::MatrixXd predict(const FeatureMatrix& v, const FeatureMatrix& t, const FactorPair& factors) {
  if (factors.p.rows() != v.dim() || factors.q.rows() != t.dim() ||
      factors.p.cols() != factors.q.cols()) {
    throw DimensionError("factors do not match feature dimensions");
  }
  return (v.data() * factors.p) * (t.data() * factors.q).transpose();
}

RefineOutput refine(const RefineInputs& in, const RefineConfig& config) {
  RefineOutput out;
  out.solve = solve_alternating(in, config);
  out.scores = predict(in.v, in.t, out.solve.factors);
  out.tags = TagMatrix::from_dense_clamped(out.scores);
  return out;
}

}  // namespace tagsmc
