#include "dslc/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "csv_util.hpp"
#include "dslc/error.hpp"
#include "dslc/simd/kernels.hpp"

namespace dslc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

GaussianBelief::GaussianBelief(MatrixXd prior_covariance, VectorXd prior_mean,
                               double noise_variance)
    : prior_mean_(std::move(prior_mean)),
      prior_covariance_(std::move(prior_covariance)),
      noise_variance_(noise_variance) {
  const Index n = prior_mean_.size();
  if (n == 0) throw ValidationError("belief needs at least one vertex");
  if (prior_covariance_.rows() != n || prior_covariance_.cols() != n)
    throw ValidationError("prior covariance shape does not match the mean");
  if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_))
    throw ValidationError("noise variance must be finite and > 0");
  if (!prior_covariance_.allFinite() || !prior_mean_.allFinite())
    throw ValidationError("prior must be finite");

  Eigen::LLT<MatrixXd> llt(prior_covariance_);
  if (llt.info() != Eigen::Success)
    throw RuntimeError("prior covariance is not positive definite");
  prior_precision_ = llt.solve(MatrixXd::Identity(n, n));
  prior_precision_ = 0.5 * (prior_precision_ + prior_precision_.transpose()).eval();
  prior_variance_bound_ = prior_covariance_.diagonal().maxCoeff();

  counts_.assign(static_cast<std::size_t>(n), 0);
  sums_.assign(static_cast<std::size_t>(n), 0.0);
  precision_ = prior_precision_;
  covariance_ = prior_covariance_;
  mean_ = prior_mean_;
}

std::vector<double> GaussianBelief::variances() const {
  const VectorXd d = covariance_.diagonal();
  return {d.data(), d.data() + d.size()};
}

std::size_t GaussianBelief::total_samples() const {
  std::size_t total = 0;
  for (std::size_t c : counts_) total += c;
  return total;
}

void GaussianBelief::update(std::span<const Sample> samples) {
  for (const Sample& s : samples) {
    if (s.vertex >= size())
      throw ValidationError("sample vertex out of range: " + std::to_string(s.vertex));
    if (!std::isfinite(s.value)) throw ValidationError("sample value must be finite");
  }
  if (samples.empty()) return;
  for (const Sample& s : samples) {
    ++counts_[s.vertex];
    sums_[s.vertex] += s.value;
    const auto i = static_cast<Index>(s.vertex);
    precision_(i, i) += 1.0 / noise_variance_;
  }
  refresh();
}

// Conditioning on per-vertex sample means ybar_i with noise variance / n_i:
//   A     = Sigma0[S,S] + diag(noise / n_S)
//   Sigma = Sigma0 - Sigma0[:,S] A^{-1} Sigma0[S,:]
//   mu    = mu0 + Sigma0[:,S] A^{-1} (ybar_S - mu0_S)
// which equals (Lambda0 + diag(n / noise))^{-1} and the matching mean.
void GaussianBelief::refresh() {
  std::vector<Index> sampled;
  for (std::size_t v = 0; v < counts_.size(); ++v)
    if (counts_[v] > 0) sampled.push_back(static_cast<Index>(v));
  const Index n = prior_mean_.size();
  const auto m = static_cast<Index>(sampled.size());
  if (m == 0) {
    covariance_ = prior_covariance_;
    mean_ = prior_mean_;
    return;
  }

  MatrixXd cross(m, n);  // Sigma0[S,:]
  MatrixXd block(m, m);
  VectorXd residual(m);
  for (Index a = 0; a < m; ++a) {
    const Index va = sampled[static_cast<std::size_t>(a)];
    cross.row(a) = prior_covariance_.row(va);
    for (Index b = 0; b < m; ++b) block(a, b) = prior_covariance_(va, sampled[static_cast<std::size_t>(b)]);
    const auto count = static_cast<double>(counts_[static_cast<std::size_t>(va)]);
    block(a, a) += noise_variance_ / count;
    residual(a) = sums_[static_cast<std::size_t>(va)] / count - prior_mean_(va);
  }

  Eigen::LLT<MatrixXd> llt(block);
  if (llt.info() != Eigen::Success)
    throw RuntimeError("posterior conditioning matrix is not positive definite");
  llt.matrixL().solveInPlace(cross);  // cross <- L^{-1} Sigma0[S,:]
  VectorXd weights = residual;
  llt.matrixL().solveInPlace(weights);

  covariance_ = prior_covariance_;
  covariance_.selfadjointView<Eigen::Lower>().rankUpdate(cross.transpose(), -1.0);
  covariance_.triangularView<Eigen::StrictlyUpper>() = covariance_.transpose();
  mean_ = prior_mean_ + cross.transpose() * weights;
}

GaussianBelief prior_from_kernel(const WeightedGraph& g, const KernelSpec& kernel,
                                 double prior_mean, double noise_variance, double jitter) {
  if (!(kernel.variance > 0.0) || !(kernel.length_scale > 0.0))
    throw ValidationError("kernel variance and length scale must be > 0");
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be >= 0");
  if (!std::isfinite(prior_mean)) throw ValidationError("prior mean must be finite");
  const auto n = static_cast<Index>(g.num_vertices());
  MatrixXd cov(n, n);
  const double denom = 2.0 * kernel.length_scale * kernel.length_scale;
  for (Index i = 0; i < n; ++i) {
    const Point pi = g.position(static_cast<VertexId>(i));
    for (Index j = 0; j <= i; ++j) {
      const double d = euclidean_distance(pi, g.position(static_cast<VertexId>(j)));
      cov(i, j) = cov(j, i) = kernel.variance * std::exp(-(d * d) / denom);
    }
  }
  cov.diagonal().array() += jitter * kernel.variance;
  try {
    return GaussianBelief(std::move(cov), VectorXd::Constant(n, prior_mean), noise_variance);
  } catch (const RuntimeError&) {
    std::ostringstream msg;
    msg << "kernel covariance is singular even after jitter " << jitter
        << " * variance; increase the jitter or the vertex spacing relative to length scale "
        << kernel.length_scale;
    throw RuntimeError(msg.str());
  }
}

GaussianBelief posterior_update(GaussianBelief belief, VertexId v, double y) {
  const Sample s{v, y};
  belief.update(std::span<const Sample>(&s, 1));
  return belief;
}

namespace {

VertexId argmax_diagonal(const double* matrix, std::size_t n) {
  VertexId best = 0;
  double best_value = matrix[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double value = matrix[i * n + i];
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

double max_diagonal(const std::vector<double>& matrix, std::size_t n) {
  double best = matrix[0];
  for (std::size_t i = 1; i < n; ++i) best = std::max(best, matrix[i * n + i]);
  return best;
}

/// Covariance as a dense row-major buffer (symmetric, so layout is moot).
std::vector<double> covariance_copy(const GaussianBelief& belief) {
  const MatrixXd& cov = belief.covariance();
  return {cov.data(), cov.data() + cov.size()};
}

/// Covariance after one more sample at v: rank-one downdate in place.
/// Returns the pre-update marginal variance of v.
double condition_in_place(std::vector<double>& cov, std::vector<double>& column, std::size_t n,
                          VertexId v, double noise_variance) {
  std::copy_n(cov.begin() + static_cast<std::ptrdiff_t>(v * n), n, column.begin());
  const double var_v = column[v];
  simd::rank_one_downdate(cov, column, 1.0 / (noise_variance + var_v));
  return var_v;
}

}  // namespace

VertexId greedy_next_vertex(const GaussianBelief& belief) {
  return argmax_diagonal(belief.covariance().data(), belief.size());
}

SamplePlan plan_to_threshold(const GaussianBelief& belief, double threshold, std::size_t cap) {
  if (!(threshold > 0.0)) throw ValidationError("variance threshold must be > 0");
  const std::size_t n = belief.size();
  if (cap == 0) cap = 10 * n;
  SamplePlan plan;
  std::vector<double> cov = covariance_copy(belief);
  std::vector<double> column(n);
  double current = max_diagonal(cov, n);
  while (current > threshold) {
    if (plan.sequence.size() >= cap) {
      std::ostringstream msg;
      msg << "variance threshold " << threshold << " not reached within " << cap
          << " samples (max variance " << current << "); the noise-limited floor after " << cap
          << " samples is about " << belief.noise_variance() * static_cast<double>(n) /
                                        static_cast<double>(cap);
      throw RuntimeError(msg.str());
    }
    const VertexId v = argmax_diagonal(cov.data(), n);
    condition_in_place(cov, column, n, v, belief.noise_variance());
    plan.sequence.push_back(v);
    current = max_diagonal(cov, n);
  }
  plan.final_max_variance = current;
  return plan;
}

void split_by_owner(SamplePlan& plan, std::span<const std::size_t> owner, std::size_t num_agents) {
  plan.per_agent.assign(num_agents, {});
  for (VertexId v : plan.sequence) {
    if (v >= owner.size() || owner[v] >= num_agents)
      throw ValidationError("plan vertex has no owning agent: " + std::to_string(v));
    plan.per_agent[owner[v]].push_back(v);
  }
}

double mutual_information(const GaussianBelief& belief, std::span<const VertexId> plan) {
  const std::size_t n = belief.size();
  for (VertexId v : plan)
    if (v >= n) throw ValidationError("plan vertex out of range: " + std::to_string(v));
  if (plan.empty()) return 0.0;
  std::vector<double> cov = covariance_copy(belief);
  std::vector<double> column(n);
  double info = 0.0;
  for (VertexId v : plan) {
    const double var_v = condition_in_place(cov, column, n, v, belief.noise_variance());
    info += 0.5 * std::log1p(var_v / belief.noise_variance());
  }
  return info;
}

double gamma_bruteforce(const GaussianBelief& belief, std::size_t n, std::size_t cap) {
  if (n == 0) return 0.0;
  const std::size_t vertices = belief.size();
  double combos = 1.0;
  for (std::size_t k = 0; k < n; ++k) combos *= static_cast<double>(vertices);
  if (combos > static_cast<double>(cap))
    throw RuntimeError("exhaustive information-gain search over " + std::to_string(vertices) +
                       "^" + std::to_string(n) + " designs exceeds the cap of " +
                       std::to_string(cap) + "; use fewer vertices or samples");
  // Nondecreasing index sequences enumerate each multiset once.
  std::vector<VertexId> design(n, 0);
  double best = 0.0;
  while (true) {
    best = std::max(best, mutual_information(belief, design));
    std::size_t k = n;
    while (k > 0 && design[k - 1] == vertices - 1) --k;
    if (k == 0) break;
    const VertexId next = design[k - 1] + 1;
    for (std::size_t r = k - 1; r < n; ++r) design[r] = next;
  }
  return best;
}

double greedy_variance_bound(double prior_variance_bound, double noise_variance, std::size_t n,
                    double gamma_n) {
  if (n == 0) throw ValidationError("sample count must be >= 1");
  return 2.0 * prior_variance_bound / std::log1p(prior_variance_bound / noise_variance) *
         (gamma_n / static_cast<double>(n));
}

double greedy_variance_bound(const GaussianBelief& belief, std::size_t n, double gamma_n) {
  return greedy_variance_bound(belief.prior_variance_bound(), belief.noise_variance(), n, gamma_n);
}

void write_belief_csv(const GaussianBelief& belief, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "vertex,mu,var\n";
  for (std::size_t v = 0; v < belief.size(); ++v)
    out << v << ',' << detail::format_real(belief.mean()(static_cast<Index>(v))) << ','
        << detail::format_real(belief.variance(v)) << '\n';
  if (!out) throw RuntimeError("failed writing " + path.string());
}

}  // namespace dslc
