// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/models.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace chunkflow {

namespace {

void symmetric_eigen(const Matrix& m, const char* what, Matrix& vecs, Vector& vals) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + " must be a non-empty square matrix");
  }
  if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-12)) {
    throw std::invalid_argument(std::string(what) + " must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw std::invalid_argument(std::string(what) + ": eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument(std::string(what) + " is not positive definite");
  }
  vecs = es.eigenvectors();
  vals = es.eigenvalues();
}

Frames standard_normal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Frames z(rows, cols);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  return z;
}

Matrix default_cond_matrix(Matrix b, Eigen::Index d) {
  if (b.size() == 0) return Matrix(d, 0);
  if (b.rows() != d) throw std::invalid_argument("conditioning matrix must have d rows");
  if (!b.allFinite()) throw std::invalid_argument("conditioning matrix must be finite");
  return b;
}

nlohmann::json to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Vector vector_from(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw std::invalid_argument(std::string(key) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(std::string(key) + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string(key) + " must be a list of rows");
  const auto cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw std::invalid_argument(std::string(key) + " rows must have equal length");
    }
    m.row(static_cast<Eigen::Index>(i)) = vector_from(j[i], key).transpose();
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

Vector ConditionSet::for_chunk(int k) const {
  const Eigen::Index g = global ? global->values.size() : 0;
  const Condition* local =
      per_chunk.empty() ? nullptr : &per_chunk.at(static_cast<std::size_t>(k - 1));
  const Eigen::Index l = local ? local->values.size() : 0;
  Vector c(g + l);
  if (g) c.head(g) = global->values;
  if (l) c.tail(l) = local->values;
  return c;
}

void ConditionSet::validate(int K) const {
  if (!per_chunk.empty() && static_cast<int>(per_chunk.size()) != K) {
    throw std::invalid_argument("expected " + std::to_string(K) + " per-chunk conditions, got " +
                                std::to_string(per_chunk.size()));
  }
  if (global && !global->values.allFinite()) throw std::invalid_argument("global condition is not finite");
  for (const auto& c : per_chunk) {
    if (!c.values.allFinite()) throw std::invalid_argument("per-chunk condition is not finite");
    if (c.values.size() != per_chunk.front().values.size()) {
      throw std::invalid_argument("per-chunk conditions must share one length");
    }
  }
}

// ---------------------------------------------------------------------------

Frames AnalyticModel::velocity(const Frames& x_t, double t, const Vector& c) const {
  if (t > 0.0) return (x_t - posterior_mean(x_t, t, c)) / t;
  return -x_t;
}

Vector AnalyticModel::shift(const Vector& c) const {
  if (c.size() == 0) return Vector::Zero(cond_matrix_.rows());
  if (c.size() != cond_matrix_.cols()) {
    throw std::invalid_argument("condition length " + std::to_string(c.size()) +
                                " does not match conditioning matrix width " +
                                std::to_string(cond_matrix_.cols()));
  }
  return cond_matrix_ * c;
}

// ---------------------------------------------------------------------------

KroneckerGaussian::KroneckerGaussian(Matrix frame_cov, Matrix feature_cov) {
  symmetric_eigen(frame_cov, "frame covariance", frame_vecs_, frame_vals_);
  symmetric_eigen(feature_cov, "feature covariance", feature_vecs_, feature_vals_);
}

Frames KroneckerGaussian::posterior_mean(const Frames& x_t, double t, const Vector& mean) const {
  if (x_t.rows() != frames() || x_t.cols() != dim()) {
    throw ShapeError("posterior_mean: expected " + std::to_string(frames()) + "x" +
                     std::to_string(dim()) + " chunk");
  }
  if (t <= 0.0) return x_t;
  const double a = 1.0 - t;
  Frames centred = x_t.rowwise() - (a * mean).transpose();
  Matrix y = frame_vecs_.transpose() * centred * feature_vecs_;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double lam = frame_vals_(i) * feature_vals_(j);
      y(i, j) *= a * lam / (a * a * lam + t * t);
    }
  }
  Frames out = frame_vecs_ * y * feature_vecs_.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

Frames KroneckerGaussian::sample(std::mt19937_64& rng, const Vector& mean) const {
  Matrix z = standard_normal(rng, frames(), dim());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) *= std::sqrt(frame_vals_(i) * feature_vals_(j));
  }
  Frames out = frame_vecs_ * z * feature_vecs_.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

Matrix KroneckerGaussian::covariance() const {
  const Matrix t = frame_vecs_ * frame_vals_.asDiagonal() * frame_vecs_.transpose();
  const Matrix d = feature_vecs_ * feature_vals_.asDiagonal() * feature_vecs_.transpose();
  Matrix out(t.rows() * d.rows(), t.cols() * d.cols());
  for (Eigen::Index a = 0; a < t.rows(); ++a) {
    for (Eigen::Index b = 0; b < t.cols(); ++b) {
      out.block(a * d.rows(), b * d.cols(), d.rows(), d.cols()) = t(a, b) * d;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

GaussianModel::GaussianModel(Vector mean, Matrix cov, int F, Matrix cond_matrix)
    : AnalyticModel(default_cond_matrix(std::move(cond_matrix), mean.size())),
      mean_(std::move(mean)),
      cov_(std::move(cov)),
      F_(F),
      law_(Matrix::Identity(F, F), cov_) {
  if (cov_.rows() != mean_.size()) throw std::invalid_argument("covariance must be d x d");
}

Frames GaussianModel::posterior_mean(const Frames& x_t, double t, const Vector& c) const {
  return law_.posterior_mean(x_t, t, frame_mean(c));
}

Frames GaussianModel::sample(std::mt19937_64& rng, const Vector& c) const {
  return law_.sample(rng, frame_mean(c));
}

nlohmann::json GaussianModel::params() const {
  return {{"backend", backend()}, {"d", dim()}, {"mean", to_json(mean_)}, {"cov", to_json(cov_)},
          {"cond_matrix", to_json(cond_matrix())}};
}

std::unique_ptr<AnalyticModel> GaussianModel::with_frames(int F) const {
  return std::make_unique<GaussianModel>(mean_, cov_, F, cond_matrix());
}

// ---------------------------------------------------------------------------

namespace {

Matrix checked_kernel(double rho, int F) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("GP correlation must satisfy |rho| < 1");
  if (F < 1) throw std::invalid_argument("GP needs at least one frame");
  return GaussianProcessModel::ar1_kernel(rho, F);
}

}  // namespace

Matrix GaussianProcessModel::ar1_kernel(double rho, int F) {
  Matrix k(F, F);
  for (int i = 0; i < F; ++i) {
    for (int j = 0; j < F; ++j) k(i, j) = std::pow(rho, std::abs(i - j));
  }
  return k;
}

GaussianProcessModel::GaussianProcessModel(double rho, Vector mean, Matrix feature_cov, int F,
                                           Matrix cond_matrix)
    : AnalyticModel(default_cond_matrix(std::move(cond_matrix), mean.size())),
      rho_(rho),
      mean_(std::move(mean)),
      feature_cov_(std::move(feature_cov)),
      F_(F),
      law_(checked_kernel(rho, F), feature_cov_) {
  if (feature_cov_.rows() != mean_.size()) throw std::invalid_argument("feature covariance must be d x d");
}

Frames GaussianProcessModel::posterior_mean(const Frames& x_t, double t, const Vector& c) const {
  return law_.posterior_mean(x_t, t, frame_mean(c));
}

Frames GaussianProcessModel::sample(std::mt19937_64& rng, const Vector& c) const {
  return law_.sample(rng, frame_mean(c));
}

nlohmann::json GaussianProcessModel::params() const {
  return {{"backend", backend()},          {"d", dim()},
          {"rho", rho_},                   {"mean", to_json(mean_)},
          {"feature_cov", to_json(feature_cov_)}, {"cond_matrix", to_json(cond_matrix())}};
}

std::unique_ptr<AnalyticModel> GaussianProcessModel::with_frames(int F) const {
  return std::make_unique<GaussianProcessModel>(rho_, mean_, feature_cov_, F, cond_matrix());
}

// ---------------------------------------------------------------------------

MixtureModel::MixtureModel(std::vector<double> weights, std::vector<Vector> means,
                           std::vector<Matrix> covs, int F, Matrix cond_matrix)
    : AnalyticModel(default_cond_matrix(std::move(cond_matrix),
                                        means.empty() ? 0 : means.front().size())),
      weights_(std::move(weights)),
      means_(std::move(means)),
      F_(F) {
  if (weights_.empty() || weights_.size() != means_.size() || weights_.size() != covs.size()) {
    throw std::invalid_argument("mixture needs matching, non-empty weights, means and covs");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    if (means_[i].size() != means_.front().size() || covs[i].rows() != means_[i].size()) {
      throw std::invalid_argument("mixture components must share dimension d");
    }
    Component c{std::log(weights_[i]), means_[i], covs[i], {}, {}};
    symmetric_eigen(c.cov, "mixture covariance", c.vecs, c.vals);
    comps_.push_back(std::move(c));
  }
}

Frames MixtureModel::posterior_mean(const Frames& x_t, double t, const Vector& c) const {
  if (x_t.rows() != F_ || x_t.cols() != dim()) {
    throw ShapeError("posterior_mean: expected " + std::to_string(F_) + "x" + std::to_string(dim()) +
                     " chunk");
  }
  if (t <= 0.0) return x_t;
  const double a = 1.0 - t;
  const Vector offset = shift(c);
  Frames out(x_t.rows(), x_t.cols());
  std::vector<double> logp(comps_.size());
  std::vector<Vector> post(comps_.size());
  for (Eigen::Index f = 0; f < x_t.rows(); ++f) {
    const Vector x = x_t.row(f).transpose();
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const auto& comp = comps_[i];
      const Vector m = comp.mean + offset;
      const Vector var = (a * a) * comp.vals.array() + t * t;
      const Vector y = comp.vecs.transpose() * (x - a * m);
      logp[i] = comp.log_weight - 0.5 * ((y.array().square() / var.array()).sum() + var.array().log().sum());
      post[i] = m + a * comp.vecs * (comp.vals.array() / var.array() * y.array()).matrix();
    }
    // Log-domain normalisation keeps responsibilities finite far from every mode.
    const double top = *std::max_element(logp.begin(), logp.end());
    double norm = 0.0;
    Vector acc = Vector::Zero(x.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const double r = std::exp(logp[i] - top);
      norm += r;
      acc += r * post[i];
    }
    out.row(f) = (acc / norm).transpose();
  }
  return out;
}

Vector MixtureModel::frame_mean(const Vector& c) const {
  Vector m = Vector::Zero(dim());
  for (std::size_t i = 0; i < comps_.size(); ++i) m += weights_[i] * comps_[i].mean;
  return m + shift(c);
}

Matrix MixtureModel::window_covariance() const {
  const Vector m = frame_mean(Vector());
  Matrix frame = -m * m.transpose();
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    frame += weights_[i] * (comps_[i].cov + comps_[i].mean * comps_[i].mean.transpose());
  }
  const Eigen::Index d = dim();
  Matrix out = Matrix::Zero(F_ * d, F_ * d);
  for (int f = 0; f < F_; ++f) out.block(f * d, f * d, d, d) = frame;
  return out;
}

Frames MixtureModel::sample(std::mt19937_64& rng, const Vector& c) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  const Vector offset = shift(c);
  Frames out(F_, dim());
  for (int f = 0; f < F_; ++f) {
    const auto& comp = comps_[pick(rng)];
    const Frames z = standard_normal(rng, dim(), 1);
    const Vector scaled = comp.vals.array().sqrt() * Eigen::Map<const Vector>(z.data(), dim()).array();
    out.row(f) = (comp.mean + offset + comp.vecs * scaled).transpose();
  }
  return out;
}

nlohmann::json MixtureModel::params() const {
  auto means = nlohmann::json::array();
  auto covs = nlohmann::json::array();
  for (const auto& comp : comps_) {
    means.push_back(to_json(comp.mean));
    covs.push_back(to_json(comp.cov));
  }
  return {{"backend", backend()}, {"d", dim()},   {"weights", weights_},
          {"means", means},       {"covs", covs}, {"cond_matrix", to_json(cond_matrix())}};
}

std::unique_ptr<AnalyticModel> MixtureModel::with_frames(int F) const {
  std::vector<Matrix> covs;
  for (const auto& comp : comps_) covs.push_back(comp.cov);
  return std::make_unique<MixtureModel>(weights_, means_, covs, F, cond_matrix());
}

// ---------------------------------------------------------------------------

std::unique_ptr<AnalyticModel> make_model(const nlohmann::json& spec, int F) {
  if (!spec.is_object()) throw std::invalid_argument("model must be an object");
  const auto backend = spec.value("backend", std::string("gaussian"));
  const int d = spec.value("d", 0);
  auto mean_or_zero = [&](const char* key, int dim) {
    return spec.contains(key) ? vector_from(spec.at(key), key) : Vector(Vector::Zero(dim));
  };
  auto matrix_or_identity = [&](const char* key, int dim) {
    return spec.contains(key) ? matrix_from(spec.at(key), key) : Matrix(Matrix::Identity(dim, dim));
  };
  Matrix cond = spec.contains("cond_matrix") ? matrix_from(spec.at("cond_matrix"), "cond_matrix") : Matrix();
  if (cond.size() > 0 && cond.cols() == 0) cond.resize(0, 0);

  if (backend == "gaussian" || backend == "gp") {
    Vector mean = mean_or_zero("mean", d);
    const int dim = static_cast<int>(mean.size());
    if (dim < 1) throw std::invalid_argument("model needs d >= 1 or an explicit mean");
    if (d != 0 && d != dim) throw std::invalid_argument("model d does not match mean length");
    if (backend == "gaussian") {
      return std::make_unique<GaussianModel>(std::move(mean), matrix_or_identity("cov", dim), F, cond);
    }
    if (!spec.contains("rho")) throw std::invalid_argument("gp backend needs rho");
    return std::make_unique<GaussianProcessModel>(spec.at("rho").get<double>(), std::move(mean),
                                                  matrix_or_identity("feature_cov", dim), F, cond);
  }
  if (backend == "mixture") {
    if (!spec.contains("weights") || !spec.contains("means")) {
      throw std::invalid_argument("mixture backend needs weights and means");
    }
    const Vector w = vector_from(spec.at("weights"), "weights");
    std::vector<Vector> means;
    for (const auto& m : spec.at("means")) means.push_back(vector_from(m, "means"));
    std::vector<Matrix> covs;
    if (spec.contains("covs")) {
      for (const auto& c : spec.at("covs")) covs.push_back(matrix_from(c, "covs"));
    } else {
      for (const auto& m : means) covs.emplace_back(Matrix::Identity(m.size(), m.size()));
    }
    return std::make_unique<MixtureModel>(std::vector<double>(w.data(), w.data() + w.size()),
                                          std::move(means), std::move(covs), F, cond);
  }
  throw std::invalid_argument("unknown backend '" + backend + "'");
}

std::string params_digest(const AnalyticModel& model) {
  const std::string text = model.params().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chunkflow
