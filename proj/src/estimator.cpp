#include "lmix/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "lmix/errors.hpp"

namespace lmix {

namespace {

double log_failure_term(const EstimatorConfig& cfg, int k) {
  const double kk = static_cast<double>(k);
  return std::log(4.0 * kk * kk * cfg.horizon / cfg.delta);
}

}  // namespace

void EstimatorConfig::check() const {
  require(lambda > 0.0, "EstimatorConfig: lambda must be positive");
  require(delta > 0.0 && delta < 1.0, "EstimatorConfig: delta must lie in (0,1)");
  require(bound >= 1.0, "EstimatorConfig: B must be at least 1");
  require(horizon >= 1 && dim >= 1, "EstimatorConfig: H and d must be positive");
}

double beta_hat(const EstimatorConfig& cfg, int k) {
  require(k >= 1, "beta_hat: k must be at least 1");
  const double d = cfg.dim;
  const double lf = log_failure_term(cfg, k);
  const double ld = std::log1p(k / cfg.lambda);
  return 8.0 * std::sqrt(d * ld * lf) + 4.0 * std::sqrt(d) * lf + std::sqrt(cfg.lambda) * cfg.bound;
}

double beta_bar(const EstimatorConfig& cfg, int k) {
  require(k >= 1, "beta_bar: k must be at least 1");
  const double d = cfg.dim;
  const double lf = log_failure_term(cfg, k);
  const double ld = std::log1p(k / cfg.lambda);
  return 8.0 * d * std::sqrt(ld * lf) + 4.0 * std::sqrt(d) * lf + std::sqrt(cfg.lambda) * cfg.bound;
}

double beta_tilde(const EstimatorConfig& cfg, int k) {
  require(k >= 1, "beta_tilde: k must be at least 1");
  const double d = cfg.dim;
  const double h2 = static_cast<double>(cfg.horizon) * cfg.horizon;
  const double lf = log_failure_term(cfg, k);
  const double ld = std::log1p(k * h2 * h2 / (d * cfg.lambda));
  return 8.0 * h2 * std::sqrt(d * ld * lf) + 4.0 * h2 * lf + std::sqrt(cfg.lambda) * cfg.bound;
}

StageEstimator::StageEstimator(const EstimatorConfig& cfg) : cfg_(cfg) {
  cfg_.check();
  const int d = cfg_.dim;
  gram_hat_ = cfg_.lambda * Eigen::MatrixXd::Identity(d, d);
  gram_tilde_ = gram_hat_;
  resp_hat_ = Eigen::VectorXd::Zero(d);
  resp_tilde_ = Eigen::VectorXd::Zero(d);
  theta_hat_ = Eigen::VectorXd::Zero(d);
  theta_tilde_ = Eigen::VectorXd::Zero(d);
  hat_factor_.compute(gram_hat_);
  tilde_factor_.compute(gram_tilde_);
}

void StageEstimator::check_vector(const Eigen::VectorXd& x) const {
  require(x.size() == cfg_.dim, "StageEstimator: vector has wrong dimension");
}

void StageEstimator::refresh_hat() {
  hat_factor_.compute(gram_hat_);
  require(hat_factor_.info() == Eigen::Success, "StageEstimator: hat Gram matrix is not SPD");
  theta_hat_ = hat_factor_.solve(resp_hat_);
}

void StageEstimator::refresh_tilde() {
  tilde_factor_.compute(gram_tilde_);
  require(tilde_factor_.info() == Eigen::Success, "StageEstimator: tilde Gram matrix is not SPD");
  theta_tilde_ = tilde_factor_.solve(resp_tilde_);
}

double StageEstimator::hat_inverse_norm(const Eigen::VectorXd& x) const {
  check_vector(x);
  require(hat_factor_.info() == Eigen::Success, "StageEstimator: hat Gram matrix is not SPD");
  return hat_factor_.matrixL().solve(x).norm();
}

double StageEstimator::tilde_inverse_norm(const Eigen::VectorXd& x) const {
  check_vector(x);
  require(tilde_factor_.info() == Eigen::Success, "StageEstimator: tilde Gram matrix is not SPD");
  return tilde_factor_.matrixL().solve(x).norm();
}

double clipped_variance_estimate(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_tilde,
                                 const Eigen::VectorXd& phi_v, const Eigen::VectorXd& phi_v2,
                                 int horizon) {
  require(theta_hat.size() == phi_v.size() && theta_tilde.size() == phi_v2.size(),
          "clipped_variance_estimate: dimension mismatch");
  const double H = horizon;
  const double second = std::clamp(phi_v2.dot(theta_tilde), 0.0, H * H);
  const double first = std::clamp(phi_v.dot(theta_hat), 0.0, H);
  return second - first * first;
}

double StageEstimator::estimated_variance(const Eigen::VectorXd& phi_v,
                                          const Eigen::VectorXd& phi_v2) const {
  check_vector(phi_v);
  check_vector(phi_v2);
  return clipped_variance_estimate(theta_hat_, theta_tilde_, phi_v, phi_v2, cfg_.horizon);
}

double StageEstimator::bonus(int k, const Eigen::VectorXd& phi_v,
                             const Eigen::VectorXd& phi_v2) const {
  const double H = cfg_.horizon;
  const double h2 = H * H;
  const double second = std::min(beta_tilde(cfg_, k) * tilde_inverse_norm(phi_v2), h2);
  const double first = std::min(2.0 * H * beta_bar(cfg_, k) * hat_inverse_norm(phi_v), h2);
  return second + first;
}

double StageEstimator::sigma_bar(double estimated_var, double bonus) const {
  require(bonus >= 0.0, "sigma_bar: bonus must be nonnegative");
  const double H = cfg_.horizon;
  return std::sqrt(std::max(H * H / cfg_.dim, estimated_var + bonus));
}

double StageEstimator::confidence_width(int k, const Eigen::VectorXd& phi) const {
  return beta_hat(cfg_, k) * hat_inverse_norm(phi);
}

double StageEstimator::ellipsoid_distance(const Eigen::VectorXd& theta) const {
  check_vector(theta);
  const Eigen::VectorXd diff = theta - theta_hat_;
  return std::sqrt(std::max(0.0, diff.dot(gram_hat_ * diff)));
}

void StageEstimator::rank1_update(const Eigen::VectorXd& phi_v, double target_v,
                                  const Eigen::VectorXd& phi_v2, double target_v2, double sigma) {
  check_vector(phi_v);
  check_vector(phi_v2);
  const double H = cfg_.horizon;
  const double floor = H / std::sqrt(static_cast<double>(cfg_.dim));
  require(sigma >= floor * (1.0 - 1e-12), "rank1_update: sigma_bar below H/sqrt(d)");
  require(target_v >= -1e-12 && target_v <= H + 1e-12, "rank1_update: target_v outside [0,H]");
  require(target_v2 >= -1e-12 && target_v2 <= H * H + 1e-12,
          "rank1_update: target_v2 outside [0,H^2]");

  const double w = 1.0 / (sigma * sigma);
  gram_hat_.noalias() += w * phi_v * phi_v.transpose();
  resp_hat_ += (w * target_v) * phi_v;
  gram_tilde_.noalias() += phi_v2 * phi_v2.transpose();
  resp_tilde_ += target_v2 * phi_v2;
  refresh_hat();
  refresh_tilde();
  ++samples_;
}

void StageEstimator::unit_weight_update(const Eigen::VectorXd& phi_v, double target_v) {
  check_vector(phi_v);
  gram_hat_.noalias() += phi_v * phi_v.transpose();
  resp_hat_ += target_v * phi_v;
  refresh_hat();
  ++samples_;
}

}  // namespace lmix
