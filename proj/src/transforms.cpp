#include "netreg/transforms.hpp"

#include <cmath>
#include <string>

#include "netreg/errors.hpp"

namespace netreg {

VectorXd ModelParams::beta() const {
  VectorXd b(beta1.size() + beta2.size());
  b << beta1, beta2;
  return b;
}

void ModelParams::check(const BlockDiagonal& W) const {
  if (!(sigma2 > 0.0)) throw InputError("sigma2 must be positive");
  const double norm = std::abs(lambda) * W.row_sum_norm();
  if (!(norm < 1.0)) {
    throw InputError("|lambda| * ||W|| = " + std::to_string(norm) +
                     " violates the stability bound (< 1)");
  }
}

MatrixXd s_matrix(double lambda, const MatrixXd& W) {
  return MatrixXd::Identity(W.rows(), W.cols()) - lambda * W;
}

BlockDiagonal s_matrix(double lambda, const BlockDiagonal& W) { return W.identity_minus(lambda); }

MatrixXd r_matrix(double rho, const MatrixXd& M) { return s_matrix(rho, M); }

BlockDiagonal r_matrix(double rho, const BlockDiagonal& M) { return M.identity_minus(rho); }

MatrixXd j_block(const MatrixXd& M_r) {
  const Index m = M_r.rows();
  const VectorXd iota = VectorXd::Ones(m);
  const VectorXd m_iota = M_r * iota;
  // Residual of Mι after projecting on ι.
  const VectorXd resid = m_iota - iota * (m_iota.mean());
  const double scale = m_iota.norm();
  const bool collinear = scale == 0.0 || resid.norm() < 1e-8 * scale;
  MatrixXd J = MatrixXd::Identity(m, m);
  if (collinear) {
    J.array() -= 1.0 / static_cast<double>(m);
    return J;
  }
  MatrixXd A(m, 2);
  A << iota, m_iota;
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU);
  const VectorXd& s = svd.singularValues();
  for (Index j = 0; j < s.size(); ++j) {
    if (s(j) > 1e-10 * s(0)) J.noalias() -= svd.matrixU().col(j) * svd.matrixU().col(j).transpose();
  }
  return J;
}

BlockDiagonal j_projector(const BlockDiagonal& M) {
  std::vector<MatrixXd> blocks;
  blocks.reserve(M.block_count());
  for (std::size_t r = 0; r < M.block_count(); ++r) blocks.push_back(j_block(M.block(r)));
  return BlockDiagonal(std::move(blocks));
}

MatrixXd j_projector(std::span<const Index> group_sizes, const MatrixXd& M) {
  return j_projector(BlockDiagonal::from_dense(M, group_sizes)).dense();
}

MatrixXd regressors(const GroupedNetwork& net, const MatrixXd& x1, const MatrixXd& x2) {
  const Index n = net.size();
  if (x1.rows() != n || x2.rows() != n) {
    throw InputError("regressor rows (" + std::to_string(x1.rows()) + ", " +
                     std::to_string(x2.rows()) + ") do not match network order " +
                     std::to_string(n));
  }
  MatrixXd X(n, x1.cols() + x2.cols());
  X << x1, net.W.apply(x2);
  return X;
}

namespace {

void check_dims(const ModelParams& p, const MatrixXd& x1, const MatrixXd& x2) {
  if (p.beta1.size() != x1.cols()) throw InputError("beta1 length does not match X1 columns");
  if (p.beta2.size() != x2.cols()) throw InputError("beta2 length does not match X2 columns");
}

}  // namespace

VectorXd structural_residual(const ModelParams& p, const VectorXd& y, const MatrixXd& x1,
                             const MatrixXd& x2, const GroupedNetwork& net) {
  check_dims(p, x1, x2);
  if (y.size() != net.size()) throw InputError("Y length does not match network order");
  const MatrixXd X = regressors(net, x1, x2);
  const VectorXd e = y - p.lambda * net.W.apply(y) - X * p.beta();
  const VectorXd Re = e - p.rho * net.M.apply(e);
  return j_projector(net.M).apply(Re);
}

VectorXd expand_group_effects(std::span<const Index> group_sizes, const VectorXd& gamma) {
  if (gamma.size() != static_cast<Index>(group_sizes.size())) {
    throw InputError("gamma has " + std::to_string(gamma.size()) + " entries for " +
                     std::to_string(group_sizes.size()) + " groups");
  }
  Index n = 0;
  for (Index m : group_sizes) n += m;
  VectorXd out(n);
  Index off = 0;
  for (std::size_t r = 0; r < group_sizes.size(); ++r) {
    out.segment(off, group_sizes[r]).setConstant(gamma(static_cast<Index>(r)));
    off += group_sizes[r];
  }
  return out;
}

VectorXd reduced_form(const ModelParams& p, const MatrixXd& x1, const MatrixXd& x2,
                      const VectorXd& eps, const GroupedNetwork& net) {
  check_dims(p, x1, x2);
  if (eps.size() != net.size()) throw InputError("epsilon length does not match network order");
  const MatrixXd X = regressors(net, x1, x2);
  VectorXd rhs = X * p.beta() + expand_group_effects(net.group_sizes, p.gamma);
  rhs += r_matrix(p.rho, net.M).solve(eps, "R(rho)");
  return s_matrix(p.lambda, net.W).solve(rhs, "S(lambda)");
}

}  // namespace netreg
