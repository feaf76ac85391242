#include "aivgt/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "aivgt/errors.hpp"

namespace aivgt {

namespace {
constexpr double kRcondSingular = 1e-12;
}

int CovMatrix::col(std::string_view name) const {
  for (int i = 0; i < p(); ++i)
    if (labels[i] == name) return i;
  throw input_error("unknown covariance label: " + std::string(name));
}

CovMatrix make_cov(Eigen::MatrixXd sigma, long n, std::vector<std::string> labels) {
  if (sigma.rows() != sigma.cols()) throw input_error("covariance matrix must be square");
  if (static_cast<int>(labels.size()) != sigma.cols())
    throw input_error("covariance labels do not match dimension");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw input_error("covariance matrix must be symmetric");
  for (int i = 0; i < sigma.cols(); ++i)
    if (!(sigma(i, i) > 0.0))
      throw degenerate_column_error("non-positive variance for " + labels[i]);
  return CovMatrix{std::move(sigma), n, std::move(labels)};
}

CovMatrix cov_matrix(const Dataset& data, const std::vector<std::string>& cols) {
  if (data.n() < 2) throw input_error("covariance needs at least two rows");
  std::vector<int> idx;
  std::vector<std::string> labels;
  if (cols.empty()) {
    for (int i = 0; i < data.p(); ++i) idx.push_back(i);
    labels = data.columns;
  } else {
    for (const auto& c : cols) {
      idx.push_back(data.col(c));
      labels.push_back(c);
    }
  }
  const int p = static_cast<int>(idx.size());
  Eigen::MatrixXd x(data.n(), p);
  for (int j = 0; j < p; ++j) x.col(j) = data.values.col(idx[j]);
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::MatrixXd sigma = (x.transpose() * x) / static_cast<double>(data.n() - 1);
  for (int j = 0; j < p; ++j)
    if (!(sigma(j, j) > 0.0)) throw degenerate_column_error("constant column: " + labels[j]);
  // enforce exact symmetry against accumulation order effects
  sigma = ((sigma + sigma.transpose()) * 0.5).eval();
  return CovMatrix{std::move(sigma), data.n(), std::move(labels)};
}

namespace {

void check_cov_index(const CovMatrix& c, int v) {
  if (v < 0 || v >= c.p()) throw input_error("covariance index out of range");
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const NodeSet& rows, const NodeSet& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

// rcond of an SPD block via its eigenvalue extremes.
double spd_rcond(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0)) return 0.0;
  return lo <= 0.0 ? 0.0 : lo / hi;
}

Eigen::MatrixXd schur_block(const CovMatrix& c, const NodeSet& vars, const NodeSet& z,
                            bool rcond_guard) {
  for (int v : vars) check_cov_index(c, v);
  for (int v : z) check_cov_index(c, v);
  Eigen::MatrixXd vv = submatrix(c.sigma, vars, vars);
  if (z.empty()) return vv;
  Eigen::MatrixXd zz = submatrix(c.sigma, z, z);
  Eigen::MatrixXd zv = submatrix(c.sigma, z, vars);
  if (rcond_guard) {
    if (spd_rcond(zz) < kRcondSingular)
      throw singular_conditioning_error("conditioning covariance block is singular");
    Eigen::LLT<Eigen::MatrixXd> llt(zz);
    return vv - zv.transpose() * llt.solve(zv);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(zz);
  if (llt.info() != Eigen::Success)
    throw singular_conditioning_error("conditioning covariance block is singular");
  // cheap pivot-based guard for the hot path
  const auto& l = llt.matrixLLT();
  double dmin = l(0, 0), dmax = l(0, 0);
  for (int i = 1; i < l.rows(); ++i) {
    dmin = std::min(dmin, l(i, i));
    dmax = std::max(dmax, l(i, i));
  }
  if (!(dmin > 0.0) || (dmin / dmax) * (dmin / dmax) < kRcondSingular)
    throw singular_conditioning_error("conditioning covariance block is singular");
  return vv - zv.transpose() * llt.solve(zv);
}

}  // namespace

double partial_cov(const CovMatrix& c, int a, int b, const NodeSet& z) {
  check_cov_index(c, a);
  check_cov_index(c, b);
  if (a == b) throw input_error("partial covariance needs distinct variables");
  if (set_contains(z, a) || set_contains(z, b))
    throw input_error("conditioning set may not contain the variables");
  NodeSet vars{std::min(a, b), std::max(a, b)};
  Eigen::MatrixXd blk = schur_block(c, vars, z, /*rcond_guard=*/true);
  return blk(0, 1);
}

Eigen::MatrixXd partial_cov_block(const CovMatrix& c, const NodeSet& vars, const NodeSet& z) {
  return schur_block(c, vars, z, /*rcond_guard=*/true);
}

double partial_corr(const CovMatrix& c, int a, int b, const NodeSet& z) {
  if (a == b) throw input_error("partial correlation needs distinct variables");
  if (set_contains(z, a) || set_contains(z, b))
    throw input_error("conditioning set may not contain the variables");
  NodeSet vars{std::min(a, b), std::max(a, b)};
  Eigen::MatrixXd blk = schur_block(c, vars, z, /*rcond_guard=*/false);
  double denom = blk(0, 0) * blk(1, 1);
  if (!(denom > 0.0))
    throw degenerate_correlation_error("zero residual variance in partial correlation");
  return blk(0, 1) / std::sqrt(denom);
}

double normal_two_sided_p(double statistic) {
  return std::erfc(std::abs(statistic) / std::sqrt(2.0));
}

CiResult fisher_z_test(const CovMatrix& c, int a, int b, const NodeSet& z) {
  const long df = c.n - static_cast<long>(z.size()) - 3;
  if (df < 1) throw input_error("fisher_z_test requires n - |z| - 3 >= 1");
  double r = partial_corr(c, a, b, z);
  if (std::abs(r) >= 1.0)
    throw degenerate_correlation_error("|partial correlation| >= 1");
  CiResult out;
  out.df_used = df;
  out.statistic = 0.5 * std::sqrt(static_cast<double>(df)) * std::log((1.0 + r) / (1.0 - r));
  out.p_value = normal_two_sided_p(out.statistic);
  return out;
}

// ---- tetrad ---------------------------------------------------------------

namespace {

void check_tetrad_args(int s_i, int s_j, int w, int y, double alpha) {
  if (s_i == s_j) throw input_error("tetrad needs two distinct candidate instruments");
  if (w == s_i || w == s_j || y == s_i || y == s_j || w == y)
    throw input_error("w and y must be distinct from the candidate pair");
  if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
}

// Cross-covariance entries needed for tau, for one candidate side.
struct SideCov {
  double with_y = 0.0;
  double with_w = 0.0;
};

SideCov side_partials(const CovMatrix& c, int s, int w, int y, const NodeSet& z) {
  NodeSet vars;
  vars.push_back(s);
  vars.push_back(w);
  vars.push_back(y);
  std::sort(vars.begin(), vars.end());
  Eigen::MatrixXd blk = partial_cov_block(c, vars, z);
  auto at = [&](int u, int v) {
    int iu = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), u) - vars.begin());
    int iv = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    return blk(iu, iv);
  };
  return SideCov{at(s, y), at(s, w)};
}

}  // namespace

double tetrad_stat(const CovMatrix& c, int s_i, int s_j, int w, int y, const NodeSet& z_i,
                   const NodeSet& z_j) {
  check_tetrad_args(s_i, s_j, w, y, 0.5);
  SideCov i = side_partials(c, s_i, w, y, z_i);
  SideCov j = side_partials(c, s_j, w, y, z_j);
  return i.with_y * j.with_w - i.with_w * j.with_y;
}

TetradResult tetrad_test_wishart(const CovMatrix& c, int s_i, int s_j, int w, int y,
                                 const NodeSet& z_i, const NodeSet& z_j, double alpha) {
  check_tetrad_args(s_i, s_j, w, y, alpha);
  TetradResult out;
  out.tau = tetrad_stat(c, s_i, s_j, w, y, z_i, z_j);
  out.epsilon = std::abs(out.tau);

  NodeSet vars = make_set({s_i, s_j, w, y});
  // the candidates may sit in each other's conditioning sets; a variable
  // cannot be conditioned on itself, so the union is taken away from vars
  NodeSet z_union = set_minus(set_union(z_i, z_j), vars);
  Eigen::MatrixXd p4 = partial_cov_block(c, vars, z_union);
  auto at = [&](int u, int v) {
    int iu = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), u) - vars.begin());
    int iv = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    return p4(iu, iv);
  };
  const double n_eff = static_cast<double>(c.n) - static_cast<double>(z_union.size());
  if (n_eff <= 3.0) throw input_error("effective sample size too small for the Wishart test");
  const double det_pair = at(s_i, s_i) * at(s_j, s_j) - at(s_i, s_j) * at(s_i, s_j);
  const double det_wy = at(w, w) * at(y, y) - at(w, y) * at(w, y);
  const double det4 = p4.determinant();
  double var = det_pair * det_wy * (n_eff + 1.0) / ((n_eff - 1.0) * (n_eff - 2.0)) -
               det4 / (n_eff - 2.0);
  if (!(var > 0.0))
    throw singular_conditioning_error("degenerate covariance in the Wishart tetrad variance");
  out.sd = std::sqrt(var);
  out.p_value = normal_two_sided_p(out.tau / out.sd);
  out.accepted = out.p_value > alpha;
  return out;
}

TetradResult tetrad_test_bootstrap(const Dataset& data, const CovMatrix& c, int s_i, int s_j,
                                   int w, int y, const NodeSet& z_i, const NodeSet& z_j,
                                   const TetradOptions& opt) {
  check_tetrad_args(s_i, s_j, w, y, opt.alpha);
  if (opt.bootstrap_reps < 16) throw input_error("bootstrap_reps must be at least 16");

  TetradResult out;
  out.tau = tetrad_stat(c, s_i, s_j, w, y, z_i, z_j);
  out.epsilon = std::abs(out.tau);

  // Work on the columns the statistic actually touches; indices in `c`
  // are mapped into this reduced view.
  NodeSet used = make_set({s_i, s_j, w, y});
  used = set_union(used, set_union(z_i, z_j));
  std::vector<int> data_cols;
  std::vector<std::string> labels;
  std::vector<int> remap(c.p(), -1);
  for (int v : used) {
    remap[v] = static_cast<int>(data_cols.size());
    data_cols.push_back(data.col(c.labels[v]));
    labels.push_back(c.labels[v]);
  }
  auto remap_set = [&](const NodeSet& z) {
    NodeSet out_z;
    for (int v : z) out_z.push_back(remap[v]);
    std::sort(out_z.begin(), out_z.end());
    return out_z;
  };
  const NodeSet rz_i = remap_set(z_i), rz_j = remap_set(z_j);
  const int rsi = remap[s_i], rsj = remap[s_j], rw = remap[w], ry = remap[y];

  const long n = data.n();
  const int k = static_cast<int>(data_cols.size());
  Eigen::MatrixXd base(n, k);
  for (int j = 0; j < k; ++j) base.col(j) = data.values.col(data_cols[j]);

  std::vector<double> taus(opt.bootstrap_reps);
  Eigen::MatrixXd draw(n, k);
  for (int rep = 0; rep < opt.bootstrap_reps; ++rep) {
    std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(rep)));
    std::uniform_int_distribution<long> pick(0, n - 1);
    for (long r = 0; r < n; ++r) draw.row(r) = base.row(pick(rng));
    Eigen::RowVectorXd mean = draw.colwise().mean();
    Eigen::MatrixXd centered = draw.rowwise() - mean;
    Eigen::MatrixXd sigma = (centered.transpose() * centered) / static_cast<double>(n - 1);
    sigma = ((sigma + sigma.transpose()) * 0.5).eval();
    CovMatrix cb{std::move(sigma), n, labels};
    taus[rep] = tetrad_stat(cb, rsi, rsj, rw, ry, rz_i, rz_j);
  }
  double mean_tau = 0.0;
  for (double t : taus) mean_tau += t;
  mean_tau /= taus.size();
  double ss = 0.0;
  for (double t : taus) ss += (t - mean_tau) * (t - mean_tau);
  double sd = std::sqrt(ss / (taus.size() - 1));
  if (!(sd > 0.0))
    throw singular_conditioning_error("zero bootstrap variance in the tetrad test");
  out.sd = sd;
  out.p_value = normal_two_sided_p(out.tau / sd);
  out.accepted = out.p_value > opt.alpha;
  return out;
}

TetradResult tetrad_test(const Dataset* data, const CovMatrix& c, int s_i, int s_j, int w, int y,
                         const NodeSet& z_i, const NodeSet& z_j, const TetradOptions& opt) {
  if (opt.variance == TetradVariance::Wishart) {
    TetradResult r = tetrad_test_wishart(c, s_i, s_j, w, y, z_i, z_j, opt.alpha);
    return r;
  }
  if (data == nullptr)
    throw input_error("bootstrap tetrad variance requires row-level data");
  return tetrad_test_bootstrap(*data, c, s_i, s_j, w, y, z_i, z_j, opt);
}

}  // namespace aivgt
