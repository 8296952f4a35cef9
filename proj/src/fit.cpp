#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <thread>

#include "bergman/error.hpp"
#include "bergman/exact.hpp"

namespace bergman {

namespace {

std::vector<double> kernel_values_over_k(const ModelGeometry& g, const std::vector<int>& k_list,
                                         const std::vector<Point>& points, const QuadSpec& quad) {
  const std::size_t nk = k_list.size(), np = points.size();
  std::vector<double> out(nk * np);
  std::vector<std::exception_ptr> errors(nk);
  auto work = [&](std::size_t i) {
    try {
      BergmanKernel K(g, k_list[i], quad);
      for (std::size_t p = 0; p < np; ++p) out[i * np + p] = K.value(points[p]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads = static_cast<std::size_t>(std::max(1, quad.threads));
  if (threads == 1) {
    for (std::size_t i = 0; i < nk; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, nk); ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < nk; i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace

FitReport expansion_fit_values(int n, const std::vector<int>& k_list, const std::vector<double>& values,
                               const CoefficientSet& coeffs, const FitOptions& options) {
  const std::size_t m = k_list.size();
  if (m < 5) throw Error(ErrorKind::InvalidArgument, "expansion fit needs at least 5 values of k");
  if (values.size() != m) throw Error(ErrorKind::InvalidArgument, "one kernel value per k expected");
  int kmin = k_list[0], kmax = k_list[0];
  for (int k : k_list) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    kmin = std::min(kmin, k);
    kmax = std::max(kmax, k);
  }
  if (kmax < 2 * kmin) throw Error(ErrorKind::InvalidArgument, "k range must span at least one octave");
  if (!coeffs.b1 || !coeffs.b2) throw Error(ErrorKind::InvalidArgument, "coefficient set lacks b1 and b2");

  FitReport rep;
  rep.k_list = k_list;
  rep.values = values;
  rep.predicted_b = {coeffs.b0, *coeffs.b1, *coeffs.b2};

  Eigen::VectorXd x(static_cast<Eigen::Index>(m)), y(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double k = k_list[i];
    const double kn = std::pow(k, n);
    const double rho = values[i] - coeffs.b0 * kn - *coeffs.b1 * kn / k - *coeffs.b2 * kn / (k * k);
    rep.residuals.push_back(rho);
    x(static_cast<Eigen::Index>(i)) = std::log(k);
    y(static_cast<Eigen::Index>(i)) = std::log(std::max(std::abs(rho), 1e-300));
  }
  const double xm = x.mean(), ym = y.mean();
  const Eigen::VectorXd dx = x.array() - xm, dy = y.array() - ym;
  const double sxx = dx.squaredNorm();
  rep.slope = dx.dot(dy) / sxx;
  const double ssr = (dy - rep.slope * dx).squaredNorm();
  rep.slope_stderr = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);

  const int cols = 3 + options.nuisance_terms;
  if (static_cast<std::size_t>(cols) > m) throw Error(ErrorKind::FitDegenerate, "more fit columns than samples");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(m), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (int c = 0; c < cols; ++c) A(static_cast<Eigen::Index>(i), c) = std::pow(double(k_list[i]), n - c);
    b(static_cast<Eigen::Index>(i)) = values[i];
  }
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As);
  const auto& sv = svd.singularValues();
  rep.design_cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(rep.design_cond <= options.cond_limit)) {
    throw Error(ErrorKind::FitDegenerate, "design matrix condition " + std::to_string(rep.design_cond));
  }
  const Eigen::VectorXd coef = As.colPivHouseholderQr().solve(b).cwiseQuotient(scale);
  rep.fitted_b.assign(coef.data(), coef.data() + coef.size());
  return rep;
}

FitReport expansion_fit(const ModelGeometry& g, const std::vector<int>& k_list, std::span<const cplx> z,
                        const CoefficientSet& coeffs, const FitOptions& options, const QuadSpec& quad) {
  const std::vector<Point> pts{Point(z.begin(), z.end())};
  return expansion_fit_values(g.n(), k_list, kernel_values_over_k(g, k_list, pts, quad), coeffs, options);
}

DegeneracyTable degeneracy_scan(const ModelGeometry& g, const std::vector<int>& k_list,
                                const std::vector<Point>& points, const QuadSpec& quad) {
  const auto vals = kernel_values_over_k(g, k_list, points, quad);
  std::vector<std::optional<double>> b0(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    auto rep = curvature_report_partial(g, points[p]);
    if (!rep.stratum.degenerate) b0[p] = b0_coeff(rep, rep.stratum.q).b0;
  }
  DegeneracyTable out;
  out.decreasing.assign(points.size(), true);
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    const double kn = std::pow(double(k_list[i]), g.n());
    for (std::size_t p = 0; p < points.size(); ++p) {
      DegeneracyRow row;
      row.k = k_list[i];
      row.point = points[p];
      row.scaled_value = vals[i * points.size() + p] / kn;
      row.b0 = b0[p];
      if (i > 0 && !(row.scaled_value < vals[(i - 1) * points.size() + p] / std::pow(double(k_list[i - 1]), g.n()))) {
        out.decreasing[p] = false;
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace bergman
