#include "nrds/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "nrds/errors.hpp"

namespace nrds {

Mat expm(const Mat& a) { return a.exp(); }

double spectral_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

SpectralSplit spectral_split(const Mat& a) {
    const int n = static_cast<int>(a.rows());
    Eigen::EigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::FitFailure, "eigendecomposition failed");

    SpectralSplit out;
    out.spectrum.reserve(n);
    out.gap = 1e300;
    Eigen::VectorXcd sel(n);
    for (int i = 0; i < n; ++i) {
        const std::complex<double> lam = es.eigenvalues()(i);
        out.spectrum.push_back(lam);
        out.gap = std::min(out.gap, std::abs(lam.real()));
        const bool unstable = lam.real() > 0.0;
        sel(i) = unstable ? 1.0 : 0.0;
        if (unstable) ++out.rank_u;
    }
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::MatrixXcd pu = v * sel.asDiagonal() * v.inverse();
    out.proj_u = pu.real();
    out.proj_s = Mat::Identity(n, n) - out.proj_u;
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

Mat range_basis(const Mat& proj, double tol) {
    if (proj.size() == 0) return Mat(0, 0);
    Eigen::JacobiSVD<Mat> svd(proj, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    const double cut = tol * (sv.size() > 0 ? sv(0) : 0.0);
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut && sv(i) > tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

}  // namespace nrds
