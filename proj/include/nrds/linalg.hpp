#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace nrds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// e^{A} by Pade scaling-and-squaring (dense, small dimensions)
Mat expm(const Mat& a);

// largest singular value
double spectral_norm(const Mat& a);

struct SpectralSplit {
    Mat proj_u;                         // spectral projector, Re(lambda) > 0
    Mat proj_s;                         // complementary projector
    int rank_u = 0;
    double gap = 0.0;                   // min |Re lambda|
    std::vector<std::complex<double>> spectrum;
};

// Splits along the imaginary axis via the eigendecomposition of a.
SpectralSplit spectral_split(const Mat& a);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Orthonormal basis of the range of a projector (columns), rank detected
// at the given relative tolerance.
Mat range_basis(const Mat& proj, double tol = 1e-9);

}  // namespace nrds
