#pragma once
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace rs {

/// Space-time point (t, x_1..x_d); the spatial dimension is x.size().
struct Point {
	double t = 0.0;
	std::vector<double> x;
};

/// Parabolic norm (t^2 + |x|^4)^{1/4}; 1-homogeneous under the scaling
/// (t, x) -> (lambda^2 t, lambda x).
double parabolic_norm(const Point& z);

/// Heat kernel on R x R^d: (4 pi t)^{-d/2} exp(-|x|^2 / 4t) for t > 0,
/// 0 for t <= 0. Evaluated in log space so small t never produces NaN.
double heat_kernel(int d, const Point& z);

/// C-infinity step: 0 for v <= 0, 1 for v >= 1, strictly monotone between.
double smooth_step(double v);
/// Radial cutoff psi: 1 on [0, 1/2], 0 on [1, inf).
double radial_cutoff(double u);
/// Annulus bump chi(u) = psi(u) - psi(2u): support [1/4, 1] and the dyadic
/// telescoping identity sum_{n>=0} chi(2^n u) = psi(u).
double annulus_bump(double u);

/// Singular part K of the heat kernel split P = K + K_hat.
///
/// Construction: K_n = chi_n P + C_n - C_{n+1}, where chi_n(z) =
/// chi(2^n |z|_s) and C_n(z) = 2^{nd} Phi(2^{2n} t, 2^n x) for one fixed
/// smooth annulus profile Phi = eta(|w|_s) Q(t, |x|^2). The radial
/// polynomial Q is solved from a small Gram system so that every K_n
/// annihilates all monomials of parabolic degree <= moment_degree; spatial
/// radiality kills the odd-index monomials for free. The sum telescopes to
/// K = psi(|z|_s) P + C_0, so K and K_hat = (1 - psi) P - C_0 have closed
/// forms and K_hat is smooth.
class KernelDecomposition {
public:
	explicit KernelDecomposition(int d, int moment_degree = 4, int levels = 10);

	int dimension() const { return d_; }
	double beta() const { return 2.0; }
	int moment_degree() const { return moment_degree_; }
	int levels() const { return levels_; }

	double heat(const Point& z) const;           ///< P
	double full(const Point& z) const;           ///< K
	double remainder(const Point& z) const;      ///< K_hat = P - K
	double piece(int n, const Point& z) const;   ///< K_n for 0 <= n < levels
	double correction(int n, const Point& z) const; ///< C_n

	/// Coefficients of Q on the basis t^i |x|^{2j}, i + j <= moment_degree/2
	/// (exposed for diagnostics).
	const std::vector<double>& correction_coefficients() const { return q_; }
	const std::vector<std::pair<int, int>>& correction_basis() const { return basis_; }

private:
	double unit_profile(const Point& w) const;
	int d_;
	int moment_degree_;
	int levels_;
	std::vector<std::pair<int, int>> basis_;
	std::vector<double> q_;
};

/// Smooth compactly supported mollifier rho(t, x) = c b(t) b(|x|) with
/// b(u) = exp(-1/(1-u^2)) on (-1,1), normalised to unit integral. The
/// parabolic rescaling is rho_eps(t,x) = eps^{-(d+2)} rho(t/eps^2, x/eps).
class Mollifier {
public:
	explicit Mollifier(int d);
	int dimension() const { return d_; }
	double value(const Point& z) const;
	double value_scaled(double eps, const Point& z) const;
	/// One exact draw from the density rho_eps (tabulated inverse CDF per
	/// radial factor, uniform direction).
	Point sample_scaled(double eps, std::mt19937_64& gen) const;
	/// Integral of rho over the whole space before normalisation (diagnostic).
	double raw_mass() const { return norm_; }

private:
	int d_;
	double norm_;
	std::vector<double> t_grid_, t_cdf_;
	std::vector<double> r_grid_, r_cdf_;
};

/// K_eps(z) = (K * rho_eps)(z) by tensor Gauss-Legendre over the mollifier
/// support. Throws ResolutionTooCoarse when nodes_per_axis resolves the
/// support worse than eps/4.
double mollified_kernel_value(const KernelDecomposition& k, const Mollifier& rho,
                              double eps, const Point& z, int nodes_per_axis = 16);

/// Compensated pairing of a kernel with an integrable singularity at 0
/// against a test function: integral over [a, b] of W(x) (phi(x) - phi(0)).
/// Panels refine geometrically into the singularity; throws
/// QuadratureFailure if two refinement levels fail to agree within tol.
double compensated_pairing(const std::function<double(double)>& W,
                           const std::function<double(double)>& phi,
                           double a, double b, double tol = 1e-9);

} // namespace rs
