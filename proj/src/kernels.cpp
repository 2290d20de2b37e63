#include "rs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

#include "rs/errors.hpp"
#include "rs/quadrature.hpp"

namespace rs {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sphere_area(int d) {
	switch (d) {
	case 1: return 2.0;
	case 2: return 2.0 * kPi;
	case 3: return 4.0 * kPi;
	}
	throw std::invalid_argument("spatial dimension must be 1, 2 or 3");
}

double norm_sq(const std::vector<double>& x) {
	double s = 0.0;
	for (double v : x) s += v * v;
	return s;
}

/// exp(-1/v) extended by 0 across v <= 0; the basic C-infinity ingredient.
double cinf_ramp(double v) { return v <= 0.0 ? 0.0 : std::exp(-1.0 / v); }

/// Standard bump exp(-1/(1-u^2)) on (-1,1), 0 outside.
double bump(double u) { return cinf_ramp(1.0 - u * u); }

/// Heat kernel at (t, |x| = r) through a single exp, so deep inside the
/// Gaussian tail the value underflows to 0 instead of forming 0 * inf.
double heat_radial(int d, double t, double r) {
	if (t <= 0.0) return 0.0;
	return std::exp(-0.5 * d * std::log(4.0 * kPi * t) - r * r / (4.0 * t));
}

double parabolic_norm_radial(double t, double r) {
	const double r2 = r * r;
	return std::pow(t * t + r2 * r2, 0.25);
}

/// Inverse-CDF draw from a tabulated monotone CDF, linear within cells.
double sample_cdf(const std::vector<double>& grid, const std::vector<double>& cdf, double u) {
	auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
	if (it == cdf.begin()) return grid.front();
	if (it == cdf.end()) return grid.back();
	const std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
	const double c0 = cdf[hi - 1], c1 = cdf[hi];
	const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
	return grid[hi - 1] + frac * (grid[hi] - grid[hi - 1]);
}

} // namespace

double parabolic_norm(const Point& z) {
	return parabolic_norm_radial(z.t, std::sqrt(norm_sq(z.x)));
}

double heat_kernel(int d, const Point& z) {
	if (static_cast<int>(z.x.size()) != d)
		throw std::invalid_argument("heat_kernel: point dimension mismatch");
	return heat_radial(d, z.t, std::sqrt(norm_sq(z.x)));
}

double smooth_step(double v) {
	if (v <= 0.0) return 0.0;
	if (v >= 1.0) return 1.0;
	const double lo = cinf_ramp(v);
	return lo / (lo + cinf_ramp(1.0 - v));
}

double radial_cutoff(double u) { return smooth_step(2.0 - 2.0 * u); }

double annulus_bump(double u) { return radial_cutoff(u) - radial_cutoff(2.0 * u); }

KernelDecomposition::KernelDecomposition(int d, int moment_degree, int levels)
    : d_(d), moment_degree_(moment_degree), levels_(levels) {
	sphere_area(d);
	if (moment_degree < 0) throw std::invalid_argument("moment-kill degree must be >= 0");
	if (levels < 1) throw std::invalid_argument("need at least one dyadic level");

	const int top = moment_degree_ / 2;
	for (int i = 0; i <= top; ++i)
		for (int j = 0; i + j <= top; ++j) basis_.push_back({i, j});
	const std::size_t nb = basis_.size();

	// Every monomial with an odd spatial index integrates to zero against
	// both chi(|z|_s) P and the radial profile, so the moment conditions
	// reduce to the radial family t^a |x|^{2b} with a + b <= N/2; the shared
	// angular factor cancels between the two sides.
	//
	// Moments of chi(|z|_s) P, integrated in v = log t: the boundary layer
	// e^{-r^2/4t} becomes an O(1)-wide transition, so uniform panels in v
	// converge fast. Below v = -34 the annulus forces r >~ 1/4 and the
	// integrand underflows to zero.
	const QuadratureRule vrule = composite_gl(16, uniform_edges(-34.0, 0.0, 68));
	const QuadratureRule rrule = composite_gl(16, uniform_edges(0.0, 1.0, 16));
	std::vector<double> heat_moment(nb, 0.0);
	for (std::size_t iv = 0; iv < vrule.size(); ++iv) {
		const double t = std::exp(vrule.nodes[iv]);
		for (std::size_t ir = 0; ir < rrule.size(); ++ir) {
			const double r = rrule.nodes[ir];
			const double common = annulus_bump(parabolic_norm_radial(t, r)) *
			                      heat_radial(d_, t, r) * t * std::pow(r, d_ - 1) *
			                      vrule.weights[iv] * rrule.weights[ir];
			if (common == 0.0) continue;
			for (std::size_t k = 0; k < nb; ++k)
				heat_moment[k] += common * std::pow(t, basis_[k].first) *
				                  std::pow(r, 2 * basis_[k].second);
		}
	}

	// Gram matrix of the radial monomials under the annulus weight eta. Its
	// t-parity checkerboard splits it into two positive-definite blocks, so
	// the system is invertible.
	Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<int>(nb), static_cast<int>(nb));
	Eigen::VectorXd phi(static_cast<int>(nb));
	const QuadratureRule trule = composite_gl(16, uniform_edges(-1.0, 1.0, 16));
	for (std::size_t it = 0; it < trule.size(); ++it) {
		const double t = trule.nodes[it];
		for (std::size_t ir = 0; ir < rrule.size(); ++ir) {
			const double r = rrule.nodes[ir];
			const double common = annulus_bump(parabolic_norm_radial(t, r)) *
			                      std::pow(r, d_ - 1) * trule.weights[it] * rrule.weights[ir];
			if (common == 0.0) continue;
			for (std::size_t k = 0; k < nb; ++k)
				phi(static_cast<int>(k)) = std::pow(t, basis_[k].first) *
				                           std::pow(r, 2 * basis_[k].second);
			gram.noalias() += common * phi * phi.transpose();
		}
	}

	// Requiring int K_n z^m = 0 simultaneously for all n fixes the profile
	// moments as J_m = -I_m / (1 - 2^{-(2+|m|_s)}): the geometric factor is
	// what the telescoped correction C_n - C_{n+1} contributes at level n.
	Eigen::VectorXd target(static_cast<int>(nb));
	for (std::size_t k = 0; k < nb; ++k) {
		const int deg = 2 * basis_[k].first + 2 * basis_[k].second;
		target(static_cast<int>(k)) =
		    -heat_moment[k] / (1.0 - std::pow(2.0, -(2.0 + deg)));
	}
	const Eigen::VectorXd sol = gram.fullPivLu().solve(target);
	q_.assign(sol.data(), sol.data() + nb);
}

double KernelDecomposition::unit_profile(const Point& w) const {
	const double r2 = norm_sq(w.x);
	const double eta = annulus_bump(parabolic_norm_radial(w.t, std::sqrt(r2)));
	if (eta == 0.0) return 0.0;
	double poly = 0.0;
	for (std::size_t k = 0; k < basis_.size(); ++k)
		poly += q_[k] * std::pow(w.t, basis_[k].first) * std::pow(r2, basis_[k].second);
	return eta * poly;
}

double KernelDecomposition::heat(const Point& z) const { return heat_kernel(d_, z); }

double KernelDecomposition::full(const Point& z) const {
	const double psi = radial_cutoff(parabolic_norm(z));
	double out = unit_profile(z);
	if (psi != 0.0) out += psi * heat_kernel(d_, z);
	return out;
}

double KernelDecomposition::remainder(const Point& z) const {
	// Written as (1 - psi) P - Phi rather than P - full so the region where
	// psi == 1 sidesteps the huge-P cancellation.
	const double tail = 1.0 - radial_cutoff(parabolic_norm(z));
	double out = -unit_profile(z);
	if (tail != 0.0) out += tail * heat_kernel(d_, z);
	return out;
}

double KernelDecomposition::correction(int n, const Point& z) const {
	if (n < 0) throw std::invalid_argument("correction: negative level");
	const double lam = std::ldexp(1.0, n);
	Point w;
	w.t = lam * lam * z.t;
	w.x = z.x;
	for (double& c : w.x) c *= lam;
	return std::pow(lam, d_) * unit_profile(w);
}

double KernelDecomposition::piece(int n, const Point& z) const {
	if (n < 0 || n >= levels_) throw std::invalid_argument("piece: level out of range");
	const double chi = annulus_bump(std::ldexp(1.0, n) * parabolic_norm(z));
	double out = correction(n, z) - correction(n + 1, z);
	if (chi != 0.0) out += chi * heat_kernel(d_, z);
	return out;
}

Mollifier::Mollifier(int d) : d_(d) {
	const double area = sphere_area(d);
	const int cells = 2000;

	// CDF tables with per-cell Gauss-Legendre increments; linear
	// interpolation between grid points drives the sampler.
	const auto build = [cells](std::vector<double>& grid, std::vector<double>& cdf,
	                           double lo, double hi, const std::function<double(double)>& f) {
		grid.resize(static_cast<std::size_t>(cells) + 1);
		cdf.assign(static_cast<std::size_t>(cells) + 1, 0.0);
		for (int i = 0; i <= cells; ++i)
			grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / cells;
		const QuadratureRule rule = composite_gl(4, grid);
		for (int i = 0; i < cells; ++i) {
			double inc = 0.0;
			for (int j = 0; j < 4; ++j) {
				const std::size_t at = static_cast<std::size_t>(4 * i + j);
				inc += rule.weights[at] * f(rule.nodes[at]);
			}
			cdf[static_cast<std::size_t>(i + 1)] = cdf[static_cast<std::size_t>(i)] + inc;
		}
		return cdf.back();
	};

	const double tmass = build(t_grid_, t_cdf_, -1.0, 1.0, [](double u) { return bump(u); });
	const double rmass = build(r_grid_, r_cdf_, 0.0, 1.0, [d](double u) {
		return std::pow(u, d - 1) * bump(u);
	});

	norm_ = tmass * area * rmass;
	for (double& c : t_cdf_) c /= tmass;
	for (double& c : r_cdf_) c /= rmass;
}

double Mollifier::value(const Point& z) const {
	if (static_cast<int>(z.x.size()) != d_)
		throw std::invalid_argument("mollifier: point dimension mismatch");
	return bump(z.t) * bump(std::sqrt(norm_sq(z.x))) / norm_;
}

double Mollifier::value_scaled(double eps, const Point& z) const {
	if (eps <= 0.0) throw std::invalid_argument("mollifier scale must be positive");
	Point u;
	u.t = z.t / (eps * eps);
	u.x = z.x;
	for (double& c : u.x) c /= eps;
	return std::pow(eps, -(d_ + 2)) * value(u);
}

Point Mollifier::sample_scaled(double eps, std::mt19937_64& gen) const {
	if (eps <= 0.0) throw std::invalid_argument("mollifier scale must be positive");
	std::uniform_real_distribution<double> unif(0.0, 1.0);
	const double t = sample_cdf(t_grid_, t_cdf_, unif(gen));
	const double r = sample_cdf(r_grid_, r_cdf_, unif(gen));
	Point out;
	out.t = eps * eps * t;
	out.x.assign(static_cast<std::size_t>(d_), 0.0);
	switch (d_) {
	case 1:
		out.x[0] = unif(gen) < 0.5 ? -r : r;
		break;
	case 2: {
		const double phi = 2.0 * kPi * unif(gen);
		out.x[0] = r * std::cos(phi);
		out.x[1] = r * std::sin(phi);
		break;
	}
	case 3: {
		const double c = 2.0 * unif(gen) - 1.0;
		const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
		const double phi = 2.0 * kPi * unif(gen);
		out.x[0] = r * s * std::cos(phi);
		out.x[1] = r * s * std::sin(phi);
		out.x[2] = r * c;
		break;
	}
	}
	for (double& c : out.x) c *= eps;
	return out;
}

double mollified_kernel_value(const KernelDecomposition& k, const Mollifier& rho,
                              double eps, const Point& z, int nodes_per_axis) {
	if (rho.dimension() != k.dimension())
		throw std::invalid_argument("kernel and mollifier dimension mismatch");
	if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in (0, 1]");
	if (nodes_per_axis < 8)
		throw ResolutionTooCoarse(
		    "mollified kernel: fewer than 8 nodes per axis resolves the mollifier "
		    "support worse than eps/4");
	const int d = k.dimension();

	// Unit mollifier coordinates: K_eps(z) = int_{[-1,1]^{1+d}} rho(u) K(z - S_eps u) du.
	// Each axis splits at the pullback of K's singular point when it lies
	// inside the box, so accuracy survives |z|_s <~ eps.
	std::vector<QuadratureRule> rules;
	rules.reserve(static_cast<std::size_t>(d) + 1);
	for (int axis = 0; axis <= d; ++axis) {
		const double pull =
		    axis == 0 ? z.t / (eps * eps) : z.x[static_cast<std::size_t>(axis - 1)] / eps;
		std::vector<double> edges{-1.0};
		if (pull > -1.0 && pull < 1.0) edges.push_back(pull);
		edges.push_back(1.0);
		rules.push_back(composite_gl(nodes_per_axis, edges));
	}

	std::vector<std::size_t> idx(static_cast<std::size_t>(d) + 1, 0);
	Point u, arg;
	u.x.assign(static_cast<std::size_t>(d), 0.0);
	arg.x.assign(static_cast<std::size_t>(d), 0.0);
	double total = 0.0;
	while (true) {
		double w = 1.0;
		for (int axis = 0; axis <= d; ++axis)
			w *= rules[static_cast<std::size_t>(axis)].weights[idx[static_cast<std::size_t>(axis)]];
		u.t = rules[0].nodes[idx[0]];
		for (int i = 0; i < d; ++i)
			u.x[static_cast<std::size_t>(i)] =
			    rules[static_cast<std::size_t>(i + 1)].nodes[idx[static_cast<std::size_t>(i + 1)]];
		const double density = rho.value(u);
		if (density != 0.0) {
			arg.t = z.t - eps * eps * u.t;
			for (int i = 0; i < d; ++i)
				arg.x[static_cast<std::size_t>(i)] =
				    z.x[static_cast<std::size_t>(i)] - eps * u.x[static_cast<std::size_t>(i)];
			total += w * density * k.full(arg);
		}
		int axis = 0;
		while (axis <= d) {
			auto& i = idx[static_cast<std::size_t>(axis)];
			if (++i < rules[static_cast<std::size_t>(axis)].size()) break;
			i = 0;
			++axis;
		}
		if (axis > d) break;
	}
	return total;
}

double compensated_pairing(const std::function<double(double)>& W,
                           const std::function<double(double)>& phi,
                           double a, double b, double tol) {
	if (!(a < b)) throw std::invalid_argument("compensated_pairing: need a < b");
	const double base = phi(0.0);

	// H(q) = signed integral of W (phi - phi(0)) from 0 to q; the pairing is
	// H(b) - H(a), and each half refines geometrically into the singular
	// point 0 regardless of where the interval sits.
	const auto level = [&](int npts, int panels, double ratio) {
		const auto half = [&](double q) {
			if (q == 0.0) return 0.0;
			const double sign = q > 0.0 ? 1.0 : -1.0;
			const QuadratureRule rule =
			    composite_gl(npts, geometric_edges(0.0, std::abs(q), panels, ratio));
			double s = 0.0;
			for (std::size_t i = 0; i < rule.size(); ++i) {
				const double x = sign * rule.nodes[i];
				s += rule.weights[i] * W(x) * (phi(x) - base);
			}
			return sign * s;
		};
		return half(b) - half(a);
	};

	const double coarse = level(16, 48, 2.0);
	const double fine = level(24, 96, std::sqrt(2.0));
	if (std::abs(fine - coarse) > tol * std::max(1.0, std::abs(fine)))
		throw QuadratureFailure("compensated pairing: refinement levels disagree");
	return fine;
}

} // namespace rs
