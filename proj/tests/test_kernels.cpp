#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rs/errors.hpp"
#include "rs/kernels.hpp"
#include "rs/quadrature.hpp"
#include "rs/rng.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

rs::Point pt(double t, std::vector<double> x) {
	rs::Point z;
	z.t = t;
	z.x = std::move(x);
	return z;
}

double sphere_area(int d) { return d == 1 ? 2.0 : d == 2 ? 2.0 * kPi : 4.0 * kPi; }

/// Point on the parabolic shell |z|_s = s: t = s^2 cos(alpha), |x| = s sqrt(|sin alpha|).
rs::Point shell_point(int d, double s, double alpha, const std::vector<double>& dir) {
	const double that = std::cos(alpha);
	const double rhat = std::sqrt(std::abs(std::sin(alpha)));
	std::vector<double> x(static_cast<std::size_t>(d), 0.0);
	for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = s * rhat * dir[static_cast<std::size_t>(i)];
	return pt(s * s * that, std::move(x));
}

/// Mirror a set of edges accumulating towards 0 into a symmetric edge list.
std::vector<double> mirrored_edges(const std::vector<double>& pos) {
	std::vector<double> edges;
	for (auto it = pos.rbegin(); it != pos.rend(); ++it) edges.push_back(-*it);
	for (std::size_t i = 1; i < pos.size(); ++i) edges.push_back(pos[i]);
	return edges;
}

/// 2D tensor quadrature of f(t, r), refined towards t = 0 from both sides and
/// towards r = 0; panelization independent of the one used in construction.
double tensor2(const rs::QuadratureRule& trule, const rs::QuadratureRule& rrule,
               const std::function<double(double, double)>& f) {
	double total = 0.0;
	for (std::size_t i = 0; i < trule.size(); ++i) {
		double slice = 0.0;
		for (std::size_t j = 0; j < rrule.size(); ++j)
			slice += rrule.weights[j] * f(trule.nodes[i], rrule.nodes[j]);
		total += trule.weights[i] * slice;
	}
	return total;
}

rs::QuadratureRule shell_time_rule() {
	return rs::composite_gl(16, mirrored_edges(rs::geometric_edges(0.0, 1.02, 45, 2.0)));
}

rs::QuadratureRule shell_radius_rule() {
	return rs::composite_gl(16, rs::geometric_edges(0.0, 1.02, 45, 2.0));
}

} // namespace

TEST_CASE("smooth step and radial cutoffs behave as a dyadic partition of unity") {
	CHECK_EQ(rs::smooth_step(-0.3), 0.0);
	CHECK_EQ(rs::smooth_step(0.0), 0.0);
	CHECK_EQ(rs::smooth_step(1.0), 1.0);
	CHECK_EQ(rs::smooth_step(7.0), 1.0);
	double prev = 0.0;
	for (int i = 1; i <= 36; ++i) {
		const double cur = rs::smooth_step(static_cast<double>(i) / 40.0);
		CHECK_GT(cur, prev);
		prev = cur;
	}
	CHECK_LT(prev, 1.0);

	CHECK_EQ(rs::radial_cutoff(0.0), 1.0);
	CHECK_EQ(rs::radial_cutoff(0.5), 1.0);
	CHECK_EQ(rs::radial_cutoff(1.0), 0.0);
	CHECK_EQ(rs::radial_cutoff(3.0), 0.0);

	// chi = psi - psi(2 .) is supported in [1/4, 1].
	CHECK_EQ(rs::annulus_bump(0.24), 0.0);
	CHECK_EQ(rs::annulus_bump(1.0), 0.0);
	CHECK_EQ(rs::annulus_bump(1.7), 0.0);
	CHECK_GT(rs::annulus_bump(0.5), 0.0);
	CHECK_GT(rs::annulus_bump(0.3), 0.0);
	CHECK_GT(rs::annulus_bump(0.9), 0.0);

	// Telescoping: sum_n chi(2^n u) = psi(u) once the sum saturates.
	for (double u : {1e-9, 1e-3, 0.2, 0.49, 0.63, 0.77, 0.999, 1.3}) {
		double sum = 0.0;
		for (int n = 0; n <= 45; ++n) sum += rs::annulus_bump(std::ldexp(1.0, n) * u);
		CHECK_EQ(sum, doctest::Approx(rs::radial_cutoff(u)).epsilon(1e-13));
	}
}

TEST_CASE("heat kernel: support, unit mass, exact parabolic scaling") {
	CHECK_EQ(rs::heat_kernel(3, pt(0.0, {0.3, 0.0, 0.0})), 0.0);
	CHECK_EQ(rs::heat_kernel(3, pt(-0.2, {0.3, 0.0, 0.0})), 0.0);
	CHECK_EQ(rs::heat_kernel(1, pt(1e-300, {0.5})), 0.0);

	for (int d : {1, 2, 3}) {
		for (double t : {0.05, 0.3, 1.0}) {
			const auto rule =
			    rs::composite_gl(16, rs::uniform_edges(0.0, 16.0 * std::sqrt(t), 32));
			double mass = 0.0;
			for (std::size_t i = 0; i < rule.size(); ++i) {
				const double r = rule.nodes[i];
				std::vector<double> x(static_cast<std::size_t>(d), 0.0);
				x[0] = r;
				mass += rule.weights[i] * rs::heat_kernel(d, pt(t, x)) *
				        std::pow(r, d - 1);
			}
			mass *= sphere_area(d);
			CHECK_EQ(mass, doctest::Approx(1.0).epsilon(1e-10));
		}
	}

	std::mt19937_64 gen = rs::seeded_stream(411, 0);
	std::uniform_real_distribution<double> unif(-1.0, 1.0);
	for (int rep = 0; rep < 50; ++rep) {
		const double lam = 0.3 + 2.0 * std::abs(unif(gen));
		const rs::Point z = pt(0.05 + std::abs(unif(gen)), {unif(gen), unif(gen), unif(gen)});
		rs::Point zs = z;
		zs.t *= lam * lam;
		for (double& c : zs.x) c *= lam;
		const double lhs = rs::heat_kernel(3, z);
		const double rhs = std::pow(lam, 3) * rs::heat_kernel(3, zs);
		CHECK_EQ(lhs, doctest::Approx(rhs).epsilon(1e-13));
		CHECK_EQ(rs::parabolic_norm(zs), doctest::Approx(lam * rs::parabolic_norm(z)).epsilon(1e-13));
	}
}

TEST_CASE("kernel split: K + K_hat = P on a grid and K matches P's singularity") {
	for (int d : {1, 2, 3}) {
		const rs::KernelDecomposition k(d);
		std::mt19937_64 gen = rs::seeded_stream(77, static_cast<std::uint64_t>(d));
		std::uniform_real_distribution<double> unif(-1.0, 1.0);
		for (double t : {-0.7, -0.01, 1e-4, 0.03, 0.4, 1.7}) {
			for (double r : {0.0, 0.15, 0.6, 1.1, 2.3}) {
				std::vector<double> dir(static_cast<std::size_t>(d), 0.0);
				double n2 = 0.0;
				for (double& c : dir) {
					c = unif(gen);
					n2 += c * c;
				}
				for (double& c : dir) c *= r / std::sqrt(n2);
				const rs::Point z = pt(t, dir);
				const double p = k.heat(z);
				const double sum = k.full(z) + k.remainder(z);
				CHECK_EQ(sum, doctest::Approx(p).epsilon(1e-10));
			}
		}

		// Inside |z|_s < 1/4 the split leaves P untouched: K = P exactly, so
		// K inherits the |z|_s^{-d} singularity on the time axis.
		for (double s : {0.05, 0.1, 0.2}) {
			const rs::Point z = pt(s * s, std::vector<double>(static_cast<std::size_t>(d), 0.0));
			CHECK_EQ(k.full(z) * std::pow(s, d),
			         doctest::Approx(std::pow(4.0 * kPi, -0.5 * d)).epsilon(1e-12));
			CHECK_EQ(k.remainder(z), 0.0);
		}

		// K_hat is the smooth part: it vanishes identically near the origin
		// and stays bounded across the t = 0 line away from it.
		CHECK_EQ(k.remainder(pt(0.001, std::vector<double>(static_cast<std::size_t>(d), 0.0))), 0.0);
		std::vector<double> far(static_cast<std::size_t>(d), 0.0);
		far[0] = 0.8;
		const double above = k.remainder(pt(1e-9, far));
		const double below = k.remainder(pt(-1e-9, far));
		CHECK_EQ(above, doctest::Approx(below).epsilon(1e-6));
	}
}

TEST_CASE("dyadic pieces: support, exact self-similarity, scaled sup bounds") {
	for (int d : {1, 3}) {
		const rs::KernelDecomposition k(d, 4, 10);
		std::vector<double> dir(static_cast<std::size_t>(d), 0.0);
		dir[0] = 1.0;
		std::vector<double> dir2(static_cast<std::size_t>(d), 1.0 / std::sqrt(static_cast<double>(d)));

		for (int n : {0, 1, 5, 9}) {
			const double outer = std::ldexp(1.0, -n);
			for (double alpha : {0.0, 0.6, 1.3, 2.2, kPi}) {
				CHECK_EQ(k.piece(n, shell_point(d, outer * 1.01, alpha, dir)), 0.0);
				CHECK_EQ(k.piece(n, shell_point(d, outer * 3.0, alpha, dir2)), 0.0);
				CHECK_EQ(k.piece(n, shell_point(d, outer * 0.124, alpha, dir)), 0.0);
			}
		}

		// K_{n+1}(S_{1/2} z) = 2^d K_n(z) exactly; every piece is a rescaling
		// of K_0, which is the sharp form of the 2^{n(d_s - beta)} sup bound.
		std::mt19937_64 gen = rs::seeded_stream(901, static_cast<std::uint64_t>(d));
		std::uniform_real_distribution<double> unif(0.0, 1.0);
		for (int n : {1, 2, 7}) {
			for (int rep = 0; rep < 40; ++rep) {
				const double s = std::ldexp(0.125 + 0.875 * unif(gen), -n);
				const rs::Point z = shell_point(d, s, kPi * unif(gen), dir2);
				rs::Point zup = z;
				zup.t = std::ldexp(z.t, 2 * n);
				for (double& c : zup.x) c = std::ldexp(c, n);
				const double expect = std::ldexp(k.piece(0, zup), n * d);
				CHECK_EQ(k.piece(n, z), doctest::Approx(expect).epsilon(1e-11));
			}
		}

		double sup0 = 0.0, dsup0 = 0.0;
		const double h = 1e-4;
		for (double alpha = 0.02; alpha < kPi; alpha += 0.07) {
			for (double s : {0.15, 0.3, 0.5, 0.7, 0.9, 1.0}) {
				const rs::Point z = shell_point(d, s, alpha, dir2);
				sup0 = std::max(sup0, std::abs(k.piece(0, z)));
				rs::Point zp = z, zm = z;
				zp.x[0] += h;
				zm.x[0] -= h;
				dsup0 = std::max(dsup0, std::abs(k.piece(0, zp) - k.piece(0, zm)) / (2.0 * h));
			}
		}
		CHECK_GT(sup0, 0.0);
		CHECK_LT(sup0, 100.0);
		for (int n : {3, 8}) {
			double sup = 0.0, dsup = 0.0;
			const double hn = std::ldexp(h, -n);
			for (double alpha = 0.02; alpha < kPi; alpha += 0.07) {
				for (double s : {0.15, 0.3, 0.5, 0.7, 0.9, 1.0}) {
					const rs::Point z = shell_point(d, std::ldexp(s, -n), alpha, dir2);
					sup = std::max(sup, std::abs(k.piece(n, z)));
					rs::Point zp = z, zm = z;
					zp.x[0] += hn;
					zm.x[0] -= hn;
					dsup = std::max(dsup, std::abs(k.piece(n, zp) - k.piece(n, zm)) / (2.0 * hn));
				}
			}
			// Values scale like 2^{nd}, first derivatives like 2^{n(d+1)}.
			CHECK_EQ(sup * std::ldexp(1.0, -n * d), doctest::Approx(sup0).epsilon(1e-9));
			CHECK_EQ(dsup * std::ldexp(1.0, -n * (d + 1)), doctest::Approx(dsup0).epsilon(1e-6));
		}
	}
}

TEST_CASE("moment killing: pieces and the full kernel annihilate low polynomials") {
	// d = 1, full planar integrals with an independent panelization.
	{
		const rs::KernelDecomposition k(1);
		const auto trule = shell_time_rule();
		const auto rrule = shell_radius_rule();

		// Even monomials t^a x^p, 2a + p <= 4; odd p vanish by the mirror
		// symmetry checked below.
		const std::vector<std::pair<int, int>> monos{{0, 0}, {0, 2}, {0, 4}, {1, 0}, {1, 2}, {2, 0}};
		std::vector<double> piece_mom(monos.size(), 0.0), full_mom(monos.size(), 0.0);
		for (std::size_t i = 0; i < trule.size(); ++i) {
			const double t = trule.nodes[i];
			for (std::size_t j = 0; j < rrule.size(); ++j) {
				const double x = rrule.nodes[j];
				const double w = trule.weights[i] * rrule.weights[j] * 2.0;
				const double kp = k.piece(0, pt(t, {x}));
				const double kf = k.full(pt(t, {x}));
				if (kp == 0.0 && kf == 0.0) continue;
				for (std::size_t m = 0; m < monos.size(); ++m) {
					const double mono = std::pow(t, monos[m].first) * std::pow(x, monos[m].second);
					piece_mom[m] += w * kp * mono;
					full_mom[m] += w * kf * mono;
				}
			}
		}
		for (std::size_t m = 0; m < monos.size(); ++m) {
			CAPTURE(monos[m].first);
			CAPTURE(monos[m].second);
			CHECK_LT(std::abs(piece_mom[m]), 2e-6);
			CHECK_LT(std::abs(full_mom[m]), 5e-5);
		}

		std::mt19937_64 gen = rs::seeded_stream(12, 0);
		std::uniform_real_distribution<double> unif(-1.0, 1.0);
		for (int rep = 0; rep < 30; ++rep) {
			const rs::Point z = pt(unif(gen), {unif(gen)});
			CHECK_EQ(k.piece(0, z), k.piece(0, pt(z.t, {-z.x[0]})));
			CHECK_EQ(k.full(z), k.full(pt(z.t, {-z.x[0]})));
		}
	}

	// d = 2, 3: the pieces are spatially radial, so the radial reduction
	// covers every even monomial; spot-check all (a, b) with a + b <= 2.
	for (int d : {2, 3}) {
		const rs::KernelDecomposition k(d);
		const auto trule = shell_time_rule();
		const auto rrule = shell_radius_rule();
		for (int a = 0; a <= 2; ++a) {
			for (int b = 0; a + b <= 2; ++b) {
				const double mom =
				    sphere_area(d) *
				    tensor2(trule, rrule, [&](double t, double r) {
					    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
					    x[0] = r;
					    const double v = k.piece(0, pt(t, x));
					    return v == 0.0 ? 0.0
					                    : v * std::pow(t, a) * std::pow(r, 2 * b + d - 1);
				    });
				CAPTURE(d);
				CAPTURE(a);
				CAPTURE(b);
				CHECK_LT(std::abs(mom), 5e-6);
			}
		}
	}
}

TEST_CASE("pieces sum to the closed-form kernel above the truncation scale") {
	for (int d : {1, 2}) {
		const int levels = 10;
		const rs::KernelDecomposition k(d, 4, levels);
		std::mt19937_64 gen = rs::seeded_stream(333, static_cast<std::uint64_t>(d));
		std::uniform_real_distribution<double> unif(0.0, 1.0);
		std::vector<double> dir(static_cast<std::size_t>(d), 1.0 / std::sqrt(static_cast<double>(d)));
		for (int rep = 0; rep < 60; ++rep) {
			// log-uniform scale in (2^{-levels}, 1).
			const double s = std::pow(2.0, -static_cast<double>(levels) * unif(gen)) * 0.999;
			if (s <= std::ldexp(1.0, -levels)) continue;
			const rs::Point z = shell_point(d, s, kPi * unif(gen), dir);
			double sum = 0.0;
			for (int n = 0; n < levels; ++n) sum += k.piece(n, z);
			CHECK_EQ(sum, doctest::Approx(k.full(z)).epsilon(1e-11));
		}
		// Below the truncation scale the partial sum omits the tail pieces.
		const rs::Point deep = shell_point(d, std::ldexp(1.0, -levels - 2), 0.9, dir);
		double sum = 0.0;
		for (int n = 0; n < levels; ++n) sum += k.piece(n, deep);
		CHECK_NE(sum, doctest::Approx(k.full(deep)).epsilon(1e-11));
	}
}

TEST_CASE("kernel decomposition accessors and argument validation") {
	const rs::KernelDecomposition k(3);
	CHECK_EQ(k.dimension(), 3);
	CHECK_EQ(k.beta(), 2.0);
	CHECK_EQ(k.moment_degree(), 4);
	CHECK_EQ(k.levels(), 10);
	CHECK_EQ(k.correction_basis().size(), 6);
	CHECK_EQ(k.correction_coefficients().size(), 6);
	for (double q : k.correction_coefficients()) CHECK(std::isfinite(q));
	CHECK_THROWS_AS((void)k.piece(-1, pt(0.1, {0, 0, 0})), std::invalid_argument);
	CHECK_THROWS_AS((void)k.piece(10, pt(0.1, {0, 0, 0})), std::invalid_argument);
	CHECK_THROWS_AS((void)k.correction(-1, pt(0.1, {0, 0, 0})), std::invalid_argument);
	CHECK_THROWS_AS(rs::KernelDecomposition(4), std::invalid_argument);
	CHECK_THROWS_AS(rs::KernelDecomposition(2, -2), std::invalid_argument);
	CHECK_THROWS_AS(rs::KernelDecomposition(2, 4, 0), std::invalid_argument);
	CHECK_THROWS_AS((void)rs::heat_kernel(2, pt(0.1, {1.0})), std::invalid_argument);
}

TEST_CASE("mollifier: normalisation, support, scaling, and faithful sampling") {
	for (int d : {1, 2, 3}) {
		const rs::Mollifier rho(d);
		CHECK_EQ(rho.dimension(), d);
		CHECK_GT(rho.raw_mass(), 0.0);

		// Unit mass against an independent Gauss-Legendre grid.
		const auto trule = rs::composite_gl(20, rs::uniform_edges(-1.0, 1.0, 12));
		const auto rrule = rs::composite_gl(20, rs::uniform_edges(0.0, 1.0, 12));
		const double mass = sphere_area(d) * tensor2(trule, rrule, [&](double t, double r) {
			                    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
			                    x[0] = r;
			                    return rho.value(pt(t, x)) * std::pow(r, d - 1);
		                    });
		CHECK_EQ(mass, doctest::Approx(1.0).epsilon(1e-9));

		CHECK_EQ(rho.value(pt(1.0, std::vector<double>(static_cast<std::size_t>(d), 0.0))), 0.0);
		std::vector<double> out(static_cast<std::size_t>(d), 0.0);
		out[0] = 1.0;
		CHECK_EQ(rho.value(pt(0.0, out)), 0.0);
		CHECK_GT(rho.value(pt(0.0, std::vector<double>(static_cast<std::size_t>(d), 0.0))), 0.0);
	}

	// Parabolic rescaling keeps unit mass.
	{
		const int d = 2;
		const double eps = 0.3;
		const rs::Mollifier rho(d);
		const auto trule = rs::composite_gl(20, rs::uniform_edges(-eps * eps, eps * eps, 12));
		const auto rrule = rs::composite_gl(20, rs::uniform_edges(0.0, eps, 12));
		const double mass = sphere_area(d) * tensor2(trule, rrule, [&](double t, double r) {
			                    return rho.value_scaled(eps, pt(t, {r, 0.0})) * r;
		                    });
		CHECK_EQ(mass, doctest::Approx(1.0).epsilon(1e-9));
		CHECK_EQ(rho.value_scaled(1.0, pt(0.1, {0.2, 0.0})),
		         doctest::Approx(rho.value(pt(0.1, {0.2, 0.0}))).epsilon(1e-13));
	}

	// Sampled moments match quadrature moments.
	for (int d : {1, 3}) {
		const rs::Mollifier rho(d);
		const double eps = 0.5;
		const auto trule = rs::composite_gl(20, rs::uniform_edges(-1.0, 1.0, 12));
		const auto rrule = rs::composite_gl(20, rs::uniform_edges(0.0, 1.0, 12));
		const double t2 = sphere_area(d) * tensor2(trule, rrule, [&](double t, double r) {
			                  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
			                  x[0] = r;
			                  return t * t * rho.value(pt(t, x)) * std::pow(r, d - 1);
		                  });
		const double x2 = sphere_area(d) * tensor2(trule, rrule, [&](double t, double r) {
			                  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
			                  x[0] = r;
			                  return r * r * rho.value(pt(t, x)) * std::pow(r, d - 1);
		                  });

		std::mt19937_64 gen = rs::seeded_stream(2024, static_cast<std::uint64_t>(d));
		rs::RunningStats st, sx, sxx, scross;
		const int draws = 200000;
		for (int i = 0; i < draws; ++i) {
			const rs::Point w = rho.sample_scaled(eps, gen);
			CHECK_LE(std::abs(w.t), eps * eps);
			double n2 = 0.0;
			for (double c : w.x) n2 += c * c;
			CHECK_LE(std::sqrt(n2), eps);
			st.push(w.t * w.t);
			sx.push(w.t);
			sxx.push(n2);
			if (d == 3) scross.push(w.x[0] * w.x[1]);
		}
		CHECK_LT(std::abs(st.mean() - std::pow(eps, 4) * t2), 5.0 * st.stderr_of_mean());
		CHECK_LT(std::abs(sx.mean()), 5.0 * sx.stderr_of_mean());
		CHECK_LT(std::abs(sxx.mean() - eps * eps * x2), 5.0 * sxx.stderr_of_mean());
		if (d == 3) CHECK_LT(std::abs(scross.mean()), 5.0 * scross.stderr_of_mean());
	}
}

TEST_CASE("mollified kernel: quadrature agrees with direct sampling and converges to K") {
	const rs::Mollifier rho1(1);
	const rs::KernelDecomposition k1(1);

	// Two independent routes to K_eps(z): tensor quadrature vs Monte-Carlo
	// over mollifier draws.
	for (const rs::Point& z : {pt(0.03, {0.1}), pt(0.2, {0.39}), pt(-0.02, {0.3})}) {
		const double eps = 0.25;
		const double quad = rs::mollified_kernel_value(k1, rho1, eps, z);
		std::mt19937_64 gen = rs::seeded_stream(555, 1);
		rs::RunningStats stats;
		for (int i = 0; i < 200000; ++i) {
			const rs::Point w = rho1.sample_scaled(eps, gen);
			stats.push(k1.full(pt(z.t - w.t, {z.x[0] - w.x[0]})));
		}
		CHECK_LT(std::abs(stats.mean() - quad), 4.0 * stats.stderr_of_mean());
		CHECK_GT(stats.stderr_of_mean(), 0.0);
	}
	{
		const rs::Mollifier rho3(3);
		const rs::KernelDecomposition k3(3);
		const rs::Point z = pt(0.15, {0.3, -0.2, 0.1});
		const double eps = 0.1;
		const double quad = rs::mollified_kernel_value(k3, rho3, eps, z, 10);
		std::mt19937_64 gen = rs::seeded_stream(555, 3);
		rs::RunningStats stats;
		for (int i = 0; i < 200000; ++i) {
			const rs::Point w = rho3.sample_scaled(eps, gen);
			stats.push(k3.full(pt(z.t - w.t, {z.x[0] - w.x[0], z.x[1] - w.x[1], z.x[2] - w.x[2]})));
		}
		CHECK_LT(std::abs(stats.mean() - quad), 4.0 * stats.stderr_of_mean());
	}

	// eps -> 0 pointwise at |z|_s = 1/2, with the second-order rate of a
	// symmetric mollifier.
	{
		const double t = 0.2;
		const double x = std::pow(0.0625 - t * t, 0.25);
		const rs::Point z = pt(t, {x});
		CHECK_EQ(rs::parabolic_norm(z), doctest::Approx(0.5).epsilon(1e-12));
		const double exact = k1.full(z);
		const double e1 = std::abs(rs::mollified_kernel_value(k1, rho1, 0.2, z) - exact);
		const double e2 = std::abs(rs::mollified_kernel_value(k1, rho1, 0.1, z) - exact);
		const double e3 = std::abs(rs::mollified_kernel_value(k1, rho1, 0.05, z) - exact);
		CHECK_LT(e3, 0.01 * std::abs(exact));
		CHECK_LT(e2, 0.5 * e1);
		CHECK_LT(e3, 0.5 * e2);
	}

	// Spatial symmetry is preserved.
	CHECK_EQ(rs::mollified_kernel_value(k1, rho1, 0.25, pt(0.1, {0.2})),
	         doctest::Approx(rs::mollified_kernel_value(k1, rho1, 0.25, pt(0.1, {-0.2})))
	             .epsilon(1e-12));
	{
		const rs::Mollifier rho2(2);
		const rs::KernelDecomposition k2(2);
		const double a = rs::mollified_kernel_value(k2, rho2, 0.3, pt(0.07, {0.25, 0.1}), 12);
		const double b = rs::mollified_kernel_value(k2, rho2, 0.3, pt(0.07, {-0.1, 0.25}), 12);
		CHECK_EQ(a, doctest::Approx(b).epsilon(1e-7));
	}

	// Mass preservation: int K_eps = int K = 0 because the split kills the
	// constant moment.
	{
		const double eps = 0.25;
		const auto trule = rs::composite_gl(8, mirrored_edges(rs::geometric_edges(0.0, 1.0 + eps * eps, 32, 1.6)));
		const auto xrule = rs::composite_gl(8, rs::geometric_edges(0.0, 1.0 + eps, 16, 1.6));
		double mass = 0.0;
		for (std::size_t i = 0; i < trule.size(); ++i)
			for (std::size_t j = 0; j < xrule.size(); ++j)
				mass += trule.weights[i] * xrule.weights[j] * 2.0 *
				        rs::mollified_kernel_value(k1, rho1, eps,
				                                   pt(trule.nodes[i], {xrule.nodes[j]}), 12);
		CHECK_LT(std::abs(mass), 5e-3);
	}

	CHECK_THROWS_AS((void)rs::mollified_kernel_value(k1, rho1, 0.25, pt(0.1, {0.2}), 7),
	                rs::ResolutionTooCoarse);
	CHECK_THROWS_AS((void)rs::mollified_kernel_value(k1, rho1, 0.0, pt(0.1, {0.2})),
	                std::invalid_argument);
	const rs::Mollifier rho3(3);
	CHECK_THROWS_AS((void)rs::mollified_kernel_value(k1, rho3, 0.25, pt(0.1, {0.2})),
	                std::invalid_argument);
}

TEST_CASE("compensated pairing: closed forms, identity against delta subtraction") {
	const auto inv_abs = [](double x) { return 1.0 / std::abs(x); };

	// Constants are annihilated for any kernel.
	CHECK_EQ(rs::compensated_pairing(inv_abs, [](double) { return 3.7; }, -1.0, 1.0), 0.0);

	// int_{-1}^{1} |x| dx = 1.
	CHECK_EQ(rs::compensated_pairing(inv_abs, [](double x) { return x * x; }, -1.0, 1.0),
	         doctest::Approx(1.0).epsilon(1e-10));
	// Asymmetric window: int_{-1/2}^{2} |x| dx = 2.125.
	CHECK_EQ(rs::compensated_pairing(inv_abs, [](double x) { return x * x; }, -0.5, 2.0),
	         doctest::Approx(2.125).epsilon(1e-10));
	// Odd kernel 1/(x|x|) against x^2: the two halves cancel exactly.
	CHECK_EQ(rs::compensated_pairing([](double x) { return 1.0 / (x * std::abs(x)); },
	                                 [](double x) { return x * x; }, -1.0, 1.0),
	         doctest::Approx(0.0).epsilon(1e-10));

	// Smooth case against a plain quadrature oracle.
	{
		const auto W = [](double x) { return std::cos(x); };
		const auto phi = [](double x) { return std::exp(x); };
		const auto rule = rs::composite_gl(20, rs::uniform_edges(0.2, 1.5, 20));
		double oracle = 0.0;
		for (std::size_t i = 0; i < rule.size(); ++i)
			oracle += rule.weights[i] * std::cos(rule.nodes[i]) * (std::exp(rule.nodes[i]) - 1.0);
		CHECK_EQ(rs::compensated_pairing(W, phi, 0.2, 1.5), doctest::Approx(oracle).epsilon(1e-10));
	}

	// Renormalised pairing identity: acting with W_eps on phi after
	// compensation equals int W_eps phi minus (int W_eps) phi(0).
	{
		const double eps = 0.05;
		const auto Weps = [eps](double x) { return 1.0 / (std::abs(x) + eps); };
		const double total_mass = 2.0 * std::log(1.0 + 1.0 / eps);
		const auto rule = rs::composite_gl(24, mirrored_edges(rs::geometric_edges(0.0, 1.0, 60, 1.6)));
		const std::vector<std::function<double(double)>> tests{
		    [](double) { return 1.0; },
		    [](double x) { return x; },
		    [](double x) { return x * x; },
		    [](double x) { return std::cos(x); },
		    [](double x) { return std::exp(x); },
		};
		for (const auto& phi : tests) {
			double plain = 0.0, mass = 0.0;
			for (std::size_t i = 0; i < rule.size(); ++i) {
				plain += rule.weights[i] * Weps(rule.nodes[i]) * phi(rule.nodes[i]);
				mass += rule.weights[i] * Weps(rule.nodes[i]);
			}
			CHECK_EQ(mass, doctest::Approx(total_mass).epsilon(1e-9));
			CHECK_EQ(rs::compensated_pairing(Weps, phi, -1.0, 1.0),
			         doctest::Approx(plain - total_mass * phi(0.0)).epsilon(1e-8));
		}
	}

	// Divergent after compensation (|x|^{-3} against x^2 leaves 1/|x|): the
	// refinement levels cannot agree.
	CHECK_THROWS_AS((void)rs::compensated_pairing(
	                    [](double x) { return 1.0 / std::pow(std::abs(x), 3); },
	                    [](double x) { return x * x; }, -1.0, 1.0),
	                rs::QuadratureFailure);
	CHECK_THROWS_AS((void)rs::compensated_pairing(inv_abs, [](double) { return 1.0; }, 1.0, -1.0),
	                std::invalid_argument);
}
