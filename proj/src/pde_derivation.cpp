#include "rs/pde_derivation.hpp"
#include <algorithm>

namespace rs {

namespace {

FormalSum<Poly> low_order_jet(int d) {
	FormalSum<Poly> out;
	out.add(Symbol::one(d), Poly::var("phi"));
	for (int i = 1; i <= d; ++i)
		out.add(Symbol::X(d, i), Poly::var("dphi" + std::to_string(i)));
	return out;
}

FormalSum<Poly> fixed_point(const HomogeneityParams& params, const Poly& a) {
	const int d = params.dim;
	FormalSum<Poly> xis{Symbol::xi(d)};
	FormalSum<Poly> jet = low_order_jet(d);
	FormalSum<Poly> phi;
	for (int it = 0; it < 8; ++it) {
		FormalSum<Poly> force = xis - phi.pow(3) - apply_E(phi.pow(5)) * a;
		FormalSum<Poly> next = (apply_I(force) + jet).truncated(Rational(1), params.kappa);
		if (next == phi) return phi;
		phi = next;
	}
	throw TruncationInsufficient("abstract fixed point did not stabilise");
}

} // namespace

FormalSum<Poly> cubic_ansatz(const HomogeneityParams& params) {
	return fixed_point(params, Poly(0));
}

FormalSum<Poly> extended_ansatz(const HomogeneityParams& params, const Poly& a) {
	return fixed_point(params, a);
}

static PDECoefficients derive_impl(const RenormMap& M, const HomogeneityParams& params,
                                   const Poly& a) {
	const int d = params.dim;
	const Rational zero(0);
	const Symbol one = Symbol::one(d);
	const Symbol i1 = *Symbol::I(Symbol::xi(d));
	FormalSum<Poly> xis{Symbol::xi(d)};
	FormalSum<Poly> phi = fixed_point(params, a);
	FormalSum<Poly> rhs =
	    (xis - phi.pow(3) - apply_E(phi.pow(5)) * a).truncated(zero, params.kappa);

	FormalSum<Poly> S = M.apply(rhs).truncated(zero, params.kappa);
	FormalSum<Poly> tu = M.apply(phi);
	FormalSum<Poly> tu0 = tu.truncated(zero, params.kappa);
	FormalSum<Poly> tu3 = tu.pow(3).truncated(zero, params.kappa);
	FormalSum<Poly> teu3 = apply_E(tu.pow(3)).truncated(zero, params.kappa);
	FormalSum<Poly> teu5 = apply_E(tu.pow(5)).truncated(zero, params.kappa);

	FormalSum<Poly> D = S - xis + tu3 + teu5 * a;
	const Symbol e3 = Symbol::E(i1.pow(3));
	const Symbol e2 = Symbol::E(i1.pow(2));
	Poly c3 = D.coeff(e3);
	if (!c3.is_zero()) {
		if (!(teu3.coeff(e3) == Poly(1)))
			throw TruncationInsufficient("eps-cubic template is not monic");
		if (!(D.coeff(e2) == c3 * teu3.coeff(e2)))
			throw TruncationInsufficient("eps-cubic terms do not align with E(u^3)");
	}
	FormalSum<Poly> D2 = D - teu3 * c3;
	if (!(tu0.coeff(i1) == Poly(1)))
		throw TruncationInsufficient("linear template is not monic");
	Poly lam = D2.coeff(i1);
	if (lam.depends_on("phi"))
		throw TruncationInsufficient("mass term depends on the solution jet");
	Poly b = D2.coeff(one) - lam * tu0.coeff(one);
	FormalSum<Poly> resid = D2 - tu0 * lam;
	resid.add(one, Poly(0) - b);
	if (!resid.is_zero())
		throw TruncationInsufficient("uncancelled terms: " + render_sum(resid));

	PDECoefficients out;
	out.cubic = Poly(-1);
	out.quintic = Poly(0) - a;
	out.eps_cubic = c3;
	out.mass = lam;
	out.constant = b;
	Poly c1 = M.coefficients().empty() ? Poly(0) : M.coefficients()[0];
	out.hermite_mass = Poly(3) * c1 - lam;
	out.report = "u coefficient " + lam.str() + "; constant " + b.str() +
	             "; Wick residual mass " + out.hermite_mass.str() +
	             (c3.is_zero() ? std::string()
	                           : "; eps u^3 coefficient " + c3.str() +
	                                 "; the eps u part of H5 sits above the tracked order");
	return out;
}

PDECoefficients renormalized_equation(const RenormMap& M, const HomogeneityParams& params) {
	PDECoefficients out = derive_impl(M, params, Poly(0));
	out.quintic = Poly(0);
	return out;
}

PDECoefficients renormalized_equation_extended(const RenormMap& M, const Poly& a,
                                               const HomogeneityParams& params) {
	return derive_impl(M, params, a);
}

std::pair<Poly, Poly> hermite_shift_identity(const Rational& eps) {
	Poly u = Poly::var("u"), th = Poly::var("theta"), a = Poly::var("a"), C = Poly::var("C");
	Poly ie{Rational(1) / eps};
	Poly c = C * ie;
	Poly lhs = th * ie * u - hermite_poly(3, u, c) - a * Poly(eps) * hermite_poly(5, u, c);
	Poly rhs = ie * (th + Poly(3) * C - Poly(15) * a * C * C) * u -
	           (Poly(1) - Poly(10) * a * C) * u.pow(3) - a * Poly(eps) * u.pow(5);
	return {lhs, rhs};
}

Poly gaussian_smooth(const Poly& p, const std::string& xvar, const Poly& C) {
	int maxn = 0;
	for (const auto& [m, c] : p.terms())
		for (const auto& [v, e] : m)
			if (v == xvar) maxn = std::max(maxn, e);
	Poly out;
	for (int n = 0; n <= maxn; ++n) {
		Poly part = p.coeff_of(xvar, n);
		if (part.is_zero()) continue;
		for (int k = 0; k <= n; k += 2) {
			Rational dd(1);
			for (int j = 1; j < k; j += 2) dd *= Rational(j);
			out += part * Poly(binomial(n, k) * dd) * C.pow(k / 2) * Poly::var(xvar, n - k);
		}
	}
	return out;
}

} // namespace rs
